import numpy as np
import pytest
from scipy.integrate import solve_ivp

from floqnf.errors import DegenerateSection, FrameDegenerate
from floqnf.fields import BUILTINS, forcing, jacobian_mismatch, planar_cycle, polynomial_field
from floqnf.orbitframes import (build_frame, frame_identities, refine_orbit, roundtrip_check,
                                transformed_rhs, verify_properties)

TWO_PI = 2 * np.pi


def scipy_multipliers(f, z0, T):
    """Monodromy of the variational equation via scipy, independent of the package integrator."""
    n = f.n

    def rhs(t, y):
        return np.r_[f(y[:n]), (f.jacobian(y[:n]) @ y[n:].reshape(n, n)).ravel()]

    y = solve_ivp(rhs, (0.0, T), np.r_[z0, np.eye(n).ravel()], method="DOP853",
                  rtol=1e-12, atol=1e-13).y[:, -1]
    return np.linalg.eigvals(y[n:].reshape(n, n))


@pytest.mark.parametrize("name", list(BUILTINS))
def test_builtin_jacobians_match_differences(name):
    f = BUILTINS[name]()
    rng = np.random.default_rng(1)
    probes = [rng.normal(size=f.n) + np.r_[1.0, np.zeros(f.n - 1)] for _ in range(5)]
    assert jacobian_mismatch(f, probes) <= 1e-6


def test_planar_orbit(frames):
    _, orbit, frame = frames["planar_cycle"]
    assert abs(orbit.period - TWO_PI) <= 1e-6
    assert abs(np.linalg.norm(orbit.phi(1.0)) - 1.0) <= 1e-8
    assert frame.d == 0 and frame.q0 == 0
    assert np.allclose(frame.L, 0.0, atol=1e-8)
    assert np.allclose(frame.H1, [[-2.0]], atol=1e-4)


def test_planar_multiplier_against_scipy(frames):
    f, orbit, _ = frames["planar_cycle"]
    mu = np.sort(np.abs(scipy_multipliers(f, orbit.z0, orbit.period)))
    assert abs(mu[0] - np.exp(-4 * np.pi)) <= 1e-8


def test_planar_properties(frames):
    f, _, frame = frames["planar_cycle"]
    rep = verify_properties(frame, f, forcing(1e-3, 2))
    assert rep.passed, {k: v.to_dict() for k, v in rep.checks.items()}
    assert set(rep.checks) >= {"eigenvalue_rates", "vanishing_on_orbit", "perturbation_bound"}


def test_twisted_frame(frames):
    f, orbit, frame = frames["twisted_cycle"]
    assert frame.d == 2 and frame.q0 == 0
    re = np.sort(np.linalg.eigvals(frame.H2).real)
    assert np.allclose(re, np.sort([np.log(0.25) / TWO_PI, np.log(0.5) / TWO_PI]), atol=1e-5)
    ids = {v.name: v for v in frame_identities(frame)}
    assert ids["U_antiperiodicity"].deviation <= 1e-6


def test_twisted_multipliers_independent(frames):
    f, orbit, _ = frames["twisted_cycle"]
    mu = np.sort(scipy_multipliers(f, orbit.z0, orbit.period).real)
    assert np.allclose(mu, [-0.5, -0.25, 1.0], atol=1e-8)


def test_twisted_sign_flips(frames):
    f, _, frame = frames["twisted_cycle"]
    rep = verify_properties(frame, f, forcing(1e-3, 3))
    for key in ("shift_even_remainders", "shift_odd_remainders"):
        assert rep.checks[key].passed and rep.checks[key].deviation <= 1e-6
    assert rep.passed and rep.identities_passed


def test_twisted_U_shift_pointwise(frames):
    _, _, frame = frames["twisted_cycle"]
    for s in np.linspace(0.0, TWO_PI, 7):
        assert np.allclose(frame.U(s + frame.period), -frame.U(s), atol=1e-6)
        # beyond the stored window the sampler reduces by periods
        assert np.allclose(frame.U(s + 3 * frame.period), -frame.U(s), atol=1e-6)


def test_rigid_rotation_frame(frames):
    _, _, frame = frames["rigid_rotation"]
    assert frame.q0 == 0 and np.allclose(frame.L, 0.0, atol=1e-8)


def test_shear_rotation_has_q0_one():
    f = polynomial_field([[[-1.0, [2, 1]], [-1.0, [0, 3]]], [[1.0, [3, 0]], [1.0, [1, 2]]]], "shear")
    frame = build_frame(f, refine_orbit(f, [1.0, 0.0], TWO_PI))
    assert frame.q0 == 1
    assert abs(frame.L[0]) > 1e-3


def test_projections_are_dual(frames):
    _, _, frame = frames["twisted_cycle"]
    for s in (0.0, 1.3, 4.0):
        Q = np.column_stack([frame.tangent(s), frame.U(s)])
        P = np.vstack([frame.eta(s) / (frame.eta(s) @ frame.tangent(s)), frame.xi(s).T])
        assert np.allclose(P @ Q, np.eye(3), atol=1e-8)


def test_transformed_rhs_on_orbit(frames):
    f, _, frame = frames["planar_cycle"]
    r = transformed_rhs(frame, f, None, 0.0, 0.4, [0.0], [])
    assert abs(r.s_dot - 1.0) <= 1e-8 and np.allclose(r.v_dot, 0.0, atol=1e-8)


def test_frame_degenerate_far_from_orbit(frames):
    f, _, frame = frames["planar_cycle"]
    # U' = -phi' here, so h = 1 collapses the first coefficient column (z at the origin)
    with pytest.raises(FrameDegenerate):
        transformed_rhs(frame, f, None, 0.0, 0.0, [1.0], [])


def test_roundtrip_against_scipy(frames):
    f, _, frame = frames["planar_cycle"]
    g = forcing(1e-3, 2)
    rt = roundtrip_check(frame, f, g, (0.0, [1e-2], []))
    assert rt.passed
    z0 = frame.phi(0.0) + frame.U(0.0) @ np.array([1e-2])
    ref = solve_ivp(lambda t, z: f(z) + g(t, z), (0.0, frame.period), z0, method="DOP853",
                    rtol=1e-11, atol=1e-12, t_eval=rt.times)
    assert np.max(np.linalg.norm(rt.z_mapped - ref.y.T, axis=1)) <= 1e-5


def test_equilibrium_guess_rejected():
    with pytest.raises(DegenerateSection):
        refine_orbit(planar_cycle(), [0.0, 0.0], 6.0)
