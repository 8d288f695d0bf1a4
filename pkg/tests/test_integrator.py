import numpy as np
import pytest
import scipy.linalg as sla
from scipy.integrate import quad

from floqnf.errors import OutOfWindow
from floqnf.integrator import dense_eval, fundamental_solution, monodromy, variational_solution
from floqnf.linsys import constant_system, manufactured_solution, piecewise_system, trig_system

from conftest import reference_system


def test_zero_system_is_identity_everywhere():
    sol = fundamental_solution(constant_system(np.zeros((2, 2))))
    assert np.array_equal(monodromy(sol), np.eye(2))
    assert np.allclose(dense_eval(sol, 0.37), np.eye(2), atol=1e-15)


def test_nilpotent_constant():
    sol = fundamental_solution(constant_system([[0.0, 1.0], [0.0, 0.0]]))
    assert np.allclose(monodromy(sol), [[1.0, 1.0], [0.0, 1.0]], atol=1e-10)


def test_scalar_cosine_monodromy():
    sys = trig_system(np.zeros((1, 1)), cos=[np.eye(1)], T=1.0)
    oracle = np.exp(quad(lambda s: np.cos(2 * np.pi * s), 0.0, 1.0)[0])
    assert abs(monodromy(fundamental_solution(sys))[0, 0] - oracle) <= 1e-10


def test_reference_monodromy_and_midpoint(ref_sys):
    sol = fundamental_solution(ref_sys)
    assert np.max(np.abs(monodromy(sol) - np.diag([-1.0, -2.0]))) <= 1e-8
    mid = manufactured_solution(ref_sys, 0.5)
    assert np.max(np.abs(dense_eval(sol, 0.5) - mid)) <= 1e-7


def test_nodes_are_returned_exactly(ref_sys):
    sol = fundamental_solution(ref_sys)
    mats = sol.node_matrices()
    for i in (0, 3, len(sol.times) // 2, len(sol.times) - 1):
        assert np.array_equal(dense_eval(sol, sol.times[i]), mats[i])
    assert sol.period in sol.times


@pytest.mark.parametrize("t", [-1e-9, 2.0 + 1e-9, 5.0])
def test_outside_window_raises(ref_sys, t):
    with pytest.raises(OutOfWindow):
        dense_eval(fundamental_solution(ref_sys), t)


def test_semigroup_identity(ref_sys):
    sol = fundamental_solution(ref_sys)
    M = monodromy(sol)
    for t in np.linspace(0, 1, 64):
        P = dense_eval(sol, t)
        assert np.linalg.norm(dense_eval(sol, t + 1) - P @ M, 2) <= 1e-7 * np.linalg.norm(P, 2)


def test_dense_output_accuracy_between_nodes():
    A = np.array([[0.0, 1.0], [-4.0, -0.1]])
    sys = trig_system(A, cos=[0.3 * A], T=1.3)
    sol = fundamental_solution(sys, 1e-9)
    # commuting A(t), so Phi(t) = expm(int_0^t A)
    for t in np.linspace(0.01, 2.59, 37):
        ref = sla.expm((t + 0.3 * np.sin(2 * np.pi * t / 1.3) * 1.3 / (2 * np.pi)) * A)
        assert np.max(np.abs(dense_eval(sol, t) - ref)) <= 1e-7


def test_piecewise_is_exact_product():
    B1, B2 = np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([[-0.5, 0.0], [0.3, 0.2]])
    sol = fundamental_solution(piecewise_system([0.0, 0.4, 1.0], [B1, B2]))
    assert np.allclose(monodromy(sol), sla.expm(0.6 * B2) @ sla.expm(0.4 * B1), atol=1e-13)
    assert np.allclose(dense_eval(sol, 0.2), sla.expm(0.2 * B1), atol=1e-14)


def test_liouville_recorded(ref_sys):
    sol = fundamental_solution(ref_sys)
    assert sol.stats["liouville_ok"] and sol.stats["liouville_rel_error"] <= 1e-6
    assert np.linalg.det(monodromy(sol)) > 0


def test_tolerance_range_enforced(ref_sys):
    with pytest.raises(ValueError):
        fundamental_solution(ref_sys, 1e-2)


def test_tighter_tolerance_is_more_accurate(ref_sys):
    oracle = manufactured_solution(ref_sys, 1.0)
    e8 = np.max(np.abs(monodromy(fundamental_solution(ref_sys, 1e-8)) - oracle))
    e10 = np.max(np.abs(monodromy(fundamental_solution(ref_sys, 1e-10)) - oracle))
    assert e8 / e10 >= 4


def test_variational_planar(frames):
    f, orbit, _ = frames["planar_cycle"]
    M = monodromy(variational_solution(f, orbit))
    ev = np.sort(np.linalg.eigvals(M).real)
    assert abs(ev[1] - 1.0) <= 1e-6
    assert abs(ev[0] - np.exp(-4 * np.pi)) <= 1e-6


def test_variational_rigid_rotation(frames):
    f, orbit, _ = frames["rigid_rotation"]
    sol = variational_solution(f, orbit)
    assert np.allclose(monodromy(sol), np.eye(2), atol=1e-9)
    # the co-integrated state is the orbit itself
    assert np.allclose(sol.state(np.pi), [-1.0, 0.0], atol=1e-9)
