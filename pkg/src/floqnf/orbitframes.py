"""Moving-frame coordinates around periodic orbits of autonomous fields.

Along a T-periodic orbit phi the variational equation gets a real Floquet
form whose Jordan basis starts at ``phi'(0)``. The last n-1 columns of the
resulting ``Q(s)`` form the frame ``U(s)`` and

    z = phi(s) + U(s) [v; w]

turns ``z' = f(z) + g(t, z)`` into

    s' = 1 + L v + Lam0 + LamT0,   v' = H1 v + Lam1 + LamT1,   w' = H2 w + Lam2 + LamT2

with ``U(s+T) = U(s) [I (+) -I_d]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (DegenerateSection, FrameDegenerate, IndexMismatch, NoConvergence,
                     NumericalFailure)
from .fields import AutonomousField
from .floquet import Verification
from .integrator import (DEFAULT_TOL, DenseTrajectory, MatrixSolution, dopri, monodromy,
                         variational_solution)
from .linsys import sign_matrix
from .realog import log_real_jordan, matrix_exp, shifted_negative_log
from .spectral import (JordanInventory, a_index, accuracy_tol_cluster, jordan_inventory, q0_index,
                       real_jordan_basis)

__all__ = [
    "PeriodicOrbit", "OrbitFrame", "TransformedRHS", "refine_orbit", "q0_index",
    "build_frame", "transformed_rhs", "verify_properties", "frame_identities",
    "roundtrip_check", "PropertyReport", "RoundTrip",
]

FRAME_COND_LIMIT = 1e8


@dataclass(frozen=True)
class PeriodicOrbit:
    field: AutonomousField
    z0: np.ndarray
    period: float
    traj: DenseTrajectory
    closure: float
    iterations: int = 0

    def phi(self, s: float) -> np.ndarray:
        if not 0.0 <= s <= 2 * self.period:
            s = s % self.period
        return self.traj(s)

    def tangent(self, s: float) -> np.ndarray:
        return self.field(self.phi(s))

    def min_speed(self, points: int = 64) -> float:
        return min(float(np.linalg.norm(self.tangent(s)))
                   for s in np.linspace(0.0, self.period, points))


def _flow_with_jacobian(f, z, T, tol):
    n = f.n

    def rhs(t, y):
        return np.concatenate([f(y[:n]), (f.jacobian(y[:n]) @ y[n:].reshape(n, n)).ravel()])

    traj, _ = dopri(rhs, np.concatenate([z, np.eye(n).ravel()]), [0.0, T], tol, scale_time=T)
    y = traj.y[-1]
    return y[:n], y[n:].reshape(n, n)


PERIOD_FLOOR = 1e-3


def refine_orbit(f: AutonomousField, z_guess, T_guess: float, tol: float = 1e-12,
                 max_iter: int = 50, closure_tol: float = 1e-10,
                 dense_tol: float = DEFAULT_TOL) -> PeriodicOrbit:
    """Newton iteration for a periodic orbit through the hyperplane at ``z_guess``
    orthogonal to ``f(z_guess)``. Unknowns are the section point and the period."""
    zg = np.asarray(z_guess, dtype=float)
    normal = f(zg)
    if np.linalg.norm(normal) <= 1e-10 * max(1.0, np.linalg.norm(zg)):
        raise DegenerateSection(f"f(z_guess) = {normal} vanishes: equilibrium at the guess")
    normal = normal / np.linalg.norm(normal)
    n = f.n
    z, T = zg.copy(), float(T_guess)
    zT, Psi = _flow_with_jacobian(f, z, T, tol)
    closure = float(np.linalg.norm(zT - z))
    mu = 0.0
    for it in range(max_iter + 1):
        if closure <= closure_tol * (1 + np.linalg.norm(z)):
            break
        if it == max_iter:
            raise NoConvergence(f"closure {closure:.3g} after {max_iter} iterations")
        K = np.zeros((n + 1, n + 1))
        K[:n, :n] = Psi - np.eye(n)
        K[:n, n] = f(zT)
        K[n, :n] = normal
        rhs = -np.r_[zT - z, normal @ (z - zg)]
        # Levenberg-Marquardt: mu = 0 is plain Newton; orbit families make K singular
        for _ in range(40):
            if mu == 0.0:
                step = np.linalg.lstsq(K, rhs, rcond=None)[0]
            else:
                step = np.linalg.solve(K.T @ K + mu * np.eye(n + 1), K.T @ rhs)
            scale = min(1.0, 0.5 * T / max(abs(step[n]), 1e-300))
            zc, Tc = z + scale * step[:n], T + scale * step[n]
            zTc, Psic = _flow_with_jacobian(f, zc, Tc, tol)
            cc = float(np.linalg.norm(zTc - zc))
            if cc < closure:
                mu = mu / 10 if mu > 1e-12 else 0.0
                break
            mu = max(10 * mu, 1e-6 * np.linalg.norm(K) ** 2)
        else:
            raise NoConvergence(f"no descent from closure {closure:.3g}")
        z, T, zT, Psi, closure = zc, Tc, zTc, Psic, cc
        # closure ~ T |f| as T -> 0, so a shrinking period fakes convergence
        if T < PERIOD_FLOOR * T_guess:
            raise NoConvergence(f"period collapsed to {T:.3g} from guess {T_guess:.3g}")

    traj, _ = dopri(lambda t, y: f(y), z, [0.0, T, 2 * T], dense_tol, scale_time=T)
    orbit = PeriodicOrbit(f, z, T, traj, closure, it)
    if orbit.min_speed() < 1e-8:
        raise DegenerateSection("orbit is (numerically) an equilibrium")
    return orbit


@dataclass(frozen=True)
class OrbitFrame:
    field: AutonomousField
    period: float
    d: int
    q0: int
    R: np.ndarray
    S: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    L: np.ndarray
    Lstar: np.ndarray
    solution: MatrixSolution
    monodromy: np.ndarray
    inventory: JordanInventory
    tol: float

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def n0(self) -> int:
        return self.q0 + 1

    @property
    def H(self) -> np.ndarray:
        return self.R[1:, 1:]

    @property
    def signature(self) -> np.ndarray:
        """``A_d = I_{n-d-1} (+) -I_d`` acting on h = (v, w)."""
        return sign_matrix(self.n - 1, self.d)

    def _reduce(self, s):
        T = self.period
        if 0.0 <= s <= 2 * T:
            return s, 0
        k = int(np.floor(s / T))
        return s - k * T, k

    def phi(self, s: float) -> np.ndarray:
        s0, _ = self._reduce(s)
        return self.solution.state(s0)

    def tangent(self, s: float) -> np.ndarray:
        return self.field(self.phi(s))

    def Q(self, s: float) -> np.ndarray:
        s0, k = self._reduce(s)
        q = self.solution(s0) @ self.S @ matrix_exp(-s0 * self.R)
        return q @ sign_matrix(self.n, self.d) if k % 2 and self.d else q

    def Q_derivative(self, s: float) -> np.ndarray:
        """``Q' = Df(phi) Q - Q R`` (analytic, no numerical differentiation)."""
        q = self.Q(s)
        return self.field.jacobian(self.phi(s)) @ q - q @ self.R

    def U(self, s: float) -> np.ndarray:
        return self.Q(s)[:, 1:]

    def U_derivative(self, s: float) -> np.ndarray:
        return self.Q_derivative(s)[:, 1:]

    def eta(self, s: float) -> np.ndarray:
        row = np.linalg.inv(self.Q(s))[0]
        e = row / np.linalg.norm(row)
        return e if e @ self.tangent(s) > 0 else -e

    def xi(self, s: float) -> np.ndarray:
        return np.linalg.inv(self.Q(s))[1:].T

    def to_dict(self):
        return {"n": self.n, "T": self.period, "d": self.d, "q0": self.q0,
                "H1": self.H1.tolist(), "H2": self.H2.tolist(), "L": self.L.tolist(),
                "Lstar": self.Lstar.tolist(), "R": self.R.tolist(),
                "multipliers": [[complex(m).real, complex(m).imag]
                                for m in np.linalg.eigvals(self.monodromy)],
                "integration": dict(self.solution.stats)}


def build_frame(f: AutonomousField, orbit: PeriodicOrbit, tol: float = DEFAULT_TOL) -> OrbitFrame:
    sol = variational_solution(f, orbit, tol)
    M = monodromy(sol)
    n, T = f.n, orbit.period
    anchor = f(orbit.z0)
    # orbit and variational equation are integrated together, so the
    # monodromy is less accurate than a linear one; widen the radius
    inv = jordan_inventory(M, accuracy_tol_cluster(M, tol, factor=100.0))
    d = a_index(inv)
    if d % 2:
        raise NumericalFailure(f"odd A-index {d} contradicts det Psi(T) > 0")
    q0 = q0_index(M, anchor)
    if q0 > n - d - 1:
        raise IndexMismatch(f"q0 = {q0} exceeds n - d - 1 = {n - d - 1}")
    dec = real_jordan_basis(M, inv, anchor=anchor)
    R = np.zeros((n, n))
    for name in ("Jphi", "J1"):
        sl = dec.segment(name)
        blocks = [b for b in dec.blocks if b.segment == name]
        blocks = [replace(b, start=b.start - sl.start) for b in blocks]
        R[sl, sl] = log_real_jordan(dec.J[sl, sl], blocks) / T
    s2 = dec.segment("J2")
    R[s2, s2] = shifted_negative_log(dec.J[s2, s2], T)
    m = n - d - 1
    Lstar = R[0, 1:].copy()
    H = R[1:, 1:]
    return OrbitFrame(f, T, d, q0, R, dec.S, H[:m, :m].copy(), H[m:, m:].copy(),
                      Lstar[:m].copy(), Lstar, sol, M, inv, tol)


@dataclass(frozen=True)
class TransformedRHS:
    s_dot: float
    v_dot: np.ndarray
    w_dot: np.ndarray
    lam: tuple       # (Lam0, Lam1, Lam2)
    lam_tilde: tuple  # (LamT0, LamT1, LamT2)
    linear: tuple    # (L v, H1 v, H2 w)
    coeff_inverse_norm: float


def transformed_rhs(frame: OrbitFrame, f: AutonomousField, g, t: float, s: float, v, w,
                    ) -> TransformedRHS:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    w = np.atleast_1d(np.asarray(w, dtype=float))
    h = np.r_[v, w]
    m = frame.n - frame.d - 1
    U, Ud = frame.U(s), frame.U_derivative(s)
    dphi = frame.tangent(s)
    coeff = np.column_stack([dphi + Ud @ h, U])
    cond = np.linalg.cond(coeff)
    if not cond <= FRAME_COND_LIMIT:
        raise FrameDegenerate(f"coefficient matrix condition {cond:.3g} at |h| = {np.linalg.norm(h):.3g}")
    z = frame.phi(s) + U @ h
    eta, xi = frame.eta(s), frame.xi(s)
    denom = eta @ (dphi + Ud @ h)
    fz = f(z)
    F0 = eta @ fz / denom
    Lh = frame.Lstar @ h
    lam0 = F0 - 1.0 - Lh
    G = xi.T @ (fz - Ud @ h * F0)
    Hh = frame.H @ h
    lam12 = G - Hh
    if g is not None:
        gz = np.asarray(g(t, z), dtype=float)
        lt0 = eta @ gz / denom
        lt12 = xi.T @ (gz - Ud @ h * lt0)
    else:
        lt0, lt12 = 0.0, np.zeros(frame.n - 1)
    h_dot = G + lt12
    inv_norm = float(np.linalg.norm(np.linalg.inv(coeff), 2))
    return TransformedRHS(
        s_dot=float(F0 + lt0), v_dot=h_dot[:m], w_dot=h_dot[m:],
        lam=(float(lam0), lam12[:m], lam12[m:]),
        lam_tilde=(float(lt0), lt12[:m], lt12[m:]),
        linear=(float(frame.L @ v), Hh[:m], Hh[m:]),
        coeff_inverse_norm=inv_norm,
    )


# ---------------------------------------------------------------------------
# property verification

@dataclass
class PropertyReport:
    """The structural properties decide ``passed``; frame identities are reported alongside."""
    checks: dict = field(default_factory=dict)
    identities: dict = field(default_factory=dict)
    C_estimate: float = float("nan")

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.checks.values())

    @property
    def identities_passed(self) -> bool:
        return all(v.passed for v in self.identities.values())

    def add(self, v: Verification):
        self.checks[v.name] = v

    def to_dict(self):
        return {"passed": self.passed, "C_estimate": self.C_estimate,
                "C_is_estimate": True,
                "properties": {k: v.to_dict() for k, v in self.checks.items()},
                "identities_passed": self.identities_passed,
                "identities": {k: v.to_dict() for k, v in self.identities.items()}}


def _nontrivial_multipliers(inv: JordanInventory):
    """Clustered multipliers with multiplicity, minus the trivial one."""
    eigs = []
    for e in inv.entries:
        k = e.size * e.count
        eigs += [e.eigenvalue] * k
        if e.complex_pair:
            eigs += [np.conj(e.eigenvalue)] * k
    eigs = np.array(eigs, dtype=complex)
    drop = int(np.argmin(np.abs(eigs - 1.0)))
    return np.delete(eigs, drop)


def _split(frame, vec):
    m = frame.n - frame.d - 1
    return vec[:m], vec[m:]


def verify_properties(frame: OrbitFrame, f: AutonomousField, g=None, samples: int = 16,
                      h_amp: float = 1e-2, tol_eig: float = 1e-5, tol_lam: float = 1e-6,
                      seed: int = 0) -> PropertyReport:
    rng = np.random.default_rng(seed)
    T, n = frame.period, frame.n
    Ad = frame.signature
    rep = PropertyReport()

    # real parts of eig(H1 (+) H2) vs log|lambda| / T
    ref = np.sort(np.log(np.abs(_nontrivial_multipliers(frame.inventory))) / T)
    H = np.zeros((n - 1, n - 1))
    m = n - frame.d - 1
    H[:m, :m] = frame.H1
    H[m:, m:] = frame.H2
    got = np.sort(np.linalg.eigvals(H).real) if n > 1 else np.zeros(0)
    rep.add(Verification("eigenvalue_rates", float(np.max(np.abs(got - ref), initial=0.0)), tol_eig,
                         detail={"re_eig_H": got.tolist(), "log_multipliers_over_T": ref.tolist()}))

    grid = np.linspace(0.0, T, samples, endpoint=False)
    t_probe = 0.3

    # Lam(s, 0) = 0 and dLam/dh(s, 0) = 0
    worst_val = worst_jac = 0.0
    eps = 1e-4
    for s in grid:
        r0 = transformed_rhs(frame, f, None, 0.0, s, np.zeros(m), np.zeros(frame.d))
        worst_val = max(worst_val, abs(r0.lam[0]), *np.abs(np.r_[r0.lam[1], r0.lam[2]]))
        for j in range(n - 1):
            e = np.zeros(n - 1)
            e[j] = eps
            rp = transformed_rhs(frame, f, None, 0.0, s, *_split(frame, e))
            rm = transformed_rhs(frame, f, None, 0.0, s, *_split(frame, -e))
            dl = (np.r_[rp.lam[0], rp.lam[1], rp.lam[2]] - np.r_[rm.lam[0], rm.lam[1], rm.lam[2]]) / (2 * eps)
            worst_jac = max(worst_jac, float(np.max(np.abs(dl))))
    rep.add(Verification("vanishing_on_orbit", float(max(worst_val, worst_jac)), tol_lam,
                         detail={"value": float(worst_val), "jacobian": float(worst_jac)}))

    # shift by T flips w
    dev3 = dev4 = 0.0
    ratios, cbound = [], 0.0
    for s in grid:
        h = h_amp * rng.uniform(-1, 1, n - 1)
        a = transformed_rhs(frame, f, g, t_probe, s + T, *_split(frame, h))
        b = transformed_rhs(frame, f, g, t_probe, s, *_split(frame, Ad @ h))
        dev3 = max(dev3, abs(a.lam[0] - b.lam[0]), abs(a.lam_tilde[0] - b.lam_tilde[0]),
                   float(np.max(np.abs(a.lam[1] - b.lam[1]), initial=0.0)),
                   float(np.max(np.abs(a.lam_tilde[1] - b.lam_tilde[1]), initial=0.0)))
        dev4 = max(dev4, float(np.max(np.abs(a.lam[2] + b.lam[2]), initial=0.0)),
                   float(np.max(np.abs(a.lam_tilde[2] + b.lam_tilde[2]), initial=0.0)))
        if g is not None:
            z = frame.phi(s) + frame.U(s) @ h
            gn = float(np.linalg.norm(g(t_probe, z)))
            c = transformed_rhs(frame, f, g, t_probe, s, *_split(frame, h))
            lt = np.linalg.norm(np.r_[c.lam_tilde[0], c.lam_tilde[1], c.lam_tilde[2]])
            if gn > 0:
                ratios.append(lt / gn)
            cbound = max(cbound, c.coeff_inverse_norm)
    rep.add(Verification("shift_even_remainders", float(dev3), tol_lam))
    rep.add(Verification("shift_odd_remainders", float(dev4), tol_lam))

    # |LamT| <= C |g|; C sampled (an estimate, not a proof)
    if g is None:
        rep.add(Verification("perturbation_bound", 0.0, 0.0, detail={"g": "absent"}))
        rep.C_estimate = 0.0
    else:
        C = 1.01 * cbound
        rep.C_estimate = float(C)
        worst = max(ratios) if ratios else 0.0
        rep.add(Verification("perturbation_bound", float(worst), float(C),
                             detail={"C_estimate": float(C), "max_ratio": float(worst)}))

    # L = [L_1 .. L_q0 0 .. 0]
    tail = np.r_[frame.L[frame.q0:], frame.Lstar[m:]]
    rep.add(Verification("coupling_structure", float(np.max(np.abs(tail), initial=0.0)), 1e-12,
                         detail={"q0": frame.q0}))

    # frame identities
    for v in frame_identities(frame, samples=max(samples, 64)):
        rep.identities[v.name] = v
    return rep


def frame_identities(frame: OrbitFrame, samples: int = 64):
    """Identity U' + phi' L* + U H = Df U (via the dense-output derivative of Psi),
    U/xi/eta (anti)periodicity and the projection relations."""
    T, n = frame.period, frame.n
    A = frame.signature
    u_deriv = per_u = per_xi = per_eta = proj = first_col = 0.0
    for s in np.linspace(0.0, T, samples):
        q = frame.Q(s)
        Ud = (frame.solution.derivative(s) @ frame.S @ matrix_exp(-s * frame.R) - q @ frame.R)[:, 1:]
        dphi = frame.tangent(s)
        U = q[:, 1:]
        df = frame.field.jacobian(frame.phi(s))
        r = Ud + np.outer(dphi, frame.Lstar) + U @ frame.H - df @ U
        u_deriv = max(u_deriv, float(np.max(np.abs(r))))
        scale_u = np.linalg.norm(U, 2)
        per_u = max(per_u, float(np.linalg.norm(frame.U(s + T) - U @ A, 2) / scale_u))
        xi, eta = frame.xi(s), frame.eta(s)
        per_xi = max(per_xi, float(np.linalg.norm(frame.xi(s + T) - xi @ A, 2) / np.linalg.norm(xi, 2)))
        per_eta = max(per_eta, float(np.linalg.norm(frame.eta(s + T) - eta)))
        proj = max(proj, float(np.max(np.abs(eta @ U), initial=0.0)),
                   float(np.max(np.abs(xi.T @ U - np.eye(n - 1)), initial=0.0)),
                   float(np.max(np.abs(xi.T @ dphi), initial=0.0)) / max(1.0, np.linalg.norm(dphi)),
                   abs(np.linalg.norm(eta) - 1.0))
        first_col = max(first_col, float(np.linalg.norm(q[:, 0] - dphi) / np.linalg.norm(dphi)))
    # relative errors in Q on [T, 2T] are amplified by about this factor
    re = np.linalg.eigvals(frame.R).real
    amp = {"amplification": float(np.exp(2 * T * (re.max() - re.min())))}
    return [
        Verification("U_derivative_identity", u_deriv, 1e-5),
        Verification("U_antiperiodicity", per_u, 1e-6, detail=dict(amp)),
        Verification("xi_antiperiodicity", per_xi, 1e-6, detail=dict(amp)),
        Verification("eta_periodicity", per_eta, 1e-6, detail=dict(amp)),
        Verification("projections", proj, 1e-8),
        Verification("first_column_is_tangent", first_col, 1e-6),
    ]


# ---------------------------------------------------------------------------
# round trip

@dataclass
class RoundTrip:
    deviation: float
    tolerance: float
    times: np.ndarray
    frame_states: np.ndarray   # rows (s, v.., w..)
    z_direct: np.ndarray
    z_mapped: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)

    def rows(self):
        """CSV rows: t, s, v..., w..., z..."""
        return [np.r_[t, fs, z] for t, fs, z in zip(self.times, self.frame_states, self.z_mapped)]


def roundtrip_check(frame: OrbitFrame, f: AutonomousField, g, init, horizon: float | None = None,
                    tol: float = DEFAULT_TOL, samples: int = 200,
                    tolerance: float = 1e-5) -> RoundTrip:
    """Integrate the transformed system and the original one; compare in z."""
    s0, v0, w0 = init
    v0 = np.atleast_1d(np.asarray(v0, dtype=float)).reshape(-1)
    w0 = np.atleast_1d(np.asarray(w0, dtype=float)).reshape(-1)
    horizon = frame.period if horizon is None else horizon
    m = frame.n - frame.d - 1

    def rhs_frame(t, y):
        r = transformed_rhs(frame, f, g, t, y[0], y[1:1 + m], y[1 + m:])
        return np.r_[r.s_dot, r.v_dot, r.w_dot]

    def rhs_z(t, z):
        out = f(z)
        return out + np.asarray(g(t, z)) if g is not None else out

    y0 = np.r_[s0, v0, w0]
    z0 = frame.phi(s0) + frame.U(s0) @ np.r_[v0, w0]
    tr1, _ = dopri(rhs_frame, y0, [0.0, horizon], tol, scale_time=frame.period)
    tr2, _ = dopri(rhs_z, z0, [0.0, horizon], tol, scale_time=frame.period)
    times = np.linspace(0.0, horizon, samples)
    states = np.array([tr1(t) for t in times])
    mapped = np.array([frame.phi(y[0]) + frame.U(y[0]) @ y[1:] for y in states])
    direct = np.array([tr2(t) for t in times])
    dev = float(np.max(np.linalg.norm(mapped - direct, axis=1)))
    return RoundTrip(dev, tolerance, times, states, direct, mapped)
