"""Real Floquet normal forms with a periodic/antiperiodic split.

The monodromy is sorted to ``J1 (+) J2`` in a real Jordan basis S; then
``R = log(J1)/T (+) log(-J2)/T`` and ``Q(t) = Psi(t) S exp(-tR)`` satisfies
``Q(t+T) = Q(t) [I_{n-d} (+) -I_d]`` with d the A-index.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedK
from .integrator import DEFAULT_TOL, MatrixSolution, fundamental_solution, monodromy
from .linsys import PeriodicLinearSystem, sign_matrix
from .realog import jordan_block_log, log_real_jordan, matrix_exp, shifted_negative_log
from .spectral import (JordanInventory, RealJordanDecomposition, a_index, accuracy_tol_cluster,
                       jordan_inventory,
                       real_jordan_basis)

REAL_TOL = 1e-8


@dataclass(frozen=True)
class FloquetForm:
    n: int
    period: float
    d: int
    R: np.ndarray
    S: np.ndarray
    R_tilde: np.ndarray
    solution: MatrixSolution
    monodromy: np.ndarray
    inventory: JordanInventory
    decomposition: RealJordanDecomposition
    tol: float
    diagnostics: tuple = field(default_factory=tuple)

    @property
    def signature(self) -> np.ndarray:
        return sign_matrix(self.n, self.d)

    def Q(self, t: float) -> np.ndarray:
        return self.solution(t) @ self.S @ matrix_exp(-t * self.R)

    def Q_derivative(self, t: float) -> np.ndarray:
        """``Q'`` from the dense-output derivative of Psi."""
        e = matrix_exp(-t * self.R)
        return (self.solution.derivative(t) - self.solution(t) @ self.S @ self.R @ np.linalg.inv(self.S)) \
            @ self.S @ e

    def multipliers(self) -> np.ndarray:
        return np.linalg.eigvals(self.monodromy)


def _log_branch_note(dec):
    pairs = [b for b in dec.blocks if b.kind == "pair"]
    if not pairs:
        return "principal branches"
    return "principal branches; paired negative blocks use conjugate +i*pi/-i*pi"


def form_from_solution(sol: MatrixSolution, tol: float = DEFAULT_TOL, inv=None) -> FloquetForm:
    T = sol.period
    M = monodromy(sol)
    inv = inv or jordan_inventory(M, accuracy_tol_cluster(M, tol))
    d = a_index(inv)
    dec = real_jordan_basis(M, inv)
    diag = [_log_branch_note(dec)]
    if d % 2:
        msg = f"odd A-index {d}: not possible for a true monodromy (det Phi(T) > 0)"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        diag.append(msg)
    s1, s2 = dec.segment("J1"), dec.segment("J2")
    J = dec.J
    blocks1 = [b for b in dec.blocks if b.segment == "J1"]
    R1 = log_real_jordan(J[s1, s1], [_shift(b, s1.start) for b in blocks1]) / T
    R2 = shifted_negative_log(J[s2, s2], T)
    n = sol.n
    R = np.zeros((n, n))
    R[s1, s1] = R1
    R[s2, s2] = R2
    R_tilde = R.astype(complex)
    R_tilde[s2, s2] += 1j * np.pi / T * np.eye(d)
    return FloquetForm(n, T, d, R, dec.S, R_tilde, sol, M, inv, dec, tol, tuple(diag))


def _shift(block, offset):
    from dataclasses import replace

    return replace(block, start=block.start - offset)


def real_floquet_form(sys: PeriodicLinearSystem, tol: float = DEFAULT_TOL) -> FloquetForm:
    return form_from_solution(fundamental_solution(sys, tol), tol)


# ---------------------------------------------------------------------------
# checks

@dataclass
class Verification:
    name: str
    deviation: float
    tolerance: float
    passed: bool = field(init=False)
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.deviation <= self.tolerance)

    def to_dict(self):
        return {"name": self.name, "deviation": self.deviation, "tolerance": self.tolerance,
                "passed": self.passed, **self.detail}


def verify_antiperiodicity(form: FloquetForm, grid_points: int = 64) -> Verification:
    """max over [0, T] of ``|Q(t+T) - Q(t) A_d| / |Q(t)|``."""
    A = form.signature
    worst = 0.0
    for t in np.linspace(0.0, form.period, grid_points):
        q = form.Q(t)
        dev = np.linalg.norm(form.Q(t + form.period) - q @ A, 2) / np.linalg.norm(q, 2)
        worst = max(worst, float(dev))
    return Verification("antiperiodicity", worst, 100 * form.tol)


def residual_check(form: FloquetForm, sys: PeriodicLinearSystem, grid_points: int = 128,
                   tol: float = 1e-6) -> Verification:
    """``|Q' + Q R - A Q| <= tol (1 + |A| |Q|)`` on a grid over [0, T]."""
    worst = 0.0
    for t in np.linspace(0.0, form.period, grid_points):
        q = form.Q(t)
        a = sys(t)
        r = np.linalg.norm(form.Q_derivative(t) + q @ form.R - a @ q, 2)
        worst = max(worst, float(r / (1 + np.linalg.norm(a, 2) * np.linalg.norm(q, 2))))
    return Verification("fundamental_residual", worst, tol)


def consistency_check(form: FloquetForm, tol: float = 1e-7) -> Verification:
    """``exp(T R~) = M`` and ``exp(2T R) = M^2`` (relative)."""
    M, T = form.monodromy, form.period
    S, Si = form.S, np.linalg.inv(form.S)
    # R and R~ live in the sorted basis, M in the original one
    e1 = np.linalg.norm(S @ matrix_exp(T * form.R_tilde) @ Si - M, 2) / np.linalg.norm(M, 2)
    M2 = M @ M
    e2 = np.linalg.norm(S @ matrix_exp(2 * T * form.R) @ Si - M2, 2) / np.linalg.norm(M2, 2)
    v = Verification("log_consistency", float(max(e1, e2)), tol)
    v.detail = {"exp_TRtilde": float(e1), "exp_2TR": float(e2)}
    return v


def modulus_check(form: FloquetForm, tol: float = 1e-6) -> Verification:
    """|multipliers| vs exp(T Re eig R) as multisets."""
    a = np.sort(np.abs(form.multipliers()))
    b = np.sort(np.exp(form.period * np.linalg.eigvals(form.R).real))
    return Verification("multiplier_moduli", float(np.max(np.abs(a - b) / b)), tol)


# ---------------------------------------------------------------------------
# general (possibly complex) form

@dataclass(frozen=True)
class ComplexForm:
    k: int
    B: np.ndarray
    solution: MatrixSolution

    def P(self, t: float) -> np.ndarray:
        return self.solution(t) @ matrix_exp(-t * self.B)

    def periodicity_deviation(self, points: int = 32) -> float:
        kT = self.k * self.solution.period
        span = 2 * self.solution.period - kT
        worst = 0.0
        for t in np.linspace(0.0, span, points if span > 0 else 1):
            p = self.P(t)
            worst = max(worst, float(np.linalg.norm(self.P(t + kT) - p, 2) / np.linalg.norm(p, 2)))
        return worst


def complex_jordan_log(M: np.ndarray, tol_cluster: float | None = None) -> np.ndarray:
    """A (principal-branch) complex logarithm of M through complex Jordan chains."""
    from .spectral import _chains

    inv = jordan_inventory(M, tol_cluster)
    n = M.shape[0]
    cols, blocks = [], []
    for (lam, pair), es in inv.classes().items():
        sizes = {e.size: e.count for e in es}
        lams = [lam, lam.conjugate()] if pair else [complex(lam.real, 0.0)]
        for mu in lams:
            key = mu if mu.imag != 0 else float(mu.real)
            for ch in _chains(M, key, sizes):
                cols.append(ch.astype(complex))
                blocks.append((mu, ch.shape[1]))
    S = np.hstack(cols)
    L = np.zeros((n, n), dtype=complex)
    pos = 0
    for mu, m in blocks:
        L[pos:pos + m, pos:pos + m] = jordan_block_log(mu, m).log
        pos += m
    return S @ L @ np.linalg.inv(S)


def complex_floquet_form(sys_or_sol, k: int = 1, tol: float = DEFAULT_TOL) -> ComplexForm:
    """``B`` with ``exp(kTB) = M^k`` and ``P(t) = Phi(t) exp(-tB)`` (kT-periodic)."""
    if k not in (1, 2):
        raise UnsupportedK(f"k={k}: only k in {{1, 2}} fits the [0, 2T] window")
    sol = sys_or_sol if isinstance(sys_or_sol, MatrixSolution) else fundamental_solution(sys_or_sol, tol)
    M = monodromy(sol)
    Mk = np.linalg.matrix_power(M, k)
    B = complex_jordan_log(Mk, accuracy_tol_cluster(Mk, tol)) / (k * sol.period)
    if np.max(np.abs(B.imag), initial=0.0) <= REAL_TOL * max(1.0, np.max(np.abs(B))):
        B = B.real
    return ComplexForm(k, B, sol)


# ---------------------------------------------------------------------------
# existence criteria

@dataclass(frozen=True)
class ExistenceDecision:
    a_index: int
    exists: bool
    witness: FloquetForm | None


def check_real_T_periodic_existence(sys: PeriodicLinearSystem,
                                    tol: float = DEFAULT_TOL) -> ExistenceDecision:
    """A real T-periodic Floquet form exists iff the A-index vanishes."""
    sol = fundamental_solution(sys, tol)
    M = monodromy(sol)
    inv = jordan_inventory(M, accuracy_tol_cluster(M, tol))
    d = a_index(inv)
    if d:
        return ExistenceDecision(d, False, None)
    return ExistenceDecision(0, True, form_from_solution(sol, tol, inv))


def nonnegative_multiplier_check(multipliers) -> bool:
    """True iff every real multiplier is non-negative (sufficient, not necessary)."""
    for lam in np.asarray(multipliers, dtype=complex):
        if abs(lam.imag) <= REAL_TOL * max(1.0, abs(lam)) and lam.real < 0:
            return False
    return True
