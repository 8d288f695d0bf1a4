"""T-periodic coefficient functions A(t) and manufactured test systems.

Three bodies are supported: trigonometric matrix polynomials, piecewise
constant matrices and *manufactured* systems built from a chosen invertible
curve Q*(t) and constant matrix R* so that Q*(t) exp(t R*) solves the system
by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, SingularQ

COND_LIMIT = 1e8
DET_FLOOR = 1e-8


def _as_matrix_stack(mats, n, what):
    if mats is None or len(mats) == 0:
        return np.zeros((0, n, n))
    arr = np.asarray(mats, dtype=float)
    if arr.ndim != 3 or arr.shape[1:] != (n, n):
        raise InputError(f"{what}: expected a list of {n}x{n} matrices")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what}: non-finite entry")
    return arr


@dataclass(frozen=True)
class TrigMatrixPolynomial:
    """``A0 + sum_k cos(k w t) C_k + sin(k w t) S_k`` with ``w = 2pi/T``.

    With ``half_frequency=True`` the base frequency is ``pi/T`` instead, so odd
    harmonics are T-antiperiodic. Harmonic ``k`` uses ``cos[k-1]``/``sin[k-1]``.
    """

    period: float
    const: np.ndarray
    cos: np.ndarray = None
    sin: np.ndarray = None
    half_frequency: bool = False

    def __post_init__(self):
        const = np.asarray(self.const, dtype=float)
        if const.ndim != 2 or const.shape[0] != const.shape[1]:
            raise InputError("constant term must be a square matrix")
        if not np.all(np.isfinite(const)):
            raise InputError("constant term: non-finite entry")
        n = const.shape[0]
        cos = _as_matrix_stack(self.cos, n, "cos terms")
        sin = _as_matrix_stack(self.sin, n, "sin terms")
        k = max(len(cos), len(sin))
        cos = np.concatenate([cos, np.zeros((k - len(cos), n, n))])
        sin = np.concatenate([sin, np.zeros((k - len(sin), n, n))])
        if not self.period > 0:
            raise InputError("period must be positive")
        for name, val in (("const", const), ("cos", cos), ("sin", sin)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.const.shape[0]

    @property
    def omega(self) -> float:
        return (np.pi if self.half_frequency else 2 * np.pi) / self.period

    def __call__(self, t: float) -> np.ndarray:
        k = np.arange(1, len(self.cos) + 1) * self.omega * t
        return (self.const + np.tensordot(np.cos(k), self.cos, axes=1)
                + np.tensordot(np.sin(k), self.sin, axes=1))

    def derivative(self, t: float) -> np.ndarray:
        kw = np.arange(1, len(self.cos) + 1) * self.omega
        return (np.tensordot(-kw * np.sin(kw * t), self.cos, axes=1)
                + np.tensordot(kw * np.cos(kw * t), self.sin, axes=1))


@dataclass(frozen=True)
class PiecewiseConstant:
    breakpoints: np.ndarray
    matrices: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        mats = np.asarray(self.matrices, dtype=float)
        if bp.ndim != 1 or len(bp) < 2 or bp[0] != 0.0:
            raise InputError("breakpoints must start at 0 and have length >= 2")
        if np.any(np.diff(bp) <= 0):
            raise InputError("breakpoints must strictly increase")
        if mats.ndim != 3 or mats.shape[0] != len(bp) - 1 or mats.shape[1] != mats.shape[2]:
            raise InputError("need one square matrix per subinterval")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(mats))):
            raise InputError("piecewise body: non-finite entry")
        bp.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "matrices", mats)

    @property
    def period(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    def index(self, t: float) -> int:
        """Subinterval holding ``t`` after reduction mod T (right-limit at breakpoints)."""
        tau = t % self.period
        return int(np.clip(np.searchsorted(self.breakpoints, tau, side="right") - 1,
                           0, len(self.matrices) - 1))

    def __call__(self, t: float) -> np.ndarray:
        return self.matrices[self.index(t)]


@dataclass(frozen=True)
class QSpec:
    """Invertible matrix curve Q*(t) on the half-frequency grid.

    ``declared_d`` states the intended relation
    ``Q*(t+T) = Q*(t) [I_{n-d} (+) -I_d]``.
    """

    curve: TrigMatrixPolynomial
    declared_d: int = 0

    def __post_init__(self):
        if not self.curve.half_frequency:
            raise InputError("QSpec curves live on the half-frequency grid")
        if not 0 <= self.declared_d <= self.curve.n:
            raise InputError("declared_d out of range")

    @property
    def n(self) -> int:
        return self.curve.n

    @property
    def period(self) -> float:
        return self.curve.period

    def signature(self) -> np.ndarray:
        return sign_matrix(self.n, self.declared_d)

    def check(self, points: int = 512) -> None:
        """Raise SingularQ unless |det Q*| >= 1e-8 on a grid over [0, 2T]."""
        for t in np.linspace(0.0, 2 * self.period, points):
            q = self.curve(t)
            if abs(np.linalg.det(q)) < DET_FLOOR:
                raise SingularQ(f"det Q*({t:.6g}) below {DET_FLOOR:g}")


def sign_matrix(n: int, d: int) -> np.ndarray:
    """``I_{n-d} (+) (-I_d)``."""
    return np.diag(np.r_[np.ones(n - d), -np.ones(d)])


@dataclass(frozen=True)
class Manufactured:
    q: QSpec
    rstar: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rstar, dtype=float)
        if r.shape != (self.q.n, self.q.n):
            raise InputError("R* must match the QSpec dimension")
        if not np.all(np.isfinite(r)):
            raise InputError("R*: non-finite entry")
        r.setflags(write=False)
        object.__setattr__(self, "rstar", r)

    @property
    def n(self) -> int:
        return self.q.n

    @property
    def period(self) -> float:
        return self.q.period

    def __call__(self, t: float) -> np.ndarray:
        q = self.q.curve(t)
        rhs = self.q.curve.derivative(t) + q @ self.rstar
        if np.linalg.cond(q) > COND_LIMIT:
            raise SingularQ(f"Q*({t:.6g}) is ill-conditioned")
        # A Q = rhs  <=>  Q^T A^T = rhs^T
        return np.linalg.solve(q.T, rhs.T).T


@dataclass(frozen=True)
class PeriodicLinearSystem:
    """``x' = A(t) x`` with ``A`` T-periodic."""

    n: int
    period: float
    body: object

    def __post_init__(self):
        if self.body.n != self.n:
            raise InputError("body dimension does not match n")
        if not np.isclose(self.body.period, self.period, rtol=1e-14, atol=0):
            raise InputError("body period does not match T")

    @property
    def kind(self) -> str:
        return {TrigMatrixPolynomial: "trig", PiecewiseConstant: "piecewise",
                Manufactured: "manufactured"}[type(self.body)]

    def __call__(self, t: float) -> np.ndarray:
        return self.body(t)


def evaluate(sys: PeriodicLinearSystem, t: float) -> np.ndarray:
    return sys.body(t)


def constant_system(a0, T: float = 1.0) -> PeriodicLinearSystem:
    a0 = np.asarray(a0, dtype=float)
    return PeriodicLinearSystem(a0.shape[0], T, TrigMatrixPolynomial(T, a0))


def trig_system(a0, cos=None, sin=None, T: float = 1.0) -> PeriodicLinearSystem:
    body = TrigMatrixPolynomial(T, a0, cos, sin)
    return PeriodicLinearSystem(body.n, T, body)


def piecewise_system(breakpoints, matrices) -> PeriodicLinearSystem:
    body = PiecewiseConstant(breakpoints, matrices)
    return PeriodicLinearSystem(body.n, body.period, body)


def manufacture(q: QSpec, rstar, T: float | None = None) -> PeriodicLinearSystem:
    """System whose fundamental solution is ``Q*(t) exp(t R*)`` by design.

    ``A(t) = (Q*'(t) + Q*(t) R*) Q*(t)^{-1}``.
    """
    if T is not None and not np.isclose(T, q.period, rtol=1e-14, atol=0):
        raise InputError("T must equal the QSpec period")
    q.check()
    body = Manufactured(q, rstar)
    return PeriodicLinearSystem(q.n, q.period, body)


def rotation_qspec(n: int = 2, T: float = 1.0, extra=None) -> QSpec:
    """Q*(t) = I_{n-2} (+) rotation by pi t / T, optionally plus ``extra`` terms.

    ``extra`` is a dict ``{harmonic: (cos_matrix, sin_matrix)}`` on the
    half-frequency grid. The rotation block flips sign after one period, so
    the declared signature is d = 2.
    """
    const = np.zeros((n, n))
    const[: n - 2, : n - 2] = np.eye(n - 2)
    kmax = max([1, *(extra or {}).keys()])
    cos = np.zeros((kmax, n, n))
    sin = np.zeros((kmax, n, n))
    cos[0, n - 2:, n - 2:] = np.eye(2)
    sin[0, n - 2:, n - 2:] = [[0.0, -1.0], [1.0, 0.0]]
    for k, (c, s) in (extra or {}).items():
        cos[k - 1] += c
        sin[k - 1] += s
    curve = TrigMatrixPolynomial(T, const, cos, sin, half_frequency=True)
    return QSpec(curve, declared_d=2)


def random_manufactured(rng: np.random.Generator, n: int, d: int, T: float = 1.0,
                        amplitude: float = 0.15) -> PeriodicLinearSystem:
    """Random manufactured system with declared signature ``d`` (0 or 2).

    Q* is an orthogonal dominant part plus small parity-respecting harmonics;
    R* = R_a (+) R_b commutes with the signature so the monodromy is similar
    to ``exp(T R_a) (+) -exp(T R_b)``.
    """
    if d not in (0, 2) or n < d:
        raise ValueError("d must be 0 or 2 and at most n")
    const = np.zeros((n, n))
    const[: n - d, : n - d] = np.eye(n - d)
    cos = np.zeros((3, n, n))
    sin = np.zeros((3, n, n))
    if d == 2:
        cos[0, n - 2:, n - 2:] = np.eye(2)
        sin[0, n - 2:, n - 2:] = [[0.0, -1.0], [1.0, 0.0]]
    scale = amplitude / np.sqrt(n)
    # periodic columns take even harmonics, antiperiodic columns odd ones
    const[:, : n - d] += scale * rng.standard_normal((n, n - d))
    cos[1, :, : n - d] += scale * rng.standard_normal((n, n - d))
    sin[1, :, : n - d] += scale * rng.standard_normal((n, n - d))
    if d:
        cos[0, :, n - d:] += scale * rng.standard_normal((n, d))
        sin[2, :, n - d:] += scale * rng.standard_normal((n, d))
    curve = TrigMatrixPolynomial(T, const, cos, sin, half_frequency=True)
    q = QSpec(curve, declared_d=d)

    rstar = np.zeros((n, n))
    ra = rng.uniform(-0.8, 0.8, n - d) if n - d else np.zeros(0)
    if n - d:
        # well separated real eigenvalues keep the clustering unambiguous
        ra = np.sort(ra)
        ra += 0.25 * np.arange(n - d)
        rstar[: n - d, : n - d] = np.diag(ra) + np.triu(0.3 * rng.standard_normal((n - d, n - d)), 1)
    if d:
        rb = np.sort(rng.uniform(-0.6, 0.6, d)) + 0.3 * np.arange(d)
        rstar[n - d:, n - d:] = np.diag(rb) + np.triu(0.3 * rng.standard_normal((d, d)), 1)
    return manufacture(q, rstar, T)


@dataclass
class PeriodReport:
    max_deviation: float
    tolerance: float
    probes: int
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.max_deviation <= self.tolerance)


def validate_period(obj, probes: int = 64) -> PeriodReport:
    """Check ``A(t+T) = A(t)`` (systems) or the declared relation (QSpec)."""
    if probes < 2:
        raise ValueError("probes must be >= 2")
    if isinstance(obj, QSpec):
        ts = np.linspace(0.0, obj.period, probes)
        sig = obj.signature()
        dev = max(np.max(np.abs(obj.curve(t + obj.period) - obj.curve(t) @ sig)) for t in ts)
        return PeriodReport(float(dev), 1e-10, probes)
    ts = np.linspace(0.0, obj.period, probes)
    dev = max(np.max(np.abs(obj(t + obj.period) - obj(t))) for t in ts)
    tol = 1e-9 if isinstance(obj.body, Manufactured) else 1e-12
    return PeriodReport(float(dev), tol, probes)


def manufactured_residual(sys: PeriodicLinearSystem, points: int = 256) -> float:
    """max ``|Q*' + Q* R* - A Q*|`` over a grid on [0, T]."""
    body = sys.body
    if not isinstance(body, Manufactured):
        raise TypeError("not a manufactured system")
    worst = 0.0
    for t in np.linspace(0.0, sys.period, points):
        q = body.q.curve(t)
        r = body.q.curve.derivative(t) + q @ body.rstar - sys(t) @ q
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def manufactured_solution(sys: PeriodicLinearSystem, t: float) -> np.ndarray:
    """Closed-form principal solution ``Q*(t) exp(t R*) Q*(0)^{-1}``."""
    from .realog import matrix_exp

    body = sys.body
    q0 = body.q.curve(0.0)
    return body.q.curve(t) @ matrix_exp(t * body.rstar) @ np.linalg.inv(q0)
