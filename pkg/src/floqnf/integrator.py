"""Fundamental matrix solutions and monodromy matrices.

The matrix ODE ``Phi' = A(t) Phi, Phi(0) = I`` is integrated over two periods
with an embedded Dormand-Prince 5(4) pair. Steps land exactly on T and 2T.
Dense output is cubic Hermite on stored values and derivatives. A step is
also rejected when the Hermite interpolant drifts more than 10*tol from the
pair's 5th-order continuous extension, or its time derivative more than
100*tol, so ``dense_eval`` and the dense derivative inherit the bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import NumericalFailure, OutOfWindow, StepSizeUnderflow
from .linsys import PeriodicLinearSystem, PiecewiseConstant
from .realog import matrix_exp

DEFAULT_TOL = 1e-10

# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension (Hairer & Wanner, contd5)
_D = np.array([-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
               -10690763975 / 1880347072, 701980252875 / 199316789632,
               -1453857185 / 822651844, 69997945 / 29380423])


@dataclass(frozen=True)
class DenseTrajectory:
    """Nodes ``t``, states ``y`` and derivatives ``dy`` with Hermite interpolation."""

    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        for a in (self.t, self.y, self.dy):
            a.setflags(write=False)

    def _locate(self, t):
        if t < self.t[0] or t > self.t[-1]:
            raise OutOfWindow(f"t={t:.17g} outside [{self.t[0]:.6g}, {self.t[-1]:.6g}]")
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        return min(i, len(self.t) - 2)

    def _basis(self, t):
        i = self._locate(t)
        h = self.t[i + 1] - self.t[i]
        th = (t - self.t[i]) / h
        return i, h, th

    def __call__(self, t: float) -> np.ndarray:
        i, h, th = self._basis(t)
        if th == 0.0:
            return self.y[i].copy()
        if th == 1.0:
            return self.y[i + 1].copy()
        y0, y1, f0, f1 = self.y[i], self.y[i + 1], self.dy[i], self.dy[i + 1]
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th ** 2 * (3 - 2 * th)
        h11 = th ** 2 * (th - 1)
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1

    def derivative(self, t: float) -> np.ndarray:
        i, h, th = self._basis(t)
        if th == 0.0:
            return self.dy[i].copy()
        if th == 1.0:
            return self.dy[i + 1].copy()
        y0, y1, f0, f1 = self.y[i], self.y[i + 1], self.dy[i], self.dy[i + 1]
        d00 = 6 * th * (th - 1) / h
        d10 = (1 - th) * (1 - 3 * th)
        d01 = -d00
        d11 = th * (3 * th - 2)
        return d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1


def _wrms(v, w):
    return float(np.sqrt(np.mean((v / w) ** 2)))


def dopri(rhs, y0, landings, tol=DEFAULT_TOL, scale_time=None, max_steps=200_000):
    """Integrate ``y' = rhs(t, y)`` through the increasing times ``landings``.

    Returns ``(DenseTrajectory, stats)``. Every landing time is a node.
    """
    y = np.array(y0, dtype=float)
    t = float(landings[0])
    span = float(landings[-1] - landings[0])
    scale_time = scale_time or span
    atol = rtol = tol
    f = rhs(t, y)
    ts, ys, fs = [t], [y.copy()], [f.copy()]
    # starting step (Hairer's heuristic, simplified)
    w = atol + rtol * np.abs(y)
    d0, d1 = _wrms(y, w), _wrms(f, w)
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6 * span
    h = min(h, 0.05 * span)
    steps = rejected = 0
    k = np.empty((7, y.size))
    for t_end in landings[1:]:
        while t < t_end:
            if steps + rejected > max_steps:
                raise StepSizeUnderflow("step budget exhausted")
            if h < 1e-14 * scale_time:
                raise StepSizeUnderflow(f"step {h:.3g} below 1e-14*T at t={t:.6g}")
            if t + 1.1 * h >= t_end:
                h = t_end - t
            k[0] = f
            for s in range(1, 7):
                k[s] = rhs(t + _C[s] * h, y + h * (np.dot(_A[s], k[:s])))
            y_new = y + h * (_B @ k)
            f_new = k[6]
            w = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _wrms(h * (_E @ k), w)
            # Hermite midpoint deviation from the 4th-order extension: |h D.k| / 16
            dk = _D @ k
            err_int = _wrms(h * dk / 16.0, 10.0 * w)
            # same gap in the time derivative: max |2 th (1-th)(1-2 th)| = 0.19245
            wd = atol + rtol * np.maximum(np.abs(f), np.abs(f_new))
            err_int = max(err_int, _wrms(0.19245 * dk, 100.0 * wd))
            if err <= 1.0 and err_int <= 1.0:
                t = t_end if t + h >= t_end else t + h
                y, f = y_new, f_new
                ts.append(t)
                ys.append(y.copy())
                fs.append(f.copy())
                steps += 1
            else:
                rejected += 1
            fac = min(0.9 * max(err, 1e-10) ** -0.2, 0.9 * max(err_int, 1e-10) ** -0.25)
            h *= min(5.0, max(0.2, fac))
    traj = DenseTrajectory(np.array(ts), np.array(ys), np.array(fs))
    return traj, {"steps": steps, "rejected_steps": rejected, "tol": tol}


@dataclass(frozen=True)
class MatrixSolution:
    """Principal fundamental solution sampled over [0, 2T]."""

    n: int
    period: float
    traj: DenseTrajectory
    stats: dict = field(default_factory=dict)
    offset: int = 0
    # piecewise-constant systems: exact evaluation (node times, node matrices, A per segment)
    exact: tuple | None = None

    @property
    def times(self) -> np.ndarray:
        return self.traj.t

    def node_matrices(self) -> np.ndarray:
        sl = slice(self.offset, self.offset + self.n * self.n)
        return self.traj.y[:, sl].reshape(-1, self.n, self.n)

    def __call__(self, t: float) -> np.ndarray:
        return dense_eval(self, t)

    def derivative(self, t: float) -> np.ndarray:
        if self.exact is not None:
            i = self._segment(t)
            return self.exact[2][i] @ dense_eval(self, t)
        sl = slice(self.offset, self.offset + self.n * self.n)
        return self.traj.derivative(t)[sl].reshape(self.n, self.n)

    def _segment(self, t):
        nodes = self.exact[0]
        if t < 0 or t > nodes[-1]:
            raise OutOfWindow(f"t={t:.17g} outside [0, {nodes[-1]:.6g}]")
        return min(int(np.searchsorted(nodes, t, side="right")) - 1, len(nodes) - 2)

    def state(self, t: float) -> np.ndarray:
        """Auxiliary co-integrated state (e.g. the orbit) at ``t``."""
        return self.traj(t)[: self.offset]


def dense_eval(sol: MatrixSolution, t: float) -> np.ndarray:
    if sol.exact is not None:
        nodes, mats, amats = sol.exact
        i = sol._segment(t)
        if t == nodes[i]:
            return mats[i].copy()
        return matrix_exp((t - nodes[i]) * amats[i]) @ mats[i]
    sl = slice(sol.offset, sol.offset + sol.n * sol.n)
    return sol.traj(t)[sl].reshape(sol.n, sol.n)


def monodromy(sol: MatrixSolution) -> np.ndarray:
    """Phi(T), read from the node the controller placed at t = T."""
    idx = np.flatnonzero(sol.times == sol.period)
    if not len(idx):
        raise NumericalFailure("no node at t = T")
    return sol.node_matrices()[idx[0]].copy()


def _check_dets(sol: MatrixSolution, trace_integral: float):
    dets = np.array([np.linalg.det(m) for m in sol.node_matrices()])
    if np.any(np.abs(dets) < 1e-300):
        raise NumericalFailure("fundamental solution became singular")
    det_t = np.linalg.det(monodromy(sol))
    if not det_t > 0:
        raise NumericalFailure(f"det Phi(T) = {det_t:.3g} is not positive")
    rel = abs(np.log(det_t) - trace_integral) / max(1.0, abs(trace_integral))
    sol.stats["liouville_rel_error"] = float(rel)
    sol.stats["liouville_ok"] = bool(rel <= 1e-6)


def _piecewise_solution(sys: PeriodicLinearSystem) -> MatrixSolution:
    body: PiecewiseConstant = sys.body
    bp = body.breakpoints
    nodes = np.r_[bp, bp[1:] + sys.period]
    amats = np.concatenate([body.matrices, body.matrices])
    mats = [np.eye(sys.n)]
    for i in range(len(nodes) - 1):
        mats.append(matrix_exp((nodes[i + 1] - nodes[i]) * amats[i]) @ mats[-1])
    mats = np.array(mats)
    dys = np.array([amats[min(i, len(amats) - 1)] @ m for i, m in enumerate(mats)])
    traj = DenseTrajectory(nodes, mats.reshape(len(nodes), -1), dys.reshape(len(nodes), -1))
    stats = {"steps": len(nodes) - 1, "rejected_steps": 0, "tol": 0.0, "method": "exact"}
    return MatrixSolution(sys.n, sys.period, traj, stats, exact=(nodes, mats, amats))


def fundamental_solution(sys: PeriodicLinearSystem, tol: float = DEFAULT_TOL) -> MatrixSolution:
    if not 1e-14 <= tol <= 1e-4:
        raise ValueError("tol must lie in [1e-14, 1e-4]")
    n, T = sys.n, sys.period
    if isinstance(sys.body, PiecewiseConstant):
        sol = _piecewise_solution(sys)
        trace_int = float(sum(np.trace(a) * (b - c) for a, b, c in
                              zip(sys.body.matrices, sys.body.breakpoints[1:], sys.body.breakpoints[:-1])))
    else:
        def rhs(t, y):
            return (sys(t) @ y.reshape(n, n)).ravel()

        traj, stats = dopri(rhs, np.eye(n).ravel(), [0.0, T, 2 * T], tol, scale_time=T)
        stats["method"] = "dopri54"
        sol = MatrixSolution(n, T, traj, stats)
        trace_int = quad(lambda s: np.trace(sys(s)), 0.0, T, limit=200, epsabs=1e-13, epsrel=1e-12)[0]
    _check_dets(sol, trace_int)
    return sol


def variational_solution(f, orbit, tol: float = DEFAULT_TOL) -> MatrixSolution:
    """Principal solution of ``y' = Df(phi(t)) y`` integrated jointly with the orbit.

    The returned solution's ``state(t)`` gives the co-integrated orbit point.
    """
    n, T = f.n, orbit.period

    def rhs(t, y):
        z = y[:n]
        return np.concatenate([f(z), (f.jacobian(z) @ y[n:].reshape(n, n)).ravel()])

    y0 = np.concatenate([orbit.z0, np.eye(n).ravel()])
    traj, stats = dopri(rhs, y0, [0.0, T, 2 * T], tol, scale_time=T)
    stats["method"] = "dopri54"
    sol = MatrixSolution(n, T, traj, stats, offset=n)
    trace_int = _nodewise_quadrature(lambda s: np.trace(f.jacobian(sol.state(s))), sol, T)
    _check_dets(sol, trace_int)
    return sol


def _nodewise_quadrature(fun, sol: MatrixSolution, upper: float, order: int = 5) -> float:
    """Gauss-Legendre on each step interval (the dense output is smooth there)."""
    x, w = np.polynomial.legendre.leggauss(order)
    t = sol.times
    t = t[t <= upper]
    total = 0.0
    for a, b in zip(t[:-1], t[1:]):
        mid, half = (a + b) / 2, (b - a) / 2
        total += half * sum(wi * fun(mid + half * xi) for xi, wi in zip(x, w))
    return float(total)


def liouville_residual(sol: MatrixSolution) -> float:
    return sol.stats.get("liouville_rel_error", float("nan"))
