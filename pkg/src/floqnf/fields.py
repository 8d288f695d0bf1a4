"""Autonomous vector fields ``z' = f(z) + g(t, z)`` and the shipped built-ins."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class AutonomousField:
    n: int
    rhs: Callable
    jac: Callable | None = None
    perturbation: Callable | None = None
    name: str = "field"

    def __call__(self, z) -> np.ndarray:
        return np.asarray(self.rhs(np.asarray(z, dtype=float)), dtype=float)

    def jacobian(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.jac is not None:
            return np.asarray(self.jac(z), dtype=float)
        return fd_jacobian(self.rhs, z)

    def g(self, t, z):
        if self.perturbation is None:
            return np.zeros(self.n)
        return np.asarray(self.perturbation(t, np.asarray(z, dtype=float)), dtype=float)

    def with_perturbation(self, g) -> "AutonomousField":
        return AutonomousField(self.n, self.rhs, self.jac, g, self.name)

    def scaled(self, c: float) -> "AutonomousField":
        """The field ``c f`` (orbits unchanged, period divided by ``c``)."""
        jac = None if self.jac is None else (lambda z: c * self.jac(z))
        return AutonomousField(self.n, lambda z: c * self.rhs(z), jac, None, f"{c:g}*{self.name}")


def fd_jacobian(f, z, h=None):
    z = np.asarray(z, dtype=float)
    n = z.size
    out = np.empty((n, n))
    for j in range(n):
        step = h if h is not None else 1e-6 * max(1.0, abs(z[j]))
        e = np.zeros(n)
        e[j] = step
        out[:, j] = (np.asarray(f(z + e)) - np.asarray(f(z - e))) / (2 * step)
    return out


def jacobian_mismatch(field: AutonomousField, probes) -> float:
    """Largest relative gap between the analytic Jacobian and central differences."""
    worst = 0.0
    for z in probes:
        a = field.jacobian(z)
        b = fd_jacobian(field.rhs, z)
        worst = max(worst, float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b)))))
    return worst


# ---------------------------------------------------------------------------
# built-ins

def planar_cycle() -> AutonomousField:
    """``(x - y - x r^2, x + y - y r^2)``: attracting unit circle, T = 2 pi."""

    def f(z):
        x, y = z
        r2 = x * x + y * y
        return np.array([x - y - x * r2, x + y - y * r2])

    def jac(z):
        x, y = z
        r2 = x * x + y * y
        return np.array([[1 - r2 - 2 * x * x, -1 - 2 * x * y],
                         [1 - 2 * x * y, 1 - r2 - 2 * y * y]])

    return AutonomousField(2, f, jac, name="planar_cycle")


def rigid_rotation() -> AutonomousField:
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    return AutonomousField(2, lambda z: rot @ z, lambda z: rot, name="rigid_rotation")


TWIST_RATES = (np.log(0.5) / (2 * np.pi), np.log(0.25) / (2 * np.pi))


def twisted_cycle(a: float = TWIST_RATES[0], b: float = TWIST_RATES[1]) -> AutonomousField:
    """Unit circle in the xy-plane, T = 2 pi, with a half-twisting normal frame.

    With ``p = r - 1``, ``q = z`` and ``theta`` the polar angle, the normal
    coordinates ``u = Rot(-theta/2) (p, q)`` obey ``u' = diag(a, b) u`` exactly,
    so the nontrivial multipliers are ``-exp(2 pi a)`` and ``-exp(2 pi b)``
    (-1/2 and -1/4 by default).
    """
    al, be = (a + b) / 2, (a - b) / 2

    def parts(zv):
        x, y, zz = zv
        r = np.hypot(x, y)
        c, s = x / r, y / r
        p, q = r - 1.0, zz
        pd = al * p + be * (c * p + s * q) - 0.5 * q
        qd = al * q + be * (s * p - c * q) + 0.5 * p
        return x, y, r, c, s, p, q, pd, qd

    def f(zv):
        x, y, r, c, s, p, q, pd, qd = parts(zv)
        return np.array([pd * c - y, pd * s + x, qd])

    def jac(zv):
        x, y, r, c, s, p, q, pd, qd = parts(zv)
        gp = np.array([c, s, 0.0])
        gq = np.array([0.0, 0.0, 1.0])
        gc = np.array([s * s / r, -c * s / r, 0.0])
        gs = np.array([-c * s / r, c * c / r, 0.0])
        gpd = (al + be * c) * gp + (be * s - 0.5) * gq + be * p * gc + be * q * gs
        gqd = (be * s + 0.5) * gp + (al - be * c) * gq + be * p * gs - be * q * gc
        return np.array([
            c * gpd + pd * gc - np.array([0.0, 1.0, 0.0]),
            s * gpd + pd * gs + np.array([1.0, 0.0, 0.0]),
            gqd,
        ])

    return AutonomousField(3, f, jac, name="twisted_cycle")


def forcing(eps: float = 1e-3, n: int = 2) -> Callable:
    """``g(t, z) = eps (cos t, 0, ...)``."""

    def g(t, z):
        out = np.zeros(n)
        out[0] = eps * np.cos(t)
        return out

    return g


BUILTINS = {
    "planar_cycle": planar_cycle,
    "twisted_cycle": twisted_cycle,
    "rigid_rotation": rigid_rotation,
}

# suggested (z0, T0) guesses for each built-in
BUILTIN_GUESSES = {
    "planar_cycle": ((1.1, 0.0), 6.2),
    "twisted_cycle": ((1.0, 0.0, 0.0), 2 * np.pi),
    "rigid_rotation": ((1.0, 0.0), 2 * np.pi),
}


# ---------------------------------------------------------------------------
# polynomial descriptions

def polynomial_field(components, name="polynomial") -> AutonomousField:
    """Field from per-component monomial lists ``[[coef, [e_1, ..., e_n]], ...]``."""
    n = len(components)
    terms = []
    for i, comp in enumerate(components):
        coefs, exps = [], []
        for term in comp:
            if len(term) != 2:
                raise InputError(f"component {i}: term must be [coefficient, exponents]")
            c, e = term
            e = [int(v) for v in e]
            if len(e) != n or min(e, default=0) < 0:
                raise InputError(f"component {i}: exponent tuple must have {n} non-negative entries")
            if not np.isfinite(float(c)):
                raise InputError(f"component {i}: non-finite coefficient")
            coefs.append(float(c))
            exps.append(e)
        terms.append((np.array(coefs), np.array(exps, dtype=int).reshape(-1, n)))

    def f(z):
        return np.array([np.sum(c * np.prod(z ** e, axis=1)) if len(c) else 0.0 for c, e in terms])

    def jac(z):
        out = np.zeros((n, n))
        for i, (c, e) in enumerate(terms):
            for j in range(n):
                mask = e[:, j] > 0
                if not np.any(mask):
                    continue
                ej = e[mask].copy()
                k = ej[:, j].astype(float)
                ej[:, j] -= 1
                out[i, j] = np.sum(c[mask] * k * np.prod(z ** ej, axis=1))
        return out

    return AutonomousField(n, f, jac, name=name)
