"""Matrix exponential and the Jordan-route logarithms.

``jordan_block_log`` is the finite log series for a single Jordan block,
``real_log`` assembles a real logarithm through a real Jordan basis (it exists
iff every negative-real Jordan block occurs an even number of times), and
``shifted_negative_log`` produces the real R2 with ``-exp(T R2) = J2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (BranchResidue, MatrixExpOverflow, NoRealLogarithm, NotNegativeSpectrum,
                     SingularMatrix, ZeroEigenvalue)

IMAG_DROP = 1e-10

# Pade(13) coefficients and theta_13 from Higham (2005).
_PADE13 = (64764752532480000., 32382376266240000., 7771770303897600.,
           1187353796428800., 129060195264000., 10559470521600.,
           670442572800., 33522128640., 1323241920., 40840800., 960960.,
           16380., 182., 1.)
_THETA13 = 5.371920351148152


def matrix_exp(x: np.ndarray) -> np.ndarray:
    """exp(X) by scaling and squaring with a fixed [13/13] Pade approximant."""
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise MatrixExpOverflow("non-finite input")
    n = x.shape[0]
    if n == 0:
        return x.copy()
    dtype = np.result_type(x.dtype, float)
    x = x.astype(dtype)
    norm1 = np.linalg.norm(x, 1)
    if norm1 == 0.0:
        return np.eye(n, dtype=dtype)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA13))))
    xs = x / 2.0 ** s
    b = _PADE13
    ident = np.eye(n, dtype=dtype)
    x2 = xs @ xs
    x4 = x2 @ x2
    x6 = x4 @ x2
    u = xs @ (x6 @ (b[13] * x6 + b[11] * x4 + b[9] * x2)
              + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * ident)
    v = (x6 @ (b[12] * x6 + b[10] * x4 + b[8] * x2)
         + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * ident)
    with np.errstate(over="raise", invalid="raise"):
        try:
            r = np.linalg.solve(v - u, v + u)
            for _ in range(s):
                r = r @ r
        except FloatingPointError as exc:
            raise MatrixExpOverflow("exponential exceeds the floating range") from exc
    if not np.all(np.isfinite(r)):
        raise MatrixExpOverflow("exponential exceeds the floating range")
    return r


@dataclass(frozen=True)
class BlockLog:
    eigenvalue: complex
    size: int
    branch: int
    log: np.ndarray

    def block(self) -> np.ndarray:
        return self.eigenvalue * np.eye(self.size) + np.eye(self.size, k=1)


def scalar_log(lam: complex, branch: int = 0) -> complex:
    lam = _principal_arg_fix(lam)
    if lam == 0:
        raise ZeroEigenvalue("log of zero")
    return complex(np.log(abs(lam)), np.angle(lam) + 2 * np.pi * branch)


def _principal_arg_fix(lam: complex) -> complex:
    # np.angle gives -pi for (-1 - 0j); keep Arg in (-pi, pi]
    lam = complex(lam)
    if lam.imag == 0.0 and lam.real < 0:
        return complex(lam.real, 0.0)
    return lam


def jordan_block_log(lam: complex, size: int, branch: int = 0) -> BlockLog:
    """Log of the Jordan block ``lam I + N`` by the terminating series

    ``I log(lam) + sum_{k=1}^{m} (-1)^(k-1) N^k / (k lam^k)``.
    """
    if size < 1:
        raise ValueError("block size must be positive")
    lam = _principal_arg_fix(lam)
    ln = scalar_log(lam, branch)
    out = ln * np.eye(size, dtype=complex)
    for k in range(1, size):
        out += ((-1) ** (k - 1) / (k * lam ** k)) * np.eye(size, k=k)
    return BlockLog(lam, size, branch, out)


def _series_log(mu: float, nil: np.ndarray) -> np.ndarray:
    """Real log of ``mu I + K`` with mu > 0 and K strictly upper triangular."""
    m = nil.shape[0]
    out = np.log(mu) * np.eye(m)
    term = np.eye(m)
    for k in range(1, m):
        term = term @ (nil / mu)
        out += ((-1) ** (k - 1) / k) * term
    return out


def realify(z: np.ndarray) -> np.ndarray:
    """Replace each complex entry ``x + iy`` by ``[[x, y], [-y, x]]``.

    This is a ring homomorphism, so it commutes with exp and maps the complex
    Jordan block of ``a + ib`` to the real block with diagonal ``[[a, b], [-b, a]]``.
    """
    m = z.shape[0]
    out = np.zeros((2 * m, 2 * m))
    out[0::2, 0::2] = z.real
    out[1::2, 1::2] = z.real
    out[0::2, 1::2] = z.imag
    out[1::2, 0::2] = -z.imag
    return out


def _drop_imag(z: np.ndarray, what: str) -> np.ndarray:
    if z.size and np.max(np.abs(z.imag)) > IMAG_DROP:
        raise BranchResidue(f"{what}: imaginary residue {np.max(np.abs(z.imag)):.3g}")
    return np.ascontiguousarray(z.real)


def log_real_jordan(J: np.ndarray, blocks) -> np.ndarray:
    """Real logarithm of a real Jordan matrix described by ``blocks``.

    ``blocks`` is a sequence of :class:`floqnf.spectral.JordanBlock`. Paired
    negative blocks receive conjugate branches ``+i pi``/``-i pi``.
    """
    n = J.shape[0]
    X = np.zeros((n, n))
    for b in blocks:
        sl = slice(b.start, b.start + b.dim)
        if b.kind == "real":
            if b.eigenvalue <= 0:
                raise NoRealLogarithm(
                    f"unpaired block with eigenvalue {b.eigenvalue:.6g} has no real log")
            X[sl, sl] = _drop_imag(jordan_block_log(b.eigenvalue, b.size).log, "real block")
        elif b.kind == "complex":
            X[sl, sl] = realify(jordan_block_log(b.eigenvalue, b.size).log)
        elif b.kind == "pair":
            # two consecutive copies; interleave them into realified form
            m = b.size
            perm = np.empty(2 * m, dtype=int)
            perm[0::2] = np.arange(m)
            perm[1::2] = np.arange(m, 2 * m)
            lr = realify(jordan_block_log(complex(b.eigenvalue), m).log)
            block = np.empty_like(lr)
            block[np.ix_(perm, perm)] = lr
            X[sl, sl] = block
        else:
            raise ValueError(f"unknown block kind {b.kind!r}")
    return X


def lemma_criterion(inv) -> bool:
    """True iff every negative-real inventory entry has even count."""
    return all(e.count % 2 == 0 for e in inv.entries if e.is_negative_real)


def real_log(M: np.ndarray, inv=None) -> np.ndarray:
    """A real X with exp(X) = M, via a real Jordan basis of M."""
    from .spectral import jordan_inventory, real_jordan_basis

    M = np.asarray(M, dtype=float)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] < 1e-12 * sv[0]:
        raise SingularMatrix("matrix is singular to working precision")
    if inv is None:
        inv = jordan_inventory(M)
    if not lemma_criterion(inv):
        bad = [e for e in inv.entries if e.is_negative_real and e.count % 2]
        raise NoRealLogarithm(
            "negative eigenvalue block(s) with odd multiplicity: "
            + ", ".join(f"lambda={e.eigenvalue.real:.6g} size {e.size} x{e.count}" for e in bad))
    dec = real_jordan_basis(M, inv)
    L = log_real_jordan(dec.J, dec.blocks)
    return dec.S @ L @ np.linalg.inv(dec.S)


def _diagonal_blocks(J: np.ndarray):
    n = J.shape[0]
    start = 0
    for i in range(n):
        if i == n - 1 or J[i, i + 1] == 0.0:
            yield start, i + 1
            start = i + 1


def shifted_negative_log(J2: np.ndarray, T: float) -> np.ndarray:
    """Real R2 with ``exp(T R2 + i pi I) = J2``, i.e. ``R2 = log(-J2) / T``."""
    J2 = np.asarray(J2, dtype=float)
    d = J2.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    diag = np.diag(J2)
    if np.any(diag >= 0) or np.any(np.abs(np.tril(J2, -1)) > 0):
        raise NotNegativeSpectrum("J2 must be upper-triangular Jordan with negative diagonal")
    out = np.zeros((d, d))
    for a, b in _diagonal_blocks(J2):
        blk = -J2[a:b, a:b]
        mu = blk[0, 0]
        if np.any(np.diag(blk) != mu):
            raise NotNegativeSpectrum("Jordan block with mixed diagonal")
        out[a:b, a:b] = _series_log(mu, np.triu(blk, 1))
    return out / T
