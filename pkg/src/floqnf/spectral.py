"""Numerical Jordan structure of (monodromy) matrices.

Eigenvalues are clustered, block sizes recovered from the rank sequence of
``(M - lam I)^k``, and a real Jordan basis assembled from Jordan chains.
Numerical Jordan forms are ill-posed in general; this targets fixture-scale
matrices (n <= 12, cond(S) <= 1e6). Callers who know the structure can pin it
with :func:`pinned_inventory`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (AmbiguousCluster, AnchorNotEigenvector, ChainBreakdown,
                     SingularMonodromy)

RANK_RTOL = 1e-8
REAL_TOL = 1e-8
ANCHOR_RTOL = 1e-7


@dataclass(frozen=True)
class InventoryEntry:
    """``count`` Jordan blocks of ``size`` for ``eigenvalue``.

    Complex entries stand for a conjugate pair of classes; ``eigenvalue`` is
    the member with positive imaginary part.
    """

    eigenvalue: complex
    size: int
    count: int
    complex_pair: bool = False

    @property
    def is_negative_real(self) -> bool:
        return not self.complex_pair and self.eigenvalue.real < 0

    @property
    def dimension(self) -> int:
        return self.size * self.count * (2 if self.complex_pair else 1)


@dataclass(frozen=True)
class JordanInventory:
    entries: tuple
    tol_cluster: float
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.matrix.shape[0]
        if sum(e.dimension for e in self.entries) != n:
            raise ChainBreakdown("inventory dimensions do not add up to n")
        if any(e.size < 1 or e.count < 1 for e in self.entries):
            raise ChainBreakdown("sizes and counts must be positive")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def classes(self):
        """Eigenvalue classes in first-seen order, each with its entries."""
        out = {}
        for e in self.entries:
            out.setdefault((e.eigenvalue, e.complex_pair), []).append(e)
        return out

    def weyr(self, eigenvalue, complex_pair=False, kmax=None):
        """Nullities of ``(M - lam I)^k``, k = 0..kmax, implied by the inventory."""
        es = self.classes()[(eigenvalue, complex_pair)]
        kmax = kmax or self.n
        return [sum(min(e.size, k) * e.count for e in es) for k in range(kmax + 1)]

    def to_dict(self):
        return {
            "tol_cluster": self.tol_cluster,
            "entries": [
                {"eigenvalue": [e.eigenvalue.real, e.eigenvalue.imag], "size": e.size,
                 "count": e.count, "complex_pair": e.complex_pair}
                for e in self.entries
            ],
        }


def default_tol_cluster(M) -> float:
    return 1e-6 * max(1.0, np.linalg.norm(M, 2))


def accuracy_tol_cluster(M, tol: float, factor: float = 10.0) -> float:
    """Cluster radius for a monodromy known to integration accuracy ``tol``.

    A Jordan block hit by a perturbation eps splits by about sqrt(eps), so a
    defective multiplier needs a radius of order sqrt(tol), never below the
    default.
    """
    return max(default_tol_cluster(M), factor * np.sqrt(tol) * max(1.0, np.linalg.norm(M, 2)))


def _cluster(eigs, tol):
    n = len(eigs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= tol * max(1.0, abs(eigs[i]), abs(eigs[j])):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array([eigs[i] for i in g]) for g in groups.values()]


def _is_real(lam) -> bool:
    return abs(lam.imag) <= REAL_TOL * max(1.0, abs(lam))


def _nullity(B, k, scale):
    sv = np.linalg.svd(np.linalg.matrix_power(B, k), compute_uv=False)
    return int(np.sum(sv <= RANK_RTOL * scale ** k))


def _blocks_from_ranks(M, lam, mult):
    n = M.shape[0]
    B = M - lam * np.eye(n)
    scale = max(1.0, np.linalg.norm(M, 2) + abs(lam))
    nu = [0]
    for k in range(1, mult + 1):
        nu.append(_nullity(B, k, scale))
        if nu[-1] >= mult:
            break
    if nu[-1] != mult:
        raise ChainBreakdown(
            f"rank sequence {nu[1:]} does not reach multiplicity {mult}", eigenvalue=lam)
    w = np.diff(nu)
    if np.any(w <= 0) or np.any(np.diff(w) > 0):
        raise ChainBreakdown(f"invalid Weyr characteristic {list(w)}", eigenvalue=lam)
    w = np.r_[w, 0]
    return {k + 1: int(w[k] - w[k + 1]) for k in range(len(w) - 1) if w[k] - w[k + 1] > 0}


def jordan_inventory(M, tol_cluster: float | None = None) -> JordanInventory:
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] < 1e-12 * sv[0]:
        raise SingularMonodromy(f"smallest singular value {sv[-1]:.3g} relative to {sv[0]:.3g}")
    if tol_cluster is None:
        tol_cluster = default_tol_cluster(M)
    eigs = np.linalg.eigvals(M).astype(complex)
    clusters = _cluster(eigs, tol_cluster)
    means = [c.mean() for c in clusters]
    for i in range(len(means)):
        for j in range(i + 1, len(means)):
            gap = abs(means[i] - means[j])
            if gap <= 10 * tol_cluster * max(1.0, abs(means[i]), abs(means[j])):
                raise AmbiguousCluster(
                    f"clusters at {means[i]:.8g} and {means[j]:.8g} are {gap:.3g} apart")

    entries = []
    used = set()
    order = sorted(range(len(means)), key=lambda i: (-abs(means[i]), -means[i].real, -means[i].imag))
    for i in order:
        if i in used:
            continue
        lam, mult = means[i], len(clusters[i])
        if _is_real(lam):
            used.add(i)
            for size, count in sorted(_blocks_from_ranks(M, lam.real, mult).items(), reverse=True):
                entries.append(InventoryEntry(complex(lam.real, 0.0), size, count))
            continue
        partner = min((j for j in range(len(means)) if j != i and j not in used),
                      key=lambda j: abs(means[j] - lam.conjugate()), default=None)
        if partner is None or len(clusters[partner]) != mult:
            raise ChainBreakdown("complex eigenvalue without matching conjugate", eigenvalue=lam)
        used.update((i, partner))
        lam = lam if lam.imag > 0 else means[partner]
        lam = complex(lam.real, abs(lam.imag))
        for size, count in sorted(_blocks_from_ranks(M, lam, mult).items(), reverse=True):
            entries.append(InventoryEntry(lam, size, count, complex_pair=True))
    return JordanInventory(tuple(entries), float(tol_cluster), M)


def pinned_inventory(M, entries) -> JordanInventory:
    """Structure-override hook: build an inventory from caller-supplied
    ``(eigenvalue, size, count)`` triples (complex eigenvalues mark pairs)."""
    M = np.asarray(M, dtype=float)
    out = []
    for lam, size, count in entries:
        lam = complex(lam)
        pair = not _is_real(lam)
        if pair:
            lam = complex(lam.real, abs(lam.imag))
        else:
            lam = complex(lam.real, 0.0)
        out.append(InventoryEntry(lam, int(size), int(count), pair))
    return JordanInventory(tuple(out), 0.0, M)


def a_index(inv: JordanInventory) -> int:
    """Sum of sizes of negative-real Jordan blocks occurring an odd number of times."""
    return int(sum(e.size for e in inv.entries if e.is_negative_real and e.count % 2 == 1))


# ---------------------------------------------------------------------------
# real Jordan basis

@dataclass(frozen=True)
class JordanBlock:
    """One diagonal unit of the real Jordan matrix.

    kind: ``"real"`` (one block), ``"pair"`` (two equal negative blocks, stored
    consecutively), ``"complex"`` (realified 2x2 rotation-scaling blocks).
    """

    eigenvalue: complex
    size: int
    kind: str
    segment: str
    start: int = 0

    @property
    def dim(self) -> int:
        return self.size if self.kind == "real" else 2 * self.size

    def matrix(self) -> np.ndarray:
        from .realog import realify

        lam = self.eigenvalue
        if self.kind == "complex":
            return realify(complex(lam) * np.eye(self.size) + np.eye(self.size, k=1))
        blk = lam.real * np.eye(self.size) + np.eye(self.size, k=1)
        if self.kind == "pair":
            return np.kron(np.eye(2), blk)
        return blk


@dataclass(frozen=True)
class RealJordanDecomposition:
    S: np.ndarray
    J: np.ndarray
    blocks: tuple
    segments: dict
    residual: float

    def segment(self, name):
        return self.segments[name]

    @property
    def d(self) -> int:
        sl = self.segments["J2"]
        return sl.stop - sl.start

    def to_dict(self):
        return {
            "S": self.S.tolist(),
            "J": self.J.tolist(),
            "segments": {k: [v.start, v.stop] for k, v in self.segments.items()},
            "blocks": [{"eigenvalue": [complex(b.eigenvalue).real, complex(b.eigenvalue).imag],
                        "size": b.size, "kind": b.kind, "segment": b.segment} for b in self.blocks],
            "reconstruction_residual": self.residual,
        }


def _orth(A, rank=None):
    if A.shape[1] == 0:
        return A
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    if rank is None:
        rank = int(np.sum(s > 1e-10 * max(s[0], 1e-300)))
    return u[:, :rank]


def _null_basis(Bk, nullity):
    if nullity == 0:
        return np.zeros((Bk.shape[0], 0), dtype=Bk.dtype)
    _, _, vh = np.linalg.svd(Bk)
    return vh[-nullity:].conj().T


def _chains(M, lam, sizes, seed=None):
    """Jordan chains for eigenvalue ``lam`` with block sizes ``sizes`` (a
    ``{size: count}`` map). ``seed`` is an optional pre-built chain (list of
    vectors, eigenvector first) that must be part of the result.

    Returns a list of chains; each chain is an ``n x size`` array whose first
    column is an eigenvector and ``B v_k = v_{k-1}``.
    """
    n = M.shape[0]
    dtype = complex if isinstance(lam, complex) and lam.imag != 0 else float
    if dtype is float:
        lam = float(np.real(lam))
    B = M - lam * np.eye(n)
    pmax = max(sizes)
    nullities = [sum(min(s, k) * c for s, c in sizes.items()) for k in range(pmax + 1)]
    kernels = [_null_basis(np.linalg.matrix_power(B, k), nullities[k]) for k in range(pmax + 1)]

    chains = []  # (size, top vector)
    if seed is not None:
        chains.append((seed.shape[1], seed[:, -1]))
    for s in range(pmax, 0, -1):
        have = [(size, top) for size, top in chains if size >= s]
        existing = [np.linalg.matrix_power(B, size - s) @ top for size, top in have]
        need = sizes.get(s, 0) - sum(1 for size, _ in have if size == s)
        if need < 0:
            raise ChainBreakdown("seed chain does not fit the block structure", eigenvalue=lam)
        if need == 0:
            continue
        parts = [kernels[s - 1]] + [e[:, None] / np.linalg.norm(e) for e in existing]
        W = _orth(np.hstack(parts).astype(dtype), rank=nullities[s - 1] + len(existing))
        Z = kernels[s]
        P = Z - W @ (W.conj().T @ Z)
        u, sv, _ = np.linalg.svd(P, full_matrices=False)
        if len(sv) < need or sv[need - 1] < 1e-6:
            raise ChainBreakdown(f"cannot extend chains at level {s}", eigenvalue=lam)
        for j in range(need):
            chains.append((s, u[:, j]))

    out = []
    for size, top in chains:
        cols = [np.linalg.matrix_power(B, size - 1 - k) @ top for k in range(size)]
        out.append(np.column_stack(cols))
    if seed is not None:
        out[0] = seed
    return out


def anchor_chain(M, anchor, q0):
    """Chain of length q0+1 for eigenvalue 1 ending (bottom) exactly at ``anchor``."""
    n = M.shape[0]
    B = M - np.eye(n)
    Bq = np.linalg.matrix_power(B, q0)
    v = np.linalg.lstsq(Bq, anchor, rcond=None)[0]
    cols = [np.linalg.matrix_power(B, q0 - k) @ v for k in range(q0 + 1)]
    cols[0] = np.array(anchor, dtype=float)
    return np.column_stack(cols)


def check_anchor(M, anchor):
    anchor = np.asarray(anchor, dtype=float)
    nrm = np.linalg.norm(anchor)
    if nrm == 0:
        raise AnchorNotEigenvector("anchor is the zero vector")
    res = np.linalg.norm(M @ anchor - anchor)
    if res > ANCHOR_RTOL * nrm * max(1.0, np.linalg.norm(M, 2)):
        raise AnchorNotEigenvector(f"|M b - b| = {res:.3g} for |b| = {nrm:.3g}")
    return anchor


def q0_index(M, v1) -> int:
    """Largest q with ``(M - I)^q v = v1`` solvable (0 if q = 1 already fails).

    Solvability is a rank comparison of ``(M-I)^q`` against ``[(M-I)^q | v1]``
    with singular values below ``1e-8 * max(1, |M|)^q`` treated as zero.
    """
    M = np.asarray(M, dtype=float)
    v1 = check_anchor(M, v1)
    n = M.shape[0]
    B = M - np.eye(n)
    v = v1 / np.linalg.norm(v1)
    scale = max(1.0, np.linalg.norm(M, 2))
    best = 0
    Bq = np.eye(n)
    for q in range(1, n + 1):
        Bq = Bq @ B
        thr = RANK_RTOL * scale ** q
        r1 = int(np.sum(np.linalg.svd(Bq, compute_uv=False) > thr))
        r2 = int(np.sum(np.linalg.svd(np.column_stack([Bq, v]), compute_uv=False) > thr))
        if r1 != r2:
            break
        best = q
    return best


def real_jordan_basis(M, inv: JordanInventory, anchor=None) -> RealJordanDecomposition:
    """Real S, J with ``S J S^-1 = M`` ordered as J_phi (+) J1 (+) J2.

    J_phi (only when ``anchor`` is given) is the eigenvalue-1 block whose chain
    starts at the anchor. J2 holds one copy of every negative-real block that
    occurs an odd number of times; everything else goes to J1, negative
    blocks in consecutive equal pairs.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    units = []  # (segment, eigenvalue, size, kind, chains)
    phi_unit = None
    anchor_class = None
    if anchor is not None:
        anchor = check_anchor(M, anchor)
        q0 = q0_index(M, anchor)
        candidates = [(k, es) for k, es in inv.classes().items()
                      if not k[1] and abs(k[0] - 1.0) <= 1e-6]
        if not candidates or not any(e.size == q0 + 1 for e in candidates[0][1]):
            raise ChainBreakdown(f"no eigenvalue-1 block of size {q0 + 1} for the anchor",
                                 eigenvalue=1.0)
        anchor_class = candidates[0][0]
        seed = anchor_chain(M, anchor, q0)

    for (lam, pair), es in inv.classes().items():
        sizes = {e.size: e.count for e in es}
        if pair:
            chains = _chains(M, complex(lam), sizes)
            for ch in chains:
                units.append(("J1", lam, ch.shape[1], "complex", [ch]))
            continue
        lam_r = float(lam.real)
        if (lam, pair) == anchor_class:
            chains = _chains(M, 1.0, sizes, seed=seed)
            phi_unit = ("Jphi", 1.0, chains[0].shape[1], "real", [chains[0]])
            chains = chains[1:]
        else:
            chains = _chains(M, lam_r, sizes)
        if lam_r < 0:
            by_size = {}
            for ch in chains:
                by_size.setdefault(ch.shape[1], []).append(ch)
            for size, chs in by_size.items():
                for k in range(0, len(chs) - 1, 2):
                    units.append(("J1", lam_r, size, "pair", chs[k:k + 2]))
                if len(chs) % 2:
                    units.append(("J2", lam_r, size, "real", [chs[-1]]))
        else:
            for ch in chains:
                units.append(("J1", lam_r, ch.shape[1], "real", [ch]))

    def key(u):
        return (-abs(u[1]), -u[2], -complex(u[1]).real)

    ordered = ([phi_unit] if phi_unit else []) \
        + sorted((u for u in units if u[0] == "J1"), key=key) \
        + sorted((u for u in units if u[0] == "J2"), key=key)

    cols, blocks = [], []
    start = 0
    for seg, lam, size, kind, chs in ordered:
        if kind == "complex":
            ch = chs[0]
            inter = np.empty((n, 2 * size))
            inter[:, 0::2] = ch.real
            inter[:, 1::2] = ch.imag
            cols.append(inter)
        else:
            cols.extend(np.real(c) for c in chs)
        blk = JordanBlock(complex(lam) if kind == "complex" else lam, size, kind, seg, start)
        blocks.append(blk)
        start += blk.dim
    S = np.hstack(cols) if cols else np.zeros((n, 0))
    if S.shape != (n, n):
        raise ChainBreakdown(f"assembled basis has shape {S.shape}")
    J = np.zeros((n, n))
    for b in blocks:
        J[b.start:b.start + b.dim, b.start:b.start + b.dim] = b.matrix()

    segments = {}
    for name in ("Jphi", "J1", "J2"):
        idx = [b for b in blocks if b.segment == name]
        if idx:
            segments[name] = slice(idx[0].start, idx[-1].start + idx[-1].dim)
        else:
            pos = sum(b.dim for b in blocks if b.segment in {"Jphi": (), "J1": ("Jphi",),
                                                               "J2": ("Jphi", "J1")}[name])
            segments[name] = slice(pos, pos)
    if np.linalg.cond(S) > 1e14:
        raise ChainBreakdown("assembled basis is singular")
    resid = float(np.linalg.norm(S @ J @ np.linalg.inv(S) - M, 2) / max(np.linalg.norm(M, 2), 1e-300))
    return RealJordanDecomposition(S, J, tuple(blocks), segments, resid)
