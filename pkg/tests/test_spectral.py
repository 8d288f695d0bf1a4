import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqnf.spectral import (a_index, accuracy_tol_cluster, jordan_inventory, q0_index,
                             real_jordan_basis)


def block(lam, m):
    return lam * np.eye(m) + np.eye(m, k=1)


def direct_sum(*mats):
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n))
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def triples(inv):
    return sorted((e.eigenvalue.real, e.size, e.count) for e in inv.entries)


def test_identity_inventory():
    inv = jordan_inventory(np.eye(3))
    assert triples(inv) == [(1.0, 1, 3)]
    assert a_index(inv) == 0


def test_diagonal_negative_inventory():
    inv = jordan_inventory(np.diag([-1.0, -2.0]))
    assert triples(inv) == [(-2.0, 1, 1), (-1.0, 1, 1)]
    assert a_index(inv) == 2


def test_defective_negative_inventory():
    M = direct_sum(block(-1.0, 2), np.array([[-3.0]]))
    inv = jordan_inventory(M)
    assert triples(inv) == [(-3.0, 1, 1), (-1.0, 2, 1)]
    assert a_index(inv) == 3


def test_even_count_has_zero_index():
    assert a_index(jordan_inventory(np.diag([-1.0, -1.0]))) == 0


def test_complex_pair_entry():
    th = 0.7
    M = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    (e,) = jordan_inventory(M).entries
    assert e.complex_pair and e.eigenvalue.imag > 0 and e.size == 1


def test_weyr_characteristic():
    M = direct_sum(block(2.0, 3), block(2.0, 1))
    inv = jordan_inventory(M)
    assert inv.weyr(inv.entries[0].eigenvalue, kmax=4) == [0, 2, 3, 4, 4]


def test_basis_for_diagonal_negative():
    dec = real_jordan_basis(np.diag([-1.0, -2.0]), jordan_inventory(np.diag([-1.0, -2.0])))
    s1, s2 = dec.segment("J1"), dec.segment("J2")
    assert s1.stop == s1.start
    # segments sort by descending |lambda|
    assert np.allclose(dec.J[s2, s2], np.diag([-2.0, -1.0]))
    assert np.allclose(np.abs(dec.S), np.eye(2)[::-1] * np.abs(dec.S).max(axis=0))


def test_basis_even_negative_goes_to_first_segment():
    M = np.diag([-1.0, -1.0, 5.0])
    dec = real_jordan_basis(M, jordan_inventory(M))
    s1 = dec.segment("J1")
    assert dec.d == 0 and s1.stop - s1.start == 3
    assert np.allclose(np.sort(np.diag(dec.J)), [-1.0, -1.0, 5.0])


def test_basis_anchored_unipotent():
    M = block(1.0, 2)
    dec = real_jordan_basis(M, jordan_inventory(M), anchor=np.array([1.0, 0.0]))
    sp = dec.segment("Jphi")
    assert sp.stop - sp.start == 2
    assert np.allclose(dec.S[:, 0], [1.0, 0.0])
    assert np.allclose(dec.J, M)


def test_q0_ladder():
    assert q0_index(np.eye(2), np.array([1.0, 0.0])) == 0
    assert q0_index(block(1.0, 2), np.array([1.0, 0.0])) == 1
    assert q0_index(block(1.0, 3), np.array([1.0, 0.0, 0.0])) == 2


def test_accuracy_cluster_not_below_default():
    M = np.diag([3.0, 1.0])
    assert accuracy_tol_cluster(M, 1e-14) >= 1e-6 * 3.0
    assert accuracy_tol_cluster(M, 1e-10) == pytest.approx(10 * 1e-5 * 3.0)


def test_perturbed_block_still_found():
    # a size-2 block hit by 1e-10 splits by ~1e-5; the accuracy radius regroups it
    M = block(-1.0, 2)
    M[1, 0] = 1e-10
    inv = jordan_inventory(M, accuracy_tol_cluster(M, 1e-10))
    assert triples(inv) == [(-1.0, 2, 1)]


def random_real_jordan(rng):
    parts = []
    for _ in range(rng.integers(1, 4)):
        kind = rng.integers(0, 3)
        m = int(rng.integers(1, 3))
        if kind == 0:
            parts.append(block(float(rng.choice([-2.0, -1.0, 0.5, 3.0])), m))
        elif kind == 1:
            lam = float(rng.choice([-1.5, 2.0]))
            parts += [block(lam, m), block(lam, m)]
        else:
            th = float(rng.uniform(0.3, 2.5))
            parts.append(1.3 * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]))
    return direct_sum(*parts)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_reconstruction_and_similarity_invariance(seed):
    rng = np.random.default_rng(seed)
    J = random_real_jordan(rng)
    n = J.shape[0]
    P = np.eye(n) + 0.3 * rng.normal(size=(n, n)) / np.sqrt(n)
    M = P @ J @ np.linalg.inv(P)
    inv_j = jordan_inventory(J)
    inv = jordan_inventory(M, accuracy_tol_cluster(M, 1e-16 * np.linalg.cond(P) ** 2))
    assert a_index(inv) == a_index(inv_j)
    dec = real_jordan_basis(M, inv)
    if np.linalg.cond(dec.S) <= 1e6:
        assert dec.residual <= 1e-7 * np.linalg.norm(M, 2)
        assert np.allclose(dec.S @ dec.J @ np.linalg.inv(dec.S), M, atol=1e-7 * np.linalg.norm(M, 2))
