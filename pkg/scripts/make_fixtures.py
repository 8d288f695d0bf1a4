"""Write the shipped fixture files with oracle expectations.

Expected monodromies come from closed forms: scipy's expm for constant and
piecewise systems, and Q*(T) expm(T R*) Q*(0)^{-1} for manufactured ones,
evaluated here directly from the trigonometric coefficients. Nothing in this
script calls the package's integrator or its own exponential.

    python scripts/make_fixtures.py [outdir]
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
from scipy.linalg import expm

LN2 = float(np.log(2.0))
J = np.array([[0.0, -1.0], [1.0, 0.0]])


def blocks(*mats):
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n))
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def half_freq_curve(const, cos, sin, T, t):
    w = np.pi / T
    q = np.array(const, dtype=float).copy()
    for k, (c, s) in enumerate(zip(cos, sin), start=1):
        q += np.cos(k * w * t) * np.array(c) + np.sin(k * w * t) * np.array(s)
    return q


def multipliers(M):
    return [[float(z.real), float(z.imag)] for z in np.linalg.eigvals(M)]


def linear(name, system, M, a_index, **extra):
    expect = {"monodromy": M.tolist(), "multipliers": multipliers(M), "a_index": a_index,
              "exists": a_index == 0}
    expect.update(extra)
    return {"schema_version": "1", "name": name, "kind": "linear", "system": system, "expect": expect}


def trig(n, T, A0, cos=(), sin=()):
    return {"n": n, "T": T, "kind": "trig", "A0": np.asarray(A0).tolist(),
            "cos": [np.asarray(c).tolist() for c in cos], "sin": [np.asarray(s).tolist() for s in sin]}


def manufactured(n, T, const, cos, sin, d, rstar):
    system = {"n": n, "T": T, "kind": "manufactured",
              "qspec": {"const": np.asarray(const).tolist(),
                        "half_frequency_terms": {"cos": [np.asarray(c).tolist() for c in cos],
                                                 "sin": [np.asarray(s).tolist() for s in sin]},
                        "declared_d": d},
              "rstar": np.asarray(rstar).tolist()}
    q0 = half_freq_curve(const, cos, sin, T, 0.0)
    qT = half_freq_curve(const, cos, sin, T, T)
    # principal solution Q*(t) exp(t R*) Q*(0)^{-1} evaluated at T
    M = qT @ expm(T * np.asarray(rstar)) @ np.linalg.inv(q0)
    return system, M


def rotation_terms(n):
    const = blocks(np.eye(n - 2), np.zeros((2, 2))) if n > 2 else np.zeros((2, 2))
    cos = [blocks(np.zeros((n - 2, n - 2)), np.eye(2)) if n > 2 else np.eye(2)]
    sin = [blocks(np.zeros((n - 2, n - 2)), J) if n > 2 else J]
    return const, cos, sin


def linear_fixtures():
    out = []
    A = np.diag([1.0, 2.0])
    out.append(linear("const_diag_1_2", trig(2, 1.0, A), expm(A), 0, spectrum_R=[[1, 0], [2, 0]]))
    out.append(linear("zero_system", trig(2, 1.0, np.zeros((2, 2))), np.eye(2), 0,
                      spectrum_R=[[0, 0], [0, 0]]))
    c, cs, sn = rotation_terms(2)
    sys_, M = manufactured(2, 1.0, c, cs, sn, 2, np.zeros((2, 2)))
    out.append(linear("rotation_minus_identity", sys_, M, 0))
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out.append(linear("const_rotation", trig(2, 1.0, A), expm(A), 0))
    B = np.array([[0.0, 1.0], [-2.0, -3.0]])
    # the cos/sin parts integrate to zero over a period and commute with B
    out.append(linear("trig_modulated", trig(2, 1.0, B, [B], [0.5 * B]), expm(B), 0,
                      spectrum_R=[[-1, 0], [-2, 0]]))
    B1, B2 = np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([[-0.5, 0.0], [0.3, 0.2]])
    pw = {"n": 2, "T": 1.0, "kind": "piecewise", "breakpoints": [0.0, 0.4, 1.0],
          "matrices": [B1.tolist(), B2.tolist()]}
    out.append(linear("piecewise_two_pieces", pw, expm(0.6 * B2) @ expm(0.4 * B1), 0))
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    out.append(linear("const_jordan_unipotent", trig(2, 1.0, A), expm(A), 0,
                      spectrum_R=[[0, 0], [0, 0]]))
    sys_, M = manufactured(2, 1.0, c, cs, sn, 2, LN2 * np.eye(2))
    # the real log of -2 I pairs the branches +i pi and -i pi
    out.append(linear("rotation_minus_two_pair", sys_, M, 0,
                      spectrum_R=[[LN2, np.pi], [LN2, -np.pi]]))
    c4 = np.zeros((4, 4))
    sys_, M = manufactured(4, 1.0, c4, [np.eye(4)], [blocks(J, J)], 4, np.diag([LN2, 0.0, LN2, 0.0]))
    out.append(linear("double_rotation_paired_negatives", sys_, M, 0))
    A = np.array([[0.1, 1.0, 0.0], [-1.0, 0.1, 0.0], [0.0, 0.0, -0.5]])
    out.append(linear("const_3d_complex_pair", trig(3, 1.0, A), expm(A), 0))

    # positive A-index
    sys_, M = manufactured(2, 1.0, c, cs, sn, 2, np.diag([0.0, LN2]))
    out.append(linear("reference_manufactured", sys_, M, 2, spectrum_R=[[0, 0], [LN2, 0]]))
    sys_, M = manufactured(2, 1.0, c, cs, sn, 2, np.array([[0.0, 1.0], [0.0, 0.0]]))
    out.append(linear("negative_jordan_block", sys_, M, 2))
    c3, cs3, sn3 = rotation_terms(3)
    sys_, M = manufactured(3, 1.0, c3, cs3, sn3, 2, np.diag([0.3, 0.0, LN2]))
    out.append(linear("rotation_3d_mixed", sys_, M, 2, spectrum_R=[[0.3, 0], [0, 0], [LN2, 0]]))
    pw = {"n": 2, "T": 1.0, "kind": "piecewise", "breakpoints": [0.0, 0.5, 1.0],
          "matrices": [(2 * np.pi * J).tolist(), np.diag([0.0, 2 * LN2]).tolist()]}
    Mp = expm(0.5 * np.diag([0.0, 2 * LN2])) @ expm(np.pi * J)
    out.append(linear("piecewise_flip", pw, Mp, 2))
    E = np.array([[0.0, 1.0], [0.0, 0.0]])
    F = np.array([[0.0, 0.0], [1.0, 0.0]])
    # odd harmonics only, so Q*(t+T) = -Q*(t) still holds
    cos = [np.eye(2), np.zeros((2, 2)), 0.1 * E]
    sin = [J, np.zeros((2, 2)), 0.05 * F]
    rstar = np.array([[-0.2, 0.5], [0.0, 0.1]])
    sys_, M = manufactured(2, 2.0, np.zeros((2, 2)), cos, sin, 2, rstar)
    out.append(linear("manufactured_with_harmonics", sys_, M, 2))
    return out


def orbit_fixtures():
    two_pi = 2 * np.pi
    planar = {"schema_version": "1", "name": "planar_limit_cycle", "kind": "orbit",
              "field": {"n": 2, "builtin": "planar_cycle",
                        "perturbation": {"amplitude": 1e-3, "omega": 1.0, "direction": [1.0, 0.0]}},
              "z0": [1.1, 0.0], "T0": 6.2, "with_perturbation": True,
              # U(s+T) = U(s) sits at the double-precision floor here (see README)
              "identities": False,
              "roundtrip": {"v0": [1e-2], "w0": []},
              "expect": {"T": two_pi, "d": 0, "q0": 0, "L": [0.0], "H1": [[-2.0]]}}
    twisted = {"schema_version": "1", "name": "twisted_cycle", "kind": "orbit",
               "field": {"n": 3, "builtin": "twisted_cycle",
                         "perturbation": {"amplitude": 1e-3, "omega": 1.0, "direction": [0.0, 0.0, 1.0]}},
               "z0": [1.0, 0.0, 0.0], "T0": two_pi, "with_perturbation": True,
               "roundtrip": {"v0": [], "w0": [1e-2, 1e-2]},
               "expect": {"T": two_pi, "d": 2, "q0": 0,
                          "re_eig_H2": [np.log(0.5) / two_pi, np.log(0.25) / two_pi]}}
    rigid = {"schema_version": "1", "name": "rigid_rotation", "kind": "orbit",
             "field": {"n": 2, "builtin": "rigid_rotation"},
             "z0": [1.0, 0.0], "T0": two_pi,
             "roundtrip": {"v0": [1e-2], "w0": []},
             "expect": {"T": two_pi, "d": 0, "q0": 0, "L": [0.0], "H1": [[0.0]]}}
    # x' = -r^2 y, y' = r^2 x: angular speed r^2, so the multiplier 1 is defective
    shear = {"schema_version": "1", "name": "shear_rotation", "kind": "orbit",
             "field": {"n": 2, "name": "shear_rotation",
                       "polynomial": [[[-1.0, [2, 1]], [-1.0, [0, 3]]],
                                      [[1.0, [3, 0]], [1.0, [1, 2]]]]},
             "z0": [1.0, 0.0], "T0": two_pi,
             "roundtrip": {"v0": [1e-3], "w0": []},
             "expect": {"T": two_pi, "d": 0, "q0": 1, "H1": [[0.0]]}}
    return [planar, twisted, rigid, shear]


def main(outdir="fixtures"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    docs = linear_fixtures() + orbit_fixtures()
    for i, doc in enumerate(docs, start=1):
        path = out / f"{i:02d}_{doc['name']}.json"
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(docs)} fixtures to {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])
