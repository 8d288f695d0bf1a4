"""Fixture-driven verification runs (the engine behind ``floqnf verify``).

A fixture is a JSON file holding either a linear system (``"kind": "linear"``)
or an autonomous field with an orbit guess (``"kind": "orbit"``), plus an
``expect`` block of oracle values. Each fixture yields a list of named checks.
A handful of matrix-level checks that need no input file run as well.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import FloquetError, NoRealLogarithm
from .floquet import (Verification, consistency_check,
                      form_from_solution, modulus_check, residual_check,
                      verify_antiperiodicity)
from .integrator import DEFAULT_TOL, fundamental_solution, monodromy
from .io import field_from_dict, read_json, system_from_dict
from .linsys import (Manufactured, manufacture, manufactured_residual, manufactured_solution,
                     random_manufactured, rotation_qspec)
from .orbitframes import build_frame, refine_orbit, roundtrip_check, verify_properties
from .realog import jordan_block_log, matrix_exp, real_log
from .spectral import a_index, accuracy_tol_cluster, jordan_inventory, q0_index

DEFAULT_EXPECT_TOL = {
    "monodromy": 1e-8, "multipliers": 1e-7, "spectrum_R": 1e-7,
    "T": 1e-6, "H1": 1e-4, "re_eig_H2": 1e-5, "L": 1e-8,
}


@dataclass
class FixtureResult:
    name: str
    checks: list = field(default_factory=list)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    def to_dict(self):
        checks = [c.to_dict() for c in self.checks]
        if self.error is not None:
            checks.append({"name": "pipeline", "passed": False, "deviation": None,
                           "tolerance": None, "error": self.error})
        return {"name": self.name, "passed": self.passed, "checks": checks}


def _flag(name, ok: bool, **detail) -> Verification:
    return Verification(name, 0.0 if ok else 1.0, 0.5, detail=detail)


def multiset_distance(a, b, relative: bool = True) -> float:
    """Largest gap after optimally pairing two equal-length complex lists."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return float("inf")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    if relative:
        cost = cost / np.maximum(1.0, np.abs(b))[None, :]
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def _complex_list(v):
    return np.array([complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x) for x in v])


# ---------------------------------------------------------------------------
# linear fixtures

def run_linear(doc: dict, tol: float = DEFAULT_TOL, name: str = "linear") -> FixtureResult:
    res = FixtureResult(name)
    exp = doc.get("expect", {})
    tols = {**DEFAULT_EXPECT_TOL, **doc.get("tolerances", {})}
    sys = system_from_dict(doc["system"], name)
    sol = fundamental_solution(sys, tol)
    form = form_from_solution(sol, tol)
    M = form.monodromy
    c = res.checks
    c.append(residual_check(form, sys))
    c.append(consistency_check(form))
    c.append(verify_antiperiodicity(form))
    c.append(modulus_check(form))
    c.append(_flag("d_equals_a_index", form.d == a_index(form.inventory)))
    if "liouville_rel_error" in sol.stats:
        c.append(Verification("liouville", sol.stats["liouville_rel_error"], 1e-6))
    if isinstance(sys.body, Manufactured):
        c.append(Verification("manufactured_residual", manufactured_residual(sys), 1e-9))
        oracle = manufactured_solution(sys, sys.period)
        c.append(Verification("monodromy_vs_closed_form",
                              float(np.max(np.abs(M - oracle))), tols["monodromy"]))
    # existence equivalence, both directions
    if form.d == 0:
        witness = verify_antiperiodicity(form)
        c.append(Verification("existence_witness_periodic", witness.deviation, 1e-6))
    else:
        try:
            real_log(M, jordan_inventory(M, accuracy_tol_cluster(M, tol)))
            c.append(_flag("no_real_log_for_positive_index", False))
        except NoRealLogarithm:
            c.append(_flag("no_real_log_for_positive_index", True))
    if "a_index" in exp:
        c.append(Verification("a_index", abs(form.d - exp["a_index"]), 0.0,
                              detail={"got": form.d, "expected": exp["a_index"]}))
    if "exists" in exp:
        c.append(_flag("exists", (form.d == 0) == bool(exp["exists"])))
    if "monodromy" in exp:
        c.append(Verification("monodromy", float(np.max(np.abs(M - np.array(exp["monodromy"])))),
                              tols["monodromy"]))
    if "multipliers" in exp:
        c.append(Verification("multipliers", multiset_distance(np.linalg.eigvals(M),
                                                               _complex_list(exp["multipliers"])),
                              tols["multipliers"]))
    if "spectrum_R" in exp:
        c.append(Verification("spectrum_R", multiset_distance(np.linalg.eigvals(form.R),
                                                              _complex_list(exp["spectrum_R"]),
                                                              relative=False),
                              tols["spectrum_R"]))
    return res


# ---------------------------------------------------------------------------
# orbit fixtures

def run_orbit(doc: dict, tol: float = DEFAULT_TOL, name: str = "orbit") -> FixtureResult:
    res = FixtureResult(name)
    exp = doc.get("expect", {})
    tols = {**DEFAULT_EXPECT_TOL, **doc.get("tolerances", {})}
    f, g = field_from_dict(doc["field"], name)
    if not doc.get("with_perturbation", g is not None):
        g = None
    orbit = refine_orbit(f, doc["z0"], doc["T0"])
    frame = build_frame(f, orbit, tol)
    c = res.checks
    if "T" in exp:
        c.append(Verification("period", abs(orbit.period - exp["T"]), tols["T"]))
    for key, got in (("d", frame.d), ("q0", frame.q0)):
        if key in exp:
            c.append(Verification(key, abs(got - exp[key]), 0.0, detail={"got": got}))
    if "L" in exp:
        c.append(Verification("L", float(np.max(np.abs(frame.L - np.array(exp["L"])), initial=0.0)),
                              tols["L"]))
    if "H1" in exp:
        c.append(Verification("H1", float(np.max(np.abs(frame.H1 - np.array(exp["H1"])), initial=0.0)),
                              tols["H1"]))
    if "re_eig_H2" in exp:
        got = np.linalg.eigvals(frame.H2).real if frame.d else np.zeros(0)
        c.append(Verification("re_eig_H2", multiset_distance(got, exp["re_eig_H2"], relative=False),
                              tols["re_eig_H2"]))
    rep = verify_properties(frame, f, g)
    c.extend(rep.checks.values())
    if doc.get("identities", True):
        c.extend(rep.identities.values())
    if "roundtrip" in doc:
        rt = doc["roundtrip"]
        out = roundtrip_check(frame, f, g, (rt.get("s0", 0.0), rt.get("v0", []), rt.get("w0", [])))
        c.append(Verification("roundtrip", out.deviation, out.tolerance))
    return res


def run_fixture(path, tol: float = DEFAULT_TOL) -> FixtureResult:
    doc, _ = read_json(path)
    name = doc.get("name", Path(path).stem)
    try:
        if doc.get("kind") == "orbit":
            return run_orbit(doc, tol, name)
        return run_linear(doc, tol, name)
    except FloquetError as exc:
        r = FixtureResult(name)
        r.error = f"{type(exc).__name__}: {exc}"
        return r


# ---------------------------------------------------------------------------
# matrix-level checks

SERIES_BLOCKS = ((1, 1), (1, 2), (-1, 1), (-1, 2), (2, 3), (-3, 2))


def jordan_block(lam, m):
    return lam * np.eye(m) + np.eye(m, k=1)


def check_block_logs() -> FixtureResult:
    res = FixtureResult("block_log_series")
    for lam, m in SERIES_BLOCKS:
        L = jordan_block_log(lam, m).log
        err = float(np.max(np.abs(matrix_exp(L) - jordan_block(lam, m))))
        res.checks.append(Verification(f"exp_log_block_{lam}_{m}", err, 1e-9))
    exact = jordan_block_log(1, 2).log
    res.checks.append(_flag("unipotent_2_log_is_N", bool(np.array_equal(exact, np.eye(2, k=1)))))
    return res


def check_q0_ladder(tol: float = DEFAULT_TOL) -> FixtureResult:
    res = FixtureResult("q0_ladder")
    cases = ((np.eye(2), np.array([1.0, 0.0]), 0),
             (jordan_block(1.0, 2), np.array([1.0, 0.0]), 1),
             (jordan_block(1.0, 3), np.array([1.0, 0.0, 0.0]), 2))
    for i, (M, v, q) in enumerate(cases):
        got = q0_index(M, v)
        res.checks.append(Verification(f"q0_case_{i}", abs(got - q), 0.0, detail={"got": got}))
    from .fields import BUILTIN_GUESSES, rigid_rotation
    f = rigid_rotation()
    z0, T0 = BUILTIN_GUESSES["rigid_rotation"]
    frame = build_frame(f, refine_orbit(f, z0, T0), tol)
    res.checks.append(Verification("rigid_q0", frame.q0, 0.0))
    res.checks.append(Verification("rigid_L", float(np.max(np.abs(frame.L), initial=0.0)), 1e-8))
    return res


def check_evenness(count: int = 20, seed: int = 2024, tol: float = DEFAULT_TOL) -> FixtureResult:
    """A genuine monodromy has det > 0, so its A-index is even."""
    res = FixtureResult("index_evenness")
    rng = np.random.default_rng(seed)
    odd = 0
    for i in range(count):
        n = int(rng.integers(2, 5))
        d = int(rng.choice([0, 2]))
        sys = random_manufactured(rng, n, d)
        M = monodromy(fundamental_solution(sys, tol))
        if a_index(jordan_inventory(M, accuracy_tol_cluster(M, tol))) % 2:
            odd += 1
    res.checks.append(Verification("odd_index_count", odd, 0, detail={"systems": count}))
    return res


def reference_manufactured():
    W = np.pi * np.array([[0.0, -1.0], [1.0, 0.0]])
    return manufacture(rotation_qspec(2, 1.0), np.diag([0.0, np.log(2.0)])), W


def check_convergence_order() -> FixtureResult:
    res = FixtureResult("convergence_order")
    sys, _ = reference_manufactured()
    oracle = manufactured_solution(sys, 1.0)
    errs = [float(np.max(np.abs(monodromy(fundamental_solution(sys, t)) - oracle))) for t in (1e-8, 1e-10)]
    ratio = errs[0] / max(errs[1], 1e-300)
    res.checks.append(Verification("error_reduction", 4.0 / ratio, 1.0,
                                   detail={"err_1e-8": errs[0], "err_1e-10": errs[1], "ratio": ratio}))
    return res


def matrix_level_checks(tol: float = DEFAULT_TOL):
    return [check_block_logs(), check_q0_ladder(tol), check_evenness(tol=tol), check_convergence_order()]

