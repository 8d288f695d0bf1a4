"""``floqnf`` command line: analyze, normal-form, orbit-frame, verify.

Exit codes: 0 ok, 1 verification failed, 2 input/usage error,
3 numerical failure, 4 no convergence. ``FLOQ_TOL`` overrides the default
integration tolerance; ``--tol`` overrides both.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .errors import FloquetError, InputError, NoConvergence
from .floquet import (consistency_check, nonnegative_multiplier_check,
                      form_from_solution, modulus_check, residual_check, verify_antiperiodicity)
from .integrator import DEFAULT_TOL, fundamental_solution, monodromy
from .io import SCHEMA_VERSION, dumps, load_field, load_system, validate_report, write_csv
from .linsys import Manufactured, manufactured_residual, validate_period
from .orbitframes import build_frame, refine_orbit, roundtrip_check, verify_properties
from .spectral import a_index, accuracy_tol_cluster, jordan_inventory

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERICS, EXIT_NOCONV = 0, 1, 2, 3, 4


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _base(command, tol):
    return {"schema_version": SCHEMA_VERSION, "command": command,
            "tool": {"name": "floqnf", "version": tool_version()}, "ok": True, "tol": tol}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def resolve_tol(flag):
    if flag is not None:
        tol = flag
    else:
        env = os.environ.get("FLOQ_TOL")
        try:
            tol = float(env) if env else DEFAULT_TOL
        except ValueError:
            raise InputError(f"FLOQ_TOL={env!r} is not a number")
    if not 1e-14 <= tol <= 1e-4:
        raise InputError(f"tolerance {tol:g} outside [1e-14, 1e-4]")
    return tol


def _multipliers(M):
    eigs = [complex(z) for z in np.linalg.eigvals(M)]
    return sorted(eigs, key=lambda z: (-abs(z), z.real, z.imag))


def _outdir(out):
    if not out:
        return None
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"{out}: cannot create output directory ({exc.strerror})")
    return path


def _emit(report, outdir=None):
    validate_report(report)
    text = dumps(report)
    if outdir is not None:
        (outdir / "report.json").write_text(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(args):
    tol = resolve_tol(args.tol)
    t0 = time.perf_counter()
    system, doc, digest = load_system(args.system_file)
    period = validate_period(system.body.q if isinstance(system.body, Manufactured) else system,
                             args.probes)
    t1 = time.perf_counter()
    sol = fundamental_solution(system, tol)
    M = monodromy(sol)
    t2 = time.perf_counter()
    inv = jordan_inventory(M, accuracy_tol_cluster(M, tol))
    d = a_index(inv)
    t3 = time.perf_counter()
    mults = _multipliers(M)
    report = _base("analyze", tol)
    report.update({
        "input": {"sha256": digest, "n": system.n, "T": system.period, "kind": doc["kind"]},
        "monodromy": M, "multipliers": mults, "inventory": inv.to_dict(), "a_index": d,
        "existence": {"exists": d == 0, "nonnegative_real_multipliers": nonnegative_multiplier_check(mults)},
        "residuals": {
            "period_max_deviation": period.max_deviation, "period_ok": period.passed,
            "liouville_rel_error": sol.stats.get("liouville_rel_error", 0.0),
            "steps": sol.stats["steps"], "rejected_steps": sol.stats["rejected_steps"],
        },
        "timings": {"parse": t1 - t0, "integrate": t2 - t1, "spectral": t3 - t2},
    })
    if isinstance(system.body, Manufactured):
        report["residuals"]["manufactured_residual"] = manufactured_residual(system)
    if args.table:
        _table(report)
    _emit(report)
    return EXIT_OK


def _table(report):
    lines = [f"n={report['input']['n']}  T={report['input']['T']:.17g}  A-index={report['a_index']}"
             f"  real T-periodic form exists: {report['existence']['exists']}"]
    for z in report["multipliers"]:
        z = complex(z)
        lines.append(f"  multiplier {z.real:+.10e} {z.imag:+.10e}i   |.|={abs(z):.10e}")
    sys.stderr.write("\n".join(lines) + "\n")


def cmd_normal_form(args):
    tol = resolve_tol(args.tol)
    t0 = time.perf_counter()
    system, doc, digest = load_system(args.system_file)
    sol = fundamental_solution(system, tol)
    form = form_from_solution(sol, tol)
    t1 = time.perf_counter()
    checks = [verify_antiperiodicity(form), residual_check(form, system),
              consistency_check(form), modulus_check(form)]
    report = _base("normal-form", tol)
    report.update({
        "input": {"sha256": digest, "n": system.n, "T": system.period, "kind": doc["kind"]},
        "d": form.d, "a_index": form.d, "R": form.R, "S": form.S, "monodromy": form.monodromy,
        "multipliers": _multipliers(form.monodromy), "inventory": form.inventory.to_dict(),
        "residuals": {c.name: c.deviation for c in checks},
        "verification": [c.to_dict() for c in checks],
        "diagnostics": list(form.diagnostics),
        "timings": {"form": t1 - t0, "verify": time.perf_counter() - t1},
    })
    report["ok"] = all(c.passed for c in checks)
    outdir = _outdir(args.out)
    if outdir is not None:
        grid = np.linspace(0.0, system.period, args.grid + 1)
        n = system.n
        header = ["t"] + [f"Q{i}{j}" for i in range(n) for j in range(n)]
        write_csv(outdir / "q_samples.csv", header, (np.r_[t, form.Q(t).ravel()] for t in grid))
        report["outputs"] = {"report": str(outdir / "report.json"),
                             "csv": str(outdir / "q_samples.csv")}
    _emit(report, outdir)
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def _vector(text, what):
    try:
        vals = [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"{what}: expected comma separated numbers, got {text!r}")
    if not vals or not all(np.isfinite(vals)):
        raise UsageError(f"{what}: expected finite numbers")
    return np.array(vals)


def cmd_orbit_frame(args):
    tol = resolve_tol(args.tol)
    t0 = time.perf_counter()
    f, g, doc, digest = load_field(args.field_file)
    z0 = _vector(args.z0, "--z0")
    if z0.size != f.n:
        raise UsageError(f"--z0 needs {f.n} entries")
    if not args.T0 > 0:
        raise UsageError("--T0 must be positive")
    if args.with_perturbation and g is None:
        raise InputError(f"{args.field_file}: $.perturbation: required by --with-perturbation")
    g = g if args.with_perturbation else None
    orbit = refine_orbit(f, z0, args.T0)
    t1 = time.perf_counter()
    frame = build_frame(f, orbit, tol)
    t2 = time.perf_counter()
    props = verify_properties(frame, f, g)
    m = f.n - frame.d - 1
    v0 = np.full(m, args.v0)
    w0 = np.full(frame.d, args.v0)
    rt = roundtrip_check(frame, f, g, (0.0, v0, w0))
    t3 = time.perf_counter()
    report = _base("orbit-frame", tol)
    pd = props.to_dict()
    report.update({
        "input": {"sha256": digest, "n": f.n, "kind": doc.get("builtin", "polynomial")},
        "orbit": {"z0": orbit.z0, "T": orbit.period, "closure": orbit.closure,
                  "newton_iterations": orbit.iterations},
        "frame": frame.to_dict(), "d": frame.d,
        "properties": pd["properties"], "identities": pd["identities"],
        "residuals": {"C_estimate": props.C_estimate, "roundtrip_deviation": rt.deviation,
                      "roundtrip_ok": rt.passed, "identities_ok": props.identities_passed},
        "timings": {"refine": t1 - t0, "frame": t2 - t1, "verify": t3 - t2},
    })
    report["ok"] = props.passed
    outdir = _outdir(args.out)
    if outdir is not None:
        header = ["t", "s"] + [f"v{i}" for i in range(m)] + [f"w{i}" for i in range(frame.d)] \
            + [f"z{i}" for i in range(f.n)]
        write_csv(outdir / "trajectory.csv", header, rt.rows())
        report["outputs"] = {"report": str(outdir / "report.json"),
                             "csv": str(outdir / "trajectory.csv")}
    _emit(report, outdir)
    return EXIT_OK if props.passed else EXIT_VERIFY


def cmd_verify(args):
    from .suite import matrix_level_checks, run_fixture

    tol = resolve_tol(args.tol)
    root = Path(args.fixture_dir)
    if not root.is_dir():
        raise InputError(f"{root}: not a directory")
    files = sorted(root.glob("*.json"))
    if not files:
        raise InputError(f"{root}: no fixture files")
    t0 = time.perf_counter()
    results = [run_fixture(p, tol) for p in files]
    if not args.fixtures_only:
        results += matrix_level_checks(tol)
    report = _base("verify", tol)
    report["fixtures"] = [r.to_dict() for r in results]
    report["ok"] = all(r.passed for r in results)
    report["timings"] = {"total": time.perf_counter() - t0}
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failed = [c["name"] for c in r.to_dict()["checks"] if not c["passed"]]
        sys.stderr.write(f"{status}  {r.name}" + (f"  failed: {', '.join(failed)}" if failed else "") + "\n")
    _emit(report, _outdir(args.out))
    return EXIT_OK if report["ok"] else EXIT_VERIFY


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="floqnf", description="Real Floquet normal forms and orbit frames.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="monodromy, Jordan inventory, A-index, existence verdict")
    a.add_argument("system_file")
    a.add_argument("--tol", type=float)
    a.add_argument("--probes", type=int, default=64)
    a.add_argument("--table", action="store_true", help="human-readable summary on stderr")
    a.set_defaults(func=cmd_analyze)

    nf = sub.add_parser("normal-form", help="real normal form R, S, d and Q samples")
    nf.add_argument("system_file")
    nf.add_argument("--tol", type=float)
    nf.add_argument("--grid", type=int, default=128)
    nf.add_argument("--out", help="directory for report.json and q_samples.csv (grid+1 rows)")
    nf.set_defaults(func=cmd_normal_form)

    of = sub.add_parser("orbit-frame", help="refine an orbit and build its moving frame")
    of.add_argument("field_file")
    of.add_argument("--z0", required=True, help="initial guess, comma separated")
    of.add_argument("--T0", type=float, required=True, help="period guess")
    of.add_argument("--tol", type=float)
    of.add_argument("--with-perturbation", action="store_true")
    of.add_argument("--v0", type=float, default=1e-2, help="roundtrip offset for each of v, w")
    of.add_argument("--out", help="directory for report.json and trajectory.csv")
    of.set_defaults(func=cmd_orbit_frame)

    v = sub.add_parser("verify", help="run the fixture suite")
    v.add_argument("fixture_dir")
    v.add_argument("--tol", type=float)
    v.add_argument("--fixtures-only", action="store_true", help="skip the matrix-level checks")
    v.add_argument("--out", help="directory for report.json")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "grid", 1) < 1:
            raise UsageError("--grid must be positive")
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"floqnf: usage error: {exc}\n")
        return EXIT_INPUT
    except InputError as exc:
        sys.stderr.write(f"floqnf: input error: {exc}\n")
        return EXIT_INPUT
    except NoConvergence as exc:
        sys.stderr.write(f"floqnf: NoConvergence: {exc}\n")
        return EXIT_NOCONV
    except FloquetError as exc:
        sys.stderr.write(f"floqnf: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
