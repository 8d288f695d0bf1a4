"""JSON input parsing and report serialization.

Inputs are validated against the bundled schemas; every rejection names the
offending JSON path (``$.A0[1][0]`` style). Floats are written with Python's
shortest round-trip repr, so a report reloads bit-identically.
"""
from __future__ import annotations

import hashlib
import json
import math
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import InputError
from .fields import BUILTINS, AutonomousField, polynomial_field
from .linsys import (PeriodicLinearSystem, PiecewiseConstant, QSpec, TrigMatrixPolynomial,
                     manufacture)

SCHEMA_VERSION = "1"


def load_schema(name: str) -> dict:
    text = resources.files("floqnf").joinpath("schemas", f"{name}-v{SCHEMA_VERSION}.json").read_text()
    return json.loads(text)


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _find_nonfinite(obj, parts=()):
    if isinstance(obj, float) and not math.isfinite(obj):
        return parts
    if isinstance(obj, dict):
        items = obj.items()
    elif isinstance(obj, list):
        items = enumerate(obj)
    else:
        return None
    for k, v in items:
        hit = _find_nonfinite(v, parts + (k,))
        if hit is not None:
            return hit
    return None


def read_json(path) -> tuple[dict, str]:
    """Parse a JSON file; return (document, sha256 of the raw bytes)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    bad = _find_nonfinite(doc)
    if bad is not None:
        raise InputError(f"{path}: non-finite number at {_path(bad)}")
    return doc, hashlib.sha256(raw).hexdigest()


def validate(doc, schema_name: str, origin: str = "input"):
    schema = load_schema(schema_name)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise InputError(f"{origin}: {_path(e.absolute_path)}: {e.message}")


def _matrix(doc, key, n, prefix=()):
    arr = doc[key]
    where = _path(prefix + (key,))
    if len(arr) != n or any(len(row) != n for row in arr):
        raise InputError(f"{where}: expected a {n}x{n} matrix")
    return np.array(arr, dtype=float)


def _stack(doc, key, n, prefix=()):
    mats = doc.get(key, [])
    for i, m in enumerate(mats):
        if len(m) != n or any(len(row) != n for row in m):
            raise InputError(f"{_path(prefix + (key, i))}: expected a {n}x{n} matrix")
    return np.array(mats, dtype=float).reshape(len(mats), n, n)


def system_from_dict(doc: dict, origin: str = "input") -> PeriodicLinearSystem:
    validate(doc, "system", origin)
    n, T, kind = doc["n"], float(doc["T"]), doc["kind"]
    try:
        if kind == "trig":
            body = TrigMatrixPolynomial(T, _matrix(doc, "A0", n), _stack(doc, "cos", n),
                                        _stack(doc, "sin", n))
            return PeriodicLinearSystem(n, T, body)
        if kind == "piecewise":
            bp = np.array(doc["breakpoints"], dtype=float)
            mats = _stack(doc, "matrices", n)
            if not math.isclose(bp[-1], T, rel_tol=1e-14, abs_tol=0.0):
                raise InputError("$.breakpoints: last breakpoint must equal T")
            return PeriodicLinearSystem(n, T, PiecewiseConstant(bp, mats))
        q = doc["qspec"]
        pre = ("qspec",)
        hf = q.get("half_frequency_terms", {})
        curve = TrigMatrixPolynomial(T, _matrix(q, "const", n, pre),
                                     _stack(hf, "cos", n, pre + ("half_frequency_terms",)),
                                     _stack(hf, "sin", n, pre + ("half_frequency_terms",)),
                                     half_frequency=True)
        if q["declared_d"] > n:
            raise InputError("$.qspec.declared_d: exceeds n")
        return manufacture(QSpec(curve, q["declared_d"]), _matrix(doc, "rstar", n))
    except InputError as exc:
        raise InputError(f"{origin}: {exc}") from exc


def field_from_dict(doc: dict, origin: str = "input") -> tuple[AutonomousField, object]:
    """Return the field and its perturbation ``g`` (None when absent)."""
    validate(doc, "field", origin)
    n = doc["n"]
    if "builtin" in doc:
        f = BUILTINS[doc["builtin"]]()
        if f.n != n:
            raise InputError(f"{origin}: $.n: builtin {doc['builtin']} has dimension {f.n}")
    else:
        if len(doc["polynomial"]) != n:
            raise InputError(f"{origin}: $.polynomial: expected {n} components")
        try:
            f = polynomial_field(doc["polynomial"], doc.get("name", "polynomial"))
        except InputError as exc:
            raise InputError(f"{origin}: $.polynomial: {exc}") from exc
    g = None
    if "perturbation" in doc:
        p = doc["perturbation"]
        direction = np.array(p["direction"], dtype=float)
        if direction.shape != (n,):
            raise InputError(f"{origin}: $.perturbation.direction: expected {n} entries")
        g = cosine_forcing(float(p["amplitude"]), float(p.get("omega", 1.0)), direction)
    return f, g


def cosine_forcing(amplitude: float, omega: float, direction):
    """``g(t, z) = amplitude cos(omega t) direction``."""
    direction = np.asarray(direction, dtype=float)

    def g(t, z):
        return amplitude * np.cos(omega * t) * direction

    return g


def load_system(path) -> tuple[PeriodicLinearSystem, dict, str]:
    """Read a system file; a fixture file is accepted and its ``system`` block used."""
    doc, digest = read_json(path)
    if isinstance(doc, dict) and doc.get("kind") == "linear" and "system" in doc:
        doc = doc["system"]
    return system_from_dict(doc, str(path)), doc, digest


def load_field(path):
    doc, digest = read_json(path)
    f, g = field_from_dict(doc, str(path))
    return f, g, doc, digest


# ---------------------------------------------------------------------------
# output

def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no inf/nan; keep the report valid
        return x if math.isfinite(x) else None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def validate_report(report: dict):
    jsonschema.validate(to_jsonable(report), load_schema("report"))


def write_csv(path, header, rows):
    """Comma separated, header row, LF line endings, repr floats."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
