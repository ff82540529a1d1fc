"""JSON formats for unitary matrices and circuits.

Complex numbers are ``[re, im]`` pairs and matrices are row-major lists of
rows. Level indices are written 1-based, as used throughout the package.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from hdsynth.circuit import (
    GATE_KINDS,
    Circuit,
    Cinc,
    CincDagger,
    ControlledDiag,
    ControlledU,
    Dims,
    LocalA,
    LocalB,
    Multiplexor,
    UcrX,
    UcrZ,
)

CONVENTION = "first-listed-applied-first"


class FormatError(ValueError):
    """Malformed matrix or circuit file."""


class DimensionError(ValueError):
    """Declared dimensions disagree with the data."""


def encode_matrix(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, dtype=complex)]


def decode_matrix(rows, what: str = "matrix") -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: expected rows of [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise FormatError(f"{what}: expected a square array of [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{what}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


def _reals(values, what: str) -> list[float]:
    try:
        out = [float(v) for v in values]
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: expected a list of reals") from exc
    if not all(math.isfinite(v) for v in out):
        raise FormatError(f"{what}: non-finite entry")
    return out


def _dims(doc: dict) -> Dims:
    try:
        n, m = doc["n"], doc["m"]
    except (KeyError, TypeError) as exc:
        raise FormatError("missing 'n' or 'm'") from exc
    if not isinstance(n, int) or not isinstance(m, int) or isinstance(n, bool) or isinstance(m, bool):
        raise FormatError("'n' and 'm' must be integers")
    try:
        return Dims(n, m)
    except ValueError as exc:
        raise DimensionError(str(exc)) from exc


def _load_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    return doc


# ---------------------------------------------------------------------------
# matrix files


def matrix_to_dict(a: np.ndarray, dims: Dims) -> dict:
    return {"n": dims.n, "m": dims.m, "matrix": encode_matrix(a)}


def matrix_from_dict(doc: dict) -> tuple[np.ndarray, Dims]:
    dims = _dims(doc)
    if "matrix" not in doc:
        raise FormatError("missing 'matrix'")
    a = decode_matrix(doc["matrix"])
    if a.shape[0] != dims.total:
        raise DimensionError(f"matrix is {a.shape[0]}x{a.shape[0]} but n*m = {dims.total}")
    return a, dims


def write_matrix(path, a: np.ndarray, dims: Dims) -> None:
    Path(path).write_text(json.dumps(matrix_to_dict(a, dims)) + "\n")


def read_matrix(path) -> tuple[np.ndarray, Dims]:
    return matrix_from_dict(_load_json(path))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# circuits


def gate_to_dict(g) -> dict:
    out: dict = {"kind": g.kind}
    if isinstance(g, (LocalA, LocalB)):
        out["matrix"] = encode_matrix(g.u)
    elif isinstance(g, (Cinc, CincDagger)):
        out["control_level"] = g.control_level
    elif isinstance(g, ControlledU):
        out["control_level"] = g.control_level
        out["matrix"] = encode_matrix(g.u)
    elif isinstance(g, ControlledDiag):
        out["control_level"] = g.control_level
        out["thetas"] = [float(t) for t in g.thetas]
    elif isinstance(g, Multiplexor):
        out["branches"] = [encode_matrix(b) for b in g.branches]
    elif isinstance(g, (UcrZ, UcrX)):
        out["i"], out["j"] = g.i, g.j
        out["thetas"] = [float(t) for t in g.angles]
    return out


def _int_field(doc: dict, key: str) -> int:
    v = doc.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise FormatError(f"gate {doc.get('kind')!r}: field {key!r} must be an integer")
    return v


def gate_from_dict(doc: dict):
    if not isinstance(doc, dict) or doc.get("kind") not in GATE_KINDS:
        raise FormatError(f"unknown gate {doc!r:.80}")
    kind = doc["kind"]
    try:
        if kind in ("local_a", "local_b"):
            cls = LocalA if kind == "local_a" else LocalB
            return cls(decode_matrix(doc["matrix"], kind))
        if kind == "cinc":
            return Cinc(_int_field(doc, "control_level"))
        if kind == "cinc_dagger":
            return CincDagger(_int_field(doc, "control_level"))
        if kind == "controlled_u":
            return ControlledU(_int_field(doc, "control_level"), decode_matrix(doc["matrix"], kind))
        if kind == "controlled_diag":
            return ControlledDiag(_int_field(doc, "control_level"), _reals(doc["thetas"], kind))
        if kind == "multiplexor":
            return Multiplexor([decode_matrix(b, kind) for b in doc["branches"]])
        cls = UcrZ if kind == "ucr_z" else UcrX
        return cls(_int_field(doc, "i"), _int_field(doc, "j"), _reals(doc["thetas"], kind))
    except KeyError as exc:
        raise FormatError(f"gate {kind!r}: missing field {exc}") from exc
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"gate {kind!r}: {exc}") from exc


def circuit_to_dict(c: Circuit) -> dict:
    return {
        "n": c.dims.n,
        "m": c.dims.m,
        "convention": CONVENTION,
        "level": c.level,
        "gates": [gate_to_dict(g) for g in c.gates],
    }


def circuit_from_dict(doc: dict) -> Circuit:
    dims = _dims(doc)
    if doc.get("convention", CONVENTION) != CONVENTION:
        raise FormatError(f"unsupported gate-order convention {doc['convention']!r}")
    gates = doc.get("gates")
    if not isinstance(gates, list):
        raise FormatError("'gates' must be a list")
    try:
        return Circuit(dims, [gate_from_dict(g) for g in gates], doc.get("level", "L2"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from exc


def write_circuit(path, c: Circuit) -> None:
    Path(path).write_text(json.dumps(circuit_to_dict(c)) + "\n")


def read_circuit(path) -> Circuit:
    return circuit_from_dict(_load_json(path))
