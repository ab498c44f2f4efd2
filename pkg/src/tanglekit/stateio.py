"""JSON state files: ``{"kind": "pure"|"mixed", "dims": [...], "data": ...}``.

Complex numbers are ``[re, im]`` pairs; mixed data is a row-major list of
rows.  Norm or trace may be off by up to 1e-6 and is then renormalized.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .core import DensityMatrix, DimensionError, PureState, StateError

IO_TOL = 1e-6


class StateFormatError(StateError):
    """The document is not a well-formed state file."""


def _complex_array(data, what: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateFormatError(f"{what}: entries must be [re, im] number pairs") from exc
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise StateFormatError(f"{what}: entries must be [re, im] number pairs")
    if not np.isfinite(arr).all():
        raise StateFormatError(f"{what}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_state(doc: dict):
    """Turn a decoded JSON document into a PureState or DensityMatrix."""
    if not isinstance(doc, dict):
        raise StateFormatError("state document must be a JSON object")
    missing = {"kind", "dims", "data"} - doc.keys()
    if missing:
        raise StateFormatError(f"missing keys: {sorted(missing)}")
    kind, dims = doc["kind"], doc["dims"]
    if not isinstance(dims, list) or not all(isinstance(d, int) and d >= 1 for d in dims) or not dims:
        raise StateFormatError("dims must be a non-empty list of positive integers")
    n = math.prod(dims)
    if kind == "pure":
        v = _complex_array(doc["data"], "data")
        if v.ndim != 1:
            raise StateFormatError("pure data must be a flat list of pairs")
        if v.size != n:
            raise DimensionError(f"{v.size} amplitudes do not fit dims {dims}")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > IO_TOL:
            raise StateFormatError(f"norm {norm} outside tolerance")
        return PureState(v / norm, dims)
    if kind == "mixed":
        m = _complex_array(doc["data"], "data")
        if m.ndim != 2:
            raise StateFormatError("mixed data must be a list of rows of pairs")
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} does not fit dims {dims}")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > IO_TOL:
            raise StateFormatError(f"trace {tr} outside tolerance")
        return DensityMatrix.from_external(m, dims)
    raise StateFormatError(f"unknown kind {kind!r}")


def loads_state(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"invalid JSON: {exc}") from exc
    return parse_state(doc)


def load_state(path):
    return loads_state(Path(path).read_text())


def _pairs(a: np.ndarray) -> list:
    return np.stack([a.real, a.imag], axis=-1).tolist()


def state_to_doc(state) -> dict:
    if isinstance(state, PureState):
        return {"kind": "pure", "dims": list(state.dims), "data": _pairs(state.amplitudes)}
    if isinstance(state, DensityMatrix):
        return {"kind": "mixed", "dims": list(state.dims), "data": _pairs(state.matrix)}
    raise TypeError(f"cannot serialize {type(state).__name__}")


def dump_state(state, path) -> None:
    Path(path).write_text(json.dumps(state_to_doc(state)))
