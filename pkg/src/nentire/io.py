"""JSON reading and writing with round-trip float formatting."""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import InvalidParameterError
from .spectra import BRANCHES, SpectralSequence, Tail


def _fmt(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # JSON has no literal for these; keep them readable by json.loads
        return "NaN" if math.isnan(x) else ("Infinity" if x > 0 else "-Infinity")
    return format(x, ".17g")


def _to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_to_plain(v) for v in list(obj)]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps17(obj, indent: int | None = 2) -> str:
    """json.dumps with every float printed to 17 significant digits."""
    return _dump(_to_plain(obj), indent, 0)


def _dump(obj, indent, level) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            # numeric arrays stay on one line
            return "[" + ", ".join(_dump(v, indent, level + 1) for v in obj) + "]"
        return "[" + sep.join(pad + _dump(v, indent, level + 1) for v in obj) + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (pad + json.dumps(k) + ": " + _dump(v, indent, level + 1) for k, v in obj.items())
        return "{" + sep.join(items) + end + "}"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def spectral_to_dict(seq: SpectralSequence) -> dict:
    tail = None
    if seq.tail is not None:
        tail = {"exponent": float(seq.tail.exponent), "coefficient": float(seq.tail.coefficient),
                "branches": list(seq.tail.branches)}
    return {"positive": [float(v) for v in seq.positive],
            "negative": [float(v) for v in seq.negative],
            "has_zero": seq.has_zero, "tail": tail}


def spectral_from_dict(d: dict) -> SpectralSequence:
    try:
        tail = None
        if d.get("tail") is not None:
            t = d["tail"]
            tail = Tail(float(t["exponent"]), float(t["coefficient"]),
                        tuple(t.get("branches", BRANCHES)))
        return SpectralSequence(np.asarray(d["positive"], dtype=float),
                                np.asarray(d["negative"], dtype=float),
                                bool(d.get("has_zero", False)), tail)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParameterError):
            raise
        raise InvalidParameterError(f"malformed spectral file: {exc}") from exc


def write_spectral(seq: SpectralSequence, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps17(spectral_to_dict(seq)) + "\n")


def read_spectral(path) -> SpectralSequence:
    return spectral_from_dict(read_json(path))


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"{path}: invalid JSON ({exc})") from exc
