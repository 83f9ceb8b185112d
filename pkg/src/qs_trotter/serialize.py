"""JSON encoding of generators and step functions.

Complex entries are ``[re, im]`` pairs; matrices are row-major nested
lists. Python's float repr round-trips doubles exactly, so a dumped
generator reloads bit-for-bit.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .cocycle_sim import StepFunction
from .ito_algebra import BlockGenerator


class InputError(ValueError):
    """Malformed or inconsistent user input."""


def _enc_complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def encode_matrix(A: np.ndarray) -> list:
    return [[_enc_complex(z) for z in row] for row in np.asarray(A)]


def _dec_complex(x, where: str) -> complex:
    if isinstance(x, bool):
        raise InputError(f"{where}: expected a number or [re, im], got {x!r}")
    if isinstance(x, (int, float)):
        z = complex(float(x), 0.0)
    elif isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        z = complex(float(x[0]), float(x[1]))
    else:
        raise InputError(f"{where}: expected a number or [re, im], got {x!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InputError(f"{where}: non-finite entry")
    return z


def decode_matrix(data, rows: int, cols: int, name: str) -> np.ndarray:
    """Decode a ``rows x cols`` matrix; an empty block may be given as ``[]``."""
    if rows * cols == 0:
        if data in ([], None) or (isinstance(data, list) and all(r == [] for r in data) and len(data) in (0, rows)):
            return np.zeros((rows, cols), dtype=complex)
    if not isinstance(data, list) or len(data) != rows:
        raise InputError(f"block {name}: expected {rows} rows")
    out = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise InputError(f"block {name}: row {i} should have {cols} entries")
        for j, x in enumerate(row):
            out[i, j] = _dec_complex(x, f"block {name}[{i}][{j}]")
    return out


def generator_to_dict(F: BlockGenerator) -> dict:
    return {
        "d_h": F.d_h,
        "d_k": F.d_k,
        "K": encode_matrix(F.K),
        "M": encode_matrix(F.M),
        "L": encode_matrix(F.L),
        "C": encode_matrix(F.C),
    }


def generator_from_dict(d) -> BlockGenerator:
    if not isinstance(d, dict):
        raise InputError("generator JSON must be an object")
    try:
        d_h, d_k = d["d_h"], d["d_k"]
    except KeyError as e:
        raise InputError(f"missing field {e.args[0]!r}") from None
    if any(isinstance(x, bool) or not isinstance(x, int) for x in (d_h, d_k)) or d_h < 1 or d_k < 0:
        raise InputError("d_h must be a positive integer and d_k a nonnegative integer")
    n = d_h * d_k
    shapes = {"K": (d_h, d_h), "M": (d_h, n), "L": (n, d_h), "C": (n, n)}
    blocks = {}
    for name, (r, c) in shapes.items():
        if name not in d:
            raise InputError(f"missing field {name!r}")
        blocks[name] = decode_matrix(d[name], r, c, name)
    return BlockGenerator(blocks["K"], blocks["M"], blocks["L"], blocks["C"], d_h, d_k)


def parse_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{source}:{e.lineno}:{e.colno}: malformed JSON ({e.msg})") from None


def dumps_generator(F: BlockGenerator) -> str:
    return json.dumps(generator_to_dict(F))


def loads_generator(text: str, source: str = "<input>") -> BlockGenerator:
    try:
        return generator_from_dict(parse_json(text, source))
    except InputError as e:
        if str(e).startswith(source):
            raise
        raise InputError(f"{source}: {e}") from None


def load_generator(path: str) -> BlockGenerator:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"{path}: cannot read ({e.strerror})") from None
    return loads_generator(text, path)


def step_function_from_dict(d, d_k: int) -> StepFunction:
    """``{"breaks": [...], "values": [[...], ...]}``; entries are numbers or ``[re, im]``."""
    if not isinstance(d, dict) or "values" not in d:
        raise InputError('step function must be an object with "values" (and optional "breaks")')
    breaks = d.get("breaks", [])
    if not isinstance(breaks, list) or not all(isinstance(b, (int, float)) and not isinstance(b, bool) for b in breaks):
        raise InputError("breaks must be a list of numbers")
    vals = d["values"]
    if not isinstance(vals, list) or len(vals) != len(breaks) + 1:
        raise InputError(f"need {len(breaks) + 1} values for {len(breaks)} breaks")
    out = np.empty((len(vals), d_k), dtype=complex)
    for i, v in enumerate(vals):
        if not isinstance(v, list) or len(v) != d_k:
            raise InputError(f"value {i} must be a vector of length {d_k}")
        for j, x in enumerate(v):
            out[i, j] = _dec_complex(x, f"value {i}[{j}]")
    try:
        return StepFunction(breaks, out)
    except ValueError as e:
        raise InputError(str(e)) from None


def step_function_to_dict(f: StepFunction) -> dict:
    return {"breaks": [float(b) for b in f.breaks], "values": [[_enc_complex(z) for z in v] for v in f.values]}


__all__ = [
    "InputError",
    "encode_matrix",
    "decode_matrix",
    "generator_to_dict",
    "generator_from_dict",
    "parse_json",
    "dumps_generator",
    "loads_generator",
    "load_generator",
    "step_function_from_dict",
    "step_function_to_dict",
]
