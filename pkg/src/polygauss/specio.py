"""Kernel spec files: parsing, serialization, checksums.

A kernel spec is a single JSON document:

    {
      "n": 2,
      "a": [...],            # n*n reals, row-major
      "b": [...],
      "c": [...],
      "poly": [{"exponents": [2n ints], "coeff": [re, im]}, ...],
      "norm": 1.0,           # optional positive scale
      "partition": {"part1": [1]}   # optional, 1-based coordinate indices
    }

Coordinate indices are 1-based in files (matching the usual notation for
index subsets) and 0-based throughout the Python API.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .entangle import Bipartition
from .gaussian import GaussianTriple
from .kernels import PolyGaussianKernel
from .poly import MultiPoly

__all__ = ["ParsedSpec", "SpecError", "parse_kernel_spec", "serialize_kernel_spec", "jsonable"]


class SpecError(ValueError):
    """Malformed kernel spec; the message names the offending field."""


@dataclass(frozen=True)
class ParsedSpec:
    """Validated spec components, pre kernel construction.

    The polynomial is intentionally not yet folded into a
    :class:`PolyGaussianKernel` so that pipelines can report a
    self-adjointness violation instead of failing to parse.
    """

    n: int
    triple: GaussianTriple
    poly: MultiPoly
    norm: float
    partition: Optional[Bipartition]
    checksum: str

    def kernel(self) -> PolyGaussianKernel:
        return PolyGaussianKernel(self.poly, self.triple, self.norm)


def _require(cond: bool, field: str, msg: str) -> None:
    if not cond:
        raise SpecError(f"field '{field}': {msg}")


def _matrix(doc: dict, field: str, n: int) -> np.ndarray:
    _require(field in doc, field, "missing")
    raw = doc[field]
    _require(isinstance(raw, list) and len(raw) == n * n, field, f"expected {n * n} row-major reals")
    try:
        return np.array([float(v) for v in raw]).reshape(n, n)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"field '{field}': non-numeric entry ({exc})") from None


def parse_kernel_spec(source: Union[str, bytes, dict, Path]) -> ParsedSpec:
    """Parse and validate a kernel spec document.

    Accepts a JSON string/bytes, a file path, or an already-decoded dict.
    Raises :class:`SpecError` with a field diagnostic (or a line/column
    diagnostic for JSON syntax errors).
    """
    if isinstance(source, Path):
        source = source.read_text()
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    else:
        doc = source
    _require(isinstance(doc, dict), "<root>", "spec must be a JSON object")
    _require("n" in doc, "n", "missing")
    n = doc["n"]
    _require(isinstance(n, int) and n >= 1, "n", "must be a positive integer")

    a = _matrix(doc, "a", n)
    b = _matrix(doc, "b", n)
    c = _matrix(doc, "c", n)
    try:
        triple = GaussianTriple(a, b, c)
    except ValueError as exc:
        raise SpecError(f"field 'a'/'c': {exc}") from None
    if not triple.kernel_valid:
        raise SpecError("field 'a'/'c': matrices must be positive definite (kernel-valid triple)")

    _require("poly" in doc, "poly", "missing")
    records = doc["poly"]
    _require(isinstance(records, list) and records, "poly", "must be a nonempty list of terms")
    for i, rec in enumerate(records):
        _require(isinstance(rec, dict), f"poly[{i}]", "must be an object")
        _require("exponents" in rec and "coeff" in rec, f"poly[{i}]", "needs 'exponents' and 'coeff'")
        exps = rec["exponents"]
        _require(
            isinstance(exps, list) and len(exps) == 2 * n
            and all(isinstance(e, int) and e >= 0 for e in exps),
            f"poly[{i}].exponents",
            f"expected {2 * n} nonnegative integers",
        )
        coeff = rec["coeff"]
        _require(isinstance(coeff, list) and len(coeff) == 2, f"poly[{i}].coeff", "expected [re, im]")
    poly = MultiPoly.from_records(2 * n, records)
    if poly.is_zero():
        raise SpecError("field 'poly': terms cancel to the zero polynomial")

    norm = doc.get("norm", 1.0)
    _require(isinstance(norm, (int, float)) and float(norm) > 0.0, "norm", "must be a positive number")

    partition = None
    if "partition" in doc and doc["partition"] is not None:
        part = doc["partition"]
        _require(isinstance(part, dict) and "part1" in part, "partition", "expected {'part1': [...]}")
        idx = part["part1"]
        _require(
            isinstance(idx, list) and idx and all(isinstance(i, int) for i in idx),
            "partition.part1",
            "expected a nonempty list of integers",
        )
        _require(all(1 <= i <= n for i in idx), "partition.part1", f"indices must lie in 1..{n}")
        try:
            partition = Bipartition(n, tuple(i - 1 for i in idx))
        except ValueError as exc:
            raise SpecError(f"field 'partition.part1': {exc}") from None

    checksum = spec_checksum(doc)
    return ParsedSpec(n, triple, poly, float(norm), partition, checksum)


def serialize_kernel_spec(
    kernel: PolyGaussianKernel, partition: Optional[Bipartition] = None
) -> dict:
    doc = {
        "n": kernel.n,
        "a": [float(v) for v in kernel.triple.a.ravel()],
        "b": [float(v) for v in kernel.triple.b.ravel()],
        "c": [float(v) for v in kernel.triple.c.ravel()],
        "poly": kernel.poly.to_records(),
        "norm": float(kernel.norm),
    }
    if partition is not None:
        doc["partition"] = {"part1": [i + 1 for i in partition.part1]}
    return doc


def _canonical(value):
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, dict):
        return {k: _canonical(value[k]) for k in sorted(value)}
    if isinstance(value, list):
        return [_canonical(v) for v in value]
    return value


def spec_checksum(doc: dict) -> str:
    """Provenance hash over the canonicalized document (17-digit floats)."""
    blob = json.dumps(_canonical(doc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def jsonable(value):
    """Recursively convert report payloads (numpy, complex, ...) to JSON types."""
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no Infinity/NaN literals; reports carry them as strings.
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value
