"""Text formats: series CSV, the var-model document, and benchmark CSV.

Numbers are written with ``repr`` of the Python float, which round-trips
float64 exactly.  Every writer accepts provenance lines that are emitted
as leading ``#`` comments; every reader skips them.
"""
from __future__ import annotations

import io
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .model import TimeSeries, VarModel

__all__ = [
    "format_float",
    "series_to_csv",
    "series_from_csv",
    "model_to_text",
    "model_from_text",
    "matrix_to_text",
    "matrix_from_text",
]

MODEL_HEADER = "# var-model v1"
MATRIX_HEADER = "# matrix v1"


def format_float(x: float) -> str:
    return repr(float(x))


def _comment_lines(provenance: Sequence[str] | None) -> list[str]:
    if not provenance:
        return []
    return [f"# {line}" for line in provenance]


def series_to_csv(series: TimeSeries, provenance: Sequence[str] | None = None) -> str:
    out = io.StringIO()
    for line in _comment_lines(provenance):
        out.write(line + "\n")
    cols = ",".join(f"x{j + 1}" for j in range(series.d))
    out.write(f"t,{cols}\n")
    for t, row in enumerate(series.values, start=1):
        out.write(str(t) + "," + ",".join(format_float(v) for v in row) + "\n")
    return out.getvalue()


def series_from_csv(text: str) -> TimeSeries:
    rows = []
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if not line.startswith("t,"):
                raise DataError(f"series CSV must start with a 't,x1,...' header, got {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        try:
            rows.append([float(v) for v in parts[1:]])
        except ValueError as exc:
            raise DataError(f"bad series row {line!r}: {exc}") from exc
    if not rows:
        raise DataError("series CSV contains no data rows")
    return TimeSeries(values=np.array(rows))


def _write_block(out: io.StringIO, name: str, matrix: np.ndarray) -> None:
    out.write(f"{name}:\n")
    for row in np.atleast_2d(matrix):
        out.write(" ".join(format_float(v) for v in row) + "\n")


def model_to_text(model: VarModel, provenance: Sequence[str] | None = None) -> str:
    out = io.StringIO()
    out.write(MODEL_HEADER + "\n")
    for line in _comment_lines(provenance):
        out.write(line + "\n")
    out.write(f"p = {model.p}\n")
    out.write(f"d = {model.d}\n")
    for k, a in enumerate(model.coeffs, start=1):
        _write_block(out, f"A{k}", a)
    _write_block(out, "Sigma", model.sigma_eps)
    return out.getvalue()


def _parse_blocks(lines: Iterable[str]) -> tuple[dict, dict]:
    scalars: dict[str, str] = {}
    blocks: dict[str, list[list[float]]] = {}
    current: list[list[float]] | None = None
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.endswith(":"):
            name = line[:-1].strip()
            current = []
            blocks[name] = current
            continue
        if "=" in line and current is None:
            key, _, value = line.partition("=")
            scalars[key.strip()] = value.strip()
            continue
        if current is None:
            raise DataError(f"unexpected line outside any block: {line!r}")
        try:
            current.append([float(v) for v in line.split()])
        except ValueError as exc:
            raise DataError(f"bad matrix row {line!r}: {exc}") from exc
    return scalars, blocks


def model_from_text(text: str) -> VarModel:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MODEL_HEADER:
        raise DataError(f"model file must start with {MODEL_HEADER!r}")
    scalars, blocks = _parse_blocks(lines[1:])
    try:
        p = int(scalars["p"])
        d = int(scalars["d"])
    except KeyError as exc:
        raise DataError(f"model file missing scalar {exc}") from exc
    coeffs = []
    for k in range(1, p + 1):
        if f"A{k}" not in blocks:
            raise DataError(f"model file missing block A{k}")
        a = np.array(blocks[f"A{k}"])
        if a.shape != (d, d):
            raise DataError(f"block A{k} has shape {a.shape}, expected ({d}, {d})")
        coeffs.append(a)
    if "Sigma" not in blocks:
        raise DataError("model file missing block Sigma")
    sigma = np.array(blocks["Sigma"])
    if sigma.shape != (d, d):
        raise DataError(f"block Sigma has shape {sigma.shape}, expected ({d}, {d})")
    try:
        return VarModel(coeffs=tuple(coeffs), sigma_eps=sigma)
    except ValueError as exc:
        raise DataError(f"invalid model file: {exc}") from exc


def matrix_to_text(matrix: np.ndarray, provenance: Sequence[str] | None = None) -> str:
    out = io.StringIO()
    out.write(MATRIX_HEADER + "\n")
    for line in _comment_lines(provenance):
        out.write(line + "\n")
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    out.write(f"rows = {matrix.shape[0]}\n")
    out.write(f"cols = {matrix.shape[1]}\n")
    _write_block(out, "M", matrix)
    return out.getvalue()


def matrix_from_text(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MATRIX_HEADER:
        raise DataError(f"matrix file must start with {MATRIX_HEADER!r}")
    scalars, blocks = _parse_blocks(lines[1:])
    if "M" not in blocks:
        raise DataError("matrix file missing block M")
    m = np.array(blocks["M"])
    want = (int(scalars.get("rows", m.shape[0])), int(scalars.get("cols", m.shape[1])))
    if m.shape != want:
        raise DataError(f"matrix block has shape {m.shape}, header says {want}")
    return m
