"""On-disk formats.

SASR and FLD2 files are a one-line UTF-8 JSON header, a single ``\\n``, then
raw little-endian float32 samples (trace-major for SASR, row-major for
FLD2).  Headers are written with sorted keys and ``repr`` floats, so a
read/write cycle reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .errors import ParseError, SasError
from .grid import Field2D, Grid2D, SasRecord, Scatterer

__all__ = [
    "write_sas",
    "read_sas",
    "write_field",
    "read_field",
    "read_header",
    "export_pgm",
    "read_scatterers",
    "read_layers",
]

SAS_MAGIC = "SASR"
FIELD_MAGIC = "FLD2"
VERSION = 1
_F32 = np.dtype("<f4")

_SAS_KEYS = ("n_traces", "n_samples", "dt", "dx_track", "t0", "c")
_FIELD_KEYS = ("nx", "nz", "dx", "dz", "x0", "z0")


def _write(path, header: dict, payload: np.ndarray) -> None:
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = np.ascontiguousarray(payload, dtype=_F32).tobytes()
    with open(path, "wb") as fh:
        fh.write(head + b"\n" + body)


def _split(path) -> tuple[dict, bytes, int]:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise ParseError("no header terminator (newline) found", offset=len(raw))
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"header is not valid JSON: {exc}", offset=0) from exc
    if not isinstance(header, dict):
        raise ParseError("header must be a JSON object", offset=0)
    return header, raw[nl + 1 :], nl + 1


def read_header(path) -> dict:
    """Parse and validate just the header of a SASR or FLD2 file."""
    header, _, _ = _split(path)
    return _check_header(header)


def _check_header(header: dict) -> dict:
    magic = header.get("magic")
    if magic not in (SAS_MAGIC, FIELD_MAGIC):
        raise ParseError(f"bad magic {magic!r}", offset=0, field="magic")
    if header.get("version") != VERSION:
        raise ParseError(f"unsupported version {header.get('version')!r}", offset=0, field="version")
    keys = _SAS_KEYS if magic == SAS_MAGIC else _FIELD_KEYS
    for k in keys:
        if k not in header:
            raise ParseError(f"header field {k!r} missing", offset=0, field=k)
        if not isinstance(header[k], (int, float)) or isinstance(header[k], bool):
            raise ParseError(f"header field {k!r} must be numeric", offset=0, field=k)
    return header


def _payload(body: bytes, start: int, count: int) -> np.ndarray:
    need = 4 * count
    if len(body) < need:
        raise ParseError(
            f"truncated payload: expected {need} bytes after offset {start}, "
            f"file ends at byte offset {start + len(body)}",
            offset=start + len(body),
        )
    if len(body) > need:
        raise ParseError(f"{len(body) - need} trailing bytes after payload", offset=start + need)
    return np.frombuffer(body, dtype=_F32).astype(np.float64)


def write_sas(record: SasRecord, path) -> None:
    header = {"magic": SAS_MAGIC, "version": VERSION, **record.header()}
    _write(path, header, record.data)


def read_sas(path) -> SasRecord:
    header, body, start = _split(path)
    if header.get("magic") != SAS_MAGIC:
        raise ParseError(f"bad magic {header.get('magic')!r}, expected {SAS_MAGIC!r}", offset=0, field="magic")
    header = _check_header(header)
    n_tr, n_s = header["n_traces"], header["n_samples"]
    if not (isinstance(n_tr, int) and n_tr >= 1 and isinstance(n_s, int) and n_s >= 1):
        raise ParseError("n_traces and n_samples must be positive integers", offset=0, field="n_traces")
    data = _payload(body, start, n_tr * n_s).reshape(n_tr, n_s)
    try:
        return SasRecord(data, dt=header["dt"], dx_track=header["dx_track"], t0=header["t0"], c=header["c"])
    except SasError as exc:
        raise ParseError(f"invalid record: {exc}", offset=0, field=getattr(exc, "field", None)) from exc


def write_field(field: Field2D, path) -> None:
    g = field.grid
    header = {"magic": FIELD_MAGIC, "version": VERSION,
              "nx": g.nx, "nz": g.nz, "dx": g.dx, "dz": g.dz, "x0": g.x0, "z0": g.z0}
    _write(path, header, field.values)


def read_field(path) -> Field2D:
    header, body, start = _split(path)
    if header.get("magic") != FIELD_MAGIC:
        raise ParseError(f"bad magic {header.get('magic')!r}, expected {FIELD_MAGIC!r}", offset=0, field="magic")
    header = _check_header(header)
    try:
        grid = Grid2D(header["nx"], header["nz"], header["dx"], header["dz"], header["x0"], header["z0"])
    except SasError as exc:
        raise ParseError(f"invalid grid: {exc}", offset=0, field=getattr(exc, "field", None)) from exc
    values = _payload(body, start, grid.size)
    try:
        return Field2D(grid, values)
    except SasError as exc:
        raise ParseError(f"invalid field: {exc}", offset=start) from exc


def export_pgm(field: Field2D, path, normalization="minmax") -> None:
    """Binary 16-bit PGM (P5, maxval 65535), one image row per depth row.

    ``normalization`` is ``"minmax"`` or ``("fixed", lo, hi)``; values are
    mapped linearly onto ``[0, 65535]`` and clamped.  A field with no range
    maps to zero.
    """
    vals = field.values
    if normalization == "minmax":
        lo, hi = float(vals.min()), float(vals.max())
    elif isinstance(normalization, (tuple, list)) and len(normalization) == 3 and normalization[0] == "fixed":
        lo, hi = float(normalization[1]), float(normalization[2])
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    if hi > lo:
        scaled = np.rint(np.clip((vals - lo) / (hi - lo), 0.0, 1.0) * 65535.0)
    else:
        scaled = np.zeros_like(vals)
    pix = scaled.astype(">u2")
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(f"P5\n{g.nx} {g.nz}\n65535\n".encode("ascii"))
        fh.write(pix.tobytes())


def _csv_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            yield lineno, next(csv.reader([text]))


def read_scatterers(path) -> list[Scatterer]:
    """``x,z[,amplitude]`` per line; ``#`` starts a comment."""
    out = []
    for lineno, cols in _csv_rows(path):
        if len(cols) not in (2, 3):
            raise ParseError(f"{os.fspath(path)}:{lineno}: expected x,z,amplitude", field="line")
        try:
            vals = [float(c) for c in cols]
            out.append(Scatterer(*vals))
        except (ValueError, SasError) as exc:
            raise ParseError(f"{os.fspath(path)}:{lineno}: {exc}", field="line") from exc
    return out


def read_layers(path) -> list[tuple[float, float]]:
    """``z_top,c`` per line, sorted by ``z_top``."""
    layers = []
    for lineno, cols in _csv_rows(path):
        if len(cols) != 2:
            raise ParseError(f"{os.fspath(path)}:{lineno}: expected z_top,c", field="line")
        try:
            z, c = float(cols[0]), float(cols[1])
        except ValueError as exc:
            raise ParseError(f"{os.fspath(path)}:{lineno}: {exc}", field="line") from exc
        if not c > 0:
            raise ParseError(f"{os.fspath(path)}:{lineno}: speed must be positive", field="c")
        if layers and z < layers[-1][0]:
            raise ParseError(f"{os.fspath(path)}:{lineno}: layers must be sorted by z_top", field="z_top")
        layers.append((z, c))
    if not layers:
        raise ParseError(f"{os.fspath(path)}: no layers", field="line")
    return layers
