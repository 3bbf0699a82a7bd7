"""Time-series CSV files and binary checkpoints.

Checkpoint layout (little-endian)::

    8 bytes   magic b"PEMSNAP1"
    f8 f8     L1, L2
    u4 u4 u4  Nx, Ny, Nz
    u4        model tag (0 = PEM, 1 = SMHD)
    f8        eps (0 for PEM)
    f8        time
    c16 ...   coefficients per component, each (Nz, Ny, Nx//2+1) in C order

PEM stores (u1, u2, b1, b2); SMHD stores (u1, u2, u3, b1, b2, b3).  The
half spectrum with mx >= 0 is stored; negative mx follow from Hermitian
symmetry.
"""

from __future__ import annotations

import csv
import os
import struct

import numpy as np

from .diagnostics import RECORD_FIELDS, NormRecord
from .errors import GridMismatchError, SnapshotError
from .fields import PEMState, SMHDState
from .spectral import Grid

MAGIC = b"PEMSNAP1"
_HEADER = struct.Struct("<8sddIIIIdd")
MODEL_TAGS = {"PEM": 0, "SMHD": 1}
_NCOMP = {0: 4, 1: 6}


def format_float(x):
    return "%.17g" % x


def write_rows(path, header, rows):
    """CSV with 17 significant digits and '\\n' line endings."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} columns, header has {len(header)}")
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    return rows[0], rows[1:]


def write_timeseries(records, path):
    if len(records) == 0:
        raise ValueError("no records to write")
    write_rows(path, RECORD_FIELDS, [tuple(float(v) for v in r.as_tuple()) for r in records])


def read_timeseries(path):
    header, rows = read_rows(path)
    if tuple(header) != RECORD_FIELDS:
        raise ValueError(f"unexpected header in {path}: {header}")
    out = []
    for n, row in enumerate(rows, start=2):
        if len(row) != len(RECORD_FIELDS):
            raise ValueError(f"{path}:{n}: expected {len(RECORD_FIELDS)} columns, got {len(row)}")
        out.append(NormRecord(*(float(v) for v in row)))
    return out


def checkpoint(state, path):
    """Write ``state`` atomically (temporary file then rename)."""
    g = state.grid
    tag = MODEL_TAGS[state.model]
    eps = state.eps if tag == 1 else 0.0
    header = _HEADER.pack(MAGIC, g.L1, g.L2, g.Nx, g.Ny, g.Nz, tag, eps, state.time)
    data = np.ascontiguousarray(state.stacked(), dtype="<c16")
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes(order="C"))
    os.replace(tmp, path)


def restore(path, grid=None):
    """Read a checkpoint; with ``grid`` given, also require it to match."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise SnapshotError(f"cannot read {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header")
    magic, L1, L2, Nx, Ny, Nz, tag, eps, time = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if tag not in _NCOMP:
        raise SnapshotError(f"{path}: unknown model tag {tag}")
    try:
        g = Grid(Nx, Ny, Nz, L1, L2)
    except ValueError as exc:
        raise SnapshotError(f"{path}: invalid grid header: {exc}") from exc
    ncomp = _NCOMP[tag]
    shape = (ncomp,) + g.spectral_shape
    expected = _HEADER.size + 16 * int(np.prod(shape))
    if len(raw) != expected:
        raise SnapshotError(f"{path}: size {len(raw)} bytes, expected {expected}")
    y = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(shape).astype(complex)
    if not np.all(np.isfinite(y)):
        raise SnapshotError(f"{path}: non-finite coefficients")
    if grid is not None and grid != g:
        raise GridMismatchError(f"{path}: snapshot grid {g} does not match run grid {grid}")
    if tag == 0:
        return PEMState(g, y[:2], y[2:], time)
    if not eps > 0:
        raise SnapshotError(f"{path}: SMHD snapshot with eps = {eps}")
    return SMHDState(g, y[:3], y[3:], eps, time)
