"""Snapshot (PNSF1), CSV and legacy VTK file formats."""
from __future__ import annotations

import hashlib
import json
import math
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .grid import GridSpec, State, build_grid

MAGIC = b"PNSF"
VERSION = 1
# magic, version, d, n, then side, origin[d], t, gamma, a, mu, lambda, alpha, eps
_HEAD = struct.Struct("<4sIII")


class FormatError(ValueError):
    pass


def write_pnsf(path, state: State, params) -> None:
    """Write a binary snapshot; all numbers little-endian."""
    g = state.grid
    floats = [g.side, *g.origin.tolist(), state.t, params.gamma, params.a, params.mu,
              params.lam, params.alpha, params.eps]
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, g.d, g.n))
        fh.write(struct.pack(f"<{len(floats)}d", *floats))
        fh.write(np.ascontiguousarray(state.rho, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.u, dtype="<f8").tobytes())


def read_pnsf(path) -> tuple[State, dict]:
    """Read a snapshot; returns the state and a header dict."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size:
        raise FormatError("file too short for a PNSF header")
    magic, version, d, n = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported PNSF version {version}")
    if d not in (2, 3):
        raise FormatError(f"bad dimension {d}")
    nf = 1 + d + 7
    off = _HEAD.size
    vals = struct.unpack_from(f"<{nf}d", raw, off)
    off += 8 * nf
    N = n ** d
    if len(raw) != off + 8 * N * (1 + d):
        raise FormatError("snapshot payload size does not match header")
    side, origin = vals[0], tuple(vals[1:1 + d])
    t, gamma, a, mu, lam, alpha, eps = vals[1 + d:]
    rho = np.frombuffer(raw, dtype="<f8", count=N, offset=off).astype(float)
    u = np.frombuffer(raw, dtype="<f8", count=d * N, offset=off + 8 * N).astype(float).reshape(d, N)
    grid = build_grid(GridSpec(d, n, side, origin))
    header = {"d": d, "n": n, "side": side, "origin": list(origin), "t": t, "gamma": gamma,
              "a": a, "mu": mu, "lambda": lam, "alpha": alpha, "eps": eps}
    return State(grid, rho, u, t), header


def header_hash(header: dict) -> str:
    blob = json.dumps(header, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _write_csv(path, header: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    h = header.get("config_hash") or header.get("study_hash") or header_hash(header)
    lines = [f"# config_hash = {h}"]
    for k in sorted(header):
        if k == "config_hash":
            continue
        lines.append(f"# {k} = {json.dumps(header[k], default=str)}")
    lines.append(",".join(columns))
    for r in rows:
        lines.append(",".join(_fmt(v) for v in r))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[dict, list[str], np.ndarray]:
    """Parse a CSV written by this module into ``(header, columns, data)``."""
    header, data, cols = {}, [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            key, val = key.strip(), val.strip()
            try:
                header[key] = json.loads(val)
            except json.JSONDecodeError:
                header[key] = val
        elif cols is None:
            cols = line.split(",")
        elif line:
            data.append([float(v) for v in line.split(",")])
    return header, cols or [], np.array(data, dtype=float).reshape(len(data), len(cols or []))


def write_diagnostics_csv(path, records, header: dict) -> None:
    from .diagnostics import DiagnosticsRecord
    cols = DiagnosticsRecord.CSV_COLUMNS
    _write_csv(path, header, cols, (r.csv_row() for r in records))


ERROR_COLUMNS = ("h", "eps", "E_rho", "E_u", "E_gradu", "RE")
EOC_COLUMNS = ("h_coarse", "h_fine", "E_rho", "E_u", "E_gradu", "RE")


def write_errors_csv(path, rows, header: dict) -> None:
    _write_csv(path, header, ERROR_COLUMNS, ([getattr(r, c) for c in ERROR_COLUMNS] for r in rows))


def write_eoc_csv(path, rows: Sequence[dict], header: dict) -> None:
    _write_csv(path, header, EOC_COLUMNS, ([r[c] for c in EOC_COLUMNS] for r in rows))


def write_vtk(path, state: State, title: str = "pennsfv") -> None:
    """Legacy ASCII STRUCTURED_POINTS with cell data ``rho`` and ``u``."""
    g = state.grid
    if g.d == 2:
        dims = (g.n + 1, g.n + 1, 1)
        origin = (*g.origin.tolist(), 0.0)
        spacing = (g.h, g.h, 1.0)
    else:
        dims = (g.n + 1,) * 3
        origin = tuple(g.origin.tolist())
        spacing = (g.h,) * 3
    # VTK orders points with x fastest; our cells have the last axis fastest
    order = np.arange(g.ncells).reshape(g.shape).T.ravel()
    u3 = np.zeros((3, g.ncells))
    u3[:g.d] = state.u
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET STRUCTURED_POINTS",
             "DIMENSIONS {} {} {}".format(*dims),
             "ORIGIN {} {} {}".format(*(_fmt(o) for o in origin)),
             "SPACING {} {} {}".format(*(_fmt(s) for s in spacing)),
             f"CELL_DATA {g.ncells}", "SCALARS rho double 1", "LOOKUP_TABLE default"]
    lines += [_fmt(v) for v in state.rho[order]]
    lines.append("VECTORS u double")
    lines += [" ".join(_fmt(c) for c in u3[:, K]) for K in order]
    Path(path).write_text("\n".join(lines) + "\n")
