"""CSV persistence for diagnostic time series and field snapshots.

Numbers are written with 17 significant digits, enough for float64
round-trips; ``nan`` marks the not-applicable residuals of the first
record.  Snapshot rows follow the documented cell order: 1-d cells left
to right; in 2-d the y coordinate varies slowest (x sweeps fastest).
"""

from __future__ import annotations

import math
from typing import List, Sequence, Tuple

import numpy as np

from .diagnostics import DiagRecord
from .dynamics import State

TIMESERIES_COLUMNS = (
    "t", "dt", "mass_u", "mass_n", "mass_total",
    "min_u", "max_u", "lp_u", "w1p_u", "linf_u",
    "min_n", "max_n", "max_c",
    "mass_law_residual", "zzz_residual", "ode_bound",
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_timeseries(records: Sequence[DiagRecord], path) -> None:
    """One CSV row per record with the fixed diagnostic schema."""
    lines = [",".join(TIMESERIES_COLUMNS)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, name)) for name in TIMESERIES_COLUMNS))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_timeseries(path) -> List[DiagRecord]:
    """Parse a time-series CSV back into records (min_c is not stored)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0].split(",") != list(TIMESERIES_COLUMNS):
        raise ValueError(f"{path}: not a diagnostic time series (bad header)")
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(TIMESERIES_COLUMNS):
            raise ValueError(f"{path}: row with {len(parts)} fields, expected {len(TIMESERIES_COLUMNS)}")
        kw = dict(zip(TIMESERIES_COLUMNS, (float(p) for p in parts)))
        records.append(DiagRecord(min_c=math.nan, **kw))
    return records


def write_snapshot(state: State, path) -> None:
    """All four fields at cell centers, preceded by a grid comment line."""
    grid = state.u.grid
    u, c, n, w = state.u.values, state.c.values, state.n.values, state.w.values
    lines = []
    if grid.dim == 1:
        (nx,) = grid.shape
        (hx,) = grid.h
        lines.append(f"# t={_fmt(state.t)} nx={nx} hx={_fmt(hx)}")
        lines.append("x,u,c,n,w")
        x = grid.axes[0]
        for i in range(nx):
            lines.append(",".join(_fmt(v) for v in (x[i], u[i], c[i], n[i], w[i])))
    else:
        nx, ny = grid.shape
        hx, hy = grid.h
        lines.append(f"# t={_fmt(state.t)} nx={nx} ny={ny} hx={_fmt(hx)} hy={_fmt(hy)}")
        lines.append("x,y,u,c,n,w")
        x, y = grid.axes
        for iy in range(ny):  # y slowest, x fastest
            for ix in range(nx):
                lines.append(",".join(
                    _fmt(v) for v in (x[ix], y[iy], u[ix, iy], c[ix, iy], n[ix, iy], w[ix, iy])))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path) -> Tuple[dict, dict]:
    """Inverse of :func:`write_snapshot`: (metadata, arrays keyed u/c/n/w/x[/y])."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path}: missing snapshot comment line")
    meta = {}
    for tok in lines[0][2:].split():
        key, val = tok.split("=", 1)
        meta[key] = int(val) if key in ("nx", "ny") else float(val)
    header = lines[1].split(",")
    cols = {name: [] for name in header}
    for ln in lines[2:]:
        for name, val in zip(header, ln.split(",")):
            cols[name].append(float(val))
    arrays = {name: np.asarray(vals) for name, vals in cols.items()}
    if "ny" in meta:
        nx, ny = meta["nx"], meta["ny"]
        for name in header:
            # rows ran y slowest: reshape to (ny, nx) then transpose to (nx, ny)
            arrays[name] = arrays[name].reshape(ny, nx).T
    return meta, arrays
