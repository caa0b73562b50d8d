"""CSV round-trips for diagnostic series and field snapshots."""

import math

import numpy as np
import pytest

from chemotax.diagnostics import DiagConfig, record
from chemotax.dynamics import State
from chemotax.grid import Field, GridSpec, build_grid
from chemotax.io import (
    TIMESERIES_COLUMNS,
    read_snapshot,
    read_timeseries,
    write_snapshot,
    write_timeseries,
)
from chemotax.model import ModelParams

EXPECTED_HEADER = ("t,dt,mass_u,mass_n,mass_total,min_u,max_u,lp_u,w1p_u,linf_u,"
                   "min_n,max_n,max_c,mass_law_residual,zzz_residual,ode_bound")


def state_1d(cells=8):
    g = build_grid(GridSpec(dim=1, cells=cells))
    rng = np.random.default_rng(42)
    return State(t=0.25, u=Field(g, rng.uniform(0, 2, cells)),
                 c=Field(g, rng.uniform(0, 1, cells)),
                 n=Field(g, rng.uniform(0, 1, cells)),
                 w=Field(g, rng.uniform(0, 0.1, cells)), n0_max=1.0)


def test_header_is_frozen():
    assert ",".join(TIMESERIES_COLUMNS) == EXPECTED_HEADER
    assert len(TIMESERIES_COLUMNS) == 16
    assert "min_c" not in TIMESERIES_COLUMNS


def test_empty_series_writes_header_only(tmp_path):
    path = tmp_path / "series.csv"
    write_timeseries([], path)
    assert path.read_text() == EXPECTED_HEADER + "\n"
    assert read_timeseries(path) == []


def test_single_record_round_trips(tmp_path):
    s = state_1d()
    rec = record(s, 1e-3, DiagConfig(), ModelParams())
    path = tmp_path / "series.csv"
    write_timeseries([rec], path)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 2

    back = read_timeseries(path)
    assert len(back) == 1
    for name in TIMESERIES_COLUMNS:
        a, b = getattr(rec, name), getattr(back[0], name)
        assert (math.isnan(a) and math.isnan(b)) or a == b, name
    assert math.isnan(back[0].min_c)  # not serialized


def test_seventeen_digit_values_survive(tmp_path):
    s = state_1d()
    rec = record(s, math.pi * 1e-7, DiagConfig(), ModelParams())
    path = tmp_path / "series.csv"
    write_timeseries([rec, rec], path)
    back = read_timeseries(path)
    assert back[0].dt == math.pi * 1e-7
    assert back[1].mass_u == rec.mass_u


def test_read_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="bad header"):
        read_timeseries(path)
    path2 = tmp_path / "short.csv"
    path2.write_text(EXPECTED_HEADER + "\n1.0,2.0\n")
    with pytest.raises(ValueError, match="expected 16"):
        read_timeseries(path2)


def test_snapshot_1d_round_trip(tmp_path):
    s = state_1d(cells=8)
    path = tmp_path / "snap.csv"
    write_snapshot(s, path)
    first = path.read_text().split("\n")[0]
    assert first.startswith("# t=0.25 nx=8 hx=0.125")

    meta, arrays = read_snapshot(path)
    assert meta["nx"] == 8
    assert meta["t"] == 0.25
    assert meta["hx"] == 0.125
    np.testing.assert_array_equal(arrays["x"], s.u.grid.axes[0])
    for name, field in [("u", s.u), ("c", s.c), ("n", s.n), ("w", s.w)]:
        np.testing.assert_array_equal(arrays[name], field.values)


def test_snapshot_2d_row_order(tmp_path):
    g = build_grid(GridSpec(dim=2, lengths=(1.0, 2.0), cells=(4, 8)))
    vals = np.arange(32, dtype=float).reshape(4, 8)
    s = State(t=0.0, u=Field(g, vals), c=Field(g, vals + 100),
              n=Field(g, vals + 200), w=Field(g, vals + 300), n0_max=1.0)
    path = tmp_path / "snap2d.csv"
    write_snapshot(s, path)
    lines = path.read_text().strip().split("\n")
    assert lines[1] == "x,y,u,c,n,w"
    assert len(lines) == 2 + 32

    # y varies slowest: the first 4 data rows share y = y_0 while x sweeps
    rows = [ln.split(",") for ln in lines[2:]]
    y0 = float(rows[0][1])
    assert all(float(r[1]) == y0 for r in rows[:4])
    xs = [float(r[0]) for r in rows[:4]]
    assert xs == sorted(xs) and len(set(xs)) == 4
    assert float(rows[4][1]) > y0

    meta, arrays = read_snapshot(path)
    assert (meta["nx"], meta["ny"]) == (4, 8)
    np.testing.assert_array_equal(arrays["u"], vals)
    np.testing.assert_array_equal(arrays["w"], vals + 300)


def test_snapshot_rejects_plain_csv(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("x,u\n0.5,1.0\n")
    with pytest.raises(ValueError, match="comment line"):
        read_snapshot(path)
