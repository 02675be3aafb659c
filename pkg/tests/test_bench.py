import csv

import numpy as np
import pytest

from mmregress import bench
from mmregress.errors import BadShape

GRID = """
# two-by-two smoke grid
n = 60, 80
d = 3
r = 4, 8
sigma = 0.05
R = 2r
methods = exact, altmin
replications = 2
seed = 7
"""


def test_parse_grid():
    g = bench.parse_grid(GRID)
    assert g.n == [60, 80] and g.r == [4, 8] and g.sigma == [0.05]
    assert g.R == ["2r"] and g.methods == ["exact", "altmin"]
    assert g.replications == 2 and g.seed == 7 and g.scheme == ["random"]


@pytest.mark.parametrize("text", [
    "n = 10\nd = 2\nr = 2", "n = 10\nd = 2\nr = 2\nsigma = 0\nR = big",
    "n = 10\nd = 2\nr = 2\nsigma = 0\nmethods = magic", "n = x\nd = 2\nr = 2\nsigma = 0",
    "n = 10\nd = 2\nr = 2\nsigma = 0\nreplications = 0", "n = 10\nfoo = 1",
    "n 10",
])
def test_parse_grid_rejects(text):
    with pytest.raises(BadShape):
        bench.parse_grid(text)


@pytest.mark.parametrize("policy,n,r,want", [
    ("n", 100, 5, 100), ("r", 100, 5, 5), ("10r", 100, 5, 50), ("1.5r", 100, 5, 8),
    ("7", 100, 5, 7), ("r", 100, 0, 2), ("30r", 100, 5, 100)])
def test_resolve_R(policy, n, r, want):
    assert bench.resolve_R(policy, n, r) == want


def test_smoke_grid_rows_and_aggregate(tmp_path):
    g = bench.parse_grid(GRID)
    rows = bench.run_grid(g)
    assert len(rows) == 4 * g.replications * len(g.methods)
    assert all(r["status"] == "ok" for r in rows)
    assert [r["seed"] for r in rows[:4]] == [7, 7, 8, 8]
    assert {r["R"] for r in rows if r["r"] == 4} == {8}
    agg = bench.aggregate(rows)
    assert len(agg) == 4 * len(g.methods)
    for a in agg:
        members = [r for r in rows if all(r[k] == a[k] for k in bench.CELL_KEYS)]
        vals = np.array([m["beta_error"] for m in members])
        assert a["beta_error_mean"] == pytest.approx(vals.mean())
        assert a["beta_error_se"] == pytest.approx(vals.std(ddof=1) / np.sqrt(len(vals)))
    out = tmp_path / "results.csv"
    bench.write_rows(rows, out)
    with open(out, newline="") as f:
        read = list(csv.reader(f))
    assert tuple(read[0]) == bench.RESULT_COLUMNS and len(read) == len(rows) + 1
    assert b"\r" not in out.read_bytes()


def test_parallel_rows_keep_order():
    g = bench.parse_grid(GRID)
    strip = lambda rows: [{k: v for k, v in r.items() if k not in ("total_s", "qr_s")} for r in rows]
    assert strip(bench.run_grid(g, workers=3)) == strip(bench.run_grid(g, workers=1))


def test_failed_cells_recorded():
    g = bench.parse_grid("n = 6, 40\nd = 2\nr = 10\nsigma = 0\nmethods = fast")
    rows = bench.run_grid(g)
    assert rows[0]["status"].startswith("error:") and rows[1]["status"] == "ok"
    assert len(bench.aggregate(rows)) == 1
