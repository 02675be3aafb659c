"""Seeded benchmark grids with raw and aggregated CSV output.

Grid files hold one ``key = comma, separated, values`` line per axis;
blank lines and ``#`` comments are ignored::

    n = 500
    d = 10
    r = 50, 100, 200
    sigma = 0, 0.1
    R = n            # n | r | <c>r (e.g. 10r) | integer
    scheme = random  # random | equispaced
    methods = exact, fast, altmin
    replications = 10
    seed = 0

Replication k of every cell uses instance seed ``seed + k``, so all methods
in a cell see identical instances.
"""
import csv
import itertools
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .altmin import altmin_solve
from .datagen import SCHEMES, gen_instance
from .diagnostics import evaluate
from .errors import BadShape
from .local_search import SolverConfig, solve

METHODS = ("exact", "fast", "altmin")
RESULT_COLUMNS = ("n", "d", "r", "sigma", "R", "scheme", "method", "seed", "hamming",
                  "beta_error", "relative_obj", "relative_beta_error", "iterations",
                  "total_s", "qr_s", "status")
CELL_KEYS = ("n", "d", "r", "sigma", "R", "scheme", "method")
METRIC_KEYS = ("hamming", "beta_error", "relative_obj", "relative_beta_error",
               "iterations", "total_s", "qr_s")
_R_POLICY = re.compile(r"^(n|r|\d+(\.\d+)?r|\d+)$")


@dataclass
class BenchGrid:
    n: list
    d: list
    r: list
    sigma: list
    R: list = field(default_factory=lambda: ["n"])
    scheme: list = field(default_factory=lambda: ["random"])
    methods: list = field(default_factory=lambda: ["exact"])
    replications: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "d", "r", "sigma", "R", "scheme", "methods"):
            if not getattr(self, name):
                raise BadShape(f"grid axis {name!r} is empty")
        if self.replications < 1:
            raise BadShape("replications must be >= 1")
        for p in self.R:
            if not _R_POLICY.match(str(p)):
                raise BadShape(f"bad R policy {p!r}")
        for s in self.scheme:
            if s not in SCHEMES:
                raise BadShape(f"unknown scheme {s!r}")
        for m in self.methods:
            if m not in METHODS:
                raise BadShape(f"unknown method {m!r}")

    def cells(self):
        """(n, d, r, sigma, R-policy, scheme) tuples in file order."""
        return list(itertools.product(self.n, self.d, self.r, self.sigma, self.R, self.scheme))


def parse_grid(text) -> BenchGrid:
    conv = {"n": int, "d": int, "r": int, "sigma": float, "R": str, "scheme": str,
            "methods": str}
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadShape(f"line {lineno}: expected key = values")
        key, vals = (s.strip() for s in line.split("=", 1))
        items = [v.strip() for v in vals.split(",") if v.strip()]
        try:
            if key in conv:
                kw[key] = [conv[key](v) for v in items]
            elif key in ("replications", "seed"):
                if len(items) != 1:
                    raise BadShape(f"line {lineno}: {key} takes one value")
                kw[key] = int(items[0])
            else:
                raise BadShape(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise BadShape(f"line {lineno}: {exc}") from None
    missing = {"n", "d", "r", "sigma"} - kw.keys()
    if missing:
        raise BadShape(f"grid is missing {sorted(missing)}")
    return BenchGrid(**kw)


def resolve_R(policy, n, r):
    """Turn an R policy into an integer radius, clamped to [2, n]."""
    p = str(policy)
    if p == "n":
        R = n
    elif p == "r":
        R = r
    elif p.endswith("r"):
        R = math.ceil(float(p[:-1]) * r)
    else:
        R = int(p)
    return min(max(R, 2), n)


def _run_one(n, d, r, sigma, R, scheme, methods, seed):
    rows = []
    base = dict(n=n, d=d, r=r, sigma=sigma, R=R, scheme=scheme, seed=seed)
    try:
        inst = gen_instance(n, d, r, sigma, scheme, seed=seed)
    except Exception as exc:  # the whole replication is unusable
        return [dict(base, method=m, status=f"error:{type(exc).__name__}") for m in methods]
    for m in methods:
        row = dict(base, method=m)
        try:
            rep = altmin_solve(inst) if m == "altmin" else solve(inst, SolverConfig(R=R, mode=m))
            met = evaluate(rep, inst)
            row.update(hamming=met.hamming, beta_error=met.beta_error,
                       relative_obj=met.relative_obj,
                       relative_beta_error=met.relative_beta_error,
                       iterations=rep.iterations, total_s=rep.total_s, qr_s=rep.qr_s,
                       status="ok")
        except Exception as exc:
            row["status"] = f"error:{type(exc).__name__}"
        rows.append(row)
    return rows


def run_grid(grid: BenchGrid, workers=1):
    """All result rows in (cell, replication, method) order."""
    jobs = []
    for n, d, r, sigma, policy, scheme in grid.cells():
        R = resolve_R(policy, n, r)
        for k in range(grid.replications):
            jobs.append((n, d, r, sigma, R, scheme, grid.methods, grid.seed + k))
    if workers <= 1:
        chunks = [_run_one(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda j: _run_one(*j), jobs))
    return [row for chunk in chunks for row in chunk]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(rows, path, columns=RESULT_COLUMNS):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in columns])


def aggregate(rows):
    """Per-cell mean and standard error of every metric over successful rows."""
    groups = {}
    for row in rows:
        if row.get("status") != "ok":
            continue
        groups.setdefault(tuple(row[k] for k in CELL_KEYS), []).append(row)
    out = []
    for key, members in groups.items():
        agg = dict(zip(CELL_KEYS, key), count=len(members))
        for m in METRIC_KEYS:
            vals = np.array([r[m] for r in members if r.get(m) is not None], dtype=float)
            if vals.size == 0:
                agg[f"{m}_mean"] = agg[f"{m}_se"] = None
                continue
            agg[f"{m}_mean"] = float(vals.mean())
            agg[f"{m}_se"] = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
        out.append(agg)
    return out


AGGREGATE_COLUMNS = CELL_KEYS + ("count",) + tuple(
    f"{m}_{s}" for m in METRIC_KEYS for s in ("mean", "se"))
