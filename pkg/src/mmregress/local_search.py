"""Greedy best-swap local search over sparse permutations.

Minimizes ``||(I - H) P y||^2`` subject to ``dist(P, I) <= R`` starting from the
identity. Each iteration applies the single transposition of two assigned
responses that lowers the objective most, using the residual image
``w = (I - H) P y`` kept in memory so every candidate swap costs O(1)
(dense hat matrix) or O(d) (thin Q factor).
"""
import time
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .errors import IndexOutOfRange, BadShape
from .linalg import ProjectionOperator, factorize
from .permutation import SparsePermutation

# Moves must beat max(tol, FLOOR_RTOL * ||y||^2); below that the predicted
# decrease is indistinguishable from rounding in ||w||^2.
FLOOR_RTOL = 1e-13
# Candidate decreases within TIE_RTOL * ||y||^2 of the best count as ties.
TIE_RTOL = 1e-12
MODES = ("exact", "fast")


@dataclass
class SolverConfig:
    """Search parameters.

    ``R`` bounds dist(P, I); ``tol`` is the minimum accepted decrease;
    ``max_iter=None`` means no iteration cap. ``fallback_max_n`` limits the
    exact-search fallback of fast mode to instances where an O(n^2) scan is
    affordable.
    """

    R: int
    tol: float = 0.0
    max_iter: Optional[int] = None
    mode: str = "exact"
    dense_threshold: int = 2000
    refresh_every: int = 64
    tie_break: str = "lexicographic"
    fallback_max_n: int = 2000
    block_entries: int = 1 << 21

    def __post_init__(self):
        if self.R < 2:
            raise BadShape("R must be >= 2")
        if self.tol < 0:
            raise BadShape("tol must be non-negative")
        if self.max_iter is not None and self.max_iter < 1:
            raise BadShape("max_iter must be >= 1")
        if self.mode not in MODES:
            raise BadShape(f"mode must be one of {MODES}")
        if self.tie_break != "lexicographic":
            raise BadShape("only lexicographic tie-breaking is supported")
        if self.refresh_every < 1:
            raise BadShape("refresh_every must be >= 1")


class SearchContext:
    """Responses plus projection data shared by all iterations of one solve."""

    def __init__(self, y, proj: ProjectionOperator, dense_threshold=2000):
        self.y = np.asarray(y, dtype=float)
        if self.y.shape != (proj.n,):
            raise BadShape("y and X disagree on n")
        self.proj = proj
        self.n = proj.n
        self.h = proj.leverage
        self.dense_threshold = dense_threshold
        self.scale = float(self.y @ self.y)

    @property
    def H(self):
        """Dense hat matrix, or None when n exceeds the dense threshold."""
        if self.n > self.dense_threshold:
            return None
        return self.proj.dense_hat(max_n=self.dense_threshold)

    def hat_pair(self, i, j):
        H = self.H
        return H[i, j] if H is not None else self.proj.hat_entries(i, j)

    def residual_difference(self, i, j):
        """(I - H)(e_i - e_j) as a dense vector."""
        H = self.H
        if H is not None:
            col = H[:, j] - H[:, i]
        else:
            q = self.proj.q_factor
            col = q @ (q[j] - q[i])
        col[i] += 1.0
        col[j] -= 1.0
        return col


@dataclass
class SolverState:
    """Current iterate; ``yhat = P y`` and ``w = (I - H) yhat``."""

    P: SparsePermutation
    pi: np.ndarray
    yhat: np.ndarray
    w: np.ndarray
    obj: float
    k: int = 0
    since_refresh: int = 0

    @classmethod
    def initial(cls, ctx: SearchContext, P: SparsePermutation = None):
        P = SparsePermutation.identity(ctx.n) if P is None else P
        yhat = P.apply(ctx.y)
        w = ctx.proj.apply_residual(yhat)
        return cls(P, P.to_array(), yhat, w, float(w @ w))

    @property
    def dist(self):
        return self.P.dist_to_identity()

    def refresh(self, ctx):
        self.w = ctx.proj.apply_residual(self.yhat)
        self.obj = float(self.w @ self.w)
        self.since_refresh = 0


@dataclass
class IterationRecord:
    """One local-search iteration.

    ``decrease = obj_before - obj_after``. The final record of a run that
    stopped on the tolerance test has ``accepted=False`` and names the
    rejected best candidate; ``gap`` is the best available decrease G(P^(k)).
    """

    k: int
    obj_before: float
    obj_after: float
    decrease: float
    i: int
    j: int
    dist_to_identity: int
    wall_time: float
    accepted: bool = True
    route: str = "exact"
    gap: float = 0.0


@dataclass
class SolveReport:
    method: str
    config: dict
    perm: SparsePermutation
    beta: np.ndarray
    objective: float
    initial_objective: float
    iterations: int
    total_s: float
    qr_s: float
    trace: list = field(default_factory=list)
    trace_path: Optional[str] = None
    metrics: Optional[dict] = None
    projection: Optional[ProjectionOperator] = field(default=None, repr=False)

    def to_json(self):
        return {
            "method": self.method,
            "config": self.config,
            "perm": self.perm.to_json(),
            "beta": [float(b) for b in self.beta],
            "objective": float(self.objective),
            "initial_objective": float(self.initial_objective),
            "iterations": int(self.iterations),
            "total_s": float(self.total_s),
            "qr_s": float(self.qr_s),
            "trace_path": self.trace_path,
            "metrics": self.metrics,
        }


TRACE_COLUMNS = ("k", "obj_before", "obj_after", "decrease", "i", "j", "dist", "wall_ms")


def write_trace(records, path):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(TRACE_COLUMNS) + "\n")
        for r in records:
            f.write(f"{r.k},{r.obj_before:.17g},{r.obj_after:.17g},{r.decrease:.17g},"
                    f"{r.i},{r.j},{r.dist_to_identity},{r.wall_time * 1e3:.3f}\n")


def objective(P: SparsePermutation, ctx: SearchContext) -> float:
    """||(I - H) P y||^2 computed from scratch."""
    w = ctx.proj.apply_residual(P.apply(ctx.y))
    return float(w @ w)


def swap_delta_exact(state: SolverState, i, j, ctx: SearchContext) -> float:
    """Objective change from exchanging the responses assigned to i and j."""
    n = ctx.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRange(f"({i}, {j}) outside [0, {n})")
    delta = state.yhat[i] - state.yhat[j]
    c = 2.0 - ctx.h[i] - ctx.h[j] + 2.0 * ctx.hat_pair(i, j)
    return float(delta * (delta * c - 2.0 * (state.w[i] - state.w[j])))


def _feasible_block(state, R, rows, cols):
    s = state.pi != np.arange(state.pi.shape[0])
    pi = state.pi
    change = (-(s[rows, None].astype(np.int64)) - s[None, cols]
              + (pi[None, cols] != rows[:, None]) + (pi[rows, None] != cols[None, :]))
    return state.dist + change <= R


def best_swap_exact(state: SolverState, ctx: SearchContext, cfg: SolverConfig):
    """Feasible pair (i < j) with the smallest objective change.

    Returns ``(i, j, delta)`` regardless of the sign of ``delta``, or None
    when no feasible pair exists. Near-ties (within ``TIE_RTOL * ||y||^2``)
    go to the lexicographically smallest (i, j).
    """
    n = ctx.n
    if n < 2:
        return None
    tie_tol = TIE_RTOL * ctx.scale
    constrained = state.dist > cfg.R - 2
    H = ctx.H
    q = ctx.proj.q_factor
    yhat, w, h = state.yhat, state.w, ctx.h

    best = np.inf
    cands = []
    a = 0
    while a < n - 1:
        b = min(n - 1, a + max(1, cfg.block_entries // (n - a)))
        rows = np.arange(a, b)
        cols = np.arange(a, n)
        Hb = H[a:b, a:] if H is not None else q[a:b] @ q[a:].T
        dl = yhat[a:b, None] - yhat[None, a:]
        c = 2.0 * Hb
        c += 2.0
        c -= h[a:b, None]
        c -= h[None, a:]
        delta = dl * (dl * c - 2.0 * (w[a:b, None] - w[None, a:]))
        delta[np.tril_indices(b - a, 0, n - a)] = np.inf
        if constrained:
            delta[~_feasible_block(state, cfg.R, rows, cols)] = np.inf
        m = delta.min()
        if m < np.inf and m <= best + tie_tol:
            best = min(best, m)
            r_loc, c_loc = np.nonzero(delta <= best + tie_tol)
            cands.extend(zip(delta[r_loc, c_loc].tolist(), (r_loc + a).tolist(), (c_loc + a).tolist()))
            cands = [t for t in cands if t[0] <= best + tie_tol]
        a = b
    if not cands:
        return None
    _, i, j = min(cands, key=lambda t: (t[1], t[2]))
    return i, j, float(swap_delta_exact(state, i, j, ctx))


def _threshold(ctx, cfg):
    return max(cfg.tol, FLOOR_RTOL * ctx.scale)


def commit_swap(state, ctx, cfg, i, j):
    """Apply swap (i, j) if it realizes a decrease above ``cfg.tol``.

    Returns the new objective, or None (state untouched) when the realized
    decrease is too small.
    """
    delta = state.yhat[i] - state.yhat[j]
    w_new = state.w - delta * ctx.residual_difference(i, j)
    obj_new = float(w_new @ w_new)
    if not state.obj - obj_new > cfg.tol:
        return None
    state.w = w_new
    state.obj = obj_new
    state.yhat[i], state.yhat[j] = state.yhat[j], state.yhat[i]
    state.pi[i], state.pi[j] = state.pi[j], state.pi[i]
    state.P = state.P.swap(i, j)
    state.k += 1
    state.since_refresh += 1
    if state.since_refresh >= cfg.refresh_every:
        state.refresh(ctx)
    return state.obj


def _terminal(state, t0, cand, route):
    i, j, d = cand if cand is not None else (-1, -1, 0.0)
    return IterationRecord(state.k, state.obj, state.obj, 0.0, i, j, state.dist,
                           time.perf_counter() - t0, accepted=False, route=route,
                           gap=max(0.0, -d))


def try_move(state, ctx, cfg, cand, route, t0):
    """Commit ``cand`` when its predicted and realized decreases clear the threshold."""
    if cand is None or not cand[2] < -_threshold(ctx, cfg):
        return None
    i, j, d = cand
    before = state.obj
    if commit_swap(state, ctx, cfg, i, j) is None:
        return None
    return IterationRecord(state.k - 1, before, state.obj, before - state.obj, i, j,
                           state.dist, time.perf_counter() - t0, route=route, gap=-d)


def step(state: SolverState, ctx: SearchContext, cfg: SolverConfig):
    """One exact local-search iteration; returns ``(state, record)``."""
    t0 = time.perf_counter()
    cand = best_swap_exact(state, ctx, cfg)
    rec = try_move(state, ctx, cfg, cand, "exact", t0)
    if rec is None:
        rec = _terminal(state, t0, cand, "exact")
    return state, rec


def run(state, ctx, cfg, step_fn):
    records = []
    while cfg.max_iter is None or len(records) < cfg.max_iter:
        state, rec = step_fn(state, ctx, cfg)
        records.append(rec)
        if not rec.accepted:
            break
    state.refresh(ctx)
    return state, records


def solve(instance, cfg: SolverConfig) -> SolveReport:
    """Run the local search on ``instance`` from the identity permutation."""
    t_start = time.perf_counter()
    proj = factorize(instance.X)
    qr_s = time.perf_counter() - t_start
    ctx = SearchContext(instance.y, proj, cfg.dense_threshold)
    state = SolverState.initial(ctx)
    obj0 = state.obj
    if cfg.mode == "fast":
        from .fast_search import FastSearchCache, fast_step
        cache = FastSearchCache(state)
        state, records = run(state, ctx, cfg,
                             lambda s, c, g: fast_step(s, c, g, cache))
    else:
        state, records = run(state, ctx, cfg, step)
    beta = proj.solve_beta(state.yhat)
    total_s = time.perf_counter() - t_start
    return SolveReport(
        method=cfg.mode, config=asdict(cfg), perm=state.P, beta=beta,
        objective=state.obj, initial_objective=obj0, iterations=len(records),
        total_s=total_s, qr_s=qr_s, trace=records, projection=proj,
    )
