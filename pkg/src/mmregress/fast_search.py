"""Approximate best-swap search through 2-D staircases.

Bounding ``||(I - H)(e_i - e_j)||^2`` by 2 turns the swap search into

    min_{i, j} (y_i - y_j) (v_i - v_j),    v = y - w = H P y,

over the currently assigned responses ``y = P y``. With ``z_i = (y_i, v_i)``,
an optimal pair joins a left-top point (nothing weakly left and above it) to
a right-bottom point (nothing weakly right and below it). Both point sets are
monotone chains, so for each left-top point the right-bottom points that
give a non-positive product form one contiguous window, found by bisection.
"""
import time
from dataclasses import dataclass

import numpy as np

from .errors import EmptyActiveSet
from .local_search import best_swap_exact, swap_delta_exact, try_move, _terminal

CHUNK = 1 << 22


@dataclass
class StaircaseIndex:
    """Active indices sorted by (y ascending, v descending) and the two chains.

    ``s_lt`` and ``s_rb`` are stored in ascending-y order; along each chain
    v is strictly increasing as well.
    """

    order: np.ndarray
    s_lt: np.ndarray
    s_rb: np.ndarray


def _sorted_order(y, v, active, order):
    if order is None:
        order = active[np.argsort(y[active], kind="stable")]
    ys = y[order]
    if ys.shape[0] > 1 and np.any(ys[1:] == ys[:-1]):
        # equal responses: the larger v must come first for both scans
        order = active[np.lexsort((-v[active], y[active]))]
    return order


def build_staircases(y, v, active=None, order=None) -> StaircaseIndex:
    """Left-top and right-bottom points among ``active`` (all indices if None).

    ``order`` may pass a precomputed ascending-y ordering of ``active``.
    """
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    active = np.arange(y.shape[0]) if active is None else np.asarray(active, dtype=np.int64)
    if active.shape[0] == 0:
        raise EmptyActiveSet("no active indices")
    order = _sorted_order(y, v, active, order)
    vs = v[order]

    keep = np.empty(vs.shape[0], dtype=bool)
    keep[0] = True
    keep[1:] = vs[1:] > np.maximum.accumulate(vs)[:-1]
    s_lt = order[keep]

    vr = vs[::-1]
    keep_r = np.empty(vr.shape[0], dtype=bool)
    keep_r[0] = True
    keep_r[1:] = vr[1:] < np.minimum.accumulate(vr)[:-1]
    s_rb = order[::-1][keep_r][::-1]
    return StaircaseIndex(order, s_lt, s_rb)


def _pick(best, cand):
    """Lexicographic min on (value, min index, max index)."""
    if cand is None:
        return best
    if best is None:
        return cand
    key = lambda t: (t[2], min(t[0], t[1]), max(t[0], t[1]))
    return min(best, cand, key=key)


def _window_argmin(lt, rb, y, v):
    """Most negative product between a left-top point and a right-bottom point
    lying weakly right of and below it. None if no such pair is negative."""
    if lt.shape[0] == 0 or rb.shape[0] == 0:
        return None
    ry, rv = y[rb], v[rb]
    lo = np.searchsorted(ry, y[lt], side="left")
    hi = np.searchsorted(rv, v[lt], side="right")
    lens = np.maximum(hi - lo, 0)
    keep = lens > 0
    lt, lo, lens = lt[keep], lo[keep], lens[keep]
    best = None
    start = 0
    while start < lt.shape[0]:
        csum = np.cumsum(lens[start:])
        stop = start + max(1, int(np.searchsorted(csum, CHUNK, side="right")))
        m = lt[start:stop]
        ln = lens[start:stop]
        tot = int(ln.sum())
        first = np.cumsum(ln) - ln
        t = np.arange(tot) - np.repeat(first - lo[start:stop], ln)
        mi = np.repeat(m, ln)
        rj = rb[t]
        prod = (y[mi] - y[rj]) * (v[mi] - v[rj])
        k = int(np.argmin(prod))
        val = prod[k]
        if val < 0:
            hits = np.flatnonzero(prod == val)
            pairs = [(int(mi[h]), int(rj[h]), float(val)) for h in hits]
            for p in pairs:
                best = _pick(best, p)
        start = stop
    return best


def staircase_argmin(idx: StaircaseIndex, y, v, other: StaircaseIndex = None):
    """Minimize ``(y_i - y_j)(v_i - v_j)`` with the staircase windows.

    With ``other`` given, pairs are restricted to one index from each of the
    two active sets. Returns ``(i, j, value)``; when no pair has a negative
    product the diagonal answer ``(i, i, 0.0)`` is returned.
    """
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    other = idx if other is None else other
    best = _window_argmin(idx.s_lt, other.s_rb, y, v)
    if other is not idx:
        best = _pick(best, _window_argmin(other.s_lt, idx.s_rb, y, v))
    if best is None:
        i = int(idx.order[0])
        return i, i, 0.0
    return best


class FastSearchCache:
    """Ascending order of the assigned responses, kept in sync with swaps.

    A swap exchanges two values without changing their multiset, so the
    sorted order only needs its two labels exchanged.
    """

    def __init__(self, state):
        self.order = np.argsort(state.yhat, kind="stable")
        self.rank = np.empty_like(self.order)
        self.rank[self.order] = np.arange(self.order.shape[0])

    def swap(self, i, j):
        ri, rj = self.rank[i], self.rank[j]
        self.order[ri], self.order[rj] = j, i
        self.rank[i], self.rank[j] = rj, ri


def approximate_objective(state, i, j):
    """Upper-bound surrogate 2 (y_i - y_j)(v_i - v_j) of the swap change."""
    v = state.yhat - state.w
    return 2.0 * (state.yhat[i] - state.yhat[j]) * (v[i] - v[j])


def fast_best_swap(state, ctx, cfg, cache: FastSearchCache = None):
    """Staircase candidate under the active dist-to-identity regime.

    Returns ``(i, j, true_delta)`` or None when the surrogate finds no
    improving pair.
    """
    y = state.yhat
    v = y - state.w
    dist = state.dist
    order = cache.order if cache is not None else None
    if dist <= cfg.R - 2:
        idx = build_staircases(y, v, order=order)
        i, j, val = staircase_argmin(idx, y, v)
    else:
        supp = np.asarray(state.P.supp(), dtype=np.int64)
        if supp.shape[0] < 2:
            return None
        s_idx = build_staircases(y, v, active=supp)
        if dist == cfg.R - 1:
            # one endpoint must already be displaced
            idx = build_staircases(y, v, order=order)
            i, j, val = staircase_argmin(idx, y, v, other=s_idx)
        else:
            i, j, val = staircase_argmin(s_idx, y, v)
    if i == j or not val < 0:
        return None
    i, j = min(i, j), max(i, j)
    return i, j, swap_delta_exact(state, i, j, ctx)


def fast_step(state, ctx, cfg, cache: FastSearchCache = None):
    """Fast iteration with a single exact-search fallback.

    The fallback runs only for ``n <= cfg.fallback_max_n``; above that a
    non-improving staircase candidate ends the search.
    """
    t0 = time.perf_counter()
    cand = fast_best_swap(state, ctx, cfg, cache)
    rec = try_move(state, ctx, cfg, cand, "fast", t0)
    if rec is None and ctx.n <= cfg.fallback_max_n:
        cand = best_swap_exact(state, ctx, cfg)
        rec = try_move(state, ctx, cfg, cand, "fallback", t0)
        route = "fallback"
    else:
        route = "fast"
    if rec is None:
        return state, _terminal(state, t0, cand, route)
    if cache is not None:
        cache.swap(rec.i, rec.j)
    return state, rec
