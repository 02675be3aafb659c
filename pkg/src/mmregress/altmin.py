"""Alternating-minimization baseline for shuffled regression.

Alternates a least-squares fit of the coefficients with an unconstrained
re-assignment of the responses. For fixed fitted values ``f = X b`` the best
permutation matches the k-th smallest response to the k-th smallest fitted
value (rearrangement inequality), so each P-step is a pair of sorts.
"""
import time

import numpy as np

from .linalg import factorize
from .local_search import IterationRecord, SolveReport
from .permutation import SparsePermutation


def sort_match(y, fitted):
    """Index map ``pi`` minimizing ``||y[pi] - fitted||^2`` over all permutations.

    Ties in either vector are broken by index.
    """
    pi = np.empty(len(y), dtype=np.int64)
    pi[np.argsort(fitted, kind="stable")] = np.argsort(y, kind="stable")
    return pi


def altmin_solve(instance, max_rounds=100, tol=1e-12) -> SolveReport:
    """Alternating minimization from P = I.

    Stops once a full round lowers ``||P y - X b||^2`` by at most
    ``tol * max(1, ||y||^2)`` or after ``max_rounds`` rounds. The trace holds
    one record per half-step (route ``"beta"`` or ``"perm"``).
    """
    t_start = time.perf_counter()
    proj = factorize(instance.X)
    qr_s = time.perf_counter() - t_start
    y = np.asarray(instance.y, dtype=float)
    n = y.shape[0]
    stop = tol * max(1.0, float(y @ y))

    pi = np.arange(n)
    yhat = y.copy()
    obj = float(y @ y)  # beta = 0
    obj0 = obj
    trace = []
    for rnd in range(max_rounds):
        round_start = obj
        t0 = time.perf_counter()
        fitted = proj.apply_hat(yhat)
        res = yhat - fitted
        new = float(res @ res)
        trace.append(IterationRecord(len(trace), obj, new, obj - new, -1, -1,
                                     int(np.sum(pi != np.arange(n))),
                                     time.perf_counter() - t0, route="beta"))
        obj = new

        t0 = time.perf_counter()
        cand = sort_match(y, fitted)
        res = y[cand] - fitted
        new = float(res @ res)
        if new < obj:
            pi, yhat = cand, y[cand]
        else:
            new = obj
        trace.append(IterationRecord(len(trace), obj, new, obj - new, -1, -1,
                                     int(np.sum(pi != np.arange(n))),
                                     time.perf_counter() - t0, route="perm"))
        obj = new
        if round_start - obj <= stop:
            break

    beta = proj.solve_beta(yhat)
    w = yhat - proj.apply_hat(yhat)
    return SolveReport(
        method="altmin", config={"max_rounds": max_rounds, "tol": tol},
        perm=SparsePermutation.from_array(pi), beta=beta, objective=float(w @ w),
        initial_objective=obj0, iterations=len(trace),
        total_s=time.perf_counter() - t_start, qr_s=qr_s, trace=trace, projection=proj,
    )
