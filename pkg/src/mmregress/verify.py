"""Randomized oracle suites behind ``mmregress verify``.

Every case is generated from its own integer seed so a failure can be
replayed with :func:`run_suite` on that seed alone.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import local_search
from .datagen import gen_instance
from .diagnostics import exhaustive_solve, one_step_decrease_oracle
from .errors import WitnessNotFound
from .fast_search import build_staircases, staircase_argmin
from .linalg import factorize
from .local_search import SearchContext, SolverConfig, SolverState, TIE_RTOL, solve
from .permutation import SparsePermutation

SUITES = ("lemma1", "swap-oracle", "staircase", "exhaustive")


@dataclass
class SuiteResult:
    name: str
    cases: int
    passed: int
    required: int
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return self.passed >= self.required

    def summary(self):
        status = "PASS" if self.ok else "FAIL"
        line = f"{status} {self.name}: {self.passed}/{self.cases} (need {self.required})"
        if self.failures:
            line += " failing seeds: " + ",".join(str(s) for s, _ in self.failures[:20])
        return line


def _random_sparse_perm(rng, n, k):
    idx = rng.choice(n, size=k, replace=False)
    return SparsePermutation(n, dict(zip(idx.tolist(), rng.permutation(idx).tolist())))


def _random_state(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 13))
    d = int(rng.integers(1, min(4, n - 1) + 1))
    X = rng.standard_normal((n, d))
    if seed % 4 == 0:
        y = rng.integers(-2, 3, size=n).astype(float)  # repeated values produce exact ties
    else:
        y = rng.standard_normal(n)
    R = int(rng.integers(2, n + 1))
    P = _random_sparse_perm(rng, n, int(rng.integers(0, R + 1)))
    while P.dist_to_identity() > R:
        P = _random_sparse_perm(rng, n, R)
    return X, y, P, R


def check_swap_oracle(seed):
    """best_swap_exact and swap_delta_exact against full recomputation."""
    X, y, P, R = _random_state(seed)
    n = len(y)
    Htil = np.eye(n) - X @ np.linalg.solve(X.T @ X, X.T)

    def full_obj(Q):
        r = Htil @ Q.apply(y)
        return float(r @ r)

    ctx = SearchContext(y, factorize(X))
    state = SolverState.initial(ctx, P)
    cfg = SolverConfig(R=R)
    base = full_obj(P)
    scale = max(1.0, float(y @ y))
    deltas = {}
    for i, j in itertools.combinations(range(n), 2):
        exact = full_obj(P.swap(i, j)) - base
        got = local_search.swap_delta_exact(state, i, j, ctx)
        if abs(got - exact) > 1e-9 * scale:
            return False, f"delta mismatch at ({i},{j}): {got} vs {exact}"
        if P.dist_to_identity_after_swap(i, j) <= R:
            deltas[(i, j)] = exact
    best = min(deltas.values())
    tie = TIE_RTOL * float(y @ y)
    want = min(k for k, v in deltas.items() if v <= best + tie)
    got = local_search.best_swap_exact(state, ctx, cfg)
    if got is None or (got[0], got[1]) != want:
        return False, f"best swap {got} vs oracle {want} ({deltas[want]})"
    if abs(got[2] - deltas[want]) > 1e-9 * scale:
        return False, f"best delta {got[2]} vs {deltas[want]}"
    return True, ""


def definitional_staircases(y, v):
    """O(n^2) left-top / right-bottom membership straight from the definitions."""
    n = len(y)
    lt, rb = [], []
    for i in range(n):
        others = [(y[j], v[j]) for j in range(n) if (y[j], v[j]) != (y[i], v[i])]
        if not any(a <= y[i] and b >= v[i] for a, b in others):
            lt.append(i)
        if not any(a >= y[i] and b <= v[i] for a, b in others):
            rb.append(i)
    return set(lt), set(rb)


def _random_points(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 501))
    y = rng.standard_normal(n)
    v = 0.7 * y + 0.3 * rng.standard_normal(n) if seed % 2 else rng.standard_normal(n)
    return y, v


def check_staircase(seed):
    y, v = _random_points(seed)
    n = len(y)
    idx = build_staircases(y, v)
    lt, rb = definitional_staircases(y, v)
    if set(idx.s_lt.tolist()) != lt or set(idx.s_rb.tolist()) != rb:
        return False, "membership differs from definition"
    prod = (y[:, None] - y[None, :]) * (v[:, None] - v[None, :])
    want = min(0.0, float(prod.min()))
    i, j, val = staircase_argmin(idx, y, v)
    if val != want:
        return False, f"argmin value {val} vs full scan {want}"
    if val < 0 and prod[i, j] != val:
        return False, f"pair ({i},{j}) does not attain {val}"
    return True, ""


def check_one_step_witness(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 11))
    y = rng.integers(-3, 4, size=n).astype(float) if seed % 5 == 0 else rng.standard_normal(n)
    P = SparsePermutation.from_array(rng.permutation(n))
    P_star = SparsePermutation.from_array(rng.permutation(n))
    try:
        Pt, lhs, rhs = one_step_decrease_oracle(y, P, P_star)
    except WitnessNotFound as exc:
        return False, str(exc)
    if Pt is not None and not (Pt.dist(P) == 2 and lhs >= rhs):
        return False, "witness fails its own conditions"
    return True, ""


def check_exhaustive(seed, sparse=True):
    """Local search from the identity against brute force, R = n.

    With ``sparse`` the mismatch count is drawn from {0, 2, ..., n // 2};
    otherwise any r up to n is allowed, which includes draws where greedy
    swapping stalls at a local minimum.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 8))
    hi = n // 2 if sparse else n
    r = int(rng.choice([0] + list(range(2, hi + 1))))
    inst = gen_instance(n, 2, r, 0.0, "random", seed=seed)
    rep = solve(inst, SolverConfig(R=n))
    _, best = exhaustive_solve(inst, n)
    if abs(rep.objective - best) > 1e-10:
        return False, f"local search {rep.objective:.3g} vs exhaustive {best:.3g} (n={n}, r={r})"
    return True, ""


CHECKS = {
    "lemma1": (check_one_step_witness, 500, 1.0),
    "swap-oracle": (check_swap_oracle, 100, 1.0),
    "staircase": (check_staircase, 100, 1.0),
    "exhaustive": (check_exhaustive, 50, 48 / 50),
}


def run_suite(name, seeds=None, seed_base=0) -> SuiteResult:
    fn, count, frac = CHECKS[name]
    seeds = range(seed_base, seed_base + count) if seeds is None else list(seeds)
    seeds = list(seeds)
    failures = []
    for s in seeds:
        ok, why = fn(s)
        if not ok:
            failures.append((s, why))
    cases = len(seeds)
    required = int(np.ceil(frac * cases - 1e-9))
    return SuiteResult(name, cases, cases - len(failures), required, failures)


def run(suite="all", seed_base=0):
    names = SUITES if suite == "all" else (suite,)
    return [run_suite(n, seed_base=seed_base) for n in names]
