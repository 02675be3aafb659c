import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmregress.datagen import gen_instance
from mmregress.diagnostics import evaluate, linf_bound_log
from mmregress.errors import BadShape
from mmregress.linalg import factorize
from mmregress.local_search import (SearchContext, SolverConfig, SolverState, TIE_RTOL,
                                    best_swap_exact, objective, solve, step, swap_delta_exact)
from mmregress.permutation import SparsePermutation

from oracles import all_swaps_full, hat, residual_obj


def context(n, d, seed, dense=True):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    y = rng.standard_normal(n)
    return X, y, SearchContext(y, factorize(X), dense_threshold=2000 if dense else 0)


def random_perm(n, seed):
    return SparsePermutation.from_array(np.random.default_rng(seed).permutation(n))


def test_objective_at_truth():
    inst = gen_instance(40, 3, 8, 0.0, seed=1)
    ctx = SearchContext(inst.y, factorize(inst.X))
    assert objective(inst.truth.perm, ctx) <= 1e-16 * ctx.scale
    noisy = gen_instance(40, 3, 8, 0.3, seed=1)
    ctx = SearchContext(noisy.y, factorize(noisy.X))
    e = noisy.truth.noise
    want = float(e @ (np.eye(40) - hat(noisy.X)) @ e)
    assert objective(noisy.truth.perm, ctx) == pytest.approx(want, rel=1e-10)


def test_objective_matches_dense():
    X, y, ctx = context(8, 2, 3)
    P = random_perm(8, 4)
    r = (np.eye(8) - hat(X)) @ P.apply(y)
    assert objective(P, ctx) == pytest.approx(float(r @ r), rel=1e-10)


@pytest.mark.parametrize("dense", [True, False])
def test_swap_delta_all_pairs(dense):
    X, y, ctx = context(8, 3, 5, dense)
    P = random_perm(8, 6)
    state = SolverState.initial(ctx, P)
    for i, j in itertools.combinations(range(8), 2):
        full = residual_obj(X, P.swap(i, j).apply(y)) - residual_obj(X, P.apply(y))
        assert swap_delta_exact(state, i, j, ctx) == pytest.approx(full, rel=1e-9, abs=1e-12)


def test_swap_delta_equal_values_is_zero():
    X, y, ctx = context(6, 2, 7)
    y = y.copy()
    y[4] = y[1]
    ctx = SearchContext(y, factorize(X))
    assert swap_delta_exact(SolverState.initial(ctx), 1, 4, ctx) == 0.0


def test_correcting_swap_zeroes_objective():
    inst = gen_instance(30, 3, 0, 0.0, seed=2)
    y = inst.y.copy()
    y[[5, 17]] = y[[17, 5]]
    ctx = SearchContext(y, factorize(inst.X))
    state = SolverState.initial(ctx)
    assert swap_delta_exact(state, 5, 17, ctx) == pytest.approx(-state.obj, rel=1e-9)
    i, j, d = best_swap_exact(state, ctx, SolverConfig(R=30))
    assert (i, j) == (5, 17)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("dense", [True, False])
def test_best_swap_matches_brute_force(seed, dense):
    X, y, ctx = context(8, 2, seed, dense)
    P = random_perm(8, seed + 100)
    R = max(2, P.dist_to_identity())
    moves = all_swaps_full(X, y, P.to_array(), R)
    best = min(moves.values())
    want = min(k for k, v in moves.items() if v <= best + TIE_RTOL * float(y @ y))
    i, j, d = best_swap_exact(SolverState.initial(ctx, P), ctx, SolverConfig(R=R))
    assert (i, j) == want
    assert d == pytest.approx(moves[want], rel=1e-9, abs=1e-12)


def test_best_swap_at_global_min_is_nonnegative():
    inst = gen_instance(20, 2, 4, 0.0, seed=3)
    ctx = SearchContext(inst.y, factorize(inst.X))
    state = SolverState.initial(ctx, inst.truth.perm)
    assert best_swap_exact(state, ctx, SolverConfig(R=20))[2] >= -1e-12


def test_saturated_radius_respected():
    X, y, ctx = context(6, 2, 9)
    cfg = SolverConfig(R=4)
    for pi in itertools.permutations(range(6)):
        P = SparsePermutation.from_array(pi)
        if P.dist_to_identity() != 4:
            continue
        res = best_swap_exact(SolverState.initial(ctx, P), ctx, cfg)
        assert res is not None
        assert P.dist_to_identity_after_swap(res[0], res[1]) <= 4


def test_step_decreases_and_refresh_is_accurate():
    inst = gen_instance(80, 4, 12, 0.05, seed=4)
    ctx = SearchContext(inst.y, factorize(inst.X))
    cfg = SolverConfig(R=12, refresh_every=3)
    state = SolverState.initial(ctx)
    for _ in range(8):
        before = state.obj
        state, rec = step(state, ctx, cfg)
        if not rec.accepted:
            break
        assert state.obj < before
        assert rec.decrease == pytest.approx(before - state.obj)
        fresh = objective(state.P, ctx)
        assert abs(state.obj - fresh) <= 1e-8 * ctx.scale
        w = ctx.proj.apply_residual(state.P.apply(ctx.y))
        assert np.linalg.norm(state.w - w) <= 1e-8 * np.sqrt(ctx.scale)


def test_small_trace_converges_within_3r():
    inst = gen_instance(100, 5, 5, 0.0, seed=0)
    rep = solve(inst, SolverConfig(R=100))
    reached = [k for k, t in enumerate(rep.trace) if t.obj_after <= 1e-12 * float(inst.y @ inst.y)]
    assert reached and reached[0] < 15


def test_no_mismatch_single_iteration():
    inst = gen_instance(50, 4, 0, 0.0, seed=5)
    rep = solve(inst, SolverConfig(R=50))
    assert rep.perm == SparsePermutation.identity(50)
    assert np.linalg.norm(rep.beta - inst.truth.beta) <= 1e-10
    assert rep.iterations == 1 and not rep.trace[0].accepted


def test_table_row_exact_recovery():
    inst = gen_instance(500, 10, 50, 0.0, seed=1)
    rep = solve(inst, SolverConfig(R=500))
    m = evaluate(rep, inst)
    assert m.hamming == 0 and m.beta_error <= 1e-8


@pytest.mark.parametrize("r,seed", [(5, 0), (10, 1), (20, 2)])
def test_linear_convergence_and_support(r, seed):
    inst = gen_instance(500, 10, r, 0.0, seed=seed)
    R = 10 * r
    rep = solve(inst, SolverConfig(R=R))
    lam = 1 - 1 / (18 * R)
    budget = math.ceil(math.log(1e-12) / math.log(lam))
    hits = [k for k, t in enumerate(rep.trace) if t.obj_after <= 1e-12 * rep.initial_objective]
    assert hits and hits[0] + 1 <= budget
    assert set(inst.truth.perm.supp()) <= set(rep.perm.supp())
    for lhs, bound in linf_bound_log(rep, inst, 0.0):
        assert lhs <= bound + 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_noisy_objective_ceiling(seed):
    inst = gen_instance(1000, 10, 10, 0.1, seed=seed)
    rep = solve(inst, SolverConfig(R=10))
    m = evaluate(rep, inst)
    assert m.relative_obj <= 36


def test_max_iter_and_tol():
    inst = gen_instance(100, 3, 20, 0.0, seed=6)
    rep = solve(inst, SolverConfig(R=100, max_iter=3))
    assert rep.iterations == 3 and all(t.accepted for t in rep.trace)
    big = solve(inst, SolverConfig(R=100, tol=1e9))
    assert big.iterations == 1 and big.perm.dist_to_identity() == 0


@pytest.mark.parametrize("kw", [dict(R=1), dict(R=5, tol=-1), dict(R=5, max_iter=0),
                                dict(R=5, mode="slow"), dict(R=5, tie_break="random")])
def test_config_validation(kw):
    with pytest.raises(BadShape):
        SolverConfig(**kw)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(6, 40), r=st.integers(2, 6))
def test_trace_monotone(seed, n, r):
    inst = gen_instance(n, 2, min(r, n), 0.05, seed=seed)
    rep = solve(inst, SolverConfig(R=max(2, r)))
    objs = [rep.initial_objective] + [t.obj_after for t in rep.trace]
    assert all(b <= a for a, b in zip(objs, objs[1:]))
    assert all(t.decrease > 0 for t in rep.trace[:-1])
    assert all(t.dist_to_identity <= max(2, r) for t in rep.trace)
