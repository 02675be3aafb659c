import collections
import json

import numpy as np
import pytest
from scipy import stats

from mmregress.datagen import (gen_beta, gen_design, gen_instance, place_mismatch_equispaced,
                               place_mismatch_random, read_instance, scramble, write_instance)
from mmregress.errors import BadShape


def literal_equispaced(y, r):
    """The two argmin rules transcribed directly over the sorted responses."""
    order = sorted(range(len(y)), key=lambda i: (y[i], i))
    ys = [y[i] for i in order]
    a = [ys[0] + s * (ys[-1] - ys[0]) / (r - 1) for s in range(r)]
    out, lo = [], 0
    for s in range(r):
        if lo >= len(ys):
            break
        best = min(range(lo, len(ys)), key=lambda i: abs(ys[i] - a[s]))
        out.append(order[best])
        lo = best + 1
    return out


def test_design_reproducible_and_centered():
    A = gen_design(200, 5, 3)
    assert np.array_equal(A, gen_design(200, 5, 3))
    assert abs(A.mean()) <= 4 / np.sqrt(A.size)
    assert abs(A.var() - 1) < 0.15
    with pytest.raises(BadShape):
        gen_design(3, 3, 0)


def test_beta_unit_norm_and_symmetric():
    assert abs(np.linalg.norm(gen_beta(7, 1)) - 1) <= 1e-12
    assert gen_beta(1, 5)[0] in (1.0, -1.0)
    signs = np.array([gen_beta(3, s) > 0 for s in range(10_000)])
    assert np.all(np.abs(signs.mean(axis=0) - 0.5) <= 5 * 0.5 / 100)
    with pytest.raises(BadShape):
        gen_beta(0, 0)


def test_random_placement():
    assert place_mismatch_random(10, 0, 0).size == 0
    assert place_mismatch_random(10, 10, 0).tolist() == list(range(10))
    n, r, draws = 20, 5, 10_000
    counts = np.zeros(n)
    for s in range(draws):
        idx = place_mismatch_random(n, r, s)
        assert len(set(idx.tolist())) == r
        counts[idx] += 1
    p = r / n
    assert np.all(np.abs(counts - draws * p) <= 5 * np.sqrt(draws * p * (1 - p)))
    with pytest.raises(BadShape):
        place_mismatch_random(5, 6, 0)


def test_equispaced_examples():
    assert sorted(place_mismatch_equispaced(np.arange(5.0), 5).tolist()) == [0, 1, 2, 3, 4]
    assert place_mismatch_equispaced(np.array([0, 0.1, 10]), 2).tolist() == [0, 2]
    with pytest.raises(BadShape):
        place_mismatch_equispaced(np.arange(3.0), 4)


@pytest.mark.parametrize("seed", range(20))
def test_equispaced_matches_literal_rules(seed):
    y = np.random.default_rng(seed).standard_normal(50)
    assert place_mismatch_equispaced(y, 7).tolist() == literal_equispaced(y.tolist(), 7)


def test_equispaced_shortfall_recorded():
    y = np.array([0.0, 0.0, 0.0, 0.0, 1.0])  # every level after the first lands on the last point
    idx = place_mismatch_equispaced(y, 4)
    assert len(idx) < 4
    inst = gen_instance(40, 2, 40, 0.0, "equispaced", seed=2)
    assert inst.truth.shortfall == 40 - len(place_mismatch_equispaced(inst.X @ inst.truth.beta, 40))


def test_scramble_two_indices_fair():
    outcomes = collections.Counter(scramble([3, 8], s, 10).dist_to_identity() for s in range(4000))
    assert set(outcomes) <= {0, 2}
    assert abs(outcomes[2] / 4000 - 0.5) <= 5 * 0.5 / np.sqrt(4000)


def test_scramble_three_indices_uniform():
    counts = collections.Counter(tuple(scramble([1, 4, 6], s, 8).to_array()[[1, 4, 6]])
                                 for s in range(10_000))
    assert len(counts) == 6
    assert stats.chisquare(list(counts.values())).pvalue > 1e-4
    P = scramble([1, 4, 6], 0, 8)
    assert set(P.supp()) <= {1, 4, 6}
    with pytest.raises(BadShape):
        scramble([2], 0, 5)


@pytest.mark.parametrize("scheme", ["random", "equispaced"])
def test_instance_model_identity(scheme):
    inst = gen_instance(60, 4, 10, 0.2, scheme, seed=9)
    t = inst.truth
    assert np.array_equal(t.perm.apply(inst.y), inst.X @ t.beta + t.noise)
    assert t.perm.dist_to_identity() <= 10
    again = gen_instance(60, 4, 10, 0.2, scheme, seed=9)
    assert np.array_equal(again.y, inst.y) and np.array_equal(again.X, inst.X)


def test_noiseless_and_unshuffled():
    inst = gen_instance(30, 3, 0, 0.0, seed=1)
    assert inst.truth.perm.dist_to_identity() == 0
    assert np.array_equal(inst.y, inst.X @ inst.truth.beta)


@pytest.mark.parametrize("args", [(10, 2, 1, 0.0), (10, 2, 11, 0.0), (10, 2, 3, -1.0)])
def test_instance_rejects(args):
    with pytest.raises(BadShape):
        gen_instance(*args)


def test_files_round_trip(tmp_path):
    inst = gen_instance(25, 3, 6, 0.1, seed=4)
    write_instance(inst, tmp_path / "a")
    back = read_instance(tmp_path / "a")
    assert np.array_equal(back.X, inst.X) and np.array_equal(back.y, inst.y)
    assert back.truth.perm == inst.truth.perm
    assert np.array_equal(back.truth.beta, inst.truth.beta)
    assert np.allclose(back.truth.noise, inst.truth.noise, atol=1e-14)
    doc = json.loads((tmp_path / "a" / "truth.json").read_text())
    assert set(doc) == {"beta", "perm", "r", "sigma", "scheme", "seed"}
    assert len((tmp_path / "a" / "X.csv").read_text().splitlines()) == 25
    write_instance(inst, tmp_path / "b")
    for name in ("X.csv", "y.csv", "truth.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
