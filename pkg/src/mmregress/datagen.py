"""Synthetic mismatched-regression instances and their on-disk format.

Instance directories hold ``X.csv`` (n rows of d values), ``y.csv`` (n rows)
and, for synthetic data, ``truth.json``. Indices are 0-based and decimals are
written with 17 significant digits so doubles round-trip exactly.

Random streams come from numpy's Philox counter-based generator seeded with
``numpy.random.SeedSequence``; :data:`GENERATOR_VERSION` names the contract.
"""
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BadShape
from .permutation import SparsePermutation

GENERATOR_VERSION = f"philox4x64/seedsequence (numpy {np.__version__.split('.')[0]}.x)"
SCHEMES = ("random", "equispaced")


@dataclass
class GroundTruth:
    perm: SparsePermutation
    beta: np.ndarray
    noise: np.ndarray
    r: int
    sigma: float
    scheme: str
    seed: Optional[int]
    shortfall: int = 0


@dataclass
class ProblemInstance:
    """Observed responses ``y`` and design ``X``, with optional ground truth.

    When ``truth`` is present, ``truth.perm.apply(y) == X @ truth.beta + truth.noise``.
    """

    y: np.ndarray
    X: np.ndarray
    truth: Optional[GroundTruth] = None

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def gen_design(n, d, seed):
    if not n > d >= 1:
        raise BadShape(f"need n > d >= 1, got n={n}, d={d}")
    return make_rng(seed).standard_normal((n, d))


def gen_beta(d, seed):
    """Coefficient vector drawn uniformly from the unit sphere in R^d."""
    if d < 1:
        raise BadShape("d must be >= 1")
    g = make_rng(seed).standard_normal(d)
    return g / np.linalg.norm(g)


def place_mismatch_random(n, r, seed):
    if not 0 <= r <= n:
        raise BadShape(f"need 0 <= r <= n, got r={r}, n={n}")
    return np.sort(make_rng(seed).choice(n, size=r, replace=False))


def place_mismatch_equispaced(y, r):
    """Indices whose responses lie closest to ``r`` equi-spaced levels.

    The levels run from min(y) to max(y). Scanning the sorted responses, each
    level picks the nearest remaining point strictly after the previous pick,
    so fewer than ``r`` indices come back when the scan runs out of points.
    Returns original (unsorted) indices in sorted-response order.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if r == 0:
        return np.empty(0, dtype=np.int64)
    if not 2 <= r <= n:
        raise BadShape(f"equi-spaced scheme needs 2 <= r <= n, got r={r}, n={n}")
    order = np.argsort(y, kind="stable")
    ys = y[order]
    levels = np.linspace(ys[0], ys[-1], r)
    picked = []
    start = 0
    for a in levels:
        if start >= n:
            break
        k = start + int(np.argmin(np.abs(ys[start:] - a)))
        picked.append(k)
        start = k + 1
    return order[np.array(picked, dtype=np.int64)]


def scramble(indices, seed, n):
    """Uniformly random permutation of ``indices``, identity elsewhere."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.shape[0] < 2:
        raise BadShape("need at least two indices to scramble")
    if len(np.unique(indices)) != len(indices) or indices.min() < 0 or indices.max() >= n:
        raise BadShape("indices must be distinct and inside [0, n)")
    images = make_rng(seed).permutation(indices)
    return SparsePermutation(n, dict(zip(indices.tolist(), images.tolist())))


def gen_instance(n, d, r, sigma, scheme="random", seed=0) -> ProblemInstance:
    """Synthetic instance with Gaussian design, unit-norm coefficients and noise."""
    if scheme not in SCHEMES:
        raise BadShape(f"unknown scheme {scheme!r}")
    if not 0 <= r <= n:
        raise BadShape(f"need 0 <= r <= n, got r={r}, n={n}")
    if r == 1:
        raise BadShape("a single index cannot be mismatched; use r = 0 or r >= 2")
    if sigma < 0:
        raise BadShape("sigma must be non-negative")
    s_design, s_beta, s_noise, s_place, s_perm = np.random.SeedSequence(seed).spawn(5)
    X = gen_design(n, d, s_design)
    beta = gen_beta(d, s_beta)
    noise = sigma * make_rng(s_noise).standard_normal(n) if sigma > 0 else np.zeros(n)
    clean = X @ beta + noise

    if scheme == "random":
        idx = place_mismatch_random(n, r, s_place)
    else:
        idx = place_mismatch_equispaced(clean, r)
    shortfall = r - len(idx)
    perm = scramble(idx, s_perm, n) if len(idx) >= 2 else SparsePermutation.identity(n)

    y = np.empty(n)
    y[perm.to_array()] = clean
    truth = GroundTruth(perm, beta, noise, r, float(sigma), scheme, seed, shortfall)
    return ProblemInstance(y, X, truth)


def write_instance(inst: ProblemInstance, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    np.savetxt(os.path.join(out_dir, "X.csv"), inst.X, fmt="%.17g", delimiter=",")
    np.savetxt(os.path.join(out_dir, "y.csv"), inst.y, fmt="%.17g")
    if inst.truth is not None:
        t = inst.truth
        doc = {
            "beta": [float(b) for b in t.beta],
            "perm": t.perm.to_json(),
            "r": int(t.r),
            "sigma": float(t.sigma),
            "scheme": t.scheme,
            "seed": t.seed,
        }
        with open(os.path.join(out_dir, "truth.json"), "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")


def read_instance(in_dir) -> ProblemInstance:
    X = np.loadtxt(os.path.join(in_dir, "X.csv"), delimiter=",", ndmin=2)
    y = np.loadtxt(os.path.join(in_dir, "y.csv"), ndmin=1)
    if X.shape[0] != y.shape[0]:
        raise BadShape(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    truth = None
    tpath = os.path.join(in_dir, "truth.json")
    if os.path.exists(tpath):
        with open(tpath) as f:
            doc = json.load(f)
        perm = SparsePermutation.from_json(doc["perm"])
        beta = np.asarray(doc["beta"], dtype=float)
        # the noise is not stored; it is implied by the model identity
        sigma = float(doc["sigma"])
        noise = perm.apply(y) - X @ beta if sigma > 0 else np.zeros(len(y))
        truth = GroundTruth(perm, beta, noise, int(doc["r"]), sigma,
                            doc["scheme"], doc.get("seed"))
    return ProblemInstance(y, X, truth)
