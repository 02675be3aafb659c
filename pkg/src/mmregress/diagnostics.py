"""Evaluation metrics and theory-facing diagnostics.

Includes brute-force oracles that only make sense for tiny n: the one-step
decrease witness search and an exhaustive solver over all permutations.
"""
import itertools
import math
from dataclasses import dataclass, asdict, field
from typing import Optional

import numpy as np

from .errors import MissingTruth, WitnessNotFound, TooLarge, BadShape
from .linalg import ProjectionOperator, factorize
from .local_search import TIE_RTOL
from .permutation import SparsePermutation


@dataclass
class EvalMetrics:
    hamming: int
    beta_error: float
    relative_obj: Optional[float]
    relative_beta_error: Optional[float]
    denoise_error: float

    def to_json(self):
        return asdict(self)


def _truth(instance):
    if instance.truth is None:
        raise MissingTruth("instance carries no ground truth")
    return instance.truth


def evaluate(report, instance, proj: ProjectionOperator = None) -> EvalMetrics:
    """Compare a solve report against the instance's ground truth.

    ``relative_obj`` is None when the noise has no component outside col(X)
    and ``relative_beta_error`` is None when sigma is 0.
    """
    t = _truth(instance)
    proj = proj or getattr(report, "projection", None) or factorize(instance.X)
    beta_err = float(np.linalg.norm(report.beta - t.beta) / np.linalg.norm(t.beta))
    w = proj.apply_residual(report.perm.apply(instance.y))
    obj = float(w @ w)
    noise_res = proj.apply_residual(t.noise)
    noise_obj = float(noise_res @ noise_res)
    rel_obj = obj / noise_obj if noise_obj > 0 else None
    rel_beta = beta_err / t.sigma if t.sigma > 0 else None
    fit_hat = report.perm.inverse().apply(instance.X @ report.beta)
    fit_true = t.perm.inverse().apply(instance.X @ t.beta)
    denoise = float(np.sum((fit_hat - fit_true) ** 2) / instance.n)
    return EvalMetrics(report.perm.dist(t.perm), beta_err, rel_obj, rel_beta, denoise)


def one_step_decrease_oracle(y, P: SparsePermutation, P_star: SparsePermutation):
    """Search every transposition of P for a one-step-decrease witness.

    A witness ``Pt`` satisfies ``dist(Pt, P) = 2``, disagrees with ``P_star``
    only where ``P`` already does, and

        ||P y - P* y||^2 - ||Pt y - P* y||^2 >= 0.5 ||P y - P* y||_inf^2.

    Returns ``(Pt, lhs, rhs)`` for the witness with the largest ``lhs``. When
    ``P y == P* y`` the inequality is vacuous and ``(None, 0.0, 0.0)`` comes back.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n > 14:
        raise TooLarge("brute-force witness search is limited to n <= 14")
    target = P_star.apply(y)
    gap = P.apply(y) - target
    rhs = 0.5 * float(np.max(np.abs(gap))) ** 2 if n else 0.0
    if rhs == 0.0:
        return None, 0.0, 0.0
    base = float(gap @ gap)
    pi, pi_star = P.to_array(), P_star.to_array()
    wrong = pi != pi_star
    best = None
    for i, j in itertools.combinations(range(n), 2):
        new_pi = pi.copy()
        new_pi[i], new_pi[j] = pi[j], pi[i]
        if np.any((new_pi != pi_star) & ~wrong):
            continue
        g = y[new_pi] - target
        lhs = base - float(g @ g)
        if lhs >= rhs and (best is None or lhs > best[1]):
            best = (SparsePermutation.from_array(new_pi), lhs, rhs)
    if best is None:
        raise WitnessNotFound(f"no witness for P={P!r}, P*={P_star!r}")
    return best


def exhaustive_solve(instance, R):
    """Global minimizer of ||(I - H) P y||^2 over all P with dist(P, I) <= R.

    Ties within ``TIE_RTOL * ||y||^2`` go to the lexicographically first index map.
    """
    n = instance.n
    if n > 8:
        raise TooLarge("exhaustive search is limited to n <= 8")
    y = np.asarray(instance.y, dtype=float)
    q = factorize(instance.X).q_factor
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    perms = perms[np.sum(perms != np.arange(n), axis=1) <= R]
    Y = y[perms]
    res = Y - (Y @ q) @ q.T
    obj = np.einsum("ij,ij->i", res, res)
    k = int(np.flatnonzero(obj <= obj.min() + TIE_RTOL * float(y @ y))[0])
    return SparsePermutation.from_array(perms[k]), float(obj[k])


def restricted_projection_norm(proj: ProjectionOperator, m, budget=20000, seed=0):
    """Largest ``||H u||^2 / ||u||^2`` over u with at most m nonzeros.

    For a projector ``||H u||^2 = u^T H u``, so each support S contributes
    ``lambda_max(H_SS) = sigma_max(Q_S)^2``. All supports are enumerated when
    there are at most ``budget`` of them (tag "exact"); otherwise ``budget``
    random supports give a lower bound (tag "estimate").

    Returns ``(value, tag)``.
    """
    n = proj.n
    if not 1 <= m <= n:
        raise BadShape(f"need 1 <= m <= n, got m={m}")
    q = proj.q_factor
    if m == 1:
        return float(proj.leverage.max()), "exact"
    total = math.comb(n, m)
    if total <= budget:
        supports = itertools.combinations(range(n), m)
        tag = "exact"
    else:
        rng = np.random.default_rng(seed)
        supports = (rng.choice(n, size=m, replace=False) for _ in range(budget))
        tag = "estimate"
    best = 0.0
    batch = max(1, 200000 // (m * proj.d))
    while True:
        chunk = list(itertools.islice(supports, batch))
        if not chunk:
            break
        blocks = q[np.array(chunk)]
        s = np.linalg.svd(blocks, compute_uv=False)
        best = max(best, float(s[:, 0].max()) ** 2)
    return min(best, 1.0), tag


@dataclass
class AssumptionEstimates:
    """Measured constants of the convergence assumptions.

    ``rho`` is max(rho_4, rho_2R / R), the smallest value satisfying both
    restricted-projection conditions as measured.
    """

    L: float
    U: float
    sigma_bar: float
    rho: float
    rho4: float
    rho2R: float
    rho_tag: str
    gamma_bar: float
    gates: dict = field(default_factory=dict)

    def to_json(self):
        return asdict(self)


def measure_assumptions(instance, R, budget=20000, seed=0, proj=None) -> AssumptionEstimates:
    t = _truth(instance)
    proj = proj or factorize(instance.X)
    n, d = instance.n, instance.d
    y = instance.y
    supp = t.perm.supp()
    disp = np.abs(t.perm.apply(y) - y)[supp]
    L = float(disp.min()) if len(supp) else math.inf
    U = float(y.max() - y.min())

    eps = t.noise
    h_eps = proj.apply_hat(eps)
    r_eps = eps - h_eps
    sigma_bar = max(float(np.max(np.abs(eps))), float(np.max(np.abs(r_eps))),
                    float(np.linalg.norm(h_eps)) / math.sqrt(d))

    rho4, tag4 = restricted_projection_norm(proj, min(4, n), budget, seed)
    rho2R, tag2R = restricted_projection_norm(proj, min(2 * R, n), budget, seed)
    rho = max(rho4, rho2R / R)
    tag = "exact" if tag4 == tag2R == "exact" else "estimate"
    gamma_bar = float(np.linalg.svd(proj.r_factor, compute_uv=False).min() ** 2 / n)

    sigma = t.sigma
    ratio = (L / U) ** 2 if U > 0 and math.isfinite(L) else math.inf
    noise_cap = min(0.5, (rho * d) ** -0.5 if rho > 0 else math.inf) * (L ** 2 / (80 * U) if U > 0 else math.inf)
    gates = {
        "restricted_projection": R * rho <= ratio / 90,
        "noise_bound": sigma_bar <= noise_cap,
        "squared_radius": R ** 2 * rho <= 0.1,
        "noise_floor": (sigma_bar ** 2 <= sigma ** 2 * min(n / (660 * R ** 2), n / (5 * d * R))
                        and float(r_eps @ r_eps) >= 0.5 * n * sigma ** 2),
    }
    return AssumptionEstimates(L, U, sigma_bar, rho, rho4, rho2R, tag, gamma_bar, gates)


def replay_permutations(records, n):
    """Yield the iterate P^(k) before each trace record, replaying accepted swaps."""
    P = SparsePermutation.identity(n)
    for rec in records:
        yield P
        if rec.accepted and rec.i >= 0:
            P = P.swap(rec.i, rec.j)


def linf_bound_log(report, instance, sigma_bar):
    """Per-iteration ``(||P^(k) y - P* y||_inf^2, 800 sigma_bar^2 + 10 G(P^(k)))``."""
    t = _truth(instance)
    target = t.perm.apply(instance.y)
    out = []
    for P, rec in zip(replay_permutations(report.trace, instance.n), report.trace):
        lhs = float(np.max(np.abs(P.apply(instance.y) - target))) ** 2
        out.append((lhs, 800 * sigma_bar ** 2 + 10 * rec.gap))
    return out
