"""Thin-QR projection operator for the hat matrix and residual maker.

The n x n matrices H = X (X^T X)^{-1} X^T and I - H are never formed unless
explicitly requested through :meth:`ProjectionOperator.dense_hat`.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, RankDeficient, BadShape

RANK_TOL = 1e-8
# largest n for which dense_hat() is allowed by default (n^2 doubles = 32 MB)
DENSE_MAX_N = 2000


@dataclass(frozen=True, eq=False)
class ProjectionOperator:
    """Orthogonal projector onto col(X), stored as a thin QR factorization.

    Attributes
    ----------
    q_factor : (n, d) array with orthonormal columns.
    r_factor : (d, d) upper-triangular array with ``X = q_factor @ r_factor``.
    """

    q_factor: np.ndarray
    r_factor: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.q_factor.shape[0]

    @property
    def d(self) -> int:
        return self.q_factor.shape[1]

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim != 1 or u.shape[0] != self.n:
            raise DimensionMismatch(f"expected vector of length {self.n}, got shape {u.shape}")
        return u

    def apply_hat(self, u):
        """Return H u."""
        u = self._check(u)
        return self.q_factor @ (self.q_factor.T @ u)

    def apply_residual(self, u):
        """Return (I - H) u."""
        u = self._check(u)
        return u - self.q_factor @ (self.q_factor.T @ u)

    def solve_beta(self, rhs):
        """Least-squares coefficients argmin_b ||rhs - X b||^2."""
        rhs = self._check(rhs)
        return scipy.linalg.solve_triangular(self.r_factor, self.q_factor.T @ rhs)

    @property
    def leverage(self):
        """Diagonal of H (squared row norms of the Q factor)."""
        h = self._cache.get("leverage")
        if h is None:
            h = np.einsum("ij,ij->i", self.q_factor, self.q_factor)
            self._cache["leverage"] = h
        return h

    def hat_entries(self, i, j):
        """H[i, j] for index arrays (or scalars) i and j, O(d) per entry."""
        q = self.q_factor
        return np.einsum("...k,...k->...", q[i], q[j])

    def dense_hat(self, max_n=DENSE_MAX_N):
        """Materialize the n x n hat matrix (cached). Refuses when n > max_n."""
        if self.n > max_n:
            raise BadShape(f"dense hat matrix refused for n={self.n} > {max_n}")
        H = self._cache.get("dense")
        if H is None:
            H = self.q_factor @ self.q_factor.T
            self._cache["dense"] = H
        return H


def factorize(X, rank_tol=RANK_TOL) -> ProjectionOperator:
    """Householder thin QR of the design matrix.

    Raises
    ------
    BadShape
        If X is not 2-D with n > d >= 1, or has non-finite entries.
    RankDeficient
        If the smallest |R_kk| is below ``rank_tol`` times the largest.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise BadShape("design matrix must be 2-D")
    n, d = X.shape
    if not n > d >= 1:
        raise BadShape(f"need n > d >= 1, got n={n}, d={d}")
    if not np.all(np.isfinite(X)):
        raise BadShape("design matrix has non-finite entries")
    q, r = scipy.linalg.qr(X, mode="economic", check_finite=False)
    diag = np.abs(np.diag(r))
    if diag.min() <= rank_tol * diag.max():
        raise RankDeficient(
            f"X is numerically rank deficient (min |R_kk| / max |R_kk| = {diag.min() / diag.max():.3g})"
        )
    return ProjectionOperator(q, r)


def apply_hat(P: ProjectionOperator, u):
    return P.apply_hat(u)


def apply_residual(P: ProjectionOperator, u):
    return P.apply_residual(u)


def solve_beta(P: ProjectionOperator, rhs):
    return P.solve_beta(rhs)
