"""Sparse permutations of {0, ..., n-1}.

A permutation ``P`` acts on vectors by ``(P u)[i] = u[pi(i)]``, where ``pi`` is
its index map. Only the displaced indices (``pi(i) != i``) are stored.
"""
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, BadShape


class SparsePermutation:
    """Immutable permutation stored by its displaced entries."""

    __slots__ = ("n", "_moved", "_arrays")

    def __init__(self, n: int, moved: Mapping[int, int] = None):
        n = int(n)
        if n < 0:
            raise BadShape("n must be non-negative")
        moved = {} if moved is None else {int(i): int(j) for i, j in moved.items()}
        moved = {i: j for i, j in moved.items() if i != j}
        keys = set(moved)
        if set(moved.values()) != keys:
            raise BadShape("moved entries do not form a bijection on their keys")
        if keys and (min(keys) < 0 or max(keys) >= n):
            raise IndexOutOfRange("moved index outside [0, n)")
        self.n = n
        self._moved = moved
        self._arrays = None

    @classmethod
    def identity(cls, n):
        return cls(n)

    @classmethod
    def from_array(cls, pi):
        pi = np.asarray(pi, dtype=np.int64)
        n = pi.shape[0]
        if not np.array_equal(np.sort(pi), np.arange(n)):
            raise BadShape("not a permutation array")
        idx = np.flatnonzero(pi != np.arange(n))
        return cls(n, dict(zip(idx.tolist(), pi[idx].tolist())))

    @classmethod
    def transposition(cls, n, i, j):
        return cls.identity(n).swap(i, j)

    @property
    def moved(self):
        return dict(self._moved)

    def image(self, i: int) -> int:
        return self._moved.get(i, i)

    def __call__(self, i):
        return self.image(i)

    def _key_arrays(self):
        if self._arrays is None:
            keys = np.fromiter(self._moved.keys(), dtype=np.int64, count=len(self._moved))
            vals = np.fromiter(self._moved.values(), dtype=np.int64, count=len(self._moved))
            self._arrays = (keys, vals)
        return self._arrays

    def to_array(self):
        pi = np.arange(self.n, dtype=np.int64)
        keys, vals = self._key_arrays()
        pi[keys] = vals
        return pi

    def apply(self, u):
        """Return ``P u``, i.e. ``result[i] = u[pi(i)]``."""
        u = np.asarray(u)
        if u.shape[:1] != (self.n,):
            raise DimensionMismatch(f"expected leading dimension {self.n}, got {u.shape}")
        out = u.copy()
        keys, vals = self._key_arrays()
        out[keys] = u[vals]
        return out

    def inverse(self):
        return SparsePermutation(self.n, {j: i for i, j in self._moved.items()})

    def supp(self):
        """Indices not fixed by the permutation, sorted."""
        return sorted(self._moved)

    def dist(self, other: "SparsePermutation") -> int:
        """Number of indices where the two index maps differ."""
        if other.n != self.n:
            raise DimensionMismatch("permutations act on different ground sets")
        keys = set(self._moved) | set(other._moved)
        return sum(1 for i in keys if self.image(i) != other.image(i))

    def dist_to_identity(self) -> int:
        return len(self._moved)

    def _check_pair(self, i, j):
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexOutOfRange(f"swap indices ({i}, {j}) outside [0, {self.n})")
        if i == j:
            raise IndexOutOfRange("swap needs two distinct indices")

    def swap(self, i: int, j: int) -> "SparsePermutation":
        """Exchange the images of i and j."""
        i, j = int(i), int(j)
        self._check_pair(i, j)
        pi_i, pi_j = self.image(i), self.image(j)
        moved = dict(self._moved)
        for k, v in ((i, pi_j), (j, pi_i)):
            if k == v:
                moved.pop(k, None)
            else:
                moved[k] = v
        return SparsePermutation(self.n, moved)

    def dist_to_identity_after_swap(self, i: int, j: int) -> int:
        i, j = int(i), int(j)
        self._check_pair(i, j)
        pi_i, pi_j = self.image(i), self.image(j)
        return (len(self._moved) - (pi_i != i) - (pi_j != j)
                + (pi_j != i) + (pi_i != j))

    def to_json(self):
        return {"n": self.n, "moved": {str(i): j for i, j in sorted(self._moved.items())}}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["n"], {int(i): int(j) for i, j in obj["moved"].items()})

    def __eq__(self, other):
        if not isinstance(other, SparsePermutation):
            return NotImplemented
        return self.n == other.n and self._moved == other._moved

    def __hash__(self):
        return hash((self.n, frozenset(self._moved.items())))

    def __repr__(self):
        return f"SparsePermutation(n={self.n}, moved={dict(sorted(self._moved.items()))})"


def dist(P: SparsePermutation, Q: SparsePermutation) -> int:
    return P.dist(Q)
