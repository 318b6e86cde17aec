"""Value types shared by every other module: ternary words, permutations,
Hamming distance and coordinate projections.

Everything visible to callers is 1-based (positions and permutation
values). Internally, bulk data lives in ``numpy`` arrays of ``uint8`` where
row ``i`` of a table holds the image of the ``i``-th ternary word in
lexicographic order (0 < 1 < 2, first trit most significant).
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class LengthMismatchError(ValueError):
    """Two sequences that must have equal length do not."""


class TernaryWord(tuple):
    """Immutable word over {0, 1, 2}."""

    def __new__(cls, trits: Iterable[int]):
        trits = tuple(int(t) for t in trits)
        if not trits:
            raise ValueError("a ternary word needs at least one trit")
        bad = [t for t in trits if t not in (0, 1, 2)]
        if bad:
            raise ValueError(f"not a ternary symbol: {bad[0]!r}")
        return super().__new__(cls, trits)

    @classmethod
    def from_index(cls, index: int, n: int) -> "TernaryWord":
        if not 0 <= index < 3**n:
            raise ValueError(f"index {index} out of range for length {n}")
        digits = []
        for _ in range(n):
            index, r = divmod(index, 3)
            digits.append(r)
        return cls(reversed(digits))

    @property
    def index(self) -> int:
        """Lexicographic rank of the word among all words of its length."""
        value = 0
        for t in self:
            value = 3 * value + t
        return value

    def __repr__(self):
        return f"TernaryWord({''.join(map(str, self))})"


class Permutation(tuple):
    """Permutation of {1..n} in one-line notation."""

    def __new__(cls, values: Iterable[int]):
        values = tuple(int(v) for v in values)
        if sorted(values) != list(range(1, len(values) + 1)):
            raise ValueError(f"{values} is not a permutation of 1..{len(values)}")
        return super().__new__(cls, values)

    def __repr__(self):
        return f"Permutation{tuple(self)}"


class IndexSet(frozenset):
    """Set of 1-based positions, e.g. the coordinates removed by a projection."""

    def __new__(cls, indices: Iterable[int] = ()):
        return super().__new__(cls, (int(i) for i in indices))

    def check(self, length: int) -> "IndexSet":
        bad = sorted(i for i in self if not 1 <= i <= length)
        if bad:
            raise IndexError(f"index {bad[0]} out of range 1..{length}")
        return self

    def keep_mask(self, length: int) -> np.ndarray:
        """Boolean mask over 0-based positions that survive the projection."""
        self.check(length)
        mask = np.ones(length, dtype=bool)
        mask[[i - 1 for i in self]] = False
        return mask

    def __repr__(self):
        return "{" + ",".join(map(str, sorted(self))) + "}"


def hamming_distance(a: Sequence, b: Sequence) -> int:
    """Number of coordinates in which ``a`` and ``b`` differ."""
    if len(a) != len(b):
        raise LengthMismatchError(f"lengths differ: {len(a)} != {len(b)}")
    return sum(1 for u, v in zip(a, b) if u != v)


def project_out(v: Sequence, X: Iterable[int]) -> tuple:
    """Delete the (1-based) positions in ``X`` from ``v``, keeping order."""
    X = IndexSet(X).check(len(v))
    return tuple(s for i, s in enumerate(v, start=1) if i not in X)


def swap_values(p: Sequence[int], pairs: Sequence[tuple[int, int]]) -> Permutation:
    """Exchange the values of each pair wherever they occur in ``p``."""
    p = Permutation(p)
    relabel = _swap_lookup(len(p), pairs)
    return Permutation(relabel[v] for v in p)


def _swap_lookup(n: int, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Lookup array ``r`` with ``r[v]`` the image of value ``v`` (index 0 unused)."""
    seen: set[int] = set()
    relabel = np.arange(n + 1, dtype=np.int64)
    for a, b in pairs:
        if not (1 <= a <= n and 1 <= b <= n):
            raise ValueError(f"swap pair ({a}, {b}) outside 1..{n}")
        if a == b or a in seen or b in seen:
            raise ValueError(f"swap pairs overlap at ({a}, {b})")
        seen.update((a, b))
        relabel[a], relabel[b] = b, a
    return relabel


# -- bulk helpers -----------------------------------------------------------

def all_words(n: int) -> np.ndarray:
    """All 3**n ternary words of length ``n`` as rows, in lexicographic order."""
    idx = np.arange(3**n, dtype=np.int64)
    return index_to_words(idx, n)


def index_to_words(idx: np.ndarray, n: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    out = np.empty((idx.shape[0], n), dtype=np.uint8)
    for pos in range(n - 1, -1, -1):
        idx, out[:, pos] = np.divmod(idx, 3)
    return out


def words_to_index(words: np.ndarray) -> np.ndarray:
    words = np.asarray(words)
    powers = 3 ** np.arange(words.shape[1] - 1, -1, -1, dtype=np.int64)
    return words.astype(np.int64) @ powers


def is_permutation_rows(rows: np.ndarray) -> np.ndarray:
    """Per-row flag: is the row a permutation of 1..width?"""
    rows = np.asarray(rows)
    width = rows.shape[1]
    expected = np.arange(1, width + 1)
    return (np.sort(rows, axis=1) == expected).all(axis=1)


def relabel_rows(rows: np.ndarray, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Vectorised :func:`swap_values` over a 2-D array of permutations."""
    width = rows.shape[1]
    lookup = _swap_lookup(max(width, int(rows.max(initial=0))), pairs)
    return lookup[rows].astype(rows.dtype)
