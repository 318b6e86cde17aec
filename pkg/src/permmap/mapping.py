"""Base class for mappings from ternary words to permutations."""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .core import Permutation, TernaryWord, all_words, index_to_words, words_to_index

# Mappings with at most this many domain words are materialised on first use.
MATERIALIZE_LIMIT = 3**10


class Mapping:
    """A total function from length-``n`` ternary words into ``S_{n+k}``.

    Subclasses implement :meth:`_evaluate`, a vectorised evaluator taking a
    ``(m, n)`` array of trits and returning the ``(m, n+k)`` array of images.
    """

    def __init__(self, n: int, k: int, name: str = "mapping"):
        if n < 1 or k < 0:
            raise ValueError(f"bad dimensions n={n}, k={k}")
        self.n = n
        self.k = k
        self.name = name
        self._outputs: np.ndarray | None = None

    @property
    def length(self) -> int:
        """Length of the output permutations."""
        return self.n + self.k

    @property
    def domain_size(self) -> int:
        return 3**self.n

    @property
    def materialized(self) -> bool:
        return self._outputs is not None

    def _evaluate(self, words: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate_many(self, words: np.ndarray) -> np.ndarray:
        words = np.asarray(words, dtype=np.uint8)
        if words.ndim != 2 or words.shape[1] != self.n:
            raise ValueError(f"{self.name} expects words of length {self.n}")
        if self._outputs is None and self.domain_size <= MATERIALIZE_LIMIT:
            self.outputs()
        if self._outputs is not None:
            return self._outputs[words_to_index(words)]
        return self._evaluate(words)

    def evaluate_indices(self, idx: np.ndarray) -> np.ndarray:
        """Images of the words with the given lexicographic ranks."""
        if self._outputs is not None:
            return self._outputs[idx]
        return self.evaluate_many(index_to_words(idx, self.n))

    def outputs(self, force: bool = False) -> np.ndarray:
        """Full image array, row ``i`` being the image of word rank ``i``.

        Large domains are only materialised with ``force=True``.
        """
        if self._outputs is None:
            if self.domain_size > MATERIALIZE_LIMIT and not force:
                raise MemoryError(
                    f"{self.name}: 3^{self.n} words exceed the materialisation "
                    "limit; pass force=True")
            out = np.ascontiguousarray(self._evaluate(all_words(self.n)), dtype=np.uint8)
            out.setflags(write=False)
            self._outputs = out
        return self._outputs

    def __call__(self, word: Iterable[int]) -> Permutation:
        word = TernaryWord(word)
        if len(word) != self.n:
            raise ValueError(f"{self.name} expects words of length {self.n}")
        row = self.evaluate_many(np.array([word], dtype=np.uint8))[0]
        return Permutation(row.tolist())

    def to_table(self, name: str | None = None):
        from .tables import MappingTable

        return MappingTable(self.n, self.k, self.outputs(force=True), name=name or self.name)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}: Z_3^{self.n} -> S_{self.length}>"
