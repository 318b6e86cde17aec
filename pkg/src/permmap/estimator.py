"""scikit-learn style wrapper: ternary feature rows in, permutation rows out."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import index_to_words
from .mapping import Mapping
from .pairs import distance_matrix
from .registry import resolve_mapping
from .verify import (DEFAULT_MAX_PAIRS, Exhaustive, Stratified, VerificationJob,
                     exhaustive_pair_count, verify)


def check_ternary_array(X, n_features: int | None = None) -> np.ndarray:
    """Validate a 2-D array of trits and return it as ``uint8``."""
    X = check_array(X, dtype=np.int64)
    if ((X < 0) | (X > 2)).any():
        raise ValueError("entries must be 0, 1 or 2")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"X has {X.shape[1]} features, but the mapping expects {n_features}")
    return X.astype(np.uint8)


def check_permutation_array(P, length: int) -> np.ndarray:
    P = check_array(P, dtype=np.int64)
    if P.shape[1] != length:
        raise ValueError(f"expected permutations of length {length}, got {P.shape[1]}")
    if not (np.sort(P, axis=1) == np.arange(1, length + 1)).all():
        raise ValueError("rows must be permutations of 1..length")
    return P.astype(np.uint8)


class PermutationMapper(TransformerMixin, BaseEstimator):
    """Map ternary vectors to permutations through a distance-preserving mapping.

    Parameters
    ----------
    mapping : str or Mapping, default="table:F"
        Mapping descriptor (see :func:`permmap.registry.resolve_mapping`) or
        an already built mapping.
    check : {"none", "auto", "exhaustive"}, default="none"
        Whether ``fit`` verifies the distance property. ``"auto"`` runs an
        exhaustive check when it fits under ``max_pairs`` and a stratified
        sample otherwise.
    mode : {"dpm", "dim"}, default="dpm"
        Property checked by ``fit``.
    n_samples_check : int, default=10**6
        Pair count for sampled checks.
    random_state : int, default=0
        Seed for sampled checks.
    """

    def __init__(self, mapping="table:F", check="none", mode="dpm",
                 max_pairs=DEFAULT_MAX_PAIRS, n_samples_check=10**6, random_state=0):
        self.mapping = mapping
        self.check = check
        self.mode = mode
        self.max_pairs = max_pairs
        self.n_samples_check = n_samples_check
        self.random_state = random_state

    def fit(self, X=None, y=None):
        m = self.mapping if isinstance(self.mapping, Mapping) else resolve_mapping(self.mapping)
        if X is not None:
            check_ternary_array(X, m.n)
        self.mapping_ = m
        self.n_features_in_ = m.n
        self.n_outputs_ = m.length
        self.report_ = None
        self._inverse = None
        if self.check not in ("none", "auto", "exhaustive"):
            raise ValueError(f"unknown check {self.check!r}")
        if self.check != "none":
            if self.check == "exhaustive" or exhaustive_pair_count(m.n) <= self.max_pairs:
                strategy = Exhaustive()
            else:
                strategy = Stratified.even(self.n_samples_check, m.n, seed=self.random_state)
            job = VerificationJob(m, self.mode, strategy, max_pairs=self.max_pairs)
            self.report_ = verify(job)
            if not self.report_.passed:
                raise ValueError(f"{m.name} fails the {self.mode} check: {self.report_.violations[0]}")
        return self

    def transform(self, X):
        check_is_fitted(self, "mapping_")
        X = check_ternary_array(X, self.n_features_in_)
        return self.mapping_.evaluate_many(X).astype(np.int64)

    def inverse_transform(self, P):
        """Recover the ternary rows from permutations in the mapping's image."""
        check_is_fitted(self, "mapping_")
        P = check_permutation_array(P, self.n_outputs_)
        lookup = self._inverse_lookup()
        keys = [row.tobytes() for row in P]
        missing = [i for i, key in enumerate(keys) if key not in lookup]
        if missing:
            raise ValueError(f"row {missing[0]} is not in the image of {self.mapping_.name}")
        return index_to_words(np.array([lookup[key] for key in keys]), self.n_features_in_).astype(np.int64)

    def _inverse_lookup(self) -> dict:
        if getattr(self, "_inverse", None) is None:
            out = self.mapping_.outputs(force=True)
            self._inverse = {row.tobytes(): i for i, row in enumerate(out)}
        return self._inverse

    def pair_distances(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Input and output Hamming distance matrices for the rows of ``X``."""
        X = check_ternary_array(X, getattr(self, "n_features_in_", None))
        P = self.transform(X).astype(np.uint8)
        return distance_matrix(X, X), distance_matrix(P, P)
