"""Overwrite-concatenate-swap composition of two mappings.

An input word is split into a left and a right segment. The left mapping's
image ``phi`` and the right mapping's image ``gamma`` (shifted by a constant)
are copied into the output by placement rules; in each rule one designated
pivot value is replaced by a donor coordinate taken from the other segment.
Finally some value pairs are swapped.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TernaryWord, is_permutation_rows, relabel_rows
from .mapping import Mapping
from .tables import builtin_constraints, builtin_table, check_constraints

LEFT = "left"
RIGHT = "right"


class CompositionError(ValueError):
    pass


@dataclass(frozen=True)
class Placement:
    """Fill output positions ``start..stop`` (1-based, inclusive).

    Output position ``i`` reads ``source[i + offset]``. A read equal to
    ``pivot`` is replaced by ``donor = (source, index)``; a read in ``forbid``
    is not covered by any rule.
    """

    start: int
    stop: int
    source: str
    offset: int
    pivot: int | None = None
    donor: tuple[str, int] | None = None
    forbid: frozenset = field(default_factory=frozenset)


@dataclass(frozen=True)
class OverlaySpec:
    name: str
    left_len: int
    right_len: int
    shift: int
    rules: tuple[Placement, ...]
    swaps: tuple[tuple[int, int], ...] = ()

    @property
    def width(self) -> int:
        return max(r.stop for r in self.rules)

    def check_cover(self) -> None:
        """Every output position is written by exactly one rule."""
        hits = np.zeros(self.width + 1, dtype=int)
        for r in self.rules:
            hits[r.start:r.stop + 1] += 1
        if (hits[1:] != 1).any():
            raise CompositionError(f"{self.name}: placement rules do not tile 1..{self.width}")


class CompositeMapping(Mapping):
    def __init__(self, spec: OverlaySpec, left: Mapping, right: Mapping):
        if (left.n, right.n) != (spec.left_len, spec.right_len):
            raise CompositionError(
                f"{spec.name}: segment lengths {spec.left_len}+{spec.right_len} "
                f"do not match mappings of length {left.n}+{right.n}")
        spec.check_cover()
        n = spec.left_len + spec.right_len
        width = spec.width
        if width < n:
            raise CompositionError(f"{spec.name}: output shorter than input")
        super().__init__(n, width - n, spec.name)
        self.spec = spec
        self.left = left
        self.right = right

    def stages(self, words: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Intermediate arrays ``(phi, gamma, rho, pi)`` for a batch of words."""
        spec = self.spec
        words = np.asarray(words, dtype=np.uint8)
        phi = self.left.evaluate_many(words[:, :spec.left_len]).astype(np.int16)
        gamma = self.right.evaluate_many(words[:, spec.left_len:]).astype(np.int16) + spec.shift
        src = {LEFT: phi, RIGHT: gamma}
        rho = np.zeros((words.shape[0], spec.width), dtype=np.int16)
        uncovered = np.zeros(words.shape[0], dtype=bool)
        for rule in spec.rules:
            cols = np.arange(rule.start, rule.stop + 1) + rule.offset - 1
            vals = src[rule.source][:, cols]
            if rule.pivot is not None:
                dsrc, didx = rule.donor
                donor = src[dsrc][:, didx - 1]
                vals = np.where(vals == rule.pivot, donor[:, None], vals)
            if rule.forbid:
                uncovered |= np.isin(src[rule.source][:, cols], sorted(rule.forbid)).any(axis=1)
            rho[:, rule.start - 1:rule.stop] = vals
        bad = uncovered | ~is_permutation_rows(rho)
        if bad.any():
            word = TernaryWord(words[np.argmax(bad)].tolist())
            raise CompositionError(f"{spec.name}: placement is not total at word {word}")
        pi = relabel_rows(rho, spec.swaps) if spec.swaps else rho.copy()
        return phi, gamma, rho, pi

    def _evaluate(self, words: np.ndarray) -> np.ndarray:
        return self.stages(words)[3].astype(np.uint8)

    def source_of(self, position: int) -> tuple[str, int]:
        """Segment and index that output ``position`` is read from."""
        for rule in self.spec.rules:
            if rule.start <= position <= rule.stop:
                return rule.source, position + rule.offset
        raise IndexError(position)


def _rule(start, stop, source, offset, pivot=None, donor=None, forbid=()):
    return Placement(start, stop, source, offset, pivot, donor, frozenset(forbid))


P91 = OverlaySpec(
    "p91", left_len=5, right_len=4, shift=4,
    rules=(
        _rule(1, 3, LEFT, 0, pivot=6, donor=(RIGHT, 5), forbid={7}),
        _rule(4, 6, LEFT, 0, pivot=7, donor=(RIGHT, 6), forbid={6}),
        _rule(7, 9, RIGHT, -6, pivot=5, donor=(LEFT, 7)),
        _rule(10, 10, RIGHT, -6, forbid={5}),
    ),
    swaps=((1, 6), (2, 7)),
)

U_SPEC = OverlaySpec(
    "U", left_len=3, right_len=3, shift=3,
    rules=(
        _rule(1, 4, LEFT, 0, pivot=5, donor=(RIGHT, 5)),
        _rule(5, 8, RIGHT, -4, pivot=4, donor=(LEFT, 5)),
    ),
    swaps=((1, 7), (5, 8)),
)

V_SPEC = OverlaySpec(
    "V", left_len=3, right_len=4, shift=3,
    rules=(
        _rule(1, 4, LEFT, 0, pivot=5, donor=(RIGHT, 6)),
        _rule(5, 9, RIGHT, -4, pivot=4, donor=(LEFT, 5)),
    ),
    swaps=((2, 5),),
)

P130 = OverlaySpec(
    "p130", left_len=6, right_len=7, shift=4,
    rules=(
        _rule(1, 3, LEFT, 0, pivot=7, donor=(RIGHT, 4)),
        _rule(4, 6, LEFT, 1, pivot=8, donor=(RIGHT, 9)),
        _rule(7, 9, RIGHT, -6, pivot=5, donor=(LEFT, 4)),
        _rule(10, 13, RIGHT, -5, pivot=6, donor=(LEFT, 8)),
    ),
    swaps=((1, 9), (2, 10)),
)


def _require(mapping: Mapping, constraint_name: str) -> None:
    report = check_constraints(mapping, builtin_constraints(constraint_name))
    if not report.passed:
        first = report.violations[0]
        raise CompositionError(
            f"building block {mapping.name} fails {constraint_name} constraints "
            f"({len(report.violations)} violations, first: {first.constraint} at {first.word})")


def compose(spec: OverlaySpec, left: Mapping, right: Mapping) -> CompositeMapping:
    """Instantiate a user-supplied overlay; totality is checked on evaluation."""
    return CompositeMapping(spec, left, right)


def compose_p91(G: Mapping | None = None, H4: Mapping | None = None) -> CompositeMapping:
    """Mapping ``Z_3^9 -> S_10`` with distance preservation."""
    G = G if G is not None else builtin_table("G")
    H4 = H4 if H4 is not None else builtin_table("H4")
    _require(G, "G")
    _require(H4, "H4")
    return CompositeMapping(P91, G, H4)


def compose_u(R: Mapping | None = None, S: Mapping | None = None) -> CompositeMapping:
    R = R if R is not None else builtin_table("R")
    S = S if S is not None else builtin_table("S")
    _require(R, "R")
    _require(S, "S")
    return CompositeMapping(U_SPEC, R, S)


def compose_v(R: Mapping | None = None, T: Mapping | None = None) -> CompositeMapping:
    R = R if R is not None else builtin_table("R")
    T = T if T is not None else builtin_table("T")
    _require(R, "R")
    _require(T, "T")
    return CompositeMapping(V_SPEC, R, T)


def compose_p130(U: Mapping | None = None, V: Mapping | None = None,
                 materialize: bool = False) -> CompositeMapping:
    """Mapping ``Z_3^13 -> S_13``; lazy unless ``materialize`` is set."""
    U = U if U is not None else compose_u()
    V = V if V is not None else compose_v()
    _require(U, "U")
    _require(V, "V")
    f = CompositeMapping(P130, U, V)
    if materialize:
        f.outputs(force=True)
    return f
