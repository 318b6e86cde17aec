"""Explicit mapping tables, their text format, and declarative constraints.

Table file format::

    n k
    t1 t2 ... tn : p1 p2 ... p(n+k)
    ...

with exactly ``3**n`` rows in any order. Rows are emitted in lexicographic
order of the domain word.
"""
from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, TextIO

import numpy as np

from .core import IndexSet, Permutation, TernaryWord, all_words, is_permutation_rows, words_to_index
from .mapping import Mapping
from .pairs import scan_all_pairs

BUILTIN_TABLES = ("F", "G", "H4", "R", "S", "T")
ALIASES = {"H": "H4"}


class TableError(ValueError):
    """Base class for problems reading or validating a mapping table."""


class TableFormatError(TableError):
    pass


class MissingRowError(TableError):
    pass


class DuplicateWordError(TableError):
    pass


class NotPermutationError(TableError):
    pass


class DuplicateOutputError(TableError):
    pass


class MappingTable(Mapping):
    """A mapping given by an explicit list of all ``3**n`` images."""

    def __init__(self, n: int, k: int, outputs, name: str = "table"):
        super().__init__(n, k, name)
        out = np.array(outputs, dtype=np.uint8)
        if out.shape != (3**n, n + k):
            raise MissingRowError(
                f"{name}: expected {3**n} rows of length {n + k}, got shape {out.shape}")
        bad = np.flatnonzero(~is_permutation_rows(out))
        if len(bad):
            word = TernaryWord.from_index(int(bad[0]), n)
            raise NotPermutationError(f"{name}: output of {_fmt_word(word)} is not a permutation")
        _, first, counts = np.unique(out, axis=0, return_index=True, return_counts=True)
        if (counts > 1).any():
            row = out[first[np.argmax(counts > 1)]]
            clash = np.flatnonzero((out == row).all(axis=1))
            words = [_fmt_word(TernaryWord.from_index(int(i), n)) for i in clash]
            raise DuplicateOutputError(f"{name}: words {', '.join(words)} share an output")
        out.setflags(write=False)
        self._outputs = out

    def _evaluate(self, words: np.ndarray) -> np.ndarray:
        return self._outputs[words_to_index(words)]

    def __getitem__(self, word: Iterable[int]) -> Permutation:
        return self(word)

    def __len__(self) -> int:
        return self.domain_size

    def items(self) -> Iterator[tuple[TernaryWord, Permutation]]:
        for i, row in enumerate(self._outputs):
            yield TernaryWord.from_index(i, self.n), Permutation(row.tolist())

    def __eq__(self, other):
        if not isinstance(other, MappingTable):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and np.array_equal(self._outputs, other._outputs)

    __hash__ = Mapping.__hash__


def _fmt_word(word: Iterable[int]) -> str:
    return "(" + ",".join(map(str, word)) + ")"


# -- reading and writing ----------------------------------------------------

def parse_table(stream: TextIO, name: str = "table") -> MappingTable:
    lines = [(no, line.strip()) for no, line in enumerate(stream, start=1)]
    lines = [(no, line) for no, line in lines if line]
    if not lines:
        raise TableFormatError(f"{name}: empty table file")
    try:
        n, k = (int(v) for v in lines[0][1].split())
    except ValueError:
        raise TableFormatError(f"{name}: line {lines[0][0]}: header must be 'n k'") from None
    if n < 1 or k < 0:
        raise TableFormatError(f"{name}: bad dimensions n={n} k={k}")
    outputs = np.zeros((3**n, n + k), dtype=np.uint8)
    seen = np.zeros(3**n, dtype=bool)
    for no, line in lines[1:]:
        left, sep, right = line.partition(":")
        try:
            word = TernaryWord(int(t) for t in left.split())
            perm = [int(v) for v in right.split()]
        except ValueError as exc:
            raise TableFormatError(f"{name}: line {no}: {exc}") from None
        if not sep or len(word) != n or len(perm) != n + k:
            raise TableFormatError(f"{name}: line {no}: malformed row {line!r}")
        if sorted(perm) != list(range(1, n + k + 1)):
            raise NotPermutationError(f"{name}: line {no}: {perm} is not a permutation")
        idx = word.index
        if seen[idx]:
            raise DuplicateWordError(f"{name}: line {no}: duplicate domain word {_fmt_word(word)}")
        seen[idx] = True
        outputs[idx] = perm
    if not seen.all():
        missing = TernaryWord.from_index(int(np.argmin(seen)), n)
        raise MissingRowError(
            f"{name}: {int(seen.sum())} of {3**n} rows present; missing {_fmt_word(missing)}")
    return MappingTable(n, k, outputs, name=name)


def load_table(source) -> MappingTable:
    """Read a table from a path or an open text stream."""
    if hasattr(source, "read"):
        return parse_table(source, name=getattr(source, "name", "table"))
    path = Path(source)
    with path.open(encoding="utf-8") as fh:
        return parse_table(fh, name=path.stem)


def dump_table(mapping: Mapping, stream: TextIO | None = None) -> str | None:
    """Write ``mapping`` in table format (lexicographic order)."""
    out = mapping.outputs(force=True)
    target = stream if stream is not None else io.StringIO()
    target.write(f"{mapping.n} {mapping.k}\n")
    words = all_words(mapping.n)
    for w, p in zip(words, out):
        target.write(" ".join(map(str, w.tolist())) + " : " + " ".join(map(str, p.tolist())) + "\n")
    if stream is None:
        return target.getvalue()
    return None


def canonical_name(name: str) -> str:
    return ALIASES.get(name, name)


def builtin_table(name: str) -> MappingTable:
    """One of the shipped tables F, G, H4 (alias H), R, S, T.

    ``$PERMMAP_DATA_DIR/<name>.txt`` takes precedence over the shipped copy.
    """
    name = canonical_name(name)
    if name not in BUILTIN_TABLES:
        raise KeyError(f"unknown table {name!r}; choose from {', '.join(BUILTIN_TABLES)}")
    override = os.environ.get("PERMMAP_DATA_DIR")
    if override and (Path(override) / f"{name}.txt").is_file():
        table = load_table(Path(override) / f"{name}.txt")
    else:
        with resources.files("permmap.data").joinpath(f"{name}.txt").open(encoding="utf-8") as fh:
            table = parse_table(fh, name=name)
    table.name = name
    return table


# -- constraints ------------------------------------------------------------

PRESERVE = "preserve"
INCREASE = "increase"


@dataclass(frozen=True)
class ProjectedDPM:
    remove: IndexSet = field(default_factory=IndexSet)
    mode: str = PRESERVE

    def __post_init__(self):
        object.__setattr__(self, "remove", IndexSet(self.remove))
        if self.mode not in (PRESERVE, INCREASE):
            raise ValueError(f"mode must be {PRESERVE!r} or {INCREASE!r}")


@dataclass(frozen=True)
class ConstraintSet:
    """Row-local and pairwise requirements on a mapping table.

    ``membership`` holds ``(value, positions)``: the value must sit at one of
    the positions in every output. ``exclusions`` holds ``(position, values)``:
    the position never carries one of the values. ``projected_dpm`` asks for
    distance preservation (or increase) after deleting the given positions.
    """

    n: int
    k: int
    membership: tuple = ()
    exclusions: tuple = ()
    projected_dpm: ProjectedDPM | None = None
    name: str = "constraints"

    def __post_init__(self):
        object.__setattr__(self, "membership",
                           tuple((int(v), frozenset(int(p) for p in ps)) for v, ps in self.membership))
        object.__setattr__(self, "exclusions",
                           tuple((int(p), frozenset(int(v) for v in vs)) for p, vs in self.exclusions))
        width = self.n + self.k
        for value, positions in self.membership:
            if not 1 <= value <= width or not positions or not all(1 <= p <= width for p in positions):
                raise ValueError(f"membership ({value}, {sorted(positions)}) out of range for S_{width}")
        for pos, values in self.exclusions:
            if not 1 <= pos <= width or not all(1 <= v <= width for v in values):
                raise ValueError(f"exclusion ({pos}, {sorted(values)}) out of range for S_{width}")
        if self.projected_dpm is not None:
            self.projected_dpm.remove.check(width)

    @property
    def row_local(self) -> bool:
        return bool(self.membership or self.exclusions)

    def row_mask(self, perms: np.ndarray) -> np.ndarray:
        """Which rows of a permutation array satisfy the row-local constraints."""
        ok = np.ones(perms.shape[0], dtype=bool)
        for value, positions in self.membership:
            cols = [p - 1 for p in sorted(positions)]
            ok &= (perms[:, cols] == value).any(axis=1)
        for pos, values in self.exclusions:
            ok &= ~np.isin(perms[:, pos - 1], sorted(values))
        return ok

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "n": self.n,
            "k": self.k,
            "membership": [[v, sorted(ps)] for v, ps in self.membership],
            "exclusions": [[p, sorted(vs)] for p, vs in self.exclusions],
            "projected_dpm": None,
        }
        if self.projected_dpm is not None:
            d["projected_dpm"] = {"remove": sorted(self.projected_dpm.remove),
                                  "mode": self.projected_dpm.mode}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintSet":
        proj = d.get("projected_dpm")
        return cls(
            n=int(d["n"]),
            k=int(d["k"]),
            membership=tuple(d.get("membership", ())),
            exclusions=tuple(d.get("exclusions", ())),
            projected_dpm=None if proj is None else ProjectedDPM(proj.get("remove", ()),
                                                                 proj.get("mode", PRESERVE)),
            name=d.get("name", "constraints"),
        )

    @classmethod
    def load(cls, path) -> "ConstraintSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


_BUILTIN_CONSTRAINTS = {
    # name: (n, k, membership, exclusions, removed positions)
    "G": (5, 2, [(6, {1, 2, 3}), (7, {4, 5, 6})], [], {7}),
    "H4": (4, 2, [(1, {1, 2, 3})], [], {5, 6}),
    "R": (3, 2, [(1, {1, 2, 3})], [(5, {5})], {4, 5}),
    "S": (3, 2, [(2, {1, 2, 3})], [(5, {1})], {4, 5}),
    "T": (4, 2, [(2, {1, 2, 3})], [(6, {1})], {5, 6}),
    "U": (6, 2, [(7, {1, 2, 3}), (8, {5, 6, 7})], [], {4, 8}),
    "V": (7, 2, [(1, {1, 2, 3}), (2, {5, 6, 7})], [], {4, 9}),
}


def builtin_constraints(name: str) -> ConstraintSet:
    """The conditions each building-block table (or composite U, V) satisfies."""
    key = canonical_name(name)
    if key not in _BUILTIN_CONSTRAINTS:
        raise KeyError(f"no built-in constraints for {name!r}")
    n, k, membership, exclusions, removed = _BUILTIN_CONSTRAINTS[key]
    return ConstraintSet(n, k, tuple(membership), tuple(exclusions),
                         ProjectedDPM(removed, PRESERVE), name=key)


@dataclass(frozen=True)
class ConstraintViolation:
    constraint: str
    word: TernaryWord
    other: TernaryWord | None = None
    detail: str = ""


@dataclass
class ConstraintReport:
    table: str
    constraints: str
    rows_checked: int
    pairs_checked: int
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations

    def __str__(self):
        verdict = "pass" if self.passed else f"FAIL ({len(self.violations)} violations)"
        return (f"{self.table} vs {self.constraints}: {verdict}; "
                f"{self.rows_checked} rows, {self.pairs_checked} pairs checked")


def check_constraints(table: Mapping, constraints: ConstraintSet, workers: int | None = 1) -> ConstraintReport:
    """Exhaustively test every row and, if requested, every pair of rows."""
    if (table.n, table.k) != (constraints.n, constraints.k):
        raise ValueError(f"constraints are for n={constraints.n}, k={constraints.k}; "
                         f"table has n={table.n}, k={table.k}")
    out = table.outputs(force=True)
    n = table.n
    violations: list[tuple] = []
    for value, positions in constraints.membership:
        cols = [p - 1 for p in sorted(positions)]
        bad = np.flatnonzero(~(out[:, cols] == value).any(axis=1))
        label = f"{value} in positions {sorted(positions)}"
        violations += [(int(i), -1, ConstraintViolation(label, TernaryWord.from_index(int(i), n)))
                       for i in bad]
    for pos, values in constraints.exclusions:
        bad = np.flatnonzero(np.isin(out[:, pos - 1], sorted(values)))
        label = f"position {pos} not in {sorted(values)}"
        violations += [(int(i), -1, ConstraintViolation(label, TernaryWord.from_index(int(i), n),
                                                        detail=f"found {int(out[i, pos - 1])}"))
                       for i in bad]
    pairs = 0
    proj = constraints.projected_dpm
    if proj is not None:
        keep = proj.remove.keep_mask(table.length)
        threshold = 1 if proj.mode == INCREASE else 0
        res = scan_all_pairs(out[:, keep], all_words(n), threshold, workers=workers)
        pairs = res.pairs
        label = f"projected {proj.mode} removing {proj.remove!r}"
        for i, j, din, dout in res.violations:
            violations.append((i, j, ConstraintViolation(
                label, TernaryWord.from_index(i, n), TernaryWord.from_index(j, n),
                detail=f"input distance {din}, output distance {dout}")))
    violations.sort(key=lambda v: (v[0], v[1]))
    return ConstraintReport(table.name, constraints.name, out.shape[0], pairs,
                            [v[2] for v in violations])
