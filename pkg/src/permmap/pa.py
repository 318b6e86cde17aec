"""Ternary codes, permutation arrays built through mappings, and P(n, d) bounds.

A code of minimum distance ``d`` pushed through a distance-preserving
mapping is a permutation array of minimum distance ``d`` (``d + 1`` for a
distance-increasing mapping). Combined with the three constructions
(``Z_3^{n-2} -> S_n`` increasing for ``n >= 5``, ``Z_3^{n-1} -> S_n``
preserving for ``n >= 10``, ``Z_3^n -> S_n`` preserving for ``n >= 13``):

    P(n, d) >= A_3(n-2, d-1)   (n >= 5)
    P(n, d) >= A_3(n-1, d)     (n >= 10)
    P(n, d) >= A_3(n, d)       (n >= 13)
"""
from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import TextIO

import numpy as np

from .mapping import Mapping
from .pairs import scan_all_pairs

FILE_VERIFY_LIMIT = 10**8
ENUMERATION_LIMIT = 3**15


class CodeError(ValueError):
    pass


# -- GF(3) helpers ----------------------------------------------------------

def gf3_rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(3) and the pivot columns."""
    a = np.array(m, dtype=np.int64) % 3
    pivots = []
    row = 0
    for col in range(a.shape[1]):
        hits = np.flatnonzero(a[row:, col]) + row
        if len(hits) == 0:
            continue
        p = hits[0]
        a[[row, p]] = a[[p, row]]
        a[row] = (a[row] * a[row, col]) % 3  # 1*1 = 2*2 = 1 mod 3
        for r in range(a.shape[0]):
            if r != row and a[r, col]:
                a[r] = (a[r] - a[r, col] * a[row]) % 3
        pivots.append(col)
        row += 1
        if row == a.shape[0]:
            break
    return a[:row], pivots


def gf3_nullspace(h: np.ndarray) -> np.ndarray:
    """Basis (as rows) of ``{x : h x = 0}`` over GF(3)."""
    rref, pivots = gf3_rref(h)
    n = h.shape[1]
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, p in enumerate(pivots):
            basis[i, p] = (-rref[r, f]) % 3
    return basis


def span(generator: np.ndarray) -> np.ndarray:
    k = generator.shape[0]
    if 3**k > ENUMERATION_LIMIT:
        raise CodeError(f"refusing to enumerate 3^{k} codewords")
    msgs = np.array(list(itertools.product(range(3), repeat=k)), dtype=np.int64).reshape(-1, k)
    return ((msgs @ generator) % 3).astype(np.uint8)


# -- codes ------------------------------------------------------------------

@dataclass
class TernaryCode:
    n: int
    codewords: np.ndarray
    designed_distance: int
    origin: str
    linear: bool = False
    _min_distance: int | None = field(default=None, repr=False)

    def __post_init__(self):
        self.codewords = np.asarray(self.codewords, dtype=np.uint8)
        if self.codewords.ndim != 2 or self.codewords.shape[1] != self.n:
            raise CodeError(f"codewords must be rows of length {self.n}")
        if (self.codewords > 2).any():
            raise CodeError("codewords must be ternary")
        if len(np.unique(self.codewords, axis=0)) != len(self.codewords):
            raise CodeError("codewords are not distinct")

    def __len__(self) -> int:
        return len(self.codewords)

    def min_distance(self) -> int | None:
        """Realised minimum distance (``None`` for a single codeword)."""
        if self._min_distance is None and len(self) > 1:
            if self.linear:
                w = (self.codewords != 0).sum(axis=1)
                self._min_distance = int(w[w > 0].min())
            else:
                res = scan_all_pairs(self.codewords, None, 0)
                self._min_distance = res.min_slack
        return self._min_distance

    def check_distance(self) -> "TernaryCode":
        d = self.min_distance()
        if d is not None and d < self.designed_distance:
            raise CodeError(f"{self.origin}: minimum distance {d} below designed {self.designed_distance}")
        return self


def repetition_code(n: int) -> TernaryCode:
    words = np.repeat(np.arange(3, dtype=np.uint8)[:, None], n, axis=1)
    return TernaryCode(n, words, n, f"repetition({n})", linear=True).check_distance()


def hamming_code(r: int) -> TernaryCode:
    """Ternary Hamming code of length ``(3^r - 1) / 2`` and distance 3."""
    if r < 2:
        raise CodeError("Hamming codes need r >= 2")
    cols = [c for c in itertools.product(range(3), repeat=r)
            if any(c) and c[next(i for i, v in enumerate(c) if v)] == 1]
    h = np.array(cols, dtype=np.int64).T
    code = TernaryCode(h.shape[1], span(gf3_nullspace(h)), 3, f"hamming({r})", linear=True)
    return code.check_distance()


def load_generator(source) -> np.ndarray:
    with _open(source) as fh:
        rows = [line.split() for line in fh if line.strip()]
    n, k = (int(v) for v in rows[0])
    g = np.array([[int(v) for v in row] for row in rows[1:]], dtype=np.int64)
    if g.shape != (k, n):
        raise CodeError(f"generator must be {k} x {n}, got {g.shape}")
    return g


def golay_code() -> TernaryCode:
    """The [11, 6, 5] ternary Golay code from its shipped generator matrix."""
    g = load_generator(resources.files("permmap.data").joinpath("golay11.txt"))
    return TernaryCode(11, span(g), 5, "golay11", linear=True).check_distance()


def load_code(source, verify: bool = True) -> TernaryCode:
    """Read a code file: header ``n d`` then one codeword per line."""
    with _open(source) as fh:
        lines = [line.split() for line in fh if line.strip()]
    try:
        n, d = (int(v) for v in lines[0])
        words = np.array([[int(t) for t in row] for row in lines[1:]], dtype=np.int64)
    except (ValueError, IndexError):
        raise CodeError(f"malformed code file {source}") from None
    if words.ndim != 2 or words.shape[1] != n or (words < 0).any() or (words > 2).any():
        raise CodeError(f"codewords in {source} must be {n} ternary symbols")
    code = TernaryCode(n, words, d, f"file({Path(str(source)).name})")
    if verify and len(code) ** 2 <= FILE_VERIFY_LIMIT:
        code.check_distance()
    elif verify:
        warnings.warn(f"{source}: {len(code)} codewords, minimum distance trusted, not checked")
    return code


def build_code(descriptor: str) -> TernaryCode:
    """``repetition:<n>``, ``hamming:<r>``, ``golay11`` or ``file:<path>``."""
    kind, _, arg = descriptor.partition(":")
    if kind == "repetition":
        return repetition_code(int(arg))
    if kind == "hamming":
        return hamming_code(int(arg))
    if kind == "golay11" and not arg:
        return golay_code()
    if kind == "file":
        return load_code(arg)
    raise CodeError(f"unknown code descriptor {descriptor!r}")


def _open(source):
    if hasattr(source, "open") and not isinstance(source, (str, Path)):
        return source.open(encoding="utf-8")
    return open(source, encoding="utf-8")


# -- permutation arrays -----------------------------------------------------

@dataclass
class PermutationArray:
    n: int
    members: np.ndarray
    name: str = "pa"
    _min_distance: int | None = field(default=None, repr=False)

    def __post_init__(self):
        self.members = np.asarray(self.members, dtype=np.uint8)
        if len(np.unique(self.members, axis=0)) != len(self.members):
            raise ValueError("permutation array members are not distinct")

    def __len__(self) -> int:
        return len(self.members)

    def min_distance(self) -> int | None:
        if self._min_distance is None and len(self) > 1:
            self._min_distance = scan_all_pairs(self.members, None, 0).min_slack
        return self._min_distance

    def dump(self, stream: TextIO) -> None:
        d = self.min_distance()
        stream.write(f"{self.n} {len(self)} {d if d is not None else self.n}\n")
        for row in self.members:
            stream.write(" ".join(map(str, row.tolist())) + "\n")


def build_pa(code: TernaryCode, f: Mapping) -> PermutationArray:
    """Image of every codeword under ``f``."""
    if code.n != f.n:
        raise ValueError(f"code length {code.n} does not match mapping length {f.n}")
    return PermutationArray(f.length, f.evaluate_many(code.codewords), name=f"{f.name}({code.origin})")


# -- A_3 table and bounds ---------------------------------------------------

@dataclass(frozen=True)
class A3Entry:
    bound: int
    provenance: str


class A3Table:
    """Lower bounds on ``A_3(n, d)`` keyed by ``(n, d)``."""

    def __init__(self):
        self.entries: dict[tuple[int, int], A3Entry] = {}

    def add(self, n: int, d: int, bound: int, provenance: str) -> None:
        if not 1 <= d <= n:
            raise ValueError(f"A_3({n},{d}) needs 1 <= d <= n")
        old = self.entries.get((n, d))
        if old is None or bound > old.bound:
            self.entries[(n, d)] = A3Entry(int(bound), provenance)
        self._check_monotone(n)

    def _check_monotone(self, n: int) -> None:
        for (m, d), e in self.entries.items():
            nxt = self.entries.get((m, d + 1))
            if m == n and nxt is not None and nxt.bound > e.bound:
                raise ValueError(f"A_3({m},{d}) = {e.bound} is below A_3({m},{d + 1}) = {nxt.bound}")

    def get(self, n: int, d: int) -> A3Entry | None:
        return self.entries.get((n, d))

    def __len__(self):
        return len(self.entries)

    def update(self, other: "A3Table") -> "A3Table":
        for (n, d), e in other.entries.items():
            self.add(n, d, e.bound, e.provenance)
        return self

    @classmethod
    def load(cls, source) -> "A3Table":
        """Read rows ``n,d,bound,provenance``."""
        table = cls()
        with _open(source) as fh:
            for no, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].startswith("#"):
                    continue
                try:
                    n, d, bound = (int(v) for v in row[:3])
                except ValueError:
                    raise ValueError(f"{source}: line {no}: expected n,d,bound,provenance") from None
                table.add(n, d, bound, row[3].strip() if len(row) > 3 else "file")
        return table

    @classmethod
    def reported(cls) -> "A3Table":
        """Literature values shipped with the package."""
        return cls.load(resources.files("permmap.data").joinpath("a3_reported.csv"))

    @classmethod
    def builtin(cls, max_n: int = 64) -> "A3Table":
        """Bounds from codes this package constructs and checks itself."""
        table = cls()
        for n in range(1, max_n + 1):
            table.add(n, 1, 3**n, "full space")
            if n >= 2:
                table.add(n, n, 3, "repetition")
        for r in (2, 3):
            code = hamming_code(r)
            table.add(code.n, 3, len(code), code.origin)
        golay = golay_code()
        table.add(11, golay.min_distance(), len(golay), "golay11")
        return table


CLAUSES = (
    ("a", 5, lambda n, d: (n - 2, d - 1)),
    ("b", 10, lambda n, d: (n - 1, d)),
    ("c", 13, lambda n, d: (n, d)),
)


@dataclass(frozen=True)
class BoundResult:
    n: int
    d: int
    value: int | None
    clause: str | None = None
    code_n: int | None = None
    code_d: int | None = None
    provenance: str | None = None

    @property
    def derivable(self) -> bool:
        return self.value is not None

    def __str__(self):
        if self.value is None:
            return f"P({self.n},{self.d}): no bound derivable"
        return (f"P({self.n},{self.d}) >= {self.value} via clause {self.clause}) "
                f"from A_3({self.code_n},{self.code_d}) [{self.provenance}]")


def bound(n: int, d: int, table: A3Table) -> BoundResult:
    """Best lower bound on ``P(n, d)`` the table supports."""
    if not 2 <= d <= n:
        raise ValueError(f"need 2 <= d <= n, got n={n}, d={d}")
    best = BoundResult(n, d, None)
    for clause, min_n, args in CLAUSES:
        if n < min_n:
            continue
        cn, cd = args(n, d)
        if cd < 1:
            continue
        entry = table.get(cn, cd)
        if entry is not None and (best.value is None or entry.bound > best.value):
            best = BoundResult(n, d, entry.bound, clause, cn, cd, entry.provenance)
    return best
