"""Backtracking search for mapping tables that satisfy a ConstraintSet.

Rows (domain words) are assigned in a fixed order. Each row draws from the
permutations that pass the row-local constraints; after every assignment the
candidates of all later rows are filtered against the new row (forward
checking), so a dead end shows up as soon as some later row runs dry.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import all_words
from .pairs import distance_matrix
from .tables import INCREASE, ConstraintSet, MappingTable

DEFAULT_BUDGET = 10**8

FOUND = "found"
EXHAUSTED = "exhausted"
INFEASIBLE = "infeasible"


@dataclass
class SearchProblem:
    n: int
    k: int
    constraints: ConstraintSet | None = None
    order: str = "dynamic"        # row order: "lex", "random" or "dynamic" (fewest candidates first)
    candidate_order: str = "lex"  # permutation order: "lex" or "random"
    budget: int = DEFAULT_BUDGET
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.k < 0:
            raise ValueError(f"bad dimensions n={self.n}, k={self.k}")
        if self.constraints is not None and (self.constraints.n, self.constraints.k) != (self.n, self.k):
            raise ValueError("constraint set is dimensioned for a different (n, k)")
        if self.order not in ("lex", "random", "dynamic"):
            raise ValueError(f"unknown row order {self.order!r}")
        if self.candidate_order not in ("lex", "random"):
            raise ValueError(f"unknown candidate order {self.candidate_order!r}")
        if "random" in (self.order, self.candidate_order) and self.seed is None:
            raise ValueError("random orders need a seed")

    @property
    def pigeonhole_ok(self) -> bool:
        return math.factorial(self.n + self.k) >= 3**self.n


@dataclass
class SearchStats:
    expansions: int = 0
    backtracks: int = 0
    deepest_row: int = 0
    wall_time: float = 0.0


@dataclass
class SearchResult:
    status: str
    table: MappingTable | None = None
    stats: SearchStats = field(default_factory=SearchStats)
    note: str = ""

    @property
    def found(self) -> bool:
        return self.status == FOUND


def prune_stats(result: SearchResult) -> SearchStats:
    return result.stats


def _relabel_invariant(c: ConstraintSet | None) -> bool:
    return c is None or not c.row_local


def search(problem: SearchProblem) -> SearchResult:
    t0 = time.perf_counter()
    stats = SearchStats()
    n, width = problem.n, problem.n + problem.k
    rows = 3**n
    if not problem.pigeonhole_ok:
        stats.wall_time = time.perf_counter() - t0
        return SearchResult(INFEASIBLE, stats=stats,
                            note=f"pigeonhole: {width}! < 3^{n}, no injective map exists")
    rng = np.random.default_rng(problem.seed)
    c = problem.constraints

    cands = np.array(list(itertools.permutations(range(1, width + 1))), dtype=np.uint8)
    if c is not None:
        cands = cands[c.row_mask(cands)]
    if problem.candidate_order == "random":
        cands = cands[rng.permutation(len(cands))]
    if _relabel_invariant(c):
        # Any relabelling of values maps solutions to solutions, so the first
        # row may be fixed to the least admissible permutation.
        first_only = int(np.lexsort(cands.T[::-1])[0]) if len(cands) else 0
    else:
        first_only = None

    order = rng.permutation(rows) if problem.order == "random" else np.arange(rows)
    words = all_words(n)[order]
    din = distance_matrix(words, words)
    proj = c.projected_dpm if c is not None else None
    if proj is not None:
        keep = proj.remove.keep_mask(width)
        threshold = 1 if proj.mode == INCREASE else 0
    else:
        keep = np.zeros(width, dtype=bool)
        threshold = None
    projected = np.ascontiguousarray(cands[:, keep])

    n_cands = len(cands)
    alive = np.ones((rows, n_cands), dtype=bool)
    if first_only is not None and n_cands:
        alive[0] = False
        alive[0, first_only] = True
    assigned = np.zeros(rows, dtype=bool)
    row_at = np.full(rows, -1, dtype=np.int64)
    choice = np.full(rows, -1, dtype=np.int64)
    saved: list[np.ndarray | None] = [None] * rows
    dynamic = problem.order == "dynamic"

    status = INFEASIBLE
    t = 0
    while True:
        if t == rows:
            status = FOUND
            break
        if row_at[t] < 0:
            if dynamic:
                counts = np.where(assigned, n_cands + 1, alive.sum(axis=1))
                row_at[t] = int(np.argmin(counts))
            else:
                row_at[t] = t
            saved[t] = alive.copy()
        else:
            alive[:] = saved[t]
        row = row_at[t]
        start = choice[t] + 1
        nxt = np.flatnonzero(alive[row, start:])
        if len(nxt) == 0:
            assigned[row] = False
            choice[t] = row_at[t] = -1
            saved[t] = None
            if t == 0:
                status = INFEASIBLE
                break
            stats.backtracks += 1
            t -= 1
            continue
        if stats.expansions >= problem.budget:
            status = EXHAUSTED
            break
        cand = start + int(nxt[0])
        choice[t] = cand
        assigned[row] = True
        stats.expansions += 1
        stats.deepest_row = max(stats.deepest_row, t + 1)
        future = ~assigned
        if future.any():
            sub = alive[future]
            if threshold is not None:
                dc = (projected != projected[cand]).sum(axis=1)
                need = din[row, future].astype(np.int64) + threshold
                sub &= dc[None, :] >= need[:, None]
            sub[:, cand] = False
            alive[future] = sub
            if not sub.any(axis=1).all():
                continue
        t += 1

    stats.wall_time = time.perf_counter() - t0
    if status != FOUND:
        return SearchResult(status, stats=stats)
    outputs = np.empty((rows, width), dtype=np.uint8)
    outputs[order[row_at]] = cands[choice]
    name = c.name if c is not None else "search"
    return SearchResult(FOUND, MappingTable(n, problem.k, outputs, name=f"search[{name}]"), stats)
