"""Distance-preservation checks for mappings and permutation arrays.

A pair ``(x, y)`` violates preservation when ``d(f(x), f(y)) < d(x, y)`` and
violates increase when ``d(f(x), f(y)) <= d(x, y)``. Reports are plain JSON
with a fixed key order so identical jobs give byte-identical output.
"""
from __future__ import annotations

import functools
import itertools
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .core import IndexSet, all_words, index_to_words
from .mapping import Mapping
from .pairs import ChunkResult, default_workers, row_distances, run_chunks, scan_all_pairs, context

PRESERVE = "preserve"
INCREASE = "increase"
MODE_ALIASES = {"dpm": PRESERVE, "dim": INCREASE, PRESERVE: PRESERVE, INCREASE: INCREASE}

DEFAULT_MAX_PAIRS = 5 * 10**9
GENERATOR = "numpy.PCG64/SeedSequence.spawn"
SAMPLE_CHUNK = 1 << 20
# Domains up to this size are materialised for sampled jobs (3^14 rows of uint8).
_SAMPLE_MATERIALIZE = 3**14


class InfeasibleJobError(RuntimeError):
    def __init__(self, pairs: int, ceiling: int):
        super().__init__(
            f"exhaustive check needs {pairs} pairs, above the ceiling of {ceiling}; "
            "use a sampled or stratified strategy, or raise the ceiling")
        self.pairs = pairs
        self.ceiling = ceiling


@dataclass(frozen=True)
class Exhaustive:
    name = "exhaustive"

    def describe(self) -> dict:
        return {"name": self.name}


@dataclass(frozen=True)
class Sampled:
    sample_count: int
    seed: int = 0
    name = "sampled"

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")

    def describe(self) -> dict:
        return {"name": self.name, "sample_count": self.sample_count, "generator": GENERATOR}


@dataclass(frozen=True)
class Stratified:
    """Pairs drawn with a prescribed input distance, ``quotas[d]`` for each ``d``."""

    quotas: dict
    seed: int = 0
    name = "stratified"

    @classmethod
    def even(cls, sample_count: int, n: int, seed: int = 0) -> "Stratified":
        base, extra = divmod(sample_count, n)
        return cls({d: base + (1 if d <= extra else 0) for d in range(1, n + 1)}, seed)

    def describe(self) -> dict:
        return {"name": self.name, "quotas": {str(d): int(q) for d, q in sorted(self.quotas.items())},
                "generator": GENERATOR}


@dataclass
class VerificationJob:
    mapping: Mapping
    mode: str = PRESERVE
    strategy: object = field(default_factory=Exhaustive)
    projection: IndexSet | None = None
    max_pairs: int = DEFAULT_MAX_PAIRS

    def __post_init__(self):
        self.mode = MODE_ALIASES.get(self.mode, self.mode)
        if self.mode not in (PRESERVE, INCREASE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == INCREASE and self.mapping.k < 1:
            raise ValueError("increase mode requires k >= 1")
        if self.projection is not None:
            self.projection = IndexSet(self.projection).check(self.mapping.length)
        if isinstance(self.strategy, Stratified):
            if not set(self.strategy.quotas) <= set(range(1, self.mapping.n + 1)):
                raise ValueError(f"stratified buckets must lie in 1..{self.mapping.n}")

    @property
    def threshold(self) -> int:
        return 1 if self.mode == INCREASE else 0


@dataclass(frozen=True)
class Violation:
    x: str
    y: str
    input_distance: int
    output_distance: int


@dataclass
class VerificationReport:
    mapping: str
    n: int
    k: int | None
    mode: str
    strategy: dict
    seed: int | None
    pairs_checked: int
    min_slack: int | None
    violations: list
    wall_ms: float | None = None
    projection: tuple = ()

    @property
    def verdict(self) -> str:
        if self.violations:
            return "fail"
        return "pass" if self.strategy.get("name") in ("exhaustive", "pa") else "pass-sampled"

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def min_distance(self) -> int | None:
        """Realised minimum distance, for permutation-array reports."""
        if self.strategy.get("name") != "pa" or self.min_slack is None:
            return None
        return self.strategy["d"] + self.min_slack

    def to_dict(self, timing: bool = False) -> dict:
        return {
            "mapping": self.mapping,
            "n": self.n,
            "k": self.k,
            "mode": self.mode,
            "strategy": self.strategy,
            "seed": self.seed,
            "pairs_checked": self.pairs_checked,
            "min_slack": self.min_slack,
            "violations": [
                {"x": v.x, "y": v.y, "input_distance": v.input_distance,
                 "output_distance": v.output_distance}
                for v in self.violations
            ],
            "verdict": self.verdict,
            "wall_ms": round(self.wall_ms, 1) if timing and self.wall_ms is not None else None,
        }

    def to_text(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2) + "\n"


def _word_str(idx: int, n: int) -> str:
    return "".join(map(str, index_to_words(np.array([idx]), n)[0].tolist()))


def _finish(job: VerificationJob, res: ChunkResult, t0: float) -> VerificationReport:
    m = job.mapping
    viol = sorted(res.violations)
    strategy = job.strategy.describe()
    if job.projection:
        strategy["projection"] = sorted(job.projection)
    return VerificationReport(
        mapping=m.name, n=m.n, k=m.k, mode=job.mode, strategy=strategy,
        seed=getattr(job.strategy, "seed", None), pairs_checked=res.pairs,
        min_slack=res.min_slack,
        violations=[Violation(_word_str(i, m.n), _word_str(j, m.n), din, dout)
                    for i, j, din, dout in viol],
        wall_ms=(time.perf_counter() - t0) * 1000.0,
        projection=tuple(sorted(job.projection or ())),
    )


def exhaustive_pair_count(n: int) -> int:
    size = 3**n
    return size * (size - 1) // 2


def verify(job: VerificationJob, workers: int | None = None) -> VerificationReport:
    """Run a verification job; the report does not depend on ``workers``."""
    t0 = time.perf_counter()
    m = job.mapping
    workers = workers or default_workers()
    keep = (job.projection or IndexSet()).keep_mask(m.length)
    if isinstance(job.strategy, Exhaustive):
        pairs = exhaustive_pair_count(m.n)
        if pairs > job.max_pairs:
            raise InfeasibleJobError(pairs, job.max_pairs)
        outputs = np.ascontiguousarray(m.outputs(force=True)[:, keep])
        res = scan_all_pairs(outputs, all_words(m.n), job.threshold, workers=workers)
        return _finish(job, res, t0)

    if m.domain_size <= _SAMPLE_MATERIALIZE:
        ctx = {"outputs": np.ascontiguousarray(m.outputs(force=True)[:, keep])}
    else:
        ctx = {"mapping": m, "keep": keep}
    ctx.update(n=m.n, threshold=job.threshold)
    chunks = _sample_chunks(job.strategy)
    res = run_chunks(_sample_task, chunks, ctx, workers)
    return _finish(job, res, t0)


def _sample_chunks(strategy) -> list[tuple]:
    if isinstance(strategy, Sampled):
        plan = [(0, c) for c in _split(strategy.sample_count)]
    elif isinstance(strategy, Stratified):
        plan = [(d, c) for d, q in sorted(strategy.quotas.items()) for c in _split(int(q))]
    else:
        raise TypeError(f"unknown strategy {strategy!r}")
    seeds = np.random.SeedSequence(strategy.seed).spawn(len(plan))
    return [(d, c, s) for (d, c), s in zip(plan, seeds)]


def _split(total: int) -> list[int]:
    full, rest = divmod(total, SAMPLE_CHUNK)
    return [SAMPLE_CHUNK] * full + ([rest] if rest else [])


@functools.lru_cache(maxsize=None)
def _combinations(n: int, d: int) -> np.ndarray:
    """All ``d``-subsets of digit positions (0 = least significant)."""
    return np.array(list(itertools.combinations(range(n), d)), dtype=np.int64)


def _images(ctx: dict, idx: np.ndarray) -> np.ndarray:
    if "outputs" in ctx:
        return ctx["outputs"][idx]
    return ctx["mapping"].evaluate_indices(idx)[:, ctx["keep"]]


def _sample_task(chunk: tuple) -> ChunkResult:
    ctx = context()
    d, count, seed = chunk
    n = ctx["n"]
    size = 3**n
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.integers(0, size, count, dtype=np.int64)
    if d == 0:
        y = (x + rng.integers(1, size, count, dtype=np.int64)) % size
        din = row_distances(index_to_words(x, n), index_to_words(y, n))
    else:
        combos = _combinations(n, d)
        weights = 3 ** combos[rng.integers(0, len(combos), count)]
        digits = (x[:, None] // weights) % 3
        shifted = (digits + rng.integers(1, 3, (count, d))) % 3
        y = x + ((shifted - digits) * weights).sum(axis=1)
        din = np.full(count, d, dtype=np.int16)
    dout = row_distances(_images(ctx, x), _images(ctx, y))
    slack = dout - din
    res = ChunkResult(pairs=count, min_slack=int(slack.min()))
    bad = np.flatnonzero(slack < ctx["threshold"])
    for b in bad.tolist():
        i, j = sorted((int(x[b]), int(y[b])))
        res.violations.append((i, j, int(din[b]), int(dout[b])))
    return res


def verify_projected(table: Mapping, X, mode: str = PRESERVE, workers: int | None = None) -> VerificationReport:
    """Exhaustive check after deleting output positions ``X``."""
    return verify(VerificationJob(table, mode, Exhaustive(), projection=IndexSet(X)), workers)


def verify_pa(pa, d: int, workers: int | None = None) -> VerificationReport:
    """Check that distinct members of a permutation array are at distance >= ``d``."""
    t0 = time.perf_counter()
    members = np.asarray(getattr(pa, "members", pa), dtype=np.uint8)
    if members.ndim != 2 or members.shape[0] == 0:
        raise ValueError("permutation array must be a non-empty 2-D collection")
    res = scan_all_pairs(members, None, 0, input_distance=d, workers=workers or default_workers())
    strategy = {"name": "pa", "d": int(d)}
    violations = [Violation(" ".join(map(str, members[i].tolist())),
                            " ".join(map(str, members[j].tolist())), din, dout)
                  for i, j, din, dout in sorted(res.violations)]
    return VerificationReport(
        mapping=getattr(pa, "name", "pa"), n=members.shape[1], k=None, mode="min-distance",
        strategy=strategy, seed=None, pairs_checked=res.pairs, min_slack=res.min_slack,
        violations=violations, wall_ms=(time.perf_counter() - t0) * 1000.0)
