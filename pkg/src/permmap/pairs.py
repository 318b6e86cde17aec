"""Pair-scanning kernels and the worker pool that runs them.

The exhaustive scan visits unordered pairs ``(i, j)``, ``i < j``, of rows of
an image array in lexicographic order. Work is cut into contiguous row
chunks whose boundaries depend only on the number of rows, so merged
results are identical for any worker count.
"""
from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_BLOCK_CELLS = 1 << 22
_CHUNK_PAIRS = 1 << 24
_NO_SLACK = np.iinfo(np.int16).max


@dataclass
class ChunkResult:
    pairs: int = 0
    min_slack: int | None = None
    # each entry: (i, j, input distance, output distance), i/j being row ranks
    violations: list = field(default_factory=list)

    def merge(self, other: "ChunkResult") -> "ChunkResult":
        self.pairs += other.pairs
        if other.min_slack is not None:
            self.min_slack = (other.min_slack if self.min_slack is None
                              else min(self.min_slack, other.min_slack))
        self.violations.extend(other.violations)
        return self


def distance_matrix(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Hamming distances between every row of ``left`` and every row of ``right``."""
    out = np.zeros((left.shape[0], right.shape[0]), dtype=np.int16)
    for col in range(left.shape[1]):
        out += left[:, col, None] != right[None, :, col]
    return out


def row_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a != b).sum(axis=1, dtype=np.int16)


def exhaustive_chunks(n_rows: int, target_pairs: int = _CHUNK_PAIRS) -> list[tuple[int, int]]:
    """Contiguous row ranges holding roughly ``target_pairs`` pairs each."""
    chunks = []
    start, acc = 0, 0
    for i in range(n_rows - 1):
        acc += n_rows - 1 - i
        if acc >= target_pairs:
            chunks.append((start, i + 1))
            start, acc = i + 1, 0
    if start < n_rows - 1:
        chunks.append((start, n_rows - 1))
    return chunks


def scan_rows(outputs: np.ndarray, inputs: np.ndarray | None, start: int, stop: int,
              threshold: int, input_distance: int = 0) -> ChunkResult:
    """Check pairs ``(i, j)`` with ``start <= i < stop`` and ``i < j``.

    A pair violates when ``d(out_i, out_j) - d(in_i, in_j) < threshold``.
    With ``inputs=None`` the input distance is the constant ``input_distance``
    (used for minimum-distance checks of permutation arrays).
    """
    n_rows = outputs.shape[0]
    result = ChunkResult()
    a = start
    while a < stop:
        cols = n_rows - a
        b = min(stop, a + max(1, _BLOCK_CELLS // cols))
        slack = distance_matrix(outputs[a:b], outputs[a:])
        if inputs is not None:
            slack -= distance_matrix(inputs[a:b], inputs[a:])
        else:
            slack -= input_distance
        rows = b - a
        tri = np.tril_indices(rows, 0, m=cols)
        slack[tri] = _NO_SLACK
        result.pairs += rows * cols - len(tri[0])
        if result.pairs:
            low = int(slack.min())
            if low != _NO_SLACK:
                result.min_slack = low if result.min_slack is None else min(result.min_slack, low)
        bad_r, bad_c = np.nonzero(slack < threshold)
        if len(bad_r):
            ii = bad_r + a
            jj = bad_c + a
            dout = row_distances(outputs[ii], outputs[jj])
            if inputs is not None:
                din = row_distances(inputs[ii], inputs[jj])
            else:
                din = np.full(len(ii), input_distance)
            result.violations.extend(zip(ii.tolist(), jj.tolist(), din.tolist(), dout.tolist()))
        a = b
    return result


# -- worker pool ------------------------------------------------------------

_CONTEXT: dict = {}


def _install(context: dict) -> None:
    _CONTEXT.clear()
    _CONTEXT.update(context)


def context() -> dict:
    return _CONTEXT


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_chunks(func: Callable, chunks: Sequence, ctx: dict, workers: int | None = None) -> ChunkResult:
    """Apply ``func`` to every chunk, merging results in chunk order."""
    workers = workers or default_workers()
    total = ChunkResult()
    if workers <= 1 or len(chunks) <= 1:
        saved = dict(_CONTEXT)
        _install(ctx)
        try:
            for chunk in chunks:
                total.merge(func(chunk))
        finally:
            _install(saved)
        return total
    mp = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=min(workers, len(chunks)), mp_context=mp,
                             initializer=_install, initargs=(ctx,)) as pool:
        for res in pool.map(func, chunks):
            total.merge(res)
    return total


def _exhaustive_task(chunk: tuple[int, int]) -> ChunkResult:
    ctx = _CONTEXT
    return scan_rows(ctx["outputs"], ctx.get("inputs"), chunk[0], chunk[1],
                     ctx["threshold"], ctx.get("input_distance", 0))


def scan_all_pairs(outputs: np.ndarray, inputs: np.ndarray | None, threshold: int,
                   input_distance: int = 0, workers: int | None = 1) -> ChunkResult:
    """Exhaustive scan over all unordered row pairs."""
    outputs = np.ascontiguousarray(outputs)
    chunks = exhaustive_chunks(outputs.shape[0])
    ctx = {"outputs": outputs, "inputs": inputs, "threshold": threshold,
           "input_distance": input_distance}
    return run_chunks(_exhaustive_task, chunks, ctx, workers)
