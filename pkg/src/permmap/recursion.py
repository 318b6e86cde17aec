"""One-coordinate extension of a mapping and chains of such extensions.

Extending ``f: Z_3^n -> S_{n+k}`` gives ``g: Z_3^{n+1} -> S_{n+k+1}``. With
``phi = f(x)`` and ``r`` the position holding the pivot value ``n+k-4``:

* ``g(x|0)`` appends ``n+k+1``;
* ``g(x|1)`` writes ``n+k+1`` at ``r`` and appends the pivot;
* ``g(x|2)`` moves the last coordinate of ``phi`` (or, when ``n`` is even
  and the last trit of ``x`` is 2, the second to last) to the new end and
  writes ``n+k+1`` in its place.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mapping import Mapping

PRESERVE = "preserve"
INCREASE = "increase"


class ConstructionError(ValueError):
    pass


class IneligibleError(ValueError):
    """A base mapping does not meet the conditions for starting a chain."""

    def __init__(self, message: str, witnesses: list | None = None):
        super().__init__(message)
        self.witnesses = witnesses or []


class ExtendedMapping(Mapping):
    """``g = H(f)``, evaluated by walking back to the base mapping."""

    def __init__(self, base: Mapping, name: str | None = None):
        pivot = base.n + base.k - 4
        if pivot < 1:
            raise ConstructionError(
                f"cannot extend {base.name}: pivot value n+k-4 = {pivot} does not exist")
        super().__init__(base.n + 1, base.k, name or f"{base.name}+1")
        self.base = base
        self.pivot = pivot

    @property
    def root(self) -> Mapping:
        m = self
        while isinstance(m, ExtendedMapping):
            m = m.base
        return m

    def _evaluate(self, words: np.ndarray) -> np.ndarray:
        prefix, last = words[:, :-1], words[:, -1]
        phi = self.base.evaluate_many(prefix)
        m, width = phi.shape  # width = n + k of the base
        new = width + 1
        out = np.empty((m, new), dtype=np.uint8)
        out[:, :width] = phi
        rows = np.arange(m)

        zero = last == 0
        out[zero, width] = new

        one = last == 1
        r = np.argmax(phi == self.pivot, axis=1)
        out[rows[one], r[one]] = new
        out[one, width] = self.pivot

        two = last == 2
        n_base = self.base.n
        if n_base % 2 == 1:
            moved = np.full(m, width - 1)
        else:
            moved = np.where(prefix[:, -1] == 2, width - 2, width - 1)
        sel = rows[two]
        out[sel, width] = phi[sel, moved[two]]
        out[sel, moved[two]] = new
        return out


def extend_once(f: Mapping) -> ExtendedMapping:
    return ExtendedMapping(f, name=_chain_name(f, f.n + 1))


def extend_to(f: Mapping, target_n: int) -> Mapping:
    """Apply :func:`extend_once` until the domain length is ``target_n``."""
    if target_n < f.n:
        raise ValueError(f"target length {target_n} is below the base length {f.n}")
    g = f
    while g.n < target_n:
        g = ExtendedMapping(g, name=_chain_name(f, g.n + 1))
    return g


def _chain_name(f: Mapping, n: int) -> str:
    root = f.root if isinstance(f, ExtendedMapping) else f
    return f"{root.name}_{n}"


def last_symbol_violations(f: Mapping) -> np.ndarray:
    """Ranks of words whose image ends in ``n+k-4`` or ``n+k-3``."""
    width = f.length
    last = f.outputs(force=True)[:, -1].astype(np.int64)
    return np.flatnonzero((last == width - 4) | (last == width - 3))


@dataclass(frozen=True)
class EligibilityCertificate:
    m: int
    k: int
    mode: str
    excluded_last_symbols: frozenset


def certify_base(f: Mapping, mode: str = INCREASE) -> EligibilityCertificate:
    """Check the hypotheses under which every ``extend_to(f, n)`` stays in class.

    Only the structural conditions are checked here (odd length, ``k`` valid
    for the mode, last-symbol exclusion); the distance property of ``f``
    itself is the job of :func:`permmap.verify.verify`.
    """
    from .core import TernaryWord

    if mode not in (PRESERVE, INCREASE):
        raise ValueError(f"unknown mode {mode!r}")
    if f.n % 2 == 0:
        raise IneligibleError(f"{f.name}: base length {f.n} is even")
    if mode == INCREASE and f.k < 1:
        raise IneligibleError(f"{f.name}: increase mode needs k >= 1")
    excluded = frozenset({f.length - 4, f.length - 3})
    bad = last_symbol_violations(f)
    if len(bad):
        witnesses = [TernaryWord.from_index(int(i), f.n) for i in bad]
        raise IneligibleError(
            f"{f.name}: {len(bad)} words end in {sorted(excluded)}", witnesses)
    return EligibilityCertificate(f.n, f.k, mode, excluded)
