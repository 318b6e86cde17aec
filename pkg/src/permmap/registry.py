"""Resolve textual mapping descriptors.

``table:<name|path>``, ``extend:<base>:<target_n>``, ``p91``, ``p130``, ``u``
and ``v``. A bare table name (``F``, ``G``, ``H``/``H4``, ``R``, ``S``,
``T``) is accepted wherever a descriptor is.
"""
from __future__ import annotations

import functools
from pathlib import Path

from .compose import compose_p91, compose_p130, compose_u, compose_v
from .mapping import Mapping
from .recursion import extend_to
from .tables import ALIASES, BUILTIN_TABLES, builtin_table, load_table

COMPOSITES = {
    "p91": compose_p91,
    "p130": compose_p130,
    "u": compose_u,
    "v": compose_v,
}


@functools.lru_cache(maxsize=None)
def _composite(name: str) -> Mapping:
    return COMPOSITES[name]()


def resolve_mapping(descriptor: str) -> Mapping:
    kind, sep, rest = descriptor.partition(":")
    if not sep:
        if descriptor.lower() in COMPOSITES:
            return _composite(descriptor.lower())
        if descriptor in BUILTIN_TABLES or descriptor in ALIASES:
            return builtin_table(descriptor)
        raise ValueError(f"cannot resolve mapping {descriptor!r}")
    if kind == "table":
        if rest in BUILTIN_TABLES or rest in ALIASES:
            return builtin_table(rest)
        if Path(rest).is_file():
            return load_table(rest)
        raise ValueError(f"no shipped table or file named {rest!r}")
    if kind == "extend":
        base, sep, target = rest.rpartition(":")
        if not sep:
            raise ValueError("extend descriptors look like extend:<base>:<target_n>")
        return extend_to(resolve_mapping(base), int(target))
    raise ValueError(f"unknown mapping kind {kind!r}")
