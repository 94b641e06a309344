"""Exhaustive enumeration of small posets up to isomorphism."""

from __future__ import annotations

from functools import lru_cache
from typing import List

from .poset import Poset, antichains, canonical_form, from_canonical, from_cover_edges, _bits

NAMES = "abcdefghijklmnop"


@lru_cache(maxsize=None)
def _all_keys(n: int) -> tuple:
    if n == 0:
        return ()
    if n == 1:
        return (canonical_form(from_cover_edges("a", [])),)
    keys = set()
    new = NAMES[n - 1]
    for key in _all_keys(n - 1):
        P = from_canonical(key, NAMES)
        for a in antichains(P):
            covers = list(P.covers) + [(P.elements[i], new) for i in _bits(a)]
            keys.add(canonical_form(from_cover_edges(list(P.elements) + [new], covers)))
    return tuple(sorted(keys))


def all_posets(n: int) -> List[Poset]:
    """One representative per isomorphism class of n-element posets."""
    return [from_canonical(k, NAMES) for k in _all_keys(n)]


def connected_posets(n: int) -> List[Poset]:
    return [P for P in all_posets(n) if P.is_connected()]


def connected_posets_upto(max_elements: int) -> List[Poset]:
    out: List[Poset] = []
    for n in range(1, max_elements + 1):
        out.extend(connected_posets(n))
    return out
