"""Explicit filters and ultrafilters over finite ground sets."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import chain, combinations
from typing import Callable, Hashable, Iterable, Sequence

__all__ = [
    "FilterError", "FilterFamily", "validate_filter", "principal_ultrafilter",
    "ultrafilters_over", "subsets", "tails", "extend_to_ultrafilter", "MAX_GROUND",
]

MAX_GROUND = 12


class FilterError(ValueError):
    """A family failed one of the filter axioms; ``axiom`` names it."""

    def __init__(self, axiom: str, detail: str):
        super().__init__(f"{axiom}: {detail}")
        self.axiom = axiom


def subsets(ground: Sequence[Hashable]) -> list[frozenset]:
    """All subsets of ``ground`` ordered by size, then by position."""
    items = list(ground)
    return [frozenset(c) for c in chain.from_iterable(combinations(items, k) for k in range(len(items) + 1))]


@dataclass(frozen=True)
class FilterFamily:
    """A validated filter.  Flags are computed by :func:`validate_filter`."""

    ground: tuple
    members: frozenset
    is_ultrafilter: bool
    principal: Hashable | None
    is_tails: bool = False

    def __contains__(self, subset: Iterable) -> bool:
        return frozenset(subset) in self.members

    @property
    def kernel(self) -> frozenset:
        """Intersection of all members (the least member of a finite filter)."""
        out = frozenset(self.ground)
        for m in self.members:
            out &= m
        return out

    def sorted_members(self) -> list[frozenset]:
        pos = {x: i for i, x in enumerate(self.ground)}
        return sorted(self.members, key=lambda s: (len(s), sorted(pos[x] for x in s)))


def validate_filter(ground: Sequence[Hashable], family: Iterable[Iterable[Hashable]],
                    order: Callable[[Hashable, Hashable], bool] | None = None) -> FilterFamily:
    """Check the filter axioms and compute the classification flags.

    ``order`` is an optional partial order ``leq(a, b)`` on the ground set; when
    given, the tails flag records whether every tail ``{j | k <= j}`` is a member.
    """
    ground = tuple(ground)
    if len(set(ground)) != len(ground):
        raise FilterError("ground", "ground set has repeated elements")
    if len(ground) > MAX_GROUND:
        raise FilterError("ground", f"ground sets are limited to {MAX_GROUND} elements")
    gset = frozenset(ground)
    members = frozenset(frozenset(x) for x in family)
    for m in members:
        if not m <= gset:
            raise FilterError("subset", f"{sorted(map(str, m))} is not a subset of the ground set")
    if gset not in members:
        raise FilterError("ground-included", "the ground set is not a member")
    if frozenset() in members:
        raise FilterError("empty-excluded", "the empty set is a member")
    for a in members:
        for b in members:
            if a & b not in members:
                raise FilterError("intersection", "family is not closed under intersection")
    all_subsets = subsets(ground)
    for a in members:
        for s in all_subsets:
            if a <= s and s not in members:
                raise FilterError("superset", "family is not closed under supersets")
    is_ultra = all((s in members) != ((gset - s) in members) for s in all_subsets)
    kernel = gset
    for m in members:
        kernel &= m
    principal = None
    if len(kernel) == 1 and kernel in members:
        principal = next(iter(kernel))
        # a principal filter is exactly the supersets of its generator
        if any(principal not in s for s in members):
            principal = None
    is_tails = False
    if order is not None:
        is_tails = all(tails_of(ground, order, k) in members for k in ground)
    return FilterFamily(ground, members, is_ultra, principal, is_tails)


def tails_of(ground: Sequence[Hashable], leq: Callable[[Hashable, Hashable], bool], k: Hashable) -> frozenset:
    return frozenset(j for j in ground if leq(k, j))


def tails(ground: Sequence[Hashable], leq: Callable[[Hashable, Hashable], bool]) -> FilterFamily:
    """The filter generated by all tails of the order (upward closure of finite intersections)."""
    ground = tuple(ground)
    base = [tails_of(ground, leq, k) for k in ground]
    meet = frozenset(ground)
    for t in base:
        meet &= t
    if not meet:
        raise FilterError("empty-excluded", "the tails have empty intersection (order is not directed)")
    closure = {frozenset(ground)}
    frontier = set(base)
    while frontier:
        closure |= frontier
        frontier = {a & b for a in closure for b in closure} - closure
    members = [s for s in subsets(ground) if any(c <= s for c in closure)]
    return validate_filter(ground, members, order=leq)


def principal_ultrafilter(ground: Sequence[Hashable], point: Hashable) -> FilterFamily:
    ground = tuple(ground)
    if point not in ground:
        raise FilterError("subset", f"{point!r} is not in the ground set")
    return validate_filter(ground, [s for s in subsets(ground) if point in s])


def ultrafilters_over(ground: Sequence[Hashable]) -> list[FilterFamily]:
    """Every ultrafilter over a finite set; these are exactly the principal ones."""
    return [principal_ultrafilter(ground, g) for g in ground]


def extend_to_ultrafilter(ground: Sequence[Hashable], base: Iterable[Iterable[Hashable]]) -> FilterFamily:
    """Extend a filter base with nonempty finite intersections to an ultrafilter.

    The extension is principal at the first ground element (in ground order) of
    the intersection of the base.
    """
    ground = tuple(ground)
    meet = frozenset(ground)
    for b in base:
        meet &= frozenset(b)
    if not meet:
        raise FilterError("finite-intersection", "the base has empty intersection")
    point = next(g for g in ground if g in meet)
    return principal_ultrafilter(ground, point)
