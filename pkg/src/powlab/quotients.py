"""Hereditary identity and the ultrafilter relation on cumulative stages, their
quotients, the direct power and ultrapower hierarchies, canonical
isomorphisms, ultrafilter transport and Łoś checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Hashable, Iterable, Mapping, Sequence

from .cumulative import (
    Base, CumulativePower, HierElement, IndexFamily, apply_operation, holds_relation, nested, vartheta,
)
from .filters import (
    FilterError, FilterFamily, extend_to_ultrafilter, principal_ultrafilter, subsets, tails, validate_filter,
    ultrafilters_over,
)
from .finmodel import (
    DEFAULT_SIZE_GUARD, UNDEFINED, FiniteStructure, QuotientStructure, as_structure, build_quotient,
    direct_power, satisfies, ultrapower,
)
from .syntax import Formula, format_formula, free_variables

__all__ = [
    "FilterFamily", "FilterError", "validate_filter", "principal_ultrafilter", "ultrafilters_over", "tails",
    "QuotientStructure", "Ultra", "hereditary_equal", "ultra_equal", "quotient_by", "direct_power_level",
    "ultrapower_level", "IsoReport", "canonical_iso_direct", "canonical_iso_ultra",
    "TransportResult", "induced_ultrafilter_on_quotient", "FilterBaseResult", "induced_filterbase_on_carrier",
    "LosEntry", "LosReport", "los_check", "los_check_formula", "los_check_cumulative",
    "check_ultrafilters_for", "set_partitions",
]


def hereditary_equal(a: HierElement, b: HierElement, stage: int) -> bool:
    """a ≡ b: identity at stage 0; otherwise agreement of all ϑ^δ_j-images one stage down."""
    delta = max(a.level, b.level)
    if delta > stage:
        raise ValueError(f"elements of level {delta} do not belong to stage {stage}")
    if delta == 0:
        return a == b
    index = a.index if a.level == delta else b.index  # type: ignore[union-attr]
    return all(hereditary_equal(vartheta(delta, j, a, index), vartheta(delta, j, b, index), delta - 1)
               for j in index)


def _check_ultrafilters(fam: IndexFamily, Us: Sequence[FilterFamily], stage: int) -> None:
    if len(Us) < stage:
        raise ValueError(f"stage {stage} needs {stage} ultrafilters, got {len(Us)}")
    for m in range(stage):
        U = Us[m]
        if not U.is_ultrafilter:
            raise FilterError("ultrafilter", f"U_{m} is not an ultrafilter")
        if frozenset(U.ground) != frozenset(fam[m].elements):
            raise FilterError("ground", f"U_{m} is not over {fam[m].name}")


check_ultrafilters_for = _check_ultrafilters


def ultra_equal(a: HierElement, b: HierElement, stage: int, Us: Sequence[FilterFamily],
                fam: IndexFamily) -> bool:
    """a ~ b at ``stage``: {j ∈ I_{stage-1} | ϑ^δ_j(a) ~ ϑ^δ_j(b)} ∈ U_{stage-1}."""
    _check_ultrafilters(fam, Us, stage)
    return _ultra_equal(a, b, stage, Us, fam)


def _ultra_equal(a: HierElement, b: HierElement, stage: int, Us: Sequence[FilterFamily], fam: IndexFamily) -> bool:
    if stage == 0:
        return a == b
    delta = max(a.level, b.level)
    if delta == 0:
        return a == b
    index = fam[stage - 1]
    agree = frozenset(j for j in index
                      if _ultra_equal(vartheta(delta, j, a, index), vartheta(delta, j, b, index), stage - 1, Us, fam))
    return agree in Us[stage - 1].members


def _hkey(a: HierElement, n: int, fam: IndexFamily) -> Hashable:
    """Full-depth normal form: a ≡ b iff their keys at the common stage coincide."""
    if n == 0:
        return a.value  # type: ignore[union-attr]
    index = fam[n - 1]
    if a.level == n:
        return tuple(_hkey(v, n - 1, fam) for v in a.values)  # type: ignore[union-attr]
    k = _hkey(a, n - 1, fam)
    return (k,) * len(index)


def _ukey(a: HierElement, n: int, Us: Sequence[FilterFamily], fam: IndexFamily) -> Hashable:
    """Class key for ~ using the generator of each (necessarily principal) ultrafilter."""
    if n == 0:
        return a.value  # type: ignore[union-attr]
    g = Us[n - 1].principal
    if g is None:
        raise FilterError("principal", "ultrafilter over a finite set without a generator")
    return _ukey(vartheta(n, g, a, fam[n - 1]), n - 1, Us, fam)


@dataclass(frozen=True)
class Ultra:
    """Selector for the ultrafilter relation with one ultrafilter per index set."""

    ultrafilters: tuple


def quotient_by(cp: CumulativePower, relation: str | Ultra) -> QuotientStructure:
    """𝔉_n (``"hereditary"``) or 𝔽_n (``Ultra(Us)``) with verified induced interpretations.

    Relations follow the existential clause: a class tuple is related iff some
    member tuple is related; for 𝔽 the members are drawn from the top level.
    Constants are the classes of the base interpretations.
    """
    n, fam = cp.stage, cp.family
    S = cp.base
    if relation == "hereditary":
        keyf = lambda x: _hkey(x, n, fam)  # noqa: E731
        provenance = "hereditary-identity"
        candidates = None
    elif isinstance(relation, Ultra):
        Us = tuple(relation.ultrafilters)
        _check_ultrafilters(fam, Us, n)
        keyf = lambda x: _ukey(x, n, Us, fam)  # noqa: E731
        provenance = "ultrafilter"
        top = cp.top_level()

        def candidates(rel: str) -> Iterable[tuple]:
            return product(top, repeat=S.signature.relations[rel])
    else:
        raise ValueError(f"unknown relation {relation!r}")
    groups: dict[Hashable, list] = {}
    for x in cp.carrier:
        groups.setdefault(keyf(x), []).append(x)
    classes = list(groups.values())
    constants = {c: Base(v) for c, v in S.constants.items()}
    q = build_quotient(cp.carrier, classes, S.signature,
                       op=lambda f, args: apply_operation(cp, f, args),
                       relation=lambda r, args: holds_relation(cp, r, args),
                       relation_mode="exists", constants=constants, provenance=provenance,
                       name=f"{'𝔉' if relation == 'hereditary' else '𝔽'}{n}({S.name})",
                       relation_candidates=candidates)
    q.extra["stage"] = n
    q.extra["relation"] = relation
    return q


def direct_power_level(S: Any, fam: IndexFamily, n: int, guard: int = DEFAULT_SIZE_GUARD) -> FiniteStructure:
    """Π_n: the n-fold iterated direct power over I_0, ..., I_{n-1} (nested tuples)."""
    P = as_structure(S)
    if n > len(fam):
        raise ValueError("stage exceeds the index family")
    for m in range(n):
        P = direct_power(P, fam[m].elements, guard)
    return P


def _identity_quotient(S: FiniteStructure) -> QuotientStructure:
    return QuotientStructure(S.carrier, tuple((x,) for x in S.carrier), {x: x for x in S.carrier}, S, "identity")


def ultrapower_level(S: Any, fam: IndexFamily, Us: Sequence[FilterFamily], n: int,
                     guard: int = DEFAULT_SIZE_GUARD) -> QuotientStructure:
    """Υ_n: iterate Υ_{m+1} = Υ_m^{I_m} / U_m on canonical representatives."""
    S = as_structure(S)
    _check_ultrafilters(fam, Us, n)
    q = _identity_quotient(S)
    for m in range(n):
        q = ultrapower(q.structure, fam[m].elements, Us[m], guard)
    return q


@dataclass
class IsoReport:
    ok: bool
    mapping: dict
    failures: list[str] = field(default_factory=list)
    checked: int = 0


def _verify_iso(P: FiniteStructure, Q: FiniteStructure, mapping: Mapping) -> IsoReport:
    failures: list[str] = []
    checked = 0
    images = [mapping[x] for x in P.carrier]
    if len(set(images)) != len(images):
        failures.append("map is not injective")
    if set(images) != set(Q.carrier):
        failures.append("map is not surjective")
    for fn, ar in P.signature.functions.items():
        for args in product(P.carrier, repeat=ar):
            checked += 1
            v = P.apply(fn, args)
            w = Q.apply(fn, [mapping[a] for a in args])
            expected = UNDEFINED if v is UNDEFINED else mapping[v]
            if (w is UNDEFINED) != (expected is UNDEFINED) or (w is not UNDEFINED and w != expected):
                failures.append(f"{fn}{args!r}")
    for rel, ar in P.signature.relations.items():
        for t in product(P.carrier, repeat=ar):
            checked += 1
            if P.holds(rel, t) != Q.holds(rel, [mapping[a] for a in t]):
                failures.append(f"{rel}{t!r}")
    for c, v in P.constants.items():
        checked += 1
        if mapping[v] != Q.constants.get(c):
            failures.append(f"constant {c}")
    return IsoReport(not failures, dict(mapping), failures[:20], checked)


def canonical_iso_direct(S: Any, fam: IndexFamily, n: int, guard: int = DEFAULT_SIZE_GUARD) -> IsoReport:
    """x ↦ [x]_≡ from Π_n onto 𝔉_n, verified exhaustively."""
    S = as_structure(S)
    P = direct_power_level(S, fam, n, guard)
    cp = CumulativePower(S, fam, n, plus=True, guard=guard)
    Fq = quotient_by(cp, "hereditary")
    mapping = {x: Fq.class_of[nested(x, fam, n)] for x in P.carrier}
    return _verify_iso(P, Fq.structure, mapping)


def canonical_iso_ultra(S: Any, fam: IndexFamily, Us: Sequence[FilterFamily], n: int,
                        guard: int = DEFAULT_SIZE_GUARD) -> IsoReport:
    """Representatives of Υ_n (nested tuples) to their ~-classes in 𝔽_n, verified exhaustively."""
    S = as_structure(S)
    Y = ultrapower_level(S, fam, Us, n, guard)
    cp = CumulativePower(S, fam, n, plus=True, guard=guard)
    Fq = quotient_by(cp, Ultra(tuple(Us)))
    mapping = {x: Fq.class_of[nested(x, fam, n)] for x in Y.structure.carrier}
    return _verify_iso(Y.structure, Fq.structure, mapping)


# Ultrafilter transport


@dataclass
class TransportResult:
    ultrafilter: FilterFamily
    witness: dict
    witness_ok: bool


def _labels(ground: Sequence[Hashable], partition: Sequence[Iterable[Hashable]]) -> tuple[list, dict]:
    pos = {x: i for i, x in enumerate(ground)}
    blocks = [sorted(set(b), key=pos.__getitem__) for b in partition]
    flat = [x for b in blocks for x in b]
    if len(flat) != len(ground) or set(flat) != set(ground) or any(not b for b in blocks):
        raise ValueError("not a partition of the ground set")
    blocks.sort(key=lambda b: pos[b[0]])
    class_of = {x: b[0] for b in blocks for x in b}
    return [b[0] for b in blocks], class_of


def induced_ultrafilter_on_quotient(U: FilterFamily, partition: Sequence[Iterable[Hashable]]) -> TransportResult:
    """U' = {{[x] | x ∈ X} | X ∈ U} over the classes (labelled by least members), with
    the class map as Rudin–Keisler witness."""
    if not U.is_ultrafilter:
        raise FilterError("ultrafilter", "U is not an ultrafilter")
    labels, h = _labels(U.ground, partition)
    members = {frozenset(h[x] for x in X) for X in U.members}
    Uq = validate_filter(labels, members)
    ok = Uq.is_ultrafilter and all(
        (Y in Uq.members) == (frozenset(x for x in U.ground if h[x] in Y) in U.members)
        for Y in subsets(labels))
    return TransportResult(Uq, h, ok)


@dataclass
class FilterBaseResult:
    base: frozenset
    extension: FilterFamily
    recovered: bool


def induced_filterbase_on_carrier(Uq: FilterFamily, ground: Sequence[Hashable],
                                  partition: Sequence[Iterable[Hashable]]) -> FilterBaseResult:
    """F = {{x | [x] ∈ X} | X ∈ U} plus its principal extension; ``recovered`` records
    that the extension's quotient image is U again."""
    labels, h = _labels(ground, partition)
    if frozenset(Uq.ground) != frozenset(labels):
        raise ValueError("ultrafilter is not over the class labels")
    base = frozenset(frozenset(x for x in ground if h[x] in X) for X in Uq.members)
    ok_base = all((frozenset(x for x in ground if h[x] in X) in base) == (X in Uq.members)
                  for X in subsets(labels))
    ext = extend_to_ultrafilter(ground, base)
    image = induced_ultrafilter_on_quotient(ext, partition).ultrafilter
    return FilterBaseResult(base, ext, ok_base and image.members == Uq.members)


def set_partitions(items: Sequence[Hashable]) -> list[list[list]]:
    """All set partitions of ``items`` with blocks in first-occurrence order."""
    items = list(items)
    if not items:
        return [[]]
    out = []
    for rest in set_partitions(items[1:]):
        out.append([[items[0]]] + [list(b) for b in rest])
        for i in range(len(rest)):
            out.append([list(b) if k != i else [items[0]] + list(b) for k, b in enumerate(rest)])
    return out


# Łoś


@dataclass(frozen=True)
class LosEntry:
    formula: str
    ultrapower_side: bool
    index_side: bool

    @property
    def agree(self) -> bool:
        return self.ultrapower_side == self.index_side


@dataclass
class LosReport:
    entries: list[LosEntry]

    @property
    def agreement(self) -> float:
        return sum(e.agree for e in self.entries) / len(self.entries) if self.entries else 1.0

    @property
    def all_agree(self) -> bool:
        return all(e.agree for e in self.entries)


def los_check(S: Any, I: Sequence[Hashable], U: FilterFamily, sentences: Iterable[Formula],
              quotient: QuotientStructure | None = None) -> LosReport:
    """Compare A^I/U ⊨ φ with {j ∈ I | A ⊨ φ} ∈ U for each sentence."""
    S = as_structure(S)
    I = tuple(I)
    Q = quotient if quotient is not None else ultrapower(S, I, U)
    entries = []
    for phi in sentences:
        if free_variables(phi):
            raise ValueError(f"{format_formula(phi)} is not a sentence")
        lhs = satisfies(Q.structure, phi)
        truth_at = {j: satisfies(S, phi) for j in I}
        rhs = frozenset(j for j in I if truth_at[j]) in U.members
        entries.append(LosEntry(format_formula(phi), lhs, rhs))
    return LosReport(entries)


def los_check_formula(S: Any, I: Sequence[Hashable], U: FilterFamily, phi: Formula,
                      quotient: QuotientStructure | None = None) -> LosReport:
    """Assignment-level Łoś: every assignment of functions to the free variables."""
    S = as_structure(S)
    I = tuple(I)
    Q = quotient if quotient is not None else ultrapower(S, I, U)
    variables = sorted(free_variables(phi))
    entries = []
    P = Q.extra.get("power") or direct_power(S, I)
    for fs in product(P.carrier, repeat=len(variables)):
        lhs = satisfies(Q.structure, phi, {v: Q.class_of[f] for v, f in zip(variables, fs)})
        good = frozenset(j for p, j in enumerate(I)
                         if satisfies(S, phi, {v: f[p] for v, f in zip(variables, fs)}))
        entries.append(LosEntry(f"{format_formula(phi)} @ {fs}", lhs, good in U.members))
    return LosReport(entries)


def los_check_cumulative(cp: CumulativePower, Us: Sequence[FilterFamily], phi: Formula,
                         lower: QuotientStructure | None = None,
                         upper: QuotientStructure | None = None) -> LosReport:
    """𝔽_{n} ⊨ φ[[a]] iff {j ∈ I_{n-1} | 𝔽_{n-1} ⊨ φ[[a(j)]]} ∈ U_{n-1}, for top-level a."""
    n = cp.stage
    if n < 1:
        raise ValueError("the stage must be at least 1")
    fam = cp.family
    Us = tuple(Us)
    up = upper if upper is not None else quotient_by(cp, Ultra(Us))
    low_cp = CumulativePower(cp.base, fam, n - 1, plus=cp.plus)
    low = lower if lower is not None else quotient_by(low_cp, Ultra(Us[: n - 1]))
    variables = sorted(free_variables(phi))
    index = fam[n - 1]
    entries = []
    for xs in product(cp.top_level(), repeat=len(variables)):
        lhs = satisfies(up.structure, phi, {v: up.class_of[x] for v, x in zip(variables, xs)})
        good = frozenset(j for j in index if satisfies(
            low.structure, phi, {v: low.class_of[x(j)] for v, x in zip(variables, xs)}))  # type: ignore[operator]
        entries.append(LosEntry(f"{format_formula(phi)} @ {xs}", lhs, good in Us[n - 1].members))
    return LosReport(entries)
