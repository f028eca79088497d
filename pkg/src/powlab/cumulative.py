"""Finite stages of the cumulative power hierarchy.

Stage 0 is the base structure.  Stage n+1 adds every function from the index
set ``I_n`` into stage n.  Operations and relations are extended hereditarily
through the coordinate map ``vartheta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Any, Hashable, Iterable, Iterator, Mapping, Sequence

from .finmodel import (
    DEFAULT_SIZE_GUARD, UNDEFINED, FiniteStructure, SizeGuardError, as_structure, embedding_failures,
    satisfies,
)
from .syntax import Formula, SymbolError, constants_of

__all__ = [
    "IndexSet", "IndexFamily", "HierElement", "Base", "Func", "MalformedElementError",
    "level", "vartheta", "thetas", "CumulativePower", "build_level", "apply_operation",
    "holds_relation", "constant_predicate", "hereditary_constant", "vartheta_inverse",
    "satisfies_cumulative", "lift_embedding", "element_name", "nested",
]


class MalformedElementError(ValueError):
    pass


@dataclass(frozen=True)
class IndexSet:
    """A named finite index set sitting at position ``stage`` of its family."""

    name: str
    elements: tuple
    stage: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        if len(set(self.elements)) != len(self.elements):
            raise ValueError(f"index set {self.name} repeats an element")
        object.__setattr__(self, "_pos", {j: i for i, j in enumerate(self.elements)})

    def position(self, j: Hashable) -> int:
        return self._pos[j]  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator:
        return iter(self.elements)


class IndexFamily:
    """Ordered index sets I_0, I_1, ... with distinct names, each of size at least 2."""

    def __init__(self, sets: Iterable[tuple[str, Sequence[Hashable]]], min_size: int = 2):
        built = []
        names = set()
        for stage, (name, elems) in enumerate(sets):
            if name in names:
                raise ValueError(f"index set name {name!r} reused")
            names.add(name)
            s = IndexSet(name, tuple(elems), stage)
            if len(s) < min_size:
                raise ValueError(f"index set {name} has {len(s)} element(s); at least {min_size} required")
            built.append(s)
        self.sets: tuple[IndexSet, ...] = tuple(built)

    def __getitem__(self, m: int) -> IndexSet:
        return self.sets[m]

    def __len__(self) -> int:
        return len(self.sets)

    def by_name(self, name: str) -> IndexSet:
        for s in self.sets:
            if s.name == name:
                return s
        raise KeyError(name)

    def __repr__(self) -> str:
        return "IndexFamily(" + ", ".join(f"{s.name}:{list(s.elements)}" for s in self.sets) + ")"


class HierElement:
    __slots__ = ()


class Base(HierElement):
    """A base element a of A (level 0)."""

    __slots__ = ("value", "_hash")

    def __init__(self, value: Hashable):
        self.value = value
        self._hash = hash(("B", value))

    @property
    def level(self) -> int:
        return 0

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Base) and self.value == other.value

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Base({self.value!r})"

    def __reduce__(self):
        return (Base, (self.value,))


class Func(HierElement):
    """A total function from an index set into lower stages; ``values`` follow the index order."""

    __slots__ = ("index", "values", "level", "_hash")

    def __init__(self, index: IndexSet, values: Sequence[HierElement]):
        values = tuple(values)
        if len(values) != len(index.elements):
            raise MalformedElementError(f"Func over {index.name} needs {len(index.elements)} values")
        for v in values:
            if not isinstance(v, HierElement):
                raise MalformedElementError(f"value {v!r} is not a hierarchy element")
            if v.level > index.stage:
                raise MalformedElementError(
                    f"value of level {v.level} inside a function over {index.name} (stage {index.stage})")
        self.index = index
        self.values = values
        self.level = index.stage + 1
        self._hash = hash((index.name, values))

    def __call__(self, j: Hashable) -> HierElement:
        return self.values[self.index.position(j)]

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (isinstance(other, Func) and self._hash == other._hash and self.index.name == other.index.name
                and self.values == other.values)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Func({self.index.name}, {list(self.values)!r})"

    def __reduce__(self):
        return (Func, (self.index, self.values))


def constant_func(index: IndexSet, value: HierElement) -> Func:
    return Func(index, [value] * len(index))


def level(e: HierElement, fam: IndexFamily | None = None) -> int:
    """The least stage containing ``e``; with distinct index-set names this is the tag depth."""
    if isinstance(e, Base):
        return 0
    if not isinstance(e, Func):
        raise MalformedElementError(f"{e!r} is not a hierarchy element")
    if fam is not None:
        if e.index.stage >= len(fam) or fam[e.index.stage].name != e.index.name \
                or fam[e.index.stage].elements != e.index.elements:
            raise MalformedElementError(f"{e.index.name} is not part of the index family")
        for v in e.values:
            if level(v, fam) > e.index.stage:
                raise MalformedElementError("value level too high")
    return e.level


def vartheta(alpha: int, j: Hashable, e: HierElement, index: str | IndexSet) -> HierElement:
    """e(j) when level(e) >= alpha and j lies in the domain of e, else e itself.

    ``index`` names the index set that ``j`` is drawn from, so that indices
    with equal labels in different sets are never confused.
    """
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    name = index.name if isinstance(index, IndexSet) else index
    if isinstance(e, Func) and e.level >= alpha and e.index.name == name:
        return e.values[e.index.position(j)]
    return e


def thetas(delta: int, args: Sequence[HierElement], index: IndexSet) -> Iterator[tuple[HierElement, ...]]:
    """The argument tuples vartheta^delta_j(args) for j running through ``index``."""
    for p, j in enumerate(index.elements):
        yield tuple(a.values[p] if isinstance(a, Func) and a.level >= delta and a.index.name == index.name
                    else a for a in args)


def element_name(e: HierElement) -> str:
    """Printable id without whitespace, commas or parentheses."""
    if isinstance(e, Base):
        return str(e.value)
    return f"{e.index.name}[{';'.join(element_name(v) for v in e.values)}]"


def nested(x: Any, fam: IndexFamily, n: int) -> HierElement:
    """Embed an element of the n-fold iterated direct power (nested tuples) as a level-n function."""
    if n == 0:
        return Base(x)
    idx = fam[n - 1]
    return Func(idx, [nested(v, fam, n - 1) for v in x])


class _LazyTable:
    """A function table of a cumulative stage computed on demand."""

    def __init__(self, cp: "CumulativePower", fn: str):
        self.cp = cp
        self.fn = fn

    def get(self, args: tuple, default: Any = UNDEFINED) -> Any:
        v = apply_operation(self.cp, self.fn, args)
        return default if v is UNDEFINED else v

    def items(self) -> Iterator[tuple[tuple, HierElement]]:
        ar = self.cp.base.signature.functions[self.fn]
        for args in product(self.cp.carrier, repeat=ar):
            v = apply_operation(self.cp, self.fn, args)
            if v is not UNDEFINED:
                yield args, v


class _LazyRelation:
    def __init__(self, cp: "CumulativePower", rel: str):
        self.cp = cp
        self.rel = rel

    def __contains__(self, args: tuple) -> bool:
        return holds_relation(self.cp, self.rel, args)

    def __iter__(self) -> Iterator[tuple]:
        ar = self.cp.base.signature.relations[self.rel]
        for t in product(self.cp.carrier, repeat=ar):
            if holds_relation(self.cp, self.rel, t):
                yield t


class CumulativePower:
    """Stage ``n`` of the cumulative power hierarchy over ``base``.

    The carrier is materialized eagerly in canonical order: base elements as
    declared, then level-1 functions lexicographically by value positions in
    the stage-0 carrier, then level-2 functions, and so on.  Interpretations are
    memoized on demand.
    """

    def __init__(self, base: FiniteStructure, fam: IndexFamily, n: int, plus: bool = False,
                 guard: int = DEFAULT_SIZE_GUARD):
        if n < 0 or n > len(fam):
            raise ValueError(f"stage {n} needs {n} index sets, family has {len(fam)}")
        self.base = base
        self.family = fam
        self.stage = n
        self.plus = plus
        layers: list[list[HierElement]] = [[Base(x) for x in base.carrier]]
        carrier: list[HierElement] = list(layers[0])
        for m in range(n):
            size = len(carrier) ** len(fam[m]) + len(carrier)
            if size > guard:
                raise SizeGuardError(f"stage {m + 1} would have {size} elements (guard {guard})")
            top = [Func(fam[m], vals) for vals in product(carrier, repeat=len(fam[m]))]
            layers.append(top)
            carrier = carrier + top
        self.layers = layers
        self.carrier: tuple[HierElement, ...] = tuple(carrier)
        self.index = {x: i for i, x in enumerate(self.carrier)}
        self._ops: dict[tuple, Any] = {}
        self._rels: dict[tuple, bool] = {}
        self._structure: FiniteStructure | None = None

    def __len__(self) -> int:
        return len(self.carrier)

    def top_level(self) -> tuple[HierElement, ...]:
        return tuple(self.layers[self.stage])

    def as_structure(self) -> FiniteStructure:
        """View as a FiniteStructure with lazily computed tables.

        σ-constants are interpreted (as the n-th hereditary constant) only in plus mode.
        """
        if self._structure is None:
            sig = self.base.signature if self.plus else self.base.signature.without_constants()
            functions = {f: _LazyTable(self, f) for f in sig.functions}
            relations = {r: _LazyRelation(self, r) for r in sig.relations}
            constants = {c: hereditary_constant(self, c, self.stage) for c in sig.constants}
            name = f"F{self.stage}{'+' if self.plus else ''}({self.base.name})"
            self._structure = FiniteStructure(sig, self.carrier, functions, relations, constants,
                                              name=name, validate=False)
        return self._structure

    def materialize(self) -> FiniteStructure:
        """A FiniteStructure with explicit tables (tests and file output)."""
        S = self.as_structure()
        functions = {f: dict(t.items()) for f, t in S.functions.items()}
        relations = {r: frozenset(R) for r, R in S.relations.items()}
        return FiniteStructure(S.signature, S.carrier, functions, relations, S.constants, name=S.name)


def build_level(S: Any, fam: IndexFamily, n: int, plus: bool = False,
                guard: int = DEFAULT_SIZE_GUARD) -> CumulativePower:
    return CumulativePower(as_structure(S), fam, n, plus, guard)


def _delta(args: Sequence[HierElement]) -> int:
    return max((a.level for a in args), default=0)


def apply_operation(cp: CumulativePower, fn: str, args: Sequence[HierElement]) -> Any:
    """Hereditary application; UNDEFINED when any coordinate is undefined."""
    args = tuple(args)
    ar = cp.base.signature.functions.get(fn)
    if ar is None:
        raise SymbolError(f"unknown function symbol {fn!r}")
    if len(args) != ar:
        raise SymbolError(f"{fn!r} expects {ar} arguments, got {len(args)}")
    key = (fn, args)
    memo = cp._ops
    if key in memo:
        return memo[key]
    delta = _delta(args)
    if delta == 0:
        v = cp.base.functions[fn].get(tuple(a.value for a in args), UNDEFINED)
        out = UNDEFINED if v is UNDEFINED else Base(v)
    else:
        index = cp.family[delta - 1]
        vals = []
        out = None
        for sub in thetas(delta, args, index):
            r = apply_operation(cp, fn, sub)
            if r is UNDEFINED:
                out = UNDEFINED
                break
            vals.append(r)
        if out is None:
            out = Func(index, vals)
    memo[key] = out
    return out


def holds_relation(cp: CumulativePower, rel: str, args: Sequence[HierElement]) -> bool:
    args = tuple(args)
    ar = cp.base.signature.relations.get(rel)
    if ar is None:
        raise SymbolError(f"unknown relation symbol {rel!r}")
    if len(args) != ar:
        raise SymbolError(f"{rel!r} expects {ar} arguments, got {len(args)}")
    key = (rel, args)
    memo = cp._rels
    if key in memo:
        return memo[key]
    delta = _delta(args)
    if delta == 0:
        out = tuple(a.value for a in args) in cp.base.relations[rel]
    else:
        index = cp.family[delta - 1]
        out = all(holds_relation(cp, rel, sub) for sub in thetas(delta, args, index))
    memo[key] = out
    return out


def constant_predicate(cp: CumulativePower, c: str, e: HierElement) -> bool:
    """Membership of ``e`` in the hereditary constant set c_n (n = stage)."""
    if c not in cp.base.constants:
        raise SymbolError(f"unknown constant {c!r}")
    if e.level > cp.stage:
        return False
    target = cp.base.constants[c]

    def member(x: HierElement) -> bool:
        if isinstance(x, Base):
            return x.value == target
        return all(member(v) for v in x.values)

    return member(e)


def hereditary_constant(cp: CumulativePower, c: str, n: int) -> HierElement:
    """c_0 is the base interpretation; c_{m+1} is the constant function over I_m with value c_m."""
    if c not in cp.base.constants:
        raise SymbolError(f"unknown constant {c!r}")
    if n > cp.stage:
        raise ValueError(f"hereditary constant {n} exceeds stage {cp.stage}")
    out: HierElement = Base(cp.base.constants[c])
    for m in range(n):
        out = constant_func(cp.family[m], out)
    return out


def vartheta_inverse(e: HierElement, I0: IndexSet) -> Func:
    """Identity on level-1 elements over I0; Base(a) goes to the constant function at a."""
    if isinstance(e, Base):
        return constant_func(I0, e)
    if e.level == 1 and e.index.name == I0.name:
        return e
    raise ValueError(f"vartheta inverse is defined on levels <= 1 only, got level {e.level}")


def satisfies_cumulative(cp: CumulativePower, phi: Formula, a: Mapping[str, HierElement] | None = None) -> bool:
    """Satisfaction in the stage, with hierarchy elements as assignment values."""
    if constants_of(phi) and not cp.plus:
        if cp.stage > 0:
            raise SymbolError("constants are interpreted only in plus mode at stages above 0")
        cp = CumulativePower(cp.base, cp.family, 0, plus=True)
    return satisfies(cp.as_structure(), phi, a)


def lift_embedding(e: Mapping[Hashable, Hashable], A: FiniteStructure, B: FiniteStructure,
                   fam_A: IndexFamily, fam_B: IndexFamily,
                   injections: Sequence[Mapping[Hashable, Hashable]], n: int,
                   fill: Sequence[Hashable] | None = None, verify: bool = True) -> dict:
    """Extend an embedding e: A -> B to stage n of the cumulative hierarchies.

    A level m+1 function a over I_m goes to b over J_m with
    b(j) = e_m(a(u_m^{-1}(j))) on the image of u_m and b(j) = e_m(a(u_m^{-1}(k))) elsewhere,
    k being the fill index (default: the first image index in J_m order).
    """
    if verify:
        problems = embedding_failures(A, B, e)
        if problems:
            raise ValueError("base map is not an embedding: " + "; ".join(problems))
    if n > len(fam_A) or n > len(fam_B):
        raise ValueError("stage exceeds an index family")
    plans = []
    for m in range(n):
        I, J, u = fam_A[m], fam_B[m], injections[m]
        if len({u[i] for i in I}) != len(I) or any(u[i] not in J.elements for i in I):
            raise ValueError(f"u_{m} is not an injection {I.name} -> {J.name}")
        inverse = {u[i]: i for i in I}
        k = fill[m] if fill is not None else next(j for j in J if j in inverse)
        if k not in inverse:
            raise ValueError("fill index must lie in the image")
        plans.append([I.position(inverse.get(j, inverse[k])) for j in J])
    cache: dict[HierElement, HierElement] = {}

    def lift(x: HierElement) -> HierElement:
        if x in cache:
            return cache[x]
        if isinstance(x, Base):
            y: HierElement = Base(e[x.value])
        else:
            m = x.index.stage
            y = Func(fam_B[m], [lift(x.values[p]) for p in plans[m]])
        cache[x] = y
        return y

    cpA = CumulativePower(A, fam_A, n)
    out = {x: lift(x) for x in cpA.carrier}
    if verify:
        cpB = CumulativePower(B, fam_B, n)
        problems = embedding_failures(cpA.as_structure(), cpB.as_structure(), out)
        if problems:
            raise AssertionError("lifted map is not an embedding: " + "; ".join(problems))
    return out
