"""Finite structures with partial operations, brute-force satisfaction, direct
powers and ultrapowers, labeled enumeration, embedding search and bounded
semantic oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .filters import FilterFamily
from .syntax import (
    And, Const, Eq, Exists, ForAll, Formula, Implies, Not, Or, Rel, Signature, SymbolError,
    Term, Var, _BottomType, _TopType, format_formula, free_variables, symbols_of,
)

__all__ = [
    "UNDEFINED", "DEFAULT_SIZE_GUARD", "SizeGuardError", "UnboundVariableError", "WellDefinednessError",
    "FiniteStructure", "QuotientStructure", "eval_term", "satisfies", "direct_power", "direct_product",
    "ultrapower", "build_quotient", "enumerate_structures", "find_embedding", "find_isomorphism",
    "embedding_failures", "is_embedding", "Refuted", "HoldsUpTo", "bounded_entailment",
    "PreservationReport", "check_preserved", "as_structure", "assignments",
]

DEFAULT_SIZE_GUARD = 200_000


class _Undefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __reduce__(self):
        return (_Undefined, ())


UNDEFINED = _Undefined()


class SizeGuardError(ValueError):
    """A materialized carrier would exceed the configured size guard."""


class UnboundVariableError(KeyError):
    pass


class WellDefinednessError(RuntimeError):
    """An induced interpretation depends on the choice of representatives."""


class FiniteStructure:
    """A finite structure over a signature.

    ``functions`` maps each function symbol to a table from argument tuples to
    elements; absent tuples are undefined.  ``relations`` maps each relation
    symbol to a container of tuples.  Tables may be any objects offering
    ``get`` and ``items`` (relations: ``__contains__`` and iteration), which lets
    large hierarchy stages supply lazily computed tables.
    """

    def __init__(self, signature: Signature, carrier: Iterable[Hashable],
                 functions: Mapping[str, Any] | None = None,
                 relations: Mapping[str, Any] | None = None,
                 constants: Mapping[str, Hashable] | None = None,
                 name: str = "", validate: bool = True):
        self.signature = signature
        self.carrier = tuple(carrier)
        self.functions = dict(functions or {})
        self.relations = dict(relations or {})
        self.constants = dict(constants or {})
        self.name = name
        self.index = {x: i for i, x in enumerate(self.carrier)}
        if validate:
            self._validate()

    def _validate(self) -> None:
        sig = self.signature
        if len(self.index) != len(self.carrier):
            raise ValueError("carrier has repeated elements")
        if not self.carrier:
            raise ValueError("carrier must be nonempty")
        if set(self.functions) != set(sig.functions):
            raise SymbolError("function tables do not match the signature")
        if set(self.relations) != set(sig.relations):
            raise SymbolError("relation sets do not match the signature")
        if set(self.constants) != set(sig.constants):
            raise SymbolError("constants do not match the signature")
        for name, table in self.functions.items():
            ar = sig.functions[name]
            for args, value in table.items():
                if len(args) != ar or any(a not in self.index for a in args) or value not in self.index:
                    raise ValueError(f"table entry {args}->{value} of {name!r} leaves the carrier")
        for name, rel in self.relations.items():
            ar = sig.relations[name]
            for t in rel:
                if len(t) != ar or any(a not in self.index for a in t):
                    raise ValueError(f"tuple {t} of {name!r} leaves the carrier")
        for name, c in self.constants.items():
            if c not in self.index:
                raise ValueError(f"constant {name!r} is not a carrier member")

    def __len__(self) -> int:
        return len(self.carrier)

    def apply(self, fn: str, args: Sequence[Hashable]) -> Hashable:
        return self.functions[fn].get(tuple(args), UNDEFINED)

    def holds(self, rel: str, args: Sequence[Hashable]) -> bool:
        return tuple(args) in self.relations[rel]

    def is_total(self) -> bool:
        n = len(self.carrier)
        return all(sum(1 for _ in table.items()) == n ** self.signature.functions[f]
                   for f, table in self.functions.items())

    def __repr__(self) -> str:
        label = self.name or "structure"
        return f"<FiniteStructure {label} |A|={len(self.carrier)}>"


def as_structure(obj: Any) -> FiniteStructure:
    """Accept a FiniteStructure, a QuotientStructure or anything with ``as_structure()``."""
    if isinstance(obj, FiniteStructure):
        return obj
    if isinstance(obj, QuotientStructure):
        return obj.structure
    if hasattr(obj, "as_structure"):
        return obj.as_structure()
    raise TypeError(f"cannot view {obj!r} as a finite structure")


# Evaluation


def eval_term(S: FiniteStructure, t: Term, a: Mapping[str, Hashable]) -> Hashable:
    """Value of ``t`` under assignment ``a``; UNDEFINED propagates strictly."""
    if isinstance(t, Var):
        try:
            return a[t.name]
        except KeyError:
            raise UnboundVariableError(t.name) from None
    if isinstance(t, Const):
        try:
            return S.constants[t.name]
        except KeyError:
            raise SymbolError(f"constant {t.name!r} is not interpreted in {S!r}") from None
    vals = []
    for arg in t.args:
        v = eval_term(S, arg, a)
        if v is UNDEFINED:
            return UNDEFINED
        vals.append(v)
    table = S.functions.get(t.fn)
    if table is None:
        raise SymbolError(f"function {t.fn!r} is not interpreted in {S!r}")
    return table.get(tuple(vals), UNDEFINED)


def _sat(S: FiniteStructure, f: Formula, env: dict) -> bool:
    if isinstance(f, Eq):
        l = eval_term(S, f.left, env)
        if l is UNDEFINED:
            return False
        r = eval_term(S, f.right, env)
        return r is not UNDEFINED and l == r
    if isinstance(f, Rel):
        vals = []
        for t in f.args:
            v = eval_term(S, t, env)
            if v is UNDEFINED:
                return False
            vals.append(v)
        return tuple(vals) in S.relations[f.name]
    if isinstance(f, Not):
        return not _sat(S, f.body, env)
    if isinstance(f, And):
        return _sat(S, f.left, env) and _sat(S, f.right, env)
    if isinstance(f, Or):
        return _sat(S, f.left, env) or _sat(S, f.right, env)
    if isinstance(f, Implies):
        return (not _sat(S, f.left, env)) or _sat(S, f.right, env)
    if isinstance(f, (ForAll, Exists)):
        want = isinstance(f, Exists)
        missing = object()
        old = env.get(f.var, missing)
        try:
            for x in S.carrier:
                env[f.var] = x
                if _sat(S, f.body, env) == want:
                    return want
            return not want
        finally:
            if old is missing:
                env.pop(f.var, None)
            else:
                env[f.var] = old
    if isinstance(f, _TopType):
        return True
    if isinstance(f, _BottomType):
        return False
    raise TypeError(f"not a formula: {f!r}")


def satisfies(S: Any, f: Formula, a: Mapping[str, Hashable] | None = None) -> bool:
    """Tarskian truth of ``f`` in ``S`` under ``a``.

    Atoms whose terms are undefined are false.
    """
    S = as_structure(S)
    env = dict(a or {})
    missing = free_variables(f) - set(env)
    if missing:
        raise UnboundVariableError(", ".join(sorted(missing)))
    return _sat(S, f, env)


def assignments(S: FiniteStructure, variables: Sequence[str]) -> Iterator[dict]:
    for vals in product(S.carrier, repeat=len(variables)):
        yield dict(zip(variables, vals))


# Powers and products


def _guard(size: int, guard: int) -> None:
    if size > guard:
        raise SizeGuardError(f"materialized carrier of size {size} exceeds the guard {guard}")


def direct_power(S: Any, I: Sequence[Hashable], guard: int = DEFAULT_SIZE_GUARD) -> FiniteStructure:
    """All functions I -> A as tuples indexed by the order of ``I``, with pointwise
    interpretations.  A table entry exists iff it exists at every coordinate."""
    S = as_structure(S)
    I = tuple(I)
    k = len(I)
    if k == 0:
        raise ValueError("index set must be nonempty")
    _guard(len(S.carrier) ** k, guard)
    carrier = list(product(S.carrier, repeat=k))
    functions = {}
    for fn, ar in S.signature.functions.items():
        entries = list(S.functions[fn].items())
        table = {}
        for combo in product(entries, repeat=k):
            args = tuple(tuple(e[0][p] for e in combo) for p in range(ar))
            table[args] = tuple(e[1] for e in combo)
        functions[fn] = table
    relations = {}
    for rel in S.signature.relations:
        ar = S.signature.relations[rel]
        tuples = list(S.relations[rel])
        relations[rel] = frozenset(tuple(tuple(t[p] for t in combo) for p in range(ar))
                                   for combo in product(tuples, repeat=k))
    constants = {c: tuple([v] * k) for c, v in S.constants.items()}
    return FiniteStructure(S.signature, carrier, functions, relations, constants,
                           name=f"{S.name}^{k}", validate=False)


def direct_product(A: Any, B: Any) -> FiniteStructure:
    """The product A x B on pairs, with componentwise interpretations."""
    A, B = as_structure(A), as_structure(B)
    if A.signature.key() != B.signature.key():
        raise SymbolError("product of structures over different signatures")
    carrier = list(product(A.carrier, B.carrier))
    functions = {}
    for fn, ar in A.signature.functions.items():
        table = {}
        for (xa, va), (xb, vb) in product(list(A.functions[fn].items()), list(B.functions[fn].items())):
            table[tuple(zip(xa, xb))] = (va, vb)
        functions[fn] = table
    relations = {r: frozenset(tuple(zip(ta, tb)) for ta in A.relations[r] for tb in B.relations[r])
                 for r in A.signature.relations}
    constants = {c: (A.constants[c], B.constants[c]) for c in A.signature.constants}
    return FiniteStructure(A.signature, carrier, functions, relations, constants,
                           name=f"{A.name}x{B.name}", validate=False)


# Quotients


@dataclass
class QuotientStructure:
    """A partition of an underlying carrier with induced interpretations.

    The induced structure ``structure`` has the canonical representatives (least
    members in carrier order) as its elements.
    """

    carrier: tuple
    classes: tuple[tuple, ...]
    class_of: dict
    structure: FiniteStructure
    provenance: str
    extra: dict = field(default_factory=dict)

    def members(self, rep: Hashable) -> tuple:
        return self.classes[self.structure.index[rep]]

    def __len__(self) -> int:
        return len(self.classes)


def build_quotient(carrier: Sequence[Hashable], classes: Sequence[Sequence[Hashable]], signature: Signature,
                   op: Callable[[str, tuple], Hashable],
                   relation: Callable[[str, tuple], bool],
                   relation_mode: str,
                   constants: Mapping[str, Hashable],
                   provenance: str, name: str = "",
                   relation_candidates: Callable[[str], Iterable[tuple]] | None = None) -> QuotientStructure:
    """Induce interpretations on the classes and verify well-definedness.

    ``op`` computes an operation on underlying elements and returns an
    underlying element or UNDEFINED.  Functions are checked over every
    underlying argument tuple: all member tuples of a class tuple must land in
    one class (or all be undefined).

    ``relation_mode`` is ``"exists"`` (a class tuple is related iff some member
    tuple satisfies ``relation``) or ``"invariant"`` (``relation`` must agree on
    all member tuples).  ``relation_candidates`` may restrict, in ``"exists"``
    mode, the underlying tuples that are tried.
    """
    carrier = tuple(carrier)
    index = {x: i for i, x in enumerate(carrier)}
    ordered = [tuple(sorted(c, key=index.__getitem__)) for c in classes]
    ordered.sort(key=lambda c: index[c[0]])
    class_of = {x: c[0] for c in ordered for x in c}
    if len(class_of) != len(carrier):
        raise ValueError("classes do not partition the carrier")
    reps = [c[0] for c in ordered]
    functions = {}
    for fn, ar in signature.functions.items():
        seen: dict[tuple, Hashable] = {}
        for args in product(carrier, repeat=ar):
            v = op(fn, args)
            r = UNDEFINED if v is UNDEFINED else class_of[v]
            key = tuple(class_of[x] for x in args)
            prev = seen.setdefault(key, r)
            if prev is not r and prev != r:
                raise WellDefinednessError(f"{fn} is not well defined on classes {key}")
        functions[fn] = {k: v for k, v in seen.items() if v is not UNDEFINED}
    relations = {}
    for rel, ar in signature.relations.items():
        if relation_mode == "exists":
            tuples = relation_candidates(rel) if relation_candidates else product(carrier, repeat=ar)
            relations[rel] = frozenset(tuple(class_of[x] for x in t) for t in tuples if relation(rel, t))
        elif relation_mode == "invariant":
            seen_r: dict[tuple, bool] = {}
            for t in product(carrier, repeat=ar):
                key = tuple(class_of[x] for x in t)
                v = relation(rel, t)
                if seen_r.setdefault(key, v) != v:
                    raise WellDefinednessError(f"{rel} is not well defined on classes {key}")
            relations[rel] = frozenset(k for k, v in seen_r.items() if v)
        else:
            raise ValueError(f"unknown relation mode {relation_mode!r}")
    consts = {c: class_of[v] for c, v in constants.items()}
    structure = FiniteStructure(signature, reps, functions, relations, consts, name=name, validate=False)
    return QuotientStructure(carrier, tuple(ordered), class_of, structure, provenance)


def _partition(carrier: Sequence[Hashable], equivalent: Callable[[Hashable, Hashable], bool]) -> list[list]:
    classes: list[list] = []
    for x in carrier:
        for c in classes:
            if equivalent(c[0], x):
                c.append(x)
                break
        else:
            classes.append([x])
    return classes


def ultrapower(S: Any, I: Sequence[Hashable], U: FilterFamily, guard: int = DEFAULT_SIZE_GUARD) -> QuotientStructure:
    """A^I / U with Łoś-set interpretations and least-function representatives."""
    S = as_structure(S)
    I = tuple(I)
    if frozenset(U.ground) != frozenset(I) or len(U.ground) != len(I):
        raise ValueError("ultrafilter ground set differs from the index set")
    if not U.is_ultrafilter:
        raise ValueError("not an ultrafilter")
    P = direct_power(S, I, guard)
    members = U.members

    def large(pred: Callable[[int], bool]) -> bool:
        return frozenset(I[p] for p in range(len(I)) if pred(p)) in members

    classes = _partition(P.carrier, lambda f, g: large(lambda p: f[p] == g[p]))
    filler = S.carrier[0]

    def op(fn: str, args: tuple) -> Hashable:
        vals = [S.apply(fn, [a[p] for a in args]) for p in range(len(I))]
        if not large(lambda p: vals[p] is not UNDEFINED):
            return UNDEFINED
        return tuple(filler if v is UNDEFINED else v for v in vals)

    def rel(r: str, args: tuple) -> bool:
        return large(lambda p: S.holds(r, [a[p] for a in args]))

    q = build_quotient(P.carrier, classes, S.signature, op, rel, "invariant", P.constants,
                       provenance="plain-ultrapower", name=f"{S.name}^{len(I)}/U")
    q.extra["power"] = P
    q.extra["index"] = I
    q.extra["ultrafilter"] = U
    return q


# Enumeration


def enumerate_structures(sig: Signature, max_size: int, total: bool = True,
                         min_size: int = 1) -> Iterator[FiniteStructure]:
    """Every labeled structure on carriers {0..k-1}, min_size <= k <= max_size.

    Order: by size, then by function tables, relation sets and constants in
    symbol order, each enumerated lexicographically.
    """
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    fns = list(sig.functions.items())
    rels = list(sig.relations.items())
    for k in range(max(1, min_size), max_size + 1):
        carrier = tuple(range(k))
        choices: list[list] = []
        for _, ar in fns:
            tuples = list(product(carrier, repeat=ar))
            values = carrier if total else (UNDEFINED, *carrier)
            choices.append([dict((t, v) for t, v in zip(tuples, vs) if v is not UNDEFINED)
                            for vs in product(values, repeat=len(tuples))])
        for _, ar in rels:
            tuples = list(product(carrier, repeat=ar))
            choices.append([frozenset(t for t, b in zip(tuples, bits) if b)
                            for bits in product((False, True), repeat=len(tuples))])
        for _ in sig.constants:
            choices.append(list(carrier))
        for combo in product(*choices):
            functions = {name: combo[i] for i, (name, _) in enumerate(fns)}
            relations = {name: combo[len(fns) + i] for i, (name, _) in enumerate(rels)}
            constants = {c: combo[len(fns) + len(rels) + i] for i, c in enumerate(sig.constants)}
            yield FiniteStructure(sig, carrier, functions, relations, constants, validate=False)


# Embeddings


def _constraints(A: FiniteStructure) -> list[list[tuple]]:
    """Group every function/relation fact of A by the largest carrier position it mentions."""
    pos = A.index
    groups: list[list[tuple]] = [[] for _ in A.carrier]
    for fn, ar in A.signature.functions.items():
        table = A.functions[fn]
        for args in product(A.carrier, repeat=ar):
            v = table.get(args, UNDEFINED)
            top = max(pos[x] for x in args)
            if v is not UNDEFINED:
                top = max(top, pos[v])
            groups[top].append(("f", fn, args, v))
    for rel, ar in A.signature.relations.items():
        R = A.relations[rel]
        for t in product(A.carrier, repeat=ar):
            groups[max(pos[x] for x in t)].append(("r", rel, t, t in R))
    return groups


def _fact_ok(B: FiniteStructure, e: Mapping, fact: tuple) -> bool:
    kind, sym, args, v = fact
    img = tuple(e[x] for x in args)
    if kind == "f":
        w = B.functions[sym].get(img, UNDEFINED)
        if v is UNDEFINED:
            return w is UNDEFINED
        return w is not UNDEFINED and w == e[v]
    return (img in B.relations[sym]) == v


def find_embedding(A: Any, B: Any, surjective: bool = False) -> dict | None:
    """First injective map (in lexicographic search order) preserving constants,
    function tables with definedness, and relations in both directions."""
    A, B = as_structure(A), as_structure(B)
    if A.signature.key() != B.signature.key():
        raise SymbolError("embedding between structures over different signatures")
    if len(A.carrier) > len(B.carrier) or (surjective and len(A.carrier) != len(B.carrier)):
        return None
    groups = _constraints(A)
    fixed: dict[int, Hashable] = {}
    for c, v in A.constants.items():
        p = A.index[v]
        if fixed.setdefault(p, B.constants[c]) != B.constants[c]:
            return None
    e: dict = {}
    used: set = set()

    def search(k: int) -> bool:
        if k == len(A.carrier):
            return True
        x = A.carrier[k]
        options = [fixed[k]] if k in fixed else B.carrier
        for y in options:
            if y in used:
                continue
            e[x] = y
            used.add(y)
            if all(_fact_ok(B, e, fact) for fact in groups[k]) and search(k + 1):
                return True
            used.discard(y)
            del e[x]
        return False

    return dict(e) if search(0) else None


def find_isomorphism(A: Any, B: Any) -> dict | None:
    return find_embedding(A, B, surjective=True)


def embedding_failures(A: Any, B: Any, e: Mapping, limit: int | None = 20) -> list[str]:
    """Reasons why ``e`` is not an embedding of A into B (empty when it is)."""
    A, B = as_structure(A), as_structure(B)
    out: list[str] = []
    for x in A.carrier:
        if x not in e:
            out.append(f"{x!r} is unmapped")
        elif e[x] not in B.index:
            out.append(f"{x!r} maps outside the target")
    if out:
        return out
    if len({e[x] for x in A.carrier}) != len(A.carrier):
        out.append("map is not injective")
    for c, v in A.constants.items():
        if e[v] != B.constants[c]:
            out.append(f"constant {c} not preserved")
    for group in _constraints(A):
        for fact in group:
            if not _fact_ok(B, e, fact):
                kind, sym, args, _ = fact
                out.append(f"{'function' if kind == 'f' else 'relation'} {sym} fails at {args!r}")
                if limit is not None and len(out) >= limit:
                    return out
    return out


def is_embedding(A: Any, B: Any, e: Mapping) -> bool:
    return not embedding_failures(A, B, e, limit=1)


# Bounded oracles


@dataclass(frozen=True)
class Refuted:
    structure: FiniteStructure
    assignment: dict
    holds: bool = False

    def __str__(self) -> str:
        return f"REFUTED at size {len(self.structure)} with {self.assignment}"


@dataclass(frozen=True)
class HoldsUpTo:
    bound: int
    holds: bool = True

    def __str__(self) -> str:
        return f"HOLDS_UP_TO({self.bound})"


def bounded_entailment(premise: Formula, conclusion: Formula, bound: int = 3,
                       signature: Signature | None = None) -> Refuted | HoldsUpTo:
    """Search total structures of size <= bound for a counter-model of premise |- conclusion.

    Sound for refutation, incomplete for validity.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    sig = symbols_of(premise, conclusion)
    if signature is not None:
        sig = signature.merge(sig)
    variables = sorted(free_variables(premise) | free_variables(conclusion))
    for S in enumerate_structures(sig, bound):
        for a in assignments(S, variables):
            if _sat(S, premise, dict(a)) and not _sat(S, conclusion, dict(a)):
                return Refuted(S, a)
    return HoldsUpTo(bound)


@dataclass(frozen=True)
class PreservationReport:
    holds_in_source: bool
    holds_in_target: bool

    @property
    def preserved(self) -> bool:
        return (not self.holds_in_source) or self.holds_in_target


def check_preserved(S: Any, phi: Formula, target: Any) -> PreservationReport:
    if free_variables(phi):
        raise ValueError(f"{format_formula(phi)} is not a sentence")
    return PreservationReport(satisfies(S, phi), satisfies(target, phi))
