"""First-order syntax: signatures, terms, formulas, a parser, a printer, and
prenex normal forms with a clause matrix.

Formulas use binary connectives.  ``Top`` and ``Bottom`` stand for the empty
conjunction and the empty disjunction respectively (the standard reading).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "Signature", "Var", "Const", "App", "Term",
    "Eq", "Rel", "Not", "And", "Or", "Implies", "ForAll", "Exists", "Top", "Bottom",
    "Formula", "Atom", "Literal", "PrenexForm", "Occurrence",
    "ParseError", "SymbolError", "MatrixSizeError",
    "parse_formula", "parse_term", "format_formula", "format_term",
    "free_variables", "term_variables", "constants_of", "symbols_of",
    "conj", "disj", "flatten_and", "flatten_or", "is_quantifier_free",
    "to_nnf", "to_pcnf", "to_pdnf", "atom_occurrences", "DEFAULT_MATRIX_CAP",
]

DEFAULT_MATRIX_CAP = 10_000
KEYWORDS = frozenset({"forall", "exists", "true", "false"})
VARIABLE_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


class ParseError(ValueError):
    """Raised on malformed formula text; ``position`` is a character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class SymbolError(ValueError):
    """Unknown symbol or arity mismatch."""


class MatrixSizeError(ValueError):
    """Distribution to a clause matrix exceeded the configured literal cap."""


@dataclass(frozen=True)
class Signature:
    """Function symbols with arities, relation symbols with arities, and constants."""

    functions: Mapping[str, int] = field(default_factory=dict)
    relations: Mapping[str, int] = field(default_factory=dict)
    constants: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "functions", dict(self.functions))
        object.__setattr__(self, "relations", dict(self.relations))
        object.__setattr__(self, "constants", tuple(self.constants))
        seen: set[str] = set()
        for name in [*self.functions, *self.relations, *self.constants]:
            if name in seen:
                raise SymbolError(f"symbol {name!r} declared twice")
            if name in KEYWORDS:
                raise SymbolError(f"symbol {name!r} is a reserved keyword")
            seen.add(name)
        for name, arity in [*self.functions.items(), *self.relations.items()]:
            if not isinstance(arity, int) or arity < 1:
                raise SymbolError(f"symbol {name!r} needs a positive arity, got {arity!r}")

    def key(self) -> tuple:
        return (tuple(sorted(self.functions.items())), tuple(sorted(self.relations.items())),
                tuple(self.constants))

    def __hash__(self) -> int:
        return hash(self.key())

    def without_constants(self) -> "Signature":
        return Signature(self.functions, self.relations, ())

    def merge(self, other: "Signature") -> "Signature":
        functions = dict(self.functions)
        relations = dict(self.relations)
        constants = list(self.constants)
        for name, arity in other.functions.items():
            if functions.setdefault(name, arity) != arity:
                raise SymbolError(f"arity clash for {name!r}")
        for name, arity in other.relations.items():
            if relations.setdefault(name, arity) != arity:
                raise SymbolError(f"arity clash for {name!r}")
        for name in other.constants:
            if name not in constants:
                constants.append(name)
        return Signature(functions, relations, tuple(constants))


# Terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple["Term", ...]


Term = Union[Var, Const, App]


# Formulas


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ForAll:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class _TopType:
    def __repr__(self) -> str:
        return "Top"


@dataclass(frozen=True)
class _BottomType:
    def __repr__(self) -> str:
        return "Bottom"


Top = _TopType()
Bottom = _BottomType()

Atom = Union[Eq, Rel]
Formula = Union[Eq, Rel, Not, And, Or, Implies, ForAll, Exists, _TopType, _BottomType]


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def to_formula(self) -> Formula:
        return self.atom if self.positive else Not(self.atom)

    def __str__(self) -> str:
        return format_formula(self.to_formula())


@dataclass(frozen=True)
class Occurrence:
    """A literal position inside a clause matrix."""

    clause: int
    literal: int
    atom: Atom
    positive: bool


@dataclass(frozen=True)
class PrenexForm:
    """Quantifier prefix over a clause matrix.

    In CNF mode the matrix is a conjunction of disjunctive clauses; in DNF mode a
    disjunction of conjunctive cubes.
    """

    prefix: tuple[tuple[str, str], ...]
    matrix: tuple[tuple[Literal, ...], ...]
    mode: str = "CNF"

    def __post_init__(self) -> None:
        if self.mode not in ("CNF", "DNF"):
            raise ValueError(f"unknown mode {self.mode!r}")
        for q, _ in self.prefix:
            if q not in ("forall", "exists"):
                raise ValueError(f"unknown quantifier {q!r}")

    @classmethod
    def of(cls, prefix: Iterable[tuple[str, str]], matrix: Iterable[Iterable[Formula]],
           mode: str = "CNF") -> "PrenexForm":
        """Build from formulas that are atoms or negated atoms."""
        clauses = []
        for clause in matrix:
            lits = []
            for lit in clause:
                if isinstance(lit, Not) and isinstance(lit.body, (Eq, Rel)):
                    lits.append(Literal(lit.body, False))
                elif isinstance(lit, (Eq, Rel)):
                    lits.append(Literal(lit, True))
                else:
                    raise ValueError(f"not a literal: {lit!r}")
            clauses.append(tuple(lits))
        return cls(tuple(prefix), tuple(clauses), mode)

    def quantifier_of(self, var: str) -> str | None:
        for q, v in self.prefix:
            if v == var:
                return q
        return None

    def matrix_formula(self) -> Formula:
        if self.mode == "CNF":
            return conj([disj([lit.to_formula() for lit in c]) for c in self.matrix])
        return disj([conj([lit.to_formula() for lit in c]) for c in self.matrix])

    def to_formula(self) -> Formula:
        body = self.matrix_formula()
        for q, v in reversed(self.prefix):
            body = ForAll(v, body) if q == "forall" else Exists(v, body)
        return body

    def literal_count(self) -> int:
        return sum(len(c) for c in self.matrix)

    def __str__(self) -> str:
        quant = "".join(("∀" if q == "forall" else "∃") + v for q, v in self.prefix)
        inner = "; ".join(", ".join(str(l) for l in c) for c in self.matrix)
        return f"{quant} [{inner}] ({self.mode})"


# Builders and inspectors


def conj(parts: Sequence[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``Top``."""
    if not parts:
        return Top
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(parts: Sequence[Formula]) -> Formula:
    """Right-nested disjunction; the empty disjunction is ``Bottom``."""
    if not parts:
        return Bottom
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def flatten_and(f: Formula) -> list[Formula]:
    if isinstance(f, _TopType):
        return []
    if isinstance(f, And):
        return flatten_and(f.left) + flatten_and(f.right)
    return [f]


def flatten_or(f: Formula) -> list[Formula]:
    if isinstance(f, _BottomType):
        return []
    if isinstance(f, Or):
        return flatten_or(f.left) + flatten_or(f.right)
    return [f]


def term_variables(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        out: set[str] = set()
        for a in t.args:
            out |= term_variables(a)
        return out
    return set()


def _term_constants(t: Term) -> set[str]:
    if isinstance(t, Const):
        return {t.name}
    if isinstance(t, App):
        out: set[str] = set()
        for a in t.args:
            out |= _term_constants(a)
        return out
    return set()


def free_variables(f: Formula) -> set[str]:
    if isinstance(f, Eq):
        return term_variables(f.left) | term_variables(f.right)
    if isinstance(f, Rel):
        out: set[str] = set()
        for a in f.args:
            out |= term_variables(a)
        return out
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, (And, Or, Implies)):
        return free_variables(f.left) | free_variables(f.right)
    if isinstance(f, (ForAll, Exists)):
        return free_variables(f.body) - {f.var}
    return set()


def _subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from _subformulas(f.body)
    elif isinstance(f, (And, Or, Implies)):
        yield from _subformulas(f.left)
        yield from _subformulas(f.right)
    elif isinstance(f, (ForAll, Exists)):
        yield from _subformulas(f.body)


def _atom_terms(f: Formula) -> list[Term]:
    if isinstance(f, Eq):
        return [f.left, f.right]
    if isinstance(f, Rel):
        return list(f.args)
    return []


def constants_of(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in _subformulas(f):
        for t in _atom_terms(g):
            out |= _term_constants(t)
    return out


def symbols_of(*formulas: Formula) -> Signature:
    """The smallest signature covering every symbol occurring in the formulas."""
    functions: dict[str, int] = {}
    relations: dict[str, int] = {}
    constants: list[str] = []

    def visit_term(t: Term) -> None:
        if isinstance(t, Const) and t.name not in constants:
            constants.append(t.name)
        elif isinstance(t, App):
            if functions.setdefault(t.fn, len(t.args)) != len(t.args):
                raise SymbolError(f"arity clash for {t.fn!r}")
            for a in t.args:
                visit_term(a)

    for f in formulas:
        for g in _subformulas(f):
            if isinstance(g, Rel) and relations.setdefault(g.name, len(g.args)) != len(g.args):
                raise SymbolError(f"arity clash for {g.name!r}")
            for t in _atom_terms(g):
                visit_term(t)
    return Signature(functions, relations, tuple(constants))


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(g, (ForAll, Exists)) for g in _subformulas(f))


# Parsing

_TOKEN_RE = re.compile(r"\s*(?:(->)|([!&|().,=])|([A-Za-z0-9_]+))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            start = pos
            while start < n and text[start].isspace():
                start += 1
            raise ParseError(f"unexpected character {text[start]!r}", start)
        tok = m.group(1) or m.group(2) or m.group(3)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("", n))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.tokens = _tokenize(text)
        self.i = 0
        self.sig = sig

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if expected is not None and tok != expected:
            shown = repr(tok) if tok else "end of input"
            raise ParseError(f"expected {expected!r}, found {shown}", self.pos())
        self.i += 1
        return tok

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in ("forall", "exists"):
            self.take()
            vpos = self.pos()
            var = self.take()
            if not VARIABLE_RE.match(var) or var in KEYWORDS or self._is_symbol(var):
                raise ParseError(f"bad bound variable {var!r}", vpos)
            self.take(".")
            body = self.formula()
            return ForAll(var, body) if tok == "forall" else Exists(var, body)
        if tok == "(":
            self.take()
            inner = self.formula()
            self.take(")")
            return inner
        if tok == "true":
            self.take()
            return Top
        if tok == "false":
            self.take()
            return Bottom
        if tok in self.sig.relations:
            return self.relation_atom()
        left = self.term()
        self.take("=")
        right = self.term()
        return Eq(left, right)

    def _is_symbol(self, name: str) -> bool:
        return name in self.sig.functions or name in self.sig.relations or name in self.sig.constants

    def relation_atom(self) -> Rel:
        name = self.take()
        args = self.arguments(name, self.sig.relations[name])
        return Rel(name, args)

    def arguments(self, name: str, arity: int) -> tuple[Term, ...]:
        pos = self.pos()
        self.take("(")
        args = [self.term()]
        while self.peek() == ",":
            self.take()
            args.append(self.term())
        self.take(")")
        if len(args) != arity:
            raise SymbolError(f"{name!r} expects {arity} arguments, got {len(args)} (position {pos})")
        return tuple(args)

    def term(self) -> Term:
        pos = self.pos()
        tok = self.peek()
        if tok == "" or not re.fullmatch(r"[A-Za-z0-9_]+", tok) or tok in KEYWORDS:
            shown = repr(tok) if tok else "end of input"
            raise ParseError(f"expected a term, found {shown}", pos)
        self.take()
        if tok in self.sig.functions:
            return App(tok, self.arguments(tok, self.sig.functions[tok]))
        if tok in self.sig.constants:
            return Const(tok)
        if tok in self.sig.relations:
            raise SymbolError(f"relation {tok!r} used as a term (position {pos})")
        if self.peek() == "(":
            raise SymbolError(f"unknown function symbol {tok!r} (position {pos})")
        if not VARIABLE_RE.match(tok):
            raise SymbolError(f"unknown symbol {tok!r} (position {pos})")
        return Var(tok)


def parse_formula(text: str, sig: Signature) -> Formula:
    """Parse ``text`` over ``sig``; raises ParseError or SymbolError."""
    p = _Parser(text, sig)
    f = p.formula()
    if p.peek() != "":
        raise ParseError(f"unexpected token {p.peek()!r}", p.pos())
    return f


def parse_term(text: str, sig: Signature) -> Term:
    p = _Parser(text, sig)
    t = p.term()
    if p.peek() != "":
        raise ParseError(f"unexpected token {p.peek()!r}", p.pos())
    return t


# Printing


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.name
    return f"{t.fn}({','.join(format_term(a) for a in t.args)})"


def _wrapped(f: Formula) -> str:
    if isinstance(f, (Rel, Not, _TopType, _BottomType)):
        return format_formula(f)
    return f"({format_formula(f)})"


def format_formula(f: Formula) -> str:
    """Concrete syntax that parses back to the same tree."""
    if isinstance(f, Eq):
        return f"{format_term(f.left)} = {format_term(f.right)}"
    if isinstance(f, Rel):
        return f"{f.name}({','.join(format_term(a) for a in f.args)})"
    if isinstance(f, Not):
        return "!" + _wrapped(f.body)
    if isinstance(f, And):
        return f"{_wrapped(f.left)} & {_wrapped(f.right)}"
    if isinstance(f, Or):
        return f"{_wrapped(f.left)} | {_wrapped(f.right)}"
    if isinstance(f, Implies):
        return f"{_wrapped(f.left)} -> {_wrapped(f.right)}"
    if isinstance(f, ForAll):
        return f"forall {f.var}. {format_formula(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var}. {format_formula(f.body)}"
    if isinstance(f, _TopType):
        return "true"
    if isinstance(f, _BottomType):
        return "false"
    raise TypeError(f"not a formula: {f!r}")


# Normal forms


def to_nnf(f: Formula, positive: bool = True) -> Formula:
    """Negation normal form without implications."""
    if isinstance(f, (Eq, Rel)):
        return f if positive else Not(f)
    if isinstance(f, _TopType):
        return Top if positive else Bottom
    if isinstance(f, _BottomType):
        return Bottom if positive else Top
    if isinstance(f, Not):
        return to_nnf(f.body, not positive)
    if isinstance(f, Implies):
        f = Or(Not(f.left), f.right)
    if isinstance(f, And):
        l, r = to_nnf(f.left, positive), to_nnf(f.right, positive)
        return And(l, r) if positive else Or(l, r)
    if isinstance(f, Or):
        l, r = to_nnf(f.left, positive), to_nnf(f.right, positive)
        return Or(l, r) if positive else And(l, r)
    if isinstance(f, ForAll):
        body = to_nnf(f.body, positive)
        return ForAll(f.var, body) if positive else Exists(f.var, body)
    if isinstance(f, Exists):
        body = to_nnf(f.body, positive)
        return Exists(f.var, body) if positive else ForAll(f.var, body)
    raise TypeError(f"not a formula: {f!r}")


def _rename_term(t: Term, env: Mapping[str, str]) -> Term:
    if isinstance(t, Var):
        return Var(env.get(t.name, t.name))
    if isinstance(t, App):
        return App(t.fn, tuple(_rename_term(a, env) for a in t.args))
    return t


class _Renamer:
    def __init__(self, reserved: set[str]):
        self.reserved = reserved
        self.counter = 0

    def fresh(self) -> str:
        while True:
            name = f"x{self.counter}"
            self.counter += 1
            if name not in self.reserved:
                return name

    def run(self, f: Formula, env: dict[str, str]) -> Formula:
        if isinstance(f, Eq):
            return Eq(_rename_term(f.left, env), _rename_term(f.right, env))
        if isinstance(f, Rel):
            return Rel(f.name, tuple(_rename_term(a, env) for a in f.args))
        if isinstance(f, Not):
            return Not(self.run(f.body, env))
        if isinstance(f, (And, Or, Implies)):
            return type(f)(self.run(f.left, env), self.run(f.right, env))
        if isinstance(f, (ForAll, Exists)):
            name = self.fresh()
            return type(f)(name, self.run(f.body, {**env, f.var: name}))
        return f


def _prenex(f: Formula) -> tuple[list[tuple[str, str]], Formula]:
    if isinstance(f, ForAll):
        prefix, m = _prenex(f.body)
        return [("forall", f.var)] + prefix, m
    if isinstance(f, Exists):
        prefix, m = _prenex(f.body)
        return [("exists", f.var)] + prefix, m
    if isinstance(f, (And, Or)):
        pl, ml = _prenex(f.left)
        pr, mr = _prenex(f.right)
        return pl + pr, type(f)(ml, mr)
    return [], f


def _clauses(f: Formula, outer: type, cap: int) -> list[list[Literal]]:
    """Distribute an NNF matrix; ``outer`` is And for CNF and Or for DNF."""
    inner = Or if outer is And else And
    unit = Top if outer is And else Bottom   # neutral element of the outer connective
    zero = Bottom if outer is And else Top   # absorbing element of the outer connective
    if f == unit:
        return []
    if f == zero:
        return [[]]
    if isinstance(f, (Eq, Rel)):
        return [[Literal(f, True)]]
    if isinstance(f, Not):
        return [[Literal(f.body, False)]]
    if isinstance(f, outer):
        return _clauses(f.left, outer, cap) + _clauses(f.right, outer, cap)
    if isinstance(f, inner):
        left = _clauses(f.left, outer, cap)
        right = _clauses(f.right, outer, cap)
        out = []
        size = 0
        for a in left:
            for b in right:
                size += len(a) + len(b)
                if size > cap:
                    raise MatrixSizeError(f"clause matrix exceeds {cap} literals")
                out.append(a + b)
        return out
    raise TypeError(f"unexpected matrix node {f!r}")


def _normal_form(f: Formula, mode: str, cap: int) -> PrenexForm:
    nnf = to_nnf(f)
    renamed = _Renamer(free_variables(f)).run(nnf, {})
    prefix, matrix = _prenex(renamed)
    outer = And if mode == "CNF" else Or
    clauses = _clauses(matrix, outer, cap)
    if sum(len(c) for c in clauses) > cap:
        raise MatrixSizeError(f"clause matrix exceeds {cap} literals")
    return PrenexForm(tuple(prefix), tuple(tuple(c) for c in clauses), mode)


def to_pcnf(f: Formula, cap: int = DEFAULT_MATRIX_CAP) -> PrenexForm:
    """Prenex form with a CNF matrix, bound variables renamed to x0, x1, ..."""
    return _normal_form(f, "CNF", cap)


def to_pdnf(f: Formula, cap: int = DEFAULT_MATRIX_CAP) -> PrenexForm:
    """Prenex form with a DNF matrix, bound variables renamed to x0, x1, ..."""
    return _normal_form(f, "DNF", cap)


def atom_occurrences(p: PrenexForm) -> list[Occurrence]:
    if p.mode != "CNF":
        raise ValueError("atom occurrences are read off a CNF matrix")
    return [Occurrence(ci, li, lit.atom, lit.positive)
            for ci, clause in enumerate(p.matrix)
            for li, lit in enumerate(clause)]
