"""Syntactic preservation classes: Horn sentences, non-collapsible equalities and
formulas, the Φ_n ladders, the product-implication relation and Weinstein's R."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Hashable, Iterable, Sequence

from .finmodel import (
    FiniteStructure, Refuted, _sat, bounded_entailment, direct_power, direct_product, enumerate_structures,
    satisfies,
)
from .syntax import (
    And, Bottom, Eq, Exists, ForAll, Formula, Literal, MatrixSizeError, Not, Occurrence, Or, PrenexForm, Rel,
    Signature, Term, _BottomType, _rename_term, _term_constants, _TopType, Top, atom_occurrences, conj,
    constants_of, disj, flatten_and, flatten_or, format_formula, free_variables, is_quantifier_free, symbols_of,
    term_variables, to_pcnf, to_pdnf,
)

__all__ = [
    "NonCollapsible", "Collapsible", "EqualityClassification", "FormulaVerdict", "is_horn",
    "positive_equalities", "classify_equality", "noncoll_set", "classify_formula", "LadderError",
    "LadderMembership", "phi_member", "ProductCheck", "ProductOracle", "product_implies_base",
    "product_implies", "weinstein_R", "WeinsteinR", "ladder_variable", "ladder_corpus", "normalize_ladder",
    "ladder_form", "DirectPowerVerdict", "is_direct_power_sentence", "DEFAULT_LADDER_CAP",
]

DEFAULT_LADDER_CAP = 3


@dataclass(frozen=True)
class NonCollapsible:
    via: str  # "i", "ii" or "iii"

    def __str__(self) -> str:
        return f"NonCollapsible({self.via})"


@dataclass(frozen=True)
class Collapsible:
    def __str__(self) -> str:
        return "Collapsible"


Verdict = NonCollapsible | Collapsible


def _require_cnf(p: PrenexForm) -> None:
    if p.mode != "CNF":
        raise ValueError("expected a prenex conjunctive normal form")


def is_horn(p: PrenexForm) -> bool:
    """Every clause has at most one positive literal."""
    _require_cnf(p)
    return all(sum(1 for lit in c if lit.positive) <= 1 for c in p.matrix)


def positive_equalities(p: PrenexForm) -> list[Occurrence]:
    _require_cnf(p)
    return [o for o in atom_occurrences(p) if o.positive and isinstance(o.atom, Eq)]


# Equality occurrences


@dataclass(frozen=True)
class EqualityClassification:
    occurrence: Occurrence
    verdict: Verdict
    evidence: dict = field(compare=False, hash=False)

    @property
    def noncollapsible(self) -> bool:
        return isinstance(self.verdict, NonCollapsible)


def _side(t: Term, p: PrenexForm) -> dict:
    variables = term_variables(t)
    universal = {v for v in variables if p.quantifier_of(v) in ("forall", None)}
    return {"variables": sorted(variables), "universal_or_free": sorted(universal),
            "existential": sorted(variables - universal), "constants": sorted(_term_constants(t))}


def _locate(p: PrenexForm, occ: Occurrence | tuple[int, int]) -> Occurrence:
    ci, li = (occ.clause, occ.literal) if isinstance(occ, Occurrence) else occ
    if not (0 <= ci < len(p.matrix) and 0 <= li < len(p.matrix[ci])):
        raise IndexError(f"locator ({ci}, {li}) is out of range")
    lit = p.matrix[ci][li]
    return Occurrence(ci, li, lit.atom, lit.positive)


def classify_equality(p: PrenexForm, occ: Occurrence | tuple[int, int]) -> EqualityClassification:
    """Conditions (i)–(iii) read literally; the first that fires is returned.

    (i) one side has no variables; (ii) every universal or free variable on
    either side occurs on both sides (strict reading); (iii) each side has an
    existential variable or a constant.  ``evidence["ii_lax"]`` records the lax
    reading of (ii): the universal variables of at least one side occur on the other.
    """
    _require_cnf(p)
    o = _locate(p, occ)
    if not (o.positive and isinstance(o.atom, Eq)):
        raise ValueError("occurrence is not a positive equality")
    left, right = _side(o.atom.left, p), _side(o.atom.right, p)
    lv, rv = set(left["variables"]), set(right["variables"])
    lu, ru = set(left["universal_or_free"]), set(right["universal_or_free"])
    conds = {
        "i": not lv or not rv,
        "ii": lu <= rv and ru <= lv,
        "iii": all(s["existential"] or s["constants"] for s in (left, right)),
        "ii_lax": lu <= rv or ru <= lv,
    }
    fired = next((c for c in ("i", "ii", "iii") if conds[c]), None)
    verdict: Verdict = NonCollapsible(fired) if fired else Collapsible()
    return EqualityClassification(o, verdict, {"left": left, "right": right, "conditions": conds})


def noncoll_set(p: PrenexForm) -> set[Occurrence]:
    return {o for o in positive_equalities(p) if classify_equality(p, o).noncollapsible}


# Formulas


@dataclass
class FormulaVerdict:
    verdict: Verdict
    traces: list[dict]
    noncoll: frozenset
    flags: dict
    oracle_bound: int
    literal_iii: bool
    lax_verdict: Verdict

    @property
    def noncollapsible(self) -> bool:
        return isinstance(self.verdict, NonCollapsible)

    @property
    def incomplete(self) -> bool:
        """Entailment was decided by bounded search, so a positive (iii) answer is relative to the bound."""
        return any(t["entailments"] for t in self.traces)


def _entails(premise: Formula, conclusion: Formula, bound: int) -> bool:
    return not isinstance(bounded_entailment(premise, conclusion, bound), Refuted)


def classify_formula(p: PrenexForm, oracle_bound: int = 3, source: Formula | None = None) -> FormulaVerdict:
    """Conditions (i)–(iii) of the formula definition.

    (iii) is evaluated for each clause over its collapsible positive
    equalities t = s: some nonempty subdisjunction γ of the clause avoiding
    positive equalities must satisfy ⊢ t = s → γ.  Entailment is monotone in
    γ, so the full disjunction of such literals is the only candidate that
    needs checking.  The reading that quantifies over noncoll instead is
    recorded as ``literal_iii``.
    """
    _require_cnf(p)
    if free_variables(p.to_formula()):
        raise ValueError("classify_formula expects a sentence")
    poseq = positive_equalities(p)
    classes = {(o.clause, o.literal): classify_equality(p, o) for o in poseq}
    noncoll = frozenset(o for o in poseq if classes[(o.clause, o.literal)].noncollapsible)
    cond_i = not poseq
    cond_ii = bool(poseq) and len(noncoll) == len(poseq)
    traces = []
    cond_iii = True
    literal_iii = True
    for ci, clause in enumerate(p.matrix):
        eqs = [classes[(ci, li)] for li, lit in enumerate(clause) if (ci, li) in classes]
        others = [lit.to_formula() for lit in clause if not (lit.positive and isinstance(lit.atom, Eq))]
        outside_noncoll = [lit.to_formula() for li, lit in enumerate(clause)
                           if not ((ci, li) in classes and classes[(ci, li)].noncollapsible)]
        entailments = []
        clause_ok = True
        for ec in eqs:
            if ec.noncollapsible:
                continue
            ok = bool(others) and _entails(ec.occurrence.atom, disj(others), oracle_bound)
            entailments.append({"equality": format_formula(ec.occurrence.atom), "gamma": format_formula(disj(others)),
                                "entailed": ok})
            clause_ok = clause_ok and ok
        literal_ok = True
        for ec in eqs:
            if ec.noncollapsible:
                literal_ok = literal_ok and bool(outside_noncoll) and \
                    _entails(ec.occurrence.atom, disj(outside_noncoll), oracle_bound)
        cond_iii = cond_iii and clause_ok
        literal_iii = literal_iii and literal_ok
        traces.append({
            "clause": ci,
            "literals": [str(l) for l in clause],
            "equalities": [(format_formula(ec.occurrence.atom), str(ec.verdict), ec.evidence["conditions"])
                           for ec in eqs],
            "entailments": entailments,
            "iii": clause_ok,
            "literal_iii": literal_ok,
        })
    fired = "i" if cond_i else "ii" if cond_ii else "iii" if cond_iii else None
    verdict: Verdict = NonCollapsible(fired) if fired else Collapsible()
    lax_all = bool(poseq) and all(
        any(classes[(o.clause, o.literal)].evidence["conditions"][c] for c in ("i", "ii_lax", "iii")) for o in poseq)
    lax_fired = "i" if cond_i else "ii" if (cond_ii or lax_all) else "iii" if cond_iii else None
    lax: Verdict = NonCollapsible(lax_fired) if lax_fired else Collapsible()
    src = source if source is not None else p.to_formula()
    flags = {
        "constant_free": not constants_of(src),
        "horn": is_horn(p),
        "disjunction_of_horn": _disjunction_of_horn(src),
    }
    return FormulaVerdict(verdict, traces, noncoll, flags, oracle_bound, literal_iii, lax)


def _disjunction_of_horn(f: Formula) -> bool:
    """Some top-level split of ``f`` into disjuncts has every disjunct Horn."""
    try:
        return all(is_horn(to_pcnf(d)) for d in flatten_or(f))
    except MatrixSizeError:
        return False


# Ladders


class LadderError(ValueError):
    """Formulas outside the ladder grammar, or a layer above the cap."""


def ladder_variable(k: int) -> str:
    return f"x{k}"


def _layer_quantifier(n: int) -> type:
    """Conjuncts of Φ_n (n ≥ 1) bind x_{n-1}; ∃ when n-1 is even, ∀ otherwise."""
    return Exists if (n - 1) % 2 == 0 else ForAll


def _is_literal_over(f: Formula, atoms: frozenset) -> bool:
    if isinstance(f, Not):
        return f.body in atoms
    return f in atoms


@dataclass(frozen=True)
class LadderMembership:
    member: bool
    layer: int
    starred: bool
    consistency_bound: int | None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.member


def _consistent(f: Formula, bound: int, signature: Signature | None) -> bool:
    return isinstance(bounded_entailment(f, Bottom, bound, signature), Refuted)


def _member(f: Formula, atoms: frozenset, n: int, starred: bool, bound: int,
            signature: Signature | None) -> str:
    """Empty string when ``f`` lies in the layer, else the reason it does not."""
    for d in flatten_or(f):
        parts = flatten_and(d)
        for c in parts:
            if n == 0:
                if not _is_literal_over(c, atoms):
                    return f"{format_formula(c)} is not a literal over the atoms"
            else:
                q = _layer_quantifier(n)
                if not (isinstance(c, q) and c.var == ladder_variable(n - 1)):
                    return f"{format_formula(c)} is not a {q.__name__} x{n - 1} conjunct"
                why = _member(c.body, atoms, n - 1, starred, bound, signature)
                if why:
                    return why
        if starred and parts and not _consistent(conj(parts), bound, signature):
            return f"{format_formula(d)} is inconsistent up to size {bound}"
    return ""


def phi_member(atoms: Iterable[Formula], n: int, starred: bool, candidate: Formula,
               cap: int = DEFAULT_LADDER_CAP, bound: int = 3,
               signature: Signature | None = None) -> LadderMembership:
    """Grammar membership of ``candidate`` in Φ_n (or Φ*_n when ``starred``).

    Starred layers need every conjunction to be consistent, decided by a
    model search up to ``bound``; conjunctions with no model of that size are
    excluded, so the result is relative to the bound.
    """
    if n > cap:
        raise LadderError(f"layer {n} exceeds the cap {cap}")
    if n < 0:
        raise LadderError("layers are numbered from 0")
    why = _member(candidate, frozenset(atoms), n, starred, bound, signature)
    return LadderMembership(not why, n, starred, bound if starred else None, why)


def normalize_ladder(f: Formula) -> Formula:
    """Sort and deduplicate conjuncts and disjuncts at every layer."""
    disjuncts = []
    for d in flatten_or(f):
        parts = []
        for c in flatten_and(d):
            if isinstance(c, (Exists, ForAll)):
                c = type(c)(c.var, normalize_ladder(c.body))
            parts.append(c)
        parts = sorted(set(parts), key=format_formula)
        disjuncts.append(conj(parts))
    return disj(sorted(set(disjuncts), key=format_formula))


# Product implication


@dataclass(frozen=True)
class ProductCheck:
    holds: bool
    bound: int
    counterexample: tuple | None = None  # (A, B, a, b)

    def __bool__(self) -> bool:
        return self.holds


class ProductOracle:
    """φ × ψ ⇒ γ over all pairs of structures of size ≤ bound.

    Truth sets are cached as bitmasks: over assignment indices for the factors
    and over (a, b) index pairs for the products.
    """

    def __init__(self, signature: Signature, variables: Sequence[str], bound: int = 3):
        self.signature = signature
        self.variables = tuple(variables)
        self.bound = bound
        self.structures = list(enumerate_structures(signature, bound))
        self._assign = [list(product(S.carrier, repeat=len(self.variables))) for S in self.structures]
        self._products: dict[tuple[int, int], FiniteStructure] = {}
        self._base: dict[tuple[Formula, int], int] = {}
        self._prod: dict[tuple[Formula, int, int], int] = {}

    def _env(self, vals: Sequence[Hashable]) -> dict:
        return dict(zip(self.variables, vals))

    def truth(self, f: Formula, i: int) -> int:
        key = (f, i)
        mask = self._base.get(key)
        if mask is None:
            S = self.structures[i]
            mask = 0
            for k, vals in enumerate(self._assign[i]):
                if _sat(S, f, self._env(vals)):
                    mask |= 1 << k
            self._base[key] = mask
        return mask

    def product_failures(self, f: Formula, i: int, j: int) -> int:
        key = (f, i, j)
        mask = self._prod.get(key)
        if mask is None:
            P = self._products.get((i, j))
            if P is None:
                P = self._products[(i, j)] = direct_product(self.structures[i], self.structures[j])
            nb = len(self._assign[j])
            mask = 0
            for ka, a in enumerate(self._assign[i]):
                for kb, b in enumerate(self._assign[j]):
                    if not _sat(P, f, self._env(tuple(zip(a, b)))):
                        mask |= 1 << (ka * nb + kb)
            self._prod[key] = mask
        return mask

    def check(self, phi: Formula, psi: Formula, gamma: Formula) -> ProductCheck:
        n = len(self.structures)
        for i in range(n):
            A = self.truth(phi, i)
            if not A:
                continue
            for j in range(n):
                B = self.truth(psi, j)
                if not B:
                    continue
                nb = len(self._assign[j])
                grid = 0
                ka = 0
                bits = A
                while bits:
                    if bits & 1:
                        grid |= B << (ka * nb)
                    bits >>= 1
                    ka += 1
                bad = grid & self.product_failures(gamma, i, j)
                if bad:
                    k = (bad & -bad).bit_length() - 1
                    a, b = self._assign[i][k // nb], self._assign[j][k % nb]
                    return ProductCheck(False, self.bound,
                                        (self.structures[i], self.structures[j], self._env(a), self._env(b)))
        return ProductCheck(True, self.bound)


_ORACLES: dict[tuple, ProductOracle] = {}


def _oracle(signature: Signature, variables: Sequence[str], bound: int) -> ProductOracle:
    key = (signature.key(), tuple(variables), bound)
    if key not in _ORACLES:
        _ORACLES[key] = ProductOracle(signature, variables, bound)
    return _ORACLES[key]


def _shared(formulas: Sequence[Formula], signature: Signature | None,
            variables: Sequence[str] | None) -> tuple[Signature, tuple[str, ...]]:
    sig = symbols_of(*formulas)
    if signature is not None:
        sig = signature.merge(sig)
    free = set().union(*(free_variables(f) for f in formulas))
    if variables is None:
        variables = sorted(free)
    elif not free <= set(variables):
        raise ValueError("variable list misses free variables")
    return sig, tuple(variables)


def product_implies(phi: Formula, psi: Formula, gamma: Formula, bound: int = 3,
                    signature: Signature | None = None, variables: Sequence[str] | None = None) -> ProductCheck:
    """Bounded check of φ × ψ ⇒ γ for arbitrary formulas."""
    sig, vs = _shared([phi, psi, gamma], signature, variables)
    return _oracle(sig, vs, bound).check(phi, psi, gamma)


def product_implies_base(phi: Formula, psi: Formula, gamma: Formula, bound: int = 3,
                         signature: Signature | None = None,
                         variables: Sequence[str] | None = None) -> ProductCheck:
    """φ × ψ ⇒ γ for quantifier-free formulas, exhaustively up to ``bound``."""
    for f in (phi, psi, gamma):
        if not is_quantifier_free(f):
            raise ValueError(f"{format_formula(f)} is not quantifier-free")
    return product_implies(phi, psi, gamma, bound, signature, variables)


# Weinstein's R


class WeinsteinR:
    """Memoized R over one atom set; the base case uses one shared product oracle."""

    def __init__(self, atoms: Iterable[Formula], cap: int = DEFAULT_LADDER_CAP, bound: int = 3,
                 signature: Signature | None = None, variables: Sequence[str] | None = None):
        self.atoms = frozenset(atoms)
        self.cap = cap
        self.bound = bound
        sig = symbols_of(*self.atoms) if self.atoms else Signature()
        if signature is not None:
            sig = signature.merge(sig)
        self.signature = sig
        if variables is None:
            names = set().union(*(free_variables(a) for a in self.atoms)) if self.atoms else set()
            names |= {ladder_variable(k) for k in range(cap)}
            variables = sorted(names, key=lambda v: (len(v), v))
        self.variables = tuple(variables)
        self.oracle = _oracle(sig, self.variables, bound)
        self._memo: dict[tuple, bool] = {}

    def layer(self, *formulas: Formula) -> int:
        for n in range(self.cap + 1):
            if all(_member(f, self.atoms, n, False, self.bound, self.signature) == "" for f in formulas):
                return n
        raise LadderError("formulas do not lie in a common layer under the cap")

    def __call__(self, phi: Formula, psi: Formula, gamma: Formula, n: int | None = None) -> bool:
        if n is None:
            n = self.layer(phi, psi, gamma)
        elif n > self.cap:
            raise LadderError(f"layer {n} exceeds the cap {self.cap}")
        else:
            for f in (phi, psi, gamma):
                why = _member(f, self.atoms, n, False, self.bound, self.signature)
                if why:
                    raise LadderError(f"not in layer {n}: {why}")
        return self._r(phi, psi, gamma, n)

    def _r(self, phi: Formula, psi: Formula, gamma: Formula, n: int) -> bool:
        key = (phi, psi, gamma, n)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if n == 0:
            out = self.oracle.check(phi, psi, gamma).holds
        else:
            out = all(
                any(all(any(self._r(fb.body, pb.body, gb.body, n - 1)
                            for fb in flatten_and(fd) for pb in flatten_and(pd))
                        for gb in flatten_and(gd))
                    for gd in flatten_or(gamma))
                for fd in flatten_or(phi) for pd in flatten_or(psi))
        self._memo[key] = out
        return out


def weinstein_R(phi: Formula, psi: Formula, gamma: Formula, n: int | None = None, bound: int = 3,
                cap: int = DEFAULT_LADDER_CAP, atoms: Iterable[Formula] | None = None,
                signature: Signature | None = None) -> bool:
    """R(φ, ψ, γ) with Φ the atoms of the three formulas unless ``atoms`` is given."""
    if atoms is None:
        atoms = _atoms_of(phi) | _atoms_of(psi) | _atoms_of(gamma)
    return WeinsteinR(atoms, cap, bound, signature)(phi, psi, gamma, n)


def _atoms_of(f: Formula) -> set[Formula]:
    if isinstance(f, (Eq, Rel)):
        return {f}
    if isinstance(f, Not):
        return _atoms_of(f.body)
    if isinstance(f, (And, Or)):
        return _atoms_of(f.left) | _atoms_of(f.right)
    if isinstance(f, (Exists, ForAll)):
        return _atoms_of(f.body)
    if isinstance(f, (_TopType, _BottomType)):
        return set()
    raise LadderError(f"{format_formula(f)} is outside the ladder grammar")


def ladder_corpus(atoms: Sequence[Formula], cap: int = 2) -> dict[int, list[Formula]]:
    """A bounded ladder corpus over exactly two atoms, layers 0 to ``cap``.

    Layer 0: every conjunction of literals with at most one literal per atom,
    one contradictory conjunction, ⊥, the four two-literal disjunctions over
    distinct atoms, and the two parity disjunctions.  Layer 1 quantifies every
    non-constant layer-0 member with ∃x0 and adds ⊤, ⊥ and two compound forms;
    layer 2 quantifies the satisfiable one- and two-literal layer-1 formulas
    with ∀x1 and adds ⊤, ⊥ and two compound forms.
    """
    if len(atoms) != 2:
        raise ValueError("the corpus generator expects two atoms")
    a, b = atoms
    lits = {(a, True): a, (a, False): Not(a), (b, True): b, (b, False): Not(b)}
    cubes = [Top, a, Not(a), b, Not(b)] + [conj([lits[(a, s)], lits[(b, t)]])
                                           for s in (True, False) for t in (True, False)]
    level0 = cubes + [conj([a, Not(a)]), Bottom]
    level0 += [disj([lits[(a, s)], lits[(b, t)]]) for s in (True, False) for t in (True, False)]
    level0 += [disj([conj([a, b]), conj([Not(a), Not(b)])]), disj([conj([a, Not(b)]), conj([Not(a), b])])]
    layers = {0: [normalize_ladder(f) for f in level0]}
    if cap >= 1:
        x0 = ladder_variable(0)
        base = [Exists(x0, f) for f in layers[0] if not isinstance(f, (_TopType, _BottomType))]
        extra = [conj([Exists(x0, a), Exists(x0, Not(a))]), disj([Exists(x0, b), Exists(x0, Not(b))])]
        layers[1] = [normalize_ladder(f) for f in base + [Top, Bottom] + extra]
    if cap >= 2:
        x1 = ladder_variable(1)
        chosen = [Exists(ladder_variable(0), f) for f in cubes[1:] + level0[11:15]]
        base = [ForAll(x1, normalize_ladder(f)) for f in chosen]
        extra = [conj([ForAll(x1, Exists("x0", a)), ForAll(x1, Exists("x0", b))]),
                 disj([ForAll(x1, Exists("x0", Not(a))), ForAll(x1, Exists("x0", b))])]
        layers[2] = [normalize_ladder(f) for f in base + [Top, Bottom] + extra]
    if cap > 2:
        raise LadderError("the generated corpus stops at layer 2")
    for n, fs in layers.items():
        layers[n] = list(dict.fromkeys(fs))
    return layers


# Direct power sentences


def ladder_form(phi: Formula, cap: int = 4) -> tuple[Formula, int] | None:
    """Rewrite a sentence as one nested ladder formula with a DNF matrix.

    Prefix positions are filled innermost-first with ∃x0, ∀x1, ∃x2, ...;
    vacuous quantifiers are inserted where the prefix has the other type.
    Returns None when the form needs more than ``cap`` positions or the
    matrix exceeds the size cap.
    """
    try:
        p = to_pdnf(phi)
    except MatrixSizeError:
        return None
    rename: dict[str, str] = {}
    quants: list[type] = []
    pos = 0
    for q, v in reversed(p.prefix):
        want = "exists" if pos % 2 == 0 else "forall"
        if q != want:
            quants.append(_layer_quantifier(pos + 1))
            pos += 1
        rename[v] = ladder_variable(pos)
        quants.append(_layer_quantifier(pos + 1))
        pos += 1
    if pos > cap:
        return None

    def lit(l: Literal) -> Formula:
        atom = l.atom
        if isinstance(atom, Eq):
            atom = Eq(_rename_term(atom.left, rename), _rename_term(atom.right, rename))
        else:
            atom = Rel(atom.name, tuple(_rename_term(t, rename) for t in atom.args))
        return atom if l.positive else Not(atom)

    body = disj([conj([lit(l) for l in cube]) for cube in p.matrix])
    for k, q in enumerate(quants):
        body = q(ladder_variable(k), body)
    return body, pos


@dataclass
class DirectPowerVerdict:
    syntactic: str            # "R_HOLDS", "R_FAILS_FOR_FORM" or "UNKNOWN"
    ladder: Formula | None
    layer: int | None
    empirical: str            # "PRESERVED_UP_TO" or "NOT_PRESERVED"
    witness: tuple | None     # (structure, |I|) where φ holds in the structure and fails in the power
    cumulative: str | None = None   # stage-1 cumulative search, when requested
    cumulative_witness: tuple | None = None
    bounds: dict = field(default_factory=dict)


def is_direct_power_sentence(phi: Formula, bound: int = 2, index_bound: int = 3,
                             syntactic_bound: int = 2, ladder_cap: int = 4,
                             cumulative: bool = False, signature: Signature | None = None) -> DirectPowerVerdict:
    """Two independent verdicts on preservation by direct powers.

    Syntactic: R(ψ, ψ, ψ) on the ladder form ψ of φ; only a true R is
    conclusive, so anything else is reported without a claim.  Empirical:
    search structures of size ≤ ``bound`` for one where φ holds and fails in a
    power with 2 ≤ |I| ≤ ``index_bound``.  With ``cumulative`` the same search
    is run against stage-1 cumulative powers (plus mode when φ has constants).
    """
    if free_variables(phi):
        raise ValueError(f"{format_formula(phi)} is not a sentence")
    sig = symbols_of(phi) if signature is None else signature.merge(symbols_of(phi))
    form = ladder_form(phi, ladder_cap)
    syntactic, ladder, layer = "UNKNOWN", None, None
    if form is not None:
        ladder, layer = form
        R = WeinsteinR(_atoms_of(ladder), cap=max(layer, 0), bound=syntactic_bound, signature=sig,
                       variables=[ladder_variable(k) for k in range(layer)])
        syntactic = "R_HOLDS" if R(ladder, ladder, ladder, layer) else "R_FAILS_FOR_FORM"
    empirical, witness = "PRESERVED_UP_TO", None
    cum, cum_witness = (None, None)
    structures = [S for S in enumerate_structures(sig, bound) if satisfies(S, phi)]
    for S in structures:
        for k in range(2, index_bound + 1):
            if not satisfies(direct_power(S, range(k)), phi):
                empirical, witness = "NOT_PRESERVED", (S, k)
                break
        if witness:
            break
    if cumulative:
        from .cumulative import CumulativePower, IndexFamily
        cum = "PRESERVED_UP_TO"
        plus = bool(sig.constants)
        for S in structures:
            for k in range(2, index_bound + 1):
                cp = CumulativePower(S, IndexFamily([("I0", range(k))]), 1, plus=plus)
                if not satisfies(cp.as_structure(), phi):
                    cum, cum_witness = "NOT_PRESERVED", (S, k)
                    break
            if cum_witness:
                break
    return DirectPowerVerdict(syntactic, ladder, layer, empirical, witness, cum, cum_witness,
                              {"bound": bound, "index_bound": index_bound, "syntactic_bound": syntactic_bound,
                               "ladder_cap": ladder_cap})
