"""Support and representatives, completeness, Rudin–Keisler comparison,
transport of functions along index maps, ultrapower embeddings, τ-profiles,
concurrency of relations and class sizes."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Any, Hashable, Mapping, Sequence

from .filters import FilterFamily, subsets
from .finmodel import (
    UNDEFINED, QuotientStructure, as_structure, direct_power, embedding_failures, ultrapower,
)
from .quotients import set_partitions

__all__ = [
    "TheoremViolation", "SupportProfile", "support", "rep_set", "is_kappa_complete", "RepresentativeReport",
    "representative_check", "TauProfile", "tau_profile", "tau_enumerated", "tau_direct_power_formula", "rk_compare",
    "is_rk_witness", "preimage_map", "set_map_properties", "w_transport", "RKReport", "rk_embedding",
    "DirectPowerEmbedding", "embed_into_direct_power", "kappa_concurrent", "ClassSizeReport",
    "class_size_uniformity", "all_maps",
]


class TheoremViolation(AssertionError):
    """A checked biconditional failed; with correct code this signals a bug."""


def all_maps(domain: Sequence[Hashable], codomain: Sequence[Hashable]) -> list[dict]:
    """Every map domain -> codomain, lexicographic in the codomain order."""
    return [dict(zip(domain, vals)) for vals in product(codomain, repeat=len(domain))]


# Support


@dataclass(frozen=True)
class SupportProfile:
    support: tuple
    anti_support: tuple
    evidence: dict = field(default_factory=dict)


def support(S: Any) -> SupportProfile:
    """Elements a such that every operation is defined on every tuple containing a."""
    S = as_structure(S)
    evidence: dict = {}
    supp = []
    anti = []
    for a in S.carrier:
        missing = []
        for fn, ar in S.signature.functions.items():
            table = S.functions[fn]
            for args in product(S.carrier, repeat=ar):
                if a in args and table.get(args, UNDEFINED) is UNDEFINED:
                    missing.append((fn, args))
        evidence[a] = missing
        (anti if missing else supp).append(a)
    return SupportProfile(tuple(supp), tuple(anti), evidence)


def rep_set(S: Any, I: Sequence[Hashable], profile: SupportProfile | None = None) -> list[tuple]:
    """Constant functions at anti-support elements, plus functions with range inside the support."""
    S = as_structure(S)
    prof = profile or support(S)
    k = len(tuple(I))
    consts = [tuple([a] * k) for a in prof.anti_support]
    ranged = [f for f in product(prof.support, repeat=k)]
    pos = {x: i for i, x in enumerate(S.carrier)}
    return sorted(set(consts) | set(ranged), key=lambda f: [pos[x] for x in f])


# Completeness


def is_kappa_complete(U: FilterFamily, kappa: int) -> bool:
    """Closure under intersections of fewer than kappa members, cross-checked against the
    partition characterization (some part of every partition into fewer than kappa parts is in U)."""
    if not U.is_ultrafilter:
        raise ValueError("completeness is checked for ultrafilters")
    # Subfamilies of size below 2 are trivial.  Closure under pairwise meets gives closure
    # under every finite meet by induction, which covers all subfamilies of a finite family.
    by_intersection = kappa <= 2 or all((a & b) in U.members for a, b in combinations(U.members, 2))
    by_partition = True
    for parts in set_partitions(list(U.ground)):
        if len(parts) < kappa and not any(frozenset(p) in U.members for p in parts):
            by_partition = False
            break
    if by_intersection != by_partition:
        raise TheoremViolation("intersection and partition views of completeness disagree")
    return by_intersection


@dataclass
class RepresentativeReport:
    holds: bool
    complete: bool
    kappa: int
    witnesses: dict
    proof_witnesses: dict

    @property
    def biconditional(self) -> bool:
        return self.holds == self.complete


def representative_check(S: Any, I: Sequence[Hashable], U: FilterFamily,
                         quotient: QuotientStructure | None = None, strict: bool = True) -> RepresentativeReport:
    """Every class of A^I/U meets rep(A^I) iff U is κ⁺-complete, κ = |anti-support|."""
    S = as_structure(S)
    I = tuple(I)
    Q = quotient if quotient is not None else ultrapower(S, I, U)
    prof = support(S)
    reps = set(rep_set(S, I, prof))
    witnesses = {}
    for cls in Q.classes:
        hit = next((f for f in cls if f in reps), None)
        if hit is not None:
            witnesses[cls[0]] = hit
    holds = len(witnesses) == len(Q.classes)
    kappa = len(prof.anti_support)
    complete = is_kappa_complete(U, kappa + 1)
    proof = {}
    if complete:
        supp = set(prof.support)
        c = prof.support[0] if prof.support else None
        for cls in Q.classes:
            f = cls[0]
            inside = frozenset(j for p, j in enumerate(I) if f[p] in supp)
            if inside in U.members and c is not None:
                g = tuple(f[p] if f[p] in supp else c for p in range(len(I)))
            else:
                a = next(a for a in prof.anti_support
                         if frozenset(j for p, j in enumerate(I) if f[p] == a) in U.members)
                g = tuple([a] * len(I))
            if g not in reps or Q.class_of[g] != f:
                raise TheoremViolation(f"patched witness {g} fails for class {f}")
            proof[f] = g
    report = RepresentativeReport(holds, complete, kappa, witnesses, proof)
    if strict and not report.biconditional:
        raise TheoremViolation(f"representatives: holds={holds} but completeness={complete}")
    return report


# τ-profiles


@dataclass
class TauProfile:
    counts: dict          # element -> {("down"|"up", F) or ("rel", R): count}
    tau_of: dict          # element -> τ_a
    tau: int
    witness: Hashable


def tau_profile(S: Any) -> TauProfile:
    """Exact tuple-set sizes read off the tables.

    S↓(a, F): argument tuples with value a.  S↑(a, F): tuples (b_1..b_{ar-1}, v) such that
    inserting a at some argument position gives value v.  S(a, R): (ar-1)-tuples completing
    to a member of R with a inserted at some position.
    """
    S = as_structure(S)
    down: dict = {a: {} for a in S.carrier}
    up: dict = {a: {} for a in S.carrier}
    rel: dict = {a: {} for a in S.carrier}
    for fn in S.signature.functions:
        for a in S.carrier:
            down[a][fn] = set()
            up[a][fn] = set()
        for args, v in S.functions[fn].items():
            down[v][fn].add(args)
            for p, x in enumerate(args):
                up[x][fn].add(args[:p] + args[p + 1:] + (v,))
    for r in S.signature.relations:
        for a in S.carrier:
            rel[a][r] = set()
        for t in S.relations[r]:
            for p, x in enumerate(t):
                rel[x][r].add(t[:p] + t[p + 1:])
    counts = {}
    tau_of = {}
    for a in S.carrier:
        c = {}
        for fn in S.signature.functions:
            c[("down", fn)] = len(down[a][fn])
            c[("up", fn)] = len(up[a][fn])
        for r in S.signature.relations:
            c[("rel", r)] = len(rel[a][r])
        counts[a] = c
        tau_of[a] = sum(c.values())
    best = max(S.carrier, key=lambda a: (tau_of[a], -S.index[a]))
    return TauProfile(counts, tau_of, tau_of[best], best)


def tau_enumerated(S: Any) -> dict:
    """τ_a recomputed by scanning every tuple of the carrier instead of the tables."""
    S = as_structure(S)
    out = {}
    for a in S.carrier:
        total = 0
        for fn, ar in S.signature.functions.items():
            tuples = list(product(S.carrier, repeat=ar))
            total += sum(1 for t in tuples if S.apply(fn, t) == a)
            total += len({t[:p] + t[p + 1:] + (S.apply(fn, t),) for t in tuples for p in range(ar)
                          if t[p] == a and S.apply(fn, t) is not UNDEFINED})
        for r, ar in S.signature.relations.items():
            total += len({t[:p] + t[p + 1:] for t in product(S.carrier, repeat=ar) for p in range(ar)
                          if t[p] == a and S.holds(r, t)})
        out[a] = total
    return out


def tau_direct_power_formula(S: Any, I: Sequence[Hashable]) -> dict:
    """Compare τ of the materialized power with Σ_F |S↓(m)|^|I| + |S↑(m)|^|I|.

    ``applicable`` is False when no single element maximizes every component
    count or the structure has relations; the values are reported either way.
    """
    S = as_structure(S)
    k = len(tuple(I))
    prof = tau_profile(S)
    keys = [key for key in next(iter(prof.counts.values()))]
    maximizer = None
    for a in S.carrier:
        if all(prof.counts[a][key] == max(prof.counts[b][key] for b in S.carrier) for key in keys):
            maximizer = a
            break
    actual = tau_profile(direct_power(S, I)).tau
    m = maximizer if maximizer is not None else prof.witness
    formula = sum(prof.counts[m][key] ** k for key in keys if key[0] != "rel")
    return {"applicable": maximizer is not None and not S.signature.relations,
            "maximizer": maximizer, "formula": formula, "actual": actual,
            "bound": prof.tau ** k}


# Rudin–Keisler


def is_rk_witness(h: Mapping, U_I: FilterFamily, U_J: FilterFamily) -> bool:
    """X ∈ U_I iff h⁻¹[X] ∈ U_J for every X ⊆ I."""
    return all((X in U_I.members) == (frozenset(j for j in U_J.ground if h[j] in X) in U_J.members)
               for X in subsets(U_I.ground))


def rk_compare(U_I: FilterFamily, U_J: FilterFamily) -> dict | None:
    """The first map h: J -> I (canonical order) witnessing U_I ≤_RK U_J, or None."""
    if not (U_I.is_ultrafilter and U_J.is_ultrafilter):
        raise ValueError("RK comparison expects ultrafilters")
    for h in all_maps(U_J.ground, U_I.ground):
        if is_rk_witness(h, U_I, U_J):
            return h
    return None


def preimage_map(h: Mapping, I: Sequence[Hashable], J: Sequence[Hashable]) -> dict:
    return {X: frozenset(j for j in J if h[j] in X) for X in subsets(I)}


def set_map_properties(H: Mapping[frozenset, frozenset], I: Sequence[Hashable],
                       J: Sequence[Hashable]) -> dict:
    """Flags for H: P(I) -> P(J).  ``empty_to_empty`` and ``partitions`` are reported too."""
    I, J = tuple(I), tuple(J)
    if len(I) > 12:
        raise ValueError("powerset guard: |I| <= 12")
    subs = subsets(I)
    if any(X not in H for X in subs):
        raise ValueError("H must be total on the powerset of I")
    gI, gJ = frozenset(I), frozenset(J)
    flags = {
        "multiplicative": all(H[X] & H[Y] == H[X & Y] for X in subs for Y in subs),
        "additive": all(H[X] | H[Y] == H[X | Y] for X in subs for Y in subs),
        "subtractive": all(H[gI - X] == H[gI] - H[X] for X in subs),
        "covering": H[gI] == gJ,
        "empty_to_empty": H[frozenset()] == frozenset(),
    }
    parts_ok = True
    if len(I) <= 6:
        for parts in set_partitions(list(I)):
            images = [H[frozenset(p)] for p in parts]
            nonempty = [x for x in images if x]
            if sum(len(x) for x in nonempty) != len(frozenset().union(*images)) \
                    or frozenset().union(*images) != gJ:
                parts_ok = False
                break
    flags["partitions"] = parts_ok
    return flags


def w_transport(u: Mapping, h: Mapping, f: Sequence[Hashable], I: Sequence[Hashable],
                J: Sequence[Hashable]) -> tuple:
    """w(f) = u ∘ f ∘ h, asserted against the fiber description
    {j | w(f)(j) = u(a)} = h⁻¹[{i | f(i) = a}]."""
    I, J = tuple(I), tuple(J)
    if len(set(u.values())) != len(u):
        raise ValueError("u must be injective")
    pos = {i: p for p, i in enumerate(I)}
    closed = tuple(u[f[pos[h[j]]]] for j in J)
    fiber: dict = {}
    for a in set(f):
        X = frozenset(i for p, i in enumerate(I) if f[p] == a)
        for j in J:
            if h[j] in X:
                if j in fiber:
                    raise TheoremViolation("fibers overlap")
                fiber[j] = u[a]
    if len(fiber) != len(J) or tuple(fiber[j] for j in J) != closed:
        raise TheoremViolation("closed form and fiber definition of w disagree")
    return closed


@dataclass
class RKReport:
    well_defined: bool
    injective: bool
    preserves: bool
    h_is_witness: bool
    rk_exists: bool
    mapping: dict
    failures: list[str]

    @property
    def embedding(self) -> bool:
        return self.well_defined and self.injective and self.preserves

    @property
    def biconditional(self) -> bool:
        return self.embedding == self.h_is_witness


def rk_embedding(A: Any, B: Any, u: Mapping, h: Mapping, U_I: FilterFamily, U_J: FilterFamily,
                 QA: QuotientStructure | None = None, QB: QuotientStructure | None = None,
                 strict: bool = True) -> RKReport:
    """e: [f] ↦ [w(f)] from A^I/U_I to B^J/U_J; e is an embedding iff h witnesses U_I ≤_RK U_J."""
    A, B = as_structure(A), as_structure(B)
    if len(A.carrier) < 2:
        raise ValueError("the criterion assumes |A| > 1")
    problems = embedding_failures(A, B, u)
    if problems:
        raise ValueError("u is not an embedding: " + "; ".join(problems))
    I, J = tuple(U_I.ground), tuple(U_J.ground)
    QA = QA if QA is not None else ultrapower(A, I, U_I)
    QB = QB if QB is not None else ultrapower(B, J, U_J)
    failures: list[str] = []
    mapping: dict = {}
    well_defined = True
    for f in QA.carrier:
        target = QB.class_of[w_transport(u, h, f, I, J)]
        src = QA.class_of[f]
        if mapping.setdefault(src, target) != target:
            well_defined = False
            failures.append(f"class of {src} has members with different images")
            break
    injective = well_defined and len(set(mapping.values())) == len(mapping)
    preserves = False
    if well_defined:
        issues = embedding_failures(QA.structure, QB.structure, mapping, limit=5)
        preserves = not [p for p in issues if p != "map is not injective"]
        failures.extend(issues)
    report = RKReport(well_defined, injective, preserves, is_rk_witness(h, U_I, U_J),
                      rk_compare(U_I, U_J) is not None, mapping, failures)
    if strict and not report.biconditional:
        raise TheoremViolation(f"RK embedding: embedding={report.embedding}, witness={report.h_is_witness}")
    return report


# Embedding an ultrapower into the direct power


@dataclass
class DirectPowerEmbedding:
    embedding: dict | None
    verified: bool
    complete: bool
    tau: int
    order: list = field(default_factory=list)

    @property
    def biconditional(self) -> bool:
        return (self.embedding is not None and self.verified) == self.complete


def embed_into_direct_power(S: Any, I: Sequence[Hashable], U: FilterFamily,
                            quotient: QuotientStructure | None = None, strict: bool = True) -> DirectPowerEmbedding:
    """Build a choice function e on the classes of A^I/U that embeds it into A^I.

    Seeded with [x̄] ↦ x̄; every remaining class a (canonical order) gets the
    least representative θ(a) patched outside the set X^a where all facts about
    a, read through the current choices a†, hold coordinatewise.
    """
    S = as_structure(S)
    I = tuple(I)
    Q = quotient if quotient is not None else ultrapower(S, I, U)
    P = Q.extra.get("power") or direct_power(S, I)
    B = Q.structure
    tau = tau_profile(B).tau
    complete = is_kappa_complete(U, tau + 1)
    k = len(I)
    e: dict = {}
    for x in S.carrier:
        c = tuple([x] * k)
        e.setdefault(Q.class_of[c], c)
    order = [a for a in B.carrier if a not in e]

    def dagger(b: Hashable) -> tuple:
        return e.get(b, b)  # representatives are the least members θ(b)

    for a in order:
        theta = a
        good = set(range(k))
        for fn, ar in B.signature.functions.items():
            table = B.functions[fn]
            for args, v in table.items():
                if v == a:
                    vals = [dagger(b) for b in args]
                    good &= {p for p in range(k) if S.apply(fn, [x[p] for x in vals]) == theta[p]}
                for pos_a, x in enumerate(args):
                    if x == a:
                        rest = [theta if q == pos_a else dagger(b) for q, b in enumerate(args)]
                        out = dagger(v) if v != a else theta
                        good &= {p for p in range(k) if S.apply(fn, [r[p] for r in rest]) == out[p]}
        for r, ar in B.signature.relations.items():
            for t in B.relations[r]:
                for pos_a, x in enumerate(t):
                    if x == a:
                        rest = [theta if q == pos_a else dagger(b) for q, b in enumerate(t)]
                        good &= {p for p in range(k) if S.holds(r, [z[p] for z in rest])}
        if not good or frozenset(I[p] for p in good) not in U.members:
            e = {}
            break
        fill = min(good)
        e[a] = tuple(theta[p] if p in good else theta[fill] for p in range(k))
    embedding = e if len(e) == len(B.carrier) else None
    verified = False
    if embedding is not None:
        choice_ok = all(Q.class_of[embedding[a]] == a for a in B.carrier)
        verified = choice_ok and not embedding_failures(B, P, embedding, limit=1)
    result = DirectPowerEmbedding(embedding, verified, complete, tau, order)
    if strict and not result.biconditional:
        raise TheoremViolation(f"direct-power embedding: built={verified}, complete={complete}")
    return result


# Concurrency and class sizes


def kappa_concurrent(S: Any, R: str, kappa: int) -> bool:
    """For every X with |X| < kappa whose members all have R-successors, some c is an
    R-successor of every member of X."""
    S = as_structure(S)
    if S.signature.relations.get(R) != 2:
        raise ValueError("kappa-concurrency needs a binary relation")
    rel = S.relations[R]
    succ = {a: {b for b in S.carrier if (a, b) in rel} for a in S.carrier}
    for size in range(0, min(kappa - 1, len(S.carrier)) + 1):
        for X in combinations(S.carrier, size):
            if all(succ[a] for a in X):
                common = set(S.carrier)
                for a in X:
                    common &= succ[a]
                if not common:
                    return False
    return True


@dataclass
class ClassSizeReport:
    uniform: bool
    sizes: dict
    size: int
    proof_map_injective: bool
    corrected_map_injective: bool


def class_size_uniformity(S: Any, I: Sequence[Hashable], U: FilterFamily,
                          quotient: QuotientStructure | None = None) -> ClassSizeReport:
    """Count every class of A^I/U.

    Two maps [a] -> [b] are also evaluated for every pair of classes: the
    coordinate patch c ↦ (b on {a = c}, c elsewhere) and a patch on the least
    member Z of U only (c ↦ (b on Z, c elsewhere)).  The first is reported as a
    diagnostic; it need not be injective.  The second is asserted injective.
    """
    S = as_structure(S)
    I = tuple(I)
    if len(S.carrier) < 2:
        raise ValueError("the statement is trivial for |A| = 1; the check assumes |A| > 1")
    Q = quotient if quotient is not None else ultrapower(S, I, U)
    sizes = {cls[0]: len(cls) for cls in Q.classes}
    values = set(sizes.values())
    Z = U.kernel
    zpos = {p for p, j in enumerate(I) if j in Z}
    proof_ok = True
    corrected_ok = True
    k = len(I)
    for ca in Q.classes:
        a = ca[0]
        for cb in Q.classes:
            b = cb[0]
            # the enumeration starts at c_0 = a, which is sent to b
            patched = [b] + [tuple(b[p] if a[p] == c[p] else c[p] for p in range(k)) for c in ca[1:]]
            if len(set(patched)) != len(patched):
                proof_ok = False
            moved = [tuple(b[p] if p in zpos else c[p] for p in range(k)) for c in ca]
            if len(set(moved)) != len(moved) or any(Q.class_of[m] != b for m in moved):
                corrected_ok = False
    if not corrected_ok:
        raise TheoremViolation("patch on the least member of U failed to be an injection")
    return ClassSizeReport(len(values) == 1, sizes, next(iter(values)) if len(values) == 1 else -1,
                           proof_ok, corrected_ok)
