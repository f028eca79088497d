"""Exhaustive theorem grids.  Each suite returns records (construction, theorem,
cell, verdict, witness); verdict is "pass", "fail" or "report"."""

from __future__ import annotations

import importlib.resources
import time
from dataclasses import dataclass
from itertools import product
from typing import Callable

from .classify import (
    ProductOracle, WeinsteinR, classify_formula, is_horn, ladder_corpus,
)
from .cumulative import (
    Base, CumulativePower, Func, IndexFamily, apply_operation, holds_relation, level, vartheta,
)
from .embeddings import (
    all_maps, class_size_uniformity, embed_into_direct_power, representative_check, rk_embedding,
    tau_enumerated, tau_profile,
)
from .filters import ultrafilters_over
from .finmodel import (
    UNDEFINED, FiniteStructure, direct_power, enumerate_structures, find_isomorphism, is_embedding,
    satisfies, ultrapower,
)
from .formats import Corpus, parse_corpus
from .quotients import (
    Ultra, canonical_iso_direct, canonical_iso_ultra, induced_filterbase_on_carrier,
    induced_ultrafilter_on_quotient, los_check, los_check_formula, quotient_by, set_partitions,
)
from .syntax import (
    App, Eq, Exists, ForAll, Formula, Not, Signature, Var, And, Or, format_formula, parse_formula, symbols_of,
    to_pcnf,
)

__all__ = [
    "GridRecord", "SUITES", "run_suite", "shipped_corpus", "los_corpus", "structures_up_to_iso",
    "cyclic_group", "describe",
]


@dataclass(frozen=True)
class GridRecord:
    construction: str
    theorem: str
    cell: str
    verdict: str
    witness: str = ""

    @property
    def failed(self) -> bool:
        return self.verdict == "fail"


def _rec(construction: str, theorem: str, cell: str, ok: bool, witness: str = "") -> GridRecord:
    return GridRecord(construction, theorem, cell, "pass" if ok else "fail", "" if ok else witness)


def describe(S: FiniteStructure) -> str:
    """Compact one-line rendering of a small structure for grid cells."""
    parts = [f"|A|={len(S.carrier)}"]
    for fn in S.signature.functions:
        parts.append(fn + "{" + ",".join(f"{''.join(map(str, k))}>{v}" for k, v in
                                         sorted(S.functions[fn].items(), key=lambda kv: str(kv))) + "}")
    for r in S.signature.relations:
        parts.append(r + "{" + ",".join("".join(map(str, t)) for t in sorted(S.relations[r], key=str)) + "}")
    for c in S.signature.constants:
        parts.append(f"{c}={S.constants[c]}")
    return " ".join(parts)


def shipped_corpus() -> Corpus:
    text = importlib.resources.files("powlab").joinpath("data/corpus.txt").read_text(encoding="utf-8")
    return parse_corpus(text, source="corpus.txt")


def cyclic_group(n: int) -> FiniteStructure:
    sig = Signature({"add": 2})
    table = {(x, y): (x + y) % n for x in range(n) for y in range(n)}
    return FiniteStructure(sig, range(n), {"add": table}, name=f"Z{n}")


def structures_up_to_iso(sig: Signature, size: int, total: bool = True) -> list[FiniteStructure]:
    """One labeled representative per isomorphism class, first in enumeration order."""
    kept: list[FiniteStructure] = []
    for S in enumerate_structures(sig, size, total=total, min_size=size):
        if all(find_isomorphism(S, T) is None for T in kept):
            kept.append(S)
    return kept


def _family(*sizes: int) -> IndexFamily:
    return IndexFamily([(f"I{m}", list(range(k))) for m, k in enumerate(sizes)])


# 1. hereditary arithmetic


def suite_arithmetic() -> list[GridRecord]:
    """Z8 at stage 2 with |I_0| = |I_1| = 2: a level-2 function plus Base(3), checked coordinatewise."""
    Z8 = cyclic_group(8)
    fam = _family(2, 2)
    cp = CumulativePower(Z8, fam, 2)
    I0, I1 = fam[0], fam[1]
    # an analogue of the successor function s_1 restricted to two level-1 points
    f = Func(I0, (Base(1), Base(4)))
    s1 = Func(I1, (Func(I0, tuple(Base((v.value + 1) % 8) for v in f.values)), Base(6)))
    out = []
    result = apply_operation(cp, "add", (s1, Base(3)))
    out.append(_rec("cumulative", "arithmetic:level", "s1+3", level(result) == 2, repr(result)))
    for j in I1:
        coord = apply_operation(cp, "add", (vartheta(2, j, s1, I1), vartheta(2, j, Base(3), I1)))
        out.append(_rec("cumulative", "arithmetic:coordinate", f"j={j}", result(j) == coord, repr((result(j), coord))))
        inner = s1(j)
        if isinstance(inner, Func):
            for i in I0:
                want = Base((inner(i).value + 3) % 8)
                out.append(_rec("cumulative", "arithmetic:base", f"j={j},i={i}", result(j)(i) == want,
                                repr(result(j)(i))))
        else:
            out.append(_rec("cumulative", "arithmetic:base", f"j={j}",
                            result(j) == Base((inner.value + 3) % 8), repr(result(j))))
    return out


# 2. levels, restriction and ϑ


def _level_structures() -> list[FiniteStructure]:
    fsig = Signature({"F": 2})
    rsig = Signature({}, {"R": 2})
    return list(enumerate_structures(fsig, 2, total=False)) + list(enumerate_structures(rsig, 2))


def _level_checks(S: FiniteStructure) -> list[GridRecord]:
    fam = _family(2, 2)
    stages = [CumulativePower(S, fam, n) for n in range(3)]
    cell = describe(S)
    problems: dict[str, str] = {}

    def note(key: str, msg: str) -> None:
        problems.setdefault(key, msg)

    top = stages[2]
    for fn, ar in S.signature.functions.items():
        for args in product(top.carrier, repeat=ar):
            v = apply_operation(top, fn, args)
            if v is not UNDEFINED and level(v) != max(level(a) for a in args):
                note("levels:max", f"{fn}{args}")
    for n in (1, 2):
        hi, lo = stages[n], stages[n - 1]
        for fn, ar in S.signature.functions.items():
            for args in product(lo.carrier, repeat=ar):
                if apply_operation(hi, fn, args) != apply_operation(lo, fn, args):
                    note("levels:restriction", f"{fn}{args}")
        for r, ar in S.signature.relations.items():
            for args in product(lo.carrier, repeat=ar):
                if holds_relation(hi, r, args) != holds_relation(lo, r, args):
                    note("levels:restriction", f"{r}{args}")
    for e in top.carrier:
        if isinstance(e, Func) and any(level(v) >= level(e) for v in e.values):
            note("levels:values-drop", repr(e))
    for alpha in (1, 2):
        hi, lo = stages[alpha], stages[alpha - 1]
        index = fam[alpha - 1]
        for j in index:
            theta = {x: vartheta(alpha, j, x, index) for x in hi.carrier}
            if any(y not in lo.index for y in theta.values()):
                note("levels:vartheta-endomorphism", f"image leaves stage {alpha - 1}")
            for fn, ar in S.signature.functions.items():
                for args in product(hi.carrier, repeat=ar):
                    v = apply_operation(hi, fn, args)
                    w = apply_operation(lo, fn, tuple(theta[a] for a in args))
                    if v is UNDEFINED:
                        continue
                    if w is UNDEFINED or theta[v] != w:
                        note("levels:vartheta-endomorphism", f"{fn}{args} at j={j}")
            for r, ar in S.signature.relations.items():
                for args in product(hi.carrier, repeat=ar):
                    if holds_relation(hi, r, args) and not holds_relation(lo, r, tuple(theta[a] for a in args)):
                        note("levels:vartheta-endomorphism", f"{r}{args} at j={j}")
    theorems = ["levels:max", "levels:restriction", "levels:values-drop", "levels:vartheta-endomorphism"]
    return [_rec("cumulative", t, cell, t not in problems, problems.get(t, "")) for t in theorems]


def suite_levels() -> list[GridRecord]:
    out = []
    for S in _level_structures():
        out.extend(_level_checks(S))
    return out


# 3. direct-power quotient isomorphism


def suite_iso() -> list[GridRecord]:
    sig = Signature({"F": 2}, {"R": 2}, ("c",))
    fam = _family(2, 2)
    out = []
    for S in enumerate_structures(sig, 2):
        for n in range(3):
            rep = canonical_iso_direct(S, fam, n)
            out.append(_rec("hereditary-quotient", "iso:direct", f"{describe(S)} n={n}", rep.ok,
                            "; ".join(rep.failures[:3])))
    return out


# 4. Łoś


def los_corpus() -> list[Formula]:
    """Closed sentences of quantifier rank ≤ 2 over one binary function f.

    Terms: x, y and f applied to them (depth ≤ 1), giving 15 equations.
    Sentences: each quantifier prefix on x, y over every literal; the rank-1
    sentences on the single x-only equation; and each prefix over the
    conjunction and disjunction of consecutive equations.
    """
    x, y = Var("x"), Var("y")
    terms = [x, y] + [App("f", (a, b)) for a in (x, y) for b in (x, y)]
    atoms = [Eq(terms[i], terms[k]) for i in range(len(terms)) for k in range(i + 1, len(terms))]
    prefixes = [(qx, qy) for qx in (ForAll, Exists) for qy in (ForAll, Exists)]
    out: list[Formula] = []
    for qx, qy in prefixes:
        for a in atoms:
            for lit in (a, Not(a)):
                out.append(qx("x", qy("y", lit)))
    only_x = [a for a in atoms if "y" not in format_formula(a)]
    for q in (ForAll, Exists):
        for a in only_x:
            out += [q("x", a), q("x", Not(a))]
    for qx, qy in prefixes:
        for a, b in zip(atoms, atoms[1:]):
            out += [qx("x", qy("y", And(a, b))), qx("x", qy("y", Or(a, b)))]
    return out


def suite_los() -> list[GridRecord]:
    sig = Signature({"f": 2})
    sentences = los_corpus()
    open_bodies = list(dict.fromkeys(s.body for s in sentences if isinstance(s.body, (ForAll, Exists))))
    out = []
    for S in enumerate_structures(sig, 2, min_size=2):
        for k in (1, 2, 3):
            I = list(range(k))
            for U in ultrafilters_over(I):
                Q = ultrapower(S, I, U)
                rep = los_check(S, I, U, sentences, quotient=Q)
                ok = rep.all_agree
                for body in open_bodies:
                    ok = ok and los_check_formula(S, I, U, body, quotient=Q).all_agree
                bad = [e.formula for e in rep.entries if not e.agree]
                out.append(_rec("ultrapower", "los:sentences+formulas", f"{describe(S)} |I|={k} U@{U.principal}",
                                ok, "; ".join(bad[:3])))
        for k in (2, 3):
            fam = _family(k)
            for U in ultrafilters_over(fam[0].elements):
                q = quotient_by(CumulativePower(S, fam, 1), Ultra((U,)))
                iso = find_isomorphism(q.structure, S) is not None
                canon = canonical_iso_ultra(S, fam, [U], 1).ok
                out.append(_rec("ultra-quotient", "los:F1-iso-A", f"{describe(S)} |I0|={k} U@{U.principal}",
                                iso and canon, ""))
    return out


# 5. preservation boundary


def _preservation_rows(bound: int = 2) -> list[dict]:
    corpus = shipped_corpus()
    rows = []
    for f, text in zip(corpus.formulas, corpus.texts):
        p = to_pcnf(f)
        verdict = classify_formula(p, source=f)
        sig = symbols_of(f)
        plus = bool(sig.constants)
        dp_fail, cum_fail, held = [], [], 0
        for S in enumerate_structures(sig, bound):
            if not satisfies(S, f):
                continue
            held += 1
            for k in (2, 3):
                if not satisfies(direct_power(S, range(k)), f):
                    dp_fail.append(f"{describe(S)} |I|={k}")
            cp = CumulativePower(S, _family(2), 1, plus=plus)
            if not satisfies(cp.as_structure(), f):
                cum_fail.append(describe(S))
        rows.append({"text": text, "formula": f, "verdict": verdict, "horn": is_horn(p),
                     "constant_free": not sig.constants, "held": held, "direct_failures": dp_fail,
                     "cumulative_failures": cum_fail, "plus": plus})
    return rows


def suite_preservation() -> list[GridRecord]:
    out = []
    for row in _preservation_rows():
        if not row["horn"]:
            continue
        cell = row["text"]
        out.append(_rec("direct-power", "preservation:horn-direct", cell, not row["direct_failures"],
                         "; ".join(row["direct_failures"][:3])))
        covered = row["constant_free"] and row["verdict"].noncollapsible
        cum_ok = not row["cumulative_failures"]
        if covered:
            out.append(_rec("cumulative", "preservation:horn-noncollapsible-cumulative", cell, cum_ok,
                            "; ".join(row["cumulative_failures"][:3])))
        else:
            mode = "plus" if row["plus"] else "plain"
            out.append(GridRecord("cumulative", "preservation:horn-other-cumulative",
                                  f"{cell} [{row['verdict'].verdict}, {mode}]", "report",
                                  "preserved" if cum_ok else "fails at " + "; ".join(row["cumulative_failures"][:2])))
    # the collapsible pattern and the flagship sentence
    fsig = Signature({"f": 1})
    const_f = FiniteStructure(fsig, [0, 1], {"f": {(0,): 0, (1,): 0}}, name="constf")
    phi = parse_formula("exists x. forall y. x = f(y)", fsig)
    cp = CumulativePower(const_f, _family(2), 1)
    out.append(_rec("cumulative", "preservation:collapsible-fails", "exists x. forall y. x = f(y)",
                    satisfies(const_f, phi) and not satisfies(cp.as_structure(), phi)))
    Z8 = cyclic_group(8)
    psi = parse_formula("forall x. forall y. exists z. add(x,y) = z", Z8.signature)
    out.append(_rec("cumulative", "preservation:flagship-holds", "Z8 stage 1 |I0|=2",
                    satisfies(CumulativePower(Z8, _family(2), 1).as_structure(), psi)))
    return out


# 6. Weinstein soundness


def suite_weinstein() -> list[GridRecord]:
    sig = Signature({}, {"P": 1})
    a, b = parse_formula("x0 = x1", sig), parse_formula("P(x0)", sig)
    layers = ladder_corpus([a, b], cap=2)
    R = WeinsteinR([a, b], cap=2, bound=3, signature=sig, variables=["x0", "x1"])
    oracle: ProductOracle = R.oracle
    out = []
    for n, fs in layers.items():
        true_count, bad = 0, []
        for phi, psi, gamma in product(fs, repeat=3):
            if R(phi, psi, gamma, n):
                true_count += 1
                check = oracle.check(phi, psi, gamma)
                if not check.holds:
                    bad.append(" / ".join(format_formula(f) for f in (phi, psi, gamma)))
        out.append(_rec("ladder", "weinstein:R-sound", f"layer {n}: {len(fs)} formulas, {true_count} R-true triples",
                        not bad, "; ".join(bad[:3])))
    return out


# 7. Rudin–Keisler embeddings


def _all_embeddings(A: FiniteStructure, B: FiniteStructure) -> list[dict]:
    out = []
    for vals in product(B.carrier, repeat=len(A.carrier)):
        if len(set(vals)) == len(vals):
            e = dict(zip(A.carrier, vals))
            if is_embedding(A, B, e):
                out.append(e)
    return out


def suite_rk() -> list[GridRecord]:
    sig = Signature({"f": 1})
    bases = structures_up_to_iso(sig, 2) + structures_up_to_iso(sig, 3)
    cache: dict[tuple, object] = {}

    def up(si: int, k: int, U) -> object:
        key = (si, k, U.principal)
        if key not in cache:
            cache[key] = ultrapower(bases[si], list(range(k)), U)
        return cache[key]

    out = []
    for ia, A in enumerate(bases):
        for ib, B in enumerate(bases):
            if len(A.carrier) > len(B.carrier):
                continue
            embeddings = _all_embeddings(A, B)
            checked = mismatches = 0
            witness = ""
            for u in embeddings:
                for ki, kj in product((1, 2, 3), repeat=2):
                    I, J = list(range(ki)), list(range(kj))
                    for UI in ultrafilters_over(I):
                        for UJ in ultrafilters_over(J):
                            QA, QB = up(ia, ki, UI), up(ib, kj, UJ)
                            for h in all_maps(J, I):
                                rep = rk_embedding(A, B, u, h, UI, UJ, QA, QB, strict=False)
                                checked += 1
                                if not rep.biconditional:
                                    mismatches += 1
                                    witness = witness or f"u={u} h={h} I={ki} J={kj}"
            out.append(_rec("ultrapower", "rk:embedding-iff-witness",
                            f"{describe(A)} -> {describe(B)}: {len(embeddings)} embeddings, {checked} cases",
                            mismatches == 0, witness))
    return out


# 8 and 9. representatives, τ, embeddings into the direct power, class sizes


def _partial_structures() -> list[FiniteStructure]:
    return (list(enumerate_structures(Signature({"f": 1}), 3, total=False))
            + list(enumerate_structures(Signature({"g": 2}), 2, total=False))
            + list(enumerate_structures(Signature({"f": 1}, {"P": 1}), 2, total=False)))


def _gf2() -> FiniteStructure:
    sig = Signature({"add": 2, "mul": 2})
    return FiniteStructure(sig, [0, 1], {"add": {(x, y): (x + y) % 2 for x in (0, 1) for y in (0, 1)},
                                         "mul": {(x, y): x * y for x in (0, 1) for y in (0, 1)}}, name="GF2")


def suite_representatives() -> list[GridRecord]:
    out = []
    for S in _partial_structures():
        ok_rep = ok_emb = ok_tau = True
        witness = ""
        profile = tau_profile(S)
        if profile.tau_of != tau_enumerated(S):
            ok_tau = False
        for k in (1, 2, 3):
            I = list(range(k))
            for U in ultrafilters_over(I):
                Q = ultrapower(S, I, U)
                r = representative_check(S, I, U, Q, strict=False)
                e = embed_into_direct_power(S, I, U, Q, strict=False)
                if not r.biconditional:
                    ok_rep, witness = False, witness or f"|I|={k} U@{U.principal}"
                if not e.biconditional:
                    ok_emb, witness = False, witness or f"|I|={k} U@{U.principal}"
                if tau_profile(Q).tau_of != tau_enumerated(Q.structure):
                    ok_tau = False
        cell = describe(S)
        out.append(_rec("ultrapower", "representatives:iff-complete", cell, ok_rep, witness))
        out.append(_rec("ultrapower", "embedding:choice-iff-complete", cell, ok_emb, witness))
        out.append(_rec("ultrapower", "tau:two-ways", cell, ok_tau, ""))
    F = _gf2()
    tp = tau_profile(F)
    out.append(_rec("field", "tau:gf2", "GF(2)", tp.tau == 9 and max(tau_enumerated(F).values()) == 9, str(tp.tau_of)))
    return out


def suite_class_size() -> list[GridRecord]:
    out = []
    for S in _partial_structures():
        if len(S.carrier) < 2:
            continue
        uniform = True
        proof_map = True
        for k in (1, 2, 3):
            I = list(range(k))
            for U in ultrafilters_over(I):
                rep = class_size_uniformity(S, I, U)
                uniform = uniform and rep.uniform
                proof_map = proof_map and rep.proof_map_injective
        cell = describe(S)
        out.append(_rec("ultrapower", "class-size:uniform", cell, uniform, ""))
        out.append(GridRecord("ultrapower", "class-size:proof-map-injective", cell, "report",
                              "injective" if proof_map else "not injective"))
    return out


# 10. ultrafilter transport


def suite_transport() -> list[GridRecord]:
    out = []
    for n in range(1, 5):
        ground = list(range(n))
        for U in ultrafilters_over(ground):
            for parts in set_partitions(ground):
                t = induced_ultrafilter_on_quotient(U, parts)
                ok = t.ultrafilter.is_ultrafilter and t.witness_ok
                fb = induced_filterbase_on_carrier(t.ultrafilter, ground, parts)
                cell = f"n={n} U@{U.principal} parts={parts}"
                out.append(_rec("filters", "transport:quotient-ultrafilter", cell, ok, ""))
                out.append(_rec("filters", "transport:filterbase-roundtrip", cell, fb.recovered, ""))
    return out


# 11. classifier diagnostic


def classifier_matrix() -> list[dict]:
    """Literal, lax and empirical verdicts without any assertion on agreement."""
    rows = []
    for row in _preservation_rows():
        v = row["verdict"]
        empirical = not row["cumulative_failures"]
        rows.append({
            "formula": row["text"],
            "literal": str(v.verdict),
            "literal_iii_vacuous": v.literal_iii,
            "lax": str(v.lax_verdict),
            "horn": row["horn"],
            "constant_free": row["constant_free"],
            "mode": "plus" if row["plus"] else "plain",
            "cumulative_preserved": empirical,
            "direct_preserved": not row["direct_failures"],
            "agree": v.noncollapsible == empirical,
            "trace": v.traces,
            "counterexample": (row["cumulative_failures"] or [""])[0],
        })
    return rows


def suite_classifier() -> list[GridRecord]:
    out = []
    for r in classifier_matrix():
        detail = (f"literal={r['literal']} lax={r['lax']} cumulative={'yes' if r['cumulative_preserved'] else 'no'}"
                  f" direct={'yes' if r['direct_preserved'] else 'no'} mode={r['mode']}")
        if not r["agree"]:
            eqs = "; ".join(f"{atom}: {verdict}" for t in r["trace"] for atom, verdict, _ in t["equalities"])
            detail += f" DISAGREE counterexample={r['counterexample'] or '-'} trace=[{eqs or 'no equalities'}]"
        out.append(GridRecord("classifier", "classifier:agreement", r["formula"], "report", detail))
    return out


SUITES: dict[str, Callable[[], list[GridRecord]]] = {
    "arithmetic": suite_arithmetic,
    "levels": suite_levels,
    "iso": suite_iso,
    "los": suite_los,
    "preservation": suite_preservation,
    "weinstein": suite_weinstein,
    "rk": suite_rk,
    "representatives": suite_representatives,
    "class-size": suite_class_size,
    "transport": suite_transport,
    "classifier": suite_classifier,
}


def run_suite(name: str) -> tuple[str, list[GridRecord], float]:
    """Run one suite by name; returns (name, records, seconds)."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    start = time.perf_counter()
    records = SUITES[name]()
    return name, records, time.perf_counter() - start
