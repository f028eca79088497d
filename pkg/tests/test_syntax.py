from itertools import product

import pytest
from hypothesis import given, settings

from conftest import SIG, formulas
from powlab.finmodel import FiniteStructure, enumerate_structures, satisfies
from powlab.syntax import (
    And, App, Bottom, Const, Eq, Exists, ForAll, Implies, MatrixSizeError, Not, Or, ParseError, PrenexForm, Rel,
    Signature, SymbolError, Top, Var, atom_occurrences, conj, disj, format_formula, free_variables,
    parse_formula, symbols_of, to_pcnf, to_pdnf,
)

S1 = Signature({"add": 2, "f": 1}, {"P": 1, "Q": 1}, ("c0",))
SMALL = Signature({}, {"P": 1, "Q": 1})

x, y = Var("x"), Var("y")


def p(text, sig=S1):
    return parse_formula(text, sig)


def equivalent_up_to(f, g, sig, bound):
    """Independent oracle: same truth value in every structure of size <= bound under every assignment."""
    names = sorted(free_variables(f) | free_variables(g))
    for S in enumerate_structures(sig, bound):
        for vals in product(S.carrier, repeat=len(names)):
            a = dict(zip(names, vals))
            if satisfies(S, f, a) != satisfies(S, g, a):
                return False
    return True


def test_parse_examples():
    assert p("x = y") == Eq(x, y)
    assert p("forall x. exists z. add(x,x) = z") == ForAll("x", Exists("z", Eq(App("add", (x, x)), Var("z"))))
    assert p("!(P(x) & x = c0)") == Not(And(Rel("P", (x,)), Eq(x, Const("c0"))))


def test_precedence_and_scope():
    assert p("P(x) | P(y) & Q(x)") == Or(Rel("P", (x,)), And(Rel("P", (y,)), Rel("Q", (x,))))
    assert p("P(x) -> P(y) | Q(x)") == Implies(Rel("P", (x,)), Or(Rel("P", (y,)), Rel("Q", (x,))))
    assert p("forall x. P(x) & Q(x)") == ForAll("x", And(Rel("P", (x,)), Rel("Q", (x,))))


def test_parse_errors():
    with pytest.raises(ParseError) as e:
        p("x = ")
    assert e.value.position == 4
    with pytest.raises(SymbolError):
        p("h(x) = x")
    with pytest.raises(SymbolError):
        p("add(x) = x")
    with pytest.raises(SymbolError):
        p("P(x, y)")


def test_signature_rejects_shared_names_and_bad_arity():
    with pytest.raises(ValueError):
        Signature({"f": 1}, {"f": 1})
    with pytest.raises(ValueError):
        Signature({"f": 0})


def test_free_variables():
    assert free_variables(p("x = y")) == {"x", "y"}
    assert free_variables(p("forall x. x = y")) == {"y"}
    assert free_variables(p("forall x. exists y. add(x,y) = c0")) == set()


def test_pcnf_examples():
    q = to_pcnf(p("!(x = y)"))
    assert q.prefix == () and q.matrix == PrenexForm.of([], [[Not(Eq(x, y))]]).matrix
    q = to_pcnf(p("forall x.(P(x) -> exists y. x = y)"))
    x0, x1 = Var("x0"), Var("x1")
    assert q == PrenexForm.of([("forall", "x0"), ("exists", "x1")], [[Not(Rel("P", (x0,))), Eq(x0, x1)]])
    f = p("forall x.(P(x) -> exists y. x = y)")
    assert equivalent_up_to(f, q.to_formula(), symbols_of(f), 3)
    f = p("(exists x. P(x)) & (forall y. Q(y))")
    q = to_pcnf(f)
    assert q == PrenexForm.of([("exists", "x0"), ("forall", "x1")], [[Rel("P", (x0,))], [Rel("Q", (x1,))]])
    assert equivalent_up_to(f, q.to_formula(), SMALL, 3)


def test_pdnf_examples():
    assert to_pdnf(p("x = y")) == PrenexForm.of([], [[Eq(x, y)]], "DNF")
    f = p("!(P(x) | x = y)")
    q = to_pdnf(f)
    assert q == PrenexForm.of([], [[Not(Rel("P", (x,))), Not(Eq(x, y))]], "DNF")
    assert equivalent_up_to(f, q.to_formula(), Signature({}, {"P": 1}), 3)
    f = p("forall x.(P(x) & Q(x))")
    q = to_pdnf(f)
    x0 = Var("x0")
    assert q == PrenexForm.of([("forall", "x0")], [[Rel("P", (x0,)), Rel("Q", (x0,))]], "DNF")
    assert equivalent_up_to(f, q.to_formula(), SMALL, 3)


def test_atom_occurrences():
    occ = atom_occurrences(PrenexForm.of([], [[Not(Eq(x, y))]]))
    assert len(occ) == 1 and not occ[0].positive
    occ = atom_occurrences(PrenexForm.of([], [[Eq(x, y), Not(Rel("P", (x,)))]]))
    assert [(o.atom, o.positive) for o in occ] == [(Eq(x, y), True), (Rel("P", (x,)), False)]
    occ = atom_occurrences(PrenexForm.of([], [[Rel("P", (x,))], [Rel("P", (x,))]]))
    assert len(occ) == 2 and occ[0] != occ[1] and occ[0].atom == occ[1].atom


def test_empty_junctions_follow_standard_convention():
    assert conj([]) is Top and disj([]) is Bottom
    S = FiniteStructure(SMALL, [0], {}, {"P": frozenset(), "Q": frozenset()})
    assert satisfies(S, conj([])) and not satisfies(S, disj([]))


def test_normal_form_output_is_deterministic():
    f = p("forall x.(P(x) -> exists y. (x = y & Q(y)))")
    assert str(to_pcnf(f)) == str(to_pcnf(f))
    assert [v for _, v in to_pcnf(f).prefix] == ["x0", "x1"]


def test_matrix_cap():
    big = " & ".join("(P(x) | Q(x))" for _ in range(12))
    with pytest.raises(MatrixSizeError):
        to_pdnf(p(big, SMALL), cap=100)


@settings(max_examples=150, deadline=None)
@given(formulas())
def test_print_parse_roundtrip(f):
    assert parse_formula(format_formula(f), SIG) == f


def _no_quantifier_or_implication(g):
    if isinstance(g, (ForAll, Exists, Implies)):
        return False
    if isinstance(g, Not):
        return _no_quantifier_or_implication(g.body)
    if isinstance(g, (And, Or)):
        return _no_quantifier_or_implication(g.left) and _no_quantifier_or_implication(g.right)
    return True


SIG_SMALL_MODELS = [S for S in enumerate_structures(Signature({"f": 1}, {"P": 1}, ("c",)), 2)]


@settings(max_examples=60, deadline=None)
@given(formulas(max_leaves=4).filter(lambda f: "g(" not in format_formula(f) and "le(" not in format_formula(f)))
def test_normal_forms_preserve_truth(f):
    c, d = to_pcnf(f), to_pdnf(f)
    assert _no_quantifier_or_implication(c.matrix_formula())
    names = sorted(free_variables(f))
    for S in SIG_SMALL_MODELS:
        for vals in product(S.carrier, repeat=len(names)):
            a = dict(zip(names, vals))
            assert satisfies(S, f, a) == satisfies(S, c.to_formula(), a) == satisfies(S, d.to_formula(), a)
