from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from powlab.cumulative import CumulativePower, IndexFamily
from powlab.filters import principal_ultrafilter, ultrafilters_over
from powlab.finmodel import (
    UNDEFINED, FiniteStructure, HoldsUpTo, Refuted, SizeGuardError, UnboundVariableError, bounded_entailment,
    check_preserved, direct_power, enumerate_structures, eval_term, find_embedding, find_isomorphism,
    is_embedding, satisfies, ultrapower,
)
from powlab.syntax import Signature, parse_formula, parse_term

GSIG = Signature({"add": 2, "mul": 2}, {}, ("zero",))
Z2 = FiniteStructure(GSIG, [0, 1], {"add": {(a, b): (a + b) % 2 for a in (0, 1) for b in (0, 1)},
                                     "mul": {(a, b): a * b for a in (0, 1) for b in (0, 1)}}, {}, {"zero": 0})
INV = Signature({"add": 2, "mul": 2, "inv": 1})
GF3 = FiniteStructure(INV, [0, 1, 2], {"add": {(a, b): (a + b) % 3 for a in range(3) for b in range(3)},
                                        "mul": {(a, b): a * b % 3 for a in range(3) for b in range(3)},
                                        "inv": {(1,): 1, (2,): 2}})
HORN = "forall x. exists z. add(x,z) = zero"


def chain(n):
    return FiniteStructure(Signature({}, {"le": 2}), range(n), {},
                           {"le": frozenset((a, b) for a in range(n) for b in range(n) if a <= b)})


def test_eval_term():
    assert eval_term(Z2, parse_term("add(x,x)", GSIG), {"x": 1}) == 0
    assert eval_term(GF3, parse_term("inv(x)", INV), {"x": 0}) is UNDEFINED
    assert eval_term(Z2, parse_term("add(x, mul(x,x))", GSIG), {"x": 1}) == 0
    assert eval_term(GF3, parse_term("add(inv(x), x)", INV), {"x": 0}) is UNDEFINED
    with pytest.raises(UnboundVariableError):
        eval_term(Z2, parse_term("add(x,y)", GSIG), {"x": 1})


def test_satisfies_examples():
    assert satisfies(Z2, parse_formula(HORN, GSIG))
    assert not satisfies(Z2, parse_formula("exists x. forall y. x = y", GSIG))
    one = FiniteStructure(Signature({}), [0])
    assert satisfies(one, parse_formula("exists x. forall y. x = y", Signature({})))


def test_undefined_atoms_are_false():
    f = parse_formula("inv(x) = inv(x)", INV)
    assert not satisfies(GF3, f, {"x": 0})
    assert satisfies(GF3, parse_formula("!(inv(x) = inv(x))", INV), {"x": 0})
    assert satisfies(GF3, f, {"x": 2})


def test_structure_validation():
    with pytest.raises(ValueError):
        FiniteStructure(Signature({"f": 1}), [0, 1], {"f": {(0,): 5}})
    with pytest.raises(ValueError):
        FiniteStructure(Signature({}, {}, ("c",)), [0], {}, {}, {"c": 3})


def test_direct_power_examples():
    P = direct_power(Z2, ["i", "j"])
    assert len(P.carrier) == 4
    assert P.apply("add", [(0, 1), (1, 1)]) == (1, 0)
    assert satisfies(P, parse_formula(HORN, GSIG))
    assert P.constants["zero"] == (0, 0)
    Q = direct_power(GF3, [0, 1])
    assert Q.apply("inv", [(1, 0)]) is UNDEFINED and Q.apply("inv", [(1, 2)]) == (1, 2)
    with pytest.raises(SizeGuardError):
        direct_power(Z2, range(10), guard=100)


def test_projections_are_surjective_homomorphisms():
    for S in enumerate_structures(Signature({"g": 2}, {"R": 1}), 2, min_size=2):
        P = direct_power(S, [0, 1])
        for k in (0, 1):
            pi = {f: f[k] for f in P.carrier}
            assert set(pi.values()) == set(S.carrier)
            for a, b in product(P.carrier, repeat=2):
                assert pi[P.apply("g", [a, b])] == S.apply("g", [pi[a], pi[b]])
            for a in P.carrier:
                if P.holds("R", [a]):
                    assert S.holds("R", [pi[a]])


def test_ultrapower_principal():
    U = principal_ultrafilter(["i", "j"], "i")
    Q = ultrapower(Z2, ["i", "j"], U)
    assert len(Q.classes) == 2
    for f in Q.carrier:
        assert Q.class_of[f][0] == f[0]
    single = ultrapower(Z2, ["i"], principal_ultrafilter(["i"], "i"))
    assert find_isomorphism(single.structure, Z2) is not None


def test_principal_ultrapower_iso_exhaustive():
    sigs = [Signature({"f": 1}), Signature({}, {"P": 1})]
    for sig in sigs:
        for S in enumerate_structures(sig, 3, total=False):
            for k in (1, 2, 3):
                I = list(range(k))
                for U in ultrafilters_over(I):
                    Q = ultrapower(S, I, U)
                    m = {rep: rep[U.principal] for rep in Q.structure.carrier}
                    assert sorted(m.values()) == sorted(S.carrier)
                    assert is_embedding(Q.structure, S, m)


def test_los_instance_for_sentence():
    phi = parse_formula(HORN, GSIG)
    for k in (1, 2, 3):
        for U in ultrafilters_over(range(k)):
            Q = ultrapower(Z2, range(k), U)
            los_set = {j for j in range(k) if satisfies(Z2, phi)}
            assert satisfies(Q.structure, phi) == (frozenset(los_set) in U.members)


def test_enumerate_structures_counts():
    assert len(list(enumerate_structures(Signature({}, {"P": 1}), 1))) == 2
    assert len(list(enumerate_structures(Signature({}, {}, ("c",)), 2, min_size=2))) == 2
    assert len(list(enumerate_structures(Signature({"f": 1}), 2, min_size=2))) == 4
    assert len(list(enumerate_structures(Signature({"f": 1}), 2, total=False, min_size=2))) == 9
    with pytest.raises(ValueError):
        list(enumerate_structures(Signature({}), 0))


def test_embedding_search():
    assert find_embedding(Z2, Z2) == {0: 0, 1: 1}
    one = FiniteStructure(GSIG, [0], {"add": {(0, 0): 0}, "mul": {(0, 0): 0}}, {}, {"zero": 0})
    assert find_embedding(Z2, one) is None
    e = find_embedding(chain(2), chain(3))
    assert e is not None and e[0] < e[1]
    assert find_isomorphism(chain(2), chain(3)) is None
    assert find_isomorphism(chain(3), chain(3)) == {0: 0, 1: 1, 2: 2}


def test_bounded_entailment_examples():
    eq = Signature({}, {"P": 1}, ("c0",))
    assert bounded_entailment(parse_formula("x = y", eq), parse_formula("y = x", eq)) == HoldsUpTo(3)
    r = bounded_entailment(parse_formula("x = y", eq), parse_formula("P(x)", eq))
    assert isinstance(r, Refuted) and len(r.structure) == 1 and not r.structure.relations["P"]
    assert isinstance(bounded_entailment(parse_formula("x = c0", eq), parse_formula("x = c0 | P(x)", eq)),
                      HoldsUpTo)


TAUTOLOGY_SHAPES = ["A -> A", "A | !A", "A & B -> B", "A -> (B -> A)", "!(A & !A)", "(A -> B) | (B -> A)"]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(TAUTOLOGY_SHAPES), st.sampled_from(["P(x)", "x = y", "f(x) = y", "P(f(y))"]),
       st.sampled_from(["P(y)", "x = f(x)", "!(x = y)"]))
def test_bounded_entailment_never_refutes_tautologies(shape, a, b):
    sig = Signature({"f": 1}, {"P": 1})
    text = shape.replace("A", f"({a})").replace("B", f"({b})")
    assert isinstance(bounded_entailment(parse_formula("x = x", sig), parse_formula(text, sig), 2), HoldsUpTo)


def test_check_preserved_examples():
    phi = parse_formula(HORN, GSIG)
    r = check_preserved(Z2, phi, direct_power(Z2, [0, 1]))
    assert (r.holds_in_source, r.holds_in_target) == (True, True)
    fsig = Signature({"f": 1})
    constf = FiniteStructure(fsig, [0, 1], {"f": {(0,): 0, (1,): 0}})
    cp = CumulativePower(constf, IndexFamily([("I0", [0, 1])]), 1)
    r = check_preserved(constf, parse_formula("exists x. forall y. x = f(y)", fsig), cp.as_structure())
    assert (r.holds_in_source, r.holds_in_target) == (True, False)
    asig = Signature({"add": 2})
    Z8 = FiniteStructure(asig, range(8), {"add": {(a, b): (a + b) % 8 for a in range(8) for b in range(8)}})
    cp = CumulativePower(Z8, IndexFamily([("I0", [0, 1])]), 1)
    r = check_preserved(Z8, parse_formula("forall x. forall y. exists z. add(x,y) = z", asig), cp.as_structure())
    assert (r.holds_in_source, r.holds_in_target) == (True, True)
    with pytest.raises(ValueError):
        check_preserved(Z2, parse_formula("x = x", GSIG), Z2)
