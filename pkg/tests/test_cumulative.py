from itertools import product

import pytest

from powlab.cumulative import (
    Base, CumulativePower, Func, IndexFamily, MalformedElementError, apply_operation, constant_func,
    constant_predicate, hereditary_constant, holds_relation, level, lift_embedding, nested, satisfies_cumulative,
    vartheta, vartheta_inverse,
)
from powlab.finmodel import UNDEFINED, FiniteStructure, SizeGuardError, direct_power, enumerate_structures, satisfies
from powlab.syntax import Signature, SymbolError, parse_formula

ADD = Signature({"add": 2}, {}, ("zero",))
FAM = IndexFamily([("I0", ["a", "b"]), ("I1", ["p", "q"])])
I0, I1 = FAM[0], FAM[1]


def zn(n, with_zero=True):
    table = {(x, y): (x + y) % n for x in range(n) for y in range(n)}
    sig = ADD if with_zero else Signature({"add": 2})
    return FiniteStructure(sig, range(n), {"add": table}, {}, {"zero": 0} if with_zero else {})


Z8, Z2 = zn(8, False), zn(2)
LE = FiniteStructure(Signature({}, {"le": 2}), [0, 1], {}, {"le": frozenset({(0, 0), (0, 1), (1, 1)})})


def c(index, v):
    return constant_func(index, Base(v))


def test_index_family_requires_two_elements():
    with pytest.raises(ValueError):
        IndexFamily([("I0", ["a"])])
    with pytest.raises(ValueError):
        IndexFamily([("I0", [0, 1]), ("I0", [2, 3])])


def test_levels():
    assert level(Base(0)) == 0
    assert level(c(I0, 3)) == 1
    assert level(Func(I1, [c(I0, 1), Base(0)])) == 2
    assert level(Func(I1, [Base(0), Base(1)])) == 2
    with pytest.raises(MalformedElementError):
        Func(I0, [c(I0, 1), Base(0)])


def test_vartheta_cases():
    assert vartheta(1, "a", c(I0, 3), I0) == Base(3)
    assert vartheta(1, "a", Base(2), I0) == Base(2)
    f = Func(I1, [c(I0, 1), Base(0)])
    assert vartheta(2, "p", f, I1) == c(I0, 1)
    assert vartheta(2, "p", c(I0, 1), I1) == c(I0, 1)
    with pytest.raises(ValueError):
        vartheta(0, "a", Base(1), I0)


def test_build_sizes():
    assert len(CumulativePower(Z2, FAM, 1)) == 6
    assert len(CumulativePower(Z2, FAM, 2)) == 42
    cp0 = CumulativePower(Z2, FAM, 0, plus=True)
    assert [e.value for e in cp0.carrier] == [0, 1] and satisfies(cp0.as_structure(), parse_formula(
        "forall x. add(x,zero) = x", ADD))
    with pytest.raises(SizeGuardError):
        CumulativePower(Z2, FAM, 2, guard=30)
    with pytest.raises(ValueError):
        CumulativePower(Z2, FAM, 3)


def test_apply_operation_examples():
    cp = CumulativePower(Z8, FAM, 1)
    assert apply_operation(cp, "add", (Base(2), Base(5))) == Base(7)
    assert apply_operation(cp, "add", (c(I0, 3), Base(7))) == c(I0, 2)
    f = Func(I0, [Base(1), Base(6)])
    r = apply_operation(cp, "add", (f, Base(3)))
    assert [v.value for v in r.values] == [4, 1]


def test_apply_operation_coordinates_match_nested_oracle():
    """Stage-2 sums against an independent evaluation on nested tuples."""
    cp = CumulativePower(zn(3, False), FAM, 2)

    def unfold(e, depth):
        if depth == 0:
            return e.value
        if isinstance(e, Base) or e.level < depth:
            return tuple(unfold(e, depth - 1) for _ in range(2))
        return tuple(unfold(v, depth - 1) for v in e.values)

    def add(u, v):
        if isinstance(u, int):
            return (u + v) % 3
        return tuple(add(a, b) for a, b in zip(u, v))

    for a, b in product(cp.top_level()[:12], cp.carrier[:9]):
        r = apply_operation(cp, "add", (a, b))
        assert unfold(r, 2) == add(unfold(a, 2), unfold(b, 2))


def test_undefined_propagates():
    S = FiniteStructure(Signature({"f": 1}), [0, 1], {"f": {(0,): 1}})
    cp = CumulativePower(S, FAM, 1)
    assert apply_operation(cp, "f", (Func(I0, [Base(0), Base(1)]),)) is UNDEFINED
    assert apply_operation(cp, "f", (c(I0, 0),)) == c(I0, 1)


def test_relation_examples():
    cp = CumulativePower(LE, FAM, 1)
    assert holds_relation(cp, "le", (Base(0), Base(1)))
    assert holds_relation(cp, "le", (c(I0, 0), Base(1)))
    assert not holds_relation(cp, "le", (Func(I0, [Base(0), Base(1)]), Base(0)))


def test_constant_predicate_and_hereditary_constant():
    cp = CumulativePower(Z2, FAM, 2)
    assert constant_predicate(cp, "zero", Base(0))
    assert constant_predicate(cp, "zero", c(I0, 0))
    assert not constant_predicate(cp, "zero", Func(I0, [Base(0), Base(1)]))
    assert hereditary_constant(cp, "zero", 0) == Base(0)
    assert hereditary_constant(cp, "zero", 1) == c(I0, 0)
    assert hereditary_constant(cp, "zero", 2) == constant_func(I1, c(I0, 0))
    with pytest.raises(SymbolError):
        constant_predicate(cp, "one", Base(0))
    with pytest.raises(ValueError):
        hereditary_constant(CumulativePower(Z2, FAM, 1), "zero", 2)


def test_vartheta_inverse():
    f = Func(I0, [Base(0), Base(1)])
    assert vartheta_inverse(f, I0) is f
    assert vartheta_inverse(Base(1), I0) == c(I0, 1)
    cp = CumulativePower(Z2, FAM, 1)
    assert {vartheta_inverse(e, I0) for e in cp.carrier} == set(cp.top_level())
    with pytest.raises(ValueError):
        vartheta_inverse(Func(I1, [f, f]), I0)


def test_satisfies_cumulative_examples():
    sig = Signature({"add": 2})
    cp = CumulativePower(Z8, FAM, 1)
    eq = parse_formula("add(x,y) = z", sig)
    assert satisfies_cumulative(cp, eq, {"x": Base(2), "y": Base(5), "z": Base(7)})
    assert not satisfies_cumulative(cp, eq, {"x": c(I0, 2), "y": Base(5), "z": Base(7)})
    assert satisfies_cumulative(cp, eq, {"x": c(I0, 3), "y": Base(7), "z": c(I0, 2)})
    assert not satisfies_cumulative(cp, eq, {"x": c(I0, 3), "y": Base(7), "z": Base(2)})
    with pytest.raises(SymbolError):
        satisfies_cumulative(CumulativePower(Z2, FAM, 1), parse_formula("add(zero,zero) = zero", ADD))
    for S in enumerate_structures(Signature({"g": 2}), 2):
        cp0 = CumulativePower(S, FAM, 0)
        phi = parse_formula("forall x. exists y. g(x,y) = x", S.signature)
        assert satisfies_cumulative(cp0, phi) == satisfies(S, phi)


def test_closure_for_total_bases():
    for S in enumerate_structures(Signature({"g": 2}), 2, min_size=2):
        cp = CumulativePower(S, FAM, 2)
        assert all(apply_operation(cp, "g", args) is not UNDEFINED for args in product(cp.carrier, repeat=2))


def test_literal_transfer_through_vartheta_inverse():
    """Relational literals agree between F_1+ and A^{I_0} under ϑ⁻¹.  Negated equalities
    only transfer from the direct power upwards: distinct levels are never identical."""
    sig = Signature({"g": 2}, {"R": 1}, ("k",))
    relational = [parse_formula(t, sig) for t in ("R(g(x,y))", "!R(x)", "R(g(k,x))", "!R(g(y,k))")]
    negated = [parse_formula(t, sig) for t in ("!(g(x,y) = y)", "!(x = k)", "!(x = y)")]
    fam = IndexFamily([("I0", [0, 1])])
    J = fam[0]
    for S in enumerate_structures(sig, 2, min_size=2):
        cp = CumulativePower(S, fam, 1, plus=True)
        P = direct_power(S, [0, 1])
        for u, v in product(cp.carrier, repeat=2):
            a = {"x": u, "y": v}
            lifted = {"x": tuple(w.value for w in vartheta_inverse(u, J).values),
                      "y": tuple(w.value for w in vartheta_inverse(v, J).values)}
            for phi in relational:
                assert satisfies(cp.as_structure(), phi, a) == satisfies(P, phi, lifted)
            for phi in negated:
                if satisfies(P, phi, lifted):
                    assert satisfies(cp.as_structure(), phi, a)
    # the converse fails: a base element and its constant function are distinct but share a ϑ⁻¹ image
    S = next(enumerate_structures(sig, 2, min_size=2))
    cp = CumulativePower(S, fam, 1, plus=True)
    a = {"x": c(J, 0), "y": Base(0)}
    lifted = {"x": (0, 0), "y": (0, 0)}
    assert satisfies(cp.as_structure(), negated[2], a) and not satisfies(direct_power(S, [0, 1]), negated[2], lifted)


def test_pointwise_truth_lifts_for_dnf_formulas():
    """If every ϑ-image of an assignment satisfies a prenex DNF body, the stage does too."""
    sig = Signature({"g": 2}, {"R": 1})
    bodies = ["R(x) & !(g(x,y) = x)", "R(g(x,y)) | !R(y)", "!(x = y) & R(x)"]
    fam = IndexFamily([("I0", [0, 1])])
    for S in enumerate_structures(sig, 2, min_size=2):
        cp = CumulativePower(S, fam, 1)
        for text in bodies:
            phi = parse_formula(text, sig)
            for u, v in product(cp.carrier, repeat=2):
                images = [{"x": vartheta(1, j, u, "I0"), "y": vartheta(1, j, v, "I0")} for j in (0, 1)]
                if all(satisfies(S, phi, {k: w.value for k, w in a.items()}) for a in images):
                    assert satisfies(cp.as_structure(), phi, {"x": u, "y": v})


def test_lift_embedding_examples():
    fam = IndexFamily([("I0", [0, 1])])
    ident = {0: 0, 1: 1}
    lift = lift_embedding(ident, Z2, Z2, fam, fam, [{0: 0, 1: 1}], 1)
    assert all(k == v for k, v in lift.items())
    famJ = IndexFamily([("J0", [0, 1, 2])])
    lift = lift_embedding(ident, Z2, Z2, fam, famJ, [{0: 0, 1: 1}], 1)
    x = Func(fam[0], [Base(0), Base(1)])
    assert lift[x] == Func(famJ[0], [Base(0), Base(1), Base(0)])
    assert lift[Base(1)] == Base(1)
    with pytest.raises(ValueError):
        lift_embedding({0: 0, 1: 0}, Z2, Z2, fam, fam, [{0: 0, 1: 1}], 1)


def test_nested_embeds_iterated_power():
    assert nested(((0, 1), (1, 1)), FAM, 2) == Func(I1, [Func(I0, [Base(0), Base(1)]), c(I0, 1)])
