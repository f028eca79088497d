import pytest
from hypothesis import given, settings, strategies as st

from powlab.filters import principal_ultrafilter, validate_filter
from powlab.finmodel import enumerate_structures
from powlab.formats import (
    FormatError, element_label, format_index_family, format_signature_directive, format_structure,
    format_ultrafilter, parse_corpus, parse_index_family, parse_signature_directive, parse_structure,
    parse_ultrafilters,
)
from powlab.syntax import Signature

Z2_TEXT = """\
structure Z2
domain 0 1
fun add/2: (0,0)->0 (0,1)->1 (1,0)->1 (1,1)->0
rel le/2: (0,0) (0,1) (1,1)
const zero = 0
"""


def test_parse_structure_example():
    S = parse_structure(Z2_TEXT)
    assert S.name == "Z2" and S.carrier == (0, 1)
    assert S.apply("add", (1, 1)) == 0
    assert S.holds("le", (0, 1)) and not S.holds("le", (1, 0))
    assert S.constants == {"zero": 0}
    assert format_structure(S) == Z2_TEXT


def test_partial_tables_round_trip():
    text = "structure P\ndomain a b\nfun f/1: (a)->b\n"
    S = parse_structure(text)
    assert S.carrier == ("a", "b") and dict(S.functions["f"]) == {("a",): "b"}
    assert format_structure(S) == text


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_structure_round_trip_random(seed):
    sig = Signature({"f": 1, "g": 2}, {"R": 1}, ("c",))
    structures = list(enumerate_structures(sig, 2, total=False, min_size=2))
    S = structures[seed % len(structures)]
    T = parse_structure(format_structure(S))
    assert T.carrier == S.carrier and T.functions == S.functions and T.relations == S.relations
    assert T.constants == S.constants


@pytest.mark.parametrize("text, line", [
    ("domain 0 1\nfun f/1: (0)->2\n", 2),
    ("domain 0 1\nfun f/1: (0,1)->0\n", 2),
    ("domain 0 1\nfun f/1: (0)->0 (0)->1\n", 2),
    ("domain 0 1\nbogus\n", 2),
    ("fun f/1: (0)->0\n", 1),
    ("domain 0 1\nrel R/1: (0) junk\n", 2),
    ("domain 0 1\n\nconst c 0\n", 3),
])
def test_structure_errors_carry_line(text, line):
    with pytest.raises(FormatError) as exc:
        parse_structure(text, source="s.txt")
    assert exc.value.line == line and exc.value.source == "s.txt"
    assert str(exc.value).startswith(f"s.txt:{line}:")


def test_index_family_round_trip_and_errors():
    fam = parse_index_family("indexset I0: a b\nindexset I1: 0 1 2\n")
    assert fam[0].elements == ("a", "b") and fam[1].elements == (0, 1, 2)
    assert parse_index_family(format_index_family(fam)).sets == fam.sets
    with pytest.raises(FormatError) as exc:
        parse_index_family("indexset I0: a b\nindexset I1: x\n")
    assert exc.value.line == 2
    with pytest.raises(FormatError):
        parse_index_family("indexset I0 a b\n")
    with pytest.raises(FormatError):
        parse_index_family("# nothing\n")


def test_ultrafilter_parse_and_format():
    fam = parse_index_family("indexset I0: a b c\n")
    us = parse_ultrafilters("ultrafilter over I0: principal b\n", fam)
    assert us["I0"].principal == "b"
    full = parse_ultrafilters("ultrafilter over I0: {a} {a,b} {a,c} {a,b,c}\n", fam)
    assert full["I0"].principal == "a"
    assert format_ultrafilter("I0", us["I0"]) == "ultrafilter over I0: principal b\n"
    assert parse_ultrafilters(format_ultrafilter("I0", full["I0"]), fam)["I0"].members == full["I0"].members


@pytest.mark.parametrize("text", [
    "ultrafilter over I9: principal a\n",
    "ultrafilter over I0: principal z\n",
    "ultrafilter over I0: {a,b} {a,b,c}\n",
    "ultrafilter over I0: {a}\n",
    "ultrafilter over I0: principal a\nultrafilter over I0: principal b\n",
])
def test_ultrafilter_errors(text):
    fam = parse_index_family("indexset I0: a b c\n")
    with pytest.raises(FormatError):
        parse_ultrafilters(text, fam)


def test_explicit_family_detects_generator():
    U = validate_filter(["a", "b"], [["a"], ["a", "b"]])
    assert U.principal == "a"
    assert "principal a" in format_ultrafilter("I0", principal_ultrafilter(["a", "b"], "a"))


def test_corpus_parsing():
    text = "# signature: fun f/1 rel P/1 const c\n# label: fix\nf(c) = c\n\n# a comment\nforall x. P(x)\n"
    corpus = parse_corpus(text)
    assert corpus.labels == ["fix", "line6"] and corpus.lines == [3, 6]
    assert corpus.signature.functions == {"f": 1}
    with pytest.raises(FormatError) as exc:
        parse_corpus("# signature: fun f/1\nforall x. g(x) = x\n", source="c.txt")
    assert exc.value.line == 2
    with pytest.raises(FormatError):
        parse_corpus("forall x. x = x\n")
    assert len(parse_corpus("forall x. x = x\n", Signature()).formulas) == 1


def test_signature_directive_round_trip():
    sig = parse_signature_directive("fun add/2 f/1 rel le/2 const c0 c1")
    assert sig == Signature({"add": 2, "f": 1}, {"le": 2}, ("c0", "c1"))
    text = format_signature_directive(sig)
    assert parse_signature_directive(text.split(":", 1)[1]) == sig


def test_element_labels():
    assert element_label((0, (1, 2))) == "<0;<1;2>>"
    assert element_label("a") == "a"
