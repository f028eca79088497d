import json
from pathlib import Path

import pytest

from powlab.cli import EXIT_OK, EXIT_USAGE, RunConfig, emit_report, load_bundle, run
from powlab.formats import FormatError
from powlab.grids import GridRecord

Z2 = """\
structure Z2
domain 0 1
fun add/2: (0,0)->0 (0,1)->1 (1,0)->1 (1,1)->0
const zero = 0
"""
CONST_F = "structure K\ndomain 0 1\nfun f/1: (0)->0 (1)->0\n"


@pytest.fixture
def bundle(tmp_path):
    files = {
        "z2.txt": Z2,
        "k.txt": CONST_F,
        "fam.txt": "indexset I0: a b\nindexset I1: p q\n",
        "u.txt": "ultrafilter over I0: principal a\nultrafilter over I1: principal q\n",
        "corpus.txt": "forall x. exists y. add(x,y) = zero\nforall x. add(x,zero) = x\n",
        "kcorpus.txt": "# signature: fun f/1\nexists x. forall y. x = f(y)\n",
    }
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    return tmp_path


def test_load_bundle_minimal(bundle):
    ws = load_bundle(RunConfig(structures=[str(bundle / "z2.txt")], indexfam=str(bundle / "fam.txt"),
                               ultrafilters=[str(bundle / "u.txt")], corpus=str(bundle / "corpus.txt")))
    assert len(ws.structures) == 1 and len(ws.corpus.formulas) == 2
    assert [U.principal for U in ws.ultrafilter_list(2)] == ["a", "q"]


def test_load_bundle_errors(bundle):
    (bundle / "bad_u.txt").write_text("ultrafilter over I7: principal a\n")
    with pytest.raises(FormatError):
        load_bundle(RunConfig(indexfam=str(bundle / "fam.txt"), ultrafilters=[str(bundle / "bad_u.txt")]))
    (bundle / "one.txt").write_text("indexset I0: a\n")
    with pytest.raises(FormatError) as exc:
        load_bundle(RunConfig(indexfam=str(bundle / "one.txt")))
    assert exc.value.line == 1
    (bundle / "wrong.txt").write_text("forall x. f(x) = x\n")
    with pytest.raises(FormatError):
        load_bundle(RunConfig(structures=[str(bundle / "z2.txt")], corpus=str(bundle / "wrong.txt")))
    with pytest.raises(ValueError):
        load_bundle(RunConfig(structures=[str(bundle / "missing.txt")]))
    with pytest.raises(ValueError):
        RunConfig(bound=0).validate()


def test_usage_exit_codes(bundle, capsys):
    assert run([]) == EXIT_USAGE
    assert run(["frobnicate"]) == EXIT_USAGE
    assert run(["build", "direct", "--structure", str(bundle / "missing.txt")]) == EXIT_USAGE
    assert run(["build", "direct", "--structure", str(bundle / "z2.txt")]) == EXIT_USAGE
    assert run(["eval", "--structure", str(bundle / "z2.txt")]) == EXIT_USAGE


def test_classify_table(bundle, capsys):
    assert run(["classify", "--corpus", str(bundle / "kcorpus.txt"), "--out", str(bundle / "o")]) == EXIT_OK
    text = (bundle / "o" / "classify.tsv").read_text()
    header, row = text.splitlines()
    assert header.split("\t")[:8] == ["n", "formula", "horn", "constant_free", "equality_verdicts",
                                      "formula_verdict", "empirical_preservation", "bounds"]
    cells = row.split("\t")
    assert cells[5] == "Collapsible" and "cumulative=NOT_PRESERVED" in cells[6]


def test_build_and_eval(bundle, capsys):
    z2, fam = str(bundle / "z2.txt"), str(bundle / "fam.txt")
    out = bundle / "b"
    assert run(["build", "cumulative", "--structure", z2, "--indexfam", fam, "--stage", "2", "--plus",
                "--out", str(out)]) == EXIT_OK
    assert (out / "structure.txt").read_text().startswith("structure ")
    assert run(["build", "direct", "--structure", z2, "--indexfam", fam, "--out", str(bundle / "d")]) == EXIT_OK
    assert "domain" in (bundle / "d" / "structure.txt").read_text()
    capsys.readouterr()
    assert run(["eval", "--structure", z2, "--indexfam", fam, "--plus", "--formula", str(bundle / "corpus.txt")]) \
        == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].endswith("\ttrue")
    assert lines[2].endswith("\tfalse")  # the plus-mode counterexample


def test_quotient_iso_tau_embed(bundle, capsys):
    z2, fam, u = str(bundle / "z2.txt"), str(bundle / "fam.txt"), str(bundle / "u.txt")
    assert run(["quotient", "hereditary", "--structure", z2, "--indexfam", fam]) == EXIT_OK
    assert run(["quotient", "ultra", "--structure", z2, "--indexfam", fam, "--ultrafilter", u]) == EXIT_OK
    assert run(["iso", "--structure", z2, "--indexfam", fam, "--ultrafilter", u, "--stage", "2"]) == EXIT_OK
    assert run(["iso", "--structure", z2, "--structure", z2]) == EXIT_OK
    assert run(["tau", "--structure", z2, "--indexfam", fam]) == EXIT_OK
    assert run(["embed", "direct-power", "--structure", z2, "--indexfam", fam, "--ultrafilter", u]) == EXIT_OK
    assert run(["embed", "rk", "--structure", z2, "--structure", z2, "--indexfam", fam, "--ultrafilter", u]) \
        == EXIT_OK
    assert run(["quotient", "ultra", "--structure", z2, "--indexfam", fam]) == EXIT_USAGE


def test_grid_reports_are_deterministic(bundle, capsys):
    a, b = bundle / "ga", bundle / "gb"
    assert run(["grid", "--suite", "transport", "--out", str(a)]) == EXIT_OK
    assert run(["grid", "--suite", "transport", "--out", str(b)]) == EXIT_OK
    for name in ("report.tsv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    summary = json.loads((a / "summary.json").read_text())
    assert summary["total"]["fail"] == 0 and summary["total"]["pass"] > 0


def test_emit_report_writes_witnesses(tmp_path):
    records = [GridRecord("c", "t:one", "cell1", "pass", ""),
               GridRecord("c", "t:one", "cell2", "fail", "counterexample text"),
               GridRecord("c", "t:two", "cell3", "report", "diagnostic")]
    summary = emit_report(records, tmp_path)
    assert summary["total"] == {"pass": 1, "fail": 1, "report": 1}
    rows = (tmp_path / "report.tsv").read_text().splitlines()
    assert rows[2].endswith("witnesses/00001.txt") and rows[3].endswith("diagnostic")
    assert "counterexample text" in Path(tmp_path / "witnesses" / "00001.txt").read_text()


def test_violation_exit_code(monkeypatch, tmp_path, capsys):
    import powlab.cli as cli

    monkeypatch.setattr(cli, "run_suite", lambda name: (name, [GridRecord("c", "t", "x", "fail", "w")], 0.0))
    assert run(["grid", "--suite", "transport", "--out", str(tmp_path)]) == 1
