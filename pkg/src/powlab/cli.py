"""Command-line entry point.  Every subcommand composes module operations and
writes deterministic reports; no theorem logic lives here."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .classify import classify_formula, is_direct_power_sentence
from .cumulative import CumulativePower, IndexFamily, satisfies_cumulative
from .embeddings import (
    all_maps, embed_into_direct_power, rk_embedding, tau_direct_power_formula, tau_enumerated, tau_profile,
)
from .filters import FilterFamily
from .finmodel import (
    DEFAULT_SIZE_GUARD, FiniteStructure, SizeGuardError, find_isomorphism, is_embedding, satisfies, ultrapower,
)
from .formats import (
    Corpus, FormatError, element_label, format_structure, parse_corpus, parse_index_family, parse_structure,
    parse_ultrafilters, read_text,
)
from .grids import SUITES, GridRecord, run_suite
from .quotients import (
    Ultra, canonical_iso_direct, canonical_iso_ultra, direct_power_level, quotient_by, ultrapower_level,
)
from .syntax import symbols_of, to_pcnf

__all__ = ["RunConfig", "Workspace", "load_bundle", "emit_report", "run", "main"]

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    structures: list[str] = field(default_factory=list)
    indexfam: str | None = None
    ultrafilters: list[str] = field(default_factory=list)
    corpus: str | None = None
    stage: int = 1
    plus: bool = False
    bound: int = 3
    rank: int = 2
    ladder_cap: int = 2
    guard: int = DEFAULT_SIZE_GUARD
    out: str | None = None
    jobs: int = 1

    def validate(self) -> None:
        for name in ("bound", "rank", "ladder_cap", "guard", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        if self.stage < 0:
            raise ValueError("--stage must be non-negative")
        for path in [*self.structures, *self.ultrafilters, self.indexfam, self.corpus]:
            if path is not None and not Path(path).is_file():
                raise ValueError(f"{path}: no such file")


@dataclass
class Workspace:
    structures: list[FiniteStructure]
    family: IndexFamily | None
    ultrafilters: dict[str, FilterFamily]
    corpus: Corpus | None

    def ultrafilter_list(self, n: int) -> list[FilterFamily]:
        """Ultrafilters for I_0 .. I_{n-1}, in stage order."""
        if self.family is None:
            raise ValueError("an index family is required")
        missing = [self.family[m].name for m in range(n) if self.family[m].name not in self.ultrafilters]
        if missing:
            raise ValueError(f"no ultrafilter given over {', '.join(missing)}")
        return [self.ultrafilters[self.family[m].name] for m in range(n)]


def load_bundle(cfg: RunConfig) -> Workspace:
    """Parse every referenced file and resolve symbols and index-set names across them."""
    cfg.validate()
    structures = [parse_structure(read_text(p), source=p) for p in cfg.structures]
    family = parse_index_family(read_text(cfg.indexfam), source=cfg.indexfam) if cfg.indexfam else None
    ultrafilters: dict[str, FilterFamily] = {}
    for path in cfg.ultrafilters:
        if family is None:
            raise FormatError(path, 1, "ultrafilters need --indexfam")
        for name, U in parse_ultrafilters(read_text(path), family, source=path).items():
            if name in ultrafilters:
                raise FormatError(path, 1, f"second ultrafilter over {name}")
            ultrafilters[name] = U
    corpus = None
    if cfg.corpus:
        sig = structures[0].signature if structures else None
        corpus = parse_corpus(read_text(cfg.corpus), signature=sig, source=cfg.corpus)
        if structures:
            have = structures[0].signature
            for f, no in zip(corpus.formulas, corpus.lines):
                used = symbols_of(f)
                unknown = [s for s in (*used.functions, *used.relations, *used.constants)
                           if s not in have.functions and s not in have.relations and s not in have.constants]
                if unknown:
                    raise FormatError(cfg.corpus, no, f"symbol {unknown[0]!r} not in the structure's signature")
    return Workspace(structures, family, ultrafilters, corpus)


# Reports


def _tsv(value: object) -> str:
    return str(value).replace("\t", " ").replace("\n", " ")


def emit_report(records: Sequence[GridRecord], out: str | Path, suites: Sequence[str] = ()) -> dict:
    """Write report.tsv, summary.json and one witness file per failure; returns the summary."""
    root = Path(out)
    root.mkdir(parents=True, exist_ok=True)
    wdir = root / "witnesses"
    lines = ["construction\ttheorem\tcell\tverdict\twitness"]
    counts: dict[str, dict[str, int]] = {}
    n_witness = 0
    for r in records:
        path = ""
        if r.witness and r.verdict == "fail":
            n_witness += 1
            wdir.mkdir(exist_ok=True)
            path = f"witnesses/{n_witness:05d}.txt"
            (root / path).write_text(f"{r.theorem}\n{r.cell}\n{r.witness}\n", encoding="utf-8")
        elif r.verdict == "report":
            path = r.witness
        lines.append("\t".join(_tsv(x) for x in (r.construction, r.theorem, r.cell, r.verdict, path)))
        bucket = counts.setdefault(r.theorem, {"pass": 0, "fail": 0, "report": 0})
        bucket[r.verdict] += 1
    (root / "report.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary = {
        "suites": list(suites),
        "theorems": {k: counts[k] for k in sorted(counts)},
        "total": {v: sum(c[v] for c in counts.values()) for v in ("pass", "fail", "report")},
    }
    (root / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary


def _write_table(out: str | None, name: str, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    text = "\t".join(header) + "\n" + "".join("\t".join(_tsv(x) for x in row) + "\n" for row in rows)
    sys.stdout.write(text)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / name).write_text(text, encoding="utf-8")


def _write_structure(out: str | None, S: FiniteStructure, name: str) -> None:
    text = format_structure(S, name)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "structure.txt").write_text(text, encoding="utf-8")
    print(f"{name}: {len(S.carrier)} elements" + (f" -> {out}/structure.txt" if out else ""))


# Subcommands


def _need(ws: Workspace, k: int = 1) -> list[FiniteStructure]:
    if len(ws.structures) < k:
        raise ValueError(f"this command needs {k} --structure file(s)")
    return ws.structures


def cmd_classify(ws: Workspace, cfg: RunConfig, args: argparse.Namespace) -> int:
    if ws.corpus is None:
        raise ValueError("classify needs --corpus")
    rows = []
    for i, (f, text) in enumerate(zip(ws.corpus.formulas, ws.corpus.texts), start=1):
        p = to_pcnf(f)
        v = classify_formula(p, oracle_bound=cfg.bound, source=f)
        dp = is_direct_power_sentence(f, syntactic_bound=cfg.ladder_cap, ladder_cap=cfg.ladder_cap + 2,
                                      cumulative=True)
        equalities = "; ".join(f"{atom}: {verdict}" for t in v.traces for atom, verdict, _ in t["equalities"])
        bounds = f"oracle={cfg.bound} structures={dp.bounds['bound']} index={dp.bounds['index_bound']} " \
                 f"ladder={cfg.ladder_cap}"
        rows.append((i, text, "yes" if v.flags["horn"] else "no", "yes" if v.flags["constant_free"] else "no",
                     equalities or "-", v.verdict, f"direct={dp.empirical} cumulative={dp.cumulative}", bounds,
                     v.lax_verdict, "vacuous" if v.literal_iii else "-", dp.syntactic))
    _write_table(cfg.out, "classify.tsv",
                 ("n", "formula", "horn", "constant_free", "equality_verdicts", "formula_verdict",
                  "empirical_preservation", "bounds", "lax_verdict", "literal_iii", "weinstein"), rows)
    return EXIT_OK


def _build(ws: Workspace, cfg: RunConfig, kind: str) -> tuple[FiniteStructure, str]:
    S = _need(ws)[0]
    if ws.family is None:
        raise ValueError(f"build {kind} needs --indexfam")
    n = cfg.stage
    if kind == "direct":
        return direct_power_level(S, ws.family, n, guard=cfg.guard), f"Pi{n}({S.name})"
    if kind == "ultra":
        Q = ultrapower_level(S, ws.family, ws.ultrafilter_list(n), n, guard=cfg.guard)
        return Q.structure, f"Y{n}({S.name})"
    cp = CumulativePower(S, ws.family, n, plus=cfg.plus, guard=cfg.guard)
    return cp.materialize(), cp.as_structure().name


def cmd_build(ws: Workspace, cfg: RunConfig, args: argparse.Namespace) -> int:
    T, name = _build(ws, cfg, args.kind)
    _write_structure(cfg.out, T, name)
    return EXIT_OK


def cmd_quotient(ws: Workspace, cfg: RunConfig, args: argparse.Namespace) -> int:
    S = _need(ws)[0]
    if ws.family is None:
        raise ValueError("quotient needs --indexfam")
    cp = CumulativePower(S, ws.family, cfg.stage, guard=cfg.guard)
    relation = "hereditary" if args.kind == "hereditary" else Ultra(tuple(ws.ultrafilter_list(cfg.stage)))
    Q = quotient_by(cp, relation)
    _write_structure(cfg.out, Q.structure, f"{args.kind}-quotient-{cfg.stage}({S.name})")
    return EXIT_OK


def cmd_eval(ws: Workspace, cfg: RunConfig, args: argparse.Namespace) -> int:
    S = _need(ws)[0]
    if ws.corpus is None:
        raise ValueError("eval needs --corpus or --formula")
    cp = None
    if ws.family is not None:
        cp = CumulativePower(S, ws.family, cfg.stage, plus=cfg.plus, guard=cfg.guard)
    rows = []
    for f, text in zip(ws.corpus.formulas, ws.corpus.texts):
        value = satisfies_cumulative(cp, f) if cp is not None else satisfies(S, f)
        rows.append((text, "true" if value else "false"))
    _write_table(cfg.out, "eval.tsv", ("formula", "value"), rows)
    return EXIT_OK


def cmd_iso(ws: Workspace, cfg: RunConfig, args: argparse.Namespace) -> int:
    structures = _need(ws)
    if len(structures) >= 2:
        m = find_isomorphism(structures[0], structures[1])
        rows = [("find_isomorphism", "yes" if m else "no",
                 " ".join(f"{element_label(a)}>{element_label(b)}" for a, b in (m or {}).items()))]
        _write_table(cfg.out, "iso.tsv", ("check", "isomorphic", "mapping"), rows)
        return EXIT_OK
    if ws.family is None:
        raise ValueError("iso needs two --structure files or --indexfam")
    S = structures[0]
    rep = canonical_iso_direct(S, ws.family, cfg.stage, guard=cfg.guard)
    rows = [("canonical_iso_direct", "yes" if rep.ok else "no", "; ".join(rep.failures[:5]))]
    if ws.ultrafilters:
        rep_u = canonical_iso_ultra(S, ws.family, ws.ultrafilter_list(cfg.stage), cfg.stage, guard=cfg.guard)
        rows.append(("canonical_iso_ultra", "yes" if rep_u.ok else "no", "; ".join(rep_u.failures[:5])))
    _write_table(cfg.out, "iso.tsv", ("check", "isomorphic", "failures"), rows)
    return EXIT_OK if all(r[1] == "yes" for r in rows) else EXIT_VIOLATION


def cmd_tau(ws: Workspace, cfg: RunConfig, args: argparse.Namespace) -> int:
    S = _need(ws)[0]
    prof = tau_profile(S)
    enumerated = tau_enumerated(S)
    rows = [(element_label(a), prof.tau_of[a], enumerated[a]) for a in S.carrier]
    rows.append(("max", prof.tau, max(enumerated.values())))
    if ws.family is not None:
        rep = tau_direct_power_formula(S, ws.family[0].elements)
        if rep["applicable"]:
            rows.append((f"direct power over {ws.family[0].name}", rep["formula"], rep["actual"]))
    _write_table(cfg.out, "tau.tsv", ("element", "tau", "enumerated"), rows)
    return EXIT_OK if prof.tau_of == enumerated else EXIT_VIOLATION


def cmd_embed(ws: Workspace, cfg: RunConfig, args: argparse.Namespace) -> int:
    if ws.family is None:
        raise ValueError("embed needs --indexfam")
    rows = []
    ok = True
    if args.kind == "direct-power":
        S = _need(ws)[0]
        I = ws.family[0]
        U = ws.ultrafilter_list(1)[0]
        rep = embed_into_direct_power(S, I.elements, U, strict=False)
        ok = rep.biconditional
        rows.append((I.name, "yes" if rep.embedding is not None else "no", "yes" if rep.complete else "no",
                     rep.tau, "yes" if ok else "no"))
        _write_table(cfg.out, "embed.tsv", ("index", "embeds", "complete", "tau", "biconditional"), rows)
    else:
        A, B = _need(ws, 2)[:2]
        if len(ws.family) < 2:
            raise ValueError("embed rk needs two index sets (I for A, J for B)")
        I, J = ws.family[0], ws.family[1]
        U_I, U_J = ws.ultrafilter_list(2)
        QA, QB = ultrapower(A, I.elements, U_I), ultrapower(B, J.elements, U_J)
        embeddings = [u for u in all_maps(A.carrier, B.carrier)
                      if len(set(u.values())) == len(u) and is_embedding(A, B, u)]
        for ui, u in enumerate(embeddings):
            for hi, h in enumerate(all_maps(J.elements, I.elements)):
                rep = rk_embedding(A, B, u, h, U_I, U_J, QA, QB, strict=False)
                ok = ok and rep.biconditional
                rows.append((ui, " ".join(f"{j}>{h[j]}" for j in J.elements), "yes" if rep.embedding else "no",
                             "yes" if rep.h_is_witness else "no", "yes" if rep.biconditional else "no"))
        _write_table(cfg.out, "embed.tsv", ("u", "h", "embedding", "rk_witness", "biconditional"), rows)
    return EXIT_OK if ok else EXIT_VIOLATION


def _seedless() -> bool:
    return os.environ.get("POWLAB_SEEDLESS", "") == "1"


def cmd_grid(ws: Workspace, cfg: RunConfig, args: argparse.Namespace) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    jobs = 1 if _seedless() else min(cfg.jobs, len(names))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_suite, names))
    else:
        results = [run_suite(n) for n in names]
    records: list[GridRecord] = []
    for name, recs, seconds in results:
        records.extend(recs)
        fails = sum(r.failed for r in recs)
        print(f"{name}: {len(recs)} cells, {fails} failures, {seconds:.1f}s", file=sys.stderr)
    summary = emit_report(records, cfg.out or "powlab-report", names)
    print(json.dumps(summary["total"], sort_keys=True))
    return EXIT_VIOLATION if summary["total"]["fail"] else EXIT_OK


COMMANDS = {
    "classify": cmd_classify, "build": cmd_build, "quotient": cmd_quotient, "eval": cmd_eval,
    "iso": cmd_iso, "tau": cmd_tau, "embed": cmd_embed, "grid": cmd_grid,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--structure", action="append", default=[], metavar="F")
    common.add_argument("--indexfam", metavar="F")
    common.add_argument("--ultrafilter", action="append", default=[], metavar="F")
    common.add_argument("--corpus", metavar="F")
    common.add_argument("--formula", metavar="F", help="alias for --corpus")
    common.add_argument("--stage", type=int, default=1, metavar="N")
    common.add_argument("--plus", action="store_true", help="interpret constants at the top stage")
    common.add_argument("--bound", type=int, default=3, metavar="N", help="max carrier size for oracles")
    common.add_argument("--rank", type=int, default=2, metavar="N", help="quantifier-rank cap")
    common.add_argument("--ladder-cap", type=int, default=2, metavar="N")
    common.add_argument("--guard", type=int, default=DEFAULT_SIZE_GUARD, metavar="N")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--jobs", type=int, default=1, metavar="N")

    parser = argparse.ArgumentParser(prog="powlab", description="Cumulative powers of finite structures.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="non-collapsibility verdicts for a corpus")
    p = sub.add_parser("build", parents=[common], help="materialize a construction")
    p.add_argument("kind", choices=["direct", "ultra", "cumulative"])
    p = sub.add_parser("quotient", parents=[common], help="quotient a cumulative stage")
    p.add_argument("kind", choices=["hereditary", "ultra"])
    sub.add_parser("eval", parents=[common], help="truth values of a corpus")
    sub.add_parser("iso", parents=[common], help="isomorphism checks")
    sub.add_parser("tau", parents=[common], help="tau invariant, computed two ways")
    p = sub.add_parser("embed", parents=[common], help="embedding theorems on one instance")
    p.add_argument("kind", choices=["rk", "direct-power"])
    p = sub.add_parser("grid", parents=[common], help="exhaustive theorem grids")
    p.add_argument("--suite", default="all", choices=["all", *SUITES])
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    if ns.formula and ns.corpus:
        raise ValueError("give --corpus or --formula, not both")
    return RunConfig(
        structures=ns.structure, indexfam=ns.indexfam, ultrafilters=ns.ultrafilter,
        corpus=ns.corpus or ns.formula, stage=ns.stage, plus=ns.plus, bound=ns.bound, rank=ns.rank,
        ladder_cap=ns.ladder_cap, guard=ns.guard, out=ns.out, jobs=ns.jobs,
    )


def run(argv: Sequence[str] | None = None) -> int:
    """Parse argv, run one subcommand and return 0 (ok), 1 (theorem violation) or 2 (usage error)."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _config(ns)
        ws = load_bundle(cfg)
        return COMMANDS[ns.command](ws, cfg, ns)
    except FormatError as exc:
        print(f"powlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, SizeGuardError) as exc:
        print(f"powlab: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
