"""Line-oriented text formats: structures, index families, ultrafilters and formula corpora."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Hashable, Iterable, Sequence

from .cumulative import HierElement, IndexFamily, element_name
from .filters import FilterFamily, principal_ultrafilter, validate_filter
from .finmodel import FiniteStructure, as_structure
from .syntax import Formula, ParseError, Signature, SymbolError, parse_formula

__all__ = [
    "FormatError", "parse_structure", "format_structure", "parse_index_family", "format_index_family",
    "parse_ultrafilters", "format_ultrafilter", "Corpus", "parse_corpus", "parse_signature_directive",
    "format_signature_directive", "read_text", "element_label",
]


class FormatError(ValueError):
    """A file failed to parse; carries the source and 1-based line number."""

    def __init__(self, source: str, line: int, message: str):
        super().__init__(f"{source}:{line}: {message}")
        self.source = source
        self.line = line


def read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _lines(text: str) -> Iterable[tuple[int, str]]:
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _atoms(tokens: Sequence[str]) -> list[Hashable]:
    """Integers when every token is an integer literal, strings otherwise."""
    if tokens and all(re.fullmatch(r"-?\d+", t) for t in tokens):
        return [int(t) for t in tokens]
    return list(tokens)


def element_label(x: Any) -> str:
    """Printable token for carrier members: hierarchy names, <a;b> for tuples, str otherwise."""
    if isinstance(x, HierElement):
        return element_name(x)
    if isinstance(x, tuple):
        return "<" + ";".join(element_label(v) for v in x) + ">"
    return str(x)


_SYMBOL = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)/(\d+)$")
_ENTRY = re.compile(r"\(([^()]*)\)\s*->\s*(\S+)")
_TUPLE = re.compile(r"\(([^()]*)\)")


def parse_structure(text: str, source: str = "<structure>") -> FiniteStructure:
    """Parse ``structure``/``domain``/``fun``/``rel``/``const`` lines."""
    name = ""
    domain_tokens: list[str] | None = None
    funs: list[tuple[int, str, int, str]] = []
    rels: list[tuple[int, str, int, str]] = []
    consts: list[tuple[int, str, str]] = []
    for no, line in _lines(text):
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "structure":
            name = rest
        elif head == "domain":
            domain_tokens = rest.split()
        elif head in ("fun", "rel"):
            decl, _, body = rest.partition(":")
            m = _SYMBOL.match(decl.strip())
            if not m:
                raise FormatError(source, no, f"bad symbol declaration {decl.strip()!r}")
            (funs if head == "fun" else rels).append((no, m.group(1), int(m.group(2)), body))
        elif head == "const":
            cname, eq, value = rest.partition("=")
            if not eq:
                raise FormatError(source, no, "expected 'const name = element'")
            consts.append((no, cname.strip(), value.strip()))
        else:
            raise FormatError(source, no, f"unknown directive {head!r}")
    if domain_tokens is None:
        raise FormatError(source, 1, "missing domain line")
    if len(set(domain_tokens)) != len(domain_tokens):
        raise FormatError(source, 1, "domain has repeated elements")
    carrier = _atoms(domain_tokens)
    lookup = dict(zip(domain_tokens, carrier))

    def elem(no: int, tok: str) -> Hashable:
        tok = tok.strip()
        if tok not in lookup:
            raise FormatError(source, no, f"{tok!r} is not a domain element")
        return lookup[tok]

    def args(no: int, inner: str, arity: int) -> tuple:
        parts = [p for p in inner.split(",")] if inner.strip() else []
        if len(parts) != arity:
            raise FormatError(source, no, f"tuple ({inner}) has {len(parts)} entries, expected {arity}")
        return tuple(elem(no, p) for p in parts)

    functions = {}
    relations = {}
    try:
        for no, fn, ar, body in funs:
            table = {}
            consumed = _ENTRY.sub("", body).strip()
            if consumed:
                raise FormatError(source, no, f"unparsed text {consumed!r}")
            for m in _ENTRY.finditer(body):
                key = args(no, m.group(1), ar)
                if key in table:
                    raise FormatError(source, no, f"{fn} defined twice at {m.group(1)}")
                table[key] = elem(no, m.group(2))
            functions[fn] = table
        for no, r, ar, body in rels:
            consumed = _TUPLE.sub("", body).strip()
            if consumed:
                raise FormatError(source, no, f"unparsed text {consumed!r}")
            relations[r] = frozenset(args(no, m.group(1), ar) for m in _TUPLE.finditer(body))
        constants = {c: elem(no, v) for no, c, v in consts}
        sig = Signature({fn: ar for _, fn, ar, _ in funs}, {r: ar for _, r, ar, _ in rels},
                        tuple(c for _, c, _ in consts))
        return FiniteStructure(sig, carrier, functions, relations, constants, name=name)
    except (SymbolError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(source, 1, str(exc)) from None


def format_structure(S: Any, name: str | None = None) -> str:
    """Inverse of :func:`parse_structure`; entries follow carrier order."""
    S = as_structure(S)
    label = element_label
    out = [f"structure {name if name is not None else (S.name or 'S')}",
           "domain " + " ".join(label(x) for x in S.carrier)]
    pos = S.index
    for fn, ar in S.signature.functions.items():
        entries = sorted(S.functions[fn].items(), key=lambda kv: [pos[x] for x in kv[0]])
        body = " ".join("(" + ",".join(label(x) for x in k) + ")->" + label(v) for k, v in entries)
        out.append(f"fun {fn}/{ar}: {body}".rstrip())
    for r, ar in S.signature.relations.items():
        tuples = sorted(S.relations[r], key=lambda t: [pos[x] for x in t])
        body = " ".join("(" + ",".join(label(x) for x in t) + ")" for t in tuples)
        out.append(f"rel {r}/{ar}: {body}".rstrip())
    for c in S.signature.constants:
        out.append(f"const {c} = {label(S.constants[c])}")
    return "\n".join(out) + "\n"


def parse_index_family(text: str, source: str = "<indexfam>") -> IndexFamily:
    """``indexset I0: j1 j2`` lines in stage order."""
    sets = []
    for no, line in _lines(text):
        m = re.fullmatch(r"indexset\s+([A-Za-z_][A-Za-z0-9_]*)\s*:(.*)", line)
        if not m:
            raise FormatError(source, no, "expected 'indexset NAME: j1 j2 ...'")
        elems = m.group(2).split()
        if len(set(elems)) != len(elems):
            raise FormatError(source, no, "index set has repeated elements")
        try:
            sets.append((m.group(1), _atoms(elems)))
            IndexFamily(sets)
        except ValueError as exc:
            raise FormatError(source, no, str(exc)) from None
    if not sets:
        raise FormatError(source, 1, "no index sets")
    return IndexFamily(sets)


def format_index_family(fam: IndexFamily) -> str:
    return "".join(f"indexset {s.name}: {' '.join(map(str, s.elements))}\n" for s in fam.sets)


def parse_ultrafilters(text: str, fam: IndexFamily, source: str = "<ultrafilter>") -> dict[str, FilterFamily]:
    """``ultrafilter over I0: principal j`` or ``ultrafilter over I0: {j1} {j1,j2} ...``."""
    out: dict[str, FilterFamily] = {}
    for no, line in _lines(text):
        m = re.fullmatch(r"ultrafilter\s+over\s+([A-Za-z_][A-Za-z0-9_]*)\s*:(.*)", line)
        if not m:
            raise FormatError(source, no, "expected 'ultrafilter over NAME: ...'")
        name, body = m.group(1), m.group(2).strip()
        try:
            I = fam.by_name(name)
        except KeyError:
            raise FormatError(source, no, f"unknown index set {name!r}") from None
        lookup = {str(j): j for j in I.elements}
        try:
            pm = re.fullmatch(r"principal\s+(\S+)", body)
            if pm:
                if pm.group(1) not in lookup:
                    raise FormatError(source, no, f"{pm.group(1)!r} is not in {name}")
                U = principal_ultrafilter(I.elements, lookup[pm.group(1)])
            else:
                members = []
                rest = re.sub(r"\{[^{}]*\}", "", body).strip()
                if rest:
                    raise FormatError(source, no, f"unparsed text {rest!r}")
                for sm in re.finditer(r"\{([^{}]*)\}", body):
                    toks = [t.strip() for t in sm.group(1).split(",") if t.strip()]
                    for t in toks:
                        if t not in lookup:
                            raise FormatError(source, no, f"{t!r} is not in {name}")
                    members.append([lookup[t] for t in toks])
                U = validate_filter(I.elements, members)
                if not U.is_ultrafilter:
                    raise FormatError(source, no, "family is a filter but not an ultrafilter")
        except FormatError:
            raise
        except ValueError as exc:
            raise FormatError(source, no, str(exc)) from None
        if name in out:
            raise FormatError(source, no, f"second ultrafilter over {name}")
        out[name] = U
    return out


def format_ultrafilter(name: str, U: FilterFamily) -> str:
    if U.principal is not None:
        return f"ultrafilter over {name}: principal {U.principal}\n"
    body = " ".join("{" + ",".join(str(j) for j in U.ground if j in s) + "}" for s in U.sorted_members())
    return f"ultrafilter over {name}: {body}\n"


def parse_signature_directive(body: str) -> Signature:
    """``fun add/2 ... rel P/1 ... const c0 ...``; a keyword applies until the next one."""
    functions: dict[str, int] = {}
    relations: dict[str, int] = {}
    constants: list[str] = []
    mode = None
    for tok in body.split():
        if tok in ("fun", "rel", "const"):
            mode = tok
            continue
        if mode in ("fun", "rel"):
            m = _SYMBOL.match(tok)
            if not m:
                raise SymbolError(f"bad symbol declaration {tok!r}")
            (functions if mode == "fun" else relations)[m.group(1)] = int(m.group(2))
        elif mode == "const":
            constants.append(tok)
        else:
            raise SymbolError(f"symbol {tok!r} precedes fun/rel/const")
    return Signature(functions, relations, tuple(constants))


def format_signature_directive(sig: Signature) -> str:
    parts = []
    if sig.functions:
        parts.append("fun " + " ".join(f"{f}/{a}" for f, a in sig.functions.items()))
    if sig.relations:
        parts.append("rel " + " ".join(f"{r}/{a}" for r, a in sig.relations.items()))
    if sig.constants:
        parts.append("const " + " ".join(sig.constants))
    return "# signature: " + " ".join(parts)


@dataclass
class Corpus:
    signature: Signature
    formulas: list[Formula]
    texts: list[str]
    lines: list[int]
    labels: list[str]


def parse_corpus(text: str, signature: Signature | None = None, source: str = "<corpus>") -> Corpus:
    """One formula per line.  ``# signature: ...`` declares symbols (merged with ``signature``);
    ``# label: ...`` names the next formula; other ``#`` lines are comments."""
    sig = signature
    formulas, texts, lines, labels = [], [], [], []
    pending_label = ""
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("signature:"):
                try:
                    declared = parse_signature_directive(body[len("signature:"):])
                    sig = declared if sig is None else sig.merge(declared)
                except SymbolError as exc:
                    raise FormatError(source, no, str(exc)) from None
            elif body.startswith("label:"):
                pending_label = body[len("label:"):].strip()
            continue
        if sig is None:
            raise FormatError(source, no, "no signature: add a '# signature:' line or pass a structure")
        try:
            f = parse_formula(line, sig)
        except (ParseError, SymbolError) as exc:
            raise FormatError(source, no, str(exc)) from None
        formulas.append(f)
        texts.append(line)
        lines.append(no)
        labels.append(pending_label or f"line{no}")
        pending_label = ""
    return Corpus(sig if sig is not None else Signature(), formulas, texts, lines, labels)
