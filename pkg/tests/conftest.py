from __future__ import annotations

from hypothesis import strategies as st

from powlab.syntax import (
    And, App, Const, Eq, Exists, ForAll, Implies, Not, Or, Rel, Signature, Var,
)

SIG = Signature({"f": 1, "g": 2}, {"P": 1, "le": 2}, ("c",))
VARS = ("x", "y", "z")


def terms(depth: int = 2):
    leaves = st.one_of(st.sampled_from([Var(v) for v in VARS]), st.just(Const("c")))
    return st.recursive(
        leaves,
        lambda t: st.one_of(st.builds(lambda a: App("f", (a,)), t),
                            st.builds(lambda a, b: App("g", (a, b)), t, t)),
        max_leaves=3,
    )


def atoms():
    t = terms()
    return st.one_of(st.builds(Eq, t, t), st.builds(lambda a: Rel("P", (a,)), t),
                     st.builds(lambda a, b: Rel("le", (a, b)), t, t))


def formulas(max_leaves: int = 6):
    var = st.sampled_from(VARS)
    return st.recursive(
        atoms(),
        lambda f: st.one_of(
            st.builds(Not, f), st.builds(And, f, f), st.builds(Or, f, f), st.builds(Implies, f, f),
            st.builds(ForAll, var, f), st.builds(Exists, var, f),
        ),
        max_leaves=max_leaves,
    )


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
