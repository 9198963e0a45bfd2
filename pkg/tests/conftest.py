import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from svrunify.syntax import ISL, LC, NIS, conj, disj, imp, neg, nuc, top, bot, var

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


def terms(sig, names=("p", "q", "r"), max_leaves=8):
    """Random formulas in the signature of ``sig``."""
    leaves = [st.sampled_from(names).map(var), st.just(top())]
    if sig is LC:
        leaves.append(st.just(bot()))
    base = st.one_of(*leaves)

    def extend(children):
        ops = [
            st.tuples(children, children).map(lambda ab: conj(*ab)),
            st.tuples(children, children).map(lambda ab: imp(*ab)),
        ]
        if sig is LC:
            ops.append(st.tuples(children, children).map(lambda ab: disj(*ab)))
            ops.append(children.map(neg))
        if sig is NIS:
            ops.append(children.map(nuc))
        return st.one_of(*ops)

    return st.recursive(base, extend, max_leaves=max_leaves)


isl_terms = terms(ISL)
lc_terms = terms(LC)
nis_terms = terms(NIS, names=("p", "q"), max_leaves=6)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
