import json

from hypothesis import given, settings
from hypothesis import strategies as st

from svrunify.algebra import free_algebra
from svrunify.syntax import ISL, LC, NIS, Substitution, iff, parse_term, top, var
from svrunify.unification import (
    ENUMERATION,
    PROJECTIVE,
    VERIFIED,
    UnificationProblem,
    basis_dominates,
    check_unifier,
    equivalent_unifiers,
    more_general,
    svr_unify,
    unify,
)
from svrunify.varieties import entails


def problem(sig, text, variables, restriction=()):
    return UnificationProblem(sig, variables, ((parse_term(text, sig), top()),), restriction)


ISL_SVR = problem(ISL, "((x -> z) /\\ (y -> z)) -> z", ("x", "y", "z"), ("z",))


def test_isl_svr_example_has_two_incomparable_unifiers():
    basis = svr_unify(ISL_SVR)
    assert len(basis.unifiers) == 2
    a, b = basis.unifiers
    assert {str(a), str(b)} == {"{x |-> T, y |-> y, z |-> z}", "{x |-> x, y |-> T, z |-> z}"}
    assert not more_general(a, b, ISL, fixed=("z",))
    assert not more_general(b, a, ISL, fixed=("z",))
    assert all(check_unifier(ISL_SVR, s) for s in basis.unifiers)


def test_without_restriction_the_example_is_unitary():
    basis = unify(ISL_SVR.unrestricted())
    assert len(basis.unifiers) == 1


def test_simple_isl_problem():
    basis = unify(problem(ISL, "p", ("p",)))
    assert [str(s) for s in basis.unifiers] == ["{p |-> T}"]
    assert basis.certificate == ENUMERATION


def test_lc_contradiction_is_not_unifiable():
    basis = unify(problem(LC, "p /\\ ~p", ("p",)))
    assert not basis.unifiable


def test_lc_three_variable_problem_uses_projective_route():
    p = problem(LC, "(p -> q) \\/ (r /\\ s)", ("p", "q", "r", "s"))
    basis = unify(p)
    assert basis.certificate == PROJECTIVE
    (s,) = basis.unifiers
    phi = p.equations()[0]
    for v in p.variables:
        assert entails(LC, [phi], iff(s[v], var(v)))
    assert check_unifier(p, s)


def test_projective_unifier_is_identity_on_solutions():
    p = problem(ISL, "(x -> y) /\\ (y -> z) /\\ (z -> x)", ("x", "y", "z"))
    (s,) = unify(p).unifiers
    phi = p.equations()[0]
    for v in p.variables:
        assert entails(ISL, [phi, s[v]], var(v)) and entails(ISL, [phi, var(v)], s[v])


def test_nis_nucleus_fixpoint():
    basis = unify(problem(NIS, "l p -> p", ("p",)))
    assert [str(s) for s in basis.unifiers] == ["{p |-> l p}"]


def test_supplied_factorization_is_tagged():
    basis = svr_unify(ISL_SVR, factorization=[[var("x")], [var("y")]])
    assert basis.certificate == VERIFIED
    assert len(basis.unifiers) == 2


def test_more_general_identity_dominates_everything():
    ident = Substitution.identity(("p", "q"))
    s = Substitution.from_map({"p": parse_term("q -> p", ISL)}, domain=("p", "q"), codomain=("p", "q"))
    assert more_general(ident, s, ISL)
    assert not more_general(s, ident, ISL) or equivalent_unifiers(s, ident, ISL)


def test_problem_json_round_trip():
    data = json.loads(json.dumps(ISL_SVR.to_json()))
    again = UnificationProblem.from_json(data)
    assert again == ISL_SVR


def test_emitted_basis_round_trips_through_check_unifier():
    emitted = json.loads(json.dumps(svr_unify(ISL_SVR).to_json()))
    for m in emitted["basis"]:
        s = Substitution.from_map({k: parse_term(v, ISL) for k, v in m.items()}, domain=ISL_SVR.variables)
        s = s.with_codomain(set(s.codomain) | {"z"})
        assert check_unifier(ISL_SVR, s)


F2 = free_algebra(ISL, ("x", "y"))
elements = st.integers(0, F2.size - 1)


@settings(max_examples=60)
@given(elements, elements)
def test_sampled_unifiers_are_dominated(ix, iy):
    s = Substitution.from_map(
        {"x": F2.rep(ix), "y": F2.rep(iy)}, domain=("x", "y", "z"), codomain=("x", "y", "z")
    )
    if check_unifier(ISL_SVR, s):
        assert basis_dominates(svr_unify(ISL_SVR), s)


@settings(max_examples=30)
@given(elements)
def test_unrestricted_basis_dominates_samples(ix):
    p = problem(ISL, "(x -> y) -> y", ("x", "y"))
    s = Substitution.from_map({"x": F2.rep(ix)}, domain=("x", "y"), codomain=("x", "y"))
    basis = unify(p)
    if check_unifier(p, s):
        assert basis_dominates(basis, s)
