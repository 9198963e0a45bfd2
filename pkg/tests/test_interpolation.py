import pytest

from svrunify.algebra import free_algebra
from svrunify.budget import Budget, ResourceExceeded
from svrunify.interpolation import (
    audit_factorization,
    certify_supplied,
    duplicate_world,
    expand_valuation,
    expansion_certificate,
    forall_factorize,
    pullback_stability,
    verify_factor,
)
from svrunify.posets import Poset
from svrunify.syntax import ISL, LC, NIS, Substitution, big_conj, parse_term, top, var
from svrunify.varieties import KripkeModel, entails, entails_all

ISL_DELTA = parse_term("((x -> z) /\\ (y -> z)) -> z", ISL)


def _brute_condition2(fz):
    """Every C-free formula entailing delta entails some factor (over all of F(X))."""
    alg = free_algebra(fz.sig, fz.free)
    for e in range(alg.size):
        t = alg.rep(e)
        if entails_all(fz.sig, [t], fz.delta) and not any(entails(fz.sig, [t], big_conj(f.formulas)) for f in fz.factors):
            return False
    return True


def test_isl_example_factors_are_x_and_y():
    fz = forall_factorize([ISL_DELTA], ("z",), ISL)
    assert fz.method == "enumeration"
    assert sorted(str(f) for f in fz.factors) == ["{x}", "{y}"]
    report = audit_factorization(fz)
    assert report.ok and report.qualifying == 3
    assert _brute_condition2(fz)


def test_lc_prelinearity_with_bound_middle():
    fz = forall_factorize([parse_term("(p -> r) \\/ (r -> q)", LC)], ("r",), LC)
    assert [str(f) for f in fz.factors] == ["{p -> q}"]
    assert _brute_condition2(fz)


def test_no_bound_variable_gives_trivial_factorization():
    d = parse_term("x -> y", ISL)
    fz = forall_factorize([d], ("z",), ISL)
    assert fz.method == "trivial"
    assert fz.factors[0].formulas == (d,)


def test_unsatisfiable_premise_has_bottom_as_factor():
    fz = forall_factorize([parse_term("z /\\ ~z", LC)], ("z",), LC, free=("p",))
    assert [str(f) for f in fz.factors] == ["{F}"]
    assert audit_factorization(fz).ok


def test_bound_variable_only_gives_no_factor_in_isl():
    # z = T is refuted for every C-free hypothesis except an inconsistent one, which ISL lacks
    fz = forall_factorize([var("z")], ("z",), ISL, free=("x",))
    assert fz.factors == ()


def test_nis_factorization_is_audited():
    fz = forall_factorize([parse_term("l z -> x", NIS)], ("z",), NIS, free=("x",))
    assert audit_factorization(fz).ok
    assert _brute_condition2(fz)


def test_verify_factor_rejects_bound_variables_and_weak_factors():
    delta = [ISL_DELTA]
    assert verify_factor([var("x")], delta, ("z",), ISL)
    assert not verify_factor([var("z")], delta, ("z",), ISL)
    assert not verify_factor([parse_term("x -> y", ISL)], delta, ("z",), ISL)


def test_duplicate_world_keeps_frame_prelinear():
    chain = Poset(2, (0b11, 0b10))
    d = duplicate_world(chain, 0)
    assert d.n == 3 and d.is_prelinear()
    m = expand_valuation(KripkeModel(chain, (("p", 0b10),)), 0)
    assert m.is_persistent() and m.value("p") == 0b010


def test_expansion_certificate_for_lc_middle_variable():
    delta = [parse_term("(p -> r) \\/ (r -> q)", LC)]
    rep = expansion_certificate([parse_term("p -> q", LC)], delta, ("r",), max_worlds=3)
    assert rep.ok and rep.models_checked > 0


def test_expansion_certificate_catches_too_strong_factor():
    # a root refuting T never exists, so the check is vacuous; q entails the
    # real factor p -> q but is strictly stronger, so some model escapes
    delta = [parse_term("(p -> r) \\/ (r -> q)", LC)]
    rep = expansion_certificate([parse_term("T", LC)], delta, ("r",), max_worlds=3)
    assert rep.ok and rep.models_checked == 0
    strong = expansion_certificate([var("q")], delta, ("r",), max_worlds=3)
    assert not strong.ok and strong.counterexample is not None


def test_certify_supplied_rejects_wrong_factors():
    with pytest.raises(ValueError):
        certify_supplied([[var("x")]], [ISL_DELTA], ("z",), ISL)
    cert = certify_supplied([[var("x")], [var("y")]], [ISL_DELTA], ("z",), ISL)
    assert cert.path == "factor-verified"


def test_certify_supplied_without_a_route_raises():
    delta = [parse_term("((a -> z) /\\ (b -> z) /\\ (c -> z)) -> z", ISL)]
    with pytest.raises(ResourceExceeded):
        certify_supplied([[var("a")], [var("b")], [var("c")]], delta, ("z",), ISL, Budget(max_algebra_size=50))


@pytest.mark.parametrize(
    "images",
    [{"x": var("y"), "y": var("x")}, {"x": top()}, {"x": parse_term("x /\\ y", ISL)}, {"y": parse_term("y -> x", ISL)}],
)
def test_pullback_stability(images):
    s = Substitution.from_map(images, domain=("x", "y"), codomain=("x", "y"))
    rep = pullback_stability([ISL_DELTA], ("z",), s, ISL)
    assert rep.ok, rep.failures
