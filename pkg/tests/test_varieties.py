import pytest
from hypothesis import given, settings

from svrunify.budget import Budget
from svrunify.posets import Poset
from svrunify.syntax import ISL, LC, NIS, parse_term
from svrunify.varieties import (
    KripkeModel,
    entails,
    equivalent,
    isl_entails,
    isl_valid,
    lc_valid,
    nis_valid,
    prelinear_frame_valid,
    valid,
)

from conftest import isl_terms, lc_terms


@pytest.mark.parametrize(
    "text,expected",
    [
        ("(p -> q) \\/ (q -> p)", True),
        ("p \\/ ~p", False),
        ("~p \\/ ~~p", True),
        ("((p -> q) -> p) -> p", False),
        ("(p -> q) \\/ (q -> r) \\/ (r -> p)", True),
    ],
)
def test_lc_validity(text, expected):
    assert lc_valid(parse_term(text, LC)) is expected


@pytest.mark.parametrize(
    "text,expected",
    [
        ("p -> p", True),
        ("(p -> q -> r) -> (p -> q) -> p -> r", True),
        ("((p -> q) -> p) -> p", False),
        ("((((p -> q) -> p) -> p) -> q) -> q", True),
        ("(p /\\ q -> r) -> p -> q -> r", True),
    ],
)
def test_isl_validity_both_engines(text, expected):
    t = parse_term(text, ISL)
    assert isl_valid(t, method="sequent") is expected
    assert isl_valid(t, method="kripke") is expected


@pytest.mark.parametrize(
    "text,expected",
    [
        ("p -> l p", True),
        ("l l p -> l p", True),
        ("l (p /\\ q) -> (l p /\\ l q)", True),
        ("(l p /\\ l q) -> l (p /\\ q)", True),
        ("l p -> p", False),
        ("l p", False),
    ],
)
def test_nucleus_laws(text, expected):
    assert nis_valid(parse_term(text, NIS)) is expected


@settings(max_examples=40)
@given(lc_terms)
def test_chain_and_frame_semantics_agree(t):
    assert lc_valid(t) == prelinear_frame_valid(t, max_worlds=4)


@settings(max_examples=40)
@given(isl_terms, isl_terms)
def test_isl_engines_agree_on_entailment(a, b):
    assert isl_entails([a], b, method="sequent") == isl_entails([a], b, Budget(isl_kripke_bound=4), method="kripke")


def test_entailment_and_equivalence():
    p, q = parse_term("p", ISL), parse_term("q", ISL)
    assert entails(ISL, [p, parse_term("p -> q", ISL)], q)
    assert not entails(ISL, [q], p)
    assert equivalent(ISL, parse_term("p -> q -> r", ISL), parse_term("p /\\ q -> r", ISL))
    assert valid("lc", parse_term("T", LC))


def test_kripke_forcing_on_a_two_world_chain():
    frame = Poset(2, (0b11, 0b10))
    m = KripkeModel(frame, (("p", 0b10),))
    assert m.is_persistent()
    assert m.forces(parse_term("p", LC)) == 0b10
    assert m.forces(parse_term("~p", LC)) == 0
    assert m.forces(parse_term("~~p", LC)) == 0b11
    assert not KripkeModel(frame, (("p", 0b01),)).is_persistent()
