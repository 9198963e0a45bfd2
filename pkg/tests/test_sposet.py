from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svrunify.algebra import audit
from svrunify.sposet import (
    NotProjective,
    PartialMap,
    SPoset,
    build_retract,
    dual_algebra,
    dual_of_map,
    embeddings_up_to,
    find_covers,
    is_morphism,
    is_projective_dual,
    morphisms,
    retracts,
    sposets_up_to,
)
from svrunify.syntax import NUC


def sp(elements, leq=(), S=()):
    return SPoset.from_json({"elements": list(elements), "leq": [list(p) for p in leq], "S": list(S)})


CHAIN_S_BOTTOM = sp("sa", [("s", "a")], "s")
V_SHAPE = sp("sab", [("s", "a"), ("s", "b")], "s")
ANTICHAIN = sp("ab")
SMALL = sposets_up_to(3)


def test_identity_and_empty_maps_are_morphisms():
    for x in SMALL:
        assert is_morphism(PartialMap.identity(x))
        assert is_morphism(PartialMap(x, x, (None,) * x.n))


def test_collapsing_a_chain_violates_order_condition():
    two = sp("xy", [("x", "y")])
    one = sp("o")
    r = is_morphism(PartialMap(two, one, (0, 0)))
    assert not r.ok and r.condition == "i"


def test_find_covers_examples():
    s, a, b = 0, 1, 2
    assert find_covers(CHAIN_S_BOTTOM, 1 << 1) == [0]
    assert find_covers(ANTICHAIN, 0b11) == []
    assert find_covers(V_SHAPE, (1 << a) | (1 << b)) == [s]


@pytest.mark.parametrize(
    "x,expected",
    [(sp("x", S="x"), True), (sp("x"), False), (ANTICHAIN, False), (V_SHAPE, False), (CHAIN_S_BOTTOM, True)],
)
def test_projectivity_examples(x, expected):
    assert is_projective_dual(x) is expected


def _brute_force_morphisms(x, y):
    for imgs in product([None, *range(y.n)], repeat=x.n):
        f = PartialMap(x, y, imgs)
        if is_morphism(f):
            yield imgs


def test_backtracking_enumeration_matches_brute_force():
    for x, y in product(SMALL, repeat=2):
        fast = sorted((f.images for f in morphisms(x, y)), key=repr)
        slow = sorted(_brute_force_morphisms(x, y), key=repr)
        assert fast == slow, (x, y)


def test_composites_of_morphisms_are_morphisms():
    xs = sposets_up_to(2)
    for x, y, z in product(xs, repeat=3):
        for f in morphisms(x, y):
            for g in morphisms(y, z):
                assert is_morphism(f.then(g)), (f, g)


def test_dual_algebra_examples():
    assert dual_algebra(sp("")).size == 1
    one = dual_algebra(sp("x", S="x"))
    assert one.size == 2 and list(one.tables[NUC]) == [0, 1]
    nothing = dual_algebra(sp("x"))
    assert list(nothing.tables[NUC]) == [1, 1]


def test_nucleus_audit_small():
    for x in sposets_up_to(4):
        audit(dual_algebra(x))


def test_dual_correspondences_small():
    for x, y in product(SMALL, repeat=2):
        for f in morphisms(x, y):
            h = dual_of_map(f)
            assert h.is_homomorphism()
            assert h.is_injective() == f.is_surjective()
            assert h.is_surjective() == (f.is_total() and f.is_injective())


def test_dual_of_identity_is_identity():
    for x in SMALL:
        h = dual_of_map(PartialMap.identity(x))
        assert h.mapping == tuple(range(h.source.size))


def test_retract_of_identity_is_identity():
    x = sp("x", S="x")
    e = PartialMap.identity(x)
    assert build_retract(e).images == (0,)


def test_retract_maps_new_point_to_a_cover():
    # X: s < a with s in S, so s covers {a}; Y adds another S-point below a
    x = CHAIN_S_BOTTOM
    assert is_projective_dual(x)
    y = sp("san", [("s", "a"), ("n", "a")], "sn")
    e = PartialMap.from_json(x, y, {"map": {"s": "s", "a": "a"}})
    r = build_retract(e)
    assert is_morphism(r)
    assert r.images[2] == 0
    assert e.then(r).images == (0, 1)


def test_build_retract_refuses_non_projective_source():
    e = PartialMap.identity(ANTICHAIN)
    with pytest.raises(NotProjective):
        build_retract(e)


def test_projectivity_iff_retracts_small():
    for x in sposets_up_to(3):
        every = all(any(True for _ in retracts(e)) for e in embeddings_up_to(x, 4))
        assert every == is_projective_dual(x), x
        if is_projective_dual(x):
            for e in embeddings_up_to(x, 4):
                r = build_retract(e)
                assert is_morphism(r) and e.then(r).images == tuple(range(x.n))


@settings(max_examples=40)
@given(st.sampled_from(sposets_up_to(4)))
def test_json_round_trip(x):
    y = SPoset.from_json(x.to_json())
    assert y.poset.up == x.poset.up and y.S == x.S
