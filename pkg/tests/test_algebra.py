from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svrunify.algebra import (
    Presentation,
    audit,
    congruence_generated,
    enumerate_congruences,
    enumerate_homomorphisms,
    eta,
    filter_congruence,
    finitely_presented,
    free_algebra,
    generated_subalgebra,
    image_factorization,
    is_isomorphic,
    presented_algebra,
    quotient,
    substitution_of,
)
from svrunify.budget import Budget, ResourceExceeded
from svrunify.syntax import ISL, LC, NIS, Substitution, bot, conj, disj, iff, imp, nuc, parse_term, top, var
from svrunify.varieties import valid

from conftest import isl_terms


def _saturate_by_prover(sig, names):
    """Independent count: close representatives under the operations, comparing by validity."""
    binary = [conj, imp] + ([disj] if sig is LC else [])
    reps = [top()] + ([bot()] if sig is LC else []) + [var(n) for n in names]

    def known(t):
        return any(valid(sig, iff(t, r)) if sig is not ISL else valid(sig, imp(t, r)) and valid(sig, imp(r, t)) for r in reps)

    grew = True
    while grew:
        grew = False
        for a, b in product(list(reps), repeat=2):
            for t in [op(a, b) for op in binary] + ([nuc(a)] if sig is NIS else []):
                if not known(t):
                    reps.append(t)
                    grew = True
    return len(reps)


@pytest.mark.parametrize("sig,names,size", [(ISL, "p", 2), (ISL, "pq", 18), (LC, "", 2), (LC, "p", 6), (NIS, "p", 8)])
def test_free_algebra_sizes_match_prover_saturation(sig, names, size):
    assert _saturate_by_prover(sig, names) == size
    assert free_algebra(sig, tuple(names)).size == size


@pytest.mark.parametrize("sig,names", [(ISL, "pq"), (LC, "p"), (NIS, "p"), (ISL, "")])
def test_free_algebras_satisfy_their_axioms(sig, names):
    audit(free_algebra(sig, tuple(names)))


def test_representatives_denote_their_elements():
    a = free_algebra(ISL, ("p", "q"))
    assert [a.element_of(a.rep(e)) for e in range(a.size)] == list(range(a.size))


def test_known_lower_bound_fails_fast():
    with pytest.raises(ResourceExceeded):
        free_algebra(ISL, ("p", "q", "r"))


def test_endomorphisms_of_free_algebra_match_element_choices():
    f1 = free_algebra(ISL, ("p",))
    assert len(enumerate_homomorphisms(f1, f1)) == f1.size**1
    f2 = free_algebra(ISL, ("p", "q"))
    assert len(enumerate_homomorphisms(f2, f2)) == f2.size**2
    assert all(h.is_homomorphism() for h in enumerate_homomorphisms(f2, f2))


@settings(max_examples=25)
@given(isl_terms, isl_terms)
def test_principal_congruence_reduces_to_top(a_t, b_t):
    a = free_algebra(ISL, ("p", "q"))
    x = a.element_of(_restrict(a_t))
    y = a.element_of(_restrict(b_t))
    e = a.element_of(iff(a.rep(x), a.rep(y)))
    assert congruence_generated(a, [(x, y)]) == congruence_generated(a, [(e, a.top)])


def _restrict(t):
    from svrunify.syntax import apply_substitution

    s = Substitution.from_map({"r": var("p")}, domain=("p", "q", "r"), codomain=("p", "q"))
    return apply_substitution(s, t)


@pytest.mark.parametrize("sig,names", [(ISL, "pq"), (LC, "p"), (NIS, "p"), (LC, "")])
def test_congruence_methods_agree(sig, names):
    a = free_algebra(sig, tuple(names))
    fast = enumerate_congruences(a, method="filters")
    slow = enumerate_congruences(a, method="closure")
    assert [c.labels for c in fast] == [c.labels for c in slow]
    assert all(c.is_congruence() for c in fast)


def test_congruences_are_determined_by_top_block():
    a = free_algebra(ISL, ("p", "q"))
    cs = enumerate_congruences(a, method="closure")
    assert len({c.top_block() for c in cs}) == len(cs)


def test_first_isomorphism_theorem():
    a = free_algebra(ISL, ("p", "q"))
    for h in enumerate_homomorphisms(a, a)[::17]:
        onto, inc = image_factorization(h)
        q, _ = quotient(a, h.kernel())
        assert is_isomorphic(q, onto.target)
        assert onto.then(inc).mapping == h.mapping
        assert inc.is_injective() and onto.is_surjective()


def test_quotient_projection_is_a_homomorphism():
    a = free_algebra(LC, ("p",))
    for c in enumerate_congruences(a):
        q, proj = quotient(a, c)
        assert proj.is_homomorphism() and proj.is_surjective()
        assert proj.kernel() == c
        audit(q)


def test_presented_algebra_matches_quotient_of_free():
    rel = (parse_term("p -> q", ISL), top())
    pres = Presentation(ISL, ("p", "q"), (rel,))
    direct = presented_algebra(pres)
    via_free, _ = finitely_presented(pres)
    assert direct.size == via_free.size
    assert is_isomorphic(direct, via_free)
    assert direct.element_of(parse_term("p -> q", ISL)) == direct.top


def test_presented_algebra_respects_budget():
    pres = Presentation(ISL, ("x", "y", "z"), ((parse_term("((x -> z) /\\ (y -> z)) -> z", ISL), top()),))
    with pytest.raises(ResourceExceeded):
        presented_algebra(pres, Budget(max_algebra_size=100))


def test_filter_congruence_top_block_is_principal_filter():
    a = free_algebra(ISL, ("p", "q"))
    for e in range(a.size):
        block = set(filter_congruence(a, e).top_block())
        assert block == {b for b in range(a.size) if a.leq(e, b)}


subs = st.fixed_dictionaries({"p": isl_terms, "q": isl_terms})


@settings(max_examples=30)
@given(subs, subs)
def test_eta_is_functorial(m1, m2):
    s1 = Substitution.from_map(_clip(m1), domain=("p", "q"), codomain=("p", "q"))
    s2 = Substitution.from_map(_clip(m2), domain=("p", "q"), codomain=("p", "q"))
    from svrunify.syntax import compose

    assert eta(compose(s2, s1)).mapping == eta(s1).then(eta(s2)).mapping


def _clip(m):
    return {k: _restrict(t) for k, t in m.items()}


def test_eta_is_a_bijection_on_classes():
    f2 = free_algebra(ISL, ("p", "q"))
    homs = enumerate_homomorphisms(f2, f2)
    round_trip = {eta(substitution_of(h)).mapping for h in homs}
    assert round_trip == {h.mapping for h in homs}


def test_generated_subalgebra_of_generators_is_everything():
    a = free_algebra(NIS, ("p",))
    sub, inc = generated_subalgebra(a, [a.gen("p")])
    assert sub.size == a.size and inc.is_injective()
    assert np.all(np.asarray(inc.mapping) == np.arange(a.size))
