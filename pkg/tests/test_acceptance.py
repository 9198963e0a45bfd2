"""Acceptance criteria A1-A8, one test each, with wall-clock limits.

Each test records a PASS/FAIL line (criterion, elapsed, limit) that is printed
in the terminal summary.
"""

import random
import time
from contextlib import contextmanager
from itertools import product
from pathlib import Path

import numpy as np

from svrunify.admissibility import (
    ADMISSIBLE,
    FACTOR_VERIFIED,
    NOT_ADMISSIBLE,
    _assert_witness,
    certify_tt_converse,
    check_admissible,
    premise_problem,
    tt_rule,
)
from svrunify.algebra import audit, free_algebra
from svrunify.budget import DEFAULT_BUDGET
from svrunify.interpolation import audit_factorization, forall_factorize, pullback_stability_test, verify_factor
from svrunify.sposet import (
    build_retract,
    dual_algebra,
    dual_of_map,
    embeddings_up_to,
    is_morphism,
    is_projective_dual,
    morphisms,
    retracts,
    sposets_up_to,
)
from svrunify.syntax import (
    ISL,
    LC,
    Pi2Rule,
    Substitution,
    conj,
    disj,
    imp,
    neg,
    parse_term,
    top,
    var,
)
from svrunify.unification import UnificationProblem, basis_dominates, check_unifier, more_general, svr_unify, unify
from svrunify.varieties import isl_valid, lc_valid, prelinear_frame_valid

from conftest import ACCEPTANCE_LINES

DATA = Path(__file__).parent / "data"
ISL_DELTA = parse_term("((x -> z) /\\ (y -> z)) -> z", ISL)


@contextmanager
def criterion(name: str, limit: float):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        ok = ok and elapsed < limit
        ACCEPTANCE_LINES.append(f"{name}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f} s, limit {limit:.0f} s)")
    assert elapsed < limit, f"{name} took {elapsed:.1f} s, limit {limit} s"


# ---------------------------------------------------------------------- A1


def test_a1_isl_svr_example():
    with criterion("A1 ISL svr example", 60):
        problem = UnificationProblem(ISL, ("x", "y", "z"), ((ISL_DELTA, top()),), ("z",))
        basis = svr_unify(problem)
        expected = [
            Substitution.from_map({"x": top()}, domain=("x", "y", "z")),
            Substitution.from_map({"y": top()}, domain=("x", "y", "z")),
        ]
        assert len(basis.unifiers) == 2
        for e in expected:
            assert sum(more_general(e, b, ISL, fixed=("z",)) and more_general(b, e, ISL, fixed=("z",)) for b in basis.unifiers) == 1
        a, b = basis.unifiers
        assert not more_general(a, b, ISL, fixed=("z",)) and not more_general(b, a, ISL, fixed=("z",))

        # every C-invariant unifier whose codomain has at most one variable besides z
        checked = 0
        for fresh in ((), ("w",)):
            small = free_algebra(ISL, fresh)
            for ix, iy in product(range(small.size), repeat=2):
                sigma = Substitution.from_map(
                    {"x": small.rep(ix), "y": small.rep(iy)}, domain=("x", "y", "z"), codomain=fresh + ("z",)
                )
                checked += 1
                if not check_unifier(problem, sigma):
                    continue
                assert not all(more_general(sigma, u, ISL, fixed=("z",)) for u in basis.unifiers), sigma
        assert checked == 5


# ---------------------------------------------------------------------- A2


def test_a2_tt_rule():
    with criterion("A2 TT rule", 120):
        rule = tt_rule()
        factor = parse_term("g -> ((p -> q) \\/ c)", LC)
        assert verify_factor([factor], rule.premises, rule.bound, LC)
        cert = certify_tt_converse(max_worlds=4)
        assert cert.ok, cert.failures[:3]
        assert cert.refuting > 0
        v = check_admissible(rule, factorization=[[factor]])
        assert v.verdict == ADMISSIBLE and v.path == FACTOR_VERIFIED


# ---------------------------------------------------------------------- A3


def _corpus():
    return [parse_term(line, ISL) for line in (DATA / "isl_corpus.txt").read_text().splitlines() if line.strip()]


def test_a3_factorization_audit():
    with criterion("A3 forall-factorization audit", 300):
        corpus = _corpus()
        assert len(corpus) == 50
        for delta in corpus:
            fz = forall_factorize([delta], ("z",), ISL, free=("x", "y"))
            report = audit_factorization(fz)
            assert report.condition1 and report.condition2, (str(delta), report.failures)


# ---------------------------------------------------------------------- A4

A4_SUBSTITUTIONS = [
    {},
    {"x": "y", "y": "x"},
    {"x": "T"},
    {"y": "T"},
    {"x": "x /\\ y"},
    {"x": "y -> x"},
    {"x": "y", "y": "y"},
    {"x": "(x -> y) -> y"},
    {"x": "x -> y", "y": "y -> x"},
    {"x": "x /\\ y", "y": "x -> y"},
]


def test_a4_pullback_stability():
    with criterion("A4 pullback stability", 60):
        for images in A4_SUBSTITUTIONS:
            s = Substitution.from_map(
                {k: parse_term(v, ISL) for k, v in images.items()}, domain=("x", "y"), codomain=("x", "y")
            )
            assert pullback_stability_test([ISL_DELTA], ("z",), s, ISL), images


# ---------------------------------------------------------------------- A5


def test_a5_sposet_suite():
    with criterion("A5 S-poset suite", 600):
        small = sposets_up_to(4)
        # (a) projective iff every embedding into |Y| <= 5 has a retract
        for x in small:
            proj = is_projective_dual(x)
            every_has_retract = True
            for e in embeddings_up_to(x, 5):
                if proj:
                    r = build_retract(e)
                    assert is_morphism(r) and e.then(r).images == tuple(range(x.n))
                elif next(retracts(e), None) is None:
                    every_has_retract = False
                    break
            assert every_has_retract == proj, x
        # (b) surjective images of projective S-posets are projective, and
        # (d) dual maps: injective iff surjective, surjective iff total and injective
        for x, y in product(small, repeat=2):
            px = is_projective_dual(x)
            for f in morphisms(x, y):
                h = dual_of_map(f, check=False)
                assert h.is_homomorphism()
                assert h.is_injective() == f.is_surjective()
                assert h.is_surjective() == (f.is_total() and f.is_injective())
                if px and f.is_surjective():
                    assert is_projective_dual(y), (x, y, f)
        # (c) nucleus axioms on every dual algebra up to five points
        for x in sposets_up_to(5):
            audit(dual_algebra(x))


# ---------------------------------------------------------------------- A6

A6_PRESENTATIONS = [
    ("x", "y"),
    ("x -> y", "y"),
    ("(x -> y) -> y", "x"),
    ("x /\\ y", "x"),
    ("(x -> y) /\\ (y -> x)", "T"),
    ("((x -> y) -> x) -> x", "T"),
    ("x -> y", "y -> x"),
    ("(x -> y) -> x", "T"),
    ("x", "x -> y"),
    ("((x -> y) -> y) -> x", "T"),
    ("((x -> z) /\\ (y -> z)) -> z", "T"),
    ("x -> (y /\\ z)", "T"),
    ("(x -> y) /\\ (y -> z)", "T"),
    ("(x -> y) -> z", "z -> x"),
    ("x /\\ y", "y /\\ z"),
    ("((x -> y) -> z) -> z", "T"),
    ("(x -> y) /\\ (y -> z) /\\ (z -> x)", "T"),
    ("x -> y", "z"),
    ("(z -> x) -> y", "y -> z"),
    ("((x /\\ y) -> z) -> x", "T"),
]


def _sample_unifiers(problem, rng, count):
    """Random substitutions into the free algebra over two fresh variables, kept if they unify."""
    fresh = free_algebra(ISL, ("u", "v"))
    xs = problem.variables
    grids = np.indices((fresh.size,) * len(xs)).reshape(len(xs), -1)
    asg = {v: grids[i] for i, v in enumerate(xs)}
    ok = np.ones(grids.shape[1], dtype=bool)
    for lhs, rhs in problem.pairs:
        ok &= np.asarray(fresh.evaluate(lhs, asg)) == np.asarray(fresh.evaluate(rhs, asg))
    hits = np.nonzero(ok)[0]
    assert len(hits), "problem has no unifier into two fresh variables"
    picks = rng.choice(hits, size=count, replace=len(hits) < count)
    out = []
    for j in picks:
        images = {v: fresh.rep(int(grids[i, j])) for i, v in enumerate(xs)}
        s = Substitution.from_map(images, domain=xs, codomain=("u", "v"))
        assert check_unifier(problem, s)
        out.append(s)
    return out


def test_a6_basis_completeness():
    with criterion("A6 basis completeness", 300):
        rng = np.random.default_rng(6)
        for lhs, rhs in A6_PRESENTATIONS:
            a, b = parse_term(lhs, ISL), parse_term(rhs, ISL)
            vs = tuple(sorted(a.variables() | b.variables()))
            problem = UnificationProblem(ISL, vs, ((a, b),))
            basis = unify(problem)
            assert basis.unifiers
            for s in _sample_unifiers(problem, rng, 200):
                assert basis_dominates(basis, s), (lhs, rhs, str(s))


# ---------------------------------------------------------------------- A7


def test_a7_non_admissibility_witness():
    with criterion("A7 non-admissibility witness", 60):
        rule = Pi2Rule(("z",), (ISL_DELTA,), var("x"), ISL)
        v = check_admissible(rule)
        assert v.verdict == NOT_ADMISSIBLE and v.witness is not None
        _assert_witness(premise_problem(rule), rule, v.witness, DEFAULT_BUDGET)


# ---------------------------------------------------------------------- A8


def _random_formula(rng, sig, depth):
    names = ("p", "q", "r")
    if depth == 0 or rng.random() < 0.3:
        leaves = [var(n) for n in names] + [top()]
        if sig is LC:
            leaves.append(parse_term("F", LC))
        return rng.choice(leaves)
    ops = [conj, imp, imp] + ([disj, disj] if sig is LC else [])
    if sig is LC and rng.random() < 0.15:
        return neg(_random_formula(rng, sig, depth - 1))
    return rng.choice(ops)(_random_formula(rng, sig, depth - 1), _random_formula(rng, sig, depth - 1))


def _formula_batch(sig, seed, count=200):
    """Random formulas, half of them wrapped as a -> a-style near-theorems so both answers occur."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        t = _random_formula(rng, sig, 4)
        if rng.random() < 0.5:
            u = _random_formula(rng, sig, 2)
            t = imp(conj(t, u), rng.choice([t, u, conj(u, t), _random_formula(rng, sig, 2)]))
        out.append(t)
    return out


def test_a8_engine_cross_validation():
    with criterion("A8 engine cross-validation", 300):
        lc_batch = _formula_batch(LC, 8)
        lc_answers = [lc_valid(t) for t in lc_batch]
        for t, a in zip(lc_batch, lc_answers):
            assert a == prelinear_frame_valid(t, max_worlds=5), str(t)
        isl_batch = _formula_batch(ISL, 9)
        isl_answers = [isl_valid(t, method="sequent") for t in isl_batch]
        for t, a in zip(isl_batch, isl_answers):
            assert a == isl_valid(t, method="kripke"), str(t)
        # both outcomes must be represented for the comparison to mean anything
        assert 20 < sum(lc_answers) < 180 and 20 < sum(isl_answers) < 180
