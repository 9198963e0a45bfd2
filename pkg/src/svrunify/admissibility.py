"""Admissibility of Pi2-rules.

A rule forall C (Delta) / psi is admissible when every C-invariant unifier of
Delta makes psi a theorem.  Every such unifier is an instance of a member of a
C-unification basis, and theoremhood is preserved by instances, so checking
the (finite) basis decides the question.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from svrunify.algebra import free_algebra
from svrunify.budget import DEFAULT_BUDGET, Budget, ResourceExceeded
from svrunify.interpolation import expand_valuation
from svrunify.syntax import (
    LC,
    Pi2Rule,
    Substitution,
    Term,
    apply_substitution,
    parse_term,
    print_term,
    signature,
    term_vars,
    top,
    varset,
)
from svrunify.unification import UnificationProblem, check_unifier, svr_unify_detailed
from svrunify.varieties import KripkeModel, valid

ADMISSIBLE = "ADMISSIBLE"
NOT_ADMISSIBLE = "NOT_ADMISSIBLE"
UNDECIDED = "UNDECIDED_RESOURCE"

SYNTHESIZED = "factorization-synthesized"
FACTOR_VERIFIED = "factor-verified"


@dataclass(frozen=True)
class AdmissibilityVerdict:
    verdict: str
    witness: Substitution | None = None
    path: str | None = None
    basis: tuple[Substitution, ...] = ()
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": None if self.witness is None else {v: print_term(self.witness[v]) for v in self.witness.domain},
            "certification": self.path,
            "basis": [{v: print_term(s[v]) for v in s.domain} for s in self.basis],
            "notes": list(self.notes),
        }


def rule_from_json(data: Mapping | str) -> tuple[Pi2Rule, list[list[Term]] | None]:
    if isinstance(data, str):
        data = json.loads(data)
    sig = signature(data["variety"])
    premises = tuple(parse_term(t, sig) for t in data["premises"])
    conclusion = parse_term(data["conclusion"], sig)
    rule = Pi2Rule(tuple(data.get("bound", ())), premises, conclusion, sig)
    fz = data.get("factorization")
    factors = None if fz is None else [[parse_term(t, sig) for t in f] for f in fz]
    return rule, factors


def premise_problem(rule: Pi2Rule) -> UnificationProblem:
    variables = varset(set(rule.free) | set(rule.bound))
    return UnificationProblem(rule.sig, variables, tuple((p, top()) for p in rule.premises), rule.bound)


def _assert_witness(problem: UnificationProblem, rule: Pi2Rule, w: Substitution, budget: Budget) -> None:
    if not check_unifier(problem, w, budget):
        raise AssertionError(f"witness {w} does not unify the premises")
    if valid(rule.sig, apply_substitution(w, rule.conclusion), budget):
        raise AssertionError(f"witness {w} does not refute the conclusion")


def check_admissible(
    rule: Pi2Rule,
    budget: Budget = DEFAULT_BUDGET,
    factorization: Sequence[Sequence[Term]] | None = None,
) -> AdmissibilityVerdict:
    """Decide the rule through a C-unification basis of its premises."""
    problem = premise_problem(rule)
    path = FACTOR_VERIFIED if factorization is not None else SYNTHESIZED
    notes: list[str] = []
    if rule.sig.tag == "nis":
        notes.append(f"NIS validity relative to rooted S-posets with at most {budget.nis_model_bound} points")
    try:
        result = svr_unify_detailed(problem, budget, factorization)
    except ResourceExceeded as exc:
        return AdmissibilityVerdict(UNDECIDED, None, path, (), tuple(notes + [str(exc)]))
    basis = result.basis.unifiers
    notes.extend(result.basis.notes)
    if not basis:
        notes.append("vacuous: the premises have no C-invariant unifier")
        return AdmissibilityVerdict(ADMISSIBLE, None, path, (), tuple(notes))
    for s in basis:
        if not valid(rule.sig, apply_substitution(s, rule.conclusion), budget):
            _assert_witness(problem, rule, s, budget)
            return AdmissibilityVerdict(NOT_ADMISSIBLE, s, path, basis, tuple(notes))
    return AdmissibilityVerdict(ADMISSIBLE, None, path, basis, tuple(notes))


def falsify_admissibility(rule: Pi2Rule, budget: Budget = DEFAULT_BUDGET) -> Substitution | None:
    """Search small C-invariant substitutions for a counterexample; no verdict claim.

    Tries the identity first, then every map of the free variables into the
    free algebra over a subset W of them (|W| <= max_fresh_vars), skipping
    codomains whose candidate space exceeds the budget.
    """
    problem = premise_problem(rule)
    sig, cs = rule.sig, rule.bound
    xs = problem.free
    ident = Substitution.identity(problem.variables)
    if check_unifier(problem, ident, budget) and not valid(sig, rule.conclusion, budget):
        return ident
    for k in range(0, min(len(xs), budget.max_fresh_vars) + 1):
        for w in combinations(xs, k):
            try:
                small = free_algebra(sig, w, budget)
                big = free_algebra(sig, varset(set(w) | set(cs)), budget)
            except ResourceExceeded:
                continue
            total = small.size ** len(xs)
            if total > budget.max_candidates:
                continue
            found = _search(rule, problem, xs, small, big, budget)
            if found is not None:
                return found
    return None


def _search(rule, problem, xs, small, big, budget) -> Substitution | None:
    grids = np.indices((small.size,) * len(xs)).reshape(len(xs), -1)
    embed = np.array([big.element_of(small.rep(e)) for e in range(small.size)])
    asg_big = {v: embed[grids[i]] for i, v in enumerate(xs)}
    for c in rule.bound:
        asg_big[c] = big.gen(c)
    ok = np.ones(grids.shape[1], dtype=bool)
    memo: dict = {}
    for p in rule.premises:
        ok &= np.broadcast_to(np.asarray(big.evaluate(p, asg_big, memo)) == big.top, ok.shape)
    asg_small = {v: grids[i] for i, v in enumerate(xs)}
    concl = np.broadcast_to(np.asarray(small.evaluate(rule.conclusion, asg_small)), ok.shape)
    hits = np.nonzero(ok & (concl != small.top))[0]
    if not len(hits):
        return None
    j = hits[0]
    images = {v: small.rep(int(grids[i, j])) for i, v in enumerate(xs)}
    codomain = varset(set(term_vars(list(images.values()))) | set(rule.bound))
    s = Substitution.from_map(images, domain=problem.variables, codomain=codomain)
    _assert_witness(problem, rule, s, budget)
    return s


# ------------------------------------------------------ TT expansion refuter

TT_PREMISE = "g -> ((p -> r) \\/ (r -> q) \\/ c)"
TT_CONCLUSION = "g -> ((p -> q) \\/ c)"


class ConfigurationAbsent(ValueError):
    pass


def tt_rule() -> Pi2Rule:
    return Pi2Rule(("r",), (parse_term(TT_PREMISE, LC),), parse_term(TT_CONCLUSION, LC), LC)


def _tt_configuration(model: KripkeModel, x: int | None):
    p = model.frame
    val = dict(model.valuation)
    g, pp, q, c = (val.get(v, 0) for v in ("g", "p", "q", "c"))
    starts = range(p.n) if x is None else [w for w in range(p.n) if p.leq(x, w)]
    for x2 in starts:
        if not (g >> x2 & 1) or (c >> x2 & 1):
            continue
        for y in range(p.n):
            if p.leq(x2, y) and (pp >> y & 1) and not (q >> y & 1):
                return x2, y
    return None


def is_bounded_morphism(big: KripkeModel, small: KripkeModel, f: Sequence[int]) -> bool:
    """f preserves the valuation, is monotone, and has the back condition."""
    bp, sp = big.frame, small.frame
    sval = dict(small.valuation)
    for v, m in big.valuation:
        if v not in sval:
            continue
        for w in range(bp.n):
            if (m >> w & 1) != (sval[v] >> f[w] & 1):
                return False
    for w in range(bp.n):
        for u in range(bp.n):
            if bp.leq(w, u) and not sp.leq(f[w], f[u]):
                return False
        for t in range(sp.n):
            if sp.leq(f[w], t) and not any(bp.leq(w, u) and f[u] == t for u in range(bp.n)):
                return False
    return True


def tt_expansion_refuter(model: KripkeModel, x: int | None = None) -> KripkeModel:
    """Duplicate a world y to refute the TT premise where the conclusion fails.

    Needs worlds x' >= x and y >= x' with x' |= g, x' |/= c, y |= p, y |/= q.
    The copy y' sits immediately above y with y's valuation, and r holds at
    y' and strictly above y.  The result is prelinear, persistent, maps onto
    the input by a bounded morphism, and refutes the premise at x.
    """
    if not model.frame.is_prelinear():
        raise ValueError("model is not prelinear")
    found = _tt_configuration(model, x)
    if found is None:
        raise ConfigurationAbsent("no world pair matching the refuting configuration")
    x2, y = found
    base = KripkeModel(model.frame, tuple((v, m) for v, m in model.valuation if v != "r"))
    expanded = expand_valuation(base, y)
    frame = expanded.frame
    r_mask = frame.up[y] & ~(1 << y)
    out = KripkeModel(frame, expanded.valuation + (("r", r_mask),))
    premise = parse_term(TT_PREMISE, LC)
    at = x2 if x is None else x
    f = list(range(model.frame.n)) + [y]
    if not (frame.is_prelinear() and out.is_persistent() and is_bounded_morphism(out, base, f)):
        raise AssertionError("expansion broke an invariant")
    if out.forces(premise) >> at & 1:
        raise AssertionError("expansion does not refute the premise")
    return out


@dataclass(frozen=True)
class TTCertificate:
    ok: bool
    models: int
    refuting: int
    failures: tuple[str, ...] = ()


def certify_tt_converse(max_worlds: int = 4) -> TTCertificate:
    """Every prelinear model refuting the TT conclusion at a world expands to refute the premise there."""
    from svrunify.varieties import prelinear_models

    conclusion = parse_term(TT_CONCLUSION, LC)
    models = refuting = 0
    failures = []
    for m in prelinear_models(("c", "g", "p", "q"), max_worlds):
        models += 1
        bad = m.forces(conclusion) ^ m.frame.full
        for x in range(m.frame.n):
            if bad >> x & 1:
                refuting += 1
                try:
                    tt_expansion_refuter(m, x)
                except (ConfigurationAbsent, AssertionError) as exc:
                    failures.append(f"{m}: {exc}")
    return TTCertificate(not failures, models, refuting, tuple(failures))
