"""Forall-factorizations: finitely many C-free formula sets approximating Delta.

A congruence theta on F(X) qualifies when its top block, read as a set of
formulas, entails Delta.  Qualifying congruences form an up-set, and the
factorization consists of its minimal elements.  In the three varieties here
every congruence is cg(a, T), so each factor is a single formula rep(a).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from svrunify.algebra import (
    Congruence,
    FiniteAlgebra,
    enumerate_congruences,
    filter_congruence,
    free_algebra,
)
from svrunify.budget import DEFAULT_BUDGET, Budget, ResourceExceeded
from svrunify.posets import Poset, rooted_posets_up_to
from svrunify.syntax import (
    LC,
    Signature,
    Substitution,
    Term,
    apply_substitution,
    big_conj,
    signature,
    term_vars,
    varset,
)
from svrunify.varieties import KripkeModel, entails_all


@dataclass(frozen=True)
class Factor:
    formulas: tuple[Term, ...]
    congruence: Congruence | None = field(default=None, compare=False)

    def __str__(self) -> str:
        from svrunify.syntax import print_term

        return "{" + ", ".join(print_term(t) for t in self.formulas) + "}"


@dataclass(frozen=True)
class ForallFactorization:
    sig: Signature
    bound: tuple[str, ...]
    free: tuple[str, ...]
    delta: tuple[Term, ...]
    factors: tuple[Factor, ...]
    method: str = "enumeration"
    algebra: FiniteAlgebra | None = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        from svrunify.syntax import print_term

        return {
            "variety": self.sig.tag,
            "bound": list(self.bound),
            "free": list(self.free),
            "delta": [print_term(t) for t in self.delta],
            "factors": [[print_term(t) for t in f.formulas] for f in self.factors],
            "method": self.method,
        }


def _split(delta: Sequence[Term], c: Iterable[str], free: Iterable[str] | None):
    bound = varset(c)
    xs = varset(set(term_vars(delta)) - set(bound)) if free is None else varset(free)
    if set(xs) & set(bound):
        raise ValueError("free and bound variables overlap")
    return bound, xs


def qualifies(theta: Sequence[Term], delta: Sequence[Term], sig: Signature | str, budget: Budget = DEFAULT_BUDGET) -> bool:
    return entails_all(sig, theta, delta, budget)


def top_block_formulas(c: Congruence) -> tuple[Term, ...]:
    """The least element of the top block, as a one-formula set."""
    a = c.algebra
    block = c.top_block()
    least = a.top
    for e in block:
        least = int(a.tables["and"][least, e])
    return (a.rep(least),)


def minimal_congruences(cands: Sequence[Congruence]) -> list[Congruence]:
    """Keep the candidates with no other candidate strictly below them."""
    if not cands:
        return []
    L = np.array([c.labels for c in cands])
    keep = []
    for i, c in enumerate(cands):
        # cands[j] <= c  iff  L[i][L[j]] == L[i]
        below = np.all(L[i][L] == L[i][None, :], axis=1)
        same = np.all(L == L[i][None, :], axis=1)
        if not np.any(below & ~same):
            keep.append(c)
    return keep


def forall_factorize(
    delta: Sequence[Term],
    c: Iterable[str],
    sig: Signature | str,
    budget: Budget = DEFAULT_BUDGET,
    free: Iterable[str] | None = None,
) -> ForallFactorization:
    sig = signature(sig)
    delta = tuple(delta)
    bound, xs = _split(delta, c, free)
    if not set(term_vars(delta)) & set(bound):
        return ForallFactorization(sig, bound, xs, delta, (Factor(delta),), "trivial")
    alg = free_algebra(sig, xs, budget)
    budget.check("congruences", "max_congruences", alg.size)
    qualifying: list[Congruence] = []
    for e in range(alg.size):
        if qualifies((alg.rep(e),), delta, sig, budget):
            qualifying.append(filter_congruence(alg, e))
    minimal = minimal_congruences(qualifying)
    factors = tuple(Factor(top_block_formulas(m), m) for m in minimal)
    return ForallFactorization(sig, bound, xs, delta, factors, "enumeration", alg)


def verify_factor(
    theta: Sequence[Term],
    delta: Sequence[Term],
    c: Iterable[str],
    sig: Signature | str = LC,
    budget: Budget = DEFAULT_BUDGET,
) -> bool:
    """Condition (1): theta avoids the bound variables and entails every member of delta."""
    if set(term_vars(theta)) & set(c):
        return False
    return entails_all(sig, theta, delta, budget)


# ------------------------------------------------------------ audits


@dataclass(frozen=True)
class AuditReport:
    condition1: bool
    condition2: bool
    incomparable: bool
    qualifying: int
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.condition1 and self.condition2 and self.incomparable


def audit_factorization(fz: ForallFactorization, budget: Budget = DEFAULT_BUDGET) -> AuditReport:
    """Re-check both conditions against the generic congruence enumeration."""
    failures = []
    c1 = all(verify_factor(f.formulas, fz.delta, fz.bound, fz.sig, budget) for f in fz.factors)
    if not c1:
        failures.append("a factor does not entail delta")
    alg = fz.algebra if fz.algebra is not None else free_algebra(fz.sig, fz.free, budget)
    congs = enumerate_congruences(alg, budget, method="closure")
    fcongs = [
        f.congruence if f.congruence is not None else filter_congruence(alg, alg.element_of(big_conj(f.formulas)))
        for f in fz.factors
    ]
    count = 0
    c2 = True
    for theta in congs:
        block = [alg.rep(e) for e in theta.top_block()]
        if not qualifies(block, fz.delta, fz.sig, budget):
            continue
        count += 1
        if not any(fc <= theta for fc in fcongs):
            c2 = False
            failures.append(f"qualifying congruence {theta.labels} lies above no factor")
    inc = all(not (a <= b) for i, a in enumerate(fcongs) for j, b in enumerate(fcongs) if i != j)
    if not inc:
        failures.append("factors are comparable")
    return AuditReport(c1, c2, inc, count, tuple(failures))


# ----------------------------------------------- bisimulation expansions


def duplicate_world(frame: Poset, y: int) -> Poset:
    """Add a copy y' of world y sitting immediately above y (index n)."""
    n = frame.n
    new = 1 << n
    up = []
    for w in range(n):
        m = frame.up[w]
        if m >> y & 1:
            m |= new
        up.append(m)
    up.append(new | (frame.up[y] & ~(1 << y)))
    return Poset(n + 1, tuple(up))


def expand_valuation(model: KripkeModel, y: int) -> KripkeModel:
    """Bisimulation expansion: the copy of y gets y's valuation."""
    frame = duplicate_world(model.frame, y)
    val = tuple((v, m | ((m >> y & 1) << model.frame.n)) for v, m in model.valuation)
    return KripkeModel(frame, val)


def _rooted_prelinear(max_worlds: int) -> list[Poset]:
    return [p for p in rooted_posets_up_to(max_worlds) if p.is_prelinear()]


@dataclass(frozen=True)
class ExpansionReport:
    ok: bool
    models_checked: int
    counterexample: KripkeModel | None = None


def expansion_certificate(
    theta: Sequence[Term],
    delta: Sequence[Term],
    c: Iterable[str],
    max_worlds: int = 4,
) -> ExpansionReport:
    """Bounded semantic check that every C-free consequence of delta follows from theta.

    For every rooted prelinear model (at most ``max_worlds`` worlds) whose
    root refutes theta, look for an X-bisimilar model (the model itself, or one
    world duplicated) and a valuation of the bound variables that refutes
    delta at the root.  Success certifies condition (2) for a single factor
    over models of that size.
    """
    bound = varset(c)
    xs = varset(set(term_vars(list(theta) + list(delta))) - set(bound))
    goal = big_conj(theta)
    dconj = big_conj(delta)
    checked = 0
    for frame in _rooted_prelinear(max_worlds):
        root = next(w for w in range(frame.n) if frame.up[w] == frame.full)
        ups = frame.upsets()
        for choice in product(ups, repeat=len(xs)):
            m = KripkeModel(frame, tuple(zip(xs, choice)))
            if m.forces(goal) >> root & 1:
                continue
            checked += 1
            if not _refutable(m, root, dconj, bound):
                return ExpansionReport(False, checked, m)
    return ExpansionReport(True, checked)


def _refutable(m: KripkeModel, root: int, dconj: Term, bound: tuple[str, ...]) -> bool:
    candidates = [m] + [expand_valuation(m, y) for y in range(m.frame.n)]
    for cand in candidates:
        for choice in product(cand.frame.upsets(), repeat=len(bound)):
            full = KripkeModel(cand.frame, cand.valuation + tuple(zip(bound, choice)))
            if not full.forces(dconj) >> root & 1:
                return True
    return False


@dataclass(frozen=True)
class Certification:
    factorization: ForallFactorization
    path: str
    detail: str


def certify_supplied(
    factors: Sequence[Sequence[Term]],
    delta: Sequence[Term],
    c: Iterable[str],
    sig: Signature | str,
    budget: Budget = DEFAULT_BUDGET,
    expansion_worlds: int = 4,
) -> Certification:
    """Accept user factors only after checking both factorization conditions.

    Condition (2) is checked by enumeration when F(X) fits the budget and by
    the bounded bisimulation-expansion search otherwise (LC, one factor).
    Raises ValueError when a check fails and ResourceExceeded when neither
    route is available.
    """
    sig = signature(sig)
    delta = tuple(delta)
    bound, xs = _split(delta, c, set(term_vars([t for f in factors for t in f])) | (set(term_vars(delta)) - set(c)))
    facs = tuple(Factor(tuple(f)) for f in factors)
    for f in facs:
        if not verify_factor(f.formulas, delta, bound, sig, budget):
            raise ValueError(f"supplied factor {f} does not entail the premises or mentions bound variables")
    fz = ForallFactorization(sig, bound, xs, delta, facs, "supplied")
    try:
        computed = forall_factorize(delta, bound, sig, budget, free=xs)
    except ResourceExceeded:
        computed = None
    if computed is not None:
        # each computed factor must entail a supplied one and conversely
        ok = all(
            any(entails_all(sig, g.formulas, f.formulas, budget) for f in facs) for g in computed.factors
        )
        if not ok:
            raise ValueError("supplied factors miss a qualifying congruence")
        return Certification(fz, "factor-verified", "condition (2) by congruence enumeration")
    if sig is LC and len(facs) == 1:
        rep = expansion_certificate(facs[0].formulas, delta, bound, expansion_worlds)
        if not rep.ok:
            raise ValueError("bisimulation-expansion search found a model refuting the factor but not delta")
        return Certification(
            fz,
            "factor-verified",
            f"condition (2) by bisimulation expansion over {rep.models_checked} prelinear models "
            f"with at most {expansion_worlds} worlds",
        )
    raise ResourceExceeded("condition (2) certification for supplied factors", budget.max_algebra_size)


# -------------------------------------------------------- pullback stability


@dataclass(frozen=True)
class PullbackReport:
    ok: bool
    pulled: tuple[Factor, ...]
    fresh: tuple[Factor, ...]
    failures: tuple[str, ...] = ()


def pullback_stability(
    delta: Sequence[Term],
    c: Iterable[str],
    s: Substitution,
    sig: Signature | str,
    budget: Budget = DEFAULT_BUDGET,
) -> PullbackReport:
    """Pull factors back along s and compare with the factorization of s(delta)."""
    sig = signature(sig)
    bound = varset(c)
    delta = tuple(delta)
    if set(s.domain) & set(bound) or set(s.codomain) & set(bound):
        raise ValueError("the substitution must act on free variables and avoid the bound ones")
    fz = forall_factorize(delta, bound, sig, budget, free=s.domain)
    ext = Substitution.from_map(
        s.as_dict(), domain=s.domain + bound, codomain=s.codomain + bound
    )
    s_delta = tuple(apply_substitution(ext, t) for t in delta)
    pulled = tuple(Factor(tuple(apply_substitution(s, t) for t in f.formulas)) for f in fz.factors)
    fresh = forall_factorize(s_delta, bound, sig, budget, free=s.codomain)
    failures = []
    for f in pulled:
        if not entails_all(sig, f.formulas, s_delta, budget):
            failures.append(f"pulled factor {f} does not entail s(delta)")
        if not any(entails_all(sig, f.formulas, g.formulas, budget) for g in fresh.factors):
            failures.append(f"pulled factor {f} is dominated by no fresh factor")
    for g in fresh.factors:
        if not any(entails_all(sig, g.formulas, f.formulas, budget) for f in pulled):
            failures.append(f"fresh factor {g} entails no pulled factor")
    return PullbackReport(not failures, pulled, fresh.factors, tuple(failures))


def pullback_stability_test(delta, c, s, sig, budget: Budget = DEFAULT_BUDGET) -> bool:
    return pullback_stability(delta, c, s, sig, budget).ok
