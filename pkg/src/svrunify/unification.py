"""Unification bases, plain and with simple variable restrictions.

Plain unification has two routes.  When F(X) and the candidate space
F(X)^X fit the budget, every endomorphism of F(X) is tried and the unifiers
are pruned to their maximal elements.  Otherwise a projective unifier is
built (p -> phi -> p for ISL/NIS, iterated Loewenheim steps for LC) and
accepted only after checking that it unifies and that phi |- s(x) <-> x for
every x, which makes it a most general unifier.

Restricted problems go through a forall-factorization over the free
variables: each factor is unified on its own, the union is pruned, and the
results are extended by the identity on the restricted variables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from svrunify.algebra import FiniteAlgebra, free_algebra
from svrunify.budget import DEFAULT_BUDGET, Budget, ResourceExceeded
from svrunify.interpolation import ForallFactorization, certify_supplied, forall_factorize
from svrunify.syntax import (
    AND,
    BOT,
    ISL,
    LC,
    TOP,
    Signature,
    Substitution,
    Term,
    apply_substitution,
    big_conj,
    compose,
    conj,
    iff,
    imp,
    is_c_invariant,
    parse_term,
    print_term,
    signature,
    term_vars,
    top,
    var,
    varset,
)
from svrunify.varieties import entails, equivalent, valid

ENUMERATION = "enumeration-complete"
PROJECTIVE = "projective"
VERIFIED = "verified-against-factorization"


@dataclass(frozen=True)
class UnificationProblem:
    sig: Signature
    variables: tuple[str, ...]
    pairs: tuple[tuple[Term, Term], ...]
    restriction: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sig", signature(self.sig))
        object.__setattr__(self, "variables", varset(self.variables))
        object.__setattr__(self, "restriction", varset(self.restriction))
        if not set(self.restriction) <= set(self.variables):
            raise ValueError("restricted variables must be problem variables")
        used = set(term_vars([t for pr in self.pairs for t in pr]))
        if not used <= set(self.variables):
            raise ValueError(f"pair terms use undeclared variables {sorted(used - set(self.variables))}")

    @property
    def free(self) -> tuple[str, ...]:
        return tuple(v for v in self.variables if v not in self.restriction)

    def equations(self) -> tuple[Term, ...]:
        """Each pair as one formula that is a theorem exactly when the pair is unified."""
        out = []
        for s, t in self.pairs:
            if t.op == TOP:
                out.append(s)
            elif s.op == TOP:
                out.append(t)
            else:
                out.append(iff(s, t))
        return tuple(out)

    def unrestricted(self) -> UnificationProblem:
        return UnificationProblem(self.sig, self.variables, self.pairs)

    @classmethod
    def from_json(cls, data: Mapping | str, variety: str | None = None) -> UnificationProblem:
        if isinstance(data, str):
            data = json.loads(data)
        sig = signature(variety or data["variety"])
        pairs = tuple((parse_term(a, sig), parse_term(b, sig)) for a, b in data["pairs"])
        vs = data.get("vars")
        if vs is None:
            vs = term_vars([t for pr in pairs for t in pr])
        return cls(sig, tuple(vs), pairs, tuple(data.get("restriction", ())))

    def to_json(self) -> dict:
        return {
            "variety": self.sig.tag,
            "vars": list(self.variables),
            "restriction": list(self.restriction),
            "pairs": [[print_term(a), print_term(b)] for a, b in self.pairs],
        }


@dataclass(frozen=True)
class UnifierBasis:
    problem: UnificationProblem
    unifiers: tuple[Substitution, ...]
    certificate: str
    notes: tuple[str, ...] = ()

    @property
    def unifiable(self) -> bool:
        return bool(self.unifiers)

    def to_json(self) -> dict:
        return {
            "problem": self.problem.to_json(),
            "unifiable": self.unifiable,
            "basis": [{v: print_term(s[v]) for v in s.domain} for s in self.unifiers],
            "certificate": self.certificate,
            "notes": list(self.notes),
        }


# ------------------------------------------------------------------ checks


def check_unifier(p: UnificationProblem, s: Substitution, budget: Budget = DEFAULT_BUDGET) -> bool:
    """C-invariance plus variety equality of every substituted pair."""
    if not set(p.variables) <= set(s.domain):
        return False
    if p.restriction:
        if not set(p.restriction) <= set(s.codomain):
            return False
        if not is_c_invariant(s, p.restriction):
            return False
    for a, b in p.pairs:
        if not equivalent(p.sig, apply_substitution(s, a), apply_substitution(s, b), budget):
            return False
    return True


def _relevant(s: Substitution) -> tuple[str, ...]:
    return varset(term_vars(list(s.images)))


def more_general(
    sigma: Substitution,
    gamma: Substitution,
    sig: Signature | str = ISL,
    budget: Budget = DEFAULT_BUDGET,
    fixed: Iterable[str] = (),
) -> bool:
    """Is there theta with gamma = theta . sigma (modulo the variety)?

    theta ranges over maps from sigma's codomain into the free algebra over
    gamma's codomain.  Variables in ``fixed`` must be C-invariant in both and
    are compared by stripping them (theta then fixes them too).
    """
    sig = signature(sig)
    fixed = varset(fixed)
    if sigma.domain != gamma.domain:
        raise ValueError("substitutions have different domains")
    if fixed:
        for s in (sigma, gamma):
            if not (set(fixed) <= set(s.codomain) and is_c_invariant(s, fixed)):
                raise ValueError("restricted variables must be fixed by both substitutions")
        keep = [v for v in sigma.domain if v not in fixed]
        sigma = Substitution.from_map(
            {v: sigma[v] for v in keep}, domain=keep, codomain=[v for v in sigma.codomain if v not in fixed]
        )
        gamma = Substitution.from_map(
            {v: gamma[v] for v in keep}, domain=keep, codomain=[v for v in gamma.codomain if v not in fixed]
        )
    target = free_algebra(sig, gamma.codomain, budget)
    srcvars = _relevant(sigma)
    total = target.size ** len(srcvars)
    budget.check("generality witnesses", "max_candidates", total)
    goal = {v: target.element_of(gamma[v]) for v in sigma.domain}
    if srcvars:
        grids = np.indices((target.size,) * len(srcvars)).reshape(len(srcvars), -1)
        asg = {v: grids[i] for i, v in enumerate(srcvars)}
    else:
        asg = {}
    ok = np.ones(total, dtype=bool)
    memo: dict = {}
    for v in sigma.domain:
        val = target.evaluate(sigma[v], asg, memo)
        ok &= np.asarray(val) == goal[v]
        if not ok.any():
            return False
    return bool(ok.any())


def equivalent_unifiers(a: Substitution, b: Substitution, sig, budget=DEFAULT_BUDGET, fixed=()) -> bool:
    return more_general(a, b, sig, budget, fixed) and more_general(b, a, sig, budget, fixed)


def prune(
    unifiers: Sequence[Substitution], sig: Signature | str, budget: Budget = DEFAULT_BUDGET, fixed: Iterable[str] = ()
) -> list[Substitution]:
    """Maximal elements, one per equivalence class, smallest printed form wins ties."""
    order = sorted(unifiers, key=lambda s: (len(str(s)), str(s)))
    kept: list[Substitution] = []
    for s in order:
        if any(more_general(k, s, sig, budget, fixed) for k in kept):
            continue
        kept = [k for k in kept if not more_general(s, k, sig, budget, fixed)]
        kept.append(s)
    return sorted(kept, key=str)


# --------------------------------------------------------- plain unification


def _enumerate_unifiers(p: UnificationProblem, alg: FiniteAlgebra, budget: Budget):
    xs = p.variables
    total = alg.size ** len(xs)
    budget.check("candidate substitutions", "max_candidates", total)
    grids = np.indices((alg.size,) * len(xs)).reshape(len(xs), -1) if xs else np.zeros((0, 1), dtype=np.int64)
    asg = {v: grids[i] for i, v in enumerate(xs)}
    ok = np.ones(grids.shape[1], dtype=bool)
    memo: dict = {}
    for a, b in p.pairs:
        ok &= np.broadcast_to(np.asarray(alg.evaluate(a, asg, memo)) == np.asarray(alg.evaluate(b, asg, memo)), ok.shape)
    return grids[:, ok]


def _unify_by_enumeration(p: UnificationProblem, alg: FiniteAlgebra, budget: Budget) -> list[Substitution]:
    xs = p.variables
    cands = _enumerate_unifiers(p, alg, budget)
    if cands.shape[1] == 0:
        return []
    n = alg.size
    # a unifier s with phi |- s(x) <-> x for all x is most general
    phi = alg.element_of(big_conj(p.equations())) if p.pairs else alg.top
    meet = np.asarray(alg.tables[AND])[phi]
    proj = np.ones(cands.shape[1], dtype=bool)
    for i, v in enumerate(xs):
        proj &= meet[cands[i]] == meet[alg.gen(v)]
    if proj.any():
        cols = np.nonzero(proj)[0]
        subs = [_to_subst(xs, alg, cands[:, j]) for j in cols]
        best = min(subs, key=lambda s: (len(str(s)), str(s)))
        return [best]
    # general case: order by the number of instances inside End(F(X))
    budget.check("generality closure", "max_candidates", cands.shape[1] * n ** len(xs) // 64)
    grids = np.indices((n,) * len(xs)).reshape(len(xs), -1)
    asg = {v: grids[i] for i, v in enumerate(xs)}
    memo: dict = {}
    E = np.stack([np.broadcast_to(np.asarray(alg.evaluate(alg.rep(e), asg, memo)), grids.shape[1:]) for e in range(n)])
    weights = n ** np.arange(len(xs))[::-1]
    codes_of = {}
    for j in range(cands.shape[1]):
        col = cands[:, j]
        codes = np.zeros(grids.shape[1], dtype=np.int64)
        for i in range(len(xs)):
            codes += E[col[i]] * weights[i]
        codes_of[j] = np.unique(codes)
    own = {j: int(np.dot(cands[:, j], weights)) for j in range(cands.shape[1])}
    subs = {j: _to_subst(xs, alg, cands[:, j]) for j in range(cands.shape[1])}
    order = sorted(codes_of, key=lambda j: (-len(codes_of[j]), len(str(subs[j])), str(subs[j])))
    chosen: list[int] = []
    covered: set[int] = set()
    for j in order:
        if own[j] in covered:
            continue
        chosen.append(j)
        covered.update(codes_of[j].tolist())
    return sorted((subs[j] for j in chosen), key=str)


def _to_subst(xs: Sequence[str], alg: FiniteAlgebra, col) -> Substitution:
    return Substitution.from_map({v: alg.rep(int(col[i])) for i, v in enumerate(xs)}, domain=xs, codomain=xs)


def _is_mgu_certificate(p: UnificationProblem, s: Substitution, budget: Budget) -> bool:
    phi = big_conj(p.equations())
    if not all(valid(p.sig, apply_substitution(s, e), budget) for e in p.equations()):
        return False
    return all(entails(p.sig, [phi], iff(s[v], var(v)), budget) for v in p.variables)


def _classical_models(phi: Term, xs: Sequence[str]) -> list[dict[str, bool]]:
    out = []
    for bits in product((False, True), repeat=len(xs)):
        v = dict(zip(xs, bits))
        if _classical(phi, v):
            out.append(v)
    return out


def _classical(t: Term, v: Mapping[str, bool]) -> bool:
    memo: dict[int, bool] = {}
    for s in t.subterms():
        if s.op == "var":
            r = v[s.name]
        elif s.op == TOP:
            r = True
        elif s.op == BOT:
            r = False
        elif s.op == AND:
            r = memo[id(s.args[0])] and memo[id(s.args[1])]
        elif s.op == "or":
            r = memo[id(s.args[0])] or memo[id(s.args[1])]
        elif s.op == "imp":
            r = (not memo[id(s.args[0])]) or memo[id(s.args[1])]
        elif s.op == "l":
            r = memo[id(s.args[0])]
        else:
            raise ValueError(s.op)
        memo[id(s)] = r
    return memo[id(t)]


def _projective_unifier(p: UnificationProblem, budget: Budget) -> Substitution | None:
    xs = p.variables
    phi = big_conj(p.equations())
    if p.sig is LC:
        models = _classical_models(phi, xs)
        if not models:
            return None
        current = Substitution.identity(xs)
        for _ in range(budget.lowenheim_rounds):
            for v in models:
                step = Substitution.from_map(
                    {x: imp(phi, var(x)) if v[x] else conj(phi, var(x)) for x in xs}, domain=xs, codomain=xs
                )
                current = compose(current, step)
                if _is_mgu_certificate(p, current, budget):
                    return current
        raise ResourceExceeded("Loewenheim composition rounds", budget.lowenheim_rounds)
    s = Substitution.from_map({x: imp(phi, var(x)) for x in xs}, domain=xs, codomain=xs)
    if _is_mgu_certificate(p, s, budget):
        return s
    raise ResourceExceeded("projective unifier certificate", budget.max_algebra_size)


def unify(p: UnificationProblem, budget: Budget = DEFAULT_BUDGET) -> UnifierBasis:
    """A basis of unifiers (restrictions ignored: use svr_unify for those)."""
    if p.restriction:
        raise ValueError("unify handles unrestricted problems; use svr_unify")
    notes: list[str] = []
    alg = None
    try:
        alg = free_algebra(p.sig, p.variables, budget)
        budget.check("candidate substitutions", "max_candidates", alg.size ** len(p.variables))
    except ResourceExceeded as exc:
        notes.append(f"enumeration skipped: {exc}")
        alg = None
    if alg is not None:
        basis = _unify_by_enumeration(p, alg, budget)
        cert = ENUMERATION
    else:
        mgu = _projective_unifier(p, budget)
        basis = [] if mgu is None else [mgu]
        cert = PROJECTIVE
        if mgu is None:
            notes.append("no classical model: not unifiable")
    for s in basis:
        if not check_unifier(p, s, budget):
            raise AssertionError(f"emitted substitution {s} does not unify")
    if p.sig.tag == "nis":
        notes.append(f"NIS equality decided on rooted S-posets with at most {budget.nis_model_bound} points")
    return UnifierBasis(p, tuple(basis), cert, tuple(notes))


# ------------------------------------------------------- restricted problems


@dataclass(frozen=True)
class SvrResult:
    basis: UnifierBasis
    factorization: ForallFactorization
    factor_bases: tuple[UnifierBasis, ...]
    certification: str = ""


def svr_unify_detailed(
    p: UnificationProblem,
    budget: Budget = DEFAULT_BUDGET,
    factorization: Sequence[Sequence[Term]] | None = None,
) -> SvrResult:
    xs, cs = p.free, p.restriction
    delta = p.equations()
    certification = ""
    if factorization is not None:
        cert = certify_supplied(factorization, delta, cs, p.sig, budget)
        fz = cert.factorization
        certification = cert.detail
        # the factor formulas may not mention every free variable
        fz = ForallFactorization(fz.sig, fz.bound, xs, fz.delta, fz.factors, fz.method)
    else:
        fz = forall_factorize(delta, cs, p.sig, budget, free=xs)
    factor_bases = []
    collected: list[Substitution] = []
    certs = set()
    for f in fz.factors:
        sub = UnificationProblem(p.sig, xs, tuple((t, top()) for t in f.formulas))
        b = unify(sub, budget)
        factor_bases.append(b)
        certs.add(b.certificate)
        collected.extend(b.unifiers)
    if len(fz.factors) > 1 and collected:
        collected = prune(collected, p.sig, budget)
    embedded = [
        Substitution.from_map(s.as_dict(), domain=p.variables, codomain=varset(set(s.codomain) | set(cs)))
        for s in collected
    ]
    for s in embedded:
        if not check_unifier(p, s, budget):
            raise AssertionError(f"emitted substitution {s} is not a C-unifier")
    if factorization is not None:
        tag = VERIFIED
    elif PROJECTIVE in certs:
        tag = PROJECTIVE
    else:
        tag = ENUMERATION
    notes = [f"factorization: {fz.method}, {len(fz.factors)} factor(s)"]
    if certification:
        notes.append(certification)
    for b in factor_bases:
        notes.extend(b.notes)
    basis = UnifierBasis(p, tuple(sorted(embedded, key=str)), tag, tuple(dict.fromkeys(notes)))
    return SvrResult(basis, fz, tuple(factor_bases), certification)


def svr_unify(
    p: UnificationProblem,
    budget: Budget = DEFAULT_BUDGET,
    factorization: Sequence[Sequence[Term]] | None = None,
) -> UnifierBasis:
    """A C-unification basis via forall-factorization of the equations."""
    if not p.restriction:
        return unify(p, budget)
    return svr_unify_detailed(p, budget, factorization).basis


def basis_dominates(
    basis: UnifierBasis, s: Substitution, budget: Budget = DEFAULT_BUDGET
) -> bool:
    """Some basis element is more general than s."""
    fixed = basis.problem.restriction
    return any(more_general(b, s, basis.problem.sig, budget, fixed) for b in basis.unifiers)
