"""Decision engines for validity and entailment in ISL, LC and NIS.

Each engine evaluates formulas over a finite family of models at once
("model rows"), with numpy arrays holding one value per row:

* LC: the Goedel chain with ``n + 2`` elements under every assignment.
* ISL: every rooted Kripke model up to ``isl_kripke_bound`` worlds; values are
  bitmasks of the worlds forcing the formula.  A contraction-free sequent
  prover is the primary validity test and is independent of the models.
* NIS: every rooted S-poset up to ``nis_model_bound`` points with its dual
  nuclear operator; values are up-set bitmasks.

Entailment is global: premises equal to top force the conclusion to top in
each row.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from svrunify.budget import DEFAULT_BUDGET, Budget, ResourceExceeded
from svrunify.posets import Poset, posets_up_to, rooted_posets_up_to
from svrunify.syntax import (
    AND,
    BOT,
    IMP,
    ISL,
    LC,
    NIS,
    NUC,
    OR,
    TOP,
    VAR,
    Signature,
    Term,
    imp,
    signature,
    term_vars,
)

# ---------------------------------------------------------------- model rows


class ModelRows:
    """A family of models evaluated in parallel.

    Subclasses fix the value encoding and implement the connectives on
    arrays; arrays may carry extra leading axes for batched evaluation.
    """

    variables: tuple[str, ...]
    length: int

    def generator(self, name: str) -> np.ndarray:
        raise NotImplementedError

    def top(self) -> np.ndarray:
        raise NotImplementedError

    def bot(self) -> np.ndarray:
        raise NotImplementedError

    def apply(self, op: str, *args: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, t: Term, memo: dict[int, np.ndarray] | None = None) -> np.ndarray:
        if memo is None:
            memo = {}
        for s in t.subterms():
            if id(s) in memo:
                continue
            if s.op == VAR:
                memo[id(s)] = self.generator(s.name)
            elif s.op == TOP:
                memo[id(s)] = self.top()
            elif s.op == BOT:
                memo[id(s)] = self.bot()
            else:
                memo[id(s)] = self.apply(s.op, *(memo[id(a)] for a in s.args))
        return memo[id(t)]

    def is_top(self, values: np.ndarray) -> np.ndarray:
        return values == self.top()

    def restrict(self, keep: np.ndarray) -> ModelRows:
        raise NotImplementedError


class ChainRows(ModelRows):
    """All assignments of ``variables`` into the Goedel chain ``0 < 1 < ... < m-1``."""

    def __init__(self, variables: Sequence[str], chain_size: int | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        self.m = chain_size if chain_size is not None else n + 2
        grids = np.indices((self.m,) * n).reshape(n, -1) if n else np.zeros((0, 1), dtype=np.int64)
        self._gens = {v: grids[i].astype(np.int16) for i, v in enumerate(self.variables)}
        self.length = grids.shape[1]

    def generator(self, name: str) -> np.ndarray:
        return self._gens[name]

    def top(self) -> np.ndarray:
        return np.full(self.length, self.m - 1, dtype=np.int16)

    def bot(self) -> np.ndarray:
        return np.zeros(self.length, dtype=np.int16)

    def apply(self, op: str, *args: np.ndarray) -> np.ndarray:
        if op == AND:
            return np.minimum(*args)
        if op == OR:
            return np.maximum(*args)
        if op == IMP:
            a, b = args
            return np.where(a <= b, np.int16(self.m - 1), b).astype(np.int16)
        raise ValueError(f"connective {op!r} not interpreted on Goedel chains")

    def restrict(self, keep: np.ndarray) -> ChainRows:
        out = object.__new__(ChainRows)
        out.variables = self.variables
        out.m = self.m
        out._gens = {k: v[keep] for k, v in self._gens.items()}
        out.length = int(np.count_nonzero(keep))
        return out


class FrameRows(ModelRows):
    """All valuations on a list of finite posets (optionally with S-subsets).

    Values are uint8 bitmasks of worlds; at most 8 worlds per frame.
    """

    def __init__(
        self,
        variables: Sequence[str],
        frames: Sequence[tuple[Poset, int]],
        max_rows: int | None = None,
    ):
        self.variables = tuple(variables)
        n = len(self.variables)
        full, up, ups, gens = [], [], [], [[] for _ in range(n)]
        width = max((p.n for p, _ in frames), default=0)
        if width > 8:
            raise ValueError("frames with more than 8 worlds are not supported")
        self.width = width
        total = 0
        for p, s in frames:
            uss = p.upsets()
            count = len(uss) ** n
            total += count
            if max_rows is not None and total > max_rows:
                raise ResourceExceeded("model rows", max_rows, total)
            ups_arr = np.array(uss, dtype=np.uint8)
            if n:
                idx = np.indices((len(uss),) * n).reshape(n, -1)
                for i in range(n):
                    gens[i].append(ups_arr[idx[i]])
            full.append(np.full(count, p.full, dtype=np.uint8))
            col = np.array([p.up[w] if w < p.n else 0 for w in range(width)], dtype=np.uint8)
            up.append(np.repeat(col[:, None], count, axis=1))
            ups.append(np.repeat((col & np.uint8(s))[:, None], count, axis=1))
        self.length = total
        cat = (lambda xs: np.concatenate(xs, axis=-1)) if frames else (lambda xs: np.zeros((width, 0), dtype=np.uint8))
        self._full = np.concatenate(full) if frames else np.zeros(0, dtype=np.uint8)
        self._up = cat(up)
        self._ups = cat(ups)
        self._gens = {
            v: (np.concatenate(gens[i]) if frames else np.zeros(0, dtype=np.uint8))
            for i, v in enumerate(self.variables)
        }

    def generator(self, name: str) -> np.ndarray:
        return self._gens[name]

    def top(self) -> np.ndarray:
        return self._full

    def bot(self) -> np.ndarray:
        return np.zeros_like(self._full)

    def apply(self, op: str, *args: np.ndarray) -> np.ndarray:
        if op == AND:
            return args[0] & args[1]
        if op == OR:
            return args[0] | args[1]
        if op == IMP:
            a, b = args
            bad = a & ~b
            res = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.uint8)
            for w in range(self.width):
                res |= ((self._up[w] & bad) == 0).astype(np.uint8) << np.uint8(w)
            return res & self._full
        if op == NUC:
            (a,) = args
            res = np.zeros(a.shape, dtype=np.uint8)
            for w in range(self.width):
                res |= ((self._ups[w] & ~a) == 0).astype(np.uint8) << np.uint8(w)
            return res & self._full
        raise ValueError(f"connective {op!r} not interpreted on frames")

    def restrict(self, keep: np.ndarray) -> FrameRows:
        out = object.__new__(FrameRows)
        out.variables = self.variables
        out.width = self.width
        out._full = self._full[keep]
        out._up = self._up[:, keep]
        out._ups = self._ups[:, keep]
        out._gens = {k: v[keep] for k, v in self._gens.items()}
        out.length = int(np.count_nonzero(keep))
        return out


# ------------------------------------------------------------- row factories


@lru_cache(maxsize=64)
def chain_rows(variables: tuple[str, ...], chain_size: int | None = None) -> ChainRows:
    return ChainRows(variables, chain_size)


@lru_cache(maxsize=64)
def kripke_rows(variables: tuple[str, ...], max_worlds: int, max_rows: int) -> FrameRows:
    frames = [(p, 0) for p in rooted_posets_up_to(max_worlds)]
    return FrameRows(variables, frames, max_rows)


@lru_cache(maxsize=64)
def prelinear_rows(variables: tuple[str, ...], max_worlds: int, max_rows: int) -> FrameRows:
    frames = [(p, 0) for p in posets_up_to(max_worlds) if p.n and p.is_prelinear()]
    return FrameRows(variables, frames, max_rows)


@lru_cache(maxsize=64)
def sposet_rows(variables: tuple[str, ...], max_points: int, max_rows: int) -> FrameRows:
    frames = [(p, s) for p in rooted_posets_up_to(max_points) for s in range(1 << p.n)]
    return FrameRows(variables, frames, max_rows)


def model_rows(sig: Signature | str, variables: Iterable[str], budget: Budget = DEFAULT_BUDGET) -> ModelRows:
    """The faithful model family used to decide equality in ``sig`` over ``variables``."""
    sig = signature(sig)
    vs = tuple(sorted(set(variables)))
    if sig is LC:
        budget.check("Goedel chain assignments", "max_model_rows", (len(vs) + 2) ** len(vs))
        return chain_rows(vs)
    if sig is ISL:
        return kripke_rows(vs, budget.isl_kripke_bound, budget.max_model_rows)
    return sposet_rows(vs, budget.nis_model_bound, budget.max_model_rows)


# ------------------------------------------------------------------ LC


def _holds_everywhere(rows: ModelRows, premises: Sequence[Term], conclusion: Term) -> bool:
    memo: dict[int, np.ndarray] = {}
    ok = np.ones(rows.length, dtype=bool)
    for p in premises:
        ok &= rows.is_top(rows.evaluate(p, memo))
    concl = rows.is_top(rows.evaluate(conclusion, memo))
    return bool(np.all(concl[ok]))


def lc_entails(premises: Iterable[Term], t: Term, budget: Budget = DEFAULT_BUDGET) -> bool:
    premises = tuple(premises)
    rows = model_rows(LC, term_vars((*premises, t)), budget)
    return _holds_everywhere(rows, premises, t)


def lc_valid(t: Term, budget: Budget = DEFAULT_BUDGET) -> bool:
    return lc_entails((), t, budget)


def prelinear_frame_valid(t: Term, max_worlds: int = 5, max_rows: int = 5_000_000) -> bool:
    """Validity on every prelinear Kripke frame with at most ``max_worlds`` worlds."""
    rows = prelinear_rows(term_vars((t,)), max_worlds, max_rows)
    return bool(np.all(rows.is_top(rows.evaluate(t))))


# ------------------------------------------------------------------ ISL


class _Prover:
    """Contraction-free sequent search (Dyckhoff's G4ip) for the {T, /\\, ->} fragment."""

    def __init__(self):
        self.memo: dict[tuple[frozenset, Term], bool] = {}

    def prove(self, ctx: frozenset[Term], goal: Term) -> bool:
        ctx = self._saturate(ctx)
        key = (ctx, goal)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        result = self._prove(ctx, goal)
        self.memo[key] = result
        return result

    @staticmethod
    def _saturate(ctx: frozenset[Term]) -> frozenset[Term]:
        work = set(ctx)
        changed = True
        while changed:
            changed = False
            for f in list(work):
                if f.op == TOP:
                    work.discard(f)
                    changed = True
                elif f.op == AND:
                    work.discard(f)
                    work.update(f.args)
                    changed = True
                elif f.op == IMP:
                    a, b = f.args
                    if a.op == TOP or (a.op == VAR and a in work):
                        work.discard(f)
                        work.add(b)
                        changed = True
                    elif a.op == AND:
                        work.discard(f)
                        work.add(imp(a.args[0], imp(a.args[1], b)))
                        changed = True
                elif f.op not in (VAR,):
                    raise ValueError(f"connective {f.op!r} outside the ISL fragment")
        return frozenset(work)

    def _prove(self, ctx: frozenset[Term], goal: Term) -> bool:
        op = goal.op
        if op == TOP:
            return True
        if op == AND:
            return self.prove(ctx, goal.args[0]) and self.prove(ctx, goal.args[1])
        if op == IMP:
            return self.prove(ctx | {goal.args[0]}, goal.args[1])
        if op != VAR:
            raise ValueError(f"connective {op!r} outside the ISL fragment")
        if goal in ctx:
            return True
        for f in ctx:
            if f.op == IMP and f.args[0].op == IMP:
                (c, d), b = f.args[0].args, f.args[1]
                rest = ctx - {f}
                if self.prove(rest | {imp(d, b)}, imp(c, d)) and self.prove(rest | {b}, goal):
                    return True
        return False


_PROVER = _Prover()


def isl_prove(premises: Iterable[Term], t: Term) -> bool:
    """Sequent-calculus decision of ``premises |- t`` in the {T, /\\, ->} fragment."""
    if len(_PROVER.memo) > 2_000_000:
        _PROVER.memo.clear()
    return _PROVER.prove(frozenset(premises), t)


def isl_kripke_entails(
    premises: Iterable[Term], t: Term, max_worlds: int = 6, max_rows: int = 5_000_000
) -> bool:
    """Counter-model search over rooted Kripke models with at most ``max_worlds`` worlds."""
    premises = tuple(premises)
    vs = term_vars((*premises, t))
    for k in range(1, max_worlds + 1):
        # grow the frame size so that small counter-models are found early
        frames = [(p, 0) for p in rooted_posets_up_to(k) if p.n == k]
        rows = FrameRows(vs, frames, max_rows)
        if not _holds_everywhere(rows, premises, t):
            return False
    return True


def isl_entails(
    premises: Iterable[Term], t: Term, budget: Budget = DEFAULT_BUDGET, method: str = "sequent"
) -> bool:
    premises = tuple(premises)
    if method == "sequent":
        return isl_prove(premises, t)
    if method == "kripke":
        return isl_kripke_entails(premises, t, budget.isl_kripke_bound, budget.max_model_rows)
    if method == "both":
        a = isl_prove(premises, t)
        b = isl_kripke_entails(premises, t, budget.isl_kripke_bound, budget.max_model_rows)
        if a != b:
            raise AssertionError(f"ISL engines disagree on {t}: sequent={a}, kripke={b}")
        return a
    raise ValueError(f"unknown ISL method {method!r}")


def isl_valid(t: Term, budget: Budget = DEFAULT_BUDGET, method: str = "sequent") -> bool:
    return isl_entails((), t, budget, method)


# ------------------------------------------------------------------ NIS


def nis_entails(premises: Iterable[Term], t: Term, budget: Budget = DEFAULT_BUDGET) -> bool:
    """Entailment over rooted S-posets up to ``budget.nis_model_bound`` points."""
    premises = tuple(premises)
    rows = model_rows(NIS, term_vars((*premises, t)), budget)
    return _holds_everywhere(rows, premises, t)


def nis_valid(t: Term, budget: Budget = DEFAULT_BUDGET) -> bool:
    return nis_entails((), t, budget)


# --------------------------------------------------------------- dispatch


def entails(sig: Signature | str, premises: Iterable[Term], t: Term, budget: Budget = DEFAULT_BUDGET) -> bool:
    sig = signature(sig)
    if sig is LC:
        return lc_entails(premises, t, budget)
    if sig is ISL:
        return isl_entails(premises, t, budget)
    return nis_entails(premises, t, budget)


def valid(sig: Signature | str, t: Term, budget: Budget = DEFAULT_BUDGET) -> bool:
    return entails(sig, (), t, budget)


def entails_all(sig: Signature | str, premises: Iterable[Term], conclusions: Iterable[Term], budget: Budget = DEFAULT_BUDGET) -> bool:
    premises = tuple(premises)
    return all(entails(sig, premises, c, budget) for c in conclusions)


def equivalent(sig: Signature | str, a: Term, b: Term, budget: Budget = DEFAULT_BUDGET) -> bool:
    return entails(sig, (a,), b, budget) and entails(sig, (b,), a, budget)


def engine_note(sig: Signature | str, budget: Budget = DEFAULT_BUDGET) -> str:
    sig = signature(sig)
    if sig is LC:
        return "Goedel chains of size n+2 (complete)"
    if sig is ISL:
        return "G4ip sequent search (complete)"
    return f"rooted S-posets with at most {budget.nis_model_bound} points (bounded)"


@dataclass(frozen=True)
class KripkeModel:
    """A finite poset with a valuation of up-sets; worlds are ``0..n-1``."""

    frame: Poset
    valuation: tuple[tuple[str, int], ...]

    def value(self, name: str) -> int:
        return dict(self.valuation)[name]

    def forces(self, t: Term) -> int:
        """Bitmask of the worlds forcing ``t``."""
        p = self.frame
        memo: dict[int, int] = {}
        val = dict(self.valuation)
        for s in t.subterms():
            if s.op == VAR:
                r = val[s.name]
            elif s.op == TOP:
                r = p.full
            elif s.op == BOT:
                r = 0
            elif s.op == AND:
                r = memo[id(s.args[0])] & memo[id(s.args[1])]
            elif s.op == OR:
                r = memo[id(s.args[0])] | memo[id(s.args[1])]
            elif s.op == IMP:
                a, b = memo[id(s.args[0])], memo[id(s.args[1])]
                r = sum(1 << w for w in range(p.n) if p.up[w] & a & ~b == 0)
            else:
                raise ValueError(f"connective {s.op!r} has no Kripke clause")
            memo[id(s)] = r
        return memo[id(t)]

    def is_persistent(self) -> bool:
        p = self.frame
        return all(
            all(p.up[w] & ~mask == 0 for w in range(p.n) if mask >> w & 1) for _, mask in self.valuation
        )


def prelinear_models(variables: Sequence[str], max_worlds: int):
    """Every valuation of ``variables`` on every prelinear frame up to ``max_worlds``."""
    for p in posets_up_to(max_worlds):
        if not p.n or not p.is_prelinear():
            continue
        ups = p.upsets()
        for choice in product(ups, repeat=len(variables)):
            yield KripkeModel(p, tuple(zip(variables, choice)))
