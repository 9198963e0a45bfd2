"""Finite algebras given by operation tables.

Free and finitely presented algebras are built by saturation: every element
is identified with its value vector over a faithful family of models (see
:mod:`svrunify.varieties`), connectives are applied to existing elements until
no new vector appears, and each element keeps the first term that produced
it as its representative.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from svrunify.budget import DEFAULT_BUDGET, Budget, ResourceExceeded
from svrunify.syntax import (
    AND,
    ARITY,
    ISL,
    LC,
    NIS,
    TOP,
    VAR,
    Signature,
    Substitution,
    Term,
    iff,
    parse_term,
    signature,
    var,
    varset,
)
from svrunify.varieties import ModelRows, isl_prove, model_rows


class AxiomViolation(AssertionError):
    pass


# ------------------------------------------------------------------ algebras


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    sig: Signature
    tables: Mapping[str, np.ndarray]
    names: tuple[Term | None, ...]
    generators: tuple[tuple[str, int], ...] = ()

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def top(self) -> int:
        return int(self.tables[TOP])

    @property
    def bottom(self) -> int:
        """Least element (meet of everything)."""
        m = self.top
        for a in range(self.size):
            m = int(self.tables[AND][m, a])
        return m

    def gen(self, name: str) -> int:
        return dict(self.generators)[name]

    def op(self, name: str, *args):
        table = self.tables[name]
        if ARITY[name] == 0:
            return int(table)
        return table[args]

    def leq(self, a, b):
        return self.tables[AND][a, b] == a

    def rep(self, a: int) -> Term:
        t = self.names[a]
        if t is None:
            raise ValueError("element has no representative term")
        return t

    def evaluate(self, t: Term, asg: Mapping[str, int | np.ndarray], memo: dict | None = None):
        """Table evaluation; assignment values may be arrays for batched evaluation."""
        if memo is None:
            memo = {}
        for s in t.subterms():
            if id(s) in memo:
                continue
            if s.op == VAR:
                if s.name not in asg:
                    raise KeyError(f"variable {s.name!r} is unassigned")
                memo[id(s)] = asg[s.name]
            elif not s.args:
                memo[id(s)] = int(self.tables[s.op])
            elif len(s.args) == 1:
                memo[id(s)] = self.tables[s.op][memo[id(s.args[0])]]
            else:
                memo[id(s)] = self.tables[s.op][memo[id(s.args[0])], memo[id(s.args[1])]]
        return memo[id(t)]

    def element_of(self, t: Term) -> int:
        """Element denoted by ``t`` using the generator embedding."""
        return int(self.evaluate(t, dict(self.generators)))

    def __repr__(self) -> str:
        return f"FiniteAlgebra({self.sig.tag}, size={self.size})"


def eval_term(a: FiniteAlgebra, t: Term, asg: Mapping[str, int]) -> int:
    return int(a.evaluate(t, asg))


# ---------------------------------------------------------- axiom audits

_AXIOMS = {
    "semilattice": [
        ("x /\\ x", "x"),
        ("x /\\ y", "y /\\ x"),
        ("x /\\ (y /\\ z)", "(x /\\ y) /\\ z"),
        ("x /\\ T", "x"),
    ],
    "implicative": [
        ("x -> x", "T"),
        ("x /\\ (x -> y)", "x /\\ y"),
        ("y /\\ (x -> y)", "y"),
        ("x -> (y /\\ z)", "(x -> y) /\\ (x -> z)"),
    ],
    "lattice": [
        ("x \\/ x", "x"),
        ("x \\/ y", "y \\/ x"),
        ("x \\/ (y \\/ z)", "(x \\/ y) \\/ z"),
        ("x \\/ (x /\\ y)", "x"),
        ("x /\\ (x \\/ y)", "x"),
        ("x /\\ (y \\/ z)", "(x /\\ y) \\/ (x /\\ z)"),
        ("F /\\ x", "F"),
        ("(x -> y) \\/ (y -> x)", "T"),
    ],
    "nucleus": [
        ("x /\\ l x", "x"),
        ("l (x /\\ y)", "l x /\\ l y"),
        ("l l x /\\ l x", "l l x"),
    ],
}


@lru_cache(maxsize=None)
def variety_axioms(sig: Signature) -> tuple[tuple[Term, Term], ...]:
    groups = ["semilattice", "implicative"]
    if sig is LC:
        groups.append("lattice")
    if sig is NIS:
        groups.append("nucleus")
    return tuple(
        (parse_term(l, sig), parse_term(r, sig)) for g in groups for l, r in _AXIOMS[g]
    )


def audit(a: FiniteAlgebra, chunk: int = 2_000_000) -> None:
    """Check every variety law on every tuple of elements; raise on failure."""
    n = a.size
    for name in a.sig.ops:
        table = np.asarray(a.tables[name])
        if table.shape != (n,) * ARITY[name]:
            raise AxiomViolation(f"table {name} has shape {table.shape}")
        if table.size and (table.min() < 0 or table.max() >= n):
            raise AxiomViolation(f"table {name} leaves the carrier")
    for lhs, rhs in variety_axioms(a.sig):
        vs = sorted(lhs.variables() | rhs.variables())
        total = n ** len(vs)
        step = max(1, chunk // max(1, n ** max(0, len(vs) - 1)))
        # chunk over the first variable
        for start in range(0, n, step):
            firsts = np.arange(start, min(n, start + step))
            grids = np.indices((len(firsts),) + (n,) * (len(vs) - 1)).reshape(len(vs), -1)
            asg = {vs[0]: firsts[grids[0]]}
            for i, v in enumerate(vs[1:], 1):
                asg[v] = grids[i]
            left = np.broadcast_to(a.evaluate(lhs, asg), grids.shape[1:])
            right = np.broadcast_to(a.evaluate(rhs, asg), grids.shape[1:])
            bad = np.nonzero(left != right)[0]
            if bad.size:
                k = bad[0]
                where = {v: int(asg[v][k]) for v in vs}
                raise AxiomViolation(f"{lhs} = {rhs} fails at {where}")
        del total


# ----------------------------------------------------------- construction

_MIX = None


def _mixer(length: int) -> np.ndarray:
    global _MIX
    if _MIX is None or _MIX.shape[0] < length:
        rng = np.random.default_rng(0x5EED)
        _MIX = rng.integers(1, 2**63, size=max(length, 1024), dtype=np.uint64) | np.uint64(1)
    return _MIX[:length]


def _row_hash(vals: np.ndarray) -> np.ndarray:
    """64-bit fingerprint of the last axis; equality is re-checked exactly."""
    mix = _mixer(vals.shape[-1])
    with np.errstate(over="ignore"):
        return (vals.astype(np.uint64) * mix).sum(axis=-1, dtype=np.uint64)


class _Closure:
    def __init__(self, rows: ModelRows, sig: Signature, budget: Budget):
        self.rows = rows
        self.sig = sig
        self.budget = budget
        self.vectors: list[np.ndarray] = []
        self.reps: list[Term] = []
        self.index: dict[int, list[int]] = {}

    def lookup(self, vec: np.ndarray, h: int) -> int | None:
        for i in self.index.get(h, ()):
            if np.array_equal(self.vectors[i], vec):
                return i
        return None

    def add(self, vec: np.ndarray, rep: Term) -> int:
        h = int(_row_hash(vec))
        found = self.lookup(vec, h)
        if found is not None:
            return found
        if len(self.vectors) >= self.budget.max_algebra_size:
            raise ResourceExceeded("algebra carrier", self.budget.max_algebra_size)
        self.vectors.append(np.ascontiguousarray(vec))
        self.reps.append(rep)
        self.index.setdefault(h, []).append(len(self.vectors) - 1)
        return len(self.vectors) - 1

    _CELLS = 1 << 21

    def _combine(self, op: str, left: Sequence[int], right: Sequence[int] | None, register: bool):
        """Apply ``op`` to index blocks; returns the index table (-1 where new but unregistered)."""
        if right is None:
            out = np.full(len(left), -1, dtype=np.int64)
            L = max(1, len(self.vectors[0]))
            step = max(1, self._CELLS // L)
            for s in range(0, len(left), step):
                part = list(left[s : s + step])
                vals = self.rows.apply(op, np.stack([self.vectors[i] for i in part]))
                self._resolve(op, vals, [(i,) for i in part], out[s : s + step], register)
            return out
        out = np.full((len(left), len(right)), -1, dtype=np.int64)
        L = max(1, len(self.vectors[0]))
        rstep = max(1, min(len(right), self._CELLS // L))
        lstep = max(1, self._CELLS // (L * rstep))
        for ls in range(0, len(left), lstep):
            lpart = list(left[ls : ls + lstep])
            A = np.stack([self.vectors[i] for i in lpart])
            for rs in range(0, len(right), rstep):
                rpart = list(right[rs : rs + rstep])
                B = np.stack([self.vectors[i] for i in rpart])
                vals = self.rows.apply(op, A[:, None, :], B[None, :, :]).reshape(-1, A.shape[1])
                args = [(i, j) for i in lpart for j in rpart]
                view = out[ls : ls + lstep, rs : rs + rstep].reshape(-1)
                self._resolve(op, vals, args, view, register)
                out[ls : ls + lstep, rs : rs + rstep] = view.reshape(len(lpart), len(rpart))
        return out

    def _resolve(self, op, vals, args, out, register) -> None:
        hashes = _row_hash(vals)
        for k in range(len(vals)):
            h = int(hashes[k])
            found = self.lookup(vals[k], h)
            if found is None and register:
                found = self.add(vals[k], Term(op, tuple(self.reps[i] for i in args[k])))
            if found is not None:
                out[k] = found

    def saturate(self) -> None:
        ops = [op for op in self.sig.ops if ARITY[op] > 0]
        done = 0
        while done < len(self.vectors):
            frontier = list(range(done, len(self.vectors)))
            old = list(range(done))
            done = len(self.vectors)
            for op in ops:
                if ARITY[op] == 1:
                    self._combine(op, frontier, None, True)
                    continue
                self._combine(op, frontier, old + frontier, True)
                if old:
                    self._combine(op, old, frontier, True)

    def tables(self) -> dict[str, np.ndarray]:
        n = len(self.vectors)
        out: dict[str, np.ndarray] = {}
        allidx = list(range(n))
        for op in self.sig.ops:
            ar = ARITY[op]
            if ar == 0:
                vec = self.rows.top() if op == TOP else self.rows.bot()
                out[op] = np.array(self.lookup(vec, int(_row_hash(vec))))
            elif ar == 1:
                out[op] = self._combine(op, allidx, None, False)
            else:
                out[op] = self._combine(op, allidx, allidx, False)
            if np.any(out[op] < 0):
                raise AssertionError(f"table {op} is not closed after saturation")
        return out


def _build(
    sig: Signature,
    gens: tuple[str, ...],
    relations: Sequence[tuple[Term, Term]],
    budget: Budget,
    certify: bool,
) -> FiniteAlgebra:
    rows = model_rows(sig, gens, budget)
    if relations:
        memo: dict = {}
        keep = np.ones(rows.length, dtype=bool)
        for s, t in relations:
            keep &= rows.evaluate(s, memo) == rows.evaluate(t, memo)
        rows = rows.restrict(keep)
    cl = _Closure(rows, sig, budget)
    for g in gens:
        cl.add(rows.generator(g), var(g))
    for op in sig.ops:
        if ARITY[op] == 0:
            cl.add(rows.top() if op == TOP else rows.bot(), Term(op))
    cl.saturate()
    tables = cl.tables()
    gen_map = tuple((g, cl.lookup(rows.generator(g), int(_row_hash(rows.generator(g))))) for g in gens)
    alg = FiniteAlgebra(sig, tables, tuple(cl.reps), gen_map)
    if certify and sig is ISL:
        _certify_isl(alg, relations)
    return alg


def _certify_isl(a: FiniteAlgebra, relations: Sequence[tuple[Term, Term]]) -> None:
    """Every table entry must be an ISL theorem (relative to the relations).

    Distinct elements are separated by a model, so together with this the
    carrier is exactly the quotient of the term algebra.
    """
    hyp = [iff(s, t) for s, t in relations]
    for op in a.sig.ops:
        table = a.tables[op]
        if ARITY[op] == 0:
            continue
        for idx in np.ndindex(table.shape):
            lhs = Term(op, tuple(a.names[i] for i in idx))
            rhs = a.names[int(table[idx])]
            if lhs is rhs:
                continue
            if not isl_prove(hyp, iff(lhs, rhs)):
                raise ResourceExceeded("ISL Kripke bound (increase isl_kripke_bound)", 0)


_FREE_CACHE: dict[tuple, FiniteAlgebra] = {}

# Lower bounds on |F(n)| that are known to exceed any practical budget, so
# saturation can fail fast instead of running until the carrier overflows.
# ISL(3) is Diego's count; LC(3) and NIS(2) were measured to overflow a
# 4001-element carrier (NIS on the 5-point S-poset suite).
KNOWN_LOWER_BOUNDS = {
    ("isl", 3): 623_662_965_552_330,
    ("lc", 3): 4_001,
    ("nis", 2): 4_001,
}


def free_size_lower_bound(sig: Signature | str, n: int) -> int:
    sig = signature(sig)
    best = 0
    for (tag, k), bound in KNOWN_LOWER_BOUNDS.items():
        if tag == sig.tag and n >= k:
            best = max(best, bound)
    return best


def free_algebra(
    sig: Signature | str,
    gens: Iterable[str],
    budget: Budget = DEFAULT_BUDGET,
    certify: bool = True,
) -> FiniteAlgebra:
    """The free algebra of the variety over ``gens``; ``.generators`` embeds them."""
    sig = signature(sig)
    gens = varset(gens)
    key = (sig.tag, gens, budget.max_algebra_size, budget.isl_kripke_bound, budget.nis_model_bound)
    hit = _FREE_CACHE.get(key)
    if hit is not None:
        return hit
    lower = free_size_lower_bound(sig, len(gens))
    if lower > budget.max_algebra_size:
        raise ResourceExceeded(f"free {sig.tag} algebra on {len(gens)} generators", budget.max_algebra_size, lower)
    alg = _build(sig, gens, (), budget, certify)
    _FREE_CACHE[key] = alg
    return alg


@dataclass(frozen=True)
class Presentation:
    sig: Signature
    generators: tuple[str, ...]
    relations: tuple[tuple[Term, Term], ...]

    def __post_init__(self):
        object.__setattr__(self, "generators", varset(self.generators))
        gens = set(self.generators)
        for s, t in self.relations:
            extra = (s.variables() | t.variables()) - gens
            if extra:
                raise ValueError(f"relation uses {sorted(extra)} outside the generators")


def presented_algebra(pres: Presentation, budget: Budget = DEFAULT_BUDGET, certify: bool = True) -> FiniteAlgebra:
    """Build F(X)/cg(relations) directly, without constructing F(X)."""
    return _build(pres.sig, pres.generators, pres.relations, budget, certify)


def finitely_presented(
    pres: Presentation, budget: Budget = DEFAULT_BUDGET
) -> tuple[FiniteAlgebra, Homomorphism]:
    """The presented algebra together with the quotient map from F(generators)."""
    free = free_algebra(pres.sig, pres.generators, budget)
    pairs = [(free.element_of(s), free.element_of(t)) for s, t in pres.relations]
    theta = congruence_generated(free, pairs)
    return quotient(free, theta)


# ------------------------------------------------------------ homomorphisms


@dataclass(frozen=True, eq=False)
class Homomorphism:
    source: FiniteAlgebra
    target: FiniteAlgebra
    mapping: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.mapping[a]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Homomorphism)
            and self.source is other.source
            and self.target is other.target
            and self.mapping == other.mapping
        )

    def __hash__(self) -> int:
        return hash((id(self.source), id(self.target), self.mapping))

    def is_homomorphism(self) -> bool:
        return is_homomorphism(self.source, self.target, self.mapping)

    def then(self, after: Homomorphism) -> Homomorphism:
        """``after`` composed with ``self``."""
        if after.source is not self.target:
            raise ValueError("composition across different algebras")
        return Homomorphism(self.source, after.target, tuple(after.mapping[x] for x in self.mapping))

    def image(self) -> frozenset[int]:
        return frozenset(self.mapping)

    def is_injective(self) -> bool:
        return len(set(self.mapping)) == len(self.mapping)

    def is_surjective(self) -> bool:
        return len(set(self.mapping)) == self.target.size

    def kernel(self) -> Congruence:
        first: dict[int, int] = {}
        labels = tuple(first.setdefault(b, a) for a, b in enumerate(self.mapping))
        return Congruence(self.source, labels)


def is_homomorphism(a: FiniteAlgebra, b: FiniteAlgebra, mapping: Sequence[int]) -> bool:
    h = np.asarray(mapping)
    if h.shape != (a.size,):
        return False
    for op in a.sig.ops:
        ta, tb = np.asarray(a.tables[op]), np.asarray(b.tables[op])
        ar = ARITY[op]
        if ar == 0:
            ok = h[int(ta)] == int(tb)
        elif ar == 1:
            ok = np.array_equal(h[ta], tb[h])
        else:
            ok = np.array_equal(h[ta], tb[h[:, None], h[None, :]])
        if not ok:
            return False
    return True


def identity_hom(a: FiniteAlgebra) -> Homomorphism:
    return Homomorphism(a, a, tuple(range(a.size)))


def generating_set(a: FiniteAlgebra) -> tuple[int, ...]:
    """A small generating set chosen greedily; the free generators when known."""
    if a.generators:
        gens = tuple(i for _, i in a.generators)
        if len(generated_closure(a, gens)) == a.size:
            return gens
    chosen: list[int] = []
    closed = generated_closure(a, ())
    for x in range(a.size):
        if x not in closed:
            chosen.append(x)
            closed = generated_closure(a, chosen)
    return tuple(chosen)


def generated_closure(a: FiniteAlgebra, subset: Iterable[int]) -> frozenset[int]:
    members = set(subset)
    for op in a.sig.ops:
        if ARITY[op] == 0:
            members.add(int(a.tables[op]))
    frontier = set(members)
    while frontier:
        new: set[int] = set()
        cur = sorted(members)
        for op in a.sig.ops:
            t = a.tables[op]
            if ARITY[op] == 1:
                new.update(int(t[x]) for x in frontier)
            elif ARITY[op] == 2:
                fr = sorted(frontier)
                new.update(t[np.ix_(fr, cur)].ravel().tolist())
                new.update(t[np.ix_(cur, fr)].ravel().tolist())
        frontier = new - members
        members |= frontier
    return frozenset(members)


def _derivation(a: FiniteAlgebra, gens: Sequence[int]):
    """Each element of ``a`` as (element, op, argument elements) in build order."""
    order: list[tuple[int, str, tuple[int, ...]]] = []
    known: dict[int, bool] = {}
    for g in gens:
        if g not in known:
            known[g] = True
            order.append((g, "gen", (g,)))
    for op in a.sig.ops:
        if ARITY[op] == 0:
            c = int(a.tables[op])
            if c not in known:
                known[c] = True
                order.append((c, op, ()))
    progress = True
    while progress and len(known) < a.size:
        progress = False
        elems = list(known)
        for op in a.sig.ops:
            t = a.tables[op]
            if ARITY[op] == 1:
                for x in elems:
                    y = int(t[x])
                    if y not in known:
                        known[y] = True
                        order.append((y, op, (x,)))
                        progress = True
            elif ARITY[op] == 2:
                for x in elems:
                    for z in elems:
                        y = int(t[x, z])
                        if y not in known:
                            known[y] = True
                            order.append((y, op, (x, z)))
                            progress = True
    return order


def enumerate_homomorphisms(
    a: FiniteAlgebra, b: FiniteAlgebra, budget: Budget = DEFAULT_BUDGET
) -> list[Homomorphism]:
    """All homomorphisms a -> b in lexicographic order of generator images."""
    if a.sig is not b.sig:
        raise ValueError("algebras have different signatures")
    gens = generating_set(a)
    total = b.size ** len(gens)
    budget.check("homomorphism candidates", "max_candidates", total)
    plan = _derivation(a, gens)
    gpos = {g: i for i, g in enumerate(gens)}
    step = max(1, 4_000_000 // max(1, a.size * a.size))
    out: list[Homomorphism] = []
    for start in range(0, total, step):
        codes = np.arange(start, min(total, start + step))
        H = np.zeros((len(codes), a.size), dtype=np.int64)
        digits = np.unravel_index(codes, (b.size,) * len(gens)) if gens else ()
        for elem, op, args in plan:
            if op == "gen":
                H[:, elem] = digits[gpos[elem]]
            elif not args:
                H[:, elem] = int(b.tables[op])
            elif len(args) == 1:
                H[:, elem] = b.tables[op][H[:, args[0]]]
            else:
                H[:, elem] = b.tables[op][H[:, args[0]], H[:, args[1]]]
        ok = np.ones(H.shape[0], dtype=bool)
        for op in a.sig.ops:
            ta, tb = np.asarray(a.tables[op]), np.asarray(b.tables[op])
            if ARITY[op] == 0:
                ok &= H[:, int(ta)] == int(tb)
            elif ARITY[op] == 1:
                ok &= np.all(H[:, ta] == tb[H], axis=1)
            else:
                lhs = H[:, ta]
                rhs = tb[H[:, :, None], H[:, None, :]]
                ok &= np.all((lhs == rhs).reshape(len(H), -1), axis=1)
        out.extend(Homomorphism(a, b, tuple(int(v) for v in row)) for row in H[ok])
    return out


# ---------------------------------------------------------------- congruences


@dataclass(frozen=True, eq=False)
class Congruence:
    """Partition of a carrier; ``labels[i]`` is the least element of i's block."""

    algebra: FiniteAlgebra
    labels: tuple[int, ...]

    def __eq__(self, other) -> bool:
        return isinstance(other, Congruence) and self.algebra is other.algebra and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __le__(self, other: Congruence) -> bool:
        """Refinement: every block of self lies inside a block of other."""
        lab = other.labels
        return all(lab[i] == lab[self.labels[i]] for i in range(len(lab)))

    def __lt__(self, other: Congruence) -> bool:
        return self <= other and self.labels != other.labels

    def related(self, a: int, b: int) -> bool:
        return self.labels[a] == self.labels[b]

    @property
    def blocks(self) -> list[tuple[int, ...]]:
        groups: dict[int, list[int]] = {}
        for i, l in enumerate(self.labels):
            groups.setdefault(l, []).append(i)
        return [tuple(groups[k]) for k in sorted(groups)]

    def block_of(self, a: int) -> tuple[int, ...]:
        l = self.labels[a]
        return tuple(i for i, m in enumerate(self.labels) if m == l)

    def top_block(self) -> tuple[int, ...]:
        return self.block_of(self.algebra.top)

    def is_congruence(self) -> bool:
        lab = np.asarray(self.labels)
        for op in self.algebra.sig.ops:
            t = np.asarray(self.algebra.tables[op])
            if ARITY[op] == 1:
                out = lab[t]
                for cls in set(self.labels):
                    if len(set(out[lab == cls].tolist())) > 1:
                        return False
            elif ARITY[op] == 2:
                n = len(lab)
                keys = (lab[:, None] * n + lab[None, :]).ravel()
                vals = lab[t].ravel()
                order = np.argsort(keys, kind="stable")
                k, v = keys[order], vals[order]
                starts = np.r_[True, k[1:] != k[:-1]]
                first = v[np.maximum.accumulate(np.where(starts, np.arange(len(k)), 0))]
                if np.any(first != v):
                    return False
        return True

    def pairs(self) -> list[tuple[int, int]]:
        return [(self.labels[i], i) for i in range(len(self.labels)) if self.labels[i] != i]


def _canonical_labels(parent: list[int]) -> tuple[int, ...]:
    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    roots = [find(i) for i in range(len(parent))]
    least: dict[int, int] = {}
    for i, r in enumerate(roots):
        least.setdefault(r, i)
    return tuple(least[r] for r in roots)


def congruence_generated(a: FiniteAlgebra, pairs: Iterable[tuple[int, int]]) -> Congruence:
    """Least congruence containing ``pairs`` (union-find, saturated to a fixpoint)."""
    n = a.size
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y) -> bool:
        rx, ry = find(x), find(y)
        if rx == ry:
            return False
        if rx < ry:
            parent[ry] = rx
        else:
            parent[rx] = ry
        return True

    for x, y in pairs:
        if not (0 <= x < n and 0 <= y < n):
            raise ValueError(f"pair ({x}, {y}) outside the carrier")
        union(int(x), int(y))
    changed = True
    while changed:
        changed = False
        lab = np.asarray(_canonical_labels(parent))
        for op in a.sig.ops:
            t = np.asarray(a.tables[op])
            if ARITY[op] == 0:
                continue
            if ARITY[op] == 1:
                keys = lab
                vals = lab[t]
            else:
                keys = (lab[:, None] * n + lab[None, :]).ravel()
                vals = lab[t].ravel()
            order = np.argsort(keys, kind="stable")
            k, v = keys[order], vals[order]
            starts = np.r_[True, k[1:] != k[:-1]]
            first = v[np.maximum.accumulate(np.where(starts, np.arange(len(k)), 0))]
            diff = first != v
            if np.any(diff):
                for x, y in set(zip(first[diff].tolist(), v[diff].tolist())):
                    if union(x, y):
                        changed = True
            if changed:
                break
    return Congruence(a, _canonical_labels(parent))


def identity_congruence(a: FiniteAlgebra) -> Congruence:
    return Congruence(a, tuple(range(a.size)))


def total_congruence(a: FiniteAlgebra) -> Congruence:
    return Congruence(a, (0,) * a.size)


def join(c1: Congruence, c2: Congruence) -> Congruence:
    return congruence_generated(c1.algebra, c1.pairs() + c2.pairs())


def principal_congruences(a: FiniteAlgebra, mode: str = "top") -> list[Congruence]:
    """Principal congruences, deduplicated, in order of first generator.

    In ISL, LC and NIS the congruence generated by (x, y) equals the one
    generated by (x <-> y, T); ``mode="top"`` uses only the pairs (a, T),
    ``mode="all"`` uses every pair.
    """
    seen: dict[tuple[int, ...], Congruence] = {}
    if mode == "top":
        gen_pairs = [(x, a.top) for x in range(a.size)]
    elif mode == "all":
        gen_pairs = [(x, y) for x in range(a.size) for y in range(x + 1, a.size)]
    else:
        raise ValueError(mode)
    for p in gen_pairs:
        c = congruence_generated(a, [p])
        seen.setdefault(c.labels, c)
    return list(seen.values())


def enumerate_congruences(
    a: FiniteAlgebra, budget: Budget = DEFAULT_BUDGET, method: str = "filters"
) -> list[Congruence]:
    """All congruences of ``a``, coarsest first.

    ``method="filters"``: every congruence here is determined by its top block,
    a filter, and finite filters are principal, so the congruences are exactly
    cg(a, T).  ``method="closure"`` is the generic route: identity plus the
    join-closure of all principal congruences cg(x, y).
    """
    if method == "filters":
        budget.check("congruence lattice", "max_congruences", a.size)
        found = {c.labels: c for c in principal_congruences(a, "top")}
    elif method == "closure":
        found = {}
        ident = identity_congruence(a)
        found[ident.labels] = ident
        for c in principal_congruences(a, "all"):
            found.setdefault(c.labels, c)
        frontier = list(found.values())
        while frontier:
            new = []
            current = list(found.values())
            for c1 in frontier:
                for c2 in current:
                    if c1 <= c2 or c2 <= c1:
                        continue
                    j = join(c1, c2)
                    if j.labels not in found:
                        found[j.labels] = j
                        new.append(j)
                        if len(found) > budget.max_congruences:
                            raise ResourceExceeded("congruence lattice", budget.max_congruences)
            frontier = new
    else:
        raise ValueError(f"unknown method {method!r}")
    return sorted(found.values(), key=lambda c: (len(set(c.labels)), c.labels))


def filter_congruence(a: FiniteAlgebra, element: int) -> Congruence:
    """cg(element, T); its top block is the principal filter above ``element``."""
    return congruence_generated(a, [(element, a.top)])


def quotient(a: FiniteAlgebra, c: Congruence) -> tuple[FiniteAlgebra, Homomorphism]:
    """Quotient algebra (blocks ordered by least element) and the projection."""
    reps = sorted(set(c.labels))
    pos = {r: i for i, r in enumerate(reps)}
    proj = np.array([pos[l] for l in c.labels])
    tables: dict[str, np.ndarray] = {}
    ridx = np.asarray(reps)
    for op in a.sig.ops:
        t = np.asarray(a.tables[op])
        if ARITY[op] == 0:
            tables[op] = np.array(proj[int(t)])
        elif ARITY[op] == 1:
            tables[op] = proj[t[ridx]]
        else:
            tables[op] = proj[t[np.ix_(ridx, ridx)]]
    names = tuple(a.names[r] for r in reps)
    gens = tuple((g, int(proj[i])) for g, i in a.generators)
    q = FiniteAlgebra(a.sig, tables, names, gens)
    return q, Homomorphism(a, q, tuple(int(x) for x in proj))


def generated_subalgebra(b: FiniteAlgebra, subset: Iterable[int]) -> tuple[FiniteAlgebra, Homomorphism]:
    """Least subalgebra containing ``subset`` and its inclusion into ``b``."""
    members = sorted(generated_closure(b, subset))
    pos = {m: i for i, m in enumerate(members)}
    idx = np.asarray(members)
    tables: dict[str, np.ndarray] = {}
    to_new = np.full(b.size, -1)
    to_new[idx] = np.arange(len(members))
    for op in b.sig.ops:
        t = np.asarray(b.tables[op])
        if ARITY[op] == 0:
            tables[op] = np.array(pos[int(t)])
        elif ARITY[op] == 1:
            tables[op] = to_new[t[idx]]
        else:
            tables[op] = to_new[t[np.ix_(idx, idx)]]
    sub = FiniteAlgebra(b.sig, tables, tuple(b.names[m] for m in members))
    return sub, Homomorphism(sub, b, tuple(members))


def image_factorization(f: Homomorphism) -> tuple[Homomorphism, Homomorphism]:
    """f = inclusion . onto, through the image subalgebra."""
    sub, inc = generated_subalgebra(f.target, f.image())
    pos = {m: i for i, m in enumerate(inc.mapping)}
    onto = Homomorphism(f.source, sub, tuple(pos[x] for x in f.mapping))
    return onto, inc


def is_isomorphic(a: FiniteAlgebra, b: FiniteAlgebra, budget: Budget = DEFAULT_BUDGET) -> bool:
    if a.size != b.size or a.sig is not b.sig:
        return False
    return any(h.is_injective() for h in enumerate_homomorphisms(a, b, budget))


# ------------------------------------------------------------------------ eta


def eta(s: Substitution, budget: Budget = DEFAULT_BUDGET, sig: Signature | str = ISL) -> Homomorphism:
    """The homomorphism F(domain) -> F(codomain) sending [t] to [s(t)]."""
    sig = signature(sig)
    src = free_algebra(sig, s.domain, budget)
    dst = free_algebra(sig, s.codomain, budget)
    return hom_from_images(src, dst, s.as_dict())


def hom_from_images(src: FiniteAlgebra, dst: FiniteAlgebra, images: Mapping[str, Term]) -> Homomorphism:
    """Extend generator images (terms over dst's generators) to a homomorphism."""
    asg = {g: dst.element_of(images[g]) for g, _ in src.generators}
    memo: dict = {}
    mapping = tuple(int(dst.evaluate(src.rep(e), asg, memo)) for e in range(src.size))
    return Homomorphism(src, dst, mapping)


def substitution_of(h: Homomorphism) -> Substitution:
    """A substitution whose eta is ``h`` (generator images via representatives)."""
    src, dst = h.source, h.target
    images = {g: dst.rep(h.mapping[i]) for g, i in src.generators}
    return Substitution.from_map(images, domain=[g for g, _ in src.generators], codomain=[g for g, _ in dst.generators])
