"""Finite S-posets, their partial morphisms, and the dual NIS algebras.

An S-poset is a finite poset with a distinguished subset S.  Its dual algebra
is the set of up-sets with intersection, Heyting implication and the nucleus
l(U) = {x : every s in S above x lies in U}.  A partial map f: X -> Y dualizes
to h(V) = {x : f(x') in V for every x' >= x in dom f}.
"""

from __future__ import annotations

import json
from functools import lru_cache
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from svrunify.algebra import FiniteAlgebra, Homomorphism
from svrunify.posets import Poset, marked_posets_of_size, posets_of_size
from svrunify.syntax import AND, IMP, NIS, NUC, TOP


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class SPoset:
    poset: Poset
    S: int
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.names:
            object.__setattr__(self, "names", tuple(str(i) for i in range(self.poset.n)))
        if len(self.names) != self.poset.n or len(set(self.names)) != self.poset.n:
            raise ValueError("element names must be distinct, one per element")
        if self.S & ~self.poset.full:
            raise ValueError("S is not a subset of the elements")

    @property
    def n(self) -> int:
        return self.poset.n

    def leq(self, a: int, b: int) -> bool:
        return self.poset.leq(a, b)

    def lt(self, a: int, b: int) -> bool:
        return self.poset.lt(a, b)

    def in_s(self, a: int) -> bool:
        return bool(self.S >> a & 1)

    def up(self, a: int) -> int:
        return self.poset.up[a]

    def strict_up(self, a: int) -> int:
        return self.poset.up[a] & ~(1 << a)

    def immediate_successors(self, a: int) -> int:
        return self.poset.immediate_successors(a)

    def is_antichain(self, mask: int) -> bool:
        els = _bits(mask)
        return all(not self.leq(a, b) for a in els for b in els if a != b)

    def antichains(self) -> Iterator[int]:
        for mask in range(1 << self.n):
            if self.is_antichain(mask):
                yield mask

    def subset(self, mask: int) -> list[str]:
        return [self.names[i] for i in _bits(mask)]

    # JSON: {"elements": [...], "leq": [[a, b], ...], "S": [...]}
    @classmethod
    def from_json(cls, data: Mapping | str) -> SPoset:
        if isinstance(data, str):
            data = json.loads(data)
        names = tuple(str(e) for e in data["elements"])
        pos = {e: i for i, e in enumerate(names)}
        try:
            pairs = [(pos[str(a)], pos[str(b)]) for a, b in data.get("leq", [])]
            s = sum(1 << pos[str(e)] for e in data.get("S", []))
        except KeyError as exc:
            raise ValueError(f"unknown element {exc.args[0]!r}") from None
        return cls(Poset.from_pairs(len(names), pairs), s, names)

    def to_json(self) -> dict:
        cover = [
            [self.names[a], self.names[b]]
            for a in range(self.n)
            for b in _bits(self.immediate_successors(a))
        ]
        return {"elements": list(self.names), "leq": cover, "S": self.subset(self.S)}

    def __str__(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True)
class PartialMap:
    source: SPoset
    target: SPoset
    images: tuple[int | None, ...]

    def __post_init__(self):
        if len(self.images) != self.source.n:
            raise ValueError("one image slot per source element is required")
        for v in self.images:
            if v is not None and not 0 <= v < self.target.n:
                raise ValueError(f"image {v} outside the target")

    @property
    def dom(self) -> int:
        return sum(1 << i for i, v in enumerate(self.images) if v is not None)

    def __call__(self, x: int) -> int | None:
        return self.images[x]

    def is_total(self) -> bool:
        return all(v is not None for v in self.images)

    def is_injective(self) -> bool:
        vals = [v for v in self.images if v is not None]
        return len(vals) == len(set(vals))

    def is_surjective(self) -> bool:
        return {v for v in self.images if v is not None} == set(range(self.target.n))

    def then(self, g: PartialMap) -> PartialMap:
        """g after self; defined where both steps are."""
        if g.source != self.target:
            raise ValueError("maps are not composable")
        return PartialMap(
            self.source,
            g.target,
            tuple(None if v is None else g.images[v] for v in self.images),
        )

    @classmethod
    def identity(cls, x: SPoset) -> PartialMap:
        return cls(x, x, tuple(range(x.n)))

    @classmethod
    def from_json(cls, source: SPoset, target: SPoset, data: Mapping | str) -> PartialMap:
        if isinstance(data, str):
            data = json.loads(data)
        spos = {e: i for i, e in enumerate(source.names)}
        tpos = {e: i for i, e in enumerate(target.names)}
        images: list[int | None] = [None] * source.n
        mapping = {str(k): str(v) for k, v in data.get("map", {}).items()}
        dom = [str(d) for d in data.get("dom", mapping.keys())]
        for d in dom:
            if d not in mapping:
                raise ValueError(f"domain element {d!r} has no image")
            if d not in spos or mapping[d] not in tpos:
                raise ValueError(f"unknown element in {d!r} -> {mapping[d]!r}")
            images[spos[d]] = tpos[mapping[d]]
        return cls(source, target, tuple(images))

    def to_json(self) -> dict:
        dom = [self.source.names[i] for i, v in enumerate(self.images) if v is not None]
        return {
            "dom": dom,
            "map": {self.source.names[i]: self.target.names[v] for i, v in enumerate(self.images) if v is not None},
        }


# ------------------------------------------------------------------ morphisms


@dataclass(frozen=True)
class MorphismReport:
    ok: bool
    condition: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _check_i(f: PartialMap, x: int) -> str | None:
    X, Y, img = f.source, f.target, f.images
    for y in _bits(X.strict_up(x)):
        if img[y] is not None and not Y.lt(img[x], img[y]):
            return f"{X.names[x]} < {X.names[y]} but f({X.names[x]}) is not below f({X.names[y]})"
    return None


def _reach(f: PartialMap, x: int) -> int:
    """Images of dom-elements strictly above x."""
    m = 0
    for y in _bits(f.source.strict_up(x)):
        if f.images[y] is not None:
            m |= 1 << f.images[y]
    return m


def _check_ii(f: PartialMap, x: int) -> str | None:
    Y = f.target
    missing = Y.strict_up(f.images[x]) & ~_reach(f, x)
    if missing:
        y = _bits(missing)[0]
        return f"f({f.source.names[x]}) < {Y.names[y]} is not reached from above {f.source.names[x]}"
    return None


def _check_iii(f: PartialMap, x: int) -> str | None:
    if f.target.in_s(f.images[x]) != f.source.in_s(x):
        return f"{f.source.names[x]}: membership in S and in the preimage of T differ"
    return None


def _check_iv(f: PartialMap, s: int) -> str | None:
    X, img = f.source, f.images
    for x in _bits(X.up(s)):
        if img[x] is None:
            continue
        ok = False
        for s2 in _bits(X.up(s) & X.S):
            if img[s2] is None:
                continue
            for x2 in _bits(X.up(s2)):
                if img[x2] == img[x]:
                    ok = True
                    break
            if ok:
                break
        if not ok:
            return f"no S-point of dom between {X.names[s]} and a preimage of f({X.names[x]})"
    return None


def is_morphism(f: PartialMap) -> MorphismReport:
    """Check conditions (i)-(iv) in order; report the first violation."""
    X = f.source
    dom = [x for x in range(X.n) if f.images[x] is not None]
    for name, check, where in (
        ("i", _check_i, dom),
        ("ii", _check_ii, dom),
        ("iii", _check_iii, dom),
        ("iv", _check_iv, _bits(X.S)),
    ):
        for x in where:
            msg = check(f, x)
            if msg is not None:
                return MorphismReport(False, name, msg)
    return MorphismReport(True)


def morphisms(x: SPoset, y: SPoset) -> Iterator[PartialMap]:
    """All morphisms x -> y, by backtracking top-down with incremental checks."""
    order = x.poset.height_order()
    images: list[int | None] = [None] * x.n
    choices = [None] + list(range(y.n))

    def step(k: int):
        if k == len(order):
            yield PartialMap(x, y, tuple(images))
            return
        e = order[k]
        for v in choices:
            images[e] = v
            f = PartialMap(x, y, tuple(images))
            if v is not None and (_check_iii(f, e) or _check_i(f, e) or _check_ii(f, e)):
                continue
            if x.in_s(e) and _check_iv(f, e):
                continue
            yield from step(k + 1)
        images[e] = None

    yield from step(0)


# ----------------------------------------------------------- covers, retracts


def find_covers(x: SPoset, alpha: int) -> list[int]:
    """S-points whose immediate successors are exactly ``alpha``."""
    if not x.is_antichain(alpha):
        raise ValueError(f"{x.subset(alpha)} is not an antichain")
    return [s for s in _bits(x.S) if x.immediate_successors(s) == alpha]


@dataclass(frozen=True)
class ProjectivityReport:
    projective: bool
    uncovered: int | None = None

    def __bool__(self) -> bool:
        return self.projective


def projectivity(x: SPoset) -> ProjectivityReport:
    """Every antichain not contained in S needs a cover.

    The empty antichain is contained in S, so it never takes part.
    """
    for alpha in x.antichains():
        if alpha & ~x.S and not find_covers(x, alpha):
            return ProjectivityReport(False, alpha)
    return ProjectivityReport(True)


def is_projective_dual(x: SPoset) -> bool:
    return projectivity(x).projective


class NotProjective(ValueError):
    pass


def minimal_elements(x: SPoset, mask: int) -> int:
    out = 0
    for a in _bits(mask):
        if not any(x.lt(b, a) for b in _bits(mask)):
            out |= 1 << a
    return out


def build_retract(e: PartialMap) -> PartialMap:
    """A retraction r of the total embedding e, defined top-down by height."""
    X, Y = e.source, e.target
    if not (e.is_total() and e.is_injective() and is_morphism(e)):
        raise ValueError("not a total injective morphism")
    report = projectivity(X)
    if not report:
        raise NotProjective(f"antichain {X.subset(report.uncovered)} has no cover")
    back = {v: i for i, v in enumerate(e.images)}
    r: list[int | None] = [None] * Y.n
    for y in Y.poset.height_order():
        if y in back:
            r[y] = back[y]
            continue
        above = 0
        for y2 in _bits(Y.strict_up(y)):
            if r[y2] is not None:
                above |= 1 << r[y2]
        alpha = minimal_elements(X, above)
        if not Y.in_s(y) or alpha & ~X.S == 0:
            continue
        covers = find_covers(X, alpha)
        r[y] = covers[0]
    return PartialMap(Y, X, tuple(r))


def retracts(e: PartialMap) -> Iterator[PartialMap]:
    """Every partial map r with r . e = id that is a morphism (exhaustive)."""
    X, Y = e.source, e.target
    back = {v: i for i, v in enumerate(e.images)}
    free = [y for y in range(Y.n) if y not in back]
    base = [back.get(y) for y in range(Y.n)]
    for combo in np.ndindex(*([X.n + 1] * len(free))):
        imgs = list(base)
        for y, c in zip(free, combo):
            imgs[y] = None if c == X.n else int(c)
        r = PartialMap(Y, X, tuple(imgs))
        if is_morphism(r):
            yield r


# ------------------------------------------------------------------- duality


@lru_cache(maxsize=4096)
def dual_algebra(x: SPoset) -> FiniteAlgebra:
    """Up-sets of x as a NIS algebra; element k is the k-th up-set in numeric order."""
    ups = x.poset.upsets()
    idx = {u: i for i, u in enumerate(ups)}
    n = len(ups)
    upmask = [x.up(w) for w in range(x.n)]
    supmask = [x.up(w) & x.S for w in range(x.n)]

    def imp_mask(u: int, v: int) -> int:
        bad = u & ~v
        return sum(1 << w for w in range(x.n) if upmask[w] & bad == 0)

    def nuc_mask(u: int) -> int:
        return sum(1 << w for w in range(x.n) if supmask[w] & ~u == 0)

    tables = {
        TOP: np.array(idx[x.poset.full]),
        AND: np.array([[idx[u & v] for v in ups] for u in ups]),
        IMP: np.array([[idx[imp_mask(u, v)] for v in ups] for u in ups]),
        NUC: np.array([idx[nuc_mask(u)] for u in ups]),
    }
    return FiniteAlgebra(NIS, tables, (None,) * n)


def upset_of(alg_index: int, x: SPoset) -> int:
    return x.poset.upsets()[alg_index]


def dual_of_map(f: PartialMap, check: bool = True) -> Homomorphism:
    """h: dual(target) -> dual(source), h(V) = {x : f(x') in V for all x' >= x in dom}."""
    X, Y = f.source, f.target
    if check and not is_morphism(f):
        raise ValueError("not a morphism")
    reach = []
    for w in range(X.n):
        m = 0
        for w2 in _bits(X.up(w)):
            if f.images[w2] is not None:
                m |= 1 << f.images[w2]
        reach.append(m)
    src_ups = Y.poset.upsets()
    dst_idx = {u: i for i, u in enumerate(X.poset.upsets())}
    mapping = []
    for v in src_ups:
        mapping.append(dst_idx[sum(1 << w for w in range(X.n) if reach[w] & ~v == 0)])
    return Homomorphism(dual_algebra(Y), dual_algebra(X), tuple(mapping))


# --------------------------------------------------------------- enumerators


def sposets_of_size(n: int) -> list[SPoset]:
    """All S-posets with n elements up to isomorphism."""
    return [SPoset(p, s) for p, s in marked_posets_of_size(n)]


def sposets_up_to(n: int) -> list[SPoset]:
    return [x for k in range(n + 1) for x in sposets_of_size(k)]


def embeddings_up_to(x: SPoset, max_size: int) -> Iterator[PartialMap]:
    """Total injective morphisms x -> Y with |Y| <= max_size.

    Such a map is an order-embedding onto an up-set whose T-points are
    exactly the images of S, so Y is x with new points added below or
    beside it; new points are added one at a time as minimal elements.
    """

    def grow(p: Poset, t: int, extra: int) -> Iterator[tuple[Poset, int]]:
        yield p, t
        if extra == 0:
            return
        n = p.n
        for u in p.upsets():
            q = Poset(n + 1, tuple(p.up) + (u | 1 << n,))
            for mark in (0, 1):
                yield from grow(q, t | (mark << n), extra - 1)

    seen = set()
    for p, t in grow(x.poset, x.S, max_size - x.n):
        y = SPoset(p, t)
        key = (p.up, t)
        if key in seen:
            continue
        seen.add(key)
        yield PartialMap(x, y, tuple(range(x.n)))


__all__ = [
    "MorphismReport",
    "NotProjective",
    "PartialMap",
    "ProjectivityReport",
    "SPoset",
    "build_retract",
    "dual_algebra",
    "dual_of_map",
    "embeddings_up_to",
    "find_covers",
    "is_morphism",
    "is_projective_dual",
    "minimal_elements",
    "morphisms",
    "posets_of_size",
    "projectivity",
    "retracts",
    "sposets_of_size",
    "sposets_up_to",
    "upset_of",
]
