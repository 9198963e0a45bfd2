"""Small finite posets up to isomorphism, stored as up-set bitmasks."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations


@dataclass(frozen=True)
class Poset:
    """Elements ``0..n-1``; ``up[i]`` is the bitmask of ``{j : i <= j}``."""

    n: int
    up: tuple[int, ...]

    def leq(self, i: int, j: int) -> bool:
        return bool(self.up[i] >> j & 1)

    def lt(self, i: int, j: int) -> bool:
        return i != j and self.leq(i, j)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def down(self, i: int) -> int:
        return sum(1 << j for j in range(self.n) if self.leq(j, i))

    def upsets(self) -> list[int]:
        """All up-closed subsets as bitmasks, in increasing numeric order."""
        out = []
        for mask in range(1 << self.n):
            if all(self.up[i] & ~mask == 0 for i in range(self.n) if mask >> i & 1):
                out.append(mask)
        return out

    def immediate_successors(self, i: int) -> int:
        strict = self.up[i] & ~(1 << i)
        mask = 0
        for j in range(self.n):
            if strict >> j & 1 and not any(
                k != j and strict >> k & 1 and self.lt(k, j) for k in range(self.n)
            ):
                mask |= 1 << j
        return mask

    def is_rooted(self) -> bool:
        return any(self.up[i] == self.full for i in range(self.n))

    def is_prelinear(self) -> bool:
        """Every principal up-set is a chain."""
        for i in range(self.n):
            ups = [j for j in range(self.n) if self.up[i] >> j & 1]
            for a in ups:
                for b in ups:
                    if not (self.leq(a, b) or self.leq(b, a)):
                        return False
        return True

    def height_order(self) -> list[int]:
        """Elements sorted so that every element comes after everything above it."""
        height = {}
        for i in sorted(range(self.n), key=lambda k: bin(self.up[k]).count("1")):
            above = [j for j in range(self.n) if self.lt(i, j)]
            height[i] = 1 + max((height[j] for j in above), default=-1)
        return sorted(range(self.n), key=lambda k: (height[k], k))

    @classmethod
    def from_pairs(cls, n: int, pairs) -> Poset:
        """Reflexive-transitive closure of generating pairs ``(a, b)`` meaning a <= b."""
        up = [1 << i for i in range(n)]
        for a, b in pairs:
            up[a] |= 1 << b
        changed = True
        while changed:
            changed = False
            for i in range(n):
                acc = up[i]
                for j in range(n):
                    if acc >> j & 1:
                        acc |= up[j]
                if acc != up[i]:
                    up[i] = acc
                    changed = True
        for i in range(n):
            for j in range(i + 1, n):
                if up[i] >> j & 1 and up[j] >> i & 1:
                    raise ValueError(f"generating pairs force {i} = {j}; not antisymmetric")
        return cls(n, tuple(up))

    def relabel(self, perm: tuple[int, ...]) -> Poset:
        """Element ``i`` becomes ``perm[i]``."""
        up = [0] * self.n
        for i in range(self.n):
            m = 0
            for j in range(self.n):
                if self.up[i] >> j & 1:
                    m |= 1 << perm[j]
            up[perm[i]] = m
        return Poset(self.n, tuple(up))


def _key(p: Poset) -> tuple[int, ...]:
    return p.up


def canonical(p: Poset, marks: int = 0) -> tuple[Poset, int]:
    """Canonical representative of ``p`` (with a marked subset) under relabelling."""
    best = None
    sig = [
        (bin(p.up[i]).count("1"), bin(p.down(i)).count("1"), marks >> i & 1) for i in range(p.n)
    ]
    order = sorted(range(p.n), key=lambda i: sig[i])
    # only permutations that respect the invariant ordering
    groups: list[list[int]] = []
    for i in order:
        if groups and sig[groups[-1][0]] == sig[i]:
            groups[-1].append(i)
        else:
            groups.append([i])

    def expand(k: int, prefix: list[int]):
        if k == len(groups):
            yield prefix
            return
        for perm in permutations(groups[k]):
            yield from expand(k + 1, prefix + list(perm))

    for seq in expand(0, []):
        perm = [0] * p.n
        for new, old in enumerate(seq):
            perm[old] = new
        q = p.relabel(tuple(perm))
        m = sum(1 << perm[i] for i in range(p.n) if marks >> i & 1)
        cand = (q.up, m)
        if best is None or cand < best:
            best = cand
    if best is None:
        return p, marks
    return Poset(p.n, best[0]), best[1]


@lru_cache(maxsize=None)
def posets_of_size(n: int) -> tuple[Poset, ...]:
    """All posets on ``n`` elements up to isomorphism."""
    if n == 0:
        return (Poset(0, ()),)
    found: dict[tuple[int, ...], Poset] = {}
    for q in posets_of_size(n - 1):
        for u in q.upsets():
            # new element n-1 sits below exactly the up-set u (plus itself)
            up = tuple(q.up) + (u | 1 << (n - 1),)
            c, _ = canonical(Poset(n, up))
            found.setdefault(c.up, c)
    return tuple(found[k] for k in sorted(found))


def posets_up_to(n: int) -> list[Poset]:
    return [p for k in range(n + 1) for p in posets_of_size(k)]


@lru_cache(maxsize=None)
def rooted_posets_of_size(n: int) -> tuple[Poset, ...]:
    """Posets with a least element, up to isomorphism (root added below a smaller poset)."""
    if n == 0:
        return ()
    out = []
    for q in posets_of_size(n - 1):
        up = tuple(q.up) + ((1 << n) - 1,)
        out.append(Poset(n, up))
    return tuple(out)


def rooted_posets_up_to(n: int) -> list[Poset]:
    return [p for k in range(1, n + 1) for p in rooted_posets_of_size(k)]


@lru_cache(maxsize=None)
def marked_posets_of_size(n: int) -> tuple[tuple[Poset, int], ...]:
    """Pairs (poset, subset mask) up to isomorphism."""
    found = {}
    for p in posets_of_size(n):
        for s in range(1 << n):
            c, m = canonical(p, s)
            found.setdefault((c.up, m), (c, m))
    return tuple(found[k] for k in sorted(found))
