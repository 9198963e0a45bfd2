"""Formulas, parsing and printing, substitutions and Pi2-rules.

Terms are hash-consed: two structurally equal terms are the same Python
object, so ``==`` is identity and hashing is O(1) even for heavily shared
DAGs produced by repeated substitution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

TOP, BOT, VAR, AND, OR, IMP, NUC = "T", "F", "var", "and", "or", "imp", "l"

ARITY = {TOP: 0, BOT: 0, AND: 2, OR: 2, IMP: 2, NUC: 1}


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownConnectiveError(ParseError):
    pass


# ---------------------------------------------------------------- signatures


@dataclass(frozen=True)
class Signature:
    tag: str
    connectives: tuple[tuple[str, int], ...]

    @property
    def ops(self) -> tuple[str, ...]:
        return tuple(op for op, _ in self.connectives)

    def has(self, op: str) -> bool:
        return op in self.ops

    def __str__(self) -> str:
        return self.tag


ISL = Signature("isl", ((TOP, 0), (AND, 2), (IMP, 2)))
LC = Signature("lc", ((TOP, 0), (BOT, 0), (AND, 2), (OR, 2), (IMP, 2)))
NIS = Signature("nis", ((TOP, 0), (AND, 2), (IMP, 2), (NUC, 1)))

SIGNATURES = {s.tag: s for s in (ISL, LC, NIS)}


def signature(tag: str | Signature) -> Signature:
    if isinstance(tag, Signature):
        return tag
    try:
        return SIGNATURES[tag.lower()]
    except KeyError:
        raise ValueError(f"unknown variety {tag!r}; expected one of isl, lc, nis") from None


# --------------------------------------------------------------------- terms


class Term:
    __slots__ = ("op", "args", "name", "_hash", "_vars", "__weakref__")

    _table: dict[tuple, Term] = {}

    op: str
    args: tuple[Term, ...]
    name: str | None

    def __new__(cls, op: str, args: tuple[Term, ...] = (), name: str | None = None):
        key = (op, name, args)
        found = cls._table.get(key)
        if found is not None:
            return found
        if op == VAR:
            if not name or not _IDENT.fullmatch(name) or name in _KEYWORDS:
                raise ValueError(f"bad variable name {name!r}")
        elif ARITY.get(op) != len(args):
            raise ValueError(f"connective {op!r} takes {ARITY.get(op)} arguments, got {len(args)}")
        self = object.__new__(cls)
        self.op = op
        self.args = args
        self.name = name
        self._hash = hash(key)
        self._vars = None
        cls._table[key] = self
        return self

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (Term, (self.op, self.args, self.name))

    def __repr__(self) -> str:
        return f"Term({print_term(self)!r})"

    def __str__(self) -> str:
        return print_term(self)

    @property
    def is_var(self) -> bool:
        return self.op == VAR

    def variables(self) -> frozenset[str]:
        if self._vars is None:
            if self.op == VAR:
                self._vars = frozenset((self.name,))
            else:
                acc: frozenset[str] = frozenset()
                for a in self.args:
                    acc |= a.variables()
                self._vars = acc
        return self._vars

    def subterms(self) -> Iterator[Term]:
        """Distinct subterms, children before parents."""
        seen: set[int] = set()
        stack: list[tuple[Term, bool]] = [(self, False)]
        while stack:
            t, expanded = stack.pop()
            if id(t) in seen:
                continue
            if expanded:
                seen.add(id(t))
                yield t
            else:
                stack.append((t, True))
                for a in t.args:
                    if id(a) not in seen:
                        stack.append((a, False))

    def size(self) -> int:
        """Tree size (shared subterms counted once per occurrence)."""
        sizes: dict[int, int] = {}
        for t in self.subterms():
            sizes[id(t)] = 1 + sum(sizes[id(a)] for a in t.args)
        return sizes[id(self)]

    def depth(self) -> int:
        depths: dict[int, int] = {}
        for t in self.subterms():
            depths[id(t)] = 1 + max((depths[id(a)] for a in t.args), default=-1)
        return depths[id(self)]


def var(name: str) -> Term:
    return Term(VAR, (), name)


def top() -> Term:
    return Term(TOP)


def bot() -> Term:
    return Term(BOT)


def conj(a: Term, b: Term) -> Term:
    return Term(AND, (a, b))


def disj(a: Term, b: Term) -> Term:
    return Term(OR, (a, b))


def imp(a: Term, b: Term) -> Term:
    return Term(IMP, (a, b))


def nuc(a: Term) -> Term:
    return Term(NUC, (a,))


def neg(a: Term) -> Term:
    return Term(IMP, (a, bot()))


def iff(a: Term, b: Term) -> Term:
    return conj(imp(a, b), imp(b, a))


def big_conj(terms: Iterable[Term]) -> Term:
    terms = list(terms)
    if not terms:
        return top()
    acc = terms[0]
    for t in terms[1:]:
        acc = conj(acc, t)
    return acc


def uses_only(t: Term, sig: Signature) -> bool:
    ops = set(sig.ops)
    return all(s.op == VAR or s.op in ops for s in t.subterms())


# ------------------------------------------------------------------- varsets


def varset(names: Iterable[str]) -> tuple[str, ...]:
    """Finite set of variable names in lexicographic order."""
    return tuple(sorted(set(names)))


def term_vars(terms: Iterable[Term]) -> tuple[str, ...]:
    acc: set[str] = set()
    for t in terms:
        acc |= t.variables()
    return varset(acc)


def fresh_names(count: int, avoid: Iterable[str], prefix: str = "w") -> tuple[str, ...]:
    avoid = set(avoid)
    out: list[str] = []
    i = 0
    while len(out) < count:
        name = f"{prefix}{i}"
        if name not in avoid:
            out.append(name)
        i += 1
    return tuple(out)


# ----------------------------------------------------------------- parsing

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_KEYWORDS = {"T", "F", "l"}
_TOKEN = re.compile(r"\s*(?:(->)|(/\\)|(\\/)|(~)|(\()|(\))|([A-Za-z_][A-Za-z0-9_']*))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastindex)
        kind = ("->", "/\\", "\\/", "~", "(", ")", "ident")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.text = text
        self.sig = sig
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def require(self, op: str, pos: int, symbol: str) -> None:
        if not self.sig.has(op):
            raise UnknownConnectiveError(
                f"connective {symbol!r} is not available in {self.sig.tag}", pos, self.text
            )

    def formula(self) -> Term:
        left = self.disj()
        kind, _, pos = self.peek()
        if kind == "->":
            self.take()
            return imp(left, self.formula())
        return left

    def disj(self) -> Term:
        left = self.conj()
        while self.peek()[0] == "\\/":
            _, sym, pos = self.take()
            self.require(OR, pos, sym)
            left = disj(left, self.conj())
        return left

    def conj(self) -> Term:
        left = self.unary()
        while self.peek()[0] == "/\\":
            self.take()
            left = conj(left, self.unary())
        return left

    def unary(self) -> Term:
        kind, value, pos = self.peek()
        if kind == "~":
            self.take()
            self.require(BOT, pos, "~")
            return neg(self.unary())
        if kind == "ident" and value == "l":
            self.take()
            self.require(NUC, pos, "l")
            return nuc(self.unary())
        return self.atom()

    def atom(self) -> Term:
        kind, value, pos = self.take()
        if kind == "(":
            inner = self.formula()
            k, _, p = self.take()
            if k != ")":
                raise ParseError("expected ')'", p, self.text)
            return inner
        if kind == "ident":
            if value == "T":
                return top()
            if value == "F":
                self.require(BOT, pos, "F")
                return bot()
            return var(value)
        if kind == "eof":
            raise ParseError("unexpected end of input", pos, self.text)
        raise ParseError(f"unexpected token {value!r}", pos, self.text)


def parse_term(text: str, sig: Signature | str) -> Term:
    """Parse ``text`` in the ASCII formula grammar of ``sig``."""
    parser = _Parser(text, signature(sig))
    term = parser.formula()
    kind, value, pos = parser.peek()
    if kind != "eof":
        raise ParseError(f"unexpected token {value!r}", pos, text)
    return term


# ----------------------------------------------------------------- printing

_PREC = {IMP: 1, OR: 2, AND: 3, NUC: 4}


def _prec(t: Term) -> int:
    if t.op == IMP and t.args[1].op == BOT:
        return 4
    return _PREC.get(t.op, 5)


def print_term(t: Term) -> str:
    out: dict[int, str] = {}
    for s in t.subterms():
        out[id(s)] = _print_node(s, out)
    return out[id(t)]


def _wrap(child: Term, text: dict[int, str], min_prec: int) -> str:
    s = text[id(child)]
    return f"({s})" if _prec(child) < min_prec else s


def _print_node(t: Term, text: dict[int, str]) -> str:
    op = t.op
    if op == VAR:
        return t.name
    if op in (TOP, BOT):
        return op
    if op == IMP:
        a, b = t.args
        if b.op == BOT:
            return "~" + _wrap(a, text, 4)
        return f"{_wrap(a, text, 2)} -> {_wrap(b, text, 1)}"
    if op == OR:
        a, b = t.args
        return f"{_wrap(a, text, 2)} \\/ {_wrap(b, text, 3)}"
    if op == AND:
        a, b = t.args
        return f"{_wrap(a, text, 3)} /\\ {_wrap(b, text, 4)}"
    if op == NUC:
        (a,) = t.args
        inner = _wrap(a, text, 4)
        return f"l {inner}" if not inner.startswith("(") else f"l{inner}"
    raise AssertionError(op)


# ------------------------------------------------------------ substitutions


def substitute(t: Term, mapping: Mapping[str, Term], memo: dict[int, Term] | None = None) -> Term:
    """Simultaneous replacement of variables; unmapped variables stay put."""
    if memo is None:
        memo = {}
    for s in t.subterms():
        if id(s) in memo:
            continue
        if s.op == VAR:
            memo[id(s)] = mapping.get(s.name, s)
        elif s.args:
            memo[id(s)] = Term(s.op, tuple(memo[id(a)] for a in s.args))
        else:
            memo[id(s)] = s
    return memo[id(t)]


@dataclass(frozen=True)
class Substitution:
    """A total map from ``domain`` variables to terms over ``codomain``."""

    domain: tuple[str, ...]
    codomain: tuple[str, ...]
    images: tuple[Term, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.domain) != len(self.images):
            raise ValueError("substitution must be total on its domain")
        if list(self.domain) != sorted(set(self.domain)):
            raise ValueError("domain must be a sorted set of variables")
        if list(self.codomain) != sorted(set(self.codomain)):
            raise ValueError("codomain must be a sorted set of variables")
        cod = set(self.codomain)
        for x, t in zip(self.domain, self.images):
            extra = t.variables() - cod
            if extra:
                raise ValueError(f"image of {x} uses {sorted(extra)} outside the codomain")

    @classmethod
    def from_map(
        cls,
        mapping: Mapping[str, Term],
        domain: Iterable[str] | None = None,
        codomain: Iterable[str] | None = None,
    ) -> Substitution:
        """Build a substitution; domain variables missing from ``mapping`` map to themselves."""
        dom = varset(domain if domain is not None else mapping)
        images = tuple(mapping.get(x, var(x)) for x in dom)
        if codomain is None:
            cod = term_vars(images)
        else:
            cod = varset(codomain)
        return cls(dom, cod, images)

    @classmethod
    def identity(cls, variables: Iterable[str]) -> Substitution:
        vs = varset(variables)
        return cls(vs, vs, tuple(var(x) for x in vs))

    def __getitem__(self, name: str) -> Term:
        return self.images[self.domain.index(name)]

    def as_dict(self) -> dict[str, Term]:
        return dict(zip(self.domain, self.images))

    def restrict(self, names: Iterable[str]) -> Substitution:
        keep = varset(names)
        m = self.as_dict()
        imgs = tuple(m[x] for x in keep)
        return Substitution(keep, self.codomain, imgs)

    def with_codomain(self, codomain: Iterable[str]) -> Substitution:
        return Substitution(self.domain, varset(codomain), self.images)

    def __str__(self) -> str:
        body = ", ".join(f"{x} |-> {print_term(t)}" for x, t in zip(self.domain, self.images))
        return "{" + body + "}"

    def to_json(self) -> dict[str, str]:
        return {x: print_term(t) for x, t in zip(self.domain, self.images)}


def apply_substitution(s: Substitution, t: Term) -> Term:
    outside = t.variables() - set(s.domain)
    if outside:
        raise ValueError(f"variables {sorted(outside)} are outside the substitution domain")
    return substitute(t, s.as_dict())


def compose(outer: Substitution, inner: Substitution) -> Substitution:
    """``outer`` after ``inner``: p |-> outer(inner(p))."""
    missing = set(inner.codomain) - set(outer.domain)
    if missing:
        raise ValueError(f"codomain variables {sorted(missing)} of the inner map are not in the outer domain")
    memo: dict[int, Term] = {}
    m = outer.as_dict()
    images = tuple(substitute(t, m, memo) for t in inner.images)
    return Substitution(inner.domain, outer.codomain, images)


def is_c_invariant(s: Substitution, c: Iterable[str]) -> bool:
    c = set(c)
    if not c <= set(s.domain) or not c <= set(s.codomain):
        raise ValueError("restriction must be contained in both domain and codomain")
    for x, t in zip(s.domain, s.images):
        if x in c:
            if t is not var(x):
                return False
        elif t.variables() & c:
            return False
    return True


# ----------------------------------------------------------------- Pi2-rules


@dataclass(frozen=True)
class Pi2Rule:
    """forall bound (premises) / conclusion."""

    bound: tuple[str, ...]
    premises: tuple[Term, ...]
    conclusion: Term
    sig: Signature = ISL

    def __post_init__(self):
        object.__setattr__(self, "bound", varset(self.bound))
        clash = self.conclusion.variables() & set(self.bound)
        if clash:
            raise ValueError(f"bound variables {sorted(clash)} occur in the conclusion")
        for t in (*self.premises, self.conclusion):
            if not uses_only(t, self.sig):
                raise ValueError(f"{print_term(t)} is not a {self.sig.tag} formula")

    @property
    def free(self) -> tuple[str, ...]:
        return varset(set(term_vars((*self.premises, self.conclusion))) - set(self.bound))

    @property
    def is_standard(self) -> bool:
        return not (set(self.bound) & set(term_vars(self.premises)))

    def __str__(self) -> str:
        prem = ", ".join(print_term(p) for p in self.premises)
        q = f"forall {' '.join(self.bound)} " if self.bound else ""
        return f"{q}({prem}) / {print_term(self.conclusion)}"


def parse_terms(texts: Sequence[str], sig: Signature | str) -> tuple[Term, ...]:
    return tuple(parse_term(s, sig) for s in texts)
