"""Intuitionistic propositional formulas and finite Kripke models.

Syntax::

    ~A        negation, sugar for A -> _|_
    A & B     conjunction
    A | B     disjunction
    A -> B    implication (right associative)
    _|_, !F   falsum

Binding strength, tightest first: ``~``, ``&``, ``|``, ``->``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import permutations, product
from typing import Optional

from .diagrams import Poset

__all__ = [
    "Formula",
    "Atom",
    "Bot",
    "And",
    "Or",
    "Imp",
    "neg",
    "top",
    "ParseError",
    "parse_formula",
    "atoms",
    "subformulas",
    "KripkeModel",
    "CounterModel",
    "forces",
    "rooted_posets",
    "up_sets",
    "countermodel_search",
    "classical_tautology",
    "format_countermodel",
]


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Bot(Formula):
    def __str__(self):
        return "_|_"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"{_wrap(self.left, 3)} & {_wrap(self.right, 3, strict=True)}"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"{_wrap(self.left, 2)} | {_wrap(self.right, 2, strict=True)}"


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        if self.right == Bot():
            return f"~{_wrap(self.left, 4)}"
        return f"{_wrap(self.left, 1, strict=True)} -> {_wrap(self.right, 1)}"


def _prec(f: Formula) -> int:
    if isinstance(f, Imp):
        return 4 if f.right == Bot() else 1
    return {And: 3, Or: 2}.get(type(f), 5)


def _wrap(f: Formula, level: int, strict: bool = False) -> str:
    p = _prec(f)
    if p < level or (strict and p == level):
        return f"({f})"
    return str(f)


def neg(f: Formula) -> Formula:
    return Imp(f, Bot())


def top() -> Formula:
    return Imp(Bot(), Bot())


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"syntax error at position {position}: {message}")


_TOKEN = re.compile(r"\s*(?:(->|_\|_|!F|[&|~()])|([A-Za-z][A-Za-z0-9_]*))")

# binary operator -> (precedence, right associative, constructor)
_BINARY = {"->": (1, True, Imp), "|": (2, False, Or), "&": (3, False, And)}


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = "op" if m.group(1) else "atom"
        toks.append((kind, m.group(1) or m.group(2), m.start(m.lastindex)))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, what: str):
        kind, val, pos = self.peek()
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"expected {what}, found {found}", pos)

    def primary(self) -> Formula:
        kind, val, _ = self.peek()
        if kind == "atom":
            self.take()
            return Atom(val)
        if val in ("_|_", "!F"):
            self.take()
            return Bot()
        if val == "~":
            self.take()
            return neg(self.primary())
        if val == "(":
            self.take()
            f = self.expr(1)
            if self.peek()[1] != ")":
                self.fail("')'")
            self.take()
            return f
        self.fail("a formula")

    def expr(self, min_prec: int) -> Formula:
        lhs = self.primary()
        while True:
            kind, val, _ = self.peek()
            if kind != "op" or val not in _BINARY:
                return lhs
            prec, right, ctor = _BINARY[val]
            if prec < min_prec:
                return lhs
            self.take()
            rhs = self.expr(prec if right else prec + 1)
            lhs = ctor(lhs, rhs)


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.expr(1)
    if p.peek()[0] != "end":
        p.fail("an operator or end of input")
    return f


def atoms(f: Formula) -> tuple:
    out = set()
    for g in subformulas(f):
        if isinstance(g, Atom):
            out.add(g.name)
    return tuple(sorted(out))


def subformulas(f: Formula) -> list:
    out = [f]
    if isinstance(f, (And, Or, Imp)):
        out += subformulas(f.left) + subformulas(f.right)
    return out


@dataclass(frozen=True)
class KripkeModel:
    worlds: Poset
    atoms: tuple
    true_at: frozenset  # pairs (world, atom) where the atom holds

    def __post_init__(self):
        for w, p in self.true_at:
            if p not in self.atoms or w not in self.worlds.elements:
                raise ValueError(f"valuation entry ({w}, {p}) outside the model")
            for v in self.worlds.up(w):
                if (v, p) not in self.true_at:
                    raise ValueError(f"valuation not monotone: {p} holds at {w} but not at {v}")

    def valuation(self, w, p) -> bool:
        return (w, p) in self.true_at


def forces(m: KripkeModel, w, f: Formula, _memo: Optional[dict] = None) -> bool:
    if w not in m.worlds.elements:
        raise KeyError(f"unknown world {w!r}")
    memo = {} if _memo is None else _memo
    key = (w, f)
    if key in memo:
        return memo[key]
    if isinstance(f, Atom):
        if f.name not in m.atoms:
            raise KeyError(f"atom {f.name!r} has no valuation in this model")
        res = m.valuation(w, f.name)
    elif isinstance(f, Bot):
        res = False
    elif isinstance(f, And):
        res = forces(m, w, f.left, memo) and forces(m, w, f.right, memo)
    elif isinstance(f, Or):
        res = forces(m, w, f.left, memo) or forces(m, w, f.right, memo)
    elif isinstance(f, Imp):
        res = all(not forces(m, v, f.left, memo) or forces(m, v, f.right, memo)
                  for v in m.worlds.up(w))
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[key] = res
    return res


def _code(n: int, rel) -> tuple:
    return tuple(int((i, j) in rel) for i in range(n) for j in range(i + 1, n))


def rooted_posets(n: int) -> list:
    """Posets on ``0..n-1`` with least element 0, one per isomorphism class.

    Elements are labelled so that ``i <= j`` implies ``i <= j`` as
    integers; the representative is the labelling with the
    lexicographically smallest relation code.  Sorted by that code.
    """
    if n < 1:
        return []
    pairs = [(i, j) for i in range(1, n) for j in range(i + 1, n)]
    base = {(0, j) for j in range(n)} | {(i, i) for i in range(n)}
    found = {}
    for bits in product((0, 1), repeat=len(pairs)):
        rel = base | {p for p, b in zip(pairs, bits) if b}
        if any((a, d) not in rel for (a, b) in rel for (c, d) in rel if b == c):
            continue
        best = None
        for perm in permutations(range(1, n)):
            sigma = (0,) + perm
            new = {(sigma[a], sigma[b]) for a, b in rel}
            if any(a > b for a, b in new):
                continue
            code = _code(n, new)
            if best is None or code < best[0]:
                best = (code, frozenset(new))
        found.setdefault(best[0], best[1])
    return [Poset(tuple(range(n)), found[k]) for k in sorted(found)]


def up_sets(p: Poset) -> list:
    """Upward-closed subsets, ordered by bitmask over the element order."""
    els = p.elements
    out = []
    for mask in range(1 << len(els)):
        s = {els[i] for i in range(len(els)) if mask >> i & 1}
        if all(v in s for w in s for v in p.up(w)):
            out.append(frozenset(s))
    return out


@dataclass(frozen=True)
class CounterModel:
    model: KripkeModel
    root: object


def countermodel_search(f: Formula, max_worlds: int) -> Optional[CounterModel]:
    """Smallest refuting rooted model in the documented scan order, or None.

    None only means ``f`` holds in every rooted model with at most
    ``max_worlds`` worlds.
    """
    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    names = atoms(f)
    for n in range(1, max_worlds + 1):
        for p in rooted_posets(n):
            ups = up_sets(p)
            for choice in product(ups, repeat=len(names)):
                true_at = frozenset((w, a) for a, s in zip(names, choice) for w in s)
                m = KripkeModel(p, names, true_at)
                if not forces(m, p.least(), f):
                    return CounterModel(m, p.least())
    return None


def classical_tautology(f: Formula) -> bool:
    names = atoms(f)

    def ev(g, val):
        if isinstance(g, Atom):
            return val[g.name]
        if isinstance(g, Bot):
            return False
        if isinstance(g, And):
            return ev(g.left, val) and ev(g.right, val)
        if isinstance(g, Or):
            return ev(g.left, val) or ev(g.right, val)
        return (not ev(g.left, val)) or ev(g.right, val)

    return all(ev(f, dict(zip(names, bits))) for bits in product((False, True), repeat=len(names)))


def format_countermodel(cm: CounterModel) -> str:
    m = cm.model
    p = m.worlds
    lines = ["worlds: " + " ".join(map(str, p.elements)), f"root: {cm.root}"]
    order = " ".join(f"{a}<{b}" for a, b in p.pairs())
    lines.append("order: " + (order or "(none)"))
    lines.append("valuation:")
    for w in p.elements:
        true = [a for a in m.atoms if m.valuation(w, a)]
        lines.append(f"  {w}: " + (" ".join(true) if true else "-"))
    return "\n".join(lines)
