"""Formula and cut-term language for colored linear orders.

Terms denote cuts (elements of the completion of S).  A term is a base
(a variable, or one of the constants ``min``/``max``) followed by a word of
basic functions ``U+``/``U-`` applied innermost-first.  Formulas are built
from ``<``, ``=``, color membership and membership in S.

The concrete syntax is an s-expression grammar::

    term := IDENT | min | max | (U+ C term) | (U- C term)
    form := true | false | (< t t) | (= t t) | (<= t t) | (in C t)
          | (inS t) | (and f+) | (or f+) | (not f) | (exists v f) | (forall v f)
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Union

PLUS = "+"
MINUS = "-"
MIN = "min"
MAX = "max"
CONSTANTS = (MIN, MAX)

KEYWORDS = frozenset(
    {"true", "false", "<", "=", "<=", ">=", "in", "inS", "and", "or", "not",
     "exists", "forall", "min", "max", "U+", "U-"})

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_'.]*\Z")


@dataclass(frozen=True)
class CutTerm:
    base: str
    word: tuple[tuple[str, str], ...] = ()

    @property
    def is_constant(self) -> bool:
        return self.base in CONSTANTS

    @property
    def is_bare(self) -> bool:
        return not self.word

    def apply(self, color: str, sign: str) -> "CutTerm":
        return CutTerm(self.base, self.word + ((color, sign),))

    def up(self, color: str) -> "CutTerm":
        return self.apply(color, PLUS)

    def down(self, color: str) -> "CutTerm":
        return self.apply(color, MINUS)

    @property
    def head(self) -> tuple[str, str]:
        """Outermost basic function."""
        return self.word[-1]

    @property
    def inner(self) -> "CutTerm":
        return CutTerm(self.base, self.word[:-1])

    def __str__(self) -> str:
        return term_text(self)


def var(name: str) -> CutTerm:
    return CutTerm(name)


MIN_TERM = CutTerm(MIN)
MAX_TERM = CutTerm(MAX)


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True)
class Less(Formula):
    left: CutTerm
    right: CutTerm


@dataclass(frozen=True)
class Eq(Formula):
    left: CutTerm
    right: CutTerm


@dataclass(frozen=True)
class InColor(Formula):
    color: str
    term: CutTerm


@dataclass(frozen=True)
class InS(Formula):
    term: CutTerm


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


Atom = Union[Less, Eq, InColor, InS]
ATOM_TYPES = (Less, Eq, InColor, InS)


def is_atom(f: Formula) -> bool:
    return isinstance(f, ATOM_TYPES)


def is_literal(f: Formula) -> bool:
    return is_atom(f) or (isinstance(f, Not) and is_atom(f.arg))


def leq(a: CutTerm, b: CutTerm) -> Formula:
    return Not(Less(b, a))


# ---------------------------------------------------------------------------
# smart constructors (constant folding and flattening only)

def _flatten(args, kind, unit, zero) -> Optional[list]:
    out: list[Formula] = []
    seen: set = set()
    for a in args:
        if isinstance(a, type(unit)):
            continue
        if isinstance(a, type(zero)):
            return None
        for b in (a.args if isinstance(a, kind) else (a,)):
            if b not in seen:
                seen.add(b)
                out.append(b)
    for b in out:
        if isinstance(b, Not) and b.arg in seen:
            return None
    return out


def conj(*args: Formula) -> Formula:
    """Conjunction with constants folded, duplicates dropped and
    complementary literals detected."""
    out = _flatten(args, And, TRUE, FALSE)
    if out is None:
        return FALSE
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*args: Formula) -> Formula:
    out = _flatten(args, Or, FALSE, TRUE)
    if out is None:
        return TRUE
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bottom):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


# ---------------------------------------------------------------------------
# printing

def term_text(t: CutTerm) -> str:
    s = t.base
    for color, sign in t.word:
        s = f"(U{sign} {color} {s})"
    return s


def to_text(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Less):
        return f"(< {term_text(f.left)} {term_text(f.right)})"
    if isinstance(f, Eq):
        return f"(= {term_text(f.left)} {term_text(f.right)})"
    if isinstance(f, InColor):
        return f"(in {f.color} {term_text(f.term)})"
    if isinstance(f, InS):
        return f"(inS {term_text(f.term)})"
    if isinstance(f, And):
        if not f.args:
            return "true"
        return "(and " + " ".join(to_text(a) for a in f.args) + ")"
    if isinstance(f, Or):
        if not f.args:
            return "false"
        return "(or " + " ".join(to_text(a) for a in f.args) + ")"
    if isinstance(f, Not):
        return f"(not {to_text(f.arg)})"
    if isinstance(f, Exists):
        return f"(exists {f.var} {to_text(f.body)})"
    if isinstance(f, Forall):
        return f"(forall {f.var} {to_text(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# parsing

class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column


@dataclass
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == ";":  # comment to end of line
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if c in "()":
            toks.append(_Tok(c, line, col))
            i += 1
            col += 1
            continue
        j = i
        while j < len(text) and not text[j].isspace() and text[j] not in "();":
            j += 1
        toks.append(_Tok(text[i:j], line, col))
        col += j - i
        i = j
    return toks


class _Parser:
    def __init__(self, text: str, colors: Optional[Iterable[str]]):
        self.toks = _tokenize(text)
        self.pos = 0
        self.colors = None if colors is None else set(colors)
        self.bound: list[str] = []
        self.end = (text.count("\n") + 1, len(text.rsplit("\n", 1)[-1]) + 1)

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", *self.end)
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text:
            raise FormulaSyntaxError(f"expected {text!r}, got {tok.text!r}", tok.line, tok.col)
        return tok

    def ident(self) -> _Tok:
        tok = self.next()
        if tok.text in KEYWORDS or not _IDENT.match(tok.text):
            raise FormulaSyntaxError(f"expected identifier, got {tok.text!r}", tok.line, tok.col)
        return tok

    def color(self) -> str:
        tok = self.ident()
        if self.colors is not None and tok.text not in self.colors:
            raise FormulaSyntaxError(f"unknown color {tok.text!r}", tok.line, tok.col)
        return tok.text

    def term(self) -> CutTerm:
        tok = self.next()
        if tok.text == "(":
            head = self.next()
            if head.text not in ("U+", "U-"):
                raise FormulaSyntaxError(f"expected U+ or U-, got {head.text!r}", head.line, head.col)
            color = self.color()
            inner = self.term()
            self.expect(")")
            return inner.apply(color, head.text[1])
        if tok.text in CONSTANTS:
            return CutTerm(tok.text)
        if tok.text in KEYWORDS or not _IDENT.match(tok.text):
            raise FormulaSyntaxError(f"expected term, got {tok.text!r}", tok.line, tok.col)
        return CutTerm(tok.text)

    def formula(self) -> Formula:
        tok = self.next()
        if tok.text == "true":
            return TRUE
        if tok.text == "false":
            return FALSE
        if tok.text != "(":
            raise FormulaSyntaxError(f"expected formula, got {tok.text!r}", tok.line, tok.col)
        head = self.next()
        op = head.text
        if op in ("<", "=", "<=", ">="):
            a, b = self.term(), self.term()
            self.expect(")")
            if op == "<":
                return Less(a, b)
            if op == "=":
                return Eq(a, b)
            if op == "<=":
                return Not(Less(b, a))
            return Not(Less(a, b))
        if op == "in":
            c = self.color()
            t = self.term()
            self.expect(")")
            return InColor(c, t)
        if op == "inS":
            t = self.term()
            self.expect(")")
            return InS(t)
        if op in ("and", "or"):
            args = [self.formula()]
            while self.peek() is not None and self.peek().text != ")":
                args.append(self.formula())
            self.expect(")")
            return And(tuple(args)) if op == "and" else Or(tuple(args))
        if op == "not":
            f = self.formula()
            self.expect(")")
            return Not(f)
        if op in ("exists", "forall"):
            v = self.ident()
            if v.text in self.bound:
                raise FormulaSyntaxError(f"variable {v.text!r} shadows an enclosing binder", v.line, v.col)
            self.bound.append(v.text)
            body = self.formula()
            self.bound.pop()
            self.expect(")")
            return Exists(v.text, body) if op == "exists" else Forall(v.text, body)
        raise FormulaSyntaxError(f"unknown operator {op!r}", head.line, head.col)


def parse(text: str, colors: Optional[Iterable[str]] = None) -> Formula:
    """Parse formula source.  With ``colors`` given, unknown color names are errors."""
    p = _Parser(text, colors)
    f = p.formula()
    extra = p.peek()
    if extra is not None:
        raise FormulaSyntaxError(f"trailing input {extra.text!r}", extra.line, extra.col)
    return f


def parse_term(text: str, colors: Optional[Iterable[str]] = None) -> CutTerm:
    p = _Parser(text, colors)
    t = p.term()
    extra = p.peek()
    if extra is not None:
        raise FormulaSyntaxError(f"trailing input {extra.text!r}", extra.line, extra.col)
    return t


# ---------------------------------------------------------------------------
# traversal

def atom_terms(a: Formula) -> tuple[CutTerm, ...]:
    if isinstance(a, (Less, Eq)):
        return (a.left, a.right)
    if isinstance(a, (InColor, InS)):
        return (a.term,)
    return ()


def iter_atoms(f: Formula) -> Iterator[Formula]:
    if is_atom(f):
        yield f
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from iter_atoms(a)
    elif isinstance(f, Not):
        yield from iter_atoms(f.arg)
    elif isinstance(f, (Exists, Forall)):
        yield from iter_atoms(f.body)


def iter_terms(f: Formula) -> Iterator[CutTerm]:
    for a in iter_atoms(f):
        yield from atom_terms(a)


def colors_used(f: Formula) -> set[str]:
    out = set()
    for a in iter_atoms(f):
        if isinstance(a, InColor):
            out.add(a.color)
        for t in atom_terms(a):
            out.update(c for c, _ in t.word)
    return out


def atom_vars(a: Formula) -> set[str]:
    return {t.base for t in atom_terms(a) if not t.is_constant}


def free_vars(f: Formula) -> set[str]:
    if is_atom(f):
        return atom_vars(f)
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    return set()


def all_vars(f: Formula) -> set[str]:
    out = {t.base for t in iter_terms(f) if not t.is_constant}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Exists, Forall)):
            out.add(g.var)
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)
        elif isinstance(g, Not):
            stack.append(g.arg)
    return out


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Exists, Forall)):
        return False
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(a) for a in f.args)
    if isinstance(f, Not):
        return is_quantifier_free(f.arg)
    return True


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, (Exists, Forall)):
        return 1 + quantifier_depth(f.body)
    if isinstance(f, (And, Or)):
        return max((quantifier_depth(a) for a in f.args), default=0)
    if isinstance(f, Not):
        return quantifier_depth(f.arg)
    return 0


def max_word_length(f: Formula) -> int:
    return max((len(t.word) for t in iter_terms(f)), default=0)


def map_atoms(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    """Rebuild ``f`` replacing every atom ``a`` by ``fn(a)`` (with folding)."""
    if is_atom(f):
        return fn(f)
    if isinstance(f, And):
        return conj(*(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Or):
        return disj(*(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Not):
        return neg(map_atoms(f.arg, fn))
    if isinstance(f, Exists):
        return Exists(f.var, map_atoms(f.body, fn))
    if isinstance(f, Forall):
        return Forall(f.var, map_atoms(f.body, fn))
    return f


def map_terms(f: Formula, fn: Callable[[CutTerm], CutTerm]) -> Formula:
    def on_atom(a: Formula) -> Formula:
        if isinstance(a, Less):
            return Less(fn(a.left), fn(a.right))
        if isinstance(a, Eq):
            return Eq(fn(a.left), fn(a.right))
        if isinstance(a, InColor):
            return InColor(a.color, fn(a.term))
        return InS(fn(a.term))
    return map_atoms(f, on_atom)


# ---------------------------------------------------------------------------
# substitution

def fresh_name(name: str, avoid: set[str]) -> str:
    new = name + "'"
    while new in avoid:
        new += "'"
    return new


def substitute_term(t: CutTerm, name: str, value: CutTerm) -> CutTerm:
    if t.base != name:
        return t
    return CutTerm(value.base, value.word + t.word)


def _subst_atom(a: Formula, name: str, value: CutTerm) -> Formula:
    s = lambda t: substitute_term(t, name, value)  # noqa: E731
    if isinstance(a, Less):
        return Less(s(a.left), s(a.right))
    if isinstance(a, Eq):
        return Eq(s(a.left), s(a.right))
    if isinstance(a, InColor):
        return InColor(a.color, s(a.term))
    return InS(s(a.term))


def substitute(f: Formula, name: str, value: CutTerm) -> Formula:
    """Capture-avoiding substitution of ``value`` for the variable ``name``.

    The substituted term's word is applied first, so an occurrence
    ``w(name)`` becomes ``w(value)``.
    """
    if is_atom(f):
        return _subst_atom(f, name, value)
    if isinstance(f, And):
        return And(tuple(substitute(a, name, value) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(substitute(a, name, value) for a in f.args))
    if isinstance(f, Not):
        return Not(substitute(f.arg, name, value))
    if isinstance(f, (Exists, Forall)):
        if f.var == name or name not in free_vars(f.body):
            return f
        body, v = f.body, f.var
        if value.base == v:
            v = fresh_name(v, all_vars(f.body) | {value.base, name})
            body = substitute(body, f.var, CutTerm(v))
        return type(f)(v, substitute(body, name, value))
    return f


def rename_free(f: Formula, old: str, new: str) -> Formula:
    return substitute(f, old, CutTerm(new))


# ---------------------------------------------------------------------------
# boolean normal form

def assign_atom(f: Formula, atom: Formula, value: bool) -> Formula:
    """Replace ``atom`` by a truth value and fold constants."""
    replacement = TRUE if value else FALSE
    return map_atoms(f, lambda a: replacement if a == atom else a)


def atoms_sorted(f: Formula) -> list[Formula]:
    return sorted(set(iter_atoms(f)), key=to_text)


def shannon_leaves(f: Formula, split_on: Callable[[Formula], bool] = lambda a: True,
                   ) -> list[tuple[tuple[Formula, ...], Formula]]:
    """Decision-tree expansion of ``f`` over the atoms selected by ``split_on``.

    Returns ``(literals, residual)`` pairs with ``residual`` not false; the
    residual no longer mentions any selected atom.  Branches are pairwise
    inconsistent because they disagree on some literal.  Atoms are taken in
    lexicographic order of their printed form.
    """
    leaves: list[tuple[tuple[Formula, ...], Formula]] = []

    def go(g: Formula, lits: tuple[Formula, ...]) -> None:
        if isinstance(g, Bottom):
            return
        candidates = [a for a in atoms_sorted(g) if split_on(a)]
        if not candidates:
            leaves.append((lits, g))
            return
        a = candidates[0]
        go(assign_atom(g, a, True), lits + (a,))
        go(assign_atom(g, a, False), lits + (Not(a),))

    go(map_atoms(f, lambda a: a), ())  # fold constants first
    return leaves


def to_dnf(f: Formula) -> Or:
    """Disjoint disjunctive normal form of a quantifier-free formula."""
    if not is_quantifier_free(f):
        raise ValueError("to_dnf needs a quantifier-free formula")
    return Or(tuple(And(lits) for lits, _ in shannon_leaves(f)))
