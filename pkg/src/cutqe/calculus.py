"""Rewrite rules for comparisons involving the basic functions U+ and U-.

All rules rest on the Galois connection ``U+(a) < b  <=>  a < U-(b)`` and
on monotonicity.  Each rule removes the outermost basic function from one
side of an atom and pushes work onto the other side, so iterating the rules
leaves a chosen variable bare.

The equality rules used here carry an extra strictness conjunct::

    b = U+(a)  <=>  (U-(b) <= a  and  a < b  and  U+U-(b) = b)
                    or (a = b  and  U+(b) = b)

and dually for U-.  Without the ``a < b`` guard the equivalence fails
whenever ``a >= b`` (take U the odd integers and a = b = 3).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import formula as fm
from .formula import (MINUS, PLUS, CutTerm, Eq, Formula, Less, Not, conj, disj, neg)

RULE_IDS = ("L1", "L2", "L3", "L4", "L5", "L6", "DERIVED-IDEMPOTENT")


@dataclass
class RewriteTrace:
    steps: list[tuple[str, Formula, Formula]] = field(default_factory=list)

    def record(self, rule: str, before: Formula, after: Formula) -> None:
        self.steps.append((rule, before, after))


class RuleError(ValueError):
    """An atom does not match the rule's left-hand side."""


def _headed(t: CutTerm, sign: Optional[str] = None) -> bool:
    return bool(t.word) and (sign is None or t.head[1] == sign)


def _note(trace, rule, before, after):
    if trace is not None:
        trace.record(rule, before, after)
    return after


def peel_upper(atom: Formula, trace: Optional[RewriteTrace] = None) -> Formula:
    """``U+(a) < b`` becomes ``a < U-(b)``."""
    if not (isinstance(atom, Less) and _headed(atom.left, PLUS)):
        raise RuleError(f"peel_upper expects (< (U+ C t) b), got {fm.to_text(atom)}")
    color, _ = atom.left.head
    return _note(trace, "L3", atom, Less(atom.left.inner, atom.right.down(color)))


def peel_lower(atom: Formula, trace: Optional[RewriteTrace] = None) -> Formula:
    """``b < U-(a)`` becomes ``U+(b) < a``."""
    if not (isinstance(atom, Less) and _headed(atom.right, MINUS)):
        raise RuleError(f"peel_lower expects (< b (U- C t)), got {fm.to_text(atom)}")
    color, _ = atom.right.head
    return _note(trace, "L3", atom, Less(atom.left.up(color), atom.right.inner))


def peel_upper_dual(atom: Formula, trace: Optional[RewriteTrace] = None) -> Formula:
    """``b <= U+(a)`` (written ``not (U+(a) < b)``) becomes ``U-(b) <= a``."""
    if not (isinstance(atom, Not) and isinstance(atom.arg, Less)
            and _headed(atom.arg.left, PLUS)):
        raise RuleError(f"peel_upper_dual expects (<= b (U+ C t)), got {fm.to_text(atom)}")
    inner = atom.arg
    color, _ = inner.left.head
    return _note(trace, "L4", atom, Not(Less(inner.left.inner, inner.right.down(color))))


def peel_equality(atom: Formula, side: Optional[str] = None,
                  trace: Optional[RewriteTrace] = None) -> Formula:
    """Remove the outermost basic function from one side of an equality.

    ``side`` selects the headed side by variable name when both sides are
    headed; otherwise the headed side is used.
    """
    if not isinstance(atom, Eq):
        raise RuleError(f"peel_equality expects an equality, got {fm.to_text(atom)}")
    l, r = atom.left, atom.right
    if side is not None and l.base != side and r.base == side:
        l, r = r, l
    elif side is None and not l.word and r.word:
        l, r = r, l
    if not l.word:
        raise RuleError(f"peel_equality: no basic function to remove in {fm.to_text(atom)}")
    color, sign = l.head
    a, b = l.inner, r
    if sign == PLUS:
        out = disj(
            conj(Not(Less(a, b.down(color))), Less(a, b), Eq(b.down(color).up(color), b)),
            conj(Eq(a, b), Eq(b.up(color), b)))
        return _note(trace, "L5", atom, out)
    out = disj(
        conj(Not(Less(b.up(color), a)), Less(b, a), Eq(b.up(color).down(color), b)),
        conj(Eq(a, b), Eq(b.down(color), b)))
    return _note(trace, "L6", atom, out)


def peel_strict_upper(atom: Formula, trace: Optional[RewriteTrace] = None) -> Formula:
    """``b < U+(a)`` becomes ``U-(b) <= a and not U+(a) = b``."""
    if not (isinstance(atom, Less) and _headed(atom.right, PLUS)):
        raise RuleError(f"expects (< b (U+ C t)), got {fm.to_text(atom)}")
    b, t = atom.left, atom.right
    color, _ = t.head
    out = conj(Not(Less(t.inner, b.down(color))), Not(Eq(t, b)))
    return _note(trace, "L4", atom, out)


def peel_strict_lower(atom: Formula, trace: Optional[RewriteTrace] = None) -> Formula:
    """``U-(a) < b`` becomes ``a <= U+(b) and not U-(a) = b``."""
    if not (isinstance(atom, Less) and _headed(atom.left, MINUS)):
        raise RuleError(f"expects (< (U- C t) b), got {fm.to_text(atom)}")
    t, b = atom.left, atom.right
    color, _ = t.head
    out = conj(Not(Less(b.up(color), t.inner)), Not(Eq(t, b)))
    return _note(trace, "L4", atom, out)


def witness_between(a: CutTerm, b: CutTerm, color: str) -> Formula:
    """Quantifier-free form of: some x in ``color`` has a < x < b."""
    return Less(a.up(color), b)


def simplify_term(t: CutTerm) -> CutTerm:
    """Contract ``U+U-U+`` to ``U+`` and ``U-U+U-`` to ``U-`` (same color)."""
    word = list(t.word)
    changed = True
    while changed:
        changed = False
        for i in range(len(word) - 2):
            (c1, s1), (c2, s2), (c3, s3) = word[i], word[i + 1], word[i + 2]
            if c1 == c2 == c3 and s1 == s3 != s2:
                del word[i + 1:i + 3]
                changed = True
                break
    return CutTerm(t.base, tuple(word))


def _trivial(a: Formula) -> Formula:
    if isinstance(a, Less):
        if a.left == a.right or a.right == fm.MIN_TERM or a.left == fm.MAX_TERM:
            return fm.FALSE
    elif isinstance(a, Eq):
        if a.left == a.right:
            return fm.TRUE
        if fm.term_text(a.right) < fm.term_text(a.left):
            return Eq(a.right, a.left)
    return a


def simplify_terms(f: Formula) -> Formula:
    """Contract terms, fold trivially decided atoms, orient equalities."""
    return fm.map_atoms(fm.map_terms(f, simplify_term), _trivial)


def _side(t: CutTerm, x: str) -> bool:
    return t.base == x


def isolate(atom: Formula, x: str, trace: Optional[RewriteTrace] = None) -> Formula:
    """Rewrite an atom comparing a term of ``x`` with a term of another
    variable into a boolean combination where ``x`` only occurs bare in
    such comparisons.  Atoms of any other shape are returned unchanged.
    """
    if not isinstance(atom, (Less, Eq)):
        return atom
    l, r = atom.left, atom.right
    if _side(l, x) == _side(r, x):
        return atom
    if l.is_constant or r.is_constant:
        return atom
    xt = l if _side(l, x) else r
    if not xt.word:
        return atom
    color, sign = xt.head
    if isinstance(atom, Eq):
        out = peel_equality(atom, side=x, trace=trace)
    elif xt is l and sign == PLUS:
        out = peel_upper(atom, trace)
    elif xt is r and sign == MINUS:
        out = peel_lower(atom, trace)
    elif xt is r:
        out = peel_strict_upper(atom, trace)
    else:
        out = peel_strict_lower(atom, trace)
    out = simplify_terms(out)
    return fm.map_atoms(out, lambda a: isolate(a, x, trace))


def isolate_formula(f: Formula, x: str, trace: Optional[RewriteTrace] = None) -> Formula:
    return fm.map_atoms(f, lambda a: isolate(a, x, trace))
