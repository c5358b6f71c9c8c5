"""Quantifier elimination, cell decomposition and function normal forms.

Eliminating ``exists x`` from a quantifier-free body:

1. every comparison between a term of ``x`` and a term of another variable
   is rewritten until ``x`` is bare (``calculus.isolate``); the terms that
   ``x`` is then compared with are the bound terms ``T``;
2. for fixed parameters the values of ``min``, ``T`` and ``max`` cut S into
   points and open gaps; on a point the body is evaluated by substitution;
3. inside the gap just above a bound term ``t`` every bare comparison has a
   fixed truth value expressible through ``t``, so what is left talks only
   about ``x`` and splits into derived colors ``V``;
4. the gap above ``t`` meets ``V`` iff ``V+(t)`` lies below every bound term
   that is above ``t``, which is the case split on the largest lower bound
   and smallest upper bound carried out term by term.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from . import formula as fm
from .calculus import RewriteTrace, isolate_formula, simplify_terms, witness_between
from .colors import CANONICAL_VAR, ColorRegistry
from .formula import (FALSE, MAX_TERM, MIN_TERM, TRUE, And, Bottom, CutTerm, Eq, Exists,
                      Forall, Formula, InColor, InS, Less, Not, Or, conj, disj, neg)

@dataclass(frozen=True)
class Interval:
    lower: CutTerm
    upper: CutTerm
    color: str


@dataclass(frozen=True)
class Point:
    value: CutTerm


@dataclass(frozen=True)
class Cell:
    guard: Formula
    body: Union[Interval, Point]

    def to_json(self) -> dict:
        if isinstance(self.body, Interval):
            b = {"interval": {"lower": fm.term_text(self.body.lower),
                              "upper": fm.term_text(self.body.upper),
                              "color": self.body.color}}
        else:
            b = {"point": fm.term_text(self.body.value)}
        return {"guard": fm.to_text(self.guard), **b}


@dataclass(frozen=True)
class PiecewiseFunction:
    pieces: tuple[tuple[Formula, CutTerm], ...]

    def to_json(self) -> list:
        return [{"guard": fm.to_text(g), "term": fm.term_text(t)} for g, t in self.pieces]


class NonFunctionalGraph(ValueError):
    pass


def _is_bare_mixed(a: Formula, x: str) -> bool:
    if not isinstance(a, (Less, Eq)):
        return False
    l, r = a.left, a.right
    lx, rx = l.base == x, r.base == x
    if lx == rx:
        return False
    other = r if lx else l
    return not other.is_constant


def _mentions(a: Formula, x: str) -> bool:
    return x in fm.atom_vars(a)


def normalize_colors(f: Formula, registry: ColorRegistry) -> Formula:
    """Rewrite color atoms on composite variable terms into atoms on bare
    variables: ``w(a) in U`` becomes ``a in V`` with V = {x : w(x) in U}."""
    x = CANONICAL_VAR

    def on_atom(a: Formula) -> Formula:
        if isinstance(a, InColor) and registry.is_top(a.color):
            a = InS(a.term)
        if isinstance(a, InColor) and a.term.word and not a.term.is_constant:
            v = registry.derive(InColor(a.color, CutTerm(x, a.term.word)))
            a = InColor(v.name, CutTerm(a.term.base))
        if isinstance(a, InS) and not a.term.is_constant:
            if not a.term.word:
                return TRUE
            v = registry.derive(InS(CutTerm(x, a.term.word)))
            a = InColor(v.name, CutTerm(a.term.base))
        return a
    return fm.map_atoms(f, on_atom)


def propagate_units(f: Formula) -> Formula:
    """Use the literal conjuncts of a conjunction (and the negated literal
    disjuncts of a disjunction) to simplify their siblings."""
    if isinstance(f, Not):
        return neg(propagate_units(f.arg))
    if not isinstance(f, (And, Or)):
        return f
    args = [propagate_units(g) for g in f.args]
    truth = isinstance(f, And)
    units = {}
    for g in args:
        if fm.is_literal(g):
            atom, val = (g.arg, not truth) if isinstance(g, Not) else (g, truth)
            units[atom] = val
    if units:
        def on_atom(a):
            if a in units:
                return TRUE if units[a] else FALSE
            return a
        args = [g if fm.is_literal(g) else fm.map_atoms(g, on_atom) for g in args]
    return conj(*args) if truth else disj(*args)


def _tidy(f: Formula, registry: ColorRegistry) -> Formula:
    return propagate_units(simplify_terms(normalize_colors(f, registry)))


def _bound_terms(body: Formula, x: str) -> list[CutTerm]:
    """Parameter terms compared with bare ``x``, sorted by printed form."""
    seen: dict[str, CutTerm] = {}
    for a in fm.iter_atoms(body):
        if _is_bare_mixed(a, x):
            t = a.right if a.left.base == x else a.left
            seen.setdefault(fm.term_text(t), t)
    return [seen[k] for k in sorted(seen)]


def _at(body: Formula, x: str, t: CutTerm) -> Formula:
    return simplify_terms(fm.substitute(body, x, t))


def _just_above(body: Formula, x: str, t: CutTerm) -> Formula:
    """``body`` for x strictly between ``t`` and the next bound term above it.

    There ``x < s`` holds iff ``t < s``, ``s < x`` iff ``s <= t``, and
    ``x = s`` never holds.
    """
    def on_atom(a: Formula) -> Formula:
        if not _is_bare_mixed(a, x):
            return a
        if isinstance(a, Eq):
            return FALSE
        if a.left.base == x:
            return Less(t, a.right)
        return Not(Less(t, a.left))
    return simplify_terms(fm.map_atoms(body, on_atom))


def _colored_leaves(g: Formula, x: str, registry: ColorRegistry,
                    structure=None) -> list[tuple[str, Formula]]:
    """Split ``g`` into disjoint pieces (color of x, condition free of x).

    Without a structure the decision tree branches on whichever kind of atom
    is rarer.  With one it branches on the atoms in ``x`` and drops branches
    that no representative realizes, which leaves at most one piece per
    one-variable type of the structure.
    """
    if structure is not None:
        leaves = _realized_leaves(g, x, registry, structure)
    else:
        atoms = {fm.to_text(a): _mentions(a, x) for a in fm.iter_atoms(g)}
        n_x = sum(atoms.values())
        if n_x <= len(atoms) - n_x:
            leaves = [(conj(*xl), rest) for xl, rest in
                      fm.shannon_leaves(g, lambda a: _mentions(a, x))]
        else:
            leaves = [(rest, conj(*pl)) for pl, rest in
                      fm.shannon_leaves(g, lambda a: not _mentions(a, x))]
    return [(registry.derive(fm.rename_free(c, x, CANONICAL_VAR)).name, cond)
            for c, cond in leaves]


def _realized_leaves(g, x, registry, structure):
    from .structures import Evaluator

    ev = Evaluator(structure, registry)
    out = []

    def go(h: Formula, lits: tuple, alive: list) -> None:
        if isinstance(h, Bottom):
            return
        todo = [a for a in fm.atoms_sorted(h) if _mentions(a, x)]
        if not todo:
            out.append((conj(*lits), h))
            return
        a = todo[0]
        yes = [e for e in alive if ev.formula(a, {x: e})]
        no = [e for e in alive if e not in yes]
        if yes:
            go(fm.assign_atom(h, a, True), lits + (a,), yes)
        if no:
            go(fm.assign_atom(h, a, False), lits + (Not(a),), no)

    go(g, (), list(structure.representatives()))
    return out


LT, EQ, GT = "lt", "eq", "gt"  # relation of x to a bound term


def _relations(lits: Sequence[Formula], x: str) -> dict[str, tuple[CutTerm, set[str]]]:
    rel: dict[str, tuple[CutTerm, set[str]]] = {}
    for lit in lits:
        positive = not isinstance(lit, Not)
        a = lit if positive else lit.arg
        l, r = a.left, a.right
        if isinstance(a, Eq):
            t = r if l.base == x else l
            allowed = {EQ} if positive else {LT, GT}
        elif l.base == x:
            t = r
            allowed = {LT} if positive else {EQ, GT}
        else:
            t = l
            allowed = {GT} if positive else {LT, EQ}
        key = fm.term_text(t)
        prev = rel.get(key, (t, {LT, EQ, GT}))[1]
        rel[key] = (t, prev & allowed)
    return rel


def _max_guard(terms: Sequence[CutTerm], i: int) -> Formula:
    """``terms[i]`` is the first maximal element."""
    t = terms[i]
    return conj(*(Less(s, t) if j < i else Not(Less(t, s))
                  for j, s in enumerate(terms) if j != i))


def _min_guard(terms: Sequence[CutTerm], i: int) -> Formula:
    t = terms[i]
    return conj(*(Less(t, s) if j < i else Not(Less(s, t))
                  for j, s in enumerate(terms) if j != i))


def _conjunctive_cells(body: Formula, x: str, registry: ColorRegistry) -> Optional[list[Cell]]:
    """Cells of ``{x : body}`` when ``body`` is a conjunction of literals.

    The literals give lower bounds, upper bounds and point constraints on
    ``x``; a case is fixed by the relation of ``x`` to each bound term, then
    the largest lower bound and least upper bound are picked out.
    """
    lits = body.args if isinstance(body, And) else (body,)
    if not all(fm.is_literal(l) for l in lits):
        return None
    atom = lambda l: l.arg if isinstance(l, Not) else l
    mixed = [l for l in lits if _is_bare_mixed(atom(l), x)]
    xonly = [fm.rename_free(l, x, CANONICAL_VAR) for l in lits
             if l not in mixed and _mentions(atom(l), x)]
    params = conj(*(l for l in lits if not _mentions(atom(l), x)))
    V = registry.derive(conj(*xonly)).name
    rel = _relations(mixed, x)
    keys = sorted(rel)
    cells = []
    for pick in itertools.product(*(sorted(rel[k][1]) for k in keys)):
        lowers, uppers, equals = [], [], []
        for k, r in zip(keys, pick):
            {LT: uppers, GT: lowers, EQ: equals}[r].append(rel[k][0])
        if equals:
            e0 = equals[0]
            guard = conj(params, InS(e0), InColor(V, e0),
                         *(Less(l, e0) for l in lowers),
                         *(Less(e0, r) for r in uppers),
                         *(Eq(e0, e) for e in equals[1:]))
            cells.append(Cell(guard, Point(e0)))
            continue
        for i, l in enumerate(lowers or [None]):
            for j, r in enumerate(uppers or [None]):
                g = conj(params,
                         _max_guard(lowers, i) if l is not None else TRUE,
                         _min_guard(uppers, j) if r is not None else TRUE)
                lo = l if l is not None else MIN_TERM
                hi = r if r is not None else MAX_TERM
                cells.append(Cell(g, Interval(lo, hi, V)))
                # endpoints of S are elements when S has them
                if l is None:
                    below = Less(MIN_TERM, hi) if r is not None else TRUE
                    cells.append(Cell(conj(g, InColor(V, MIN_TERM), below), Point(MIN_TERM)))
                if r is None:
                    cells.append(Cell(conj(g, InColor(V, MAX_TERM), Less(lo, MAX_TERM)),
                                      Point(MAX_TERM)))
    return cells


def _nonempty(cell: Cell) -> Formula:
    if isinstance(cell.body, Point):
        return cell.guard
    b = cell.body
    return conj(cell.guard, witness_between(b.lower, b.upper, b.color))


def _first_among_equals(terms: Sequence[CutTerm], i: int) -> Formula:
    return conj(*(Not(Eq(terms[j], terms[i])) for j in range(i)))


def _prepared(x: str, body: Formula, trace) -> tuple[Formula, list[CutTerm]]:
    body = simplify_terms(isolate_formula(body, x, trace))
    return body, _bound_terms(body, x)


def _gap_meets(t: CutTerm, color: str, uppers: Sequence[CutTerm]) -> Formula:
    """Some element of ``color`` lies above ``t`` and below every term of
    ``uppers`` that is above ``t``."""
    w = t.up(color)
    return conj(*(Less(w, s) if s == MAX_TERM else disj(Not(Less(t, s)), Less(w, s))
                  for s in uppers))


def eliminate_exists(x: str, body: Formula, registry: ColorRegistry,
                     trace: Optional[RewriteTrace] = None, structure=None) -> Formula:
    """Quantifier-free equivalent of ``exists x body`` (``body`` quantifier-free).

    With ``structure`` the result is only claimed equivalent on that
    structure (pattern pruning, see ``_colored_leaves``).
    """
    if not fm.is_quantifier_free(body):
        raise ValueError("eliminate_exists needs a quantifier-free body")
    if x not in fm.free_vars(body):
        return body
    body, T = _prepared(x, body, trace)
    cells = _conjunctive_cells(body, x, registry)
    if cells is not None:
        return _tidy(disj(*(_nonempty(c) for c in cells)), registry)
    parts = [conj(InS(t), _at(body, x, t)) for t in (MIN_TERM, *T, MAX_TERM)]
    uppers = [*T, MAX_TERM]
    for t in (MIN_TERM, *T):
        for color, rest in _colored_leaves(_just_above(body, x, t), x, registry, structure):
            parts.append(conj(rest, _gap_meets(t, color, uppers)))
    return _tidy(disj(*parts), registry)


def eliminate_all(f: Formula, registry: ColorRegistry,
                  trace: Optional[RewriteTrace] = None, structure=None) -> Formula:
    """Quantifier-free equivalent of ``f``, eliminating innermost first.

    Input that is already quantifier-free and in the target language is
    returned as is.
    """
    if in_target_language(f):
        return f

    def go(g: Formula) -> Formula:
        if isinstance(g, Exists):
            return eliminate_exists(g.var, go(g.body), registry, trace, structure)
        if isinstance(g, Forall):
            return neg(eliminate_exists(g.var, neg(go(g.body)), registry, trace, structure))
        if isinstance(g, And):
            return conj(*(go(a) for a in g.args))
        if isinstance(g, Or):
            return disj(*(go(a) for a in g.args))
        if isinstance(g, Not):
            return neg(go(g.arg))
        return g
    return _tidy(go(f), registry)


def cell_decompose(x: str, f: Formula, registry: ColorRegistry,
                   trace: Optional[RewriteTrace] = None, structure=None) -> list[Cell]:
    """Cells whose bodies, for each parameter value, partition ``{x : f}``.

    A conjunction of literals is split directly by its bounds.  Otherwise the
    bound terms are listed as ``min, T..., max``; each value taken by them
    gets one point cell (at its first term) and each gap between consecutive
    values gets one interval cell per derived color.
    """
    for q in _binders(f):
        if q == x:
            raise ValueError(f"{x!r} is bound inside the formula")
    body, T = _prepared(x, eliminate_all(f, registry, trace, structure), trace)
    cells = _conjunctive_cells(body, x, registry)
    if cells is None:
        cells = _gap_cells(body, x, T, registry, structure)
    out = []
    for c in cells:
        guard = _tidy(c.guard, registry)
        if not isinstance(guard, Bottom):
            out.append(Cell(guard, c.body))
    return out


def _gap_cells(body, x, T, registry, structure) -> list[Cell]:
    terms = [MIN_TERM, *T, MAX_TERM]
    cells = []
    for i, t in enumerate(terms):
        guard = conj(_first_among_equals(terms, i), InS(t), _at(body, x, t))
        cells.append(Cell(guard, Point(t)))
    uppers = terms[1:]
    for i, t in enumerate(terms[:-1]):
        first = _first_among_equals(terms, i)
        leaves = _colored_leaves(_just_above(body, x, t), x, registry, structure)
        for j, s in enumerate(uppers):
            # s is the first term taking the least value above t
            nxt = conj(Less(t, s), _first_among_equals(uppers, j),
                       *(disj(Not(Less(t, u)), Not(Less(u, s))) for u in uppers))
            for color, rest in leaves:
                cells.append(Cell(conj(first, nxt, rest), Interval(t, s, color)))
    return cells


def cell_contains(cell: Cell, ev, env: dict, elem) -> bool:
    """Whether ``elem`` lies in the cell body at parameters ``env``
    (the guard is not consulted)."""
    from .structures import principal

    e = principal(elem)
    b = cell.body
    if isinstance(b, Point):
        return ev.term(b.value, env) == e
    return (ev.term(b.lower, env) < e < ev.term(b.upper, env)
            and ev.member(b.color, elem))


def check_cells(x: str, f: Formula, cells: Sequence[Cell], structure, registry):
    """Brute-force check on a finite structure that, for every parameter
    tuple, the active cells are pairwise disjoint and cover ``{x : f}``.

    Returns ``(tuples checked, first failure or None)``.
    """
    from .structures import Evaluator

    params = sorted((fm.free_vars(f) | {v for c in cells for v in fm.free_vars(c.guard)}) - {x})
    ev = Evaluator(structure, registry)
    checked = 0
    for vals in itertools.product(range(structure.n), repeat=len(params)):
        env = dict(zip(params, vals))
        active = [c for c in cells if ev.formula(c.guard, env)]
        seen: dict = {}
        for e in range(structure.n):
            owners = [i for i, c in enumerate(active) if cell_contains(c, ev, env, e)]
            inside = ev.formula(f, {**env, x: e})
            if len(owners) > 1 or (len(owners) == 1) != inside:
                shown = {k: structure.label(v) for k, v in env.items()}
                return checked, {"params": shown, "element": structure.label(e),
                                 "in_set": inside, "cells": [active[i].to_json() for i in owners]}
        checked += 1
    return checked, None


def _binders(f: Formula) -> Iterator[str]:
    if isinstance(f, (Exists, Forall)):
        yield f.var
        yield from _binders(f.body)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from _binders(a)
    elif isinstance(f, Not):
        yield from _binders(f.arg)


def function_normal_form(graph: Formula, y: str, registry: ColorRegistry,
                         structure=None) -> PiecewiseFunction:
    """Piecewise terms for the function whose graph is ``graph`` (in ``y``).

    On a finite ``structure`` the graph is first checked to be functional.
    A singleton interval cell ``(l, r) in V`` contributes the term ``V+(l)``.
    """
    if structure is not None:
        _check_functional(graph, y, registry, structure)
    pieces = []
    for cell in cell_decompose(y, graph, registry, structure=structure):
        if isinstance(cell.body, Point):
            pieces.append((cell.guard, cell.body.value))
        else:
            b = cell.body
            guard = _tidy(_nonempty(cell), registry)
            if not isinstance(guard, Bottom):
                pieces.append((guard, b.lower.up(b.color)))
    return PiecewiseFunction(tuple(pieces))


def _check_functional(graph, y, registry, structure):
    from .structures import Evaluator, FiniteStructure

    if not isinstance(structure, FiniteStructure):
        return
    params = sorted(fm.free_vars(graph) - {y})
    ev = Evaluator(structure, registry)
    for vals in itertools.product(range(structure.n), repeat=len(params)):
        env = dict(zip(params, vals))
        hits = [e for e in range(structure.n) if ev.formula(graph, {**env, y: e})]
        if len(hits) > 1:
            shown = {k: structure.label(v) for k, v in env.items()}
            raise NonFunctionalGraph(f"graph has {len(hits)} values at {shown}")


def in_target_language(f: Formula) -> bool:
    """Atoms are ``v in U`` (bare variable or constant term), ``inS`` of a
    constant term, or comparisons of cut terms."""
    if not fm.is_quantifier_free(f):
        return False
    for a in fm.iter_atoms(f):
        if isinstance(a, InColor) and a.term.word and not a.term.is_constant:
            return False
        if isinstance(a, InS) and not a.term.is_constant:
            return False
    return True
