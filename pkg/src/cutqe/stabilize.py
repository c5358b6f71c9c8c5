"""Eventual constancy of bounded families indexed by an element ``r``.

Every cut term ``F(r)`` is classified by chaining its basic functions from
the inside out.  ``r`` itself pushes to infinity, ``U+`` keeps a pushing
term pushing (``a <= U+(a)``), ``U-`` keeps it pushing when U is unbounded
above and freezes it at ``sup U`` otherwise, and a frozen term stays frozen.

Past the horizon where every pushing term exceeds every realized value the
family's own terms can produce below the bound, and every frozen term has
reached its value, the quantifier-free form of the family only depends on
``r`` through atoms that mention no other variable.  Their sign patterns are
the pieces.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from . import formula as fm
from .colors import ColorRegistry
from .formula import (MAX_TERM, PLUS, TRUE, CutTerm, Eq, Formula, InColor, Less,
                      Not, conj, disj)
from .qe import Point, _tidy, cell_decompose, eliminate_all
from .structures import (MAX_CUT, ColoredStructure, Cut, Evaluator, FiniteStructure,
                         FragmentError, IntPeriodic, principal, sup_inf)

PUSHING = "Pushing"
CONSTANT = "Constant"

LocalColors = dict[str, tuple[Formula, str]]


@dataclass(frozen=True)
class EventualClass:
    kind: str
    value: Optional[Cut] = None
    witness: tuple[str, ...] = ()

    def to_json(self, structure: Optional[ColoredStructure] = None) -> dict:
        out: dict = {"kind": self.kind, "witness": list(self.witness)}
        if self.kind == CONSTANT:
            out["value"] = structure.cut_label(self.value) if structure else repr(self.value)
        return out


@dataclass
class Piece:
    guard: Formula
    constant_set: Formula
    window: tuple[int, int]

    def to_json(self) -> dict:
        return {"guard": fm.to_text(self.guard), "constant_set": fm.to_text(self.constant_set),
                "window": list(self.window)}


@dataclass
class StabilizationReport:
    r0: object
    pieces: list[Piece]
    trivial: bool = False
    verified: bool = False
    counterexample: Optional[dict] = None
    classes: dict[str, EventualClass] = field(default_factory=dict)
    horizon: Optional[object] = None
    word_bound: int = 0
    bound_params: dict = field(default_factory=dict)

    def to_json(self, structure: Optional[ColoredStructure] = None) -> dict:
        label = structure.label if structure is not None else (lambda v: v)
        return {
            "r0": label(self.r0),
            "trivial": self.trivial,
            "verified": self.verified,
            "counterexample": self.counterexample,
            "pieces": [p.to_json() for p in self.pieces],
            "classes": {k: c.to_json(structure) for k, c in sorted(self.classes.items())},
            "horizon": None if self.horizon is None else (
                structure.cut_label(self.horizon) if structure else repr(self.horizon)),
            "word_bound": self.word_bound,
            "bound_params": {k: label(v) for k, v in self.bound_params.items()},
        }


# ---------------------------------------------------------------------------
# classification

def _local_evaluator(structure, registry, local_colors: Optional[LocalColors],
                     params: dict) -> Evaluator:
    if not local_colors:
        return Evaluator(structure, registry)
    inner = Evaluator(structure, registry)
    window = None
    if isinstance(structure, IntPeriodic):
        m = max(structure.margin(defn) for defn, _ in local_colors.values())
        vals = list(params.values()) or [0]
        window = (min(vals) - m, max(vals) + m)
    table = {}
    for name, (defn, var) in local_colors.items():
        table[name] = ((lambda e, d=defn, v=var: inner.formula(d, {**params, v: e})), window)
    return Evaluator(structure, registry, table)


def _bounded_above(color: str, structure, registry, local_colors, params):
    if local_colors and color in local_colors:
        defn, var = local_colors[color]
        sup, _ = sup_inf(structure, defn, var, params, registry)
    else:
        sup, _ = sup_inf(structure, InColor(color, CutTerm("x")), "x", {}, registry)
    if isinstance(structure, FiniteStructure):
        return True, sup
    return sup != MAX_CUT, sup


def classify_eventual(F: Union[CutTerm, Sequence[tuple[str, str]]], d, structure: ColoredStructure,
                      registry: Optional[ColorRegistry] = None, *, var: str = "r",
                      params: Optional[dict] = None,
                      local_colors: Optional[LocalColors] = None) -> EventualClass:
    """Eventual behaviour of ``F(a)`` as ``a`` grows past the bound ``d``.

    ``F`` is a cut term (its base decides whether it depends on ``var``) or a
    bare word, read as a term in ``var``.
    """
    params = dict(params or {})
    term = F if isinstance(F, CutTerm) else CutTerm(var, tuple(F))
    ev = _local_evaluator(structure, registry, local_colors, params)
    if term.base != var:
        env = {k: v for k, v in params.items()}
        value = ev.term(term, env)
        return EventualClass(CONSTANT, value, (f"{fm.term_text(term)}: independent of {var}",))
    kind, value = PUSHING, None
    steps = [f"{var}: pushing"]
    for color, sign in term.word:
        if kind == CONSTANT:
            value = ev.basic(color, sign, value)
            steps.append(f"U{sign} {color}: constant absorbs")
        elif sign == PLUS:
            steps.append(f"U+ {color}: pushing, a <= U+(a)")
        else:
            bounded, sup = _bounded_above(color, structure, registry, local_colors, params)
            if bounded:
                kind, value = CONSTANT, sup
                steps.append(f"U- {color}: constant sup {structure.cut_label(sup)} "
                             f"once a exceeds it")
            else:
                steps.append(f"U- {color}: pushing, {color} unbounded above")
    return EventualClass(kind, value, tuple(steps))


# ---------------------------------------------------------------------------
# horizons

def _least(pred, lo: int) -> int:
    """Least integer ``r >= lo`` with ``pred(r)``, for a monotone ``pred``."""
    if pred(lo):
        return lo
    step = 1
    hi = lo + step
    while not pred(hi):
        if step > 1 << 40:
            raise FragmentError("horizon search did not terminate")
        lo = hi
        step *= 2
        hi = lo + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _terms_of(f: Formula) -> dict[str, CutTerm]:
    return {fm.term_text(t): t for t in fm.iter_terms(f)}


def _realized_levels(f: Formula, r: str, xs: Sequence[str], bounds: dict, params: dict,
                     ev: Evaluator) -> list[Cut]:
    """Realized values of the terms of ``f`` that do not depend on ``r``,
    with each coordinate at its bound."""
    env = {**params, **bounds}
    out = [principal(v) for v in bounds.values()]
    for t in _terms_of(f).values():
        if t.base == r:
            continue
        c = ev.term(t, env) if (t.base in env or t.is_constant) else None
        if c is not None and c.principal:
            out.append(c)
    return out


# ---------------------------------------------------------------------------
# the family

def _as_formula(cells, x: str) -> Formula:
    parts = []
    xt = CutTerm(x)
    for c in cells:
        b = c.body
        if isinstance(b, Point):
            parts.append(conj(c.guard, Eq(xt, b.value)))
        else:
            parts.append(conj(c.guard, Less(b.lower, xt), Less(xt, b.upper), InColor(b.color, xt)))
    return disj(*parts)


def _r_only(a: Formula, r: str, xs: Sequence[str]) -> bool:
    vs = fm.atom_vars(a)
    return r in vs and not (vs & set(xs))


def _freeze(Q: Formula, r: str, xs, pattern: dict, classes: dict[str, EventualClass],
            ev: Evaluator) -> Formula:
    def term(t: CutTerm) -> CutTerm:
        if t.base != r:
            return t
        cls = classes[fm.term_text(t)]
        if cls.kind == PUSHING:
            return MAX_TERM
        frozen = CutTerm(fm.MAX, t.word)
        if ev.term(frozen, {}) != cls.value:
            raise FragmentError(f"cannot name the limit of {fm.term_text(t)} by a constant term")
        return frozen

    def on_atom(a: Formula) -> Formula:
        key = fm.to_text(a)
        if key in pattern:
            return TRUE if pattern[key] else fm.FALSE
        if r not in fm.atom_vars(a):
            return a
        return fm.map_terms(a, term)
    return fm.map_atoms(Q, on_atom)


def _x_window(structure, D, r0, bounds, params):
    vals = [r0, *bounds.values(), *params.values()]
    m = structure.margin(D)
    return range(min(vals) - m, max(bounds.values()) + m + 1)


def stabilize_family(D: Formula, r: str, xs: Sequence[str], bound, structure: ColoredStructure,
                     registry: ColorRegistry, *, params: Optional[dict] = None,
                     verify: bool = True) -> StabilizationReport:
    """Threshold ``r0`` and pieces of ``{r >= r0}`` on which ``D_r`` is constant.

    ``bound`` is one element (used for every coordinate) or a dict by
    coordinate; every member of every ``D_r`` must lie at or below it.
    ``params`` fixes the values of any further free variables.
    """
    xs = list(xs)
    params = dict(params or {})
    bounds = dict(bound) if isinstance(bound, dict) else {x: bound for x in xs}
    extra = fm.free_vars(D) - {r, *xs, *params}
    if extra:
        raise ValueError(f"unassigned parameters {sorted(extra)}")
    if isinstance(structure, FiniteStructure):
        # S has a maximum: take r0 to be it
        top = structure.n - 1
        body = eliminate_all(fm.substitute(D, r, MAX_TERM), registry, structure=structure)
        return StabilizationReport(top, [Piece(TRUE, body, (top, top))], trivial=True,
                                   verified=True)
    if not isinstance(structure, IntPeriodic):
        raise FragmentError(f"stabilization is implemented for finite and integer structures, "
                            f"not {structure.kind}")
    k = structure.period
    if r not in fm.free_vars(D):
        r0 = min([*bounds.values(), *params.values()])
        body = eliminate_all(D, registry, structure=structure)
        rep = StabilizationReport(r0, [Piece(TRUE, body, (r0, r0 + 10 * k))], trivial=True)
        return _verified(rep, D, r, xs, bounds, params, structure, registry) if verify else rep

    if len(xs) == 1:
        Q = _as_formula(cell_decompose(xs[0], D, registry, structure=structure), xs[0])
    else:
        Q = eliminate_all(D, registry, structure=structure)
    ev = Evaluator(structure, registry)

    rterms = {key: t for key, t in sorted(_terms_of(Q).items()) if t.base == r}
    classes = {key: classify_eventual(t, bounds, structure, registry, var=r, params=params)
               for key, t in rterms.items()}
    levels = _realized_levels(Q, r, xs, bounds, params, ev)
    levels += [c.value for c in classes.values() if c.kind == CONSTANT and c.value.principal]
    M = max(levels)
    lo = min([*bounds.values(), *params.values()]) - structure.margin(Q)
    r0 = lo
    for key, cls in classes.items():
        t = rterms[key]
        if cls.kind == PUSHING:
            h = _least(lambda v: ev.term(t, {**params, r: v}) > M, lo)
        else:
            h = _least(lambda v: ev.term(t, {**params, r: v}) == cls.value, lo)
        r0 = max(r0, h)

    window = (r0, r0 + 10 * k)
    atoms = sorted({fm.to_text(a): a for a in fm.iter_atoms(Q) if _r_only(a, r, xs)}.items())
    by_set: dict[str, tuple[list[Formula], Formula]] = {}
    names = set(fm.all_vars(D)) | set(params) | {r, *xs}
    bound_names = {}
    for x in xs:
        nm = f"{x}_bound"
        if nm in names:
            nm = fm.fresh_name(nm, names)
        names.add(nm)
        bound_names[x] = nm
    cap = conj(*(Not(Less(CutTerm(bound_names[x]), CutTerm(x))) for x in xs))
    for v in range(r0, r0 + k):
        env = {**params, r: v}
        pattern = {key: ev.formula(a, env) for key, a in atoms}
        guard = conj(*(a if pattern[key] else Not(a) for key, a in atoms))
        body = _tidy(conj(_freeze(Q, r, xs, pattern, classes, ev), cap), registry)
        text = fm.to_text(body)
        if text in by_set:
            if guard not in by_set[text][0]:
                by_set[text][0].append(guard)
        else:
            by_set[text] = ([guard], body)
    pieces = [Piece(disj(*gs), body, window) for gs, body in by_set.values()]
    rep = StabilizationReport(r0, pieces, classes=classes, horizon=M,
                              word_bound=fm.max_word_length(Q),
                              bound_params={bound_names[x]: bounds[x] for x in xs})
    return _verified(rep, D, r, xs, bounds, params, structure, registry) if verify else rep


def _verified(rep: StabilizationReport, D, r, xs, bounds, params, structure,
              registry) -> StabilizationReport:
    fail = verify_report(rep, D, r, xs, bounds, params, structure, registry)
    rep.verified = fail is None
    rep.counterexample = fail
    return rep


def verify_report(rep: StabilizationReport, D: Formula, r: str, xs: Sequence[str], bounds: dict,
                  params: dict, structure: ColoredStructure, registry: ColorRegistry,
                  window: Optional[tuple[int, int]] = None) -> Optional[dict]:
    """Brute-force check of a report on ``r`` in ``window`` (default: the
    report's).  Returns the first failure or None.

    For each ``r``, exactly one guard must hold, the family must stay below
    the bound, and it must coincide with that piece's constant set.
    """
    ev = Evaluator(structure, registry)
    lo, hi = window or (rep.pieces[0].window if rep.pieces else (rep.r0, rep.r0))
    xwin = list(_x_window(structure, D, rep.r0, bounds, params))
    env0 = {**params, **rep.bound_params}
    for v in range(lo, hi + 1):
        env = {**env0, r: v}
        active = [p for p in rep.pieces if ev.formula(p.guard, env)]
        if len(active) != 1:
            return {"r": v, "reason": f"{len(active)} guards hold"}
        piece = active[0]
        for point in itertools.product(xwin, repeat=len(xs)):
            xe = dict(zip(xs, point))
            inside = ev.formula(D, {**env, **xe})
            if inside and any(xe[x] > bounds[x] for x in xs):
                return {"r": v, "x": xe, "reason": "family exceeds the bound"}
            if inside != ev.formula(piece.constant_set, {**env0, **xe}):
                return {"r": v, "x": xe, "reason": "constant set differs", "in_family": inside}
    return None
