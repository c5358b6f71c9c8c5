"""Concrete colored linear orders and cut semantics.

Three presets are supported:

* ``FiniteStructure``: a finite nonempty order.  Its completion is S itself,
  so the extreme cuts are the principal cuts of its endpoints.
* ``IntPeriodic``: the integers with colors given by residues mod a period.
* ``RatDense``: the rationals split into ``m`` dense classes by the numerator
  of the reduced fraction mod ``m``.

Cuts are the three-case union ``Cut.MIN | Principal(s) | Cut.MAX``.  Every
value a word of basic functions can take on a principal cut in these
presets is of that shape.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

from . import formula as fm
from .formula import (MINUS, PLUS, And, Bottom, CutTerm, Eq, Exists, Forall,
                      Formula, InColor, InS, Less, Not, Or, Top)


class StructureError(ValueError):
    """Invalid structure description."""


class FragmentError(ValueError):
    """Query outside the decidable fragment of a preset."""


@total_ordering
@dataclass(frozen=True)
class Cut:
    kind: int  # -1 bottom of the completion, 0 principal, 1 top
    value: Any = None

    def _key(self):
        return (self.kind, self.value if self.kind == 0 else 0)

    def __lt__(self, other: "Cut") -> bool:
        return self._key() < other._key()

    @property
    def principal(self) -> bool:
        return self.kind == 0

    def __repr__(self) -> str:
        if self.kind < 0:
            return "MinOfSbar"
        if self.kind > 0:
            return "MaxOfSbar"
        return f"Principal({self.value!r})"


MIN_CUT = Cut(-1)
MAX_CUT = Cut(1)


def principal(value) -> Cut:
    return Cut(0, value)


def cut_compare(x: Cut, y: Cut) -> int:
    """-1, 0 or 1 as ``x`` is below, equal to or above ``y``."""
    return (x > y) - (x < y)


# membership predicate for a color: element -> bool
Member = Callable[[Any], bool]


class ColoredStructure:
    kind = "abstract"
    colors: dict

    has_max = False

    def min_cut(self) -> Cut:
        return MIN_CUT

    def max_cut(self) -> Cut:
        return MAX_CUT

    def base_member(self, color: str, elem) -> bool:
        raise NotImplementedError

    def basic(self, member: Member, sign: str, c: Cut, *, periodic: bool = True,
              window: Optional[tuple] = None) -> Cut:
        raise NotImplementedError

    def representatives(self) -> list:
        """Elements realizing every parameter-free one-variable type."""
        raise NotImplementedError

    def candidates(self, body: Formula, var: str, values: list) -> list:
        """Finite list of elements that decides ``exists var body`` given the
        principal values of the other free variables."""
        raise NotImplementedError

    def label(self, elem):
        return elem

    def cut_label(self, c: Cut):
        if c.kind < 0:
            return "min"
        if c.kind > 0:
            return "max"
        return self.label(c.value)

    def parse_element(self, raw):
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class FiniteStructure(ColoredStructure):
    kind = "finite"
    has_max = True

    def __init__(self, elements: list, colors: dict[str, Iterable]):
        if not elements:
            raise StructureError("elements: empty structures are rejected")
        if len(set(map(_hashable, elements))) != len(elements):
            raise StructureError("elements: duplicate element")
        self.elements = list(elements)
        self.index = {_hashable(e): i for i, e in enumerate(self.elements)}
        self.colors: dict[str, frozenset[int]] = {}
        for name, members in colors.items():
            idx = set()
            for m in members:
                key = _hashable(m)
                if key not in self.index:
                    raise StructureError(f"colors.{name}: {m!r} is not an element")
                idx.add(self.index[key])
            self.colors[name] = frozenset(idx)
        self.n = len(self.elements)

    def min_cut(self) -> Cut:
        return principal(0)

    def max_cut(self) -> Cut:
        return principal(self.n - 1)

    def canonical(self, c: Cut) -> Cut:
        if c.kind < 0:
            return principal(0)
        if c.kind > 0:
            return principal(self.n - 1)
        return c

    def base_member(self, color, elem) -> bool:
        return elem in self.colors[color]

    def basic(self, member, sign, c, *, periodic=True, window=None):
        a = self.canonical(c).value
        if sign == PLUS:
            for j in range(a + 1, self.n):
                if member(j):
                    return principal(j)
            return principal(self.n - 1)
        for j in range(a - 1, -1, -1):
            if member(j):
                return principal(j)
        return principal(0)

    def representatives(self):
        return list(range(self.n))

    def candidates(self, body, var, values):
        return list(range(self.n))

    def label(self, elem):
        return self.elements[elem]

    def parse_element(self, raw):
        key = _hashable(raw)
        if key not in self.index:
            raise StructureError(f"{raw!r} is not an element")
        return self.index[key]

    def to_json(self):
        return {"kind": "finite", "elements": self.elements,
                "colors": {k: sorted(self.elements[i] for i in v) if _sortable(self.elements)
                           else [self.elements[i] for i in sorted(v)]
                           for k, v in sorted(self.colors.items())}}


class IntPeriodic(ColoredStructure):
    """The integers with colors invariant under translation by ``period``."""

    kind = "int_periodic"

    def __init__(self, period: int, colors: dict[str, Iterable[int]]):
        if not isinstance(period, int) or period < 1:
            raise StructureError("period: must be a positive integer")
        self.period = period
        self.colors = {}
        for name, res in colors.items():
            try:
                self.colors[name] = frozenset(int(r) % period for r in res)
            except (TypeError, ValueError):
                raise StructureError(f"colors.{name}: residues must be integers") from None

    def base_member(self, color, elem) -> bool:
        return elem % self.period in self.colors[color]

    def basic(self, member, sign, c, *, periodic=True, window=None):
        k = self.period
        if periodic:
            lo = hi = 0
        else:
            lo, hi = window
        if sign == PLUS:
            if c.kind > 0:
                return MAX_CUT
            if c.kind < 0:
                if any(member(x) for x in range(lo - k, lo)):
                    return MIN_CUT
                start = lo
            else:
                start = c.value + 1
            for x in range(start, max(start, hi) + k):
                if member(x):
                    return principal(x)
            return MAX_CUT
        if c.kind < 0:
            return MIN_CUT
        if c.kind > 0:
            if any(member(x) for x in range(hi, hi + k)):
                return MAX_CUT
            start = hi + k - 1
        else:
            start = c.value - 1
        for x in range(start, min(start, lo) - k, -1):
            if member(x):
                return principal(x)
        return MIN_CUT

    def representatives(self):
        return list(range(self.period))

    def margin(self, body: Formula) -> int:
        depth = fm.max_word_length(body)
        qd = fm.quantifier_depth(body)
        return ((4 * depth + 4) * (qd + 1) + 1) * self.period

    def candidates(self, body, var, values):
        # Beyond the window every comparison between a term of ``var`` and a
        # parameter term is decided, and the rest is periodic in ``var``.
        pts = [v for v in values]
        m = self.margin(body)
        lo = min(pts, default=0) - m
        hi = max(pts, default=0) + m
        return list(range(lo, hi + 1))

    def parse_element(self, raw):
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise StructureError(f"{raw!r} is not an integer")
        return raw

    def to_json(self):
        return {"kind": "int_periodic", "period": self.period,
                "colors": {k: sorted(v) for k, v in sorted(self.colors.items())}}


class RatDense(ColoredStructure):
    """The rationals; class(q) is the reduced numerator of q mod ``classes``."""

    kind = "rat_dense"

    def __init__(self, classes: int, colors: list[str]):
        if not isinstance(classes, int) or classes < 1:
            raise StructureError("classes: must be a positive integer")
        if len(colors) != classes:
            raise StructureError("colors: need exactly one name per class")
        if len(set(colors)) != len(colors):
            raise StructureError("colors: duplicate color name")
        self.m = classes
        self.names = list(colors)
        self.colors = {name: frozenset([i]) for i, name in enumerate(colors)}

    def klass(self, q: Fraction) -> int:
        return q.numerator % self.m

    def base_member(self, color, elem) -> bool:
        return self.klass(elem) in self.colors[color]

    def basic(self, member, sign, c, *, periodic=True, window=None):
        if not periodic:
            raise FragmentError("rat_dense: basic functions of parameterized sets are unsupported")
        # sets definable without parameters are unions of dense classes
        nonempty = any(member(q) for q in self.representatives())
        if sign == PLUS:
            if c.kind > 0:
                return MAX_CUT
            if not nonempty:
                return MAX_CUT
            return c
        if c.kind < 0:
            return MIN_CUT
        if not nonempty:
            return MIN_CUT
        return c

    def representatives(self):
        return [Fraction(r) for r in range(self.m)]

    def witness(self, lo: Optional[Fraction], hi: Optional[Fraction], cls: int) -> Fraction:
        """A rational of the given class strictly between ``lo`` and ``hi``."""
        if lo is None and hi is None:
            lo = Fraction(-1)
        if lo is None:
            lo = hi - 1
        if hi is None:
            hi = lo + 1
        d = 1
        while True:
            n0 = math.floor(lo * d) + 1
            n1 = math.ceil(hi * d) - 1
            for n in range(n0, n1 + 1):
                q = Fraction(n, d)
                if lo < q < hi and q.numerator % self.m == cls:
                    return q
            d += 1

    def candidates(self, body, var, values):
        pts = sorted(set(values))
        out = list(pts)
        bounds = [None] + pts + [None]
        for lo, hi in zip(bounds, bounds[1:]):
            for cls in range(self.m):
                out.append(self.witness(lo, hi, cls))
        return out

    def parse_element(self, raw):
        try:
            return Fraction(str(raw))
        except (ValueError, ZeroDivisionError):
            raise StructureError(f"{raw!r} is not a rational") from None

    def label(self, elem):
        return str(elem)

    def to_json(self):
        return {"kind": "rat_dense", "classes": self.m, "colors": self.names}


def _hashable(x):
    return json.dumps(x, sort_keys=True) if isinstance(x, (list, dict)) else x


def _sortable(xs) -> bool:
    try:
        sorted(xs)
        return True
    except TypeError:
        return False


def structure_from_json(data: dict) -> ColoredStructure:
    if not isinstance(data, dict):
        raise StructureError("structure: expected a JSON object")
    kind = data.get("kind")
    if kind == "finite":
        elements = data.get("elements")
        if not isinstance(elements, list):
            raise StructureError("elements: expected a list")
        colors = data.get("colors", {})
        if not isinstance(colors, dict):
            raise StructureError("colors: expected an object")
        return FiniteStructure(elements, colors)
    if kind == "int_periodic":
        colors = data.get("colors", {})
        if not isinstance(colors, dict):
            raise StructureError("colors: expected an object")
        return IntPeriodic(data.get("period"), colors)
    if kind == "rat_dense":
        colors = data.get("colors")
        if not isinstance(colors, list):
            raise StructureError("colors: expected a list of class names")
        return RatDense(data.get("classes"), colors)
    raise StructureError(f"kind: unknown structure kind {kind!r}")


def load_structure(path) -> ColoredStructure:
    return structure_from_json(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# evaluation

class Evaluator:
    """Term and formula evaluation on one structure.

    ``registry`` resolves derived colors; base colors come from the
    structure.  ``local_colors`` maps extra color names to membership
    predicates that may depend on parameters (with a window outside which
    they are periodic, for ``IntPeriodic``).
    """

    def __init__(self, structure: ColoredStructure, registry=None,
                 local_colors: Optional[dict[str, tuple[Member, tuple]]] = None):
        self.structure = structure
        self.registry = registry
        self.local_colors = local_colors or {}
        self._memo: dict = {}

    def _member_key(self, elem):
        s = self.structure
        if isinstance(s, IntPeriodic):
            return elem % s.period
        if isinstance(s, RatDense):
            return s.klass(elem)
        return elem

    def member(self, color: str, elem) -> bool:
        if color in self.local_colors:
            return self.local_colors[color][0](elem)
        s = self.structure
        if color in s.colors:
            return s.base_member(color, elem)
        key = (color, self._member_key(elem))
        hit = self._memo.get(key)
        if hit is None:
            if self.registry is None:
                raise KeyError(f"unknown color {color!r}")
            ref = self.registry.lookup(color)
            if ref.definition is None:
                raise KeyError(f"color {color!r} is not interpreted by this structure")
            hit = self.formula(ref.definition, {ref.var: elem})
            self._memo[key] = hit
        return hit

    def basic(self, color: str, sign: str, c: Cut) -> Cut:
        if color in self.local_colors:
            pred, window = self.local_colors[color]
            return self.structure.basic(pred, sign, c, periodic=False, window=window)
        return self.structure.basic(lambda e: self.member(color, e), sign, c)

    def term(self, t: CutTerm, env: dict) -> Cut:
        s = self.structure
        if t.base == fm.MIN:
            c = s.min_cut()
        elif t.base == fm.MAX:
            c = s.max_cut()
        else:
            try:
                c = principal(env[t.base])
            except KeyError:
                raise KeyError(f"unassigned variable {t.base!r}") from None
        for color, sign in t.word:
            c = self.basic(color, sign, c)
        return c

    def formula(self, f: Formula, env: dict) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bottom):
            return False
        if isinstance(f, Less):
            return self.term(f.left, env) < self.term(f.right, env)
        if isinstance(f, Eq):
            return self.term(f.left, env) == self.term(f.right, env)
        if isinstance(f, InColor):
            c = self.term(f.term, env)
            return c.principal and self.member(f.color, c.value)
        if isinstance(f, InS):
            return self.term(f.term, env).principal
        if isinstance(f, And):
            return all(self.formula(a, env) for a in f.args)
        if isinstance(f, Or):
            return any(self.formula(a, env) for a in f.args)
        if isinstance(f, Not):
            return not self.formula(f.arg, env)
        if isinstance(f, (Exists, Forall)):
            want = isinstance(f, Exists)
            for e in self.candidates(f.body, f.var, env):
                if self.formula(f.body, {**env, f.var: e}) == want:
                    return want
            return not want
        raise TypeError(f"not a formula: {f!r}")

    def candidates(self, body: Formula, var: str, env: dict) -> list:
        values = [v for k, v in env.items() if k != var]
        window = self._param_window()
        if window is not None and isinstance(self.structure, IntPeriodic):
            values = values + list(window)
        return self.structure.candidates(body, var, values)

    def _param_window(self):
        lo = hi = None
        for _, w in self.local_colors.values():
            if w is None:
                continue
            lo = w[0] if lo is None else min(lo, w[0])
            hi = w[1] if hi is None else max(hi, w[1])
        return None if lo is None else (lo, hi)


def eval_term(structure: ColoredStructure, t: CutTerm, env: dict, registry=None) -> Cut:
    return Evaluator(structure, registry).term(t, env)


def eval_formula(structure: ColoredStructure, f: Formula, env: Optional[dict] = None,
                 registry=None) -> bool:
    return Evaluator(structure, registry).formula(f, env or {})


@dataclass
class CheckReport:
    agree: int = 0
    total: int = 0
    counterexample: Optional[dict] = None
    values: Optional[tuple[bool, bool]] = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def brute_force_check(structure: FiniteStructure, f: Formula, g: Formula,
                      registry=None, stop_at_first: bool = True) -> CheckReport:
    """Compare ``f`` and ``g`` on every assignment of their free variables."""
    if not isinstance(structure, FiniteStructure):
        raise FragmentError("brute_force_check needs a finite structure")
    import itertools

    names = sorted(fm.free_vars(f) | fm.free_vars(g))
    ev = Evaluator(structure, registry)
    report = CheckReport()
    for values in itertools.product(range(structure.n), repeat=len(names)):
        env = dict(zip(names, values))
        a, b = ev.formula(f, env), ev.formula(g, env)
        report.total += 1
        if a == b:
            report.agree += 1
        elif report.counterexample is None:
            report.counterexample = {k: structure.label(v) for k, v in env.items()}
            report.values = (a, b)
            if stop_at_first:
                break
    return report


def _one_var(D: Formula, var: Optional[str]) -> str:
    free = fm.free_vars(D)
    if var is not None:
        return var
    if len(free) != 1:
        raise ValueError("cannot infer the set variable; pass var=")
    return next(iter(free))


def definable_set_window(structure: ColoredStructure, D: Formula, var: str, env: dict,
                         registry=None) -> tuple[list, Callable[[Any], bool]]:
    ev = Evaluator(structure, registry)
    return ev.candidates(D, var, env), (lambda e: ev.formula(D, {**env, var: e}))


def sup_inf(structure: ColoredStructure, D: Formula, var: Optional[str] = None,
            env: Optional[dict] = None, registry=None) -> tuple[Cut, Cut]:
    """Supremum and infimum of ``{var : D}``; the empty set gives (MIN, MAX)."""
    var = _one_var(D, var)
    env = dict(env or {})
    if isinstance(structure, FiniteStructure):
        ev = Evaluator(structure, registry)
        members = [e for e in range(structure.n) if ev.formula(D, {**env, var: e})]
        if not members:
            return MIN_CUT, MAX_CUT
        return principal(max(members)), principal(min(members))
    if isinstance(structure, IntPeriodic):
        ev = Evaluator(structure, registry)
        cands = ev.candidates(D, var, env)
        k = structure.period
        sat = [e for e in cands if ev.formula(D, {**env, var: e})]
        if not sat:
            return MIN_CUT, MAX_CUT
        top = set(cands[-k:])
        bottom = set(cands[:k])
        sup = MAX_CUT if any(e in top for e in sat) else principal(max(sat))
        inf = MIN_CUT if any(e in bottom for e in sat) else principal(min(sat))
        return sup, inf
    if isinstance(structure, RatDense):
        ev = Evaluator(structure, registry)
        pts = sorted(set(v for k2, v in env.items() if k2 != var))
        sup = inf = None
        bounds = [None] + pts + [None]
        for i, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
            for cls in range(structure.m):
                q = structure.witness(lo, hi, cls)
                if ev.formula(D, {**env, var: q}):
                    hi_cut = MAX_CUT if hi is None else principal(hi)
                    lo_cut = MIN_CUT if lo is None else principal(lo)
                    sup = hi_cut if sup is None else max(sup, hi_cut)
                    inf = lo_cut if inf is None else min(inf, lo_cut)
        for p in pts:
            if ev.formula(D, {**env, var: p}):
                sup = principal(p) if sup is None else max(sup, principal(p))
                inf = principal(p) if inf is None else min(inf, principal(p))
        if sup is None:
            return MIN_CUT, MAX_CUT
        return sup, inf
    raise FragmentError(f"sup_inf: unsupported structure {structure.kind}")


def color_bounded_above(structure: ColoredStructure, C: Formula, var: Optional[str] = None,
                        env: Optional[dict] = None, registry=None) -> tuple[bool, Optional[Cut]]:
    """Whether ``{var : C}`` is bounded above in S, with its supremum if so."""
    sup, _ = sup_inf(structure, C, var, env, registry)
    if isinstance(structure, FiniteStructure):
        return True, sup
    if sup == MAX_CUT:
        return False, None
    return True, sup
