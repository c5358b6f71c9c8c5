"""Base and derived colors, and the closure levels built from them.

A derived color is a parameter-free, quantifier-free formula in the single
variable ``x``.  Its name is a content hash of the printed definition, so
two identical definitions share one name and rebuilding a registry gives
the same names.

Level bookkeeping: base colors sit at level 0.  An on-demand derived color
gets ``1 + max(level of the colors it mentions)``.  The cells of closure
level ``n`` (``build_level``) are registered at level ``n``; level ``n >= 1``
uses words of at most ``n`` basic functions over the base colors and the
cells of all lower levels.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import formula as fm
from .formula import (MINUS, PLUS, CutTerm, Formula, InColor, InS, Less, conj, neg)
from .structures import ColoredStructure, Evaluator

CANONICAL_VAR = "x"
BASE = "BASE"
DERIVED = "DERIVED"


class BudgetExhausted(RuntimeError):
    def __init__(self, message: str, level: int = 0, word: int = 0):
        super().__init__(message)
        self.level = level
        self.word = word


@dataclass(frozen=True)
class ColorRef:
    name: str
    kind: str = BASE
    level: int = 0
    definition: Optional[Formula] = None
    var: str = CANONICAL_VAR


def canonical_definition(definition: Formula, var: str = CANONICAL_VAR) -> Formula:
    free = fm.free_vars(definition)
    if not fm.is_quantifier_free(definition):
        raise ValueError("color definitions must be quantifier-free")
    if free - {var}:
        raise ValueError(f"color definition has extra free variables {sorted(free - {var})}")
    if var != CANONICAL_VAR:
        definition = fm.rename_free(definition, var, CANONICAL_VAR)
    return definition


def color_name(definition: Formula) -> str:
    digest = hashlib.sha256(fm.to_text(definition).encode()).hexdigest()
    return "D" + digest[:10]


@dataclass
class ColorRegistry:
    base: list[ColorRef] = field(default_factory=list)
    max_level: int = 24
    max_word: int = 24
    derived: dict[str, ColorRef] = field(default_factory=dict)
    levels: list[list[ColorRef]] = field(default_factory=list)
    used_level: int = 0
    used_word: int = 0

    @classmethod
    def for_colors(cls, names: Iterable[str], **budget) -> "ColorRegistry":
        return cls([ColorRef(n) for n in sorted(names)], **budget)

    @classmethod
    def for_structure(cls, structure: ColoredStructure, **budget) -> "ColorRegistry":
        return cls.for_colors(structure.colors, **budget)

    def names(self) -> set[str]:
        return {c.name for c in self.base} | set(self.derived)

    def lookup(self, name: str) -> ColorRef:
        for c in self.base:
            if c.name == name:
                return c
        try:
            return self.derived[name]
        except KeyError:
            raise KeyError(f"unknown color {name!r}") from None

    def level_of(self, name: str) -> int:
        return self.lookup(name).level

    def derive(self, definition: Formula, var: str = CANONICAL_VAR,
               level: Optional[int] = None) -> ColorRef:
        """Register (or find) the derived color defined by ``definition``."""
        definition = canonical_definition(definition, var)
        if (isinstance(definition, InColor) and definition.term == CutTerm(CANONICAL_VAR)
                and level is None):
            return self.lookup(definition.color)
        name = color_name(definition)
        if name in self.derived:
            return self.derived[name]
        refs = fm.colors_used(definition)
        for r in refs:
            self.lookup(r)
        if level is None:
            level = 1 + max((self.level_of(r) for r in refs), default=0)
        word = fm.max_word_length(definition)
        if level > self.max_level or word > self.max_word:
            raise BudgetExhausted(
                f"derived color needs closure level {level} and word length {word}; "
                f"budget is level {self.max_level}, word {self.max_word}", level, word)
        self.used_level = max(self.used_level, level)
        self.used_word = max(self.used_word, word)
        ref = ColorRef(name, DERIVED, level, definition)
        self.derived[name] = ref
        return ref

    def is_top(self, name: str) -> bool:
        ref = self.derived.get(name)
        return ref is not None and isinstance(ref.definition, fm.Top)

    def top(self) -> ColorRef:
        """The derived color of all of S."""
        return self.derive(fm.TRUE)

    def dump(self) -> dict:
        return {
            "base": [c.name for c in self.base],
            "derived": {n: {"level": c.level, "definition": fm.to_text(c.definition)}
                        for n, c in sorted(self.derived.items())},
            "levels": [[c.name for c in lv] for lv in self.levels],
            "budget": {"max_level": self.max_level, "max_word": self.max_word,
                       "used_level": self.used_level, "used_word": self.used_word},
        }


def _members(desc: Formula, structure: ColoredStructure, registry, elems) -> frozenset:
    var = _desc_var(desc)
    ev = Evaluator(structure, registry)
    return frozenset(e for e in elems if ev.formula(desc, {var: e}))


def _desc_var(desc: Formula) -> str:
    free = fm.free_vars(desc)
    if len(free) > 1:
        raise ValueError("set descriptors take one free variable")
    return next(iter(free), CANONICAL_VAR)


def refines(partition: Sequence[Formula], target: Formula, structure: ColoredStructure,
            registry: Optional[ColorRegistry] = None) -> bool:
    """Whether every cell lies inside ``target`` or inside its complement.

    Descriptors are parameter-free one-variable formulas; they are decided on
    the structure's representatives (all elements of a finite structure, one
    period of an ``IntPeriodic``, one point per class of a ``RatDense``).
    """
    elems = structure.representatives()
    tset = _members(target, structure, registry, elems)
    for cell in partition:
        cset = _members(cell, structure, registry, elems)
        if not (cset <= tset or not (cset & tset)):
            return False
    return True


def atomize(colors: Sequence[Formula], structure: Optional[ColoredStructure],
            registry: ColorRegistry, level: int = 0) -> list[ColorRef]:
    """Nonempty boolean atoms of ``colors`` as derived colors.

    Sign vectors are visited with positive literals first.  Without a
    structure every formal atom is kept.
    """
    colors = [canonical_definition(c, _desc_var(c)) for c in colors]
    elems = structure.representatives() if structure is not None else None
    sets = ([_members(c, structure, registry, elems) for c in colors]
            if structure is not None else None)
    out = []
    for signs in itertools.product((True, False), repeat=len(colors)):
        if structure is not None:
            cell = set(elems)
            for s, m in zip(signs, sets):
                cell &= m if s else set(elems) - m
            if not cell:
                continue
        lits = [c if s else neg(c) for s, c in zip(signs, colors)]
        out.append(registry.derive(conj(*lits), level=level))
    return out


def words(colors: Sequence[str], max_len: int) -> list[tuple[tuple[str, str], ...]]:
    """All words of length at most ``max_len``, shortest first."""
    out: list[tuple[tuple[str, str], ...]] = [()]
    letters = [(c, s) for c in colors for s in (PLUS, MINUS)]
    for n in range(1, max_len + 1):
        out.extend(itertools.product(letters, repeat=n))
    return out


def level_conditions(n: int, registry: ColorRegistry,
                     max_conditions: Optional[int] = None) -> list[Formula]:
    """Condition sets level ``n`` must refine (in the variable ``x``)."""
    if n < 1:
        return []
    lower = [c.name for c in registry.base]
    for lv in registry.levels[:n]:
        lower.extend(c.name for c in lv if c.name not in lower)
    ws = words(lower, n)
    count = len(ws) * (len(ws) - 1) + len(ws) * len(lower)
    if max_conditions is not None and count > max_conditions:
        raise BudgetExhausted(
            f"level {n} has {count} condition sets; budget allows {max_conditions}", n, n)
    x = CANONICAL_VAR
    conds: list[Formula] = []
    for F in ws:
        for G in ws:
            if F != G:
                conds.append(Less(CutTerm(x, F), CutTerm(x, G)))
    for F in ws:
        for V in lower:
            conds.append(conj(InS(CutTerm(x, F)), InColor(V, CutTerm(x, F))))
    return conds


def build_level(n: int, registry: ColorRegistry, structure: Optional[ColoredStructure],
                max_conditions: int = 200_000) -> list[ColorRef]:
    """Build closure level ``n`` (levels below must exist) and register its cells.

    Each cell's definition is its parent cell plus the literals of the
    conditions that split it, so definitions are exact on ``structure``.
    """
    if n != len(registry.levels):
        raise ValueError(f"levels 0..{n - 1} must be built before level {n}")
    if n > registry.max_level:
        raise BudgetExhausted(f"closure level {n} exceeds budget {registry.max_level}", n, 0)
    if n == 0:
        base = [InColor(c.name, CutTerm(CANONICAL_VAR)) for c in registry.base]
        cells = atomize(base, structure, registry, level=0)
        registry.levels.append(cells)
        return cells
    if n > registry.max_word:
        raise BudgetExhausted(f"level {n} needs words of length {n}; budget {registry.max_word}", n, n)
    if structure is None:
        conds = level_conditions(n, registry, max_conditions=16)
        parents = registry.levels[n - 1]
        out = []
        for p in parents:
            for signs in itertools.product((True, False), repeat=len(conds)):
                lits = [c if s else neg(c) for s, c in zip(signs, conds)]
                out.append(registry.derive(conj(InColor(p.name, CutTerm(CANONICAL_VAR)), *lits),
                                           level=n))
        registry.levels.append(out)
        return out
    conds = level_conditions(n, registry, max_conditions)
    elems = structure.representatives()
    ev = Evaluator(structure, registry)
    x = CANONICAL_VAR
    # (members, literals) per cell
    cells: list[tuple[frozenset, list[Formula], str]] = []
    for p in registry.levels[n - 1]:
        mem = frozenset(e for e in elems if ev.member(p.name, e))
        if mem:
            cells.append((mem, [], p.name))
    for cond in conds:
        truth = {e: ev.formula(cond, {x: e}) for e in elems}
        nxt = []
        for mem, lits, parent in cells:
            yes = frozenset(e for e in mem if truth[e])
            no = mem - yes
            if yes and no:
                nxt.append((yes, lits + [cond], parent))
                nxt.append((no, lits + [neg(cond)], parent))
            else:
                nxt.append((mem, lits, parent))
        cells = nxt
    out = [registry.derive(conj(InColor(parent, CutTerm(x)), *lits), level=n)
           for _, lits, parent in cells]
    registry.levels.append(out)
    return out


def level_members(level: Sequence[ColorRef], structure: ColoredStructure,
                  registry: ColorRegistry) -> list[frozenset]:
    ev = Evaluator(structure, registry)
    elems = structure.representatives()
    return [frozenset(e for e in elems if ev.member(c.name, e)) for c in level]
