"""Seeded random structures and formulas for oracle checking."""
from __future__ import annotations

import random
from typing import Optional, Sequence

from .formula import (MAX_TERM, MIN_TERM, And, CutTerm, Eq, Exists, Forall, Formula,
                      InColor, InS, Less, Not, Or, FALSE, TRUE)
from .structures import FiniteStructure, IntPeriodic

COLOR_NAMES = ("U", "V", "W")
VAR_NAMES = ("a", "b", "c")


def random_finite(rng: random.Random, max_size: int = 10, max_colors: int = 3,
                  min_size: int = 1) -> FiniteStructure:
    n = rng.randint(min_size, max_size)
    k = rng.randint(1, max_colors)
    colors = {COLOR_NAMES[i]: [e for e in range(n) if rng.random() < 0.5] for i in range(k)}
    return FiniteStructure(list(range(n)), colors)


def random_periodic(rng: random.Random, max_period: int = 6, max_colors: int = 2) -> IntPeriodic:
    k = rng.randint(1, max_period)
    ncol = rng.randint(1, max_colors)
    colors = {COLOR_NAMES[i]: [r for r in range(k) if rng.random() < 0.5] for i in range(ncol)}
    return IntPeriodic(k, colors)


def random_term(rng: random.Random, variables: Sequence[str], colors: Sequence[str],
                max_word: int = 2) -> CutTerm:
    r = rng.random()
    if r < 0.08:
        base = MIN_TERM.base
    elif r < 0.16:
        base = MAX_TERM.base
    else:
        base = rng.choice(list(variables))
    n = rng.choice([0, 0, 1, 1, 2][: max_word + 3])
    n = min(n, max_word)
    word = tuple((rng.choice(list(colors)), rng.choice("+-")) for _ in range(n))
    return CutTerm(base, word)


def random_atom(rng: random.Random, variables, colors, max_word: int = 2) -> Formula:
    r = rng.random()
    t = lambda: random_term(rng, variables, colors, max_word)  # noqa: E731
    if r < 0.45:
        return Less(t(), t())
    if r < 0.65:
        return Eq(t(), t())
    if r < 0.92:
        return InColor(rng.choice(list(colors)), t())
    return InS(t())


def random_formula(rng: random.Random, colors: Sequence[str], variables: Sequence[str] = VAR_NAMES,
                   max_qdepth: int = 2, size: int = 4, max_word: int = 2,
                   bound: tuple[str, ...] = ()) -> Formula:
    """A formula over ``variables`` with at most ``max_qdepth`` nested quantifiers."""
    free_for_binding = [v for v in variables if v not in bound]
    if size <= 1 or rng.random() < 0.2:
        if rng.random() < 0.03:
            return rng.choice([TRUE, FALSE])
        return random_atom(rng, variables, colors, max_word)
    r = rng.random()
    if max_qdepth > 0 and free_for_binding and r < 0.35:
        v = rng.choice(free_for_binding)
        body = random_formula(rng, colors, variables, max_qdepth - 1, size - 1, max_word, bound + (v,))
        return Exists(v, body) if rng.random() < 0.6 else Forall(v, body)
    if r < 0.5:
        return Not(random_formula(rng, colors, variables, max_qdepth, size - 1, max_word, bound))
    k = rng.randint(2, 3)
    args = tuple(random_formula(rng, colors, variables, max_qdepth, size // k, max_word, bound)
                 for _ in range(k))
    return And(args) if rng.random() < 0.5 else Or(args)


def random_family(rng: random.Random, colors: Sequence[str], r: str = "r", x: str = "x",
                  c: str = "c", max_word: int = 2) -> tuple[Formula, dict, int]:
    """A union of cells in ``x`` indexed by ``r``, all below the parameter ``c``.

    Returns ``(family, params, bound)``.
    """
    colors = list(colors)

    def word(n):
        return tuple((rng.choice(colors), rng.choice("+-")) for _ in range(n))

    def rterm():
        return CutTerm(r, word(rng.randint(0, max_word)))

    parts = []
    for _ in range(rng.randint(1, 2)):
        lits = [Less(CutTerm(x), CutTerm(c))]
        if rng.random() < 0.8:
            low = rterm() if rng.random() < 0.75 else CutTerm(c, word(rng.randint(1, max_word)))
            lits.append(Less(low, CutTerm(x)))
        if rng.random() < 0.7:
            lit = InColor(rng.choice(colors), CutTerm(x))
            lits.append(lit if rng.random() < 0.6 else Not(lit))
        if rng.random() < 0.4:
            g = InColor(rng.choice(colors), rterm()) if rng.random() < 0.5 else Less(rterm(), rterm())
            lits.append(g if rng.random() < 0.5 else Not(g))
        parts.append(And(tuple(lits)))
    value = rng.randint(-5, 5)
    family = parts[0] if len(parts) == 1 else Or(tuple(parts))
    return family, {c: value}, value
