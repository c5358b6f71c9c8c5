"""Acceptance criteria 1-8.

Each test prints one ``criterion N: PASS/FAIL`` line; conftest repeats them
in the terminal summary.  Expected values come from the naive evaluator in
``oracle.py`` rather than from the package's own evaluator.
"""
import itertools
import json
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from cutqe import formula as fm
from cutqe.colors import BudgetExhausted, ColorRegistry, build_level, level_conditions
from cutqe.qe import Interval, _binders, cell_decompose, eliminate_all, in_target_language
from cutqe.randgen import random_family, random_finite, random_formula, random_periodic
from cutqe.stabilize import stabilize_family
from cutqe.structures import FiniteStructure, IntPeriodic

from oracle import FiniteModel, IntModel

GOLDEN = Path(__file__).parent / "golden"


# --------------------------------------------------------------------------
# 1. QE soundness

def test_criterion_1_qe_soundness(criterion):
    rng = random.Random(20240601)
    trials, mismatches, assignments = 5000, [], 0
    t0 = time.perf_counter()
    for i in range(trials):
        s = random_finite(rng, max_size=10, max_colors=3)
        f = random_formula(rng, sorted(s.colors), max_qdepth=2, size=rng.randint(2, 6))
        assert fm.quantifier_depth(f) <= 2 and len(fm.all_vars(f)) <= 3
        reg = ColorRegistry.for_structure(s)
        g = eliminate_all(f, reg, structure=s)
        assert fm.is_quantifier_free(g) and in_target_language(g)
        model = FiniteModel.of(s, reg)
        names = sorted(fm.free_vars(f) | fm.free_vars(g))
        for env in model.assignments(names):
            assignments += 1
            if model.holds(f, env) != model.holds(g, env):
                mismatches.append((i, fm.to_text(f), env))
                break
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed <= 300
    criterion(1, ok, f"{trials} instances, {assignments} assignments, "
                     f"{len(mismatches)} mismatches, {elapsed:.0f}s")
    assert not mismatches, mismatches[:3]
    assert elapsed <= 300


# --------------------------------------------------------------------------
# 2 and 3. laws of the basic functions, exhaustively on small orders

def colored_orders(max_size=5, max_colors=2):
    for n in range(1, max_size + 1):
        subsets = [frozenset(i for i in range(n) if m >> i & 1) for m in range(2 ** n)]
        for k in range(1, max_colors + 1):
            for sets in itertools.product(subsets, repeat=k):
                yield n, dict(zip("UV"[:k], sets))


def _tables(n, colors):
    m = FiniteModel(n, colors)
    up = {c: [m.up(c, a) for a in range(n)] for c in colors}
    down = {c: [m.down(c, a) for a in range(n)] for c in colors}
    return up, down


def law_violations(n, colors):
    """Violations of the six items as literally stated, by item number."""
    up, down = _tables(n, colors)
    bad = {i: 0 for i in range(1, 7)}
    letters = [(c, s) for c in colors for s in "+-"]
    words = [w for L in (1, 2, 3) for w in itertools.product(letters, repeat=L)]

    def apply(w, a):
        for c, s in w:
            a = up[c][a] if s == "+" else down[c][a]
        return a

    for w in words:
        vals = [apply(w, a) for a in range(n)]
        bad[1] += sum(vals[i] > vals[i + 1] for i in range(n - 1))
    for c in colors:
        U, D = up[c], down[c]
        for a in range(n):
            bad[1] += not (D[a] <= a <= U[a])
            bad[1] += not (D[U[a]] <= a <= U[D[a]])
        for a, b in itertools.product(range(n), repeat=2):
            witness = any(a < x < b and x in colors[c] for x in range(n))
            bad[2] += witness != (U[a] < b)
            bad[3] += (U[a] < b) != (a < D[b])
            bad[4] += (b <= U[a]) != (D[b] <= a)
            bad[5] += (b == U[a]) != (U[D[b]] == b and D[b] <= a)
            bad[6] += (a == D[b]) != (D[U[a]] == a and U[a] >= b)
    return bad


def test_criterion_2_basic_function_laws(criterion):
    t0 = time.perf_counter()
    total = {i: 0 for i in range(1, 7)}
    example = {}
    orders = 0
    for n, colors in colored_orders():
        orders += 1
        for item, count in law_violations(n, colors).items():
            total[item] += count
            if count and item not in example:
                example[item] = (n, {k: sorted(v) for k, v in colors.items()})
    elapsed = time.perf_counter() - t0
    ok = not any(total.values()) and elapsed <= 120
    detail = ", ".join(f"item {i}: {total[i]}" for i in total)
    criterion(2, ok, f"{orders} colored orders, violations {detail}, {elapsed:.0f}s"
                     + (f"; first failing orders {example}" if example else ""))
    assert not any(total.values()), (total, example)


def test_criterion_3_contraction(criterion):
    bad = checked = 0
    for n, colors in colored_orders():
        up, down = _tables(n, colors)
        for c in colors:
            U, D = up[c], down[c]
            for a in range(n):
                checked += 2
                bad += U[D[U[a]]] != U[a]
                bad += D[U[D[a]]] != D[a]
    criterion(3, bad == 0, f"{checked} term evaluations, {bad} violations")
    assert bad == 0


# --------------------------------------------------------------------------
# 4. cell decomposition

def _in_cell(model, cell, env, x):
    b = cell.body
    if isinstance(b, Interval):
        return (model.term(b.lower, env) < x < model.term(b.upper, env)
                and model.member(b.color, x))
    return model.term(b.value, env) == x


def test_criterion_4_cells(criterion):
    rng = random.Random(4)
    done = bad = tuples = 0
    first = None
    while done < 1000:
        s = random_finite(rng, max_size=8)
        f = random_formula(rng, sorted(s.colors), size=rng.randint(2, 5))
        bound = set(_binders(f))
        free = sorted(fm.free_vars(f) - bound)
        if not free:
            continue
        x = free[0]
        reg = ColorRegistry.for_structure(s)
        cells = cell_decompose(x, f, reg, structure=s)
        model = FiniteModel.of(s, reg)
        params = sorted(fm.free_vars(f) - {x})
        done += 1
        for env in model.assignments(params):
            tuples += 1
            active = [c for c in cells if model.holds(c.guard, env)]
            for e in range(s.n):
                hits = sum(_in_cell(model, c, env, e) for c in active)
                want = model.holds(f, {**env, x: e})
                if hits > 1 or (hits == 1) != want:
                    bad += 1
                    first = first or (s.to_json(), fm.to_text(f), env, e)
                    break
    criterion(4, bad == 0, f"{done} instances, {tuples} parameter tuples, {bad} violations")
    assert bad == 0, first


# --------------------------------------------------------------------------
# 5. closure levels

def _level_sets(model, level, elems):
    return [frozenset(e for e in elems if model.member(c.name, e)) for c in level]


def _check_levels(structure, model_cls, elems, top):
    reg = ColorRegistry.for_structure(structure)
    model = model_cls.of(structure, reg)
    problems = []
    built = 0
    for n in range(top + 1):
        try:
            level = build_level(n, reg, structure)
        except BudgetExhausted:
            break
        built += 1
        sets = _level_sets(model, level, elems)
        if sum(map(len, sets)) != len(elems) or frozenset().union(*sets) != frozenset(elems):
            problems.append((n, "not a partition"))
        demanded = [frozenset(e for e in elems if model.member(c, e)) for c in structure.colors]
        if n > 0:
            demanded = [frozenset(e for e in elems if model.holds(cond, {"x": e}))
                        for cond in level_conditions(n, reg)]
            parents = _level_sets(model, reg.levels[n - 1], elems)
            demanded += parents
        for cell in sets:
            for target in demanded:
                if not (cell <= target or not cell & target):
                    problems.append((n, "does not refine"))
                    break
    return built, problems


def test_criterion_5_closure_levels(criterion):
    rng = random.Random(5)
    built = checked = 0
    problems = []
    for _ in range(150):
        s = random_finite(rng, max_size=8)
        b, p = _check_levels(s, FiniteModel, list(range(s.n)), 1)
        built, checked, problems = built + b, checked + 1, problems + p
    for _ in range(150):
        s = random_periodic(rng)
        b, p = _check_levels(s, IntModel, list(range(s.period)), 1)
        built, checked, problems = built + b, checked + 1, problems + p
    for n, colors in [(3, {"U": [1]}), (4, {"U": [0, 3]}), (2, {"U": [0], "V": [1]})]:
        s = FiniteStructure(list(range(n)), colors)
        b, p = _check_levels(s, FiniteModel, list(range(n)), 2)
        built, checked, problems = built + b, checked + 1, problems + p
    s = IntPeriodic(2, {"E": [0]})
    b, p = _check_levels(s, IntModel, [0, 1], 2)
    built, checked, problems = built + b, checked + 1, problems + p
    criterion(5, not problems, f"{checked} structures, {built} levels, {len(problems)} violations")
    assert not problems, problems[:5]


# --------------------------------------------------------------------------
# 6. stabilization

def _family_set(model, D, env, xs_window):
    return frozenset(x for x in xs_window if model.holds(D, {**env, "x": x}))


def test_criterion_6_stabilization(criterion):
    rng = random.Random(6)
    trials, bad, first = 120, 0, None
    for i in range(trials):
        S = random_periodic(rng, max_period=6)
        reg = ColorRegistry.for_structure(S)
        D, params, d = random_family(rng, sorted(S.colors))
        rep = stabilize_family(D, "r", ["x"], d, S, reg, params=params)
        model = IntModel.of(S, reg)
        k = S.period
        window = range(min(rep.r0, d) - 12 * k, d + 3 * k)
        consts = {**params, **rep.bound_params}
        failure = None
        for r in range(rep.r0, rep.r0 + 10 * k + 1):
            env = {**params, "r": r}
            active = [p for p in rep.pieces if model.holds(p.guard, env)]
            if len(active) != 1:
                failure = (r, f"{len(active)} guards hold")
                break
            got = _family_set(model, D, env, window)
            want = _family_set(model, active[0].constant_set, consts, window)
            if got != want or any(x > d for x in got):
                failure = (r, sorted(got ^ want))
                break
        if failure or not rep.verified:
            bad += 1
            first = first or (S.to_json(), fm.to_text(D), params, rep.r0, failure)
    # finite structures have a maximum, so the report is immediate
    F = FiniteStructure(list(range(6)), {"U": [0, 2, 4]})
    t0 = time.perf_counter()
    fin = stabilize_family(fm.parse("(and (in U x) (< r x))"), "r", ["x"], 5, F,
                           ColorRegistry.for_structure(F))
    quick = fin.trivial and fin.r0 == 5 and time.perf_counter() - t0 < 1.0
    ok = bad == 0 and quick
    criterion(6, ok, f"{trials} integer families, {bad} violations; finite short-circuit "
                     f"{'immediate' if quick else 'NOT immediate'}")
    assert bad == 0, first
    assert quick


# --------------------------------------------------------------------------
# 7. determinism

def _cli(args, seed):
    env = {**os.environ, "PYTHONHASHSEED": str(seed)}
    out = subprocess.run([sys.executable, "-m", "cutqe", *args, "--format", "json"],
                         capture_output=True, env=env, cwd=GOLDEN)
    return out.returncode, out.stdout


DETERMINISM_RUNS = [
    ["qe", "--formula", "between.lo"],
    ["qe", "--formula", "nested.lo", "--structure", "finite6.json"],
    ["cells", "--formula", "cells.lo", "--structure", "finite6.json", "--var", "x"],
    ["normform", "--formula", "succ.lo", "--structure", "finite6.json", "--var", "y"],
    ["stabilize", "--formula", "family.lo", "--structure", "evens.json", "--var", "x",
     "--bound", "5", "--assign", "c=5"],
    ["eval", "--formula", "nested.lo", "--structure", "finite6.json"],
    ["check", "--seed", "7", "--trials", "60", "--structure-size", "6"],
    ["check", "--seed", "8", "--trials", "40", "--what", "cells"],
]


def test_criterion_7_determinism(criterion):
    diffs = []
    for args in DETERMINISM_RUNS:
        a, b = _cli(args, 1), _cli(args, 2)
        if a != b or a[0] != 0:
            diffs.append(args[0])
    criterion(7, not diffs, f"{len(DETERMINISM_RUNS)} commands run twice, "
                            f"differences in {diffs or 'none'}")
    assert not diffs


# --------------------------------------------------------------------------
# 8. round trip

def test_criterion_8_round_trip(criterion):
    rng = random.Random(8)
    bad = 0
    for _ in range(1000):
        f = random_formula(rng, ["U", "V", "W"], size=rng.randint(1, 8), max_word=3)
        if fm.parse(fm.to_text(f)) != f:
            bad += 1
    golden = sorted((GOLDEN / "grammar").glob("*.lo"))
    stale = [p.name for p in golden
             if fm.to_text(fm.parse(p.read_text())) + "\n"
             != p.with_suffix(".out").read_text()]
    ok = bad == 0 and not stale and golden
    criterion(8, bool(ok), f"1000 random ASTs, {bad} round-trip failures; "
                           f"{len(golden)} grammar golden files, {len(stale)} stale")
    assert bad == 0
    assert golden and not stale, stale
