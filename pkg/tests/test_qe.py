import random

import pytest
from hypothesis import given, settings, strategies as st

from cutqe import formula as fm
from cutqe.colors import ColorRegistry
from cutqe.formula import CutTerm, parse, parse_term
from cutqe.qe import (Interval, NonFunctionalGraph, Point, cell_decompose, eliminate_all,
                      eliminate_exists, function_normal_form, in_target_language)
from cutqe.randgen import random_finite, random_formula
from cutqe.structures import FiniteStructure, IntPeriodic, eval_formula, eval_term, principal

from oracle import FiniteModel


def reg_for(*colors):
    return ColorRegistry.for_colors(colors)


def test_between_eliminates_to_successor():
    body = parse("(and (< a x) (< x b) (in U x))")
    assert fm.to_text(eliminate_exists("x", body, reg_for("U"))) == "(< (U+ U a) b)"


def test_point_witness():
    assert eliminate_exists("x", parse("(= x a)"), reg_for()) == fm.TRUE


def test_nothing_below_the_only_member():
    s = FiniteStructure([0, 1, 2], {"U": [2]})
    reg = ColorRegistry.for_structure(s)
    g = eliminate_exists("x", parse("(and (in U x) (< x a))"), reg, structure=s)
    assert not any(eval_formula(s, g, {"a": a}, reg) for a in range(3))


def test_closed_sentence():
    s = FiniteStructure(list(range(6)), {"U": [2, 4]})
    reg = ColorRegistry.for_structure(s)
    g = eliminate_all(parse("(exists x (in U x))"), reg, structure=s)
    assert not fm.free_vars(g) and eval_formula(s, g, {}, reg)


def test_quantifier_free_is_fixed():
    f = parse("(or (< (U+ U a) b) (in U b) (inS (U- U min)))")
    assert eliminate_all(f, reg_for("U")) == f
    g = eliminate_all(parse("(in U (U- U b))"), reg_for("U"))
    assert in_target_language(g)


def test_evens_unbounded_sentence():
    s = IntPeriodic(2, {"U": [0]})
    reg = ColorRegistry.for_structure(s)
    f = parse("(forall x (or (not (in U x)) (exists y (and (< x y) (in U y)))))")
    g = eliminate_all(f, reg, structure=s)
    assert fm.is_quantifier_free(g) and eval_formula(s, g, {}, reg)


def test_single_interval_cell():
    cells = cell_decompose("x", parse("(and (< a x) (< x b) (in U x))"), reg_for("U"))
    assert len(cells) == 1
    assert cells[0].guard == fm.TRUE
    assert cells[0].body == Interval(CutTerm("a"), CutTerm("b"), "U")


def test_single_point_cell():
    cells = cell_decompose("x", parse("(= x a)"), reg_for())
    assert [(c.guard, c.body) for c in cells] == [(fm.TRUE, Point(CutTerm("a")))]


def test_bound_variable_rejected():
    with pytest.raises(ValueError):
        cell_decompose("a", parse("(and (< a b) (exists a (in U a)))"), reg_for("U"))


def test_successor_normal_form():
    s = FiniteStructure(list(range(6)), {"U": [1, 3, 4]})
    reg = ColorRegistry.for_structure(s)
    pf = function_normal_form(parse("(= y (U+ U a))"), "y", reg, structure=s)
    for a in range(6):
        live = [t for g, t in pf.pieces if eval_formula(s, g, {"a": a}, reg)]
        assert len(live) == 1
        assert eval_term(s, live[0], {"a": a}, reg) == eval_term(
            s, parse_term("(U+ U a)"), {"a": a})
    assert parse_term("(U+ U a)") in [t for _, t in pf.pieces]


def test_identity_normal_form():
    pf = function_normal_form(parse("(= y a)"), "y", reg_for())
    assert pf.pieces == ((fm.TRUE, CutTerm("a")),)


def test_least_multiple_of_three_above():
    s = IntPeriodic(3, {"U": [0]})
    reg = ColorRegistry.for_structure(s)
    graph = parse("(and (in U y) (< a y) (not (exists z (and (in U z) (< a z) (< z y)))))")
    pf = function_normal_form(graph, "y", reg, structure=s)
    for a in range(-30, 31):
        live = [t for g, t in pf.pieces if eval_formula(s, g, {"a": a}, reg)]
        assert len(live) == 1
        assert eval_term(s, live[0], {"a": a}, reg) == principal(a + 3 - a % 3)


def test_non_functional_graph():
    s = FiniteStructure(list(range(4)), {"U": [1, 2]})
    reg = ColorRegistry.for_structure(s)
    with pytest.raises(NonFunctionalGraph):
        function_normal_form(parse("(and (in U y) (< a y))"), "y", reg, structure=s)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_output_shape_and_variable_gone(seed):
    rng = random.Random(seed)
    s = random_finite(rng, max_size=6)
    f = random_formula(rng, sorted(s.colors), size=rng.randint(2, 6))
    reg = ColorRegistry.for_structure(s)
    g = eliminate_all(f, reg, structure=s)
    assert in_target_language(g)
    assert fm.free_vars(g) <= fm.free_vars(f)
    body = random_formula(rng, sorted(s.colors), max_qdepth=0, size=4)
    h = eliminate_exists("a", body, reg, structure=s)
    assert "a" not in fm.all_vars(h)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_structure_free_elimination_is_sound(seed):
    # no structure given: the output must hold on every model of the colors
    rng = random.Random(seed)
    s = random_finite(rng, max_size=5, max_colors=2)
    f = random_formula(rng, sorted(s.colors), max_qdepth=1, size=rng.randint(2, 4), max_word=1)
    reg = ColorRegistry.for_colors(sorted(s.colors))
    g = eliminate_all(f, reg)
    m = FiniteModel.of(s, reg)
    for env in m.assignments(sorted(fm.free_vars(f) | fm.free_vars(g))):
        assert m.holds(f, env) == m.holds(g, env)
