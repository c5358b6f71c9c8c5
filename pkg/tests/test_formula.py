import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from cutqe import formula as fm
from cutqe.formula import (MAX_TERM, MIN_TERM, And, CutTerm, Eq, Exists, FormulaSyntaxError,
                           InColor, Less, Not, Or, TRUE, parse, parse_term, substitute, to_dnf,
                           to_text)
from cutqe.randgen import random_finite, random_formula

from oracle import FiniteModel

a, b, x, y = (CutTerm(n) for n in "abxy")


def test_parse_exists_between():
    f = parse("(exists x (and (< a x) (< x b) (in U x)))")
    assert f == Exists("x", And((Less(a, x), Less(x, b), InColor("U", x))))


def test_leq_geq_desugar():
    assert parse("(<= a b)") == Not(Less(b, a))
    assert parse("(>= a b)") == Not(Less(a, b))


def test_parse_word_term():
    f = parse("(< (U+ U a) max)")
    assert f == Less(CutTerm("a", (("U", "+"),)), MAX_TERM)


def test_forall_kept():
    assert isinstance(parse("(forall x (in U x))"), fm.Forall)


def test_print_examples():
    assert to_text(Less(a, b)) == "(< a b)"
    assert to_text(Exists("x", TRUE)) == "(exists x true)"


@pytest.mark.parametrize("text, line, col", [
    ("(< a", 1, 5),
    ("(and\n  (< a b)\n  (frob a))", 3, 4),
    ("(in U a) extra", 1, 10),
    ("(U+ U a)", 1, 2),
])
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(FormulaSyntaxError) as info:
        parse(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_unknown_color_rejected():
    with pytest.raises(FormulaSyntaxError, match="unknown color"):
        parse("(in W a)", colors={"U"})


def test_shadowing_rejected():
    with pytest.raises(FormulaSyntaxError):
        parse("(exists x (exists x (< x a)))")


def test_substitute_examples():
    up_a = parse_term("(U+ U a)")
    assert substitute(Less(x, b), "x", up_a) == Less(up_a, b)
    g = substitute(InColor("U", parse_term("(U- V x)")), "x", MIN_TERM)
    assert g == InColor("U", CutTerm("min", (("V", "-"),)))
    h = substitute(Exists("x", Less(x, y)), "y", x)
    assert h == Exists("x'", Less(CutTerm("x'"), x))


def test_dnf_examples():
    A, B = Less(a, b), InColor("U", a)
    assert to_dnf(Or((A, B))) == Or((And((A,)), And((Not(A), B))))
    assert to_dnf(And((A,))) == Or((And((A,)),))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_round_trip(seed):
    rng = random.Random(seed)
    f = random_formula(rng, ["U", "V"], size=rng.randint(1, 9), max_word=3)
    assert parse(to_text(f)) == f
    assert to_text(parse(to_text(f))) == to_text(f)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_dnf_preserves_truth_and_is_disjoint(seed):
    rng = random.Random(seed)
    s = random_finite(rng, max_size=5)
    f = random_formula(rng, sorted(s.colors), max_qdepth=0, size=rng.randint(1, 6))
    d = to_dnf(f)
    m = FiniteModel.of(s)
    names = sorted(fm.free_vars(f))
    for env in m.assignments(names):
        hits = sum(m.holds(c, env) for c in d.args)
        assert hits == m.holds(f, env)  # at most one disjunct holds


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_substitute_commutes_with_evaluation(seed):
    rng = random.Random(seed)
    s = random_finite(rng, max_size=5, max_colors=2)
    cols = sorted(s.colors)
    f = random_formula(rng, cols, variables=("a", "b"), max_qdepth=1, size=4)
    t = CutTerm("b", tuple((rng.choice(cols), rng.choice("+-")) for _ in range(rng.randint(0, 2))))
    g = substitute(f, "a", t)
    m = FiniteModel.of(s)
    for va, vb in itertools.product(range(s.n), repeat=2):
        env = {"a": va, "b": vb}
        assert m.holds(g, env) == m.holds(f, {**env, "a": m.term(t, env)})


@pytest.mark.parametrize("text, want", [
    ("(not true)", "false"),
    ("(not (not false))", "false"),
    ("(not false)", "(or true)"),
])
def test_dnf_folds_constants(text, want):
    assert to_text(to_dnf(parse(text))) == want
