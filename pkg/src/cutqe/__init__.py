"""Quantifier elimination for colored linear orders over their cut completion."""
from .calculus import (RewriteTrace, RuleError, isolate, peel_equality, peel_lower,
                       peel_strict_lower, peel_strict_upper, peel_upper, peel_upper_dual,
                       simplify_term, witness_between)
from .colors import BudgetExhausted, ColorRef, ColorRegistry, atomize, build_level, refines
from .formula import (CutTerm, Formula, FormulaSyntaxError, parse, parse_term, substitute,
                      to_dnf, to_text)
from .qe import (Cell, Interval, NonFunctionalGraph, PiecewiseFunction, Point, cell_decompose,
                 check_cells, eliminate_all, eliminate_exists, function_normal_form)
from .stabilize import EventualClass, StabilizationReport, classify_eventual, stabilize_family
from .structures import (Cut, Evaluator, FiniteStructure, FragmentError, IntPeriodic, RatDense,
                         StructureError, brute_force_check, eval_formula, eval_term,
                         load_structure, structure_from_json, sup_inf)

__version__ = "0.1.0"
