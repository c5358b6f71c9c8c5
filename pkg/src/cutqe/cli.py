"""Command-line front end.

Exit status: 0 success, 1 counterexample or failed verification, 2 input
error, 3 budget exhausted.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from typing import Optional

from . import formula as fm
from .colors import BudgetExhausted, ColorRegistry
from .qe import (NonFunctionalGraph, _binders, cell_decompose, check_cells, eliminate_all,
                 function_normal_form)
from .randgen import random_finite, random_formula
from .stabilize import stabilize_family
from .structures import (Evaluator, FiniteStructure, FragmentError, StructureError,
                         brute_force_check, load_structure)

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
COMMANDS = ("qe", "cells", "normform", "stabilize", "eval", "check")


class InputError(Exception):
    pass


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cutqe", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--formula", help="formula file, or the formula text itself")
    p.add_argument("--structure", help="structure JSON file")
    p.add_argument("--var", help="variable for cells/normform; comma list for stabilize")
    p.add_argument("--index", default="r", help="index variable for stabilize (default r)")
    p.add_argument("--bound", help="upper bound element for stabilize")
    p.add_argument("--assign", action="append", default=[], metavar="NAME=VALUE",
                   help="fix a free variable (repeatable)")
    p.add_argument("--budget-level", type=_positive, default=24)
    p.add_argument("--budget-word", type=_positive, default=24)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--structure-size", type=_positive, default=8)
    p.add_argument("--what", choices=("qe", "cells"), default="qe",
                   help="property exercised by check")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in json")
    return p


# ---------------------------------------------------------------------------
# inputs

def _formula_text(arg: Optional[str]) -> tuple[str, str]:
    if arg is None:
        raise InputError("--formula is required")
    if os.path.exists(arg):
        with open(arg) as fh:
            return fh.read(), arg
    return arg, "<formula>"


def _load(args, need_structure=False):
    text, where = _formula_text(args.formula)
    structure = None
    if args.structure:
        try:
            structure = load_structure(args.structure)
        except FileNotFoundError:
            raise InputError(f"{args.structure}: no such file") from None
        except json.JSONDecodeError as e:
            raise InputError(f"{args.structure}:{e.lineno}:{e.colno}: {e.msg}") from None
        except StructureError as e:
            raise InputError(f"{args.structure}: {e}") from None
    elif need_structure:
        raise InputError("--structure is required")
    colors = set(structure.colors) if structure is not None else None
    try:
        f = fm.parse(text, colors=colors)
    except fm.FormulaSyntaxError as e:
        raise InputError(f"{where}:{e.line}:{e.column}: {e.message}") from None
    if structure is not None:
        reg = ColorRegistry.for_structure(structure, max_level=args.budget_level,
                                          max_word=args.budget_word)
    else:
        reg = ColorRegistry.for_colors(fm.colors_used(f), max_level=args.budget_level,
                                       max_word=args.budget_word)
    return f, structure, reg, text


def _assignments(args, structure) -> dict:
    env = {}
    for item in args.assign:
        name, sep, raw = item.partition("=")
        if not sep or not name:
            raise InputError(f"--assign {item!r}: expected NAME=VALUE")
        env[name] = _element(structure, raw, f"--assign {name}")
    return env


def _element(structure, raw: str, what: str):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    try:
        return structure.parse_element(value)
    except StructureError as e:
        raise InputError(f"{what}: {e}") from None


def _digest(args, text: str) -> str:
    h = hashlib.sha256()
    h.update(args.command.encode())
    h.update(b"\0" + text.encode())
    if args.structure:
        with open(args.structure, "rb") as fh:
            h.update(b"\0" + fh.read())
    for k in ("var", "index", "bound", "seed", "trials", "structure_size", "what",
              "budget_level", "budget_word"):
        h.update(f"\0{k}={getattr(args, k)}".encode())
    for a in args.assign:
        h.update(f"\0{a}".encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# commands; each returns (exit status, json result, text lines)

def _registry_json(reg: ColorRegistry) -> dict:
    return reg.dump()


def _color_lines(reg: ColorRegistry) -> list[str]:
    return [f"; {name} := {fm.to_text(ref.definition)}"
            for name, ref in sorted(reg.derived.items())]


def cmd_qe(args):
    f, structure, reg, text = _load(args)
    g = eliminate_all(f, reg, structure=structure)
    result = {"formula": fm.to_text(g), "registry": _registry_json(reg)}
    return EXIT_OK, result, [fm.to_text(g), *_color_lines(reg)], reg, text


def _need_var(args, f) -> str:
    if not args.var:
        raise InputError("--var is required")
    return args.var


def cmd_cells(args):
    f, structure, reg, text = _load(args)
    x = _need_var(args, f)
    try:
        cells = cell_decompose(x, f, reg, structure=structure)
    except ValueError as e:
        raise InputError(f"cells: {e}") from None
    lines = []
    for c in cells:
        b = c.body
        if hasattr(b, "color"):
            shape = f"{fm.term_text(b.lower)} < {x} < {fm.term_text(b.upper)}, {x} in {b.color}"
        else:
            shape = f"{x} = {fm.term_text(b.value)}"
        lines.append(f"{fm.to_text(c.guard)} => {shape}")
    result = {"cells": [c.to_json() for c in cells], "registry": _registry_json(reg)}
    return EXIT_OK, result, lines + _color_lines(reg), reg, text


def cmd_normform(args):
    f, structure, reg, text = _load(args)
    y = _need_var(args, f)
    try:
        pf = function_normal_form(f, y, reg, structure=structure)
    except NonFunctionalGraph as e:
        return (EXIT_COUNTEREXAMPLE, {"error": str(e)}, [f"normform: not functional: {e}"],
                reg, text)
    checked = isinstance(structure, FiniteStructure)
    lines = [f"{fm.to_text(g)} => {fm.term_text(t)}" for g, t in pf.pieces]
    if not checked:
        lines.append("; functionality assumed, not checked")
    result = {"pieces": pf.to_json(), "functional_checked": checked,
              "registry": _registry_json(reg)}
    return EXIT_OK, result, lines + _color_lines(reg), reg, text


def cmd_stabilize(args):
    f, structure, reg, text = _load(args, need_structure=True)
    xs = [v for v in (args.var or "").split(",") if v]
    if not xs:
        raise InputError("--var is required (comma-separated coordinates)")
    if args.bound is None:
        raise InputError("--bound is required")
    bound = _element(structure, args.bound, "--bound")
    params = _assignments(args, structure)
    try:
        rep = stabilize_family(f, args.index, xs, bound, structure, reg, params=params)
    except (FragmentError, ValueError) as e:
        raise InputError(f"stabilize: {e}") from None
    result = rep.to_json(structure)
    lines = [f"r0 = {result['r0']}" + (" (trivial)" if rep.trivial else "")]
    for p in rep.pieces:
        lines.append(f"{fm.to_text(p.guard)} => {fm.to_text(p.constant_set)}")
    for name, v in result["bound_params"].items():
        lines.append(f"; {name} = {v}")
    lines.append("verified on r in [%d, %d]" % tuple(rep.pieces[0].window) if rep.verified
                 else f"NOT verified: {rep.counterexample}")
    status = EXIT_OK if rep.verified else EXIT_COUNTEREXAMPLE
    return status, result, lines, reg, text


def cmd_eval(args):
    f, structure, reg, text = _load(args, need_structure=True)
    env = _assignments(args, structure)
    missing = sorted(fm.free_vars(f) - set(env))
    if missing:
        raise InputError(f"eval: unassigned free variables {missing}")
    value = Evaluator(structure, reg).formula(f, env)
    return EXIT_OK, {"value": value}, ["true" if value else "false"], reg, text


def cmd_check(args):
    rng = random.Random(args.seed)
    agree = 0
    failure = None
    reg = None
    for i in range(args.trials):
        s = random_finite(rng, max_size=args.structure_size)
        f = random_formula(rng, sorted(s.colors), size=rng.randint(2, 6))
        reg = ColorRegistry.for_structure(s, max_level=args.budget_level,
                                          max_word=args.budget_word)
        if args.what == "qe":
            g = eliminate_all(f, reg, structure=s)
            rep = brute_force_check(s, f, g, reg)
            ok = rep.ok
            detail = {"assignment": rep.counterexample, "values": rep.values,
                      "output": fm.to_text(g)}
        else:
            free = sorted(fm.free_vars(f) - set(_binders(f)))
            x = free[0] if free else fm.fresh_name("x", fm.all_vars(f))
            cells = cell_decompose(x, f, reg, structure=s)
            _, fail = check_cells(x, f, cells, s, reg)
            ok = fail is None
            detail = fail
        if ok:
            agree += 1
        elif failure is None:
            failure = {"trial": i, "structure": s.to_json(), "formula": fm.to_text(f), **detail}
    lines = [f"{agree}/{args.trials} agree"]
    if failure is not None:
        lines.append(f"first counterexample: {json.dumps(failure, sort_keys=True, default=str)}")
    result = {"agree": agree, "trials": args.trials, "counterexample": failure}
    status = EXIT_OK if failure is None else EXIT_COUNTEREXAMPLE
    return status, result, lines, reg, ""


HANDLERS = {"qe": cmd_qe, "cells": cmd_cells, "normform": cmd_normform,
            "stabilize": cmd_stabilize, "eval": cmd_eval, "check": cmd_check}


def run(argv: Optional[list[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        status, result, lines, reg, text = HANDLERS[args.command](args)
    except InputError as e:
        print(f"cutqe {args.command}: error: {e}", file=err)
        return EXIT_INPUT
    except BudgetExhausted as e:
        print(f"cutqe {args.command}: budget exhausted: {e}", file=err)
        return EXIT_BUDGET
    elapsed = time.perf_counter() - t0
    if args.format == "json":
        used = ({"level": reg.used_level, "word": reg.used_word} if reg is not None
                else {"level": 0, "word": 0})
        doc = {"command": args.command, "input_digest": _digest(args, text), "result": result,
               "budget_used": used,
               "timings": {"total_seconds": round(elapsed, 6)} if args.timings else None}
        out.write(json.dumps(doc, sort_keys=True, indent=2, default=str) + "\n")
    else:
        for line in lines:
            out.write(line + "\n")
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
