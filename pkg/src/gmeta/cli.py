"""The ``gm`` command: parse, typecheck, elaborate and run ``.gm`` programs.

Exit status: 0 value, 1 blame, 2 type error, 3 step limit, 4 usage or parse
error, 5 internal error (a stuck machine or a failed step check).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, TextIO

from .cctype import CCTypeError
from .context import TypeCheckError
from .deep import run_deep
from .gradual import elaborate_program
from .machine import (
    MachineError,
    StepCheckError,
    StepLimitExceeded,
    canonical_value,
    closed_code_check,
    make_machine,
)
from .parser import ParseError, parse_file
from .printer import render_code, render_term, render_type, render_value
from .static import static_typecheck
from .syntax import CLam, CodeApp, CodePrim, Eps, QuoteT, Splice

EXIT_VALUE, EXIT_BLAME, EXIT_TYPE, EXIT_LIMIT, EXIT_USAGE, EXIT_INTERNAL = range(6)

FOCUS_WIDTH = 60


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit 4, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gm", description="Run gradual multi-stage programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, doc in (("run", "typecheck, elaborate and evaluate"),
                      ("check", "typecheck only"),
                      ("elab", "print the elaborated cast-calculus term")):
        s = sub.add_parser(name, help=doc)
        s.add_argument("file")
        s.add_argument("--static", action="store_true",
                       help="use the static type system (no unknown types)")
        s.add_argument("--json", action="store_true", help="print a JSON result record")
        if name == "run":
            s.add_argument("--mode", choices=("naive", "space-efficient"), default="naive")
            s.add_argument("--trace", action="store_true", help="print one line per step")
            s.add_argument("--check-steps", action="store_true",
                           help="re-typecheck the machine state after every step")
            s.add_argument("--emit-cc", action="store_true",
                           help="print the elaborated term before running")
            s.add_argument("--step-limit", type=int, default=None, metavar="N")
    return p


def _focus(m: Any) -> str:
    code = isinstance(m, (CLam, CodeApp, CodePrim, Splice))
    text = render_code(m) if code else render_term(m)
    text = " ".join(text.split())
    return text if len(text) <= FOCUS_WIDTH else text[:FOCUS_WIDTH - 3] + "..."


def _tracer(out: TextIO):
    def trace(machine: Any) -> None:
        g = machine.g
        out.write(f"{machine.steps:6d} {machine.rule:<15} |D|={len(g.delta)} "
                  f"|T|={len(g.theta.edges)} {_focus(machine.focus)}\n")

    return trace


def _emit(args: argparse.Namespace, out: TextIO, record: dict, text: list[str]) -> None:
    if args.json:
        out.write(json.dumps(record) + "\n")
    else:
        for line in text:
            out.write(line + "\n")


def _typecheck(args: argparse.Namespace, prog: Any) -> tuple[Any, Any]:
    if args.static:
        static_typecheck(prog)
    return elaborate_program(prog)


def _main(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    try:
        prog = parse_file(args.file)
    except OSError as e:
        err.write(f"gm: cannot read {args.file}: {e.strerror}\n")
        return EXIT_USAGE
    except ParseError as e:
        err.write(f"parse error: {e}\n")
        return EXIT_USAGE
    try:
        term, ty = _typecheck(args, prog)
    except TypeCheckError as e:
        if args.json:
            out.write(json.dumps({"status": "type-error", "error": str(e)}) + "\n")
        err.write(f"type error: {e}\n")
        return EXIT_TYPE

    if args.command == "check":
        _emit(args, out, {"status": "ok", "type": render_type(ty)}, [render_type(ty)])
        return EXIT_VALUE
    if args.command == "elab":
        _emit(args, out, {"status": "ok", "term": render_term(term), "type": render_type(ty)},
              [render_term(term), f": {render_type(ty)}"])
        return EXIT_VALUE

    if args.emit_cc:
        err.write(render_term(term) + "\n")
    machine = make_machine(term, ty, args.mode, check_steps=args.check_steps,
                           step_limit=args.step_limit,
                           trace=_tracer(err) if args.trace else None)
    record: dict = {}
    try:
        outcome = machine.run()
    except StepLimitExceeded:
        record = {"status": "limit", "steps": machine.steps}
        _emit(args, out, _instrument(record, machine), [f"step limit reached after "
                                                          f"{machine.steps} steps"])
        return EXIT_LIMIT
    except (MachineError, StepCheckError, CCTypeError) as e:
        err.write(f"internal error after {machine.steps} steps: {e}\n")
        return EXIT_INTERNAL

    if outcome.status == "blame":
        label = outcome.label
        record = {"status": "blame", "blame_label": str(label), "steps": outcome.steps}
        lines = [f"blame {label} at {label.span}"]
        if outcome.raised_at is not None and outcome.raised_at.span != label.span:
            record["raised_at"] = str(outcome.raised_at.span)
            lines.append(f"raised at {outcome.raised_at.span}")
        _emit(args, out, _instrument(record, machine), lines)
        return EXIT_BLAME

    if isinstance(ty, QuoteT) and isinstance(ty.cls, Eps):
        try:
            closed_code_check(outcome)
        except CCTypeError as e:
            err.write(f"internal error: result code is not closed: {e}\n")
            return EXIT_INTERNAL
    text = render_value(canonical_value(outcome.term))
    record = {"status": "value", "rendered_value": text, "steps": outcome.steps}
    _emit(args, out, _instrument(record, machine), [text])
    return EXIT_VALUE


def _instrument(record: dict, machine: Any) -> dict:
    record["max_adjacent_casts"] = machine.max_adjacent_casts
    if machine.mode == "space-efficient":
        record["max_hyper_height"] = machine.max_hyper_height
    return record


def run(argv: list[str] | None = None, out: TextIO | None = None,
        err: TextIO | None = None) -> int:
    """Run the command line ``argv``; returns the exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    return run_deep(_main, args, out, err)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
