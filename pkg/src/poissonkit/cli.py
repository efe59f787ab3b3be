"""Batch runner for session scripts.

Commands run in script order. Results go to standard output as text and,
with ``--out``, to a JSON report that is byte-identical for identical
inputs (wall-clock timings are shown in the text output only).

Exit codes: 0 success, 1 a command errored or a check failed, 2 the script
could not be parsed or the command line was invalid.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
import time
from fractions import Fraction

from . import __version__, brackets, calculus
from .closure import GeneratorSet, closure_report
from .core.expr import Resolver
from .core.render import aliases_for, render_human, render_machine
from .errors import KitError
from .oracle import cross_check
from .parser import Bracket, Check, Closure, Commutator, Diff, Simplify, parse_session

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="poissonkit", description="Run a Poisson bracket session script.")
    p.add_argument("script", help="session script path")
    p.add_argument("--out", metavar="FILE", help="write the JSON report here")
    p.add_argument("--seed", type=int, default=42, help="oracle seed (default 42)")
    p.add_argument("--fail-fast", action="store_true", help="stop at the first failing command")
    p.add_argument("--quiet", action="store_true", help="suppress text output")
    p.add_argument("--hbar-value", type=_rational, default=Fraction(1), metavar="R",
                   help="numeric value of hbar used by check (default 1)")
    p.add_argument("--version", action="version", version=f"poissonkit {__version__}")
    return p


class Session:
    """Executes parsed commands against one set of definitions."""

    def __init__(self, script, seed: int = 42, hbar_value=1):
        self.script = script
        self.space = script.space
        self.resolver = Resolver(self.space, script.definition_map())
        self.seed = seed
        self.hbar_value = hbar_value
        resolved = {}
        for d in script.definitions:
            try:
                resolved[d.name] = self.resolver.lookup(d.name)
            except KitError:
                pass
        self.aliases = aliases_for(resolved)

    def value(self, arg):
        return self.resolver.normalize(arg.expr)

    def _result(self, value) -> dict:
        return {"human": render_human(value, self.aliases), "machine": render_machine(value)}

    def execute(self, cmd) -> tuple[dict, list[str], bool]:
        """(record fields, text lines, passed)."""
        if isinstance(cmd, (Bracket, Commutator)):
            op = brackets.poisson_bracket if isinstance(cmd, Bracket) else brackets.commutator
            res = op(self.value(cmd.lhs), self.value(cmd.rhs), self.space, cmd.lhs.text, cmd.rhs.text)
            left, right = ("{", "}") if res.kind == "poisson" else ("[", "]")
            rec = {"result": self._result(res.value)}
            return rec, [f"{left}{cmd.lhs.text}, {cmd.rhs.text}{right} = {rec['result']['human']}"], True
        if isinstance(cmd, Diff):
            value = calculus.partial(self.value(cmd.expr), cmd.var, self.space)
            rec = {"result": self._result(value)}
            return rec, [f"d/d{cmd.var} {cmd.expr.text} = {rec['result']['human']}"], True
        if isinstance(cmd, Simplify):
            rec = {"result": self._result(self.value(cmd.expr))}
            return rec, [f"{cmd.expr.text} = {rec['result']['human']}"], True
        if isinstance(cmd, Closure):
            return self._closure(cmd)
        if isinstance(cmd, Check):
            return self._check(cmd)
        raise TypeError(f"unknown command {cmd!r}")

    def _closure(self, cmd):
        g = GeneratorSet(
            self.space,
            {a.text: self.value(a) for a in cmd.scalars},
            {a.text: self.value(a) for a in cmd.generators},
        )
        report = closure_report(g, cmd.degree, cmd.hbar_max)
        lines = [f"closure (degree {cmd.degree}, hbar_max {cmd.hbar_max}): {report.verdict}"]
        for e in report.entries:
            if e.match.matched:
                lines.append(f"  {{{e.lhs}, {e.rhs}}} = {e.match.combination}")
            else:
                lines.append(f"  {{{e.lhs}, {e.rhs}}} not matched: {render_human(e.value, self.aliases)}")
        lines.append("  basis: " + ", ".join(report.basis))
        return {"closure": report.to_record(self.aliases)}, lines, True

    def _check(self, cmd):
        a, b = self.value(cmd.lhs), self.value(cmd.rhs)
        if cmd.expected is not None:
            symbolic = self.value(cmd.expected)
        else:
            symbolic = brackets.poisson_value(a, b, self.space)
        res = cross_check(a, b, symbolic, cmd.trials, cmd.tolerance, seed=self.seed, hbar=self.hbar_value)
        verdict = "PASS" if res.passed else "FAIL"
        lines = [
            f"check {{{cmd.lhs.text}, {cmd.rhs.text}}} = {render_human(symbolic, self.aliases)}: {verdict} "
            f"({res.trials} trials, tol {res.tolerance:g}, worst |diff| {res.discrepancy:.3e})"
        ]
        if not res.passed:
            lines.append(f"  worst point: {res.worst_point.describe(self.space)}")
        rec = {"result": self._result(symbolic), "check": res.to_record(self.space)}
        return rec, lines, res.passed


_KINDS = {Bracket: "bracket", Commutator: "commutator", Diff: "diff", Simplify: "simplify",
          Closure: "closure", Check: "check"}


def run(text: str, *, seed: int = 42, hbar_value=1, fail_fast: bool = False, out=None, err=None):
    """Run a script. Returns (exit code, report dict or None)."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        script = parse_session(text)
    except KitError as exc:
        print(f"parse error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_USAGE, None
    session = Session(script, seed, hbar_value)
    records = []
    failed = False
    for cmd in script.commands:
        rec = {"line": cmd.line, "command": cmd.source, "kind": _KINDS[type(cmd)]}
        start = time.perf_counter()
        try:
            fields, lines, passed = session.execute(cmd)
            rec.update(fields)
            rec["status"] = "ok" if passed else "failed"
        except (KitError, ValueError, ZeroDivisionError) as exc:
            passed = False
            line = getattr(exc, "line", None) or cmd.line
            rec["status"] = "error"
            rec["error"] = {"type": type(exc).__name__, "message": getattr(exc, "message", str(exc)), "line": line}
            print(f"line {line}: {type(exc).__name__}: {rec['error']['message']}", file=err)
            lines = [f"error: {type(exc).__name__}: {rec['error']['message']}"]
        elapsed = (time.perf_counter() - start) * 1000
        print(f"line {cmd.line}: {cmd.source}  ({elapsed:.1f} ms)", file=out)
        for ln in lines:
            print("  " + ln, file=out)
        records.append(rec)
        failed = failed or not passed
        if failed and fail_fast:
            break
    status = "failure" if failed else "success"
    print(f"status: {status}", file=out)
    report = {
        "version": __version__,
        "script_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "seed": seed,
        "hbar_value": str(hbar_value),
        "commands": records,
        "status": status,
    }
    return (EXIT_FAILED if failed else EXIT_OK), report


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    args = parser.parse_args(argv)
    try:
        with open(args.script, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read {args.script}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    sink = io.StringIO() if args.quiet else sys.stdout
    code, report = run(text, seed=args.seed, hbar_value=args.hbar_value, fail_fast=args.fail_fast, out=sink)
    if report is not None and args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dump_report(report))
    return code
