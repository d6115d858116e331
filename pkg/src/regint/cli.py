"""Command-line front end.

Subcommands::

    eval      finite-limit integral with a critical endpoint
    eval-inf  infinite-limit integral
    sweep     emit the convergence trace as CSV (finite or infinite)
    props     run the property suite

Exit codes: 0 converged / all checks passed, 2 diverged, 3 inconclusive,
4 a property check failed, 1 usage or expression errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
from typing import List, Optional, Sequence

from . import __version__
from .chvar import make_map
from .errors import ExprError, ExprSyntaxError, RegintError
from .exprparse import compile_expr, parse
from .quad import Antiderivative, Integrand
from .regfun import (InitializationFn, combine_init, make_bspline_termination, make_linear_ramp,
                     make_smoothstep, make_uniform_termination, w_from_z, z_from_w)
from .zlimit import EvalRequest, LimitSchedule, ZResult, evaluate, trace_to_csv

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_INCONCLUSIVE, EXIT_PROPS_FAILED = 0, 1, 2, 3, 4
_STATUS_EXIT = {"converged": EXIT_OK, "diverged": EXIT_DIVERGED, "inconclusive": EXIT_INCONCLUSIVE}

INIT_GRAMMAR = "ramp | smoothstep | combine:<a>,<b> | from-z:<alpha>[:<c>]"
TERM_GRAMMAR = "uniform:<c> | bspline:<c>[:<order>]"
MAP_GRAMMAR = "exp:<alpha> | power:<r>"


class UsageError(Exception):
    """Bad flag value; the message names the flag and the expected grammar."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ flag values

def parse_init(text: str) -> InitializationFn:
    """Initialization function from its flag spelling (see ``INIT_GRAMMAR``)."""
    text = text.strip()
    if text == "ramp":
        return make_linear_ramp()
    if text == "smoothstep":
        return make_smoothstep()
    if text.startswith("combine:"):
        parts = text[len("combine:"):].split(",")
        if len(parts) != 2 or not all(parts):
            raise UsageError(f"--init: bad combine spec '{text}'; expected {INIT_GRAMMAR}")
        left, right = (parse_init(p) for p in parts)
        return combine_init(left, right)
    if text.startswith("from-z:"):
        fields = text[len("from-z:"):].split(":")
        try:
            alpha = float(fields[0])
            c = float(fields[1]) if len(fields) > 1 else 1.0
        except (ValueError, IndexError):
            raise UsageError(f"--init: bad from-z spec '{text}'; expected {INIT_GRAMMAR}") from None
        if len(fields) > 2 or not (alpha > 0 and c > 0):
            raise UsageError(f"--init: bad from-z spec '{text}'; expected {INIT_GRAMMAR}")
        return w_from_z(make_uniform_termination(c), alpha)
    raise UsageError(f"--init: unknown initialization '{text}'; expected {INIT_GRAMMAR}")


def parse_term(text: str):
    name, _, rest = text.strip().partition(":")
    fields = rest.split(":") if rest else []
    try:
        if name == "uniform" and len(fields) == 1:
            return make_uniform_termination(float(fields[0]))
        if name == "bspline" and len(fields) in (1, 2):
            order = int(fields[1]) if len(fields) == 2 else 1
            return make_bspline_termination(float(fields[0]), order)
    except (ValueError, RegintError) as exc:
        raise UsageError(f"--term: bad value '{text}' ({exc}); expected {TERM_GRAMMAR}") from None
    raise UsageError(f"--term: unknown termination '{text}'; expected {TERM_GRAMMAR}")


def _map(text: str):
    try:
        return make_map(text)
    except (ValueError, RegintError) as exc:
        raise UsageError(f"--map: {exc}; expected {MAP_GRAMMAR}") from None


def _expr(flag: str, text: str, var: str):
    try:
        return compile_expr(parse(text), var)
    except ExprSyntaxError as exc:
        caret = " " * exc.offset_0 + "^"
        raise UsageError(f"{flag}: {exc}\n  {text}\n  {caret}") from None
    except ExprError as exc:
        raise UsageError(f"{flag}: {exc} (the variable is '{var}')") from None


# ---------------------------------------------------------------------- output

def _fmt(x) -> str:
    return "null" if x is None or not math.isfinite(x) else format(x, ".16e")


def to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with every float printed to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {to_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    return json.dumps(str(obj))


def _text_result(res: ZResult) -> str:
    lines = [f"status:         {res.status}",
             f"value:          {res.value!r}",
             f"estimate:       {res.estimate!r}",
             f"error_estimate: {res.error_estimate!r}",
             f"levels:         {len(res.trace)}",
             f"evaluations:    {res.evaluations}"]
    if res.reason:
        lines.append(f"reason:         {res.reason}")
    return "\n".join(lines) + "\n"


def _emit_result(res: ZResult, fmt: str, out) -> None:
    if fmt == "json":
        payload = {"version": __version__}
        payload.update(res.to_dict())
        out.write(to_json(payload) + "\n")
    elif fmt == "csv":
        out.write(trace_to_csv(res.trace))
    else:
        out.write(_text_result(res))


# ---------------------------------------------------------------------- parser

def _add_schedule(p):
    g = p.add_argument_group("schedule")
    g.add_argument("--tol", type=float, default=1e-8, help="convergence tolerance (default 1e-8)")
    g.add_argument("--levels", type=int, default=40, help="maximum schedule levels (default 40)")
    g.add_argument("--ratio", type=float, default=None, help="schedule ratio (default 1/2 or 2)")
    g.add_argument("--start", type=float, default=None, help="first delta or b")
    g.add_argument("--extrapolation", choices=("none", "richardson", "epsilon-algorithm"),
                   default="richardson")
    g.add_argument("--max-evals", type=int, default=None, help="integrand evaluation budget")


def _add_finite(p, required=True):
    p.add_argument("--g", required=required, metavar="EXPR", help="integrand in u")
    p.add_argument("--G", metavar="EXPR", help="antiderivative of g in u (optional)")
    p.add_argument("--beta", type=float, default=None, metavar="B", help="non-critical endpoint")
    p.add_argument("--lower", type=float, default=0.0, metavar="L",
                   help="lower endpoint (default 0)")
    p.add_argument("--critical", choices=("lower", "upper"), default="lower")
    p.add_argument("--init", default="smoothstep", metavar="NAME", help=INIT_GRAMMAR)


def _add_infinite(p, required=True):
    p.add_argument("--f", required=required, metavar="EXPR", help="integrand in x")
    p.add_argument("--F", metavar="EXPR", help="antiderivative of f in x (optional)")
    p.add_argument("--a", type=float, default=None, metavar="A", help="finite lower limit")
    p.add_argument("--term", metavar="NAME", help=TERM_GRAMMAR)
    p.add_argument("--init", default="smoothstep", metavar="NAME", help=INIT_GRAMMAR)
    p.add_argument("--z-alpha", type=float, default=1.0, metavar="A",
                   help="alpha of the first-type termination built from --init (default 1)")
    p.add_argument("--map", metavar="NAME", help=f"second-type definition with this map: {MAP_GRAMMAR}")


def build_parser() -> argparse.ArgumentParser:
    env_fmt = os.environ.get("REGINT_FORMAT", "text")
    if env_fmt not in ("json", "csv", "text"):
        env_fmt = "text"
    parser = _Parser(prog="regint", description="Regularized improper integrals.")
    parser.add_argument("--version", action="version", version=f"regint {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="finite-limit integral with a critical endpoint")
    _add_finite(p)
    _add_schedule(p)
    p.add_argument("--hint", metavar="EXPR", help="oscillation rate |phase'(u)| of g")
    p.add_argument("--format", choices=("json", "csv", "text"), default=env_fmt)

    p = sub.add_parser("eval-inf", help="infinite-limit integral")
    _add_infinite(p)
    _add_schedule(p)
    p.add_argument("--hint", metavar="EXPR", help="oscillation rate |phase'(x)| of f")
    p.add_argument("--format", choices=("json", "csv", "text"), default=env_fmt)

    p = sub.add_parser("sweep", help="convergence trace as CSV")
    p.add_argument("--g", metavar="EXPR", help="finite-limit integrand in u")
    p.add_argument("--G", metavar="EXPR")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--lower", type=float, default=0.0)
    p.add_argument("--critical", choices=("lower", "upper"), default="lower")
    p.add_argument("--f", metavar="EXPR", help="infinite-limit integrand in x")
    p.add_argument("--F", metavar="EXPR")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--term", metavar="NAME", help=TERM_GRAMMAR)
    p.add_argument("--init", default="smoothstep", metavar="NAME", help=INIT_GRAMMAR)
    p.add_argument("--z-alpha", type=float, default=1.0)
    p.add_argument("--map", metavar="NAME", help=MAP_GRAMMAR)
    p.add_argument("--hint", metavar="EXPR")
    _add_schedule(p)

    p = sub.add_parser("props", help="run the property suite")
    p.add_argument("--only", metavar="SUBSTR", help="run checks whose name contains SUBSTR")
    p.add_argument("--list", action="store_true", help="list check names and exit")
    p.add_argument("--format", choices=("json", "text"), default="json" if env_fmt == "json" else "text")
    return parser


# --------------------------------------------------------------------- actions

def _schedule(ns) -> LimitSchedule:
    kw = dict(tol=ns.tol, max_levels=ns.levels, ratio=ns.ratio, start=ns.start,
              extrapolation=ns.extrapolation)
    if ns.max_evals is not None:
        kw["max_evals"] = ns.max_evals
    try:
        return LimitSchedule(**kw)
    except ValueError as exc:
        raise UsageError(f"schedule: {exc}") from None


def _finite_request(ns) -> EvalRequest:
    if ns.beta is None:
        raise UsageError("--beta: required for a finite-limit integral")
    w = parse_init(ns.init)
    g = _expr("--g", ns.g, "u")
    hint = _expr("--hint", ns.hint, "u") if ns.hint else None
    lo, hi = ns.lower, ns.beta
    integrand = Integrand(g, (lo, hi), (), hint, ns.g)
    anti = None
    if ns.G:
        base = hi if ns.critical == "lower" else lo
        anti = Antiderivative.closed_form(_expr("--G", ns.G, "u"), base, integrand)
    try:
        return EvalRequest(integrand, (lo, hi), w, anti, ns.critical)
    except (RegintError, ValueError, TypeError) as exc:
        raise UsageError(f"--beta/--lower: {exc}") from None


def _infinite_request(ns) -> EvalRequest:
    if ns.a is None:
        raise UsageError("--a: required for an infinite-limit integral")
    f = _expr("--f", ns.f, "x")
    hint = _expr("--hint", ns.hint, "x") if ns.hint else None
    integrand = Integrand(f, (-math.inf, math.inf), (), hint, ns.f)
    if ns.map and ns.term:
        raise UsageError("--map/--term: give at most one")
    if ns.map:
        reg = (parse_init(ns.init), _map(ns.map))
    elif ns.term:
        reg = parse_term(ns.term)
    else:
        if not ns.z_alpha > 0:
            raise UsageError("--z-alpha: must be positive")
        reg = z_from_w(parse_init(ns.init), ns.z_alpha)
    anti = Antiderivative.closed_form(_expr("--F", ns.F, "x"), ns.a, integrand) if ns.F else None
    try:
        return EvalRequest(integrand, (ns.a, math.inf), reg, anti)
    except (RegintError, ValueError, TypeError) as exc:
        raise UsageError(f"--a: {exc}") from None


def _cmd_eval(ns, out) -> int:
    req = _finite_request(ns) if ns.command == "eval" else _infinite_request(ns)
    res = evaluate(req, _schedule(ns))
    _emit_result(res, ns.format, out)
    return _STATUS_EXIT[res.status]


def _cmd_sweep(ns, out) -> int:
    if (ns.g is None) == (ns.f is None):
        raise UsageError("--g/--f: give exactly one integrand")
    req = _finite_request(ns) if ns.g is not None else _infinite_request(ns)
    res = evaluate(req, _schedule(ns))
    out.write(trace_to_csv(res.trace))
    return _STATUS_EXIT[res.status]


def _cmd_props(ns, out) -> int:
    from .propsuite import default_suite, run_suite, suite_to_json
    checks = default_suite()
    if ns.only:
        checks = [c for c in checks if ns.only in c.name]
    if ns.list:
        out.write("".join(c.name + "\n" for c in checks))
        return EXIT_OK
    outcomes = run_suite(checks)
    if ns.format == "json":
        out.write(suite_to_json(outcomes) + "\n")
    else:
        for o in outcomes:
            tag = "SKIP" if o.skipped else ("PASS" if o.passed else "FAIL")
            line = f"{tag} {o.name}  lhs={o.lhs!r} rhs={o.rhs!r} tol={o.tolerance!r}"
            out.write(line + (f"  ({o.reason})" if o.reason else "") + "\n")
        n_fail = sum(o.failed for o in outcomes)
        n_skip = sum(o.skipped for o in outcomes)
        out.write(f"{len(outcomes)} checks, {n_fail} failed, {n_skip} skipped\n")
    return EXIT_PROPS_FAILED if any(o.failed for o in outcomes) else EXIT_OK


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    """Run the CLI on ``argv`` and return the exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            ns = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.command in ("eval", "eval-inf"):
            return _cmd_eval(ns, out)
        if ns.command == "sweep":
            return _cmd_sweep(ns, out)
        return _cmd_props(ns, out)
    except UsageError as exc:
        err.write(f"regint {ns.command}: error: {exc}\n")
        return EXIT_USAGE
    except ExprError as exc:
        err.write(f"regint {ns.command}: error: expression evaluation failed: {exc}\n")
        return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))
