"""Expression front end.

Parses arithmetic expressions such as ``"sin(1/u)/u^2"`` into an immutable
AST that evaluates element-wise over numpy arrays.  The grammar is described
in ``docs/grammar.md``.  ``^`` is right-associative and binds tighter than
unary minus, so ``-u^2`` is ``-(u^2)``; there is no unary plus and no
implicit multiplication.

Evaluation never yields NaN or infinity: any such value raises
:class:`~regint.errors.EvaluationError` naming the operation and operand.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import FrozenSet, List, Mapping, Optional, Union

import numpy as np

from .errors import EvaluationError, ExprSyntaxError, UnboundSymbolError

__all__ = [
    "Expr", "Num", "Sym", "Const", "Neg", "BinOp", "Call",
    "parse", "eval_expr", "to_text", "free_symbols", "compile_expr",
    "FUNCTIONS", "CONSTANTS",
]

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Sym, Const, Neg, BinOp, Call]


# ---------------------------------------------------------------------- lexer

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, name, op, end
    text: str
    offset: int


def _lex(text: str) -> List[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos,
                                  ("number", "name", "operator", "'('"))
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


# --------------------------------------------------------------------- parser

_OPERAND = ("number", "name", "'('", "'-'")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message, expected):
        raise ExprSyntaxError(message, self.text, self.tok.offset, expected)

    def describe(self, tok: _Tok) -> str:
        return "end of input" if tok.kind == "end" else repr(tok.text)

    def take(self, text: str):
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.describe(self.tok)}", ("operator", "end of input"))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.take("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.take("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text in FUNCTIONS:
                if not self.take("("):
                    self.fail(f"function '{tok.text}' needs a parenthesised argument", ("'('",))
                arg = self.expr()
                if not self.take(")"):
                    self.fail(f"unexpected {self.describe(self.tok)}", ("')'", "operator"))
                return Call(tok.text, arg)
            if self.tok.kind == "op" and self.tok.text == "(":
                self.fail(f"unknown function '{tok.text}'", FUNCTIONS)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            return Sym(tok.text)
        if self.take("("):
            node = self.expr()
            if not self.take(")"):
                self.fail(f"unexpected {self.describe(self.tok)}", ("')'", "operator"))
            return node
        self.fail(f"unexpected {self.describe(tok)}", _OPERAND)


def parse(text: str) -> Expr:
    """Parse ``text`` into an AST.

    Raises:
        ExprSyntaxError: malformed input; carries the 0-based ``offset`` and
            the ``expected`` token set.
    """
    return _Parser(text).parse()


# -------------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _POW_PREC if node.op == "^" else _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def _wrap(node: Expr, min_prec: int) -> str:
    s = to_text(node)
    return f"({s})" if _prec(node) < min_prec else s


def to_text(node: Expr) -> str:
    """Canonical text with the minimum parentheses needed to reparse to the same AST."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Sym, Const)):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _NEG_PREC)
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if node.op == "^":
        return f"{_wrap(node.left, _ATOM_PREC)}^{_wrap(node.right, _NEG_PREC)}"
    p = _PREC[node.op]
    return f"{_wrap(node.left, p)} {node.op} {_wrap(node.right, p + 1)}"


def free_symbols(node: Expr) -> FrozenSet[str]:
    if isinstance(node, Sym):
        return frozenset((node.name,))
    if isinstance(node, (Num, Const)):
        return frozenset()
    if isinstance(node, Neg):
        return free_symbols(node.operand)
    if isinstance(node, Call):
        return free_symbols(node.arg)
    return free_symbols(node.left) | free_symbols(node.right)


# ------------------------------------------------------------------ evaluator

def _first_bad(operand: np.ndarray, bad: np.ndarray) -> float:
    return float(np.broadcast_to(operand, bad.shape)[bad].flat[0])


def _checked(op: str, result: np.ndarray, operand) -> np.ndarray:
    bad = ~np.isfinite(result)
    if np.any(bad):
        raise EvaluationError(op, _first_bad(np.asarray(operand, dtype=float), bad))
    return result


def _call(func: str, x: np.ndarray) -> np.ndarray:
    if func == "ln":
        bad = x <= 0
        if np.any(bad):
            raise EvaluationError("ln", _first_bad(x, bad))
        return np.log(x)
    if func == "sqrt":
        bad = x < 0
        if np.any(bad):
            raise EvaluationError("sqrt", _first_bad(x, bad))
        return np.sqrt(x)
    table = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "abs": np.abs}
    with np.errstate(all="ignore"):
        return _checked(func, table[func](x), x)


def _eval(node: Expr, env: Mapping[str, np.ndarray]) -> np.ndarray:
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Const):
        return np.float64(CONSTANTS[node.name])
    if isinstance(node, Sym):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundSymbolError(node.name) from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        return _call(node.func, np.asarray(_eval(node.arg, env), dtype=float))
    a = np.asarray(_eval(node.left, env), dtype=float)
    b = np.asarray(_eval(node.right, env), dtype=float)
    with np.errstate(all="ignore"):
        if node.op == "+":
            return _checked("+", a + b, a)
        if node.op == "-":
            return _checked("-", a - b, a)
        if node.op == "*":
            return _checked("*", a * b, a)
        if node.op == "/":
            zero = np.broadcast_to(b == 0, np.broadcast(a, b).shape)
            if np.any(zero):
                raise EvaluationError("/", 0.0)
            return _checked("/", a / b, b)
        return _checked("^", np.power(a, b), a)


def eval_expr(node: Expr, bindings: Optional[Mapping[str, object]] = None):
    """Evaluate ``node`` with symbols taken from ``bindings``.

    Values may be scalars or numpy arrays (broadcast together).  Returns a
    float when every binding is scalar.

    Raises:
        UnboundSymbolError: a free symbol has no binding.
        EvaluationError: a domain violation or non-finite intermediate.
    """
    bindings = bindings or {}
    env = {k: np.asarray(v, dtype=float) for k, v in bindings.items()}
    out = np.asarray(_eval(node, env), dtype=float)
    if out.ndim == 0:
        return float(out)
    return out


def compile_expr(node: Union[Expr, str], var: str, params: Optional[Mapping[str, float]] = None):
    """Vectorised one-variable callable ``f(var)`` with ``params`` fixed.

    Raises:
        UnboundSymbolError: the expression uses a symbol other than ``var``
            and the ``params`` keys.
    """
    if isinstance(node, str):
        node = parse(node)
    params = dict(params or {})
    extra = free_symbols(node) - {var} - set(params)
    if extra:
        raise UnboundSymbolError(sorted(extra)[0])
    fixed = {k: np.float64(v) for k, v in params.items()}

    def f(x):
        arr = np.asarray(x, dtype=float)
        env = dict(fixed)
        env[var] = arr
        out = np.asarray(_eval(node, env), dtype=float)
        if out.shape != arr.shape:
            out = np.broadcast_to(out, arr.shape).copy()
        return out

    f.expr = node
    f.__name__ = f"expr[{to_text(node)}]"
    return f
