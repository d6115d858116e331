"""Named integrands with known regularized values.

Each entry carries its antiderivative (when one is known in closed form) and
an oscillation hint, so the engine can take the antiderivative route and cap
panel widths near the critical point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .quad import Antiderivative, Integrand

__all__ = ["Case", "example1", "example2", "inv_sqrt", "log_u", "inv_u", "inv_u2",
           "sin_inv_over_u", "sin_x", "cos_x", "x_cos_x", "exp_decay", "scaled"]


@dataclass(frozen=True)
class Case:
    """An integrand on ``bounds`` with optional antiderivative and reference value."""

    name: str
    integrand: Integrand
    bounds: tuple
    antiderivative: Optional[Antiderivative] = None
    value: Optional[float] = None


def _inv_sq_hint(u):
    return 1.0 / np.asarray(u, dtype=float) ** 2


def _unit_hint(x):
    return np.ones_like(np.asarray(x, dtype=float))


def example1(a: float = 1.0) -> Case:
    """``sin(1/u)/u^2`` on ``(0, 1/a]``; value ``cos(a)``."""
    beta = 1.0 / a
    g = Integrand(lambda u: np.sin(1.0 / u) / u ** 2, (0.0, beta), (), _inv_sq_hint, f"sin(1/u)/u^2|{a!r}")
    G = Antiderivative.closed_form(lambda u: np.cos(1.0 / u), beta, g)
    return Case(g.name, g, (0.0, beta), G, math.cos(a))


def example2(a: float = 1.0) -> Case:
    """``cos(1/u)/u^3`` on ``(0, 1/a]``; value ``-cos(a) - a sin(a)``."""
    beta = 1.0 / a
    g = Integrand(lambda u: np.cos(1.0 / u) / u ** 3, (0.0, beta), (), _inv_sq_hint, f"cos(1/u)/u^3|{a!r}")
    G = Antiderivative.closed_form(lambda u: -np.cos(1.0 / u) - np.sin(1.0 / u) / u, beta, g)
    return Case(g.name, g, (0.0, beta), G, -math.cos(a) - a * math.sin(a))


def inv_sqrt() -> Case:
    g = Integrand(lambda u: u ** -0.5, (0.0, 1.0), (), None, "u^-1/2")
    return Case(g.name, g, (0.0, 1.0), Antiderivative.closed_form(lambda u: 2.0 * np.sqrt(u), 1.0, g), 2.0)


def log_u() -> Case:
    g = Integrand(np.log, (0.0, 1.0), (), None, "ln(u)")
    return Case(g.name, g, (0.0, 1.0), None, -1.0)


def inv_u() -> Case:
    g = Integrand(lambda u: 1.0 / u, (0.0, 1.0), (), None, "1/u")
    return Case(g.name, g, (0.0, 1.0), None, None)


def inv_u2() -> Case:
    g = Integrand(lambda u: u ** -2.0, (0.0, 1.0), (), None, "1/u^2")
    return Case(g.name, g, (0.0, 1.0), None, None)


def sin_inv_over_u() -> Case:
    """``sin(1/u)/u`` on ``(0, 1]``: conventionally convergent, value ``pi/2 - Si(1)``."""
    g = Integrand(lambda u: np.sin(1.0 / u) / u, (0.0, 1.0), (), _inv_sq_hint, "sin(1/u)/u")
    return Case(g.name, g, (0.0, 1.0), None, 0.6247132564277136)


def sin_x(a: float = 1.0) -> Case:
    f = Integrand(np.sin, (-math.inf, math.inf), (), _unit_hint, "sin(x)")
    return Case(f.name, f, (a, math.inf), Antiderivative.closed_form(lambda x: -np.cos(x), a, f), math.cos(a))


def cos_x(a: float = 1.0) -> Case:
    f = Integrand(np.cos, (-math.inf, math.inf), (), _unit_hint, "cos(x)")
    return Case(f.name, f, (a, math.inf), Antiderivative.closed_form(np.sin, a, f), -math.sin(a))


def x_cos_x(a: float = 1.0) -> Case:
    f = Integrand(lambda x: x * np.cos(x), (-math.inf, math.inf), (), _unit_hint, "x*cos(x)")
    F = Antiderivative.closed_form(lambda x: x * np.sin(x) + np.cos(x), a, f)
    return Case(f.name, f, (a, math.inf), F, -math.cos(a) - a * math.sin(a))


def exp_decay(a: float = 0.0) -> Case:
    f = Integrand(lambda x: np.exp(-x), (-math.inf, math.inf), (), None, "exp(-x)")
    return Case(f.name, f, (a, math.inf), Antiderivative.closed_form(lambda x: -np.exp(-x), a, f), math.exp(-a))


def scaled(case: Case, c: float) -> Case:
    """``(1/c) g(u/c)`` on ``(0, c beta]``; same regularized value."""
    g = case.integrand
    lo, hi = case.bounds
    hint = None
    if g.oscillation_hint is not None:
        hint = lambda u: g.oscillation_hint(np.asarray(u, dtype=float) / c) / c
    gs = Integrand(lambda u: g.func(np.asarray(u, dtype=float) / c) / c, (c * g.domain[0], c * g.domain[1]),
                   tuple(c * p for p in g.breakpoints), hint, f"{g.name}@scale{c!r}")
    G = None
    if case.antiderivative is not None:
        G0 = case.antiderivative
        G = Antiderivative.closed_form(lambda u: G0(np.asarray(u, dtype=float) / c), c * hi, gs)
    return Case(gs.name, gs, (c * lo, c * hi), G, case.value)
