"""Regularized-integral engine.

Each definition is a limit: ``delta -> 0+`` for a finite critical endpoint,
``b -> inf`` for an infinite limit.  The engine walks a geometric schedule of
the limit variable, evaluates the bracketed expression at every level with
proper quadrature, extrapolates the sequence and decides whether it has
converged, diverged or neither.

Finite limits use the window form with ``v = u/delta`` so the window integral
always runs over ``[eps, 1]``::

    Z = G(B) - int_eps^1 G(delta v) w'(v) dv                 (antiderivative given)
    Z = delta int_eps^1 g(delta v) w(v) dv + int_delta^B g   (integrand only)

Infinite limits use::

    Z  = -F(a) - int_0^c F(x+b) z'(x) dx
    Xi = -F(a) - int_0^e(b) F(x+b) zeta'(x, b) dx

or the matching two-integral forms when no antiderivative is supplied.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .chvar import ChangeOfVariable, SecondTypeTermination, zeta_from_w
from .errors import BudgetExceeded, DomainError, QuadratureError
from .quad import Antiderivative, Integrand, as_integrand, integrate_proper
from .regfun import InitializationFn, TerminationFn

__all__ = [
    "LimitSchedule",
    "EvalRequest",
    "TraceRow",
    "ZResult",
    "z_integral_finite",
    "z_integral_infinite",
    "xi_integral_infinite",
    "evaluate",
    "extrapolate",
    "richardson_order",
    "classify",
    "trace_to_csv",
    "CSV_HEADER",
]

CONVERGED = "converged"
DIVERGED = "diverged"
INCONCLUSIVE = "inconclusive"
CSV_HEADER = ("level", "param", "raw_estimate", "extrapolated", "abs_diff")

DEFAULT_MAX_EVALS = 300_000_000
_CERT_WINDOW = 3
_GROWTH_LEVELS = 5
_FIT_LEVELS = 8
_STALL_AFTER = 16
_STALL_WINDOW = 6


@dataclass(frozen=True)
class LimitSchedule:
    """Geometric schedule of the limit variable.

    Attributes:
        start: first ``delta`` (finite) or ``b`` (infinite); ``None`` picks
            ``B/2`` or ``2|a| + 1``.
        ratio: factor between levels, in ``(0, 1)`` for ``delta`` and ``> 1``
            for ``b``; ``None`` picks ``1/2`` or ``2``.
        max_levels: number of levels before giving up.
        tol: convergence tolerance on the extrapolated sequence.
        extrapolation: ``"none"``, ``"richardson"`` or ``"epsilon-algorithm"``.
        inner_tol: absolute tolerance of each proper quadrature
            (default ``tol / 100``).
        max_evals: integrand evaluations allowed across the whole run.
    """

    start: Optional[float] = None
    ratio: Optional[float] = None
    max_levels: int = 40
    tol: float = 1e-8
    extrapolation: str = "richardson"
    inner_tol: Optional[float] = None
    max_evals: int = DEFAULT_MAX_EVALS

    def __post_init__(self):
        if self.max_levels < 3:
            raise ValueError("max_levels must be at least 3")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.extrapolation not in ("none", "richardson", "epsilon-algorithm"):
            raise ValueError(f"unknown extrapolation '{self.extrapolation}'")
        if self.start is not None and not self.start > 0:
            raise ValueError("start must be positive")

    @property
    def quad_tol(self) -> float:
        return self.inner_tol if self.inner_tol is not None else self.tol * 1e-2

    def with_(self, **kw) -> "LimitSchedule":
        return replace(self, **kw)


Regularizer = Union[InitializationFn, TerminationFn, SecondTypeTermination,
                    Tuple[InitializationFn, ChangeOfVariable]]


@dataclass(frozen=True)
class EvalRequest:
    """Everything the engine needs for one regularized integral.

    ``bounds`` is ``(alpha, beta)`` for a finite critical endpoint or
    ``(a, inf)`` for an infinite upper limit.  ``critical_side`` selects
    which finite endpoint is critical.
    """

    integrand: Integrand
    bounds: Tuple[float, float]
    regularizer: Regularizer
    antiderivative: Optional[Antiderivative] = None
    critical_side: str = "lower"

    def __post_init__(self):
        object.__setattr__(self, "integrand", as_integrand(self.integrand))
        lo, hi = (float(v) for v in self.bounds)
        object.__setattr__(self, "bounds", (lo, hi))
        if self.critical_side not in ("lower", "upper"):
            raise ValueError("critical_side must be 'lower' or 'upper'")
        if math.isinf(lo):
            raise DomainError("infinite lower limits are not supported; reflect the integrand")
        reg = self.regularizer
        if self.is_finite:
            if not hi > lo:
                raise DomainError("finite bounds need alpha < beta")
            if not isinstance(reg, InitializationFn):
                raise TypeError("finite bounds need an InitializationFn regularizer")
        else:
            if hi != math.inf:
                raise DomainError("upper bound must be finite or +inf")
            pair = isinstance(reg, tuple) and len(reg) == 2 and isinstance(reg[0], InitializationFn) \
                and isinstance(reg[1], ChangeOfVariable)
            if not (isinstance(reg, (TerminationFn, SecondTypeTermination)) or pair):
                raise TypeError("infinite bounds need a TerminationFn or an (InitializationFn, ChangeOfVariable) pair")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.bounds[1])


@dataclass(frozen=True)
class TraceRow:
    level: int
    param: float
    raw: float
    extrapolated: float
    abs_diff: float


@dataclass(frozen=True)
class ZResult:
    """Outcome of a schedule run.

    ``value`` is NaN unless ``status == "converged"``; ``estimate`` always
    holds the last extrapolated value.
    """

    value: float
    status: str
    trace: Tuple[TraceRow, ...]
    error_estimate: float
    evaluations: int = 0
    reason: str = ""
    order: Optional[float] = None

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def estimate(self) -> float:
        return self.trace[-1].extrapolated if self.trace else math.nan

    def to_dict(self) -> dict:
        return {
            "value": _json_float(self.value),
            "status": self.status,
            "error_estimate": _json_float(self.error_estimate),
            "estimate": _json_float(self.estimate),
            "evaluations": self.evaluations,
            "reason": self.reason,
            "observed_order": _json_float(self.order) if self.order is not None else None,
            "trace": [
                {"level": r.level, "param": _json_float(r.param), "raw_estimate": _json_float(r.raw),
                 "extrapolated": _json_float(r.extrapolated), "abs_diff": _json_float(r.abs_diff)}
                for r in self.trace
            ],
        }


def _json_float(x):
    return float(x) if x is not None and math.isfinite(x) else None


def trace_to_csv(trace: Sequence[TraceRow]) -> str:
    """CSV text with header ``level,param,raw_estimate,extrapolated,abs_diff``.

    Floats use Python's shortest round-trip ``repr``.
    """
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(CSV_HEADER)
    for r in trace:
        out.writerow([r.level, repr(r.param), repr(r.raw), repr(r.extrapolated), repr(r.abs_diff)])
    return buf.getvalue()


# ------------------------------------------------------------------ extrapolation

def _aitken_q(y: np.ndarray, i: int):
    d1, d2 = y[i - 1] - y[i - 2], y[i] - y[i - 1]
    if d1 == 0.0:
        return None
    return d2 / d1


def richardson_order(trace) -> Optional[float]:
    """Observed order ``p`` from the last three ``(param, estimate)`` pairs, or ``None``."""
    pts = [(float(h), float(v)) for h, v in trace]
    if len(pts) < 3:
        return None
    (_, a0), (h1, a1), (h2, a2) = pts[-3:]
    q = _aitken_q(np.array([a0, a1, a2]), 2)
    rho = h2 / h1 if h1 else math.nan
    if q is None or not q > 0 or not math.isfinite(rho) or rho <= 0 or rho == 1.0:
        return None
    return math.log(q) / math.log(rho)


def _richardson(y: np.ndarray) -> Tuple[float, float]:
    n = y.size
    last_diff = abs(y[-1] - y[-2])
    scale = max(abs(y[-1]), abs(y[-2]), 1e-300)
    if last_diff <= 8 * np.finfo(float).eps * scale:
        return float(y[-1]), float(last_diff)
    q = _aitken_q(y, n - 1)
    if q is None or not (0.0 < q <= 0.9):
        return float(y[-1]), float(last_diff)
    if n >= 4:
        q_prev = _aitken_q(y, n - 2)
        if q_prev is None or not q_prev > 0 or abs(math.log(q) - math.log(q_prev)) >= 0.5:
            return float(y[-1]), float(last_diff)
    corr = (y[-1] - y[-2]) * q / (1.0 - q)
    return float(y[-1] + corr), float(abs(corr))


def _wynn(y: np.ndarray) -> Tuple[float, float]:
    # Standard epsilon table; keep the even columns (Shanks transforms).
    n = y.size
    prev = np.zeros(n + 1)
    cur = y.astype(float).copy()
    evens = [cur[-1]]
    col = 0
    while cur.size > 1:
        diff = np.diff(cur)
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = prev[1:cur.size] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0:
            evens.append(cur[-1])
    if len(evens) == 1:
        return float(y[-1]), float(abs(y[-1] - y[-2]))
    return float(evens[-1]), float(abs(evens[-1] - evens[-2]))


def extrapolate(trace, method: str = "richardson") -> Tuple[float, float]:
    """Limit estimate and error estimate from a ``(param, estimate)`` sequence.

    ``richardson`` fits ``A_k = v + C h_k^p`` to the last three points with
    ``p`` taken from the ratio of successive differences, and falls back to
    the last estimate when the fitted ratio is not a clean geometric decay.
    ``epsilon-algorithm`` runs Wynn's recursion over the whole sequence.
    ``none`` returns the last estimate.

    Raises:
        ValueError: fewer than three estimates or an unknown method.
    """
    y = np.array([float(v) for _, v in trace])
    if y.size < 3:
        raise ValueError("extrapolation needs at least three estimates")
    if method == "none":
        return float(y[-1]), float(abs(y[-1] - y[-2]))
    if method == "richardson":
        return _richardson(y)
    if method == "epsilon-algorithm":
        return _wynn(y[-12:])
    raise ValueError(f"unknown extrapolation method '{method}'")


# ----------------------------------------------------------------- classification

def _growth_fit(h: np.ndarray, y: np.ndarray) -> Optional[str]:
    span = float(y.max() - y.min())
    if not span > 0:
        return None
    lnh = np.log(h)
    # c0 + c1 ln h
    A = np.column_stack([np.ones_like(lnh), lnh])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    if np.max(np.abs(A @ coef - y)) < 0.1 * span:
        return "log"
    # c0 + c1 h^-q, q from the increments
    d = np.abs(np.diff(y))
    if np.all(d > 0):
        B = np.column_stack([np.ones(d.size), lnh[1:]])
        (_, slope), *_ = np.linalg.lstsq(B, np.log(d), rcond=None)
        q = -slope
        if q > 0:
            P = np.column_stack([np.ones_like(lnh), h ** (-q)])
            coef, *_ = np.linalg.lstsq(P, y, rcond=None)
            if np.max(np.abs(P @ coef - y)) < 0.1 * span:
                return "power"
    return None


def _is_diverging(trace: Sequence[TraceRow], infinite: bool) -> Optional[str]:
    if len(trace) < _GROWTH_LEVELS:
        return None
    raw = np.array([r.raw for r in trace])
    mag = np.abs(raw[-_GROWTH_LEVELS:])
    if not np.all(np.diff(mag) > 0):
        return None
    inc = np.abs(np.diff(raw[-_GROWTH_LEVELS:]))
    # increments of a divergent sequence do not shrink
    if np.any(inc[1:] < 0.9 * inc[:-1]):
        return None
    m = min(_FIT_LEVELS, len(trace))
    params = np.array([r.param for r in trace[-m:]])
    h = 1.0 / params if infinite else params
    return _growth_fit(h, raw[-m:])


def _certified(trace: Sequence[TraceRow], tol: float) -> Optional[float]:
    if len(trace) < _CERT_WINDOW:
        return None
    ext = np.array([r.extrapolated for r in trace[-_CERT_WINDOW:]])
    spread = float(ext.max() - ext.min())
    return spread if spread <= tol else None


def _stalled(trace: Sequence[TraceRow]) -> bool:
    if len(trace) < _STALL_AFTER:
        return False
    d = np.array([r.abs_diff for r in trace[-2 * _STALL_WINDOW:]])
    # a transient jump when extrapolation engages is not a stall if the
    # latest differences are shrinking geometrically
    if d[-1] <= 0.7 * d[-2] and d[-2] <= 0.7 * d[-3]:
        return False
    return bool(np.max(d[_STALL_WINDOW:]) >= 0.7 * np.max(d[:_STALL_WINDOW]))


def classify(trace: Sequence[TraceRow], sched: LimitSchedule, infinite: bool = False) -> str:
    """``converged`` if the last three extrapolated values agree within ``sched.tol``;
    ``diverged`` if the raw magnitudes grew over the last five levels with
    non-shrinking increments and a ``ln h`` or ``h^-q`` model fits the last
    ``min(8, n)`` raw values to 10% of their range; otherwise ``inconclusive``.
    """
    if not trace:
        return INCONCLUSIVE
    if _certified(trace, sched.tol) is not None:
        return CONVERGED
    if _is_diverging(trace, infinite):
        return DIVERGED
    return INCONCLUSIVE


# ---------------------------------------------------------------- schedule driver

class _Budget:
    def __init__(self, total: int):
        self.total = int(total)
        self.used = 0

    def left(self) -> int:
        return max(self.total - self.used, 0)

    def quad(self, f, a, b, tol):
        if self.left() <= 0:
            raise BudgetExceeded("evaluation budget exhausted", evaluations=self.used)
        try:
            res = integrate_proper(f, a, b, tol, max_evals=self.left())
        except QuadratureError as exc:
            self.used += exc.evaluations
            raise
        self.used += res.evaluations
        return res.value


def _drive(level_fn: Callable[[int, float], float], params: Callable[[int], float],
           sched: LimitSchedule, budget: _Budget, infinite: bool) -> ZResult:
    trace: List[TraceRow] = []
    raws: List[Tuple[float, float]] = []
    reason = ""
    status = None
    for k in range(sched.max_levels):
        p = params(k)
        try:
            raw = float(level_fn(k, p))
        except BudgetExceeded:
            reason = f"evaluation budget exhausted at level {k}"
            break
        except QuadratureError as exc:
            reason = f"quadrature failed at level {k}: {exc}"
            break
        if not math.isfinite(raw):
            reason = f"non-finite estimate at level {k}"
            break
        h = 1.0 / p if infinite else p
        raws.append((h, raw))
        ext = extrapolate(raws, sched.extrapolation)[0] if len(raws) >= 3 else raw
        diff = abs(ext - trace[-1].extrapolated) if trace else math.nan
        trace.append(TraceRow(k, p, raw, ext, diff))
        if _certified(trace, sched.tol) is not None:
            status = CONVERGED
            break
        if _is_diverging(trace, infinite):
            status = DIVERGED
            reason = f"growth model '{_is_diverging(trace, infinite)}' fits the raw estimates"
            break
        if _stalled(trace):
            status = INCONCLUSIVE
            reason = "differences stopped shrinking"
            break
    else:
        reason = "max_levels reached"
    if status is None:
        status = classify(trace, sched, infinite)
    if status == CONVERGED:
        spread = _certified(trace, sched.tol)
        err_ext = extrapolate(raws, sched.extrapolation)[1] if len(raws) >= 3 else math.inf
        err = max(spread, min(err_ext, sched.tol))
        value = trace[-1].extrapolated
        reason = reason or "extrapolated estimates agree within tol"
    else:
        value = math.nan
        err = trace[-1].abs_diff if len(trace) > 1 else math.inf
    order = richardson_order(raws) if len(raws) >= 3 else None
    return ZResult(value, status, tuple(trace), float(err), budget.used, reason, order)


# -------------------------------------------------------------------- definitions

def _shifted_integrand(req: EvalRequest):
    """``g~(s)`` with the critical point at ``s = 0`` plus its antiderivative."""
    alpha, beta = req.bounds
    g = req.integrand
    upper = req.critical_side == "upper"
    sign = -1.0 if upper else 1.0
    origin = beta if upper else alpha

    def gt(s):
        return g.func(origin + sign * np.asarray(s, dtype=float))

    hint = None
    if g.oscillation_hint is not None:
        def hint(s):
            return np.abs(g.oscillation_hint(origin + sign * np.asarray(s, dtype=float)))

    span = beta - alpha
    bps = tuple(sorted(sign * (p - origin) for p in g.breakpoints if alpha < p < beta))
    gt_int = Integrand(gt, (0.0, span), bps, hint, g.name)
    Gt = None
    if req.antiderivative is not None:
        G = req.antiderivative
        Gt = (lambda s: -np.asarray(G(beta - np.asarray(s, dtype=float)), dtype=float)) if upper \
            else (lambda s: np.asarray(G(alpha + np.asarray(s, dtype=float)), dtype=float))
    return gt_int, Gt, span


def z_integral_finite(req: EvalRequest, sched: Optional[LimitSchedule] = None) -> ZResult:
    """Regularized integral with a finite critical endpoint.

    Args:
        req: finite ``bounds`` and an :class:`InitializationFn` regularizer.
        sched: limit schedule; defaults start at half the interval and halve.

    Returns:
        ZResult with value, status and per-level trace.
    """
    sched = sched or LimitSchedule()
    if not req.is_finite:
        raise DomainError("z_integral_finite needs finite bounds")
    w: InitializationFn = req.regularizer
    gt, Gt, span = _shifted_integrand(req)
    start = sched.start if sched.start is not None else 0.5 * span
    ratio = sched.ratio if sched.ratio is not None else 0.5
    if not 0.0 < ratio < 1.0:
        raise ValueError("finite schedules need ratio in (0, 1)")
    if not start <= span:
        raise ValueError("schedule start exceeds the integration interval")
    budget = _Budget(sched.max_evals)
    tol = sched.quad_tol
    wbps = w.support_breaks
    eps = w.epsilon

    def window_hint(delta):
        if gt.oscillation_hint is None:
            return None
        return lambda v: delta * gt.oscillation_hint(delta * np.asarray(v, dtype=float))

    def params(k):
        return start * ratio ** k

    if Gt is not None:
        G_top = float(Gt(span))

        def level(k, delta):
            f = Integrand(lambda v: Gt(delta * v) * w.w_prime(v), (eps, 1.0), wbps, window_hint(delta))
            return G_top - budget.quad(f, eps, 1.0, tol)
    else:
        tail = {}

        def level(k, delta):
            if k == 0:
                tail[0] = budget.quad(gt, start, span, tol) if start < span else 0.0
            else:
                tail[k] = tail[k - 1] + budget.quad(gt, delta, params(k - 1), tol)
            f = Integrand(lambda v: delta * gt.func(delta * v) * w.w(v), (eps, 1.0), wbps, window_hint(delta))
            return budget.quad(f, eps, 1.0, tol) + tail[k]

    return _drive(level, params, sched, budget, infinite=False)


def _infinite_start(a: float, sched: LimitSchedule, floor: float = -math.inf) -> Tuple[float, float]:
    start = sched.start if sched.start is not None else max(2.0 * abs(a) + 1.0, a + 1.0)
    ratio = sched.ratio if sched.ratio is not None else 2.0
    if not ratio > 1.0:
        raise ValueError("infinite schedules need ratio > 1")
    if not start > a:
        raise ValueError("schedule start must exceed the lower limit")
    if not start > floor:
        raise DomainError("schedule start must exceed the map's domain floor")
    return start, ratio


def _run_infinite(req: EvalRequest, sched: LimitSchedule, weight, weight_prime, breaks, support,
                  floor: float = -math.inf) -> ZResult:
    f = req.integrand
    a = req.bounds[0]
    start, ratio = _infinite_start(a, sched, floor)
    budget = _Budget(sched.max_evals)
    tol = sched.quad_tol
    F = req.antiderivative

    def shifted_hint(b):
        if f.oscillation_hint is None:
            return None
        return lambda x: f.oscillation_hint(np.asarray(x, dtype=float) + b)

    def params(k):
        return start * ratio ** k

    if F is not None:
        F_a = float(F(a))

        def level(k, b):
            e = support(b)
            h = Integrand(lambda x: np.asarray(F(x + b), dtype=float) * weight_prime(x, b),
                          (0.0, e), breaks(b), shifted_hint(b))
            return -F_a - budget.quad(h, 0.0, e, tol)
    else:
        tail = {}

        def level(k, b):
            if k == 0:
                tail[0] = budget.quad(f, a, b, tol)
            else:
                tail[k] = tail[k - 1] + budget.quad(f, params(k - 1), b, tol)
            e = support(b)
            h = Integrand(lambda x: f.func(x + b) * weight(x, b), (0.0, e), breaks(b), shifted_hint(b))
            return budget.quad(h, 0.0, e, tol) + tail[k]

    return _drive(level, params, sched, budget, infinite=True)


def z_integral_infinite(req: EvalRequest, sched: Optional[LimitSchedule] = None) -> ZResult:
    """Regularized integral over ``[a, inf)`` with a first-type termination function."""
    sched = sched or LimitSchedule()
    z = req.regularizer
    if req.is_finite or not isinstance(z, TerminationFn):
        raise TypeError("z_integral_infinite needs (a, inf) bounds and a TerminationFn")
    breaks = z.support_breaks
    return _run_infinite(req, sched, lambda x, b: z.z(x), lambda x, b: z.z_prime(x),
                         lambda b: breaks, lambda b: z.c)


def xi_integral_infinite(req: EvalRequest, sched: Optional[LimitSchedule] = None) -> ZResult:
    """Regularized integral over ``[a, inf)`` with a second-type termination function.

    The regularizer is an ``(InitializationFn, ChangeOfVariable)`` pair or a
    ready-made :class:`SecondTypeTermination`.
    """
    sched = sched or LimitSchedule()
    reg = req.regularizer
    if req.is_finite:
        raise TypeError("xi_integral_infinite needs (a, inf) bounds")
    zeta = reg if isinstance(reg, SecondTypeTermination) else zeta_from_w(*reg)
    return _run_infinite(req, sched, zeta.zeta, zeta.zeta_prime, zeta.breaks, zeta.e_of,
                         zeta.cov.domain_floor)


def evaluate(req: EvalRequest, sched: Optional[LimitSchedule] = None) -> ZResult:
    """Dispatch on the regularizer kind."""
    if req.is_finite:
        return z_integral_finite(req, sched)
    if isinstance(req.regularizer, TerminationFn):
        return z_integral_infinite(req, sched)
    return xi_integral_infinite(req, sched)
