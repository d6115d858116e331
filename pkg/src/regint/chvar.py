"""Changes of variable between finite-limit and infinite-limit integrals.

A :class:`ChangeOfVariable` ``u = psi(x)`` is positive, strictly decreasing
and tends to zero as ``x -> inf``.  Through it an initialization function
induces a second-type termination function ``zeta(x, b)``: the window next to
``u = 0`` of width ``psi(b)`` becomes the stretch ``[b, b + e(eps, b)]`` of
the ``x`` axis.

Two families are built in: ``exp(alpha)``, whose ``zeta`` is independent of
``b``, and ``power(r)``.  Any other map can be supplied as a
``(psi, psi_prime, psi_inverse)`` triple.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, MismatchedMapError
from .quad import Antiderivative, Integrand, as_integrand, integrate_proper
from .regfun import Check, InitializationFn, ValidationReport, _piecewise_grid, _segmented_monotone_cubic

__all__ = [
    "ChangeOfVariable",
    "SecondTypeTermination",
    "make_exp_map",
    "make_power_map",
    "make_map",
    "validate_map",
    "zeta_from_w",
    "combine_zeta",
    "transform_integrand",
    "pullback_integrand",
    "transform_antiderivative",
    "pullback_antiderivative",
]


@dataclass(frozen=True, eq=False)
class ChangeOfVariable:
    """``u = psi(x)`` with derivative and inverse.

    ``ratio(x, b)`` and ``ratio_inverse(v, b)`` evaluate ``psi(x+b)/psi(b)``
    and its inverse in ``x``; families override them with forms that stay
    accurate when ``psi(b)`` underflows.
    """

    psi: Callable
    psi_prime: Callable
    psi_inverse_fn: Optional[Callable] = None
    domain_floor: float = -math.inf
    name: str = "custom"
    params: tuple = ()
    ratio_fn: Optional[Callable] = field(default=None, repr=False)
    prime_ratio_fn: Optional[Callable] = field(default=None, repr=False)
    ratio_inverse_fn: Optional[Callable] = field(default=None, repr=False)

    @property
    def key(self):
        return (self.name, self.params) if self.name != "custom" else id(self)

    def psi_inverse(self, u):
        if self.psi_inverse_fn is not None:
            return self.psi_inverse_fn(u)
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.array([self._bisect_inverse(float(v)) for v in arr])
        return float(out[0]) if np.ndim(u) == 0 else out.reshape(np.shape(u))

    def _bisect_inverse(self, u: float) -> float:
        if not u > 0:
            raise DomainError("psi_inverse needs u > 0")
        lo = self.domain_floor if math.isfinite(self.domain_floor) else -1.0
        if math.isfinite(self.domain_floor):
            # approach the floor, where psi is largest, until psi(lo) >= u
            step = 1.0
            lo = self.domain_floor + step
            while float(self.psi(lo)) < u:
                step *= 0.5
                lo = self.domain_floor + step
                if lo == self.domain_floor:
                    raise DomainError("psi_inverse: value above the range of psi")
        else:
            while float(self.psi(lo)) < u:
                lo = 2.0 * lo - 1.0
        hi = max(lo + 1.0, 1.0)
        while float(self.psi(hi)) > u:
            hi = 2.0 * hi + 1.0
        return brentq(lambda x: float(self.psi(x)) - u, lo, hi, rtol=1e-13, xtol=1e-300)

    def ratio(self, x, b):
        if self.ratio_fn is not None:
            return self.ratio_fn(x, b)
        return self.psi(np.asarray(x, dtype=float) + b) / self.psi(b)

    def prime_ratio(self, x, b):
        if self.prime_ratio_fn is not None:
            return self.prime_ratio_fn(x, b)
        return self.psi_prime(np.asarray(x, dtype=float) + b) / self.psi(b)

    def ratio_inverse(self, v, b):
        if self.ratio_inverse_fn is not None:
            return self.ratio_inverse_fn(v, b)
        return self.psi_inverse(v * float(self.psi(b))) - b

    def check_point(self, b):
        if not b > self.domain_floor:
            raise DomainError(f"b={b} must exceed the domain floor {self.domain_floor} of {self.name}")


def make_exp_map(alpha: float = 1.0) -> ChangeOfVariable:
    """``psi(x) = exp(-alpha x)``, valid on the whole real line."""
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError("alpha must be positive")

    def inverse(u):
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0):
            raise DomainError("psi_inverse needs u > 0")
        out = -np.log(u) / alpha
        return float(out) if out.ndim == 0 else out

    return ChangeOfVariable(
        psi=lambda x: np.exp(-alpha * np.asarray(x, dtype=float)),
        psi_prime=lambda x: -alpha * np.exp(-alpha * np.asarray(x, dtype=float)),
        psi_inverse_fn=inverse,
        domain_floor=-math.inf,
        name="exp",
        params=(alpha,),
        ratio_fn=lambda x, b: np.exp(-alpha * np.asarray(x, dtype=float)),
        prime_ratio_fn=lambda x, b: -alpha * np.exp(-alpha * np.asarray(x, dtype=float)),
        ratio_inverse_fn=lambda v, b: -math.log(v) / alpha,
    )


def make_power_map(r: float = 1.0) -> ChangeOfVariable:
    """``psi(x) = x**(-r)`` for ``x > 0``."""
    r = float(r)
    if not r > 0:
        raise DomainError("r must be positive")

    def psi(x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError("power map needs x > 0")
        out = x ** (-r)
        return float(out) if out.ndim == 0 else out

    def psi_prime(x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError("power map needs x > 0")
        out = -r * x ** (-r - 1.0)
        return float(out) if out.ndim == 0 else out

    def inverse(u):
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0):
            raise DomainError("psi_inverse needs u > 0")
        out = u ** (-1.0 / r)
        return float(out) if out.ndim == 0 else out

    return ChangeOfVariable(
        psi=psi, psi_prime=psi_prime, psi_inverse_fn=inverse, domain_floor=0.0,
        name="power", params=(r,),
        ratio_fn=lambda x, b: (b / (np.asarray(x, dtype=float) + b)) ** r,
        prime_ratio_fn=lambda x, b: -r / b * (b / (np.asarray(x, dtype=float) + b)) ** (r + 1.0),
        ratio_inverse_fn=lambda v, b: b * (v ** (-1.0 / r) - 1.0),
    )


def make_map(spec: str) -> ChangeOfVariable:
    """Parse ``"exp:<alpha>"`` or ``"power:<r>"``."""
    name, _, arg = spec.partition(":")
    value = float(arg) if arg else 1.0
    if name == "exp":
        return make_exp_map(value)
    if name == "power":
        return make_power_map(value)
    raise ValueError(f"unknown map family '{name}' (expected exp:<alpha> or power:<r>)")


def validate_map(cov: ChangeOfVariable, xs=None, tol: float = 1e-12,
                 far: float = 1e8) -> ValidationReport:
    """Numerically check positivity, strict decrease, inverse consistency and decay."""
    if xs is None:
        lo = cov.domain_floor if math.isfinite(cov.domain_floor) else -5.0
        xs = np.linspace(lo, lo + 20.0, 201)[1:]
    xs = np.asarray(xs, dtype=float)
    psi = np.asarray(cov.psi(xs), dtype=float)
    dpsi = np.asarray(cov.psi_prime(xs), dtype=float)
    checks = [
        Check("psi_prime_negative", float(dpsi.max()), 0.0, bool(np.all(dpsi < 0))),
        Check("psi_positive", float(psi.min()), 0.0, bool(np.all(psi > 0))),
    ]
    back = np.asarray(cov.psi(np.asarray(cov.psi_inverse(psi))), dtype=float)
    rel = float(np.max(np.abs(back - psi) / psi))
    checks.append(Check("inverse_consistency", rel, tol, rel <= tol))
    tail = float(cov.psi(far))
    checks.append(Check("decays_to_zero", tail, 1e-6, tail < 1e-6))
    return ValidationReport(tuple(checks))


# ------------------------------------------------------- second-type functions

@dataclass(frozen=True, eq=False)
class SecondTypeTermination:
    """``zeta(x, b)`` with derivative ``zeta_prime(x, b)`` supported on ``[0, e_of(b)]``."""

    zeta_prime_fn: Callable = field(repr=False)
    zeta_fn: Callable = field(repr=False)
    e_fn: Callable = field(repr=False)
    cov: ChangeOfVariable
    w: Optional[InitializationFn] = None
    breaks_fn: Optional[Callable] = field(default=None, repr=False)
    name: str = ""

    def zeta_prime(self, x, b):
        self.cov.check_point(b)
        arr = np.asarray(x, dtype=float)
        out = np.asarray(self.zeta_prime_fn(arr, b), dtype=float) + 0.0 * arr
        return float(out) if np.ndim(x) == 0 else out

    def zeta(self, x, b):
        self.cov.check_point(b)
        arr = np.asarray(x, dtype=float)
        out = np.asarray(self.zeta_fn(arr, b), dtype=float) + 0.0 * arr
        return float(out) if np.ndim(x) == 0 else out

    def e_of(self, b) -> float:
        self.cov.check_point(b)
        return float(self.e_fn(b))

    def breaks(self, b) -> tuple:
        e = self.e_of(b)
        pts = {0.0, e}
        if self.breaks_fn is not None:
            pts.update(p for p in self.breaks_fn(b) if 0.0 < p < e)
        return tuple(sorted(pts))

    @property
    def source(self):
        return (self.w, self.cov)


def zeta_from_w(w: InitializationFn, cov: ChangeOfVariable) -> SecondTypeTermination:
    """``zeta'(x, b) = w'(psi(x+b)/psi(b)) psi'(x+b)/psi(b)`` for ``x >= 0``."""

    def zeta_prime(x, b):
        xs = np.maximum(x, 0.0)
        val = w.w_prime(cov.ratio(xs, b)) * cov.prime_ratio(xs, b)
        return np.where(x >= 0.0, val, 0.0)

    def zeta(x, b):
        # 1 + int_0^x zeta' = w(psi(x+b)/psi(b)).
        xs = np.maximum(x, 0.0)
        return np.where(x >= 0.0, w.w(cov.ratio(xs, b)), 1.0)

    def e_fn(b):
        return cov.ratio_inverse(w.epsilon, b)

    def breaks_fn(b):
        return [cov.ratio_inverse(p, b) for p in w.support_breaks if w.epsilon < p < 1.0]

    return SecondTypeTermination(zeta_prime, zeta, e_fn, cov, w, breaks_fn,
                                 f"zeta[{w.name}, {cov.name}{cov.params}]")


class _SliceCache:
    """Per-``b`` tabulated slices of a combined second-type function."""

    def __init__(self, z1: SecondTypeTermination, z2: SecondTypeTermination, n_nodes: int, tol: float):
        self.z1, self.z2 = z1, z2
        self.n_nodes, self.tol = n_nodes, tol
        self._slices = {}
        self._lock = threading.Lock()

    def get(self, b: float):
        b = float(b)
        hit = self._slices.get(b)
        if hit is not None:
            return hit
        z1, z2 = self.z1, self.z2
        e1, e2 = z1.e_of(b), z2.e_of(b)
        e = e1 + e2
        b1, b2 = z1.breaks(b), z2.breaks(b)
        forced = {p + q for p in b1 for q in b2}
        nodes = _piecewise_grid(0.0, e, forced, self.n_nodes)
        values = np.empty_like(nodes)
        for i, x in enumerate(nodes):
            lo, hi = max(0.0, x - e1), min(x, e2)
            if hi <= lo:
                values[i] = 0.0
                continue
            bps = tuple(p for p in set(b2) | {x - p for p in b1} if lo < p < hi)
            f = Integrand(lambda s, x=x: z1.zeta_prime(x - s, b) * z2.zeta_prime(s, b), (lo, hi), bps)
            values[i] = -integrate_proper(f, lo, hi, self.tol).value
        seg_bps = tuple(float(x) for x in nodes[1:-1] if any(abs(x - p) <= 1e-12 * e for p in forced))
        interp = _segmented_monotone_cubic(nodes, values, seg_bps)
        entry = (e, interp, interp.antiderivative(), seg_bps)
        with self._lock:
            self._slices.setdefault(b, entry)
        return self._slices[b]


def combine_zeta(z1: SecondTypeTermination, z2: SecondTypeTermination,
                 n_nodes: int = 1025, tol: float = 1e-13) -> SecondTypeTermination:
    """``zeta'(x, b) = -int_0^x z1'(x - s, b) z2'(s, b) ds``, tabulated per ``b`` on demand.

    Raises:
        MismatchedMapError: the inputs were built over different maps.
    """
    if z1.cov.key != z2.cov.key:
        raise MismatchedMapError("second-type termination functions use different changes of variable")
    cache = _SliceCache(z1, z2, n_nodes, tol)

    def zeta_prime(x, b):
        e, interp, _, _ = cache.get(b)
        inside = (x >= 0.0) & (x <= e)
        return np.where(inside, interp(np.clip(x, 0.0, e)), 0.0)

    def zeta(x, b):
        e, _, anti, _ = cache.get(b)
        return np.where(x <= 0.0, 1.0, np.where(x >= e, 0.0, 1.0 + anti(np.clip(x, 0.0, e))))

    return SecondTypeTermination(zeta_prime, zeta, lambda b: cache.get(b)[0], z1.cov, None,
                                 lambda b: cache.get(b)[3], f"({z1.name}*{z2.name})")


# ----------------------------------------------------------- integrand transforms

def transform_integrand(g, cov: ChangeOfVariable, beta: Optional[float] = None):
    """Finite-side integrand ``g(u)`` to infinite-side ``f(t) = -g(psi(t)) psi'(t)``.

    Returns ``(f, lower)`` where ``lower = psi_inverse(beta)`` (``None`` if
    ``beta`` is not given).
    """
    g = as_integrand(g)
    lower = None if beta is None else float(cov.psi_inverse(beta))
    floor = cov.domain_floor if lower is None else lower

    def f(t):
        t = np.asarray(t, dtype=float)
        return -g.func(cov.psi(t)) * cov.psi_prime(t)

    hint = None
    if g.oscillation_hint is not None:
        def hint(t):
            t = np.asarray(t, dtype=float)
            return np.abs(g.oscillation_hint(cov.psi(t))) * np.abs(cov.psi_prime(t))

    bps = tuple(float(cov.psi_inverse(p)) for p in g.breakpoints if p > 0)
    return Integrand(f, (floor, math.inf), bps, hint, f"T[{g.name}]"), lower


def pullback_integrand(f, cov: ChangeOfVariable, a: float):
    """Infinite-side ``f`` on ``[a, inf)`` to finite-side ``g`` on ``(0, psi(a)]``.

    ``g(u) = -f(psi_inverse(u)) / psi'(psi_inverse(u))``; returns ``(g, beta)``.
    """
    f = as_integrand(f)
    cov.check_point(a) if math.isfinite(cov.domain_floor) else None
    beta = float(cov.psi(a))

    def g(u):
        x = cov.psi_inverse(np.asarray(u, dtype=float))
        return -f.func(x) / cov.psi_prime(x)

    hint = None
    if f.oscillation_hint is not None:
        def hint(u):
            x = cov.psi_inverse(np.asarray(u, dtype=float))
            return np.abs(f.oscillation_hint(x)) / np.abs(cov.psi_prime(x))

    bps = tuple(float(cov.psi(p)) for p in f.breakpoints if p > a)
    return Integrand(g, (0.0, beta), bps, hint, f"P[{f.name}]"), beta


def transform_antiderivative(G: Antiderivative, cov: ChangeOfVariable) -> Antiderivative:
    """``F(x) = -G(psi(x))``."""
    return Antiderivative(math.nan, lambda x: -G(cov.psi(np.asarray(x, dtype=float))), G.source)


def pullback_antiderivative(F: Antiderivative, cov: ChangeOfVariable) -> Antiderivative:
    """``G(u) = -F(psi_inverse(u))``."""
    return Antiderivative(math.nan, lambda u: -F(cov.psi_inverse(np.asarray(u, dtype=float))), F.source)
