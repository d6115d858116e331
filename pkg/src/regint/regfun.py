"""Initialization and termination functions.

An initialization function ``w`` weights the shrinking window next to a
critical finite endpoint: ``w = 0`` on ``[0, epsilon]``, ``w = 1`` on
``[1, inf)`` and ``w'`` integrates to one.  A first-type termination function
``z`` plays the same role at an infinite limit: ``z = 1`` for ``x <= 0``,
``z = 0`` for ``x >= c`` and ``z'`` integrates to minus one.

Both kinds are immutable objects holding vectorised callables.  Closed-form
members come from the ``make_*`` constructors; combinations are tabulated on a
node grid with monotone (Hyman-filtered) cubic interpolation of the derivative.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import BSpline, CubicHermiteSpline, CubicSpline, PPoly

from .errors import DomainError, QuadratureError
from .quad import Integrand, integrate_proper

__all__ = [
    "InitializationFn",
    "TerminationFn",
    "ValidationReport",
    "Check",
    "make_linear_ramp",
    "make_smoothstep",
    "make_uniform_termination",
    "make_bspline_termination",
    "validate_initialization",
    "validate_termination",
    "combine_init",
    "combine_termination",
    "w_from_z",
    "z_from_w",
    "DEFAULT_NODES",
]

DEFAULT_NODES = 1025
RENORMALIZE_LIMIT = 1e-8


def _scalar_or_array(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]


@dataclass(frozen=True, eq=False)
class InitializationFn:
    """Window weight ``w(v)`` with cutoff ``epsilon`` and derivative ``w_prime``.

    ``breakpoints`` lists points inside ``(epsilon, 1)`` where ``w_prime`` is
    not smooth; quadrature over the window splits there.  ``kind`` is
    ``"closed-form"`` or ``"tabulated"``; tabulated instances also carry the
    ``nodes``/``values`` table of ``w_prime``.
    """

    epsilon: float
    w_fn: Callable = field(repr=False)
    w_prime_fn: Callable = field(repr=False)
    breakpoints: tuple = ()
    kind: str = "closed-form"
    name: str = ""
    nodes: Optional[np.ndarray] = field(default=None, repr=False)
    values: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    def w(self, v):
        arr = np.asarray(v, dtype=float)
        return _scalar_or_array(v, np.asarray(self.w_fn(arr), dtype=float) + 0.0 * arr)

    def w_prime(self, v):
        arr = np.asarray(v, dtype=float)
        return _scalar_or_array(v, np.asarray(self.w_prime_fn(arr), dtype=float) + 0.0 * arr)

    __call__ = w

    @property
    def support_breaks(self) -> tuple:
        pts = {self.epsilon, 1.0}
        pts.update(p for p in self.breakpoints if self.epsilon < p < 1.0)
        return tuple(sorted(pts))

    @classmethod
    def tabulated(cls, epsilon, nodes, values, breakpoints=(), name="tabulated"):
        """Build from derivative samples on ``[epsilon, 1]``.

        ``w_prime`` is a monotone cubic through the samples, restarted at every
        breakpoint that is also a node so kinks stay one-sided; ``w`` is its
        exact antiderivative.
        """
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise ValueError("nodes and values must be equal-length 1-D arrays")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        eps_, top = float(nodes[0]), float(nodes[-1])
        if abs(eps_ - epsilon) > 1e-14 or abs(top - 1.0) > 1e-14:
            raise ValueError("nodes must span [epsilon, 1]")
        interp = _segmented_monotone_cubic(nodes, values, breakpoints)
        anti = interp.antiderivative()

        def w_prime(v):
            inside = (v >= eps_) & (v <= top)
            return np.where(inside, interp(np.clip(v, eps_, top)), 0.0)

        def w(v):
            c = np.clip(v, eps_, top)
            return np.where(v >= top, 1.0, np.where(v <= eps_, 0.0, anti(c)))

        return cls(float(epsilon), w, w_prime, tuple(breakpoints), "tabulated", name,
                   nodes.copy(), values.copy())

    def to_json(self) -> str:
        """``{epsilon, nodes, values}`` plus the ``breakpoints`` the interpolant restarts at."""
        if self.kind != "tabulated":
            raise TypeError("only tabulated initialization functions serialise")
        return json.dumps({"epsilon": self.epsilon,
                           "nodes": self.nodes.tolist(),
                           "values": self.values.tolist(),
                           "breakpoints": list(self.breakpoints)})

    @classmethod
    def from_json(cls, text: str) -> "InitializationFn":
        obj = json.loads(text)
        return cls.tabulated(obj["epsilon"], obj["nodes"], obj["values"],
                             tuple(obj.get("breakpoints", ())), obj.get("name", "tabulated"))


def _hyman_slopes(x, y) -> np.ndarray:
    """Cubic-spline node slopes, clamped where they would break local monotonicity."""
    if x.size < 3:
        return np.full(x.size, (y[-1] - y[0]) / (x[-1] - x[0]))
    d = CubicSpline(x, y).derivative()(x)
    delta = np.diff(y) / np.diff(x)
    left = np.concatenate(([delta[0]], delta))
    right = np.concatenate((delta, [delta[-1]]))
    mono = left * right > 0
    bound = 3.0 * np.minimum(np.abs(left), np.abs(right))
    clamped = np.where(d * left > 0, np.sign(left) * np.minimum(np.abs(d), bound), 0.0)
    return np.where(mono, clamped, d)


def _segmented_monotone_cubic(nodes, values, breakpoints) -> PPoly:
    """Hyman-filtered cubic per run of nodes between breakpoints, glued into one piecewise polynomial."""
    bset = set(float(b) for b in breakpoints)
    cut_idx = [0] + [i for i in range(1, nodes.size - 1) if float(nodes[i]) in bset] + [nodes.size - 1]
    coeffs = []
    for i0, i1 in zip(cut_idx[:-1], cut_idx[1:]):
        x, y = nodes[i0:i1 + 1], values[i0:i1 + 1]
        coeffs.append(CubicHermiteSpline(x, y, _hyman_slopes(x, y)).c)
    return PPoly(np.concatenate(coeffs, axis=1), nodes, extrapolate=False)


@dataclass(frozen=True, eq=False)
class TerminationFn:
    """First-type termination function with support length ``c``."""

    c: float
    z_fn: Callable = field(repr=False)
    z_prime_fn: Callable = field(repr=False)
    breakpoints: tuple = ()
    name: str = ""

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"support length must be positive, got {self.c}")

    def z(self, x):
        arr = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.asarray(self.z_fn(arr), dtype=float) + 0.0 * arr)

    def z_prime(self, x):
        arr = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.asarray(self.z_prime_fn(arr), dtype=float) + 0.0 * arr)

    __call__ = z

    @property
    def support_breaks(self) -> tuple:
        pts = {0.0, self.c}
        pts.update(p for p in self.breakpoints if 0.0 < p < self.c)
        return tuple(sorted(pts))


# ---------------------------------------------------------------- constructors

def make_linear_ramp() -> InitializationFn:
    """``w(v) = 2v - 1`` on ``[1/2, 1]``."""
    def w(v):
        return np.clip(2.0 * v - 1.0, 0.0, 1.0)

    def w_prime(v):
        return np.where((v >= 0.5) & (v <= 1.0), 2.0, 0.0)

    return InitializationFn(0.5, w, w_prime, (), "closed-form", "ramp")


def make_smoothstep() -> InitializationFn:
    """Cubic ``3t^2 - 2t^3`` with ``t = 2v - 1`` on ``[1/2, 1]``; ``w'`` vanishes at both ends."""
    def w(v):
        t = np.clip(2.0 * v - 1.0, 0.0, 1.0)
        return t * t * (3.0 - 2.0 * t)

    def w_prime(v):
        t = 2.0 * v - 1.0
        return np.where((t >= 0.0) & (t <= 1.0), 12.0 * t * (1.0 - t), 0.0)

    return InitializationFn(0.5, w, w_prime, (), "closed-form", "smoothstep")


def make_uniform_termination(c: float) -> TerminationFn:
    """``z(x) = 1 - x/c`` on ``[0, c]``."""
    return make_bspline_termination(c, 1)


def make_bspline_termination(c: float, order: int = 1) -> TerminationFn:
    """Termination whose ``-z'`` is the cardinal B-spline of ``order`` pieces stretched to ``[0, c]``.

    ``-z'`` is the ``order``-fold convolution of boxes of width ``c/order``, so
    its Fourier transform vanishes to ``order``-th order at every nonzero
    multiple of ``2 pi order / c``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    c = float(c)
    if not c > 0:
        raise DomainError("c must be positive")
    knots = np.linspace(0.0, c, order + 1)
    basis = BSpline.basis_element(knots, extrapolate=False)
    # basis integrates to c/order; rescale to unit mass.
    scale = order / c
    anti = basis.antiderivative()

    def z_prime(x):
        inside = (x >= 0.0) & (x <= c)
        return np.where(inside, -scale * np.nan_to_num(basis(np.clip(x, 0.0, c))), 0.0)

    def z(x):
        cc = np.clip(x, 0.0, c)
        val = 1.0 - scale * np.nan_to_num(anti(cc))
        return np.where(x <= 0.0, 1.0, np.where(x >= c, 0.0, val))

    name = "uniform" if order == 1 else f"bspline{order}"
    return TerminationFn(c, z, z_prime, tuple(knots[1:-1]), name)


# ------------------------------------------------------------------ validation

def _group_sup(values) -> float:
    arr = np.abs(np.asarray(values, dtype=float))
    if arr.size == 0:
        return 0.0
    if not np.all(np.isfinite(arr)):
        return math.inf
    return float(arr.max())


def validate_initialization(w: InitializationFn, tol: float = 1e-10,
                            samples: int = 257) -> ValidationReport:
    """Check the defining properties of ``w`` numerically; failures are reported, not raised."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    eps = w.epsilon
    below = np.linspace(eps * 1e-6, eps, samples)
    above = np.linspace(1.0, 2.0, samples)
    inner = np.linspace(eps, 1.0, samples)[1:-1]
    outside_lo = below[:-1]
    outside_hi = above[1:]

    checks = []
    checks.append(Check("w_zero_below_epsilon", _group_sup(w.w(below)), tol,
                        _group_sup(w.w(below)) <= tol))
    d_one = _group_sup(w.w(above) - 1.0)
    checks.append(Check("w_one_above_1", d_one, tol, d_one <= tol))
    d_out = max(_group_sup(w.w_prime(outside_lo)), _group_sup(w.w_prime(outside_hi)))
    checks.append(Check("w_prime_support", d_out, tol, d_out <= tol))

    f = Integrand(w.w_prime, (0.0, 2.0), w.support_breaks)
    try:
        norm = integrate_proper(f, eps, 1.0, tol * 1e-2).value
    except QuadratureError:
        norm = math.nan
    d_norm = abs(norm - 1.0)
    checks.append(Check("normalization", norm, tol, d_norm <= tol))

    # w(v) = int_0^v w' on a sample of interior points, integrating piecewise.
    probe = np.linspace(eps, 1.0, 33)
    acc = 0.0
    worst = 0.0
    prev = eps
    for v in probe[1:]:
        try:
            acc += integrate_proper(f, prev, v, tol * 1e-3).value
        except QuadratureError:
            acc = math.nan
        prev = v
        worst = max(worst, abs(w.w(v) - acc)) if math.isfinite(acc) else math.inf
    checks.append(Check("w_equals_integral_of_w_prime", worst, tol, worst <= tol))

    fin = np.concatenate([w.w(inner), w.w_prime(inner)])
    ok = bool(np.all(np.isfinite(fin)))
    checks.append(Check("finite", _group_sup(fin), math.inf, ok))
    return ValidationReport(tuple(checks))


def validate_termination(z: TerminationFn, tol: float = 1e-10,
                         samples: int = 41) -> ValidationReport:
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = z.c
    checks = []
    d0 = abs(z.z(0.0) - 1.0)
    checks.append(Check("z_at_0", z.z(0.0), tol, d0 <= tol))
    dc = abs(z.z(c))
    checks.append(Check("z_at_c", z.z(c), tol, dc <= tol))
    left = np.linspace(-c, 0.0, samples)
    right = np.linspace(c, 3.0 * c, samples)
    d_sup = max(_group_sup(z.z(left) - 1.0), _group_sup(z.z(right)),
                _group_sup(z.z_prime(left[:-1])), _group_sup(z.z_prime(right[1:])))
    checks.append(Check("support", d_sup, tol, d_sup <= tol))
    f = Integrand(z.z_prime, (-math.inf, math.inf), z.support_breaks)
    try:
        norm = integrate_proper(f, 0.0, c, tol * 1e-2).value
    except QuadratureError:
        norm = math.nan
    checks.append(Check("normalization", norm, tol, abs(norm + 1.0) <= tol))
    return ValidationReport(tuple(checks))


# ---------------------------------------------------------------- combination

def _piecewise_grid(lo: float, hi: float, forced, n_nodes: int) -> np.ndarray:
    """``n_nodes`` nodes on [lo, hi], uniform between consecutive forced points."""
    pts = sorted({lo, hi, *[p for p in forced if lo < p < hi]})
    # drop near-duplicates
    clean = [pts[0]]
    for p in pts[1:]:
        if p - clean[-1] > 1e-12 * (hi - lo):
            clean.append(p)
    clean[-1] = hi
    pts = np.array(clean)
    lengths = np.diff(pts)
    n_int = n_nodes - 1
    if n_int < len(lengths):
        raise ValueError("too few nodes for the forced breakpoints")
    counts = np.maximum(1, np.round(lengths / lengths.sum() * n_int).astype(int))
    while counts.sum() != n_int:
        i = int(np.argmax(lengths / counts)) if counts.sum() < n_int else int(np.argmax(counts))
        counts[i] += 1 if counts.sum() < n_int else -1
    parts = [np.linspace(a, b, k + 1)[:-1] for a, b, k in zip(pts[:-1], pts[1:], counts)]
    return np.concatenate(parts + [np.array([hi])])


def combine_init(w1: InitializationFn, w2: InitializationFn, n_nodes: int = DEFAULT_NODES,
                 tol: float = 1e-13) -> InitializationFn:
    """Combine two initialization functions through the multiplicative convolution of their derivatives.

    ``w'(v) = int_v^1 w1'(v/s) w2'(s) / s ds``; the result has cutoff
    ``w1.epsilon * w2.epsilon`` and is tabulated on ``n_nodes`` nodes that
    include every product of the inputs' breakpoints.  The table is rescaled
    by its measured integral when the defect is below ``1e-8``.

    Raises:
        QuadratureError: an inner integral misses ``tol`` or the normalization
            defect is too large to renormalise.
    """
    e1, e2 = w1.epsilon, w2.epsilon
    eps = e1 * e2
    b1, b2 = w1.support_breaks, w2.support_breaks
    forced = {p * q for p in b1 for q in b2}
    nodes = _piecewise_grid(eps, 1.0, forced, n_nodes)
    values = np.empty_like(nodes)
    for i, v in enumerate(nodes):
        lo, hi = max(v, e2), min(1.0, v / e1)
        if hi <= lo:
            values[i] = 0.0
            continue
        bps = tuple(p for p in set(b2) | {v / p for p in b1} if lo < p < hi)
        f = Integrand(lambda s, v=v: w1.w_prime(v / s) * w2.w_prime(s) / s, (lo, hi), bps)
        try:
            values[i] = integrate_proper(f, lo, hi, tol).value
        except QuadratureError as exc:
            raise QuadratureError(f"combination inner integral failed at v={v}: {exc}") from exc
    inner_bps = tuple(float(x) for x in nodes[1:-1] if any(abs(x - p) <= 1e-12 for p in forced))
    total = float(_segmented_monotone_cubic(nodes, values, inner_bps).integrate(eps, 1.0))
    defect = abs(total - 1.0)
    if defect > RENORMALIZE_LIMIT:
        raise QuadratureError(f"combined derivative integrates to {total!r}; defect {defect:.3g} too large")
    values = values / total
    name = f"({w1.name or 'w1'}*{w2.name or 'w2'})"
    return InitializationFn.tabulated(eps, nodes, values, inner_bps, name)


def combine_termination(z1: TerminationFn, z2: TerminationFn,
                        n_nodes: int = DEFAULT_NODES, tol: float = 1e-13) -> TerminationFn:
    """``z'(x) = -int_0^x z1'(x - s) z2'(s) ds`` tabulated on ``[0, c1 + c2]``."""
    c = z1.c + z2.c
    forced = {p + q for p in z1.support_breaks for q in z2.support_breaks}
    nodes = _piecewise_grid(0.0, c, forced, n_nodes)
    values = np.empty_like(nodes)
    for i, x in enumerate(nodes):
        lo, hi = max(0.0, x - z1.c), min(x, z2.c)
        if hi <= lo:
            values[i] = 0.0
            continue
        bps = tuple(p for p in set(z2.support_breaks) | {x - p for p in z1.support_breaks}
                    if lo < p < hi)
        f = Integrand(lambda s, x=x: z1.z_prime(x - s) * z2.z_prime(s), (lo, hi), bps)
        values[i] = -integrate_proper(f, lo, hi, tol).value
    bps = tuple(float(x) for x in nodes[1:-1] if any(abs(x - p) <= 1e-12 for p in forced))
    interp = _segmented_monotone_cubic(nodes, values, bps)
    anti = interp.antiderivative()

    def z_prime(x):
        inside = (x >= 0.0) & (x <= c)
        return np.where(inside, interp(np.clip(x, 0.0, c)), 0.0)

    def z(x):
        cc = np.clip(x, 0.0, c)
        return np.where(x <= 0.0, 1.0, np.where(x >= c, 0.0, 1.0 + anti(cc)))

    return TerminationFn(c, z, z_prime, bps, f"({z1.name}*{z2.name})")


# ------------------------------------------------------------ exp-map pairing

def z_from_w(w: InitializationFn, alpha: float = 1.0) -> TerminationFn:
    """First-type termination ``z'(x) = -alpha w'(exp(-alpha x)) exp(-alpha x)``, ``c = -ln(eps)/alpha``."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    c = -math.log(w.epsilon) / alpha

    def z_prime(x):
        e = np.exp(-alpha * x)
        return np.where((x >= 0.0) & (x <= c), -alpha * w.w_prime(e) * e, 0.0)

    def z(x):
        # 1 + int_0^x z' collapses to w(exp(-alpha x)).
        return w.w(np.exp(-alpha * np.asarray(x, dtype=float)))

    bps = tuple(-math.log(p) / alpha for p in w.support_breaks if w.epsilon < p < 1.0)
    return TerminationFn(c, z, z_prime, tuple(sorted(bps)), f"z[{w.name}, {alpha:g}]")


def w_from_z(z: TerminationFn, alpha: float = 1.0) -> InitializationFn:
    """Initialization ``w'(u) = -z'(-ln(u)/alpha) / (alpha u)`` with ``epsilon = exp(-alpha c)``.

    ``w_prime`` raises :class:`DomainError` for ``u <= 0``.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    eps = math.exp(-alpha * z.c)

    def w_prime(u):
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0.0):
            raise DomainError("w' from a termination function is defined for u > 0 only")
        return -z.z_prime(-np.log(u) / alpha) / (alpha * u)

    def w(u):
        u = np.asarray(u, dtype=float)
        safe = np.where(u > eps, u, 1.0)
        return np.where(u <= eps, 0.0, z.z(-np.log(safe) / alpha))

    bps = tuple(sorted(math.exp(-alpha * p) for p in z.support_breaks if 0.0 < p < z.c))
    return InitializationFn(eps, w, w_prime, bps, "closed-form", f"w[{z.name}, {alpha:g}]")
