"""Independent high-precision oracles used by the tests.

Window terms of the two worked examples reduce, after ``x = 1/(delta v)``, to
moments ``int x^-m cos x`` and ``int x^-m sin x``, which follow from Ci and Si
by the recurrences

    int x^-m cos x = -x^(1-m) cos x / (m-1) - 1/(m-1) int x^(1-m) sin x
    int x^-m sin x = -x^(1-m) sin x / (m-1) + 1/(m-1) int x^(1-m) cos x
"""

import mpmath as mp

mp.mp.dps = 40


def _moments(m, x):
    """Antiderivatives (C_m, S_m) of x^-m cos x and x^-m sin x at x."""
    x = mp.mpf(x)
    if m == 0:
        return mp.sin(x), -mp.cos(x)
    if m == 1:
        return mp.ci(x), mp.si(x)
    c1, s1 = _moments(m - 1, x)
    k = m - 1
    c = -x ** (1 - m) * mp.cos(x) / k - s1 / k
    s = -x ** (1 - m) * mp.sin(x) / k + c1 / k
    return c, s


def _moment_integral(kind, m, lo, hi):
    i = 0 if kind == "cos" else 1
    return _moments(m, hi)[i] - _moments(m, lo)[i]


def window_term(example, delta, poly, eps):
    """``int_eps^1 G(delta v) P(v) dv`` with ``P(v) = sum poly[n] v^n``.

    ``example`` 1: ``G(u) = cos(1/u)``; 2: ``G(u) = -cos(1/u) - sin(1/u)/u``.
    """
    delta = mp.mpf(delta)
    lo, hi = 1 / delta, 1 / (delta * mp.mpf(eps))
    total = mp.mpf(0)
    for n, coef in enumerate(poly):
        if coef == 0:
            continue
        # v^n dv = delta^-(n+1) x^-(n+2) dx (orientation handled by lo < hi)
        scale = mp.mpf(coef) * delta ** (-(n + 1))
        if example == 1:
            total += scale * _moment_integral("cos", n + 2, lo, hi)
        else:
            total += scale * (-_moment_integral("cos", n + 2, lo, hi) - _moment_integral("sin", n + 1, lo, hi))
    return total


RAMP_POLY = (2,)
SMOOTHSTEP_POLY = (-24, 72, -48)


def example_level(example, a, delta, poly):
    """Engine level value ``G(1/a) - window`` for the worked examples."""
    a = mp.mpf(a)
    if example == 1:
        top = mp.cos(a)
    else:
        top = -mp.cos(a) - a * mp.sin(a)
    return float(top - window_term(example, delta, poly, 0.5))


def cos_inv_integral(lo, hi):
    """``int_lo^hi cos(1/u) du`` from ``d/du [u cos(1/u) + Si(1/u)] = cos(1/u)``."""
    F = lambda u: mp.mpf(u) * mp.cos(1 / mp.mpf(u)) + mp.si(1 / mp.mpf(u))
    return float(F(hi) - F(lo))


def abel_value(f, a, s_values=(1e-2, 5e-3, 2.5e-3)):
    """Abel limit of ``int_a^inf f(x) e^(-s x) dx`` by polynomial extrapolation in ``s``."""
    vals = [mp.quadosc(lambda x: f(x) * mp.exp(-s * x), [a, mp.inf], omega=1) for s in s_values]
    return float(_poly_extrap(s_values, vals))


def _poly_extrap(xs, ys):
    xs = [mp.mpf(x) for x in xs]
    n = len(xs)
    total = mp.mpf(0)
    for i in range(n):
        term = ys[i]
        for j in range(n):
            if j != i:
                term *= -xs[j] / (xs[i] - xs[j])
        total += term
    return total
