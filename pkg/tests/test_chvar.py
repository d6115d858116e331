import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regint.chvar import (ChangeOfVariable, combine_zeta, make_exp_map, make_map, make_power_map,
                          pullback_antiderivative, pullback_integrand, transform_antiderivative,
                          transform_integrand, validate_map, zeta_from_w)
from regint.errors import DomainError, MismatchedMapError
from regint.quad import Antiderivative, Integrand, integrate_proper
from regint.regfun import combine_init, make_linear_ramp, make_smoothstep

RAMP, SMOOTH = make_linear_ramp(), make_smoothstep()
MAPS = [make_exp_map(1.0), make_exp_map(0.5), make_power_map(1.0), make_power_map(2.0)]
IDS = ["exp1", "exp0.5", "power1", "power2"]


@pytest.mark.parametrize("cov", MAPS, ids=IDS)
def test_maps_validate(cov):
    rep = validate_map(cov)
    assert rep.passed, rep.failed


def test_make_map_parsing_and_errors():
    assert make_map("exp:2").params == (2.0,)
    assert make_map("power:3").name == "power"
    with pytest.raises(ValueError):
        make_map("log:1")
    with pytest.raises(DomainError):
        make_power_map(-1.0)
    with pytest.raises(DomainError):
        make_power_map(1.0).psi(0.0)


def test_custom_map_uses_bracketing_inverse():
    cov = ChangeOfVariable(lambda x: 1.0 / (np.asarray(x) + 1.0), lambda x: -1.0 / (np.asarray(x) + 1.0) ** 2,
                           domain_floor=-1.0)
    assert cov.psi_inverse(0.25) == pytest.approx(3.0, rel=1e-12)
    assert validate_map(cov, xs=np.linspace(0.0, 10.0, 21)).passed


@pytest.mark.parametrize("cov", MAPS, ids=IDS)
@pytest.mark.parametrize("w", [RAMP, SMOOTH], ids=["ramp", "smoothstep"])
@pytest.mark.parametrize("b", [1.0, 10.0, 100.0])
def test_zeta_normalization(cov, w, b):
    z = zeta_from_w(w, cov)
    e = z.e_of(b)
    f = Integrand(lambda x: z.zeta_prime(x, b), (0.0, e), z.breaks(b)[1:-1])
    total = sum(integrate_proper(f, lo, hi, 1e-13).value for lo, hi in zip(z.breaks(b)[:-1], z.breaks(b)[1:]))
    assert total == pytest.approx(-1.0, abs=1e-8)
    assert z.zeta(0.0, b) == pytest.approx(1.0, abs=1e-15)
    assert z.zeta(e, b) == pytest.approx(0.0, abs=1e-12)
    assert z.zeta(-1.0, b) == 1.0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_exp_zeta_independent_of_b(alpha):
    z = zeta_from_w(SMOOTH, make_exp_map(alpha))
    x = np.linspace(0.0, z.e_of(1.0), 257)
    ref = z.zeta_prime(x, 1.0)
    for b in (-3.0, 10.0, 100.0, 700.0):
        assert float(np.max(np.abs(z.zeta_prime(x, b) - ref))) < 1e-9
        assert abs(z.e_of(b) - math.log(2.0) / alpha) < 1e-12


def test_power_zeta_support_grows_with_b():
    z = zeta_from_w(RAMP, make_power_map(1.0))
    # psi(x+b)/psi(b) = 1/2 at x = b
    assert z.e_of(3.0) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        z.zeta_prime(0.5, -1.0)


def test_combine_zeta_exp_matches_combined_initialization():
    cov = make_exp_map(1.0)
    combined = combine_zeta(zeta_from_w(RAMP, cov), zeta_from_w(SMOOTH, cov), n_nodes=513)
    direct = zeta_from_w(combine_init(RAMP, SMOOTH), cov)
    for b in (1.0, 10.0):
        e = combined.e_of(b)
        assert e == pytest.approx(direct.e_of(b), abs=1e-12)
        x = np.linspace(0.0, e, 301)
        np.testing.assert_allclose(combined.zeta(x, b), direct.zeta(x, b), atol=1e-6)


def test_combine_zeta_normalised_for_power_map():
    cov = make_power_map(2.0)
    z = combine_zeta(zeta_from_w(RAMP, cov), zeta_from_w(RAMP, cov), n_nodes=513)
    for b in (1.0, 10.0):
        e = z.e_of(b)
        assert z.zeta(e, b) == pytest.approx(0.0, abs=1e-8)
        assert z.zeta(0.0, b) == 1.0


def test_combine_zeta_rejects_mismatched_maps():
    with pytest.raises(MismatchedMapError):
        combine_zeta(zeta_from_w(RAMP, make_exp_map(1.0)), zeta_from_w(RAMP, make_exp_map(2.0)))


@pytest.mark.parametrize("cov", MAPS[2:], ids=IDS[2:])
def test_pullback_then_transform_is_identity(cov):
    f = Integrand(lambda x: x * np.cos(x), (-math.inf, math.inf))
    g, beta = pullback_integrand(f, cov, 1.0)
    assert beta == pytest.approx(1.0)
    back, lower = transform_integrand(g, cov, beta)
    assert lower == pytest.approx(1.0)
    x = np.linspace(1.0, 30.0, 97)
    np.testing.assert_allclose(back(x), f(x), atol=1e-11, rtol=1e-11)


def test_pullback_of_cos_under_power1_is_cos_over_u2():
    g, _ = pullback_integrand(Integrand(np.cos), make_power_map(1.0), 1.0)
    u = np.linspace(0.01, 1.0, 50)
    np.testing.assert_allclose(g(u), np.cos(1.0 / u) / u ** 2, rtol=1e-12)


@pytest.mark.parametrize("cov", MAPS, ids=IDS)
def test_antiderivatives_follow_the_maps(cov):
    F = Antiderivative.closed_form(lambda x: x * np.sin(x) + np.cos(x), 1.0)
    f = Integrand(lambda x: x * np.cos(x))
    g, beta = pullback_integrand(f, cov, 1.0)
    G = Antiderivative.closed_form(pullback_antiderivative(F, cov), beta, g)
    u = beta * np.array([0.3, 0.6, 0.9])
    assert G.derivative_mismatch(u, h=1e-6 * beta) < 1e-6
    F_back = transform_antiderivative(G, cov)
    x = np.array([1.5, 2.0, 4.0])
    fd = (F_back(x + 1e-6) - F_back(x - 1e-6)) / 2e-6
    np.testing.assert_allclose(fd, f(x), atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["exp", "power"]), st.floats(0.2, 4.0), st.floats(0.5, 50.0), st.floats(0.0, 20.0))
def test_property_ratio_inverse(family, p, b, x):
    cov = make_exp_map(p) if family == "exp" else make_power_map(p)
    v = cov.ratio(x, b)
    assert 0.0 < v <= 1.0
    assert cov.ratio_inverse(v, b) == pytest.approx(x, abs=1e-8 * (1 + x))
    ref = cov.psi(x + b) / cov.psi(b)
    assert v == pytest.approx(ref, rel=1e-12)
