import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from lifi_feedback.errors import ConfigError, IntervalError, NoRootError
from lifi_feedback.update_interval import (UpdateIntervalParams, avg_downlink_rate,
                                           avg_uplink_rate, downlink_subcarriers, expect,
                                           expectation_constants, expected_derivative,
                                           expected_throughput, rate_derivatives,
                                           t_opt_closed_form, t_opt_numeric)


@pytest.fixture(scope="module")
def p(cfg):
    return UpdateIntervalParams.from_config(cfg, v=1.0)


def r_of_t(t, r0, theta, v):
    return math.sqrt(max(r0 * r0 + (v * t) ** 2 - 2 * r0 * v * t * math.cos(theta), 0.0))


def uplink_by_quad(t_u, r0, theta, p):
    f = lambda t: math.log2(p.G_u / (r_of_t(t, r0, theta, p.v) ** 2 + p.h ** 2) ** (p.m + 3))
    val, _ = quad(f, 0, t_u, epsabs=0, epsrel=1e-12, limit=200)
    return (1 - p.t_fb / t_u) * p.uplink_scale * val / t_u


def downlink_by_quad(t_u, r0, theta, p):
    k = downlink_subcarriers(r0, p)
    eff = p.G * math.exp(-2 * math.pi * (k + 1) * p.B_dn / (p.K * p.w0))
    f = lambda t: math.log2(eff / (r_of_t(t, r0, theta, p.v) ** 2 + p.h ** 2) ** (p.m + 3))
    val, _ = quad(f, 0, t_u, epsabs=0, epsrel=1e-12, limit=200)
    return k * p.B_dn / (p.K * t_u) * val


tuples = st.tuples(st.floats(0.0, 2.35), st.floats(0.0, math.pi), st.floats(0.002, 4.0))


@given(tuples)
@settings(max_examples=100, deadline=None)
def test_average_rates_match_quadrature(tup):
    from lifi_feedback.config import NetworkConfig

    r0, theta, t_u = tup
    p = UpdateIntervalParams.from_config(NetworkConfig(), v=1.0)
    assert avg_uplink_rate(t_u, r0, theta, p) == pytest.approx(
        uplink_by_quad(t_u, r0, theta, p), rel=1e-6)
    assert avg_downlink_rate(t_u, r0, theta, p) == pytest.approx(
        downlink_by_quad(t_u, r0, theta, p), rel=1e-6)


@given(tuples)
@settings(max_examples=100, deadline=None)
def test_exact_derivatives_match_finite_differences(tup):
    from lifi_feedback.config import NetworkConfig

    r0, theta, t_u = tup
    p = UpdateIntervalParams.from_config(NetworkConfig(), v=1.0)
    h = 1e-6
    du, dd = rate_derivatives(t_u, r0, theta, p)
    fd_u = (avg_uplink_rate(t_u + h, r0, theta, p) - avg_uplink_rate(t_u - h, r0, theta, p)) / (2 * h)
    fd_d = (avg_downlink_rate(t_u + h, r0, theta, p)
            - avg_downlink_rate(t_u - h, r0, theta, p)) / (2 * h)
    scale_u = max(abs(fd_u), 1e-3 * p.uplink_scale)
    scale_d = max(abs(fd_d), 1e-3 * p.served_rate)
    assert abs(du - fd_u) / scale_u < 1e-6
    assert abs(dd - fd_d) / scale_d < 1e-6


def test_static_ue_rates_are_constant(cfg):
    p = UpdateIntervalParams.from_config(cfg, v=0.0)
    a = avg_downlink_rate(0.01, 1.0, 0.3, p)
    b = avg_downlink_rate(5.0, 1.0, 0.3, p)
    assert a == pytest.approx(b, rel=1e-14)
    assert a == pytest.approx(p.R_req, rel=1e-9)


def test_sideways_motion_lowers_downlink(p):
    t = np.linspace(0.01, 1.0, 20)
    rates = avg_downlink_rate(t, 1.0, math.pi / 2, p)
    assert np.all(np.diff(rates) < 0)


def test_rate_at_start_equals_request(p):
    # the interval average tends to the rate reserved at t = 0
    assert avg_downlink_rate(1e-6, 1.2, 0.4, p) == pytest.approx(p.R_req, rel=1e-5)


def test_interval_errors(p):
    with pytest.raises(IntervalError):
        avg_uplink_rate(p.t_fb / 2, 1.0, 0.0, p)
    with pytest.raises(IntervalError):
        avg_downlink_rate(p.t_max, 1.0, 0.0, p)
    with pytest.raises(ValueError):
        rate_derivatives(0.1, 1.0, 0.0, p, mode="bogus")


def test_approx_derivative_sideways(p):
    t = p.h / 10 / p.v
    ex = rate_derivatives(t, 1.0, math.pi / 2, p)
    ap = rate_derivatives(t, 1.0, math.pi / 2, p, mode="approx")
    assert ap[0] == pytest.approx(ex[0], rel=0.05)
    assert ap[1] == pytest.approx(ex[1], rel=0.05)


def test_approx_derivative_small_t_limit(p):
    # the small-displacement drift uses b^4 / d0^3; the exact second-order
    # coefficient is (d0 - 2 r0^2 cos^2) / d0^2, larger by r0^4 cos^4 / d0^3
    p = p.with_(t_fb=1e-5)
    r0, theta = 1.8, 0.6
    t = 1e-3
    ex = rate_derivatives(t, r0, theta, p)[1]
    ap = rate_derivatives(t, r0, theta, p, mode="approx")[1]
    c, d0 = math.cos(theta), r0 ** 2 + p.h ** 2
    taylor = (d0 - 2 * r0 ** 2 * c ** 2) / d0 ** 2
    b4 = (d0 - r0 ** 2 * c ** 2) ** 2 / d0 ** 3
    first = -(p.m + 3) / math.log(2) * (-2 * r0 * p.v * c / d0) / 2
    k_scale = downlink_subcarriers(r0, p) * p.B_dn / p.K
    # remove the first-order term, which the approximation drops, before comparing
    ex_second = ex / k_scale - first
    assert ex_second / (ap / k_scale) == pytest.approx(taylor / b4, rel=1e-3)


def test_approx_derivative_warns(p):
    with pytest.warns(RuntimeWarning):
        rate_derivatives(1.0, 1.0, 0.5, p, mode="approx")


def test_c2_against_sampling(p):
    _, c2 = expectation_constants(p)
    rng = np.random.default_rng(3)
    r0 = p.r_c * np.sqrt(rng.random(1_000_000))
    mc = np.mean(np.log2(p.G / (r0 ** 2 + p.h ** 2) ** (p.m + 3)))
    assert c2 == pytest.approx(mc, rel=0.005)


def test_spread_term_symmetric_in_theta(p):
    spread = lambda r0, th: (p.h ** 2 + (r0 * np.sin(th)) ** 2) ** 2 / (p.h ** 2 + r0 ** 2) ** 3
    folded = lambda r0, th: spread(r0, np.pi - th)
    assert expect(spread, p) == pytest.approx(expect(folded, p), rel=1e-13)


def test_expectation_constants_reject_weak_links(p):
    with pytest.raises(ConfigError):
        expectation_constants(p.with_(G_u=10.0))


def test_closed_form_power_law(p):
    for v in (0.25, 0.5, 1.0):
        ratio = t_opt_closed_form(p.with_(v=4 * v)) / t_opt_closed_form(p.with_(v=v))
        assert ratio == pytest.approx(4 ** (-2 / 3), rel=1e-12)
    with pytest.raises(ConfigError):
        t_opt_closed_form(p.with_(v=0.0))


def test_closed_form_decreases_with_load(p):
    base = t_opt_closed_form(p, overloaded=True)
    assert t_opt_closed_form(p.with_(N=10), overloaded=True) < base
    assert t_opt_closed_form(p.with_(R_req=10e6), overloaded=True) < base
    assert t_opt_closed_form(p.with_(overload=0.5), overloaded=True) > base
    # without the flag the overload factor plays no part
    assert t_opt_closed_form(p.with_(overload=0.5)) == pytest.approx(t_opt_closed_form(p))


@pytest.mark.parametrize("v", [0.5, 1.0, 2.5])
@pytest.mark.parametrize("rate", [5e6, 20e6])
def test_numeric_root_near_closed_form(cfg, v, rate):
    p = UpdateIntervalParams.from_config(cfg, v=v, R_req=rate)
    num, closed = t_opt_numeric(p), t_opt_closed_form(p)
    assert v * num < p.h / 5
    assert num == pytest.approx(closed, rel=0.15)
    assert abs(expected_derivative(num, p)) < 1e-3 * p.uplink_scale


def test_numeric_root_is_a_maximum(p):
    t = t_opt_numeric(p)
    best = expected_throughput(t, p).weighted_sum
    assert best > expected_throughput(0.7 * t, p).weighted_sum
    assert best > expected_throughput(1.3 * t, p).weighted_sum


def test_numeric_root_errors(p):
    with pytest.raises(NoRootError):
        t_opt_numeric(p.with_(v=1e4))
    with pytest.raises(ConfigError):
        t_opt_numeric(p.with_(v=0.0))


def test_throughput_breakdown(p):
    b = expected_throughput(0.15, p.with_(w_u=0.3, w_d=2.0))
    assert b.weighted_sum == pytest.approx(0.3 * b.avg_uplink + 2.0 * b.avg_downlink)
