"""Adaptive ODE and quadrature wrappers."""

import math

import numpy as np
import pytest

from instanton_lab.integrate import (IntegratorConfig, QuadratureError,
                                     midpoint_rule, ode_solve, quad)


def test_exponential_growth():
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
    res = ode_solve(lambda x, y: y, (0.0, 1.0), [1.0], cfg)
    assert abs(res.y[0, -1] - math.e) < 1e-9


def test_harmonic_oscillator_energy_drift():
    # energy drift over 100 periods bounded by 10 * rel_tol
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
    T = 2.0 * math.pi * 100.0
    res = ode_solve(lambda x, y: np.array([y[1], -y[0]]), (0.0, T), [1.0, 0.0], cfg)
    energy = res.y[0] ** 2 + res.y[1] ** 2
    assert abs(energy[-1] - 1.0) < 10 * 100 * cfg.rel_tol


def test_linearity_in_initial_data():
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    A = np.array([[0.0, 1.0], [-2.0, -0.1]])
    rhs = lambda x, y: A @ y
    y1 = ode_solve(rhs, (0.0, 3.0), [1.0, 0.0], cfg).y[:, -1]
    y2 = ode_solve(rhs, (0.0, 3.0), [0.0, 1.0], cfg).y[:, -1]
    y12 = ode_solve(rhs, (0.0, 3.0), [2.0, -3.0], cfg).y[:, -1]
    assert np.max(np.abs(y12 - (2.0 * y1 - 3.0 * y2))) < 1e-8


def test_dense_output_available():
    res = ode_solve(lambda x, y: -y, (0.0, 2.0), [1.0])
    assert abs(res.sol(1.3)[0] - math.exp(-1.3)) < 1e-9


def test_failure_reports_location():
    from instanton_lab.integrate import IntegrationError
    # blow-up reaches infinity before x = 2; the solver must fail with a
    # location rather than return silently
    with pytest.raises(IntegrationError):
        ode_solve(lambda x, y: y * y, (0.0, 2.0), [1.0],
                  IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12))


def test_quad_sin():
    assert abs(quad(math.sin, 0.0, math.pi) - 2.0) < 1e-10


def test_quad_exponential_tail():
    val = quad(lambda r: math.exp(-2.0 * r), 2.0, math.inf)
    assert abs(val - math.exp(-4.0) / 2.0) < 1e-10 * (1 + val)


def test_quad_matches_midpoint_oracle():
    f = lambda r: math.exp(-r) * (r ** 2 + 3.0)
    oracle = midpoint_rule(f, 1.0, 30.0, 100_000)
    assert abs(quad(f, 1.0, 30.0) - oracle) < 1e-6


def test_quad_nonconvergence_raises():
    with pytest.raises(QuadratureError):
        quad(lambda r: 1.0 / (1.0 + r), 0.0, math.inf)
