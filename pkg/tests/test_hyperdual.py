"""Forward-mode derivative kernels: exactness and cross-checks."""

import math

import numpy as np
import pytest

import instanton_lab.hyperdual as hd
from instanton_lab.background import Background, ChartPoint, metric_component_fn


def test_cubic_derivatives_exact():
    val, d1, d2 = hd.derive2(lambda x: x ** 3, 2.0)
    assert (val, d1, d2) == (8.0, 12.0, 12.0)


def test_sine_at_zero():
    val, d1, d2 = hd.derive2(hd.sin, 0.0)
    assert val == 0.0 and d1 == 1.0 and d2 == 0.0


def test_schwarzschild_gtt_profile():
    # 1 - 2/r at r=3: (1/3, 2/9, -4/27), from direct evaluation of the
    # closed form
    val, d1, d2 = hd.derive2(lambda r: 1.0 - 2.0 / r, 3.0)
    assert abs(val - 1.0 / 3.0) < 4e-16
    assert abs(d1 - 2.0 / 9.0) < 4e-16
    assert abs(d2 + 4.0 / 27.0) < 4e-16


def test_chain_rule_composition():
    f = lambda x: hd.exp(hd.sin(3.0 * x)) / hd.sqrt(1.0 + x * x)
    x0 = 0.7
    val, d1, d2 = hd.derive2(f, x0)
    h = 1e-5
    fd1 = (f(x0 + h) - f(x0 - h)) / (2 * h)
    fd2 = (f(x0 + h) - 2 * f(x0) + f(x0 - h)) / h ** 2
    assert abs(d1 - fd1) < 1e-9 * max(1.0, abs(fd1))
    assert abs(d2 - fd2) < 1e-5 * max(1.0, abs(fd2))


def test_division_and_power_rules():
    f = lambda x: (x ** 2 + 1.0) / (x - 0.5) + x ** (-1.5)
    val, d1, d2 = hd.derive2(f, 2.0)
    g = lambda x: (x * x + 1.0) / (x - 0.5) + 1.0 / hd.sqrt(x * x * x)
    val2, e1, e2 = hd.derive2(g, 2.0)
    assert abs(val - val2) < 1e-14
    assert abs(d1 - e1) < 1e-14
    assert abs(d2 - e2) < 1e-13


def test_complex_values_propagate():
    f = lambda x: hd.exp(1j * x) * (x + 2.0)
    val, d1, d2 = hd.derive2(f, 0.9)
    expected_d1 = 1j * np.exp(1j * 0.9) * 2.9 + np.exp(1j * 0.9)
    assert abs(d1 - expected_d1) < 1e-14


def test_pole_raises():
    with pytest.raises(ZeroDivisionError):
        hd.derive2(lambda x: 1.0 / x, 0.0)


@pytest.mark.parametrize("kind", ["kerr", "taub-bolt"])
def test_metric_components_match_central_differences(kind):
    # hyper-dual first derivative of every metric component vs central
    # finite differences (step 1e-5) within 1e-6 relative, 100 points
    if kind == "kerr":
        bg = Background.kerr(1.0, 0.45)
    else:
        bg = Background.taub_bolt(1.0)
    g_fn = metric_component_fn(bg)
    rng = np.random.default_rng(7)
    h = 1e-5
    for _ in range(100):
        r = bg.r_inner + rng.uniform(0.2, 4.0)
        th = rng.uniform(0.3, math.pi - 0.3)
        for slot in (1, 2):     # r and theta directions
            coords = [0.0, r, th, 0.0]
            seeded = list(coords)
            seeded[slot] = hd.seed1(coords[slot])
            jet = g_fn(*seeded)
            up = list(coords)
            dn = list(coords)
            up[slot] += h
            dn[slot] -= h
            g_up = g_fn(*up)
            g_dn = g_fn(*dn)
            for a in range(4):
                for b in range(4):
                    exact = jet[a][b].d1 if isinstance(jet[a][b], hd.HyperDual) else 0.0
                    approx = (g_up[a][b] - g_dn[a][b]) / (2 * h)
                    scale = max(1.0, abs(approx))
                    assert abs(exact - approx) < 1e-6 * scale


def test_hessian_symmetry_and_gradient():
    f = lambda t, r, th, ph: hd.sin(th) * r ** 2 + hd.cos(2.0 * th) / r + t * ph
    val, grad, hess = hd.hessian4(f, (0.3, 2.5, 1.1, 0.4))
    assert abs(grad[0] - 0.4) < 1e-14
    assert abs(grad[3] - 0.3) < 1e-14
    for a in range(4):
        for b in range(4):
            assert hess[a][b] == hess[b][a]
    assert abs(hess[0][3] - 1.0) < 1e-14
