"""Background metrics, tetrads, identifications, chart probes."""

import math

import numpy as np
import pytest

from instanton_lab.background import (Background, ChartPoint, DomainError,
                                      TETRAD_GRAM, chart_regularity_probe,
                                      christoffel_eval, identification_lattice,
                                      metric_eval, metric_jet, tetrad_eval,
                                      tetrad_gram, validate_point)

KERR = Background.kerr(1.0, 0.0)
KERR_SPIN = Background.kerr(1.0, 0.5)
BOLT = Background.taub_bolt(1.0)
EQUATOR = ChartPoint(0.0, 3.0, math.pi / 2.0, 0.0)


def random_points(bg, n, seed=0):
    rng = np.random.default_rng(seed)
    return [ChartPoint(rng.uniform(0, 5),
                       bg.r_inner + math.exp(rng.uniform(math.log(0.05), math.log(4.0))),
                       rng.uniform(0.15, math.pi - 0.15),
                       rng.uniform(0, 2 * math.pi))
            for _ in range(n)]


def test_kerr_static_metric_values():
    mc = metric_eval(KERR, EQUATOR)
    assert abs(mc.g[1, 1] - 3.0) < 1e-14
    assert abs(mc.g[0, 0] - 1.0 / 3.0) < 1e-14
    assert abs(mc.g[2, 2] - 9.0) < 1e-14
    assert abs(mc.g[3, 3] - 9.0) < 1e-14
    off = mc.g - np.diag(np.diag(mc.g))
    assert np.max(np.abs(off)) == 0.0


def test_bolt_metric_values():
    mc = metric_eval(BOLT, EQUATOR)
    assert abs(mc.g[1, 1] - 3.2) < 1e-14
    assert abs(mc.g[0, 0] - 1.25) < 1e-14
    assert abs(mc.g[2, 2] - 8.0) < 1e-14
    assert abs(mc.g[3, 3] - 8.0) < 1e-14


@pytest.mark.parametrize("bg", [KERR_SPIN, BOLT], ids=["kerr", "bolt"])
def test_positive_definiteness_random(bg):
    for p in random_points(bg, 1000, seed=3):
        g = metric_eval(bg, p).g
        assert np.allclose(g, g.T)
        assert np.min(np.linalg.eigvalsh(g)) > 0.0


def test_kerr_static_tetrad_values():
    tet = tetrad_eval(KERR, EQUATOR)
    s6 = math.sqrt(6.0)
    assert abs(tet.l[0] - 3.0 / s6) < 1e-14
    assert abs(tet.l[1] - 1j / s6) < 1e-14
    # |l|^2 = g_tt (3/sqrt6)^2 + g_rr (1/sqrt6)^2 = 1
    g = metric_eval(KERR, EQUATOR).g
    norm = g[0, 0] * (3.0 / s6) ** 2 + g[1, 1] * (1.0 / s6) ** 2
    assert abs(norm - 1.0) < 1e-14


def test_bolt_tetrad_values():
    tet = tetrad_eval(BOLT, EQUATOR)
    assert abs(tet.m[1] - 0.39528470752104744) < 1e-12
    assert abs(tet.m[0] - 0.6324555320336759j) < 1e-12


@pytest.mark.parametrize("bg", [KERR_SPIN, BOLT], ids=["kerr", "bolt"])
def test_tetrad_gram_matrix(bg):
    for p in random_points(bg, 25, seed=5):
        assert np.max(np.abs(tetrad_gram(bg, p) - TETRAD_GRAM)) < 1e-12


def test_schwarzschild_christoffel_value():
    gam = christoffel_eval(KERR, ChartPoint(0.0, 3.0, math.pi / 2, 0.0))
    assert abs(gam[1, 0, 0] + 1.0 / 27.0) < 1e-12


@pytest.mark.parametrize("bg", [KERR_SPIN, BOLT], ids=["kerr", "bolt"])
def test_metric_compatibility(bg):
    # nabla g = 0 componentwise at random points
    for p in random_points(bg, 20, seed=11):
        g, dg = metric_jet(bg, p)
        gam = christoffel_eval(bg, p)
        for c in range(4):
            nabla = dg[c].copy()
            for a in range(4):
                for b in range(4):
                    acc = 0.0
                    for e in range(4):
                        acc += gam[e, c, a] * g[e, b] + gam[e, c, b] * g[a, e]
                    nabla[a, b] -= acc
            assert np.max(np.abs(nabla)) < 1e-9


def test_christoffel_lower_symmetry():
    gam = christoffel_eval(KERR_SPIN, ChartPoint(0.0, 2.7, 1.0, 0.3))
    assert np.max(np.abs(gam - gam.transpose(0, 2, 1))) == 0.0


def test_root_and_surface_constant_identities():
    rng = np.random.default_rng(2)
    for _ in range(50):
        M = rng.uniform(0.3, 3.0)
        a = rng.uniform(-2.0, 2.0)
        bg = Background.kerr(M, a)
        assert abs(bg.delta(bg.r_plus)) < 1e-10 * max(1.0, bg.r_plus ** 2)
        assert abs(bg.delta(bg.r_minus)) < 1e-10 * max(1.0, bg.r_plus ** 2)
        assert bg.r_plus > abs(a)
        lhs = 2.0 * M * bg.r_plus * bg.kappa
        assert abs(lhs - math.sqrt(M * M + a * a)) < 1e-12 * max(1.0, lhs)
    bolt = Background.taub_bolt(1.3)
    assert abs(bolt.delta(2.0 * bolt.N)) < 1e-12
    assert abs(bolt.delta(0.5 * bolt.N)) < 1e-12


def test_identification_generators():
    gens = identification_lattice(KERR)
    assert np.allclose(gens.gen1, (8.0 * math.pi, 0.0))
    assert np.allclose(gens.gen2, (0.0, 2.0 * math.pi))
    gens_b = identification_lattice(BOLT)
    assert np.allclose(gens_b.gen1, (4.0 * math.pi, 0.0))
    assert np.allclose(gens_b.gen2, (2.0 * math.pi, 2.0 * math.pi))


def test_kerr_spinning_surface_constants():
    bg = Background.kerr(1.0, 0.5)
    assert abs(bg.kappa - 0.2639320225002103) < 1e-12
    assert abs(bg.omega_horizon - 0.11803398874989485) < 1e-12


def test_point_validation():
    with pytest.raises(DomainError):
        validate_point(KERR, ChartPoint(0.0, 1.99, 1.0, 0.0))
    with pytest.raises(DomainError):
        validate_point(KERR, ChartPoint(0.0, 3.0, 1e-12, 0.0))


def test_kerr_fixed_point_exponent():
    rep = chart_regularity_probe(KERR, "axis-fixed-point")
    assert abs(rep.fitted_exponents["time_circle_vs_rt"] - 2.0) < 1e-3
    assert abs(rep.fitted_exponents["axis_circle_vs_sin_theta"] - 2.0) < 1e-3


def test_bolt_circle_exponent():
    rep = chart_regularity_probe(BOLT, "bolt")
    assert abs(rep.fitted_exponents["time_circle_vs_rt"] - 2.0) < 1e-3


def test_bolt_transition_agreement():
    rep = chart_regularity_probe(BOLT, "transition")
    assert rep.max_mismatch < 1e-10


def test_probe_rejects_wrong_background():
    with pytest.raises(ValueError):
        chart_regularity_probe(KERR, "bolt")
