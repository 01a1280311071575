"""Spin coefficients, Weyl scalars, structure-equation residuals."""

import math

import numpy as np
import pytest

from instanton_lab import hyperdual as hd
from instanton_lab.background import Background, ChartPoint
from instanton_lab.np_formalism import (a1_identity_check,
                                        decoupled_operator_apply,
                                        coefficient_field_fns, np_residuals,
                                        ricci_max_abs, spin_coeffs_closed,
                                        spin_coeffs_numeric, tilde_map,
                                        weyl_scalars_closed,
                                        weyl_scalars_numeric)
from instanton_lab.separation import ModeIndex, kerr_omega, mode_field

KERR = Background.kerr(1.0, 0.5)
KERR0 = Background.kerr(1.0, 0.0)
BOLT = Background.taub_bolt(1.0)


def random_points(bg, n, seed=0):
    rng = np.random.default_rng(seed)
    return [ChartPoint(rng.uniform(0, 5),
                       bg.r_inner + math.exp(rng.uniform(math.log(0.08), math.log(3.0))),
                       rng.uniform(0.25, math.pi - 0.25),
                       rng.uniform(0, 2 * math.pi))
            for _ in range(n)]


def test_kerr_static_rho_value():
    s = spin_coeffs_closed(KERR0, ChartPoint(0.0, 3.0, math.pi / 2, 0.0))
    expect = -1j / (3.0 * math.sqrt(6.0))
    assert abs(s.rho - expect) < 1e-12
    assert abs(s.mu - expect) < 1e-12
    assert abs(s.alpha) < 1e-15 and abs(s.beta) < 1e-15


def test_bolt_gamma_epsilon_value():
    s = spin_coeffs_closed(BOLT, ChartPoint(0.0, 3.0, math.pi / 4, 0.0))
    for name in ("gamma", "epsilon", "gamma_t", "epsilon_t"):
        assert abs(s.as_dict()[name] - 0.125j) < 1e-14


def test_bolt_pi_tau_value():
    s = spin_coeffs_closed(BOLT, ChartPoint(0.0, 4.0, math.pi / 2, 0.0))
    expect = -5.0 * math.sqrt(7.0 / 30.0) / 15.0
    assert abs(s.pi - expect) < 1e-12
    assert abs(s.tau - expect) < 1e-12
    # tilded partner has the published (r+N) structure
    expect_t = math.sqrt(7.0 / 30.0) / 5.0
    assert abs(s.pi_t - expect_t) < 1e-12


@pytest.mark.parametrize("bg,zeros", [
    (KERR, ("kappa", "lam", "nu", "sigma",
            "kappa_t", "lam_t", "nu_t", "sigma_t")),
    (BOLT, ("kappa", "lam", "mu", "nu", "rho", "sigma",
            "kappa_t", "lam_t", "mu_t", "nu_t", "rho_t", "sigma_t")),
], ids=["kerr", "bolt"])
def test_vanishing_patterns(bg, zeros):
    s = spin_coeffs_closed(bg, ChartPoint(0.0, 3.0, 1.0, 0.0))
    for name in zeros:
        assert s.as_dict()[name] == 0.0


@pytest.mark.parametrize("bg", [KERR, BOLT], ids=["kerr", "bolt"])
def test_conjugation_relations(bg):
    for p in random_points(bg, 10, seed=1):
        s = spin_coeffs_closed(bg, p).as_dict()
        for plain, conj, sign in [("alpha", "beta", 1), ("gamma", "epsilon", -1),
                                  ("kappa", "nu", 1), ("lam", "sigma", -1),
                                  ("mu", "rho", -1), ("pi", "tau", 1)]:
            for suffix in ("", "_t"):
                lhs = np.conj(s[plain + suffix])
                rhs = sign * s[conj + suffix]
                assert abs(lhs - rhs) < 1e-10


@pytest.mark.parametrize("bg", [KERR, BOLT], ids=["kerr", "bolt"])
def test_numeric_extraction_matches_closed(bg):
    for p in random_points(bg, 20, seed=2):
        closed = spin_coeffs_closed(bg, p).as_dict()
        numeric, fit = spin_coeffs_numeric(bg, p)
        assert fit < 1e-10
        for name, val in closed.items():
            assert abs(val - numeric.as_dict()[name]) < 1e-8


def test_tilde_map_involution_and_swap():
    s = spin_coeffs_closed(KERR, ChartPoint(0.0, 2.8, 1.2, 0.0))
    t = tilde_map(s)
    assert t.rho == s.rho_t and t.rho_t == s.rho
    assert t.kappa == 0.0 and s.kappa == 0.0      # vanishing preserved
    back = tilde_map(t)
    assert back == s


def test_tilde_map_relates_kerr_structures():
    # rho carries 1/(r - a cos) and its partner 1/(r + a cos)
    p = ChartPoint(0.0, 3.0, 1.0, 0.0)
    s = spin_coeffs_closed(KERR, p)
    rm = p.r - KERR.a * math.cos(p.theta)
    rp = p.r + KERR.a * math.cos(p.theta)
    assert abs(s.rho * rm - s.rho_t * rp) < 1e-12


def test_kerr_weyl_scalar_values():
    # closed-form profile at the reference point r=2 (outside the chart of
    # this rotation, so only the analytic formula applies there)
    fns = coefficient_field_fns(KERR)
    assert abs(fns["psi2"](0.0, 2.0, math.pi / 3, 0.0) - 1.0 / 1.75 ** 3) < 1e-12
    assert abs(fns["psi2_t"](0.0, 2.0, math.pi / 3, 0.0) - 1.0 / 2.25 ** 3) < 1e-12
    # metric-derived scalars at an interior point of the chart
    p = ChartPoint(0.0, 2.5, math.pi / 3, 0.0)
    w = weyl_scalars_numeric(KERR, p)
    assert abs(w.psi2 - 1.0 / 2.25 ** 3) < 1e-9
    assert abs(w.psi2_t - 1.0 / 2.75 ** 3) < 1e-9


def test_bolt_weyl_scalar_values():
    w = weyl_scalars_numeric(BOLT, ChartPoint(0.0, 3.0, 1.1, 0.0))
    assert abs(w.psi2 - 1.0 / 32.0) < 1e-10
    assert abs(w.psi2_t - 9.0 / 256.0) < 1e-10


@pytest.mark.parametrize("bg", [KERR, BOLT], ids=["kerr", "bolt"])
def test_adapted_tetrad_scalars_vanish(bg):
    for p in random_points(bg, 6, seed=3):
        w = weyl_scalars_numeric(bg, p)
        for name in ("psi0", "psi1", "psi3", "psi4",
                     "psi0_t", "psi1_t", "psi3_t", "psi4_t"):
            assert abs(w.as_dict()[name]) < 1e-9
        assert abs(np.conj(w.psi0) - w.psi4) < 1e-10
        assert abs(np.conj(w.psi1) - w.psi3) < 1e-10
        assert abs(w.psi2.imag) < 1e-10
        assert ricci_max_abs(bg, p) < 1e-9


def test_psi2_radial_profile_constant():
    rng = np.random.default_rng(4)
    for _ in range(10):
        p = ChartPoint(0.0, KERR.r_inner + rng.uniform(0.1, 3.0),
                       rng.uniform(0.3, math.pi - 0.3), 0.0)
        w = weyl_scalars_closed(KERR, p)
        rm = p.r - KERR.a * math.cos(p.theta)
        assert abs(w.psi2 * rm ** 3 - KERR.M) < 1e-9
        pb = ChartPoint(0.0, BOLT.r_inner + rng.uniform(0.1, 3.0), 1.0, 0.0)
        wb = weyl_scalars_closed(BOLT, pb)
        assert abs(wb.psi2 * 4.0 * (pb.r - BOLT.N) ** 3 - BOLT.N) < 1e-9


@pytest.mark.parametrize("bg", [KERR, BOLT], ids=["kerr", "bolt"])
def test_structure_equation_residuals(bg):
    for p in random_points(bg, 20, seed=5):
        rep = np_residuals(bg, p)
        assert rep.max_residual < 1e-8


def test_bianchi_reduces_to_radial_transport():
    # on the adapted background the inner Bianchi identity collapses to
    # D psi2 = 3 rho psi2
    for p in random_points(KERR, 10, seed=6):
        rep = np_residuals(KERR, p)
        assert rep.bianchi["bianchi_psi1_inner"] < 1e-10
        assert rep.bianchi["bianchi_psi1_inner_tilde"] < 1e-10


def test_trivially_zero_equations_report_zero():
    p = ChartPoint(0.0, 3.0, 1.0, 0.0)
    rep = np_residuals(KERR, p)
    # all Weyl inputs of the outermost identity vanish identically
    assert rep.bianchi["bianchi_psi0_inner"] == 0.0


@pytest.mark.parametrize("bg", [KERR, KERR0, BOLT], ids=["kerr", "static", "bolt"])
def test_a1_cancellation(bg):
    for p in random_points(bg, 10, seed=7):
        assert a1_identity_check(bg, p) < 1e-9
        assert a1_identity_check(bg, p, tilded=True) < 1e-9


def test_a1_static_machine_zero():
    for p in random_points(KERR0, 5, seed=8):
        assert a1_identity_check(KERR0, p) < 1e-12


@pytest.mark.parametrize("bg,tilded",
                         [(KERR, False), (KERR, True), (BOLT, False), (BOLT, True)],
                         ids=["kerr", "kerr-tilded", "bolt", "bolt-tilded"])
def test_decoupled_operator_proportional_to_separated(bg, tilded):
    # the tetrad-form second-order operator equals (1/2 Sigma) times the
    # coordinate operator on psi2^{2/3} Phi, pointwise
    from instanton_lab.separation import lop_apply
    mode = ModeIndex(bg.kind, 1.0 if bg.kind == "kerr" else 0.5,
                     kerr_omega(bg, 1, 1) if bg.kind == "kerr" else 1.5, 0.0)
    fns = coefficient_field_fns(bg)
    psi2 = fns["psi2_t" if tilded else "psi2"]
    R = lambda r: hd.exp(-0.4 * r) * (r * r + 1.0)
    S = lambda th: hd.sin(th) * hd.cos(th) + 2.0
    Phi = mode_field(mode, R, S)

    def f_fn(t, r, th, ph):
        return psi2(t, r, th, ph) ** (2.0 / 3.0) * Phi(t, r, th, ph)

    for p in random_points(bg, 4, seed=9):
        T = complex(decoupled_operator_apply(bg, f_fn, p, tilded=tilded))
        L = complex(lop_apply(bg, Phi, p, tilded=tilded))
        psival = complex(psi2(p.t, p.r, p.theta, p.phi))
        ratio = T * 2.0 * bg.sigma(p.r, p.theta) / (psival ** (2.0 / 3.0) * L)
        assert abs(ratio - 1.0) < 1e-8
