"""Mode lattices, potentials, separation identity, U+V decomposition."""

import math
from fractions import Fraction

import numpy as np
import pytest

from instanton_lab import hyperdual as hd
from instanton_lab.background import Background, ChartPoint, KERR, TAUB_BOLT
from instanton_lab.separation import (ModeIndex, PoleError, angular_bracket,
                                      invariance_phases, kerr_omega,
                                      lattice_contains, mode_lattice,
                                      potential_u, potential_v,
                                      separation_consistency,
                                      uv_decomposition)

K0 = Background.kerr(1.0, 0.0)
KS = Background.kerr(1.0, 0.5)
TB = Background.taub_bolt(1.0)


def test_static_kerr_lattice_frequencies():
    modes = mode_lattice(K0, [-1, 0, 1], range(-2, 3))
    freqs = sorted({m.omega for m in modes})
    assert freqs == [-0.5, -0.25, 0.0, 0.25, 0.5]
    # identical for the stated column at a = 0
    modes_p = mode_lattice(K0, [-1, 0, 1], range(-2, 3), convention="paper")
    assert sorted({m.omega for m in modes_p}) == freqs


def test_bolt_membership_examples():
    assert lattice_contains(TB, 0.5, 1.5)
    assert not lattice_contains(TB, 0.5, 1.0)
    assert lattice_contains(TB, 0.0, 0.0)
    assert lattice_contains(K0, 0.0, 0.0)


def test_emitted_modes_satisfy_exact_congruences():
    # Taub-bolt: both conditions in exact rational arithmetic
    for mode in mode_lattice(TB, [0.0, 0.5, -1.0], range(-3, 4)):
        mq = Fraction(mode.m).limit_denominator(2)
        oq = Fraction(mode.omega).limit_denominator(2)
        assert (2 * oq).denominator == 1
        assert (mq - oq).denominator == 1
    # rejected pairs violate at least one congruence
    assert not lattice_contains(TB, 0.5, 0.75)
    assert not lattice_contains(TB, 0.3, 1.3)


def test_emitted_modes_have_integral_phases():
    for bg in (KS, TB):
        m_vals = [0, 1, -2] if bg.kind == KERR else [0.0, 0.5, -1.5]
        for mode in mode_lattice(bg, m_vals, range(-2, 3)):
            for phase in invariance_phases(bg, mode):
                assert abs(phase - round(phase)) < 1e-9


def test_lattice_conventions_differ_for_spinning_kerr():
    inv = kerr_omega(KS, 2, 1, "invariance")
    pap = kerr_omega(KS, 2, 1, "paper")
    assert abs(inv - pap) > 1e-3
    # they agree at m = -1 regardless of rotation
    assert abs(kerr_omega(KS, -1, 1, "invariance")
               - kerr_omega(KS, -1, 1, "paper")) < 1e-15


def test_kerr_potential_value():
    mode = ModeIndex(KERR, 0.0, 0.25, 2.0)
    assert abs(potential_u(K0, mode, 3.0) - (-9.020833333333333)) < 1e-12


def test_bolt_potential_values():
    mode = ModeIndex(TAUB_BOLT, 0.0, 1.0, 0.0)
    assert abs(potential_u(TB, mode, 3.0) - (-16.1)) < 1e-12
    assert abs(potential_u(TB, mode, 3.0, tilded=True) - (-14.5)) < 1e-12


def test_kerr_has_no_tilded_radial_potential():
    with pytest.raises(ValueError):
        potential_u(K0, ModeIndex(KERR, 0.0, 0.25, 2.0), 3.0, tilded=True)


def test_potential_u_pole():
    with pytest.raises(PoleError):
        potential_u(K0, ModeIndex(KERR, 0.0, 0.25, 2.0), 2.0)


def test_angular_potential_values_and_limits():
    mode = ModeIndex(KERR, 0.0, 0.0, 2.0)
    assert potential_v(K0, mode, 0.0) == 2.0
    mode2 = ModeIndex(KERR, 2.0, 0.0, 2.0)
    assert potential_v(K0, mode2, 1.0) == 2.0      # removable endpoint
    with pytest.raises(PoleError):
        potential_v(K0, mode, 1.0)                 # bracket = 2 at x=1
    mode3 = ModeIndex(TAUB_BOLT, 0.0, -2.0, 5.0)
    for x in (-0.7, 0.0, 0.4):
        assert potential_v(TB, mode3, x) == 5.0    # bracket vanishes identically


@pytest.mark.parametrize("bg,tilded", [
    (KS, False), (KS, True), (TB, False), (TB, True),
], ids=["kerr", "kerr-tilded", "bolt", "bolt-tilded"])
def test_separation_identity_smooth_functions(bg, tilded):
    rng = np.random.default_rng(10)
    if bg.kind == KERR:
        mode = ModeIndex(KERR, 1.0, kerr_omega(bg, 1, 1), 0.0)
    else:
        mode = ModeIndex(TAUB_BOLT, 0.5, 1.5, 0.0)
    for k in range(10):
        c1, c2, c3 = rng.uniform(-1.0, 1.0, 3)
        R = lambda r: hd.exp(c1 * 0.3 * r) * (r + c2 * r * r) / (1.0 + 0.1 * r * r)
        S = lambda th: hd.sin(th) * c3 + hd.cos(2.0 * th) + 2.0
        p = ChartPoint(rng.uniform(0, 3), bg.r_inner + rng.uniform(0.3, 3.0),
                       rng.uniform(0.4, math.pi - 0.4), rng.uniform(0, 6.0))
        scale = max(1.0, abs(R(p.r)) * 10.0)
        assert separation_consistency(bg, mode, R, S, p, tilded=tilded) < 1e-9 * scale


def test_separation_residual_lambda_independent():
    # Lambda cancels between the radial and angular potentials: the
    # identity residual is unchanged under a Lambda shift
    from instanton_lab.separation import (angular_operator_apply, mode_field,
                                          lop_apply, radial_operator_apply)
    bg, mode = KS, ModeIndex(KERR, 1.0, kerr_omega(KS, 1, 1), 0.0)
    R = lambda r: 1.0 / r
    S = lambda th: hd.sin(th)
    p = ChartPoint(0.1, 3.1, 1.2, 0.4)
    phase = complex(hd.exp(1j * (mode.m * p.phi - mode.omega * p.t)))
    lhs = complex(lop_apply(bg, mode_field(mode, R, S), p))
    residuals = []
    for lam in (0.0, 7.5, -3.25):
        rr = complex(radial_operator_apply(bg, mode, R, p.r, Lambda=lam))
        ss = complex(angular_operator_apply(bg, mode, S, p.theta, Lambda=lam))
        rhs = phase * (S(p.theta) * rr + R(p.r) * ss)
        residuals.append(abs(lhs - rhs))
    assert max(residuals) - min(residuals) < 1e-12


def test_separated_parts_recover_potentials():
    # with R = S = 1 and m = omega = 0 the operator reduces to U + V
    mode = ModeIndex(KERR, 0.0, 0.0, 2.0)
    from instanton_lab.separation import lop_apply
    p = ChartPoint(0.0, 3.0, 1.0, 0.0)
    val = complex(lop_apply(K0, lambda t, r, th, ph: 1.0 + 0.0 * r, p))
    expect = potential_u(K0, mode, p.r) + potential_v(K0, mode, math.cos(p.theta))
    assert abs(val - expect) < 1e-10


def test_exact_separated_solutions_annihilate_operator():
    # R, S solving the separated equations make L Phi vanish
    from instanton_lab.angular import angular_spectrum
    from instanton_lab.radial import frobenius_series, smooth_exponent
    from instanton_lab.separation import lop_apply, mode_field
    bg = K0
    mode0 = ModeIndex(KERR, 0.0, 0.25)
    pair = angular_spectrum(bg, mode0, 1)[0]
    mode = mode0.with_lambda(pair.Lambda)
    series = frobenius_series(bg, mode, bg.r_inner, smooth_exponent(bg, mode))
    R = lambda r: series.eval(hd.value(r))[0] if not isinstance(r, hd.HyperDual) \
        else _series_hd(series, r)
    S = lambda th: pair(th)
    Phi = mode_field(mode, R, S)
    for r, th in [(2.05, 1.0), (2.1, 2.0)]:
        p = ChartPoint(0.2, r, th, 1.0)
        val = complex(lop_apply(bg, Phi, p))
        assert abs(val) < 1e-7


def _series_hd(series, r):
    s = r - series.r0
    poly = 0.0
    for k in range(len(series.coeffs) - 1, -1, -1):
        poly = poly * s + series.coeffs[k]
    return s ** series.rho * poly


def test_decomposition_identity_and_terms():
    mode = ModeIndex(KERR, 0.0, KS.omega_horizon + KS.kappa, 2.0)
    d = uv_decomposition(KS, mode, 3.0, 0.0)
    assert d["residual"] < 1e-10
    assert abs(d["terms"][0] - (-16.0 * 3.0 / 9.0)) < 1e-12


def test_decomposition_static_sum():
    mode = ModeIndex(KERR, 0.0, 0.25, 2.0)
    d = uv_decomposition(K0, mode, 3.0, 0.0)
    assert abs(d["u_plus_v"] - (-7.020833333333333)) < 1e-12
    assert d["residual"] < 1e-12


def test_decomposition_terms_nonpositive_and_first_strict():
    rng = np.random.default_rng(11)
    mode = ModeIndex(KERR, 1.0, kerr_omega(KS, 1, -2), 2.0)
    for _ in range(200):
        r = KS.r_inner + 10.0 ** rng.uniform(-3, 3)
        x = rng.uniform(-0.999, 0.999)
        t1, t2, t3 = uv_decomposition(KS, mode, r, x)["terms"]
        assert t1 < 0.0
        assert t2 <= 0.0 and t3 <= 0.0
