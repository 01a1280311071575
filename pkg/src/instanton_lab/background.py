"""Background geometries: Riemannian Kerr and Taub-bolt.

Provides the two instanton families in their stationary coordinates
``(t, r, theta, phi)``, the adapted complex tetrads in which their
curvature takes type-D form, Christoffel symbols from hyper-dual metric
derivatives, the identification lattice of the ``(t, phi)`` torus, and
numerical regularity probes for the degenerate chart loci.

All scalar formulas are written against generic arithmetic so they can be
evaluated on plain floats or on :class:`~instanton_lab.hyperdual.HyperDual`
coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hyperdual as hd

KERR = "kerr"
TAUB_BOLT = "taub-bolt"

#: margin kept between accepted points and the chart boundary; the tetrad
#: and spin-coefficient formulas contain 1/sin(theta) and 1/sqrt(Delta).
DOMAIN_MARGIN = 1e-9


class DomainError(ValueError):
    """Point lies outside (or too close to the edge of) the chart."""


@dataclass(frozen=True)
class Background:
    """Parameter record for one instanton background.

    Use the :meth:`kerr` / :meth:`taub_bolt` constructors; ``M`` and ``a``
    are meaningful for Kerr, ``N`` for Taub-bolt (which fixes the mass to
    ``5N/4``).
    """

    kind: str
    M: float = 0.0
    a: float = 0.0
    N: float = 0.0

    @staticmethod
    def kerr(M, a):
        if M <= 0:
            raise ValueError("Kerr requires M > 0")
        bg = Background(KERR, M=float(M), a=float(a))
        if not bg.r_plus > abs(bg.a):
            raise ValueError("degenerate Kerr parameters: r_plus <= |a|")
        return bg

    @staticmethod
    def taub_bolt(N):
        if N <= 0:
            raise ValueError("Taub-bolt requires N > 0")
        return Background(TAUB_BOLT, M=1.25 * float(N), N=float(N))

    # -- derived constants --------------------------------------------------

    @property
    def r_plus(self):
        """Outer root of Delta: boundary of the chart."""
        if self.kind == KERR:
            return self.M + math.sqrt(self.M * self.M + self.a * self.a)
        return 2.0 * self.N

    @property
    def r_minus(self):
        """Inner root of Delta."""
        if self.kind == KERR:
            return self.M - math.sqrt(self.M * self.M + self.a * self.a)
        return 0.5 * self.N

    @property
    def kappa(self):
        """Surface-gravity constant of the Kerr time identification."""
        if self.kind != KERR:
            raise ValueError("kappa is a Kerr quantity")
        return math.sqrt(self.M * self.M + self.a * self.a) / (2.0 * self.M * self.r_plus)

    @property
    def omega_horizon(self):
        """Angular-velocity constant of the Kerr identification."""
        if self.kind != KERR:
            raise ValueError("Omega is a Kerr quantity")
        return self.a / (2.0 * self.M * self.r_plus)

    @property
    def bolt_radius(self):
        if self.kind != TAUB_BOLT:
            raise ValueError("bolt radius is a Taub-bolt quantity")
        return 2.0 * self.N

    @property
    def r_inner(self):
        """Inner boundary of the radial domain (r_plus / bolt radius)."""
        return self.r_plus

    def delta_coeffs(self):
        """Coefficients (c2, c1, c0) of the quadratic Delta(r)."""
        if self.kind == KERR:
            return 1.0, -2.0 * self.M, -self.a * self.a
        return 1.0, -2.5 * self.N, self.N * self.N

    def delta(self, r):
        c2, c1, c0 = self.delta_coeffs()
        return (c2 * r + c1) * r + c0

    def delta_prime(self, r):
        c2, c1, _ = self.delta_coeffs()
        return 2.0 * c2 * r + c1

    def sigma(self, r, theta):
        if self.kind == KERR:
            c = hd.cos(theta)
            return r * r - self.a * self.a * c * c
        return r * r - self.N * self.N


@dataclass(frozen=True)
class ChartPoint:
    """Point in the stationary chart; r outside the degenerate locus."""

    t: float
    r: float
    theta: float
    phi: float


def validate_point(bg, p, margin=DOMAIN_MARGIN):
    scale = max(1.0, bg.r_inner)
    if not p.r > bg.r_inner + margin * scale:
        raise DomainError(f"r={p.r} not inside the chart (r_inner={bg.r_inner})")
    if not margin < p.theta < math.pi - margin:
        raise DomainError(f"theta={p.theta} too close to the axis")


# ---------------------------------------------------------------------------
# Metric and tetrad as generic-scalar component functions
# ---------------------------------------------------------------------------


def metric_component_fn(bg):
    """Return ``g(t, r, theta, phi) -> 4x4 nested list`` of scalars.

    Coordinate order is (t, r, theta, phi).  Works on hyper-dual input.
    """
    if bg.kind == KERR:
        M, a = bg.M, bg.a

        def g_fn(t, r, theta, phi):
            sin = hd.sin(theta)
            cos = hd.cos(theta)
            sin2 = sin * sin
            Sig = r * r - a * a * cos * cos
            Del = (r - 2.0 * M) * r - a * a
            # (Delta/Sigma)(dt - a sin^2 dphi)^2 + (sin^2/Sigma)((r^2-a^2)dphi + a dt)^2
            g_tt = Del / Sig + a * a * sin2 / Sig
            g_tp = (Del / Sig) * (-a * sin2) + (sin2 / Sig) * (r * r - a * a) * a
            g_pp = (Del / Sig) * (a * a * sin2 * sin2) + (sin2 / Sig) * (r * r - a * a) ** 2
            g_rr = Sig / Del
            g_hh = Sig
            zero = 0.0 * g_tt
            return [[g_tt, zero, zero, g_tp],
                    [zero, g_rr, zero, zero],
                    [zero, zero, g_hh, zero],
                    [g_tp, zero, zero, g_pp]]

        return g_fn

    N = bg.N

    def g_fn(t, r, theta, phi):
        sin = hd.sin(theta)
        cos = hd.cos(theta)
        Sig = r * r - N * N
        Del = (r - 2.5 * N) * r + N * N
        f = 4.0 * N * N * Del / Sig
        g_tt = f
        g_tp = f * cos
        g_pp = f * cos * cos + Sig * sin * sin
        g_rr = Sig / Del
        g_hh = Sig
        zero = 0.0 * g_tt
        return [[g_tt, zero, zero, g_tp],
                [zero, g_rr, zero, zero],
                [zero, zero, g_hh, zero],
                [g_tp, zero, zero, g_pp]]

    return g_fn


def tetrad_component_fn(bg):
    """Return ``f(t, r, theta, phi) -> (l, m)`` component lists.

    The components are complex scalars (hyper-dual capable); the conjugate
    legs of the tetrad follow by componentwise conjugation.
    """
    if bg.kind == KERR:
        M, a = bg.M, bg.a

        def f(t, r, theta, phi):
            sin = hd.sin(theta)
            cos = hd.cos(theta)
            Sig = r * r - a * a * cos * cos
            Del = (r - 2.0 * M) * r - a * a
            s2S = hd.sqrt(2.0 * Sig)
            s2DS = hd.sqrt(2.0 * Del * Sig)
            l = [(r * r - a * a) / s2DS,
                 1j * hd.sqrt(Del / (2.0 * Sig)),
                 0.0,
                 -a / s2DS]
            m = [-1j * a * sin / s2S,
                 0.0,
                 1.0 / s2S,
                 -1j / (s2S * sin)]
            return l, m

        return f

    N = bg.N

    def f(t, r, theta, phi):
        sin = hd.sin(theta)
        cos = hd.cos(theta)
        Sig = r * r - N * N
        Del = (r - 2.5 * N) * r + N * N
        s2S = hd.sqrt(2.0 * Sig)
        l = [cos / (s2S * sin),
             0.0,
             1j / s2S,
             -1.0 / (s2S * sin)]
        m = [1j * hd.sqrt(Sig / (2.0 * Del)) / (2.0 * N),
             hd.sqrt(Del / (2.0 * Sig)),
             0.0,
             0.0]
        return l, m

    return f


# ---------------------------------------------------------------------------
# Point evaluations
# ---------------------------------------------------------------------------


@dataclass
class MetricComponents:
    g: np.ndarray          # symmetric 4x4, coordinate basis (t, r, theta, phi)
    sigma: float
    delta: float


@dataclass
class Tetrad:
    l: np.ndarray          # complex coordinate components of l
    m: np.ndarray          # complex coordinate components of m

    @property
    def l_bar(self):
        return np.conj(self.l)

    @property
    def m_bar(self):
        return np.conj(self.m)

    def legs(self):
        """Tetrad legs in the fixed order (l, l_bar, m, m_bar)."""
        return [self.l, self.l_bar, self.m, self.m_bar]


#: constant Gram matrix of the tetrad in the order (l, l_bar, m, m_bar)
TETRAD_GRAM = np.array([[0.0, 1.0, 0.0, 0.0],
                        [1.0, 0.0, 0.0, 0.0],
                        [0.0, 0.0, 0.0, 1.0],
                        [0.0, 0.0, 1.0, 0.0]])


def metric_eval(bg, p):
    """Closed-form metric components at a validated chart point."""
    validate_point(bg, p)
    g = np.array(metric_component_fn(bg)(p.t, p.r, p.theta, p.phi), dtype=float)
    return MetricComponents(g=g, sigma=float(bg.sigma(p.r, p.theta)),
                            delta=float(bg.delta(p.r)))


def tetrad_eval(bg, p):
    """Adapted tetrad (l, m) at a validated chart point."""
    validate_point(bg, p)
    l, m = tetrad_component_fn(bg)(p.t, p.r, p.theta, p.phi)
    return Tetrad(l=np.array(l, dtype=complex), m=np.array(m, dtype=complex))


def tetrad_gram(bg, p):
    """Gram matrix g(e_A, e_B) of the tetrad legs at p."""
    g = metric_eval(bg, p).g
    legs = tetrad_eval(bg, p).legs()
    G = np.empty((4, 4), dtype=complex)
    for A in range(4):
        for B in range(4):
            G[A, B] = legs[A] @ g @ legs[B]
    return G


def metric_jet(bg, p, second=False):
    """Metric with first (and optionally second) coordinate derivatives.

    Returns ``(g, dg)`` or ``(g, dg, d2g)`` with ``dg[c][a][b] = d_c g_ab``
    and ``d2g[c][d][a][b] = d_c d_d g_ab``, from hyper-dual evaluations.
    """
    g_fn = metric_component_fn(bg)
    coords = (p.t, p.r, p.theta, p.phi)
    g = np.zeros((4, 4))
    dg = np.zeros((4, 4, 4))
    d2g = np.zeros((4, 4, 4, 4)) if second else None

    # The backgrounds are t,phi independent; derivative slots are only
    # needed for r and theta, but the loop stays generic and cheap.
    pairs = [(c, d) for c in range(4) for d in range(c, 4)] if second \
        else [(c, c) for c in range(4)]
    for c, d in pairs:
        seeded = list(coords)
        if c == d:
            seeded[c] = hd.seed_both(coords[c])
        else:
            seeded[c] = hd.seed1(coords[c])
            seeded[d] = hd.seed2(coords[d])
        comp = g_fn(*seeded)
        for a in range(4):
            for b in range(4):
                entry = comp[a][b]
                if isinstance(entry, hd.HyperDual):
                    g[a, b] = entry.val
                    dg[c, a, b] = entry.d1
                    if second:
                        d2g[c, d, a, b] = entry.d12
                        d2g[d, c, a, b] = entry.d12
                        if c != d:
                            dg[d, a, b] = entry.d2
                else:
                    g[a, b] = entry
    if second:
        return g, dg, d2g
    return g, dg


def christoffel_eval(bg, p):
    """Christoffel symbols Gamma^lam_{mu nu} from hyper-dual derivatives."""
    validate_point(bg, p)
    g, dg = metric_jet(bg, p)
    ginv = np.linalg.inv(g)
    # Gamma^l_{mn} = (1/2) g^{ls} (d_m g_sn + d_n g_sm - d_s g_mn)
    gam = np.zeros((4, 4, 4))
    for lam in range(4):
        for mu in range(4):
            for nu in range(4):
                s = 0.0
                for sg in range(4):
                    s += ginv[lam, sg] * (dg[mu, sg, nu] + dg[nu, sg, mu]
                                          - dg[sg, mu, nu])
                gam[lam, mu, nu] = 0.5 * s
    return gam


# ---------------------------------------------------------------------------
# Identifications and mode admissibility data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeGenerators:
    """The two generating translations of the (t, phi) torus."""

    gen1: tuple
    gen2: tuple


def identification_lattice(bg):
    """Generators of the identification lattice acting on (t, phi)."""
    if bg.kind == KERR:
        k, Om = bg.kappa, bg.omega_horizon
        return LatticeGenerators((2.0 * math.pi / k, -2.0 * math.pi * Om / k),
                                 (0.0, 2.0 * math.pi))
    return LatticeGenerators((4.0 * math.pi, 0.0),
                             (2.0 * math.pi, 2.0 * math.pi))


# ---------------------------------------------------------------------------
# Chart regularity probes
# ---------------------------------------------------------------------------


@dataclass
class RegularityReport:
    which: str
    fitted_exponents: dict
    max_mismatch: float


def _loglog_slope(xs, ys):
    lx, ly = np.log(xs), np.log(ys)
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)


def _kerr_fixed_point_fit(bg):
    """Fit the vanishing rate of the regularized time circle as rt -> 0."""
    k, Om = bg.kappa, bg.omega_horizon
    root = math.sqrt(bg.M ** 2 + bg.a ** 2)
    rts = np.geomspace(1e-4, 1e-2, 25)
    vals = []
    theta = 1.1
    for rt in rts:
        r = bg.M + root * math.cosh(rt)
        p = ChartPoint(0.0, r, theta, 0.0)
        g = metric_eval(bg, p).g
        # d/dtt = (1/kappa) d/dt - (Omega/kappa) d/dphi
        gtt = (g[0, 0] - 2.0 * Om * g[0, 3] + Om * Om * g[3, 3]) / k ** 2
        vals.append(gtt / bg.sigma(r, theta))
    return _loglog_slope(rts, np.array(vals))


def _kerr_axis_fit(bg):
    r = bg.r_plus + 1.0
    sins = np.geomspace(1e-4, 1e-2, 25)
    vals = []
    for s in sins:
        theta = math.asin(s)
        p = ChartPoint(0.0, r, theta, 0.0)
        g = metric_eval(bg, p).g
        vals.append(g[3, 3] / bg.sigma(r, theta))
    return _loglog_slope(sins, np.array(vals))


def _bolt_circle_fit(bg):
    N = bg.N
    rts = np.geomspace(1e-4, 1e-2, 25)
    vals = []
    theta = 1.2
    for rt in rts:
        r = 0.25 * N * (5.0 + 3.0 * math.cosh(rt))
        p = ChartPoint(0.0, r, theta, 0.0)
        g = metric_eval(bg, p).g
        gtt = 4.0 * g[0, 0]          # t = 2*tt - phi
        vals.append(gtt / bg.sigma(r, theta))
    return _loglog_slope(rts, np.array(vals))


def _bolt_chart_jacobians(theta_tilde):
    """Coordinate Jacobians of the two regular Taub-bolt charts.

    Chart A: (tt, rt, th_t, phi) with t = 2 tt - phi, theta = 2 arctan(th_t/2).
    Chart B: (th, rt, th_h, phi) with t = 2 th + phi, theta = 2 arccot(th_h/2);
    matched points satisfy th = tt - phi, th_h = 4/th_t.
    """
    JA = np.zeros((4, 4))
    JA[0, 0] = 2.0
    JA[0, 3] = -1.0
    JA[1, 1] = 1.0
    JA[2, 2] = 1.0 / (1.0 + (theta_tilde / 2.0) ** 2)
    JA[3, 3] = 1.0

    theta_hat = 4.0 / theta_tilde
    JB = np.zeros((4, 4))
    JB[0, 0] = 2.0
    JB[0, 3] = 1.0
    JB[1, 1] = 1.0
    JB[2, 2] = -1.0 / (1.0 + (theta_hat / 2.0) ** 2)
    JB[3, 3] = 1.0
    return JA, JB, theta_hat


def _bolt_transition_mismatch(bg):
    """Compare pulled-back metric components of the two charts."""
    worst = 0.0
    for rt, th_t, phi in [(0.7, 1.3, 0.4), (1.1, 2.5, 1.9), (0.3, 0.8, 5.1)]:
        r = 0.25 * bg.N * (5.0 + 3.0 * math.cosh(rt))
        drdrt = 0.25 * bg.N * 3.0 * math.sinh(rt)
        theta = 2.0 * math.atan(th_t / 2.0)
        p = ChartPoint(0.0, r, theta, phi)
        g = metric_eval(bg, p).g

        JA, JB, th_h = _bolt_chart_jacobians(th_t)
        JA[1, 1] = drdrt
        JB[1, 1] = drdrt
        gA = JA.T @ g @ JA
        gB = JB.T @ g @ JB

        # transition (th, rt, th_h, phi) = (tt - phi, rt, 4/th_t, phi)
        T = np.array([[1.0, 0.0, 0.0, -1.0],
                      [0.0, 1.0, 0.0, 0.0],
                      [0.0, 0.0, -4.0 / th_t ** 2, 0.0],
                      [0.0, 0.0, 0.0, 1.0]])
        mismatch = np.max(np.abs(gA - T.T @ gB @ T)) / max(1.0, np.max(np.abs(gA)))
        worst = max(worst, mismatch)
    return worst


def chart_regularity_probe(bg, which):
    """Numerically probe smooth closure of the chart degeneracies.

    ``which`` is one of ``axis-fixed-point`` (Kerr), ``bolt`` or
    ``transition`` (Taub-bolt).
    """
    if bg.kind == KERR and which == "axis-fixed-point":
        return RegularityReport(which, {
            "time_circle_vs_rt": _kerr_fixed_point_fit(bg),
            "axis_circle_vs_sin_theta": _kerr_axis_fit(bg),
        }, 0.0)
    if bg.kind == TAUB_BOLT and which == "bolt":
        return RegularityReport(which, {
            "time_circle_vs_rt": _bolt_circle_fit(bg),
        }, 0.0)
    if bg.kind == TAUB_BOLT and which == "transition":
        return RegularityReport(which, {}, _bolt_transition_mismatch(bg))
    raise ValueError(f"probe {which!r} not defined for background {bg.kind!r}")
