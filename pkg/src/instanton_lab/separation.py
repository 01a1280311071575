"""Mode lattices, separated potentials, and the 4-dimensional operators.

A mode is a Fourier factor ``exp(i(m*phi - omega*t))`` on the (t, phi)
torus; admissibility means invariance under both identification
generators.  For Kerr the source statement of the frequency lattice
("Omega + kappa Z", no m dependence) differs from what invariance of the
Fourier factor under the stated identifications yields
("-m*Omega + kappa Z"); both conventions are implemented and they agree
at a = 0 and at m = -1.

The separated radial/angular potentials U, V (and the Taub-bolt tilded
Utilde) are closed forms; ``lop_apply`` evaluates the full 4-dimensional
operator on arbitrary fields through hyper-dual derivatives so the
separation identity can be checked without assuming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import hyperdual as hd
from .background import KERR, TAUB_BOLT, validate_point

INVARIANCE = "invariance"
PAPER_LATTICE = "paper"


class PoleError(ZeroDivisionError):
    """Potential evaluated at a non-removable singular location."""


@dataclass(frozen=True)
class ModeIndex:
    """Admissible mode data: azimuthal number, frequency, and optionally a
    separation constant.

    ``n`` is the lattice integer; for Kerr ``omega_coeff`` records the
    exact rational multiple of Omega entering omega, so lattice membership
    can be certified without floating-point arithmetic.
    """

    kind: str
    m: float
    omega: float
    Lambda: float | None = None
    n: int | None = None
    omega_coeff: Fraction | None = None
    convention: str = INVARIANCE

    def with_lambda(self, lam):
        return ModeIndex(self.kind, self.m, self.omega, float(lam),
                         self.n, self.omega_coeff, self.convention)


def _as_half_integer(x, tol=1e-9):
    q = Fraction(round(2.0 * x), 2)
    if abs(float(q) - x) > tol:
        return None
    return q


def kerr_omega(bg, m, n, convention=INVARIANCE):
    """Frequency of the n-th lattice mode for azimuthal number m."""
    if convention == INVARIANCE:
        return -m * bg.omega_horizon + n * bg.kappa
    if convention == PAPER_LATTICE:
        return bg.omega_horizon + n * bg.kappa
    raise ValueError(f"unknown lattice convention {convention!r}")


def mode_lattice(bg, m_values, n_range, convention=INVARIANCE):
    """Emit the (m, omega) pairs invariant under both identifications.

    Parameters
    ----------
    bg : Background
    m_values : iterable
        Azimuthal numbers; integers for Kerr, half-integers for Taub-bolt.
    n_range : iterable of int
        Lattice integers indexing the frequency within each m column.
    convention : str
        Kerr only; ``invariance`` derives omega from invariance of the
        Fourier factor, ``paper`` reproduces the stated "Omega + kappa Z".
    """
    out = []
    if bg.kind == KERR:
        for m in m_values:
            if round(m) != m:
                raise ValueError("Kerr azimuthal numbers are integers")
            for n in n_range:
                coeff = Fraction(-int(m), 1) if convention == INVARIANCE else Fraction(1)
                out.append(ModeIndex(KERR, float(m), kerr_omega(bg, m, n, convention),
                                     None, int(n), coeff, convention))
        return out
    for m in m_values:
        mq = _as_half_integer(m)
        if mq is None:
            raise ValueError("Taub-bolt azimuthal numbers are half-integers")
        for n in n_range:
            omega = mq + n
            out.append(ModeIndex(TAUB_BOLT, float(mq), float(omega), None, int(n)))
    return out


def lattice_contains(bg, m, omega, convention=INVARIANCE, tol=1e-9):
    """Exact membership test for a single (m, omega) pair.

    Taub-bolt admissibility (invariance under (t+4pi, phi) and
    (t+2pi, phi+2pi)) amounts to 2*omega and m-omega being integers; both
    are checked in exact rational arithmetic after snapping the float
    inputs.  For Kerr the check factors through the lattice integer.
    """
    if bg.kind == TAUB_BOLT:
        mq = _as_half_integer(m, tol)
        oq = _as_half_integer(omega, tol)
        if mq is None or oq is None:
            return False
        return (2 * oq).denominator == 1 and (mq - oq).denominator == 1
    if round(m) != m:
        return False
    base = -m * bg.omega_horizon if convention == INVARIANCE else bg.omega_horizon
    n = (omega - base) / bg.kappa
    return abs(n - round(n)) < tol


def invariance_phases(bg, mode):
    """The two identification phases of exp(i(m phi - omega t)) / (2 pi).

    Both must be integers for an admissible mode; returned as floats so
    tests can assert integrality to rounding.
    """
    from .background import identification_lattice
    gens = identification_lattice(bg)
    out = []
    for dt, dphi in (gens.gen1, gens.gen2):
        out.append((mode.m * dphi - mode.omega * dt) / (2.0 * math.pi))
    return tuple(out)


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


def potential_u(bg, mode, r, tilded=False, Lambda=None):
    """Radial potential U (or the Taub-bolt tilded variant) at radius r.

    Kerr has no separate tilded potential: the tilded problem is carried
    by the same separated operators (the theta-reflection symmetry maps
    the two curvature structures into each other).
    """
    lam = mode.Lambda if Lambda is None else Lambda
    if lam is None:
        raise ValueError("mode carries no separation constant Lambda")
    m, omega = mode.m, mode.omega
    if bg.kind == KERR:
        if tilded:
            raise ValueError("Kerr has no tilded radial potential")
        M, a = bg.M, bg.a
        Del = bg.delta(r)
        if Del == 0:
            raise PoleError("U evaluated at a root of Delta")
        G = (r * r - a * a) * omega + a * m + 2.0 * (r - M)
        return -G * G / Del + 8.0 * r * omega - lam
    N = bg.N
    Del = bg.delta(r)
    if Del == 0 or r == N:
        raise PoleError("U evaluated at a singular radius")
    Sig = r * r - N * N
    if not tilded:
        h = N * (4.0 * r * r - 11.0 * N * r + 3.0 * N * N) / (Sig * (r - N))
        return (-4.0 * N * (r + N) / (r - N) ** 2
                - (Sig * Sig / (4.0 * N * N * Del)) * (omega + h) ** 2 - lam)
    h = N * (4.0 * r * r - 19.0 * N * r + 13.0 * N * N) / (Sig * (r + N))
    return (-36.0 * N * (r - N) / (r + N) ** 2
            - (Sig * Sig / (4.0 * N * N * Del)) * (omega - h) ** 2 - lam)


def angular_bracket(bg, mode, x):
    """The factor whose square forms the singular part of V."""
    if bg.kind == KERR:
        return bg.a * mode.omega * (1.0 - x * x) - mode.m + 2.0 * x
    return (mode.omega + 2.0) * x + mode.m


def potential_v(bg, mode, x, Lambda=None, tilded=False):
    """Angular potential V(x), x = cos(theta), with analytic limits at x = +-1.

    At an endpoint the value is finite exactly when the bracket vanishes
    there; the limit is computed from the factored numerator rather than
    numerically.  The Taub-bolt tilded equation shares V; the Kerr tilded
    one carries the reflected potential V(-x).
    """
    lam = mode.Lambda if Lambda is None else Lambda
    if lam is None:
        raise ValueError("mode carries no separation constant Lambda")
    if tilded:
        if bg.kind != KERR:
            return potential_v(bg, mode, x, Lambda=lam)
        return potential_v(bg, mode, -x, Lambda=lam)
    aw = bg.a * mode.omega if bg.kind == KERR else 0.0
    if x == 1.0 or x == -1.0:
        if abs(angular_bracket(bg, mode, x)) > 1e-13:
            raise PoleError(f"V has a pole at x={x}")
        return 8.0 * aw * x + lam
    F = angular_bracket(bg, mode, x)
    return 8.0 * aw * x - F * F / (1.0 - x * x) + lam


# ---------------------------------------------------------------------------
# The 4-dimensional separated operators
# ---------------------------------------------------------------------------


def lop_apply(bg, phi_fn, p, tilded=False):
    """Apply the separated 4-dimensional operator to a field at a point.

    ``phi_fn(t, r, theta, phi)`` must be hyper-dual capable and may be
    complex.  Only second derivatives of the field enter; the operator
    coefficients are closed forms.

    For Kerr the first-order radial bracket is taken with ``-2i(r - M)``:
    with the mode convention ``exp(i(m phi - omega t))`` this is the sign
    consistent with the closed-form U and with the U+V decomposition
    identity, and it makes the separation residual vanish identically.
    """
    validate_point(bg, p)
    if bg.kind == KERR and tilded:
        # The tilded Kerr operator is the theta-reflection conjugate of the
        # untilded one (verified against the tetrad-form operator); there is
        # no separate radial potential.
        def reflected(t, r, theta, phi):
            return phi_fn(t, r, math.pi - theta, phi)

        from .background import ChartPoint
        p_reflected = ChartPoint(p.t, p.r, math.pi - p.theta, p.phi)
        return lop_apply(bg, reflected, p_reflected, tilded=False)

    coords = (p.t, p.r, p.theta, p.phi)
    F, G, H = hd.hessian4(phi_fn, coords)
    t, r, theta, phi = coords
    sin, cos = math.sin(theta), math.cos(theta)
    Del = bg.delta(r)
    Delp = bg.delta_prime(r)

    radial = Del * H[1][1] + Delp * G[1]
    angular = H[2][2] + (cos / sin) * G[2]

    if bg.kind == KERR:
        M, a = bg.M, bg.a
        A, B, C = r * r - a * a, -a, -2j * (r - M)
        box_r = (A * A * H[0][0] + 2.0 * A * B * H[0][3] + B * B * H[3][3]
                 + 2.0 * C * (A * G[0] + B * G[3]) + C * C * F)
        A2, C2 = a * sin * sin, -2j * cos
        box_th = (A2 * A2 * H[0][0] + 2.0 * A2 * H[0][3] + H[3][3]
                  + 2.0 * C2 * (A2 * G[0] + G[3]) + C2 * C2 * F)
        first_order = 8j * (r + a * cos) * G[0]
        return (radial + box_r / Del + first_order + angular
                + box_th / (sin * sin))

    N = bg.N
    Sig = r * r - N * N
    if not tilded:
        h = N * (4.0 * r * r - 11.0 * N * r + 3.0 * N * N) / (Sig * (r - N))
        pot0 = -4.0 * N * (r + N) / (r - N) ** 2
        box_r = H[0][0] - 2j * h * G[0] - h * h * F
    else:
        h = N * (4.0 * r * r - 19.0 * N * r + 13.0 * N * N) / (Sig * (r + N))
        pot0 = -36.0 * N * (r - N) / (r + N) ** 2
        box_r = H[0][0] + 2j * h * G[0] - h * h * F
    A3, B3, C3 = cos, -1.0, -2j * cos
    box_th = (A3 * A3 * H[0][0] + 2.0 * A3 * B3 * H[0][3] + B3 * B3 * H[3][3]
              + 2.0 * C3 * (A3 * G[0] + B3 * G[3]) + C3 * C3 * F)
    return (radial + pot0 * F + (Sig * Sig / (4.0 * N * N * Del)) * box_r
            + angular + box_th / (sin * sin))


def mode_field(mode, R_fn, S_fn):
    """Assemble Phi = exp(i(m phi - omega t)) R(r) S(theta) as a field."""
    m, omega = mode.m, mode.omega

    def phi_fn(t, r, theta, phi):
        return hd.exp(1j * (m * phi - omega * t)) * R_fn(r) * S_fn(theta)

    return phi_fn


def radial_operator_apply(bg, mode, R_fn, r, tilded=False, Lambda=None):
    """(d/dr Delta d/dr + U) applied to a radial test function."""
    R, dR, d2R = hd.derive2(R_fn, r)
    return (bg.delta(r) * d2R + bg.delta_prime(r) * dR
            + potential_u(bg, mode, r, tilded=tilded, Lambda=Lambda) * R)


def angular_operator_apply(bg, mode, S_fn, theta, Lambda=None, tilded=False):
    """(1/sin d/dtheta sin d/dtheta + V(cos theta)) on a test function."""
    S, dS, d2S = hd.derive2(S_fn, theta)
    x = math.cos(theta)
    return (d2S + (x / math.sin(theta)) * dS
            + potential_v(bg, mode, x, Lambda=Lambda, tilded=tilded) * S)


def separation_consistency(bg, mode, R_fn, S_fn, p, tilded=False):
    """Residual of  L Phi = e^{i(m phi - omega t)} (S * R-part + R * S-part).

    Vanishes identically for any smooth test pair (R, S); the separation
    constant cancels between the two potentials, so Lambda = 0 is used.
    The Kerr tilded radial part uses the untilded U (reflection symmetry).
    """
    phi_fn = mode_field(mode, R_fn, S_fn)
    lhs = complex(lop_apply(bg, phi_fn, p, tilded=tilded))
    phase = complex(hd.exp(1j * (mode.m * p.phi - mode.omega * p.t)))
    radial_tilded = tilded and bg.kind != KERR
    rr = complex(radial_operator_apply(bg, mode, R_fn, p.r,
                                       tilded=radial_tilded, Lambda=0.0))
    ss = complex(angular_operator_apply(bg, mode, S_fn, p.theta,
                                        Lambda=0.0, tilded=tilded))
    S_val = complex(hd.value(S_fn(p.theta)))
    R_val = complex(hd.value(R_fn(p.r)))
    rhs = phase * (S_val * rr + R_val * ss)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# The Kerr three-term decomposition of U + V
# ---------------------------------------------------------------------------


def uv_decomposition(bg, mode, r, x):
    """Closed-form three-term split of U(r) + V(x) for Kerr.

    Each term is manifestly non-positive on r > r_plus, |x| < 1; the first
    is strictly negative because r_plus > |a|.  Returns the terms, their
    sum, the direct U + V value, and the identity residual.
    """
    if bg.kind != KERR:
        raise ValueError("the decomposition is a Kerr identity")
    M, a, m, w = bg.M, bg.a, mode.m, mode.omega
    Del = bg.delta(r)
    DelA = Del + (1.0 - x * x) * a * a
    t1 = -16.0 * M * (r + a * x) / (r - a * x) ** 2
    n2 = (a * a * x * (m * x - 2.0)
          + 2.0 * a * (x * x - 1.0) * (M * (r * w - 1.0) + r)
          + r * (m - 2.0 * x) * (2.0 * M - r))
    t2 = -n2 * n2 / ((1.0 - x * x) * DelA * Del)
    n3 = (2.0 * M * (a * x + 3.0 * r)
          + (r - a * x) * (r + a * x) * (-a * x * w + r * w - 2.0))
    t3 = -n3 * n3 / ((r - a * x) ** 2 * DelA)
    total = t1 + t2 + t3
    direct = potential_u(bg, mode, r, Lambda=0.0) + potential_v(bg, mode, x, Lambda=0.0)
    return {
        "terms": (t1, t2, t3),
        "sum": total,
        "u_plus_v": direct,
        "residual": abs(total - direct),
    }
