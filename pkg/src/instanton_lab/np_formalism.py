"""Spin coefficients, Weyl scalars, and the full residual suite.

The complex tetrad (l, l_bar, m, m_bar) carries the Levi-Civita connection
in 24 spin coefficients; directional derivative operators along the legs
are written D, DEL (along l_bar), delta (along m) and delta_t (along
-m_bar).  Everything needed downstream is exposed both in closed form and
as metric-derived numerics, together with residual evaluations of every
commutation relation, vacuum field equation and Bianchi identity (tilded
versions included) so the background implementations can be certified
pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields, replace

import numpy as np

from . import hyperdual as hd
from .background import (KERR, TAUB_BOLT, christoffel_eval, metric_component_fn,
                         metric_jet, tetrad_component_fn, tetrad_eval,
                         validate_point)

COEFF_NAMES = ("alpha", "beta", "gamma", "epsilon", "kappa", "lam",
               "mu", "nu", "pi", "rho", "sigma", "tau")


@dataclass
class SpinCoefficientSet:
    """The 12 complex spin coefficients and their tilded partners."""

    alpha: complex = 0j
    beta: complex = 0j
    gamma: complex = 0j
    epsilon: complex = 0j
    kappa: complex = 0j
    lam: complex = 0j
    mu: complex = 0j
    nu: complex = 0j
    pi: complex = 0j
    rho: complex = 0j
    sigma: complex = 0j
    tau: complex = 0j
    alpha_t: complex = 0j
    beta_t: complex = 0j
    gamma_t: complex = 0j
    epsilon_t: complex = 0j
    kappa_t: complex = 0j
    lam_t: complex = 0j
    mu_t: complex = 0j
    nu_t: complex = 0j
    pi_t: complex = 0j
    rho_t: complex = 0j
    sigma_t: complex = 0j
    tau_t: complex = 0j

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}


@dataclass
class WeylScalarSet:
    psi0: complex = 0j
    psi1: complex = 0j
    psi2: complex = 0j
    psi3: complex = 0j
    psi4: complex = 0j
    psi0_t: complex = 0j
    psi1_t: complex = 0j
    psi2_t: complex = 0j
    psi3_t: complex = 0j
    psi4_t: complex = 0j

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}


def tilde_map(s):
    """Swap every quantity with its tilded partner (an involution)."""
    d = s.as_dict()
    swapped = {}
    for name, val in d.items():
        if name.endswith("_t"):
            swapped[name[:-2]] = val
        else:
            swapped[name + "_t"] = val
    return replace(s, **swapped)


class ExtractionError(RuntimeError):
    """Least-squares spin-coefficient extraction exceeded its residual gate."""


# ---------------------------------------------------------------------------
# Closed forms (adapted tetrads of both backgrounds)
# ---------------------------------------------------------------------------


def _zero_field(t, r, theta, phi):
    return 0j


def coefficient_field_fns(bg):
    """Closed-form scalar fields name -> f(t, r, theta, phi).

    Includes the 24 spin coefficients and the ten Weyl scalars (the
    vanishing ones as exact zeros).  All are hyper-dual capable.
    """
    out = {}
    if bg.kind == KERR:
        M, a = bg.M, bg.a

        def make(which):
            def f(t, r, theta, phi):
                sin = hd.sin(theta)
                cos = hd.cos(theta)
                Sig = r * r - a * a * cos * cos
                Del = (r - 2.0 * M) * r - a * a
                rm = r - a * cos
                rp = r + a * cos
                s2S = hd.sqrt(2.0 * Sig)
                if which == "alpha":
                    return (r * cos - a) / (rm * 2.0 * s2S * sin) + 0j
                if which == "gamma":
                    return 1j * (r - M - Del / rm) / (2.0 * hd.sqrt(2.0 * Del * Sig))
                if which == "mu":
                    return -1j * hd.sqrt(Del / (2.0 * Sig)) / rm
                if which == "pi":
                    return -a * sin / (rm * s2S) + 0j
                if which == "alpha_t":
                    return -(r * cos + a) / (rp * 2.0 * s2S * sin) + 0j
                if which == "gamma_t":
                    return 1j * (r - M - Del / rp) / (2.0 * hd.sqrt(2.0 * Del * Sig))
                if which == "mu_t":
                    return -1j * hd.sqrt(Del / (2.0 * Sig)) / rp
                if which == "pi_t":
                    return -a * sin / (rp * s2S) + 0j
                if which == "psi2":
                    return M / (rm * rm * rm) + 0j
                if which == "psi2_t":
                    return M / (rp * rp * rp) + 0j
                raise KeyError(which)
            return f

        pair_values = {
            "alpha": ("alpha", "beta"), "gamma": ("gamma", "epsilon"),
            "mu": ("mu", "rho"), "pi": ("pi", "tau"),
            "alpha_t": ("alpha_t", "beta_t"), "gamma_t": ("gamma_t", "epsilon_t"),
            "mu_t": ("mu_t", "rho_t"), "pi_t": ("pi_t", "tau_t"),
        }
        for key, names in pair_values.items():
            fn = make(key)
            for name in names:
                out[name] = fn
        for name in ("kappa", "lam", "nu", "sigma",
                     "kappa_t", "lam_t", "nu_t", "sigma_t"):
            out[name] = _zero_field
        out["psi2"] = make("psi2")
        out["psi2_t"] = make("psi2_t")
    else:
        N = bg.N

        def make(which):
            def f(t, r, theta, phi):
                sin = hd.sin(theta)
                cos = hd.cos(theta)
                Sig = r * r - N * N
                Del = (r - 2.5 * N) * r + N * N
                if which == "alpha":
                    return N * (r + N) ** 2 / (8.0 * Sig * hd.sqrt(2.0 * Del * Sig)) + 0j
                if which == "gamma":
                    return 1j * (cos / sin) / (2.0 * hd.sqrt(2.0 * Sig))
                if which == "pi":
                    return -(r + N) * hd.sqrt(Del / (2.0 * Sig)) / Sig + 0j
                if which == "alpha_t":
                    return -9.0 * N * (r - N) / (8.0 * (r + N) * hd.sqrt(2.0 * Del * Sig)) + 0j
                if which == "pi_t":
                    return hd.sqrt(Del / (2.0 * Sig)) / (r + N) + 0j
                if which == "psi2":
                    return N / (4.0 * (r - N) ** 3) + 0j
                if which == "psi2_t":
                    return 9.0 * N / (4.0 * (r + N) ** 3) + 0j
                raise KeyError(which)
            return f

        pair_values = {
            "alpha": ("alpha", "beta"),
            "gamma": ("gamma", "epsilon", "gamma_t", "epsilon_t"),
            "pi": ("pi", "tau"),
            "alpha_t": ("alpha_t", "beta_t"),
            "pi_t": ("pi_t", "tau_t"),
        }
        for key, names in pair_values.items():
            fn = make(key)
            for name in names:
                out[name] = fn
        for name in ("kappa", "lam", "mu", "nu", "rho", "sigma",
                     "kappa_t", "lam_t", "mu_t", "nu_t", "rho_t", "sigma_t"):
            out[name] = _zero_field
        out["psi2"] = make("psi2")
        out["psi2_t"] = make("psi2_t")

    for name in ("psi0", "psi1", "psi3", "psi4",
                 "psi0_t", "psi1_t", "psi3_t", "psi4_t"):
        out[name] = _zero_field
    return out


def spin_coeffs_closed(bg, p):
    """Closed-form spin coefficients at a point."""
    validate_point(bg, p)
    fns = coefficient_field_fns(bg)
    vals = {name: complex(fns[name](p.t, p.r, p.theta, p.phi))
            for name in SpinCoefficientSet().as_dict()}
    return SpinCoefficientSet(**vals)


def weyl_scalars_closed(bg, p):
    validate_point(bg, p)
    fns = coefficient_field_fns(bg)
    vals = {name: complex(fns[name](p.t, p.r, p.theta, p.phi))
            for name in WeylScalarSet().as_dict()}
    return WeylScalarSet(**vals)


# ---------------------------------------------------------------------------
# Curvature from hyper-dual metric derivatives
# ---------------------------------------------------------------------------


def riemann_lowered(bg, p):
    """Fully lowered Riemann tensor from two metric derivatives."""
    g, dg, d2g = metric_jet(bg, p, second=True)
    ginv = np.linalg.inv(g)
    gam = christoffel_eval(bg, p)
    gam_low = np.einsum("ef,fac->eac", g, gam)      # Gamma_{e,ac}
    R = np.zeros((4, 4, 4, 4))
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    term = 0.5 * (d2g[a, c, b, d] + d2g[b, d, a, c]
                                  - d2g[a, d, b, c] - d2g[b, c, a, d])
                    quad = 0.0
                    for e in range(4):
                        for f in range(4):
                            quad += ginv[e, f] * (gam_low[e, a, c] * gam_low[f, b, d]
                                                  - gam_low[e, a, d] * gam_low[f, b, c])
                    R[a, b, c, d] = term + quad
    return g, ginv, R


def weyl_lowered(bg, p):
    """Weyl tensor (vacuum check included) in the coordinate basis."""
    g, ginv, R = riemann_lowered(bg, p)
    ric = np.einsum("ac,abcd->bd", ginv, R)
    scal = np.einsum("bd,bd->", ginv, ric)
    C = R.copy()
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    C[a, b, c, d] -= 0.5 * (g[a, c] * ric[b, d] - g[a, d] * ric[b, c]
                                            - g[b, c] * ric[a, d] + g[b, d] * ric[a, c])
                    C[a, b, c, d] += (scal / 6.0) * (g[a, c] * g[b, d]
                                                     - g[a, d] * g[b, c])
    return g, C, ric


def weyl_scalars_numeric(bg, p):
    """Weyl scalars from the metric-derived curvature tensor."""
    validate_point(bg, p)
    _, C, _ = weyl_lowered(bg, p)
    tet = tetrad_eval(bg, p)
    l, lb, m, mb = tet.l, tet.l_bar, tet.m, tet.m_bar

    def W(x, y, z, v):
        return complex(np.einsum("abcd,a,b,c,d->", C, x, y, z, v))

    return WeylScalarSet(
        psi0=-W(l, m, l, m),
        psi1=-W(l, lb, l, m),
        psi2=W(l, m, lb, mb),
        psi3=W(l, lb, lb, mb),
        psi4=-W(lb, mb, lb, mb),
        psi0_t=-W(l, mb, l, mb),
        psi1_t=-W(l, lb, l, mb),
        psi2_t=W(l, mb, lb, m),
        psi3_t=W(l, lb, lb, m),
        psi4_t=-W(lb, m, lb, m),
    )


def ricci_max_abs(bg, p):
    """Max |Ric| as a vacuum sanity number."""
    _, _, ric = weyl_lowered(bg, p)
    return float(np.max(np.abs(ric)))


# ---------------------------------------------------------------------------
# Metric-derived spin coefficients
# ---------------------------------------------------------------------------


def _tetrad_jacobians(bg, p):
    """Tetrad components and their coordinate Jacobians at p.

    Returns (l, m, dl, dm) with dl[b][a] = d_b l^a (complex).
    """
    fn = tetrad_component_fn(bg)
    coords = (p.t, p.r, p.theta, p.phi)
    l = np.zeros(4, dtype=complex)
    m = np.zeros(4, dtype=complex)
    dl = np.zeros((4, 4), dtype=complex)
    dm = np.zeros((4, 4), dtype=complex)
    for b in range(4):
        seeded = list(coords)
        seeded[b] = hd.seed1(coords[b])
        lc, mc = fn(*seeded)
        for a in range(4):
            l[a] = hd.value(lc[a])
            m[a] = hd.value(mc[a])
            dl[b, a] = lc[a].d1 if isinstance(lc[a], hd.HyperDual) else 0.0
            dm[b, a] = mc[a].d1 if isinstance(mc[a], hd.HyperDual) else 0.0
    return l, m, dl, dm


def _covariant_covector(g, dg, gam, vec, dvec):
    """nabla_b X_a for a vector field given by components and Jacobian."""
    X_low = g @ vec
    out = np.zeros((4, 4), dtype=complex)
    for b in range(4):
        dX_low = dg[b] @ vec + g @ dvec[b]
        for a in range(4):
            acc = 0j
            for c in range(4):
                acc += gam[c, a, b] * X_low[c]
            out[b, a] = dX_low[a] - acc
    return out


# unknown ordering for the least-squares extraction
_DISPLAY_COEFFS = [
    ("gamma", "epsilon", "alpha", "beta"),
    ("nu", "pi", "lam", "mu"),
    ("tau", "kappa", "rho", "sigma"),
    ("gamma_t", "epsilon_t", "beta_t", "alpha_t"),
    ("nu_t", "pi_t", "mu_t", "lam_t"),
    ("tau_t", "kappa_t", "sigma_t", "rho_t"),
]
_DISPLAY_SIGNS = [
    (1, 1, -1, 1),
    (-1, -1, 1, -1),
    (1, 1, -1, 1),
    (1, 1, -1, 1),
    (1, 1, -1, 1),
    (-1, -1, 1, -1),
]


def spin_coeffs_numeric(bg, p, residual_gate=1e-6):
    """Extract all 24 spin coefficients from covariant tetrad derivatives.

    The six defining covector displays are solved against the tetrad
    co-basis by least squares; rows expressing constancy of the tetrad
    inner products are appended with zero design entries, so any metric
    incompatibility of the Christoffel symbols shows up in the fit
    residual instead of being averaged away.

    Raises
    ------
    ExtractionError
        If the stacked fit residual exceeds ``residual_gate``.
    """
    validate_point(bg, p)
    g, dg = metric_jet(bg, p)
    gam = christoffel_eval(bg, p)
    l, m, dl, dm = _tetrad_jacobians(bg, p)
    lb, mb = np.conj(l), np.conj(m)
    dlb, dmb = np.conj(dl), np.conj(dm)

    nab = {
        "l": _covariant_covector(g, dg, gam, l, dl),
        "lb": _covariant_covector(g, dg, gam, lb, dlb),
        "m": _covariant_covector(g, dg, gam, m, dm),
        "mb": _covariant_covector(g, dg, gam, mb, dmb),
    }
    vec = {"l": l, "lb": lb, "m": m, "mb": mb}

    def contract(u, key):
        # u^a nabla_b (key)_a, returned as a covector over b
        return nab[key] @ vec[u]

    # The tilded displays are the tilde images of the untilded ones under
    # m -> -m_bar, m_bar -> -m; in particular the fourth carries a minus.
    displays = [
        0.5 * (contract("lb", "l") - contract("m", "mb")),
        contract("lb", "mb"),
        contract("m", "l"),
        0.5 * (contract("lb", "l") - contract("mb", "m")),
        contract("lb", "m"),
        contract("mb", "l"),
    ]

    # co-basis covectors
    low = {k: g @ vec[k] for k in vec}
    basis = np.column_stack([low["l"], low["lb"], low["m"], low["mb"]])

    names = []
    rows = []
    rhs = []
    for disp_idx, display in enumerate(displays):
        coeff_names = _DISPLAY_COEFFS[disp_idx]
        signs = _DISPLAY_SIGNS[disp_idx]
        for name in coeff_names:
            names.append(name)
        for b in range(4):
            row = np.zeros(24, dtype=complex)
            for slot, (name, s) in enumerate(zip(coeff_names, signs)):
                row[disp_idx * 4 + slot] = s * basis[b, slot]
            rows.append(row)
            rhs.append(display[b])

    # metric-compatibility rows: pure residual detectors
    for u, k in [("l", "l"), ("lb", "lb"), ("m", "m"), ("mb", "mb")]:
        comp = contract(u, k)
        for b in range(4):
            rows.append(np.zeros(24, dtype=complex))
            rhs.append(comp[b])
    for (u1, k1), (u2, k2) in [(("l", "lb"), ("lb", "l")),
                               (("m", "mb"), ("mb", "m")),
                               (("m", "l"), ("l", "m")),
                               (("mb", "l"), ("l", "mb"))]:
        comp = contract(u1, k1) + contract(u2, k2)
        for b in range(4):
            rows.append(np.zeros(24, dtype=complex))
            rhs.append(comp[b])

    A = np.array(rows)
    y = np.array(rhs)
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit_residual = float(np.max(np.abs(A @ sol - y)))
    if fit_residual > residual_gate:
        raise ExtractionError(
            f"spin-coefficient extraction residual {fit_residual:.3g} "
            f"exceeds gate {residual_gate:.3g}")

    values = dict(zip(names, sol))
    return SpinCoefficientSet(**values), fit_residual


# ---------------------------------------------------------------------------
# Directional derivative environment and the equation suite
# ---------------------------------------------------------------------------


class PointFrame:
    """Cached tetrad legs, coefficient values and gradients at one point.

    Exposes the four directional operators acting on named closed-form
    fields; the ``tilded`` view renames every field to its partner and
    swaps delta with delta_t, which is exactly the tilde operation on
    equations.
    """

    def __init__(self, bg, p):
        validate_point(bg, p)
        self.bg = bg
        self.p = p
        self.fields = coefficient_field_fns(bg)
        self._grad_cache = {}
        self._val_cache = {}
        l, m, dl, dm = _tetrad_jacobians(bg, p)
        self.legs = {"l": l, "lb": np.conj(l), "m": m, "mb": np.conj(m)}
        self.jac = {"l": dl, "lb": np.conj(dl), "m": dm, "mb": np.conj(dm)}

    def value(self, name):
        if name not in self._val_cache:
            f = self.fields[name]
            self._val_cache[name] = complex(
                f(self.p.t, self.p.r, self.p.theta, self.p.phi))
        return self._val_cache[name]

    def grad(self, name):
        if name not in self._grad_cache:
            _, grad = hd.gradient4(self.fields[name],
                                   (self.p.t, self.p.r, self.p.theta, self.p.phi))
            self._grad_cache[name] = np.array(grad, dtype=complex)
        return self._grad_cache[name]

    def directional(self, leg_key, name, sign=1.0):
        return sign * complex(self.legs[leg_key] @ self.grad(name))


class EquationView:
    """Untilded or tilded view of the coefficient fields and operators."""

    def __init__(self, frame, tilded=False):
        self.frame = frame
        self.tilded = tilded

    def _map(self, name):
        if not self.tilded:
            return name
        return name[:-2] if name.endswith("_t") else name + "_t"

    def c(self, name):
        return self.frame.value(self._map(name))

    # directional operators on named fields; delta_t acts along -m_bar
    def D(self, name):
        return self.frame.directional("l", self._map(name))

    def DEL(self, name):
        return self.frame.directional("lb", self._map(name))

    def delta(self, name):
        key = "mb" if self.tilded else "m"
        sign = -1.0 if self.tilded else 1.0
        return self.frame.directional(key, self._map(name), sign)

    def delta_t(self, name):
        key = "m" if self.tilded else "mb"
        sign = 1.0 if self.tilded else -1.0
        return self.frame.directional(key, self._map(name), sign)


def _vacuum_equations():
    """The ten vacuum field equations as (name, lhs - rhs) callables."""
    E = []

    E.append(("D_alpha", lambda v:
              v.D("alpha") - v.delta_t("epsilon")
              - (-v.c("beta_t") * v.c("epsilon") - v.c("gamma") * v.c("kappa_t")
                 - v.c("kappa") * v.c("lam")
                 + v.c("pi") * (v.c("epsilon") + v.c("rho"))
                 + v.c("alpha") * (-2 * v.c("epsilon") + v.c("epsilon_t") + v.c("rho"))
                 + v.c("beta") * v.c("sigma_t"))))
    E.append(("D_beta", lambda v:
              v.D("beta") - v.delta("epsilon")
              - (v.c("psi1") - v.c("alpha_t") * v.c("epsilon")
                 - v.c("kappa") * (v.c("gamma") + v.c("mu"))
                 + v.c("epsilon") * v.c("pi_t")
                 + v.c("beta") * (-v.c("epsilon_t") + v.c("rho_t"))
                 + (v.c("alpha") + v.c("pi")) * v.c("sigma"))))
    E.append(("D_gamma", lambda v:
              v.D("gamma") - v.DEL("epsilon")
              - (v.c("psi2") - v.c("gamma_t") * v.c("epsilon")
                 - v.c("gamma") * (2 * v.c("epsilon") + v.c("epsilon_t"))
                 - v.c("kappa") * v.c("nu")
                 + v.c("pi") * (v.c("beta") + v.c("tau"))
                 + v.c("alpha") * (v.c("pi_t") + v.c("tau"))
                 + v.c("beta") * v.c("tau_t"))))
    E.append(("D_lambda", lambda v:
              v.D("lam") - v.delta_t("pi")
              - (-v.c("kappa_t") * v.c("nu")
                 + v.c("pi") * (v.c("alpha") - v.c("beta_t") + v.c("pi"))
                 + v.c("lam") * (-3 * v.c("epsilon") + v.c("epsilon_t") + v.c("rho"))
                 + v.c("mu") * v.c("sigma_t"))))
    E.append(("D_rho", lambda v:
              v.D("rho") - v.delta_t("kappa")
              - (v.c("kappa") * (-3 * v.c("alpha") - v.c("beta_t") + v.c("pi"))
                 + v.c("rho") * (v.c("epsilon") + v.c("epsilon_t") + v.c("rho"))
                 + v.c("sigma") * v.c("sigma_t")
                 - v.c("kappa_t") * v.c("tau"))))
    E.append(("D_sigma", lambda v:
              v.D("sigma") - v.delta("kappa")
              - (v.c("psi0")
                 + (3 * v.c("epsilon") - v.c("epsilon_t") + v.c("rho") + v.c("rho_t"))
                 * v.c("sigma")
                 - v.c("kappa") * (v.c("alpha_t") + 3 * v.c("beta")
                                   - v.c("pi_t") + v.c("tau")))))
    E.append(("D_tau", lambda v:
              v.D("tau") - v.DEL("kappa")
              - (v.c("psi1") - (3 * v.c("gamma") + v.c("gamma_t")) * v.c("kappa")
                 + v.c("pi_t") * v.c("rho")
                 + (v.c("epsilon") - v.c("epsilon_t") + v.c("rho")) * v.c("tau")
                 + v.c("sigma") * (v.c("pi") + v.c("tau_t")))))
    E.append(("DEL_rho", lambda v:
              v.DEL("rho") - v.delta_t("tau")
              - (-v.c("psi2") + v.c("kappa") * v.c("nu")
                 + (v.c("gamma") + v.c("gamma_t") - v.c("mu_t")) * v.c("rho")
                 - v.c("lam") * v.c("sigma")
                 - v.c("tau") * (v.c("alpha") - v.c("beta_t") + v.c("tau_t")))))
    E.append(("delta_alpha", lambda v:
              v.delta("alpha") - v.delta_t("beta")
              - (-v.c("psi2") + v.c("alpha") * (v.c("alpha_t") - 2 * v.c("beta"))
                 + v.c("beta") * v.c("beta_t")
                 + v.c("epsilon") * (v.c("mu") - v.c("mu_t"))
                 + (v.c("gamma") + v.c("mu")) * v.c("rho")
                 - v.c("gamma") * v.c("rho_t")
                 - v.c("lam") * v.c("sigma"))))
    E.append(("delta_rho", lambda v:
              v.delta("rho") - v.delta_t("sigma")
              - (-v.c("psi1") + v.c("kappa") * (v.c("mu") - v.c("mu_t"))
                 + (v.c("alpha_t") + v.c("beta")) * v.c("rho")
                 + (-3 * v.c("alpha") + v.c("beta_t")) * v.c("sigma")
                 + (v.c("rho") - v.c("rho_t")) * v.c("tau"))))
    return E


def _bianchi_equations():
    E = []
    E.append(("bianchi_psi0_inner", lambda v:
              v.delta_t("psi0") - v.D("psi1")
              - ((4 * v.c("alpha") - v.c("pi")) * v.c("psi0")
                 - 2 * (v.c("epsilon") + 2 * v.c("rho")) * v.c("psi1")
                 + 3 * v.c("kappa") * v.c("psi2"))))
    E.append(("bianchi_psi1_inner", lambda v:
              v.delta_t("psi1") - v.D("psi2")
              - (v.c("lam") * v.c("psi0")
                 + 2 * (v.c("alpha") - v.c("pi")) * v.c("psi1")
                 - 3 * v.c("rho") * v.c("psi2")
                 + 2 * v.c("kappa") * v.c("psi3"))))
    E.append(("bianchi_psi0_outer", lambda v:
              v.DEL("psi0") - v.delta("psi1")
              - (4 * v.c("gamma") * v.c("psi0") - v.c("mu") * v.c("psi0")
                 - 2 * (v.c("beta") + 2 * v.c("tau")) * v.c("psi1")
                 + 3 * v.c("sigma") * v.c("psi2"))))
    E.append(("bianchi_psi1_outer", lambda v:
              v.DEL("psi1") - v.delta("psi2")
              - (v.c("nu") * v.c("psi0")
                 + 2 * (v.c("gamma") - v.c("mu")) * v.c("psi1")
                 - 3 * v.c("tau") * v.c("psi2")
                 + 2 * v.c("sigma") * v.c("psi3"))))
    return E


def _commutator_residuals(frame, tilded):
    """Residuals of the four commutation relations applied to coordinates.

    A commutator of first-order operators is fixed by its action on the
    chart coordinates, so both sides are evaluated on t, r, theta, phi.
    """
    v = EquationView(frame, tilded)
    legs, jac = frame.legs, frame.jac

    def swap(key):
        if not tilded:
            return key
        return {"l": "l", "lb": "lb", "m": "mb", "mb": "m"}[key]

    def op_vec(name):
        # operator as (vector components, sign): delta_t acts along -m_bar
        if name == "D":
            return legs[swap("l")], 1.0
        if name == "DEL":
            return legs[swap("lb")], 1.0
        if name == "delta":
            return (legs["mb"], -1.0) if tilded else (legs["m"], 1.0)
        if name == "delta_t":
            return (legs["m"], 1.0) if tilded else (legs["mb"], -1.0)
        raise KeyError(name)

    def op_jac(name):
        if name == "D":
            return jac[swap("l")], 1.0
        if name == "DEL":
            return jac[swap("lb")], 1.0
        if name == "delta":
            return (jac["mb"], -1.0) if tilded else (jac["m"], 1.0)
        if name == "delta_t":
            return (jac["m"], 1.0) if tilded else (jac["mb"], -1.0)
        raise KeyError(name)

    def commutator_on_coords(n1, n2):
        X, sX = op_vec(n1)
        Y, sY = op_vec(n2)
        JX, _ = op_jac(n1)
        JY, _ = op_jac(n2)
        # [X, Y]^c = X^b d_b Y^c - Y^b d_b X^c (times operator signs)
        return sX * sY * (X @ JY - Y @ JX)

    def rhs_vector(cD, cDEL, cdelta, cdelta_t):
        X_D, sD = op_vec("D")
        X_DE, sDE = op_vec("DEL")
        X_d, sd = op_vec("delta")
        X_dt, sdt = op_vec("delta_t")
        return (cD * sD * X_D + cDEL * sDE * X_DE
                + cdelta * sd * X_d + cdelta_t * sdt * X_dt)

    out = {}
    suffix = "_tilde" if tilded else ""

    lhs = commutator_on_coords("D", "DEL")
    rhs = rhs_vector(-(v.c("gamma") + v.c("gamma_t")),
                     -(v.c("epsilon") + v.c("epsilon_t")),
                     v.c("pi") + v.c("tau_t"),
                     v.c("pi_t") + v.c("tau"))
    out["commutator_D_DEL" + suffix] = float(np.max(np.abs(lhs - rhs)))

    lhs = commutator_on_coords("D", "delta")
    rhs = rhs_vector(-(v.c("alpha_t") + v.c("beta") - v.c("pi_t")),
                     -v.c("kappa"),
                     v.c("epsilon") - v.c("epsilon_t") + v.c("rho_t"),
                     v.c("sigma"))
    out["commutator_D_delta" + suffix] = float(np.max(np.abs(lhs - rhs)))

    lhs = commutator_on_coords("DEL", "delta")
    rhs = rhs_vector(v.c("nu_t"),
                     v.c("alpha_t") + v.c("beta") - v.c("tau"),
                     v.c("gamma") - v.c("gamma_t") - v.c("mu"),
                     -v.c("lam_t"))
    out["commutator_DEL_delta" + suffix] = float(np.max(np.abs(lhs - rhs)))

    lhs = commutator_on_coords("delta", "delta_t")
    rhs = rhs_vector(v.c("mu") - v.c("mu_t"),
                     v.c("rho") - v.c("rho_t"),
                     -v.c("alpha") + v.c("beta_t"),
                     v.c("alpha_t") - v.c("beta"))
    out["commutator_delta_deltat" + suffix] = float(np.max(np.abs(lhs - rhs)))
    return out


@dataclass
class NPResidualReport:
    commutators: dict
    vacuum: dict
    bianchi: dict

    @property
    def max_residual(self):
        groups = (self.commutators, self.vacuum, self.bianchi)
        return max(max(d.values()) for d in groups)

    def as_dict(self):
        return {"commutators": self.commutators, "vacuum": self.vacuum,
                "bianchi": self.bianchi, "max_residual": self.max_residual}


def np_residuals(bg, p):
    """Residuals of every structure equation (and tilded version) at p."""
    frame = PointFrame(bg, p)
    commutators = {}
    vacuum = {}
    bianchi = {}
    for tilded in (False, True):
        suffix = "_tilde" if tilded else ""
        commutators.update(_commutator_residuals(frame, tilded))
        view = EquationView(frame, tilded)
        for name, fn in _vacuum_equations():
            vacuum[name + suffix] = abs(fn(view))
        for name, fn in _bianchi_equations():
            bianchi[name + suffix] = abs(fn(view))
    return NPResidualReport(commutators, vacuum, bianchi)


def _operator_vectors(frame, tilded):
    """Vectors and Jacobians of D, DEL, delta, delta_t with tilde applied.

    The tilde operation fixes D and DEL and swaps delta (along m) with
    delta_t (along -m_bar).
    """
    legs, jac = frame.legs, frame.jac

    def pick(name):
        if name == "D":
            return legs["l"], jac["l"], 1.0
        if name == "DEL":
            return legs["lb"], jac["lb"], 1.0
        if name == "delta":
            return ((legs["mb"], jac["mb"], -1.0) if tilded
                    else (legs["m"], jac["m"], 1.0))
        if name == "delta_t":
            return ((legs["m"], jac["m"], 1.0) if tilded
                    else (legs["mb"], jac["mb"], -1.0))
        raise KeyError(name)

    return pick


def decoupled_operator_apply(bg, f_fn, p, tilded=False):
    """Apply the decoupled extreme-weight perturbation operator to a field.

    This is the second-order tetrad-form operator

        (D - 3 eps + eps~ - rho~ - 4 rho)(DEL - 4 gamma + mu)
        - (delta - alpha~ - 3 beta + pi~ - 4 tau)(delta_t - 4 alpha + pi)
        - 3 Psi2

    (or its tilded version) evaluated through hyper-dual derivatives of
    ``f_fn``.  Used to verify numerically that it is proportional to the
    separated coordinate operator acting on ``Psi2^(-2/3) f``.
    """
    frame = PointFrame(bg, p)
    view = EquationView(frame, tilded)
    pick = _operator_vectors(frame, tilded)
    coords = (p.t, p.r, p.theta, p.phi)
    F, G, H = hd.hessian4(f_fn, coords)
    G = np.array(G, dtype=complex)
    H = np.array(H, dtype=complex)

    def first(op_name):
        X, _, s = pick(op_name)
        return s * (X @ G)

    def second(outer, inner):
        X1, _, s1 = pick(outer)
        X2, J2, s2 = pick(inner)
        return s1 * s2 * (X1 @ H @ X2 + (X1 @ J2) @ G)

    c1 = (-3 * view.c("epsilon") + view.c("epsilon_t")
          - view.c("rho_t") - 4 * view.c("rho"))
    w1 = -4 * view.c("gamma") + view.c("mu")
    # directional derivative of the first-order weight along D
    Dw1 = -4 * view.D("gamma") + view.D("mu")
    term1 = (second("D", "DEL") + Dw1 * F + w1 * first("D")
             + c1 * (first("DEL") + w1 * F))

    c2 = (-view.c("alpha_t") - 3 * view.c("beta")
          + view.c("pi_t") - 4 * view.c("tau"))
    w2 = -4 * view.c("alpha") + view.c("pi")
    dw2 = -4 * view.delta("alpha") + view.delta("pi")
    term2 = (second("delta", "delta_t") + dw2 * F + w2 * first("delta")
             + c2 * (first("delta_t") + w2 * F))

    return term1 - term2 - 3 * view.c("psi2") * F


def a1_identity_check(bg, p, tilded=False):
    """|A1| where A1 multiplies the residual first-derivative term in the
    decoupling of the extreme-weight perturbation equation.

    The combination vanishes identically on adapted backgrounds as a
    consequence of three vacuum equations; its numerical size is a direct
    probe of the coefficient implementation.
    """
    frame = PointFrame(bg, p)
    v = EquationView(frame, tilded)

    prod1 = (-3 * v.c("epsilon") + v.c("epsilon_t") - v.c("rho_t") - 4 * v.c("rho")) \
        * (-4 * v.c("tau") - 2 * v.c("beta"))
    prod2 = (-v.c("alpha_t") - 3 * v.c("beta") + v.c("pi_t") - 4 * v.c("tau")) \
        * (-4 * v.c("rho") - 2 * v.c("epsilon"))
    deriv = (4 * v.D("tau") + 2 * v.D("beta")) - (4 * v.delta("rho") + 2 * v.delta("epsilon"))
    return abs(prod1 - prod2 - deriv)
