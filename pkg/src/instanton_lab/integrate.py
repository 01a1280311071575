"""Adaptive ODE integration and quadrature kernels.

Thin wrappers around scipy's embedded Runge-Kutta 5(4) integrator and
adaptive quadrature, fixing the conventions used throughout the package:
dense output is always available, integration failures raise with the
failure location, and improper integrals over ``[r0, inf)`` are computed
through the substitution ``r = r0 + exp(u)`` with truncation once the
transformed integrand is negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad as _scipy_quad
from scipy.integrate import solve_ivp


class IntegrationError(RuntimeError):
    """Adaptive integration failed; carries the failure location."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class QuadratureError(RuntimeError):
    """Quadrature did not converge to the requested tolerance."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and step bound for the embedded RK5(4) integrator."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    method: str = "RK45"

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol < 0:
            raise ValueError("tolerances must be positive")


DEFAULT_CONFIG = IntegratorConfig()


def ode_solve(system, x_span, y0, cfg=DEFAULT_CONFIG, x_eval=None):
    """Integrate ``y' = system(x, y)`` over ``x_span`` with dense output.

    Parameters
    ----------
    system : callable
        Right-hand side ``f(x, y) -> dy/dx``; may be complex valued.
    x_span : (float, float)
        Integration range; may be decreasing.
    y0 : array_like
        Initial state at ``x_span[0]``.
    cfg : IntegratorConfig
        Local error tolerances.
    x_eval : array_like, optional
        Sample points for the returned trajectory.

    Returns
    -------
    scipy.integrate.OdeResult
        With ``.sol`` dense output attached.

    Raises
    ------
    IntegrationError
        On step-size underflow or other solver failure, with the radial
        location where the step failed.
    """
    y0 = np.asarray(y0)
    result = solve_ivp(
        system,
        x_span,
        y0,
        method=cfg.method,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        dense_output=True,
        t_eval=None if x_eval is None else np.asarray(x_eval, dtype=float),
    )
    if not result.success:
        where = result.t[-1] if result.t.size else x_span[0]
        raise IntegrationError(
            f"integration failed near x={where:.6g}: {result.message}", where)
    return result


def quad(f, a, b, tol=1e-10):
    """Adaptive quadrature of ``f`` over ``[a, b]``; ``b`` may be ``inf``.

    Satisfies ``|result - true| <= tol * (1 + |result|)`` for integrands
    within scipy's adaptive Gauss-Kronrod reach.  Infinite upper limits are
    mapped by ``r = a + exp(u)`` and truncated where the transformed
    integrand falls below ``tol``; all integrands in this package decay
    exponentially, so the truncation error is negligible.
    """
    if not math.isinf(b):
        value, err = _quad_checked(f, a, b, tol)
        return value

    def g(u):
        s = math.exp(u)
        return f(a + s) * s

    # The transformed integrand decays to both sides; find a finite window.
    # The inner truncation drops about exp(u_lo) * |f(a)|, so tie it to tol.
    u_lo = min(math.log(1e-8), math.log(max(tol, 1e-300)) - 5.0)
    u_hi = 2.0
    g_scale = max(abs(g(u)) for u in np.linspace(u_lo, u_hi, 17))
    if g_scale == 0.0:
        return 0.0
    cutoff = tol * g_scale * 1e-3
    while abs(g(u_hi)) > cutoff:
        u_hi += 1.0
        if u_hi > 700.0:
            raise QuadratureError("integrand does not decay on [a, inf)")
    value, err = _quad_checked(g, u_lo, u_hi, tol)
    # Tail below the lower cutoff contributes O(exp(u_lo) * f(a)).
    return value


def _quad_checked(f, a, b, tol):
    value, abserr = _scipy_quad(f, a, b, epsabs=tol, epsrel=tol, limit=200)
    if abserr > tol * (1.0 + abs(value)) * 10.0:
        raise QuadratureError(
            f"quadrature error {abserr:.3g} exceeds tolerance for result {value:.6g}")
    return value, abserr


def midpoint_rule(f, a, b, n):
    """Dense midpoint-rule oracle used by tests to cross-check quad."""
    x = a + (np.arange(n) + 0.5) * (b - a) / n
    return float(np.sum([f(xi) for xi in x]) * (b - a) / n)
