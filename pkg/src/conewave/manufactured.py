"""Manufactured-solution boundary data for the 2D circle tests.

For a radially symmetric density on a circle the layer operators reduce
to their angular mean (Fourier n = 0 mode).  For the single layer the
angular integral collapses to a complete elliptic integral, leaving a
single smooth adaptive quadrature in retarded time; the double-layer
data keeps a nested quadrature with a cosh substitution at the cone
tip.  Either way the data is independent of the slab-frozen
discretization it feeds.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad
from scipy.special import ellipk

from .traveltime import unit_gauss_legendre

OMEGA = 6.0 * np.pi
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-9
INNER_NODES = 64


def exact_density(t):
    """Target density t cos(6 pi t) H(t) used by the manufactured tests."""
    t = np.asarray(t, dtype=float)
    return np.where(t > 0.0, t * np.cos(OMEGA * t), 0.0)


def exact_density_dt(t):
    t = np.asarray(t, dtype=float)
    return np.where(t > 0.0, np.cos(OMEGA * t) - OMEGA * t * np.sin(OMEGA * t), 0.0)


def mode0_sl_kernel(theta: float, r_target: float, r_source: float) -> float:
    """Angular mean of the 2D retarded kernel between two circles.

    (1/2pi) * integral over the source angle of H(theta - d)/sqrt(theta^2 - d^2)
    with d the chord distance between radius r_target and radius
    r_source points.  Complete-elliptic closed form.
    """
    if theta <= abs(r_target - r_source):
        return 0.0
    prod = r_target * r_source
    if theta < r_target + r_source:
        m = (theta**2 - (r_target - r_source) ** 2) / (4.0 * prod)
        return float(ellipk(m)) / (np.pi * np.sqrt(prod))
    c2 = theta**2 - (r_target - r_source) ** 2
    m = 4.0 * prod / c2
    return 2.0 * float(ellipk(m)) / (np.pi * np.sqrt(c2))


def sl_fixed_circle_value(t: float, rho: float = 1.0, density=exact_density) -> float:
    """Single-layer potential of the n=0 density on the unit circle.

    The target sits at distance rho from the center (rho = 1 collocates
    on the boundary).  Unit speed; amplitude 1; Jacobian 1.
    """
    if t <= 0.0:
        return 0.0

    def integrand(tau):
        return float(density(tau)) * mode0_sl_kernel(t - tau, rho, 1.0)

    pts = [t - (rho + 1.0), t - abs(rho - 1.0)]
    pts = [p for p in pts if 0.0 < p < t]
    val, _ = quad(integrand, 0.0, t, points=pts or None, limit=300,
                  epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL)
    return val


def sl_expanding_circle_value(t: float, rate: float = 0.5, radius0: float = 1.0,
                              density=exact_density) -> float:
    """Single-layer data on the expanding circle R(tau) = R0 + rate tau.

    Collocation on the boundary at time t; the source Jacobian R(tau)
    rides along with the density.
    """
    if t <= 0.0:
        return 0.0
    r_t = radius0 + rate * t

    def integrand(tau):
        r_tau = radius0 + rate * tau
        return float(density(tau)) * r_tau * mode0_sl_kernel(t - tau, r_t, r_tau)

    # Full-circle crossing (theta = r_t + r_tau) happens only for long runs.
    pts = []
    tau_c = (t - r_t - radius0) / (1.0 + rate)
    if 0.0 < tau_c < t:
        pts.append(tau_c)
    val, _ = quad(integrand, 0.0, t, points=pts or None, limit=300,
                  epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL)
    return val


def dl_fixed_circle_value(t: float, density=exact_density, density_dt=exact_density_dt) -> float:
    """Collocated principal double-layer operator plus the half jump.

    Boundary target on the unit circle; Q(phi) = -sin(phi/2) for the
    unit circle at unit speed.  The angular factor blocks an elliptic
    reduction, so this keeps the nested quadrature with the cosh
    substitution at the cone tip.
    """
    if t <= 0.0:
        return 0.0

    def outer(phi):
        r = max(2.0 * np.sin(phi / 2.0), 1e-14)
        if t <= r:
            return 0.0
        s_max = np.arccosh(t / r)
        nodes, weights = unit_gauss_legendre(INNER_NODES)
        s = s_max * nodes
        cosh_s = np.cosh(s)
        arg = t - r * cosh_s
        inner1 = s_max * float(np.sum(weights * density_dt(arg) / cosh_s))
        inner2 = s_max * float(np.sum(weights * density(arg) / (r * cosh_s**2)))
        q = -np.sin(phi / 2.0)
        return q * (inner1 + inner2)

    pts = [2.0 * np.arcsin(t / 2.0)] if t < 2.0 else None
    val, _ = quad(outer, 0.0, np.pi, points=pts, limit=200,
                  epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL)
    return 0.5 * float(exact_density(t)) + val / np.pi


def tabulate(fn, times):
    """Evaluate a scalar data function on a time grid."""
    return np.array([fn(float(t)) for t in times])
