"""Slab-frozen temporal weights, kernel factors and the jump coefficient.

All weight routines are elementwise over numpy arrays.  The 3D kernel is
supported on the wavefront, so each (target, source) pair contributes to
exactly one time slab; the 2D kernel has a tail filling the cone
interior, so every slab behind the front contributes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SubsonicError


@dataclass(frozen=True)
class SlabContext:
    """Time-slab bookkeeping for observation level k and source slab ell.

    theta_lo = t_k - t_ell and theta_hi = t_k - t_{ell-1}; their
    difference is exactly dt.
    """

    k: int
    ell: int
    dt: float

    @property
    def theta_lo(self) -> float:
        return (self.k - self.ell) * self.dt

    @property
    def theta_hi(self) -> float:
        return (self.k - self.ell + 1) * self.dt


@dataclass
class KernelSample:
    """Frozen kernel quantities for a batch of (target, source) pairs."""

    eta: np.ndarray
    dnu_eta: np.ndarray = None
    deta_dtau: np.ndarray = None
    amplitude: np.ndarray = None
    jacobian: np.ndarray = None
    c_src: np.ndarray = None
    c_tgt: np.ndarray = None

    @property
    def d_factor(self) -> np.ndarray:
        return 1.0 + self.deta_dtau


def amplitude(fld, x, t, y, tau):
    """Two-point amplitude 1/sqrt(c(x,t) c(y,tau)); kappa(y) on the diagonal."""
    return 1.0 / np.sqrt(fld.speed(x, t) * fld.speed(y, tau))


def slab_index(eta, k: int, dt: float):
    """Index ell of the slab containing each frozen travel time.

    Half-open convention [theta_lo, theta_hi); eta = 0 and eta > t_k are
    excluded (returned index is out of the 1..k range).
    """
    eta = np.asarray(eta)
    j = np.floor(eta / dt).astype(np.int64)
    ell = k - j
    ell = np.where(eta <= 0.0, -1, ell)
    return ell


def causal_mask_3d(ctx: SlabContext, eta):
    """Membership of eta in slab ell under the half-open convention."""
    return slab_index(eta, ctx.k, ctx.dt) == ctx.ell


def sl_weights_3d(ctx: SlabContext, eta, amp, jac, mask=None):
    """Closed-form single-layer temporal weight pair (w-, w+)."""
    eta = np.asarray(eta, dtype=float)
    if mask is None:
        mask = causal_mask_3d(ctx, eta)
    safe = np.where(mask, eta, 1.0)
    base = amp * jac / (4.0 * np.pi * ctx.dt * safe)
    wm = np.where(mask, -base * (ctx.theta_lo - eta), 0.0)
    wp = np.where(mask, base * (ctx.theta_hi - eta), 0.0)
    return wm, wp


def dl_weights_3d(ctx: SlabContext, eta, amp, jac, dnu_eta, deta_dtau, mask=None):
    """Closed-form double-layer weights (w_partial, w-, w+).

    w_partial multiplies the slab-constant time derivative of the
    density; the (-, +) pair multiplies the P1 nodal values.
    """
    eta = np.asarray(eta, dtype=float)
    d = 1.0 + np.asarray(deta_dtau, dtype=float)
    if np.any(d <= 0.0):
        raise SubsonicError("nondegeneracy factor 1 + d(eta)/d(tau) is not positive")
    if mask is None:
        mask = causal_mask_3d(ctx, eta)
    q = -amp * dnu_eta / d
    safe = np.where(mask, eta, 1.0)
    wd = np.where(mask, q * jac / (4.0 * np.pi * ctx.dt * safe), 0.0)
    base2 = q * jac / (4.0 * np.pi * ctx.dt * safe**2)
    wm = np.where(mask, -base2 * (ctx.theta_lo - eta), 0.0)
    wp = np.where(mask, base2 * (ctx.theta_hi - eta), 0.0)
    return wd, wm, wp


def _tail_limits(ctx: SlabContext, eta):
    a = np.maximum(ctx.theta_lo, eta)
    b = np.full_like(np.asarray(eta, dtype=float), ctx.theta_hi)
    active = b > a
    return a, b, active


def sl_weights_2d(ctx: SlabContext, eta, amp, jac):
    """2D single-layer weight pair from the cone-interior tail.

    Primitives F0 = arccosh(theta/eta) and F1 = sqrt(theta^2 - eta^2)
    integrate the temporal hat functions against the 2D kernel.
    """
    eta = np.asarray(eta, dtype=float)
    a, b, active = _tail_limits(ctx, eta)
    safe_eta = np.where(eta > 0, eta, 1.0)

    def f0(th):
        ratio = np.maximum(th / safe_eta, 1.0)
        return np.arccosh(ratio)

    def f1(th):
        return np.sqrt(np.maximum(th**2 - safe_eta**2, 0.0))

    scale = amp * jac / (2.0 * np.pi * ctx.dt)
    wm = scale * ((f1(b) - ctx.theta_lo * f0(b)) - (f1(a) - ctx.theta_lo * f0(a)))
    wp = scale * ((ctx.theta_hi * f0(b) - f1(b)) - (ctx.theta_hi * f0(a) - f1(a)))
    zero = ~active | (eta <= 0)
    return np.where(zero, 0.0, wm), np.where(zero, 0.0, wp)


def dl_weights_2d(ctx: SlabContext, eta, amp, jac, dnu_eta, deta_dtau):
    """2D double-layer weights (w_partial, w-, w+) via integration by parts.

    The tail kernels are Q (eta/theta) G0 for the density derivative and
    Q (eta/theta^2) G0 for the density itself; primitives are
    arccos(eta/theta)/eta and sqrt(theta^2-eta^2)/(eta^2 theta).
    """
    eta = np.asarray(eta, dtype=float)
    d = 1.0 + np.asarray(deta_dtau, dtype=float)
    if np.any(d <= 0.0):
        raise SubsonicError("nondegeneracy factor 1 + d(eta)/d(tau) is not positive")
    q = -amp * dnu_eta / d
    a, b, active = _tail_limits(ctx, eta)
    safe_eta = np.where(eta > 0, eta, 1.0)

    def p1(th):
        ratio = np.clip(safe_eta / th, -1.0, 1.0)
        return np.arccos(ratio) / safe_eta

    def p2(th):
        return np.sqrt(np.maximum(th**2 - safe_eta**2, 0.0)) / (safe_eta**2 * th)

    scale = q * jac * safe_eta / (2.0 * np.pi * ctx.dt)
    wd = scale * (p1(b) - p1(a))
    wm = scale * ((p1(b) - ctx.theta_lo * p2(b)) - (p1(a) - ctx.theta_lo * p2(a)))
    wp = scale * ((ctx.theta_hi * p2(b) - p1(b)) - (ctx.theta_hi * p2(a) - p1(a)))
    zero = ~active | (eta <= 0)
    return np.where(zero, 0.0, wd), np.where(zero, 0.0, wm), np.where(zero, 0.0, wp)


def jump_lambda(c, v):
    """Double-layer jump coefficient lambda = 1 + V^2/(C^2 - V^2)."""
    c = np.asarray(c, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(v) >= c):
        raise SubsonicError("jump coefficient undefined at or beyond the sonic speed")
    return 1.0 + v**2 / (c**2 - v**2)
