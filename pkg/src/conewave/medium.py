"""Sound-speed fields c(x, t) with slowness derivatives.

All presets are smooth (tanh transitions) and uniformly bounded away
from zero.  Queries are vectorized over leading axes of ``x``.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

FD_REL_STEP = 1e-4

# Fireball atmosphere constants (physical units).
GAMMA_AIR = 1.4
R_GAS = 287.0
THETA_GROUND = 290.0
LAPSE_PER_M = 70.0 / 15000.0
ALTITUDE_MAX_M = 15000.0


class SpeedField:
    """Sound speed c(x, t), nondimensional.

    Kinds
    -----
    constant            c == value
    tanh-inclusion      interior/exterior contrast across a moving sphere
    time-tanh           spatially uniform c(t) ramp
    atmosphere-fireball stratified troposphere plus a rising hot bubble
    """

    def __init__(self, kind: str, **params):
        self.kind = kind
        self.params = dict(params)
        if kind == "constant":
            self.value = float(params.get("value", 1.0))
        elif kind == "tanh-inclusion":
            self.c_plus = float(params.get("c_plus", 1.0))
            self.c_minus = float(params.get("c_minus", 0.227))
            self.delta = float(params.get("delta", 0.2))
            self.inclusion_radius = float(params.get("radius", 1.0))
            self.center0 = np.asarray(params.get("center", (0.0,) * int(params.get("dim", 3))), dtype=float)
            self.center_velocity = np.asarray(
                params.get("center_velocity", np.zeros_like(self.center0)), dtype=float
            )
        elif kind == "time-tanh":
            self.c_fin = float(params.get("c_fin", 0.5))
            self.ramp_time = float(params.get("ramp_time", 1.5))
            self.ramp_rate = float(params.get("ramp_rate", 5.0))
        elif kind == "atmosphere-fireball":
            self.length_scale = float(params.get("length_scale", 100.0))    # L0 [m]
            self.speed_scale = float(params.get("speed_scale", 340.0))      # c0 [m/s]
            self.delta_theta = float(params.get("delta_theta", 1000.0))     # bubble excess [K]
            self.eps0 = float(params.get("eps0", 50.0))                     # layer width [m]
            self.bubble_radius = float(params.get("radius", 1.55))          # nondim
            self.center0 = np.asarray(params.get("center", (0.0, 0.0, 2.323)), dtype=float)
            self.center_velocity = np.asarray(params.get("center_velocity", (0.0, 0.0, 7.69e-2)), dtype=float)
        else:
            raise ValueError(f"unknown speed-field kind {kind!r}")

    # ------------------------------------------------------------------
    def _inclusion_center(self, t):
        return self.center0 + np.multiply.outer(np.asarray(t, dtype=float), self.center_velocity)

    def speed(self, x, t):
        """c(x, t); x has shape (..., dim), t scalar or broadcastable."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full(x.shape[:-1], self.value)
        if self.kind == "time-tanh":
            tt = np.asarray(t, dtype=float)
            c = 1.0 + (self.c_fin - 1.0) / 2.0 * (1.0 + np.tanh(self.ramp_rate * (tt - self.ramp_time)))
            return np.broadcast_to(c, np.broadcast_shapes(x.shape[:-1], np.shape(c))).copy()
        if self.kind == "tanh-inclusion":
            d = np.linalg.norm(x - self._inclusion_center(t), axis=-1) - self.inclusion_radius
            return self.c_plus + (self.c_minus - self.c_plus) / 2.0 * (1.0 + np.tanh(-d / self.delta))
        # atmosphere-fireball
        x3_m = x[..., 2] * self.length_scale
        if np.any(x3_m < -1e-9) or np.any(x3_m > ALTITUDE_MAX_M):
            raise DomainError("fireball profile queried outside the 0..15000 m altitude band")
        theta = THETA_GROUND - LAPSE_PER_M * x3_m
        d_m = (np.linalg.norm(x - self._inclusion_center(t), axis=-1) - self.bubble_radius) * self.length_scale
        theta = theta + self.delta_theta / 2.0 * (1.0 + np.tanh(-d_m / self.eps0))
        return np.sqrt(GAMMA_AIR * R_GAS * theta) / self.speed_scale

    def slowness(self, x, t):
        return 1.0 / self.speed(x, t)

    def speed_dt(self, x, t):
        """Time derivative of c, analytic for time-tanh, FD otherwise."""
        if self.kind == "constant" or self.is_time_independent:
            return np.zeros(np.asarray(x, dtype=float).shape[:-1])
        if self.kind == "time-tanh":
            tt = np.asarray(t, dtype=float)
            sech2 = 1.0 / np.cosh(self.ramp_rate * (tt - self.ramp_time)) ** 2
            val = (self.c_fin - 1.0) / 2.0 * self.ramp_rate * sech2
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(val, np.broadcast_shapes(x.shape[:-1], np.shape(val))).copy()
        dt = 1e-5
        return (self.speed(x, np.asarray(t) + dt) - self.speed(x, np.asarray(t) - dt)) / (2.0 * dt)

    # ------------------------------------------------------------------
    def slowness_grad_hess(self, x, t):
        """(grad kappa, Hessian kappa); analytic for radial presets.

        Fallback is central finite differences with a relative step of
        1e-4; the Hessian is symmetrized by construction.
        """
        x = np.asarray(x, dtype=float)
        dim = x.shape[-1]
        if self.kind == "constant" or self.kind == "time-tanh":
            return np.zeros_like(x), np.zeros(x.shape + (dim,))
        if self.kind == "tanh-inclusion":
            return self._radial_grad_hess(x, t)
        return self._fd_grad_hess(x, t)

    def _radial_grad_hess(self, x, t):
        ctr = self._inclusion_center(t)
        rel = x - ctr
        r = np.linalg.norm(rel, axis=-1)
        r = np.maximum(r, 1e-14)
        rhat = rel / r[..., None]
        d = r - self.inclusion_radius
        delta = self.delta
        half = (self.c_minus - self.c_plus) / 2.0
        s = np.tanh(-d / delta)
        c = self.c_plus + half * (1.0 + s)
        cp = -half * (1.0 - s**2) / delta
        cpp = -half * 2.0 * s * (1.0 - s**2) / delta**2
        kp = -cp / c**2
        kpp = -cpp / c**2 + 2.0 * cp**2 / c**3
        grad = kp[..., None] * rhat
        eye = np.eye(x.shape[-1])
        outer = rhat[..., :, None] * rhat[..., None, :]
        hess = kpp[..., None, None] * outer + (kp / r)[..., None, None] * (eye - outer)
        return grad, hess

    def _fd_grad_hess(self, x, t):
        x = np.asarray(x, dtype=float)
        dim = x.shape[-1]
        h = FD_REL_STEP * np.maximum(1.0, np.linalg.norm(x, axis=-1))
        grad = np.zeros_like(x)
        hess = np.zeros(x.shape + (dim,))
        k0 = self.slowness(x, t)
        shifts = []
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = 1.0
            kp = self.slowness(x + h[..., None] * e, t)
            km = self.slowness(x - h[..., None] * e, t)
            grad[..., i] = (kp - km) / (2.0 * h)
            hess[..., i, i] = (kp - 2.0 * k0 + km) / h**2
            shifts.append(e)
        for i in range(dim):
            for j in range(i + 1, dim):
                ei, ej = shifts[i], shifts[j]
                kpp = self.slowness(x + h[..., None] * (ei + ej), t)
                kpm = self.slowness(x + h[..., None] * (ei - ej), t)
                kmp = self.slowness(x - h[..., None] * (ei - ej), t)
                kmm = self.slowness(x - h[..., None] * (ei + ej), t)
                val = (kpp - kpm - kmp + kmm) / (4.0 * h**2)
                hess[..., i, j] = val
                hess[..., j, i] = val
        return grad, hess

    # ------------------------------------------------------------------
    @property
    def is_time_independent(self) -> bool:
        if self.kind in ("constant",):
            return True
        if self.kind == "tanh-inclusion":
            return not np.any(self.center_velocity)
        return False

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def is_radial(self) -> bool:
        """Radially symmetric about a fixed center (enables ray tables)."""
        return self.kind == "tanh-inclusion" and self.is_time_independent

    def bounds(self):
        """Conservative (c_min, c_max) over all admissible queries."""
        if self.kind == "constant":
            return self.value, self.value
        if self.kind == "time-tanh":
            lo, hi = sorted((1.0, self.c_fin))
            return lo, hi
        if self.kind == "tanh-inclusion":
            lo, hi = sorted((self.c_minus, self.c_plus))
            return lo, hi
        th_lo = THETA_GROUND - LAPSE_PER_M * ALTITUDE_MAX_M
        th_hi = THETA_GROUND + self.delta_theta
        return (
            np.sqrt(GAMMA_AIR * R_GAS * th_lo) / self.speed_scale,
            np.sqrt(GAMMA_AIR * R_GAS * th_hi) / self.speed_scale,
        )

    def fireball_contrast(self, t: float, n_samples: int = 2001) -> float:
        """c_max/c_min sampled on the vertical line through the bubble center.

        The segment runs from the ground to two radii above the center.
        """
        if self.kind != "atmosphere-fireball":
            if self.kind == "constant":
                return 1.0
            raise DomainError("fireball_contrast requires the atmosphere-fireball preset")
        ctr = self._inclusion_center(t)
        z_top = ctr[2] + 2.0 * self.bubble_radius
        z = np.linspace(0.0, z_top, n_samples)
        pts = np.zeros((n_samples, 3))
        pts[:, 0] = ctr[0]
        pts[:, 1] = ctr[1]
        pts[:, 2] = z
        c = self.speed(pts, t)
        return float(c.max() / c.min())
