"""Saturated control policy and the actuator-constraint penalty.

The policy is ``u = -u_m tanh(tau2)`` with

    tau2 = (1 / 2 u_m) R^-1 G(z)^T grad_theta(z)^T W,

which keeps every channel strictly inside the actuator bound u_m.  The
matching running-cost penalty is

    U(u) = 2 u_m sum_i R_i  integral_0^{u_i} atanh(nu / u_m) d nu,

available both by adaptive quadrature (`penalty_integral`) and in closed
form at u = -u_m tanh(tau) (`penalty_closed`); the two agree analytically
and the pair is kept as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .basis import RegressorBasis
from .errors import ConfigurationError
from .models import AugmentedDynamics

_LOG2 = float(np.log(2.0))


@dataclass(frozen=True)
class SaturationSpec:
    """Actuator bound u_m (> 0) and positive-definite diagonal control weight R."""

    u_m: float
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", np.atleast_2d(np.asarray(self.R, dtype=float)))
        if not self.u_m > 0:
            raise ConfigurationError(f"u_m must be > 0, got {self.u_m}")
        d = np.diag(self.R)
        if self.R.shape[0] != self.R.shape[1]:
            raise ConfigurationError(f"R must be square, got shape {self.R.shape}")
        if np.any(d <= 0):
            raise ConfigurationError("R must have strictly positive diagonal")
        if np.any(self.R - np.diag(d) != 0.0):
            raise ConfigurationError("R must be diagonal")

    @property
    def m(self) -> int:
        return self.R.shape[0]

    @property
    def r_diag(self) -> np.ndarray:
        return np.diag(self.R)


def tau2_raw(grad_theta: np.ndarray, G_z: np.ndarray, W_hat: np.ndarray,
             sat: SaturationSpec) -> np.ndarray:
    """Saturation argument from precomputed grad_theta(z) and G(z)."""
    return (G_z.T @ (grad_theta.T @ W_hat)) / (2.0 * sat.u_m * sat.r_diag)


def tau2(z: np.ndarray, W_hat: np.ndarray, dyn: AugmentedDynamics,
         basis: RegressorBasis, sat: SaturationSpec) -> np.ndarray:
    return tau2_raw(basis.grad(z), dyn.G(z), W_hat, sat)


def policy_eval(z: np.ndarray, W_hat: np.ndarray, dyn: AugmentedDynamics,
                basis: RegressorBasis, sat: SaturationSpec) -> np.ndarray:
    """Saturated control ``-u_m tanh(tau2)``; strictly inside +-u_m."""
    return -sat.u_m * np.tanh(tau2(z, W_hat, dyn, basis, sat))


def penalty_integral(u: np.ndarray, sat: SaturationSpec) -> float:
    """Constraint penalty by adaptive quadrature of the atanh integrand.

    Valid only strictly inside the bound; the integrand has an integrable
    log singularity at +-u_m, so the quadrature limit is clipped away from
    the boundary by 1e-12 * u_m.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    um = sat.u_m
    if np.any(np.abs(u) >= um):
        bad = int(np.flatnonzero(np.abs(u) >= um)[0])
        raise ConfigurationError(
            f"penalty integrand undefined: |u[{bad}]| = {abs(u[bad])} >= u_m = {um}")

    def integrand(nu):
        # atanh(nu/um) written with logs: 0.5*ln((um+nu)/(um-nu))
        return 0.5 * np.log((um + nu) / (um - nu))

    eps = 1e-12 * um
    total = 0.0
    for ui, ri in zip(u, sat.r_diag):
        hi = np.clip(ui, -um + eps, um - eps)
        val, _ = quad(integrand, 0.0, hi, epsabs=1e-12, epsrel=1e-11, limit=200)
        total += ri * val
    return 2.0 * um * total


def log_one_minus_tanh2(a: np.ndarray) -> np.ndarray:
    """ln(1 - tanh(a)^2) via 2(ln 2 - a sign(a) - ln(1 + e^(-2|a|))); never overflows."""
    a = np.asarray(a, dtype=float)
    return 2.0 * (_LOG2 - np.abs(a) - np.log1p(np.exp(-2.0 * np.abs(a))))


def penalty_closed(tau: np.ndarray, sat: SaturationSpec) -> float:
    """Closed-form penalty at u = -u_m tanh(tau).

    2 u_m^2 tau^T R tanh(tau) + u_m^2 sum_i R_i ln(1 - tanh(tau_i)^2),
    evaluated with the stable log identity so deep saturation stays finite.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    um2 = sat.u_m ** 2
    r = sat.r_diag
    return float(2.0 * um2 * np.sum(r * tau * np.tanh(tau))
                 + um2 * np.sum(r * log_one_minus_tanh2(tau)))


def saturate(u: np.ndarray, u_m: float) -> np.ndarray:
    """Hard clip to +-u_m (the physical actuator, applied after dither)."""
    return np.clip(u, -u_m, u_m)
