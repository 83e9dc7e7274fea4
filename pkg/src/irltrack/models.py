"""Control-affine plants, reference generators, and the augmented tracking system.

The tracking problem for ``xdot = f(x) + g(x) u`` against an autonomous
reference ``xd_dot = H(xd)`` is recast as regulation of the stacked state
``z = [e, xd]`` with ``e = x - xd``:

    zdot = F(z) + G(z) u,
    F(z) = [f(e + xd) - H(xd), H(xd)],   G(z) = [g(e + xd), 0].

Only point evaluations of ``G`` are ever consumed by the learner; ``F`` is
needed for simulation and for test oracles.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, NumericFault


@dataclass(frozen=True)
class AffinePlant:
    """Control-affine plant ``xdot = f(x) + g(x) u``.

    ``f`` maps R^n -> R^n, ``g`` maps R^n -> R^(n x m).  ``domain`` is an
    optional per-component box (lo, hi) used for telemetry warnings only;
    nothing is clamped.
    """

    n: int
    m: int
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    name: str = ""
    domain: Optional[tuple] = None

    def validate(self):
        x0 = np.zeros(self.n)
        fx = np.asarray(self.f(x0), dtype=float)
        gx = np.asarray(self.g(x0), dtype=float)
        if fx.shape != (self.n,):
            raise ConfigurationError(
                f"plant {self.name!r}: f(0) has shape {fx.shape}, expected ({self.n},)")
        if gx.shape != (self.n, self.m):
            raise ConfigurationError(
                f"plant {self.name!r}: g(0) has shape {gx.shape}, expected ({self.n}, {self.m})")
        if not (np.all(np.isfinite(fx)) and np.all(np.isfinite(gx))):
            raise ConfigurationError(f"plant {self.name!r}: non-finite f/g at the origin")
        return self


@dataclass(frozen=True)
class ReferenceModel:
    """Autonomous bounded reference ``xd_dot = H(xd)`` with ``H(0) = 0``."""

    H: Callable[[np.ndarray], np.ndarray]
    x_d0: np.ndarray
    name: str = ""

    def validate(self):
        n = len(self.x_d0)
        h0 = np.asarray(self.H(np.zeros(n)), dtype=float)
        if h0.shape != (n,):
            raise ConfigurationError(
                f"reference {self.name!r}: H(0) has shape {h0.shape}, expected ({n},)")
        if not np.allclose(h0, 0.0, atol=1e-12):
            raise ConfigurationError(f"reference {self.name!r}: H(0) != 0")
        return self


@dataclass(frozen=True)
class AugmentedState:
    """Stacked tracking error and reference state."""

    e: np.ndarray
    x_d: np.ndarray

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.e, self.x_d])


@dataclass(frozen=True)
class AugmentedDynamics:
    """Vector field of the stacked system.

    ``F`` may be None for environments that integrate their own physics and
    expose only the control coupling (the learner never reads F).
    """

    n: int
    m: int
    G: Callable[[np.ndarray], np.ndarray]
    F: Optional[Callable[[np.ndarray], np.ndarray]] = None


def augment(plant: AffinePlant, ref: ReferenceModel) -> AugmentedDynamics:
    """Build the stacked dynamics for a plant/reference pair.

    Raises ConfigurationError when the reference dimension does not match
    the plant state dimension.
    """
    if len(ref.x_d0) != plant.n:
        raise ConfigurationError(
            f"plant {plant.name!r} has n={plant.n} but reference {ref.name!r} "
            f"has dimension {len(ref.x_d0)}")
    n = plant.n

    def F(z):
        e, xd = z[:n], z[n:]
        h = ref.H(xd)
        return np.concatenate([plant.f(e + xd) - h, h])

    def G(z):
        e, xd = z[:n], z[n:]
        out = np.zeros((2 * n, plant.m))
        out[:n, :] = plant.g(e + xd)
        return out

    return AugmentedDynamics(n=n, m=plant.m, G=G, F=F)


def eval_augmented(dyn: AugmentedDynamics, z: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate ``F(z) + G(z) u``; faults on a non-finite component."""
    if dyn.F is None:
        raise ConfigurationError("this augmented system does not expose a drift field")
    out = dyn.F(z) + dyn.G(z) @ np.atleast_1d(u)
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise NumericFault(f"non-finite augmented derivative at component {bad}",
                           component=bad)
    return out
