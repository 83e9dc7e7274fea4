"""Critic value-function regressors and their gradients.

The bundled basis is the full quadratic polynomial without constant term:
linear monomials, squares, then pairwise products in lexicographic order.
For input dimension d it has ``2d + d(d-1)/2`` features (27 at d = 6).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, NumericFault


@dataclass(frozen=True)
class RegressorBasis:
    dim_in: int
    n_features: int
    eval: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    name: str = ""


def quad_feature_count(dim_in: int) -> int:
    return 2 * dim_in + dim_in * (dim_in - 1) // 2


def quad_basis(dim_in: int) -> RegressorBasis:
    """Quadratic basis: z_1..z_d, z_1^2..z_d^2, then z_i z_j for i < j."""
    if dim_in < 1:
        raise ConfigurationError(f"basis dimension must be >= 1, got {dim_in}")
    d = dim_in
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    pi = np.array([p[0] for p in pairs], dtype=int)
    pj = np.array([p[1] for p in pairs], dtype=int)
    n1 = quad_feature_count(d)
    ar = np.arange(d)
    ap = np.arange(len(pairs))

    def _eval(z):
        z = np.asarray(z, dtype=float)
        return np.concatenate([z, z * z, z[pi] * z[pj]])

    def _grad(z):
        z = np.asarray(z, dtype=float)
        out = np.zeros((n1, d))
        out[ar, ar] = 1.0
        out[d + ar, ar] = 2.0 * z
        out[2 * d + ap, pi] = z[pj]
        out[2 * d + ap, pj] = z[pi]
        return out

    return RegressorBasis(dim_in=d, n_features=n1, eval=_eval, grad=_grad,
                          name=f"quad{d}")


def eval_grad(basis: RegressorBasis, z: np.ndarray) -> np.ndarray:
    """Gradient matrix with row k equal to the gradient of feature k."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        bad = int(np.flatnonzero(~np.isfinite(z))[0])
        raise NumericFault(f"non-finite basis input at component {bad}", component=bad)
    return basis.grad(z)


def fd_gradient(basis: RegressorBasis, z: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient, the reference for analytic grads."""
    z = np.asarray(z, dtype=float)
    out = np.zeros((basis.n_features, basis.dim_in))
    for i in range(basis.dim_in):
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        out[:, i] = (basis.eval(zp) - basis.eval(zm)) / (2.0 * h)
    return out


def validate_gradient(basis: RegressorBasis, n_points: int = 20, rtol: float = 1e-6,
                      scale: float = 2.0, seed: int = 0):
    """Check a basis' analytic gradient against finite differences.

    Used when loading a custom basis; raises ConfigurationError on mismatch.
    """
    rng = np.random.default_rng(seed)
    for _ in range(n_points):
        z = rng.uniform(-scale, scale, basis.dim_in)
        an = basis.grad(z)
        fd = fd_gradient(basis, z)
        err = np.max(np.abs(fd - an)) / (1e-9 + np.max(np.abs(an)))
        if err > rtol:
            raise ConfigurationError(
                f"basis {basis.name!r}: analytic gradient disagrees with finite "
                f"differences (relative error {err:.3e} > {rtol:.1e})")
    return basis


_BASES = {"quad": quad_basis}


def make_basis(name: str, dim_in: int) -> RegressorBasis:
    try:
        builder = _BASES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown basis {name!r}; available: {sorted(_BASES)}") from None
    return builder(dim_in)
