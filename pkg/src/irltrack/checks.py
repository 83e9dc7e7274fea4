"""Self-contained oracle checks: each validates one core identity against an
independent computation and returns (name, passed, detail)."""
from __future__ import annotations

import math

import numpy as np

from .basis import fd_gradient, quad_basis
from .benchmarks.linear import (augmented_linear, discounted_riccati,
                                ideal_weights, riccati_residual)
from .errors import OracleFailure
from .models import AffinePlant, ReferenceModel, augment
from .policy import SaturationSpec, penalty_closed, penalty_integral
from .sim import rollout_augmented


def check_penalty_identity(n_draws: int = 100, seed: int = 7,
                           perturb: float = 0.0):
    """Closed-form penalty vs adaptive quadrature at u = -u_m tanh(tau)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for u_m in (1.0, math.pi / 2):
        sat = SaturationSpec(u_m=u_m, R=np.eye(3))
        for _ in range(n_draws):
            tau = rng.uniform(-5, 5, 3)
            closed = penalty_closed(tau, sat) + perturb
            quadr = penalty_integral(-u_m * np.tanh(tau), sat)
            worst = max(worst, abs(closed - quadr) / max(abs(quadr), 1e-12))
    return ("penalty closed-form vs quadrature", worst <= 1e-8,
            f"max rel err {worst:.2e} (tol 1e-8)")


def check_basis_gradient(n_points: int = 50, seed: int = 3):
    """Analytic regressor gradient vs central finite differences."""
    basis = quad_basis(6)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        z = rng.uniform(-2, 2, 6)
        an = basis.grad(z)
        fd = fd_gradient(basis, z)
        worst = max(worst, np.max(np.abs(fd - an)) / (1e-9 + np.max(np.abs(an))))
    return ("regressor gradient vs finite differences", worst <= 1e-6,
            f"max rel err {worst:.2e} (tol 1e-6)")


def check_window_identity(gamma: float = 0.1, T: float = 1e-2, dt: float = 1e-4,
                          n_windows: int = 20):
    """exp(-gamma T) theta_t - theta_{t-T} vs the windowed quadrature of
    exp(-gamma (tau-t+T)) (grad_theta (F+Gu) - gamma theta)."""
    omega = 1.0
    A = np.array([[0.0, omega], [-omega, 0.0]])
    B = np.array([[0.0], [1.0]])
    plant = AffinePlant(n=2, m=1, f=lambda x: A @ x, g=lambda x: B.copy(),
                        name="osc").validate()
    ref = ReferenceModel(H=lambda xd: A @ xd, x_d0=np.array([1.0, 0.0]),
                         name="rot").validate()
    dyn = augment(plant, ref)
    basis = quad_basis(4)
    z0 = np.array([1.5, -0.5, 1.0, 0.0])
    ts, zs, us = rollout_augmented(dyn, z0, lambda t: 0.5 * math.sin(2.0 * t),
                                   dt, 2.0)
    k_win = int(round(T / dt))
    idx = np.linspace(k_win, len(ts) - 1, n_windows).astype(int)
    worst = 0.0
    emgt = math.exp(-gamma * T)
    for k in idx:
        lhs = emgt * basis.eval(zs[k]) - basis.eval(zs[k - k_win])
        tau_s = ts[k - k_win:k + 1]
        w = np.exp(-gamma * (tau_s - ts[k] + T))
        vals = np.array([
            basis.grad(zs[j]) @ (dyn.F(zs[j]) + dyn.G(zs[j]) @ us[j])
            - gamma * basis.eval(zs[j])
            for j in range(k - k_win, k + 1)])
        rhs = np.trapezoid(w[:, None] * vals, tau_s, axis=0)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return ("windowed regressor-difference identity", worst <= 1e-4,
            f"max abs err {worst:.2e} (tol 1e-4)")


def check_discounted_quadrature(gamma: float = 0.1, c: float = 3.7,
                                T: float = 1e-3):
    """Trapezoid of a constant integrand vs the analytic antiderivative."""
    from .learner import ReinforcementBuffer, reinforcement_integral
    dt = T / 100.0
    buf = ReinforcementBuffer(T, dt)
    for k in range(101):
        buf.push(k * dt, np.zeros(1), np.zeros(1), c, 0.0)
    got = reinforcement_integral(buf, gamma, T)
    expected = c * T if gamma == 0.0 else c * (-np.expm1(-gamma * T)) / gamma
    err = abs(got - expected)
    return ("discounted window quadrature (constant integrand)", err <= 1e-10,
            f"abs err {err:.2e} (tol 1e-10, gamma={gamma})")


def check_riccati_residual():
    """Backward-integrated steady-state P substituted into the algebraic eq."""
    A_p = np.array([[0.0, 6.0], [-6.0, 0.0]])
    B_p = np.array([[0.0], [1.0]])
    bench = augmented_linear(A_p, B_p, A_p)
    Q1 = np.diag([1.0, 1.0, 0.0, 0.0])
    R = np.array([[10.0]])
    try:
        P = discounted_riccati(bench.A, bench.B, Q1, R, 0.1)
    except OracleFailure as exc:
        return ("Riccati oracle residual", False, str(exc))
    res = np.linalg.norm(riccati_residual(P, bench.A, bench.B, Q1, R, 0.1), "fro")
    return ("Riccati oracle residual", res <= 1e-9,
            f"Frobenius residual {res:.2e} (tol 1e-9)")


def check_ideal_weights_roundtrip(n_draws: int = 20, seed: int = 11):
    """W from P reproduces z^T P z through the feature expansion."""
    rng = np.random.default_rng(seed)
    basis = quad_basis(4)
    worst = 0.0
    for _ in range(n_draws):
        M = rng.normal(size=(4, 4))
        P = 0.5 * (M + M.T)
        W = ideal_weights(P, basis)
        for _ in range(5):
            z = rng.normal(size=4)
            worst = max(worst, abs(W @ basis.eval(z) - z @ P @ z))
    return ("quadratic-value weight round trip", worst <= 1e-12,
            f"max abs err {worst:.2e} (tol 1e-12)")


def run_all(gamma: float = 0.1, perturb_penalty: float = 0.0):
    """Run the full oracle suite; returns list of (name, passed, detail)."""
    return [
        check_penalty_identity(perturb=perturb_penalty),
        check_basis_gradient(),
        check_window_identity(gamma=gamma),
        check_discounted_quadrature(gamma=gamma),
        check_riccati_residual(),
        check_ideal_weights_roundtrip(),
    ]
