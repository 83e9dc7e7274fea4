"""Critic learning: reinforcement-window bookkeeping and the update laws.

The critic weight vector is tuned online from the windowed Bellman residual

    e_hat = I_hat + W_hat . dtheta,
    I_hat = integral over [t-T, t] of exp(-gamma (tau - t + T)) (Q(z) + U_hat),
    dtheta = exp(-gamma T) theta(z_t) - theta(z_{t-T}),

either with a constant-gain gradient step (`baseline_update_step`) or with
the variable-gain law (`update_step`) whose three terms are

  1. gradient term      -alpha |e_hat|^q2 theta_bar e_hat
  2. stabilizing term   +(alpha/2) |Sigma|^k2 Xi grad_theta G (I - diag tanh^2 tau2) G^T z
  3. robustifying term  +alpha |e_hat|^q2 ((K1 phi^T - K2) W_hat - theta_bar * m_integral)

with theta_bar = dtheta / (1 + dtheta.dtheta)^2, phi = dtheta / (1 + dtheta.dtheta),
Sigma = z . zdot by backward differencing, and Xi the indicator that is 0 only
while Sigma < 0.  All integrals are discounted trapezoids over the buffer.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .basis import RegressorBasis
from .errors import ConfigurationError, NotReady, NumericFault
from .models import AugmentedDynamics
from .policy import SaturationSpec, tau2_raw

# relative slack on the warm-up span test; absorbs float accumulation in t = k*dt
_SPAN_RTOL = 1e-9


@dataclass(frozen=True)
class LearnerConfig:
    """Gains and shared weights of the critic update laws.

    q2 and k2 are the variable-gain exponents on |e_hat| and |Sigma|; K1/K2
    shape the robustifying term.  `stabilizer_enabled=False` forces Xi = 0 and
    `m_term_enabled=False` drops the m-integral, which together with
    q2 = 0, K1 = K2 = 0 makes the variable-gain law coincide with the baseline.
    """

    alpha: float
    gamma: float
    T: float
    Q1: np.ndarray
    sat: SaturationSpec
    q2: float = 0.1
    k2: float = 0.01
    K1: np.ndarray | None = None
    K2: np.ndarray | None = None
    stabilizer_enabled: bool = True
    m_term_enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "Q1", np.asarray(self.Q1, dtype=float))
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if self.gamma < 0:
            raise ConfigurationError(f"gamma must be >= 0, got {self.gamma}")
        if not self.T > 0:
            raise ConfigurationError(f"reinforcement interval T must be > 0, got {self.T}")
        if self.q2 < 0 or self.k2 < 0:
            raise ConfigurationError("q2 and k2 must be >= 0")
        if self.Q1.ndim != 2 or self.Q1.shape[0] != self.Q1.shape[1]:
            raise ConfigurationError(f"Q1 must be square, got shape {self.Q1.shape}")
        if not np.allclose(self.Q1, self.Q1.T, atol=1e-12):
            raise ConfigurationError("Q1 must be symmetric")
        if np.min(np.linalg.eigvalsh(self.Q1)) < -1e-10:
            raise ConfigurationError("Q1 must be positive semidefinite")

    def k_gains(self, n_features: int) -> tuple[np.ndarray, np.ndarray]:
        """Resolved K1 (vector) and K2 (matrix), defaulting to 0.01 each."""
        k1 = self.K1 if self.K1 is not None else 0.01 * np.ones(n_features)
        k2 = self.K2 if self.K2 is not None else 0.01 * np.eye(n_features)
        k1 = np.asarray(k1, dtype=float)
        k2 = np.asarray(k2, dtype=float)
        if k1.shape != (n_features,):
            raise ConfigurationError(f"K1 must have shape ({n_features},), got {k1.shape}")
        if k2.shape != (n_features, n_features):
            raise ConfigurationError(
                f"K2 must have shape ({n_features}, {n_features}), got {k2.shape}")
        return k1, k2

    def cost_state(self, z: np.ndarray) -> float:
        return float(z @ self.Q1 @ z)


@dataclass(frozen=True)
class CriticState:
    """Weights plus the diagnostics of the most recent update."""

    W_hat: np.ndarray
    e_hat: float = 0.0
    sigma: float = 0.0
    xi: int = 1


class ReinforcementBuffer:
    """Sliding window of per-step samples for the discounted quadratures.

    Stores (t, z, theta, cost, m_scalar) where cost = Q(z) + U_hat and
    m_scalar = W_hat(tau) . M(tau), both frozen with the weights in effect
    at sample time.  Capacity is ceil(T/dt) + 1 so the retained samples span
    at least one full window once warmed up.
    """

    def __init__(self, T: float, dt: float):
        if not 0 < dt <= T * (1 + _SPAN_RTOL):
            raise ConfigurationError(f"need 0 < dt <= T, got dt={dt}, T={T}")
        self.T = float(T)
        self.dt = float(dt)
        self.capacity = math.ceil(T / dt - _SPAN_RTOL) + 1
        self._q: deque = deque(maxlen=self.capacity)

    def __len__(self):
        return len(self._q)

    def push(self, t: float, z: np.ndarray, theta: np.ndarray, cost: float,
             m_scalar: float):
        if self._q and t <= self._q[-1][0]:
            raise ConfigurationError(
                f"buffer timestamps must strictly increase ({t} after {self._q[-1][0]})")
        self._q.append((float(t), np.array(z, dtype=float),
                        np.array(theta, dtype=float), float(cost), float(m_scalar)))

    @property
    def ready(self) -> bool:
        if len(self._q) < 2:
            return False
        span = self._q[-1][0] - self._q[0][0]
        return span >= self.T * (1 - _SPAN_RTOL)

    def _window(self, col: int):
        """Times, values over [t-T, t]; left endpoint interpolated if needed."""
        if not self.ready:
            raise NotReady("reinforcement buffer does not span a full window yet")
        ts = np.array([s[0] for s in self._q])
        vs = np.array([s[col] for s in self._q])
        t_now = ts[-1]
        t_lo = t_now - self.T
        keep = ts >= t_lo
        first = int(np.argmax(keep))
        if first > 0 and ts[first] > t_lo + _SPAN_RTOL * self.T:
            # interpolate the sample straddling t-T
            w = (t_lo - ts[first - 1]) / (ts[first] - ts[first - 1])
            v_lo = (1 - w) * vs[first - 1] + w * vs[first]
            ts = np.concatenate([[t_lo], ts[first:]])
            vs = np.concatenate([[v_lo], vs[first:]])
        else:
            ts, vs = ts[first:], vs[first:]
        return ts, vs

    def discounted_integral(self, col: int, gamma: float) -> float:
        ts, vs = self._window(col)
        t_now = ts[-1]
        w = np.exp(-gamma * (ts - t_now + self.T))
        return float(np.trapezoid(w * vs, ts))

    def endpoint_features(self) -> tuple[np.ndarray, np.ndarray]:
        """(theta(z_t), theta(z_{t-T})), the latter interpolated if needed."""
        ts, vs = self._window(2)
        return vs[-1], vs[0]


def reinforcement_integral(buf: ReinforcementBuffer, gamma: float, T: float) -> float:
    """Discounted trapezoid of the stored stage cost Q(z) + U_hat over [t-T, t]."""
    if abs(T - buf.T) > _SPAN_RTOL * buf.T:
        raise ConfigurationError(f"buffer window {buf.T} != requested T {T}")
    return buf.discounted_integral(3, gamma)


def m_integral(buf: ReinforcementBuffer, gamma: float, T: float) -> float:
    """Discounted trapezoid of the stored W_hat(tau) . M(tau) over [t-T, t]."""
    if abs(T - buf.T) > _SPAN_RTOL * buf.T:
        raise ConfigurationError(f"buffer window {buf.T} != requested T {T}")
    return buf.discounted_integral(4, gamma)


def delta_theta(theta_t: np.ndarray, theta_tmT: np.ndarray, gamma: float,
                T: float) -> np.ndarray:
    """Windowed regressor difference exp(-gamma T) theta_t - theta_{t-T}."""
    return math.exp(-gamma * T) * np.asarray(theta_t) - np.asarray(theta_tmT)


def hjb_error(I_hat: float, dtheta: np.ndarray, W_hat: np.ndarray) -> float:
    """Windowed Bellman residual I_hat + W_hat . dtheta."""
    return float(I_hat + W_hat @ dtheta)


def sigma_rate(z_t: np.ndarray, z_prev: np.ndarray, dt: float) -> float:
    """Sigma = z . zdot with zdot by backward difference over one step."""
    if dt <= 0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    z_t = np.asarray(z_t, dtype=float)
    return float(z_t @ (z_t - np.asarray(z_prev, dtype=float)) / dt)


def indicator(sigma: float) -> int:
    """0 while Sigma < 0 (contracting), 1 otherwise."""
    return 0 if sigma < 0 else 1


def gain_pow(x: float, p: float) -> float:
    """|x|^p with 0^0 = 1 and 0^p = 0 for p > 0 (right-continuous dead zone)."""
    if x == 0.0:
        return 1.0 if p == 0.0 else 0.0
    return abs(x) ** p


def m_vector(z: np.ndarray, W_hat: np.ndarray, dyn: AugmentedDynamics,
             basis: RegressorBasis, sat: SaturationSpec) -> np.ndarray:
    """M = grad_theta G u_m (tanh(tau2) - sgn(tau2)); bounded, -> 0 in saturation."""
    grad = basis.grad(z)
    G_z = dyn.G(z)
    return m_vector_raw(grad, G_z, W_hat, sat)


def m_vector_raw(grad_theta: np.ndarray, G_z: np.ndarray, W_hat: np.ndarray,
                 sat: SaturationSpec) -> np.ndarray:
    tau = tau2_raw(grad_theta, G_z, W_hat, sat)
    return (grad_theta @ G_z) @ (sat.u_m * (np.tanh(tau) - np.sign(tau)))


def _normalized_regressors(dtheta: np.ndarray):
    """(phi, theta_bar) = (dtheta/ms, dtheta/ms^2) with ms = 1 + |dtheta|^2.

    Single arithmetic pipeline shared by both update laws so that the
    baseline law and the degenerate variable-gain law agree bitwise.
    """
    ms = 1.0 + float(dtheta @ dtheta)
    phi = dtheta / ms
    return phi, phi / ms


def _gradient_term(alpha: float, q2: float, e_hat: float,
                   theta_bar: np.ndarray) -> np.ndarray:
    return -(alpha * gain_pow(e_hat, q2)) * e_hat * theta_bar


def law_terms(W_hat: np.ndarray, e_hat: float, sigma: float, xi: int,
              dtheta: np.ndarray, grad_theta: np.ndarray, G_z: np.ndarray,
              z: np.ndarray, m_int: float, cfg: LearnerConfig):
    """The three right-hand-side terms of the variable-gain law, per unit time.

    Split out so tests and analysis can probe each term's scaling in
    isolation; `update_step` sums them and applies the Euler step.
    """
    phi, theta_bar = _normalized_regressors(dtheta)
    term_grad = _gradient_term(cfg.alpha, cfg.q2, e_hat, theta_bar)

    if xi and cfg.stabilizer_enabled:
        tau = tau2_raw(grad_theta, G_z, W_hat, cfg.sat)
        ndg = grad_theta @ G_z
        gs = 0.5 * cfg.alpha * gain_pow(sigma, cfg.k2)
        term_stab = gs * (ndg @ ((1.0 - np.tanh(tau) ** 2) * (G_z.T @ z)))
    else:
        term_stab = np.zeros_like(W_hat)

    ge = cfg.alpha * gain_pow(e_hat, cfg.q2)
    k1, k2 = cfg.k_gains(len(W_hat))
    m_part = theta_bar * m_int if cfg.m_term_enabled else 0.0
    term_robust = ge * (k1 * float(phi @ W_hat) - k2 @ W_hat - m_part)

    return term_grad, term_stab, term_robust


def update_step(state: CriticState, cfg: LearnerConfig, buf: ReinforcementBuffer,
                z: np.ndarray, z_prev: np.ndarray, dyn: AugmentedDynamics,
                basis: RegressorBasis, dt: float) -> CriticState:
    """One Euler step of the variable-gain law; returns the new critic state.

    Raises NotReady while the buffer is cold and NumericFault if the step
    produces non-finite weights.
    """
    theta_t, theta_tmT = buf.endpoint_features()
    dtheta = delta_theta(theta_t, theta_tmT, cfg.gamma, cfg.T)
    I_hat = reinforcement_integral(buf, cfg.gamma, cfg.T)
    e_hat = hjb_error(I_hat, dtheta, state.W_hat)
    sigma = sigma_rate(z, z_prev, dt)
    xi = indicator(sigma) if cfg.stabilizer_enabled else 0
    m_int = m_integral(buf, cfg.gamma, cfg.T) if cfg.m_term_enabled else 0.0

    grad = basis.grad(z)
    G_z = dyn.G(z)
    with np.errstate(over="ignore", invalid="ignore"):
        t1, t2, t3 = law_terms(state.W_hat, e_hat, sigma, xi, dtheta, grad, G_z,
                               np.asarray(z, dtype=float), m_int, cfg)
        W_new = state.W_hat + dt * (t1 + t2 + t3)
    if not np.all(np.isfinite(W_new)):
        bad = int(np.flatnonzero(~np.isfinite(W_new))[0])
        raise NumericFault(
            f"critic weights non-finite after update (component {bad}, "
            f"e_hat={e_hat}, sigma={sigma})", component=bad)
    return CriticState(W_hat=W_new, e_hat=e_hat, sigma=sigma, xi=xi)


def baseline_update_step(state: CriticState, cfg: LearnerConfig,
                         buf: ReinforcementBuffer, dt: float) -> CriticState:
    """Constant-gain gradient step W -= dt alpha theta_bar (I_hat + W . dtheta).

    Kept for A/B comparison runs; sigma/xi are not part of this law and are
    reported as 0/1.  Shares the gradient-term arithmetic with the
    variable-gain law so the q2=0 degenerate case matches it exactly.
    """
    theta_t, theta_tmT = buf.endpoint_features()
    dtheta = delta_theta(theta_t, theta_tmT, cfg.gamma, cfg.T)
    I_hat = reinforcement_integral(buf, cfg.gamma, cfg.T)
    e_hat = hjb_error(I_hat, dtheta, state.W_hat)
    _, theta_bar = _normalized_regressors(dtheta)
    with np.errstate(over="ignore", invalid="ignore"):
        W_new = state.W_hat + dt * _gradient_term(cfg.alpha, 0.0, e_hat,
                                                  theta_bar)
    if not np.all(np.isfinite(W_new)):
        bad = int(np.flatnonzero(~np.isfinite(W_new))[0])
        raise NumericFault(
            f"critic weights non-finite after baseline update (component {bad}, "
            f"e_hat={e_hat})", component=bad)
    return CriticState(W_hat=W_new, e_hat=e_hat, sigma=0.0, xi=1)
