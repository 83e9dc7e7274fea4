"""Six-degree-of-freedom fixed-wing attitude benchmark.

Rigid-body dynamics with the linear-coefficient aerodynamic force/moment
model of Beard & McLain ("Small Unmanned Aircraft", Ch. 4), Aerosonde
constants from Appendix E.  The learner closes the inner rate loop:

  outer loop:  (p,q,r)_des = attitude_des rate feedforward - diag(8,10,12) e_att
  inner loop:  stacked state z = [e_p, e_q, e_r, p_des, q_des, r_des],
               controls are elevator/aileron/rudder deviations from a frozen
               level-flight trim, throttle held at trim.

The control coupling of the three rate channels is the only aerodynamic
information handed to the learner; it is evaluated at the live dynamic
pressure.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.optimize import root

from ..errors import ConfigurationError, NumericFault, OracleFailure
from ..models import AugmentedDynamics
from ..sim import Telemetry, rk4_step

# state vector layout
PN, PE, PD, U, V, W, PHI, THETA, PSI, P, Q, R = range(12)

_PITCH_GUARD = math.pi / 2 - 1e-6


@dataclass(frozen=True)
class AirframeParams:
    mass: float
    gravity: float
    jx: float
    jy: float
    jz: float
    jxz: float
    S: float
    b: float
    c: float
    rho: float
    s_prop: float
    c_prop: float
    k_motor: float
    c_l0: float
    c_d0: float
    c_m0: float
    c_l_alpha: float
    c_d_alpha: float
    c_m_alpha: float
    c_l_q: float
    c_d_q: float
    c_m_q: float
    c_l_de: float
    c_d_de: float
    c_m_de: float
    c_y0: float
    c_ll0: float
    c_n0: float
    c_y_beta: float
    c_ll_beta: float
    c_n_beta: float
    c_y_p: float
    c_ll_p: float
    c_n_p: float
    c_y_r: float
    c_ll_r: float
    c_n_r: float
    c_y_da: float
    c_ll_da: float
    c_n_da: float
    c_y_dr: float
    c_ll_dr: float
    c_n_dr: float
    stall_alpha: float

    @property
    def gammas(self):
        """Inertia couplings of the body-rate equations."""
        g = self.jx * self.jz - self.jxz ** 2
        g1 = self.jxz * (self.jx - self.jy + self.jz) / g
        g2 = (self.jz * (self.jz - self.jy) + self.jxz ** 2) / g
        g3 = self.jz / g
        g4 = self.jxz / g
        g5 = (self.jz - self.jx) / self.jy
        g6 = self.jxz / self.jy
        g7 = ((self.jx - self.jy) * self.jx + self.jxz ** 2) / g
        g8 = self.jx / g
        return g1, g2, g3, g4, g5, g6, g7, g8


def load_airframe(path=None) -> AirframeParams:
    """Read airframe constants from an INI file (bundled Aerosonde by default)."""
    cp = configparser.ConfigParser()
    if path is None:
        text = resources.files("irltrack.data").joinpath("aerosonde.ini").read_text()
        cp.read_string(text)
    else:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    try:
        lon = cp["aero_longitudinal"]
        lat = cp["aero_lateral"]
        return AirframeParams(
            mass=cp.getfloat("mass", "mass_kg"),
            gravity=cp.getfloat("mass", "gravity_m_s2"),
            jx=cp.getfloat("inertia", "jx"),
            jy=cp.getfloat("inertia", "jy"),
            jz=cp.getfloat("inertia", "jz"),
            jxz=cp.getfloat("inertia", "jxz"),
            S=cp.getfloat("geometry", "wing_area_m2"),
            b=cp.getfloat("geometry", "wing_span_m"),
            c=cp.getfloat("geometry", "mean_chord_m"),
            rho=cp.getfloat("environment", "air_density_kg_m3"),
            s_prop=cp.getfloat("propulsion", "s_prop_m2"),
            c_prop=cp.getfloat("propulsion", "c_prop"),
            k_motor=cp.getfloat("propulsion", "k_motor"),
            c_l0=lon.getfloat("c_l0"), c_d0=lon.getfloat("c_d0"),
            c_m0=lon.getfloat("c_m0"),
            c_l_alpha=lon.getfloat("c_l_alpha"), c_d_alpha=lon.getfloat("c_d_alpha"),
            c_m_alpha=lon.getfloat("c_m_alpha"),
            c_l_q=lon.getfloat("c_l_q"), c_d_q=lon.getfloat("c_d_q"),
            c_m_q=lon.getfloat("c_m_q"),
            c_l_de=lon.getfloat("c_l_delta_e"), c_d_de=lon.getfloat("c_d_delta_e"),
            c_m_de=lon.getfloat("c_m_delta_e"),
            c_y0=lat.getfloat("c_y0"), c_ll0=lat.getfloat("c_l0"),
            c_n0=lat.getfloat("c_n0"),
            c_y_beta=lat.getfloat("c_y_beta"), c_ll_beta=lat.getfloat("c_l_beta"),
            c_n_beta=lat.getfloat("c_n_beta"),
            c_y_p=lat.getfloat("c_y_p"), c_ll_p=lat.getfloat("c_l_p"),
            c_n_p=lat.getfloat("c_n_p"),
            c_y_r=lat.getfloat("c_y_r"), c_ll_r=lat.getfloat("c_l_r"),
            c_n_r=lat.getfloat("c_n_r"),
            c_y_da=lat.getfloat("c_y_delta_a"), c_ll_da=lat.getfloat("c_l_delta_a"),
            c_n_da=lat.getfloat("c_n_delta_a"),
            c_y_dr=lat.getfloat("c_y_delta_r"), c_ll_dr=lat.getfloat("c_l_delta_r"),
            c_n_dr=lat.getfloat("c_n_delta_r"),
            stall_alpha=math.radians(cp.getfloat("limits", "stall_alpha_deg")),
        )
    except (configparser.Error, ValueError, KeyError) as exc:
        raise ConfigurationError(f"bad airframe file: {exc}") from exc


def forces_moments(state: np.ndarray, delta_e: float, delta_a: float,
                   delta_r: float, delta_t: float, pr: AirframeParams):
    """Body-frame forces (fx, fy, fz) and moments (l, m, n)."""
    u, v, w = state[U], state[V], state[W]
    phi, theta = state[PHI], state[THETA]
    p, q, r = state[P], state[Q], state[R]

    va = math.sqrt(u * u + v * v + w * w)
    if va > 1e-9:
        alpha = math.atan2(w, u)
        beta = math.asin(max(-1.0, min(1.0, v / va)))
        qbar = 0.5 * pr.rho * va * va
        rate_scale = 1.0 / (2.0 * va)
    else:
        alpha = beta = qbar = rate_scale = 0.0

    sa, ca = math.sin(alpha), math.cos(alpha)
    cl = pr.c_l0 + pr.c_l_alpha * alpha
    cd = pr.c_d0 + pr.c_d_alpha * alpha
    cx = -cd * ca + cl * sa
    cx_q = -pr.c_d_q * ca + pr.c_l_q * sa
    cx_de = -pr.c_d_de * ca + pr.c_l_de * sa
    cz = -cd * sa - cl * ca
    cz_q = -pr.c_d_q * sa - pr.c_l_q * ca
    cz_de = -pr.c_d_de * sa - pr.c_l_de * ca

    g = pr.gravity
    qS = qbar * pr.S
    thrust = 0.5 * pr.rho * pr.s_prop * pr.c_prop * \
        ((pr.k_motor * delta_t) ** 2 - va * va)

    fx = -pr.mass * g * math.sin(theta) \
        + qS * (cx + cx_q * pr.c * q * rate_scale + cx_de * delta_e) + thrust
    fy = pr.mass * g * math.cos(theta) * math.sin(phi) \
        + qS * (pr.c_y0 + pr.c_y_beta * beta
                + pr.c_y_p * pr.b * p * rate_scale + pr.c_y_r * pr.b * r * rate_scale
                + pr.c_y_da * delta_a + pr.c_y_dr * delta_r)
    fz = pr.mass * g * math.cos(theta) * math.cos(phi) \
        + qS * (cz + cz_q * pr.c * q * rate_scale + cz_de * delta_e)

    l_m = qS * pr.b * (pr.c_ll0 + pr.c_ll_beta * beta
                       + pr.c_ll_p * pr.b * p * rate_scale
                       + pr.c_ll_r * pr.b * r * rate_scale
                       + pr.c_ll_da * delta_a + pr.c_ll_dr * delta_r)
    m_m = qS * pr.c * (pr.c_m0 + pr.c_m_alpha * alpha
                       + pr.c_m_q * pr.c * q * rate_scale + pr.c_m_de * delta_e)
    n_m = qS * pr.b * (pr.c_n0 + pr.c_n_beta * beta
                       + pr.c_n_p * pr.b * p * rate_scale
                       + pr.c_n_r * pr.b * r * rate_scale
                       + pr.c_n_da * delta_a + pr.c_n_dr * delta_r)
    return fx, fy, fz, l_m, m_m, n_m


def uav_dynamics(state: np.ndarray, deflections: np.ndarray, pr: AirframeParams,
                 delta_t: float) -> np.ndarray:
    """Rigid-body state derivative under absolute surface deflections.

    Aborts on the Euler pitch singularity; the caller is responsible for
    keeping deflections inside the actuator bound.
    """
    de, da, dr = deflections
    phi, theta, psi = state[PHI], state[THETA], state[PSI]
    if abs(theta) >= _PITCH_GUARD:
        raise NumericFault(f"pitch angle {theta:.4f} rad reached the Euler "
                           "singularity guard", component=THETA)
    u, v, w = state[U], state[V], state[W]
    p, q, r = state[P], state[Q], state[R]
    fx, fy, fz, l_m, m_m, n_m = forces_moments(state, de, da, dr, delta_t, pr)

    sph, cph = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    sps, cps = math.sin(psi), math.cos(psi)
    tth = sth / cth

    out = np.empty(12)
    # body -> inertial kinematics
    out[PN] = (cth * cps) * u + (sph * sth * cps - cph * sps) * v \
        + (cph * sth * cps + sph * sps) * w
    out[PE] = (cth * sps) * u + (sph * sth * sps + cph * cps) * v \
        + (cph * sth * sps - sph * cps) * w
    out[PD] = -sth * u + sph * cth * v + cph * cth * w
    # body-frame accelerations
    out[U] = r * v - q * w + fx / pr.mass
    out[V] = p * w - r * u + fy / pr.mass
    out[W] = q * u - p * v + fz / pr.mass
    # attitude kinematics
    out[PHI] = p + sph * tth * q + cph * tth * r
    out[THETA] = cph * q - sph * r
    out[PSI] = (sph / cth) * q + (cph / cth) * r
    # moment equations
    g1, g2, g3, g4, g5, g6, g7, g8 = pr.gammas
    out[P] = g1 * p * q - g2 * q * r + g3 * l_m + g4 * n_m
    out[Q] = g5 * p * r - g6 * (p * p - r * r) + m_m / pr.jy
    out[R] = g7 * p * q - g1 * q * r + g4 * l_m + g8 * n_m
    return out


def rate_control_coupling(va: float, pr: AirframeParams) -> np.ndarray:
    """d(pdot,qdot,rdot)/d(delta_e,delta_a,delta_r) at dynamic pressure of va."""
    qbar = 0.5 * pr.rho * va * va
    qSb = qbar * pr.S * pr.b
    qSc = qbar * pr.S * pr.c
    g1, g2, g3, g4, g5, g6, g7, g8 = pr.gammas
    return np.array([
        [0.0, qSb * (g3 * pr.c_ll_da + g4 * pr.c_n_da),
         qSb * (g3 * pr.c_ll_dr + g4 * pr.c_n_dr)],
        [qSc * pr.c_m_de / pr.jy, 0.0, 0.0],
        [0.0, qSb * (g4 * pr.c_ll_da + g8 * pr.c_n_da),
         qSb * (g4 * pr.c_ll_dr + g8 * pr.c_n_dr)],
    ])


@dataclass(frozen=True)
class TrimPoint:
    """Frozen level-flight operating point: alpha, elevator, throttle at va."""

    va: float
    alpha: float
    delta_e: float
    delta_t: float

    def initial_state(self, altitude: float = 100.0) -> np.ndarray:
        state = np.zeros(12)
        state[PD] = -altitude
        state[U] = self.va * math.cos(self.alpha)
        state[W] = self.va * math.sin(self.alpha)
        state[THETA] = self.alpha
        return state


def trim_level_flight(pr: AirframeParams, va: float = 35.0) -> TrimPoint:
    """Solve (alpha, delta_e, delta_t) for steady wings-level flight at va."""

    def residual(x):
        alpha, de, dt_ = x
        state = np.zeros(12)
        state[U] = va * math.cos(alpha)
        state[W] = va * math.sin(alpha)
        state[THETA] = alpha
        try:
            d = uav_dynamics(state, np.array([de, 0.0, 0.0]), pr, dt_)
        except NumericFault:
            # solver wandered past the pitch guard; steer it back
            return [1e6 * (1.0 + abs(alpha)), 1e6, 1e6]
        return [d[U], d[W], d[Q]]

    sol = root(residual, x0=[0.05, -0.1, 0.5], tol=1e-12)
    if not sol.success or np.max(np.abs(residual(sol.x))) > 1e-8:
        raise OracleFailure(f"trim solver failed at va={va}: {sol.message}")
    alpha, de, dt_ = sol.x
    return TrimPoint(va=va, alpha=float(alpha), delta_e=float(de), delta_t=float(dt_))


@dataclass(frozen=True)
class OuterLoopGains:
    """Proportional gains from attitude error to desired body rates (1/s)."""

    k_phi: float = 8.0
    k_theta: float = 10.0
    k_psi: float = 12.0

    def __post_init__(self):
        if min(self.k_phi, self.k_theta, self.k_psi) <= 0:
            raise ConfigurationError("outer-loop gains must be positive")

    @property
    def vector(self):
        return np.array([self.k_phi, self.k_theta, self.k_psi])


def outer_loop(attitude: np.ndarray, attitude_des: np.ndarray,
               attitude_des_rate: np.ndarray, gains: OuterLoopGains) -> np.ndarray:
    """Desired body rates: feedforward minus gain times attitude error."""
    e = np.asarray(attitude, dtype=float) - np.asarray(attitude_des, dtype=float)
    return np.asarray(attitude_des_rate, dtype=float) - gains.vector * e


@dataclass(frozen=True)
class SetpointSchedule:
    """Piecewise-constant attitude setpoints: list of (t_start, (phi, theta, psi))."""

    entries: tuple

    def __post_init__(self):
        ts = [e[0] for e in self.entries]
        if not ts or ts[0] != 0.0 or sorted(ts) != ts or len(set(ts)) != len(ts):
            raise ConfigurationError(
                "setpoint schedule must start at t=0 with strictly increasing times")

    def attitude_des(self, t: float) -> np.ndarray:
        current = self.entries[0][1]
        for t_start, att in self.entries:
            if t >= t_start:
                current = att
        return np.asarray(current, dtype=float)

    @property
    def switch_times(self):
        return [e[0] for e in self.entries[1:]]


class UavAttitudeEnv:
    """Cascaded attitude-tracking environment around the frozen trim point.

    The stacked state pairs the body-rate tracking error with the live
    outer-loop rate commands; `advance` applies trim + deviation surfaces
    and integrates the 12-state model.
    """

    control_names = ("elevator", "aileron", "rudder")

    def __init__(self, params: AirframeParams, trim: TrimPoint,
                 schedule: SetpointSchedule, gains: OuterLoopGains = OuterLoopGains(),
                 altitude: float = 100.0):
        self.params = params
        self.trim = trim
        self.schedule = schedule
        self.gains = gains
        self.state = trim.initial_state(altitude)
        self._t = 0.0
        self.dyn = AugmentedDynamics(n=3, m=3, G=self._coupling, F=None)

    @property
    def m(self):
        return 3

    @property
    def x(self):
        return self.state

    @property
    def x_d(self):
        return self._rate_des(self._t)

    def _rate_des(self, t: float) -> np.ndarray:
        att = self.state[[PHI, THETA, PSI]]
        return outer_loop(att, self.schedule.attitude_des(t), np.zeros(3), self.gains)

    def _coupling(self, z) -> np.ndarray:
        va = float(np.linalg.norm(self.state[[U, V, W]]))
        out = np.zeros((6, 3))
        out[:3, :] = rate_control_coupling(va, self.params)
        return out

    def z(self) -> np.ndarray:
        rates = self.state[[P, Q, R]]
        xd = self._rate_des(self._t)
        return np.concatenate([rates - xd, xd])

    def advance(self, u_applied: np.ndarray, t: float, dt: float):
        surfaces = np.array([self.trim.delta_e, 0.0, 0.0]) + u_applied
        self.state = rk4_step(
            lambda tt, ss: uav_dynamics(ss, surfaces, self.params, self.trim.delta_t),
            t, self.state, dt)
        self._t = t + dt

    def check_domain(self, telemetry: Telemetry, t: float):
        uvw = self.state[[U, V, W]]
        va = float(np.linalg.norm(uvw))
        if va > 1e-9:
            alpha = math.atan2(self.state[W], self.state[U])
            if abs(alpha) > self.params.stall_alpha:
                telemetry.warn(f"stall regime: |alpha|={abs(alpha):.3f} rad "
                               f"near t={t:.2f}")
