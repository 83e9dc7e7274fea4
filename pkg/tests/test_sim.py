import math

import numpy as np
import pytest

from irltrack.basis import quad_basis
from irltrack.catalog import make_plant, make_reference
from irltrack.errors import ConfigurationError, NumericFault
from irltrack.learner import LearnerConfig
from irltrack.policy import SaturationSpec
from irltrack.sim import (AugmentedTrackingEnv, DitherSpec, SimConfig,
                          Telemetry, dither, rk4_step, run_experiment)


class TestRk4:
    def test_zero_field_keeps_state(self):
        x = np.array([1.0, -2.0])
        out = rk4_step(lambda t, s: np.zeros(2), 0.0, x, 0.1)
        assert np.array_equal(out, x)

    def test_exponential_accuracy(self):
        out = rk4_step(lambda t, s: -s, 0.0, np.array([1.0]), 0.1)
        assert abs(out[0] - math.exp(-0.1)) <= 1e-7

    def test_constant_field_exact(self):
        c = 2.5
        out = rk4_step(lambda t, s: np.array([c]), 0.0, np.array([1.0]), 0.25)
        assert out[0] == pytest.approx(1.0 + c * 0.25, abs=1e-15)

    def test_nonfinite_stage_faults(self):
        with pytest.raises(NumericFault):
            rk4_step(lambda t, s: np.array([np.nan]), 0.0, np.array([1.0]), 0.1)

    def test_bad_dt(self):
        with pytest.raises(ConfigurationError):
            rk4_step(lambda t, s: s, 0.0, np.array([1.0]), 0.0)


class TestDither:
    def test_zero_at_zero(self):
        assert dither(0.0) == 0.0

    def test_envelope_decay(self):
        late = max(abs(dither(t)) for t in np.linspace(500.0, 505.0, 2000))
        early = max(abs(dither(t)) for t in np.linspace(0.0, 5.0, 2000))
        assert late < 0.05 * early

    def test_formula_match_independent(self):
        # re-evaluation with a separately written expression
        for t in (1.0, 0.37, 12.9):
            n = 2.0 * math.exp(-0.009 * t)
            expected = n * (math.sin(11.9 * t) ** 2 * math.cos(19.5 * t)
                            + math.sin(2.2 * t) ** 2 * math.cos(5.8 * t)
                            + math.sin(1.2 * t) ** 2 * math.cos(9.5 * t)
                            + math.sin(2.4 * t) ** 5)
            assert abs(dither(t) - expected) <= 1e-12

    def test_coarse_bound(self):
        vals = [abs(dither(t)) for t in np.linspace(0, 100, 20000)]
        assert max(vals) <= 8.0


def small_setup(alpha=5.0, t_end=0.05, q1=(1.0, 1.0, 0.0, 0.0), amp=0.0):
    plant = make_plant("linear_osc", {"omega": 2.0})
    ref = make_reference("harmonic", {"omega": 2.0, "x_d0": "1 0"})
    basis = quad_basis(4)
    sat = SaturationSpec(u_m=5.0, R=np.array([[1.0]]))
    lcfg = LearnerConfig(alpha=alpha, gamma=0.1, T=1e-3, Q1=np.diag(q1), sat=sat,
                         K1=np.zeros(14), K2=np.zeros((14, 14)),
                         stabilizer_enabled=False, m_term_enabled=False)
    scfg = SimConfig(dt=1e-3, t_end=t_end)
    return plant, ref, basis, sat, lcfg, scfg, DitherSpec(amplitude=amp)


def test_run_experiment_zero_plant_constant_state():
    """Frozen dynamics: z never moves and I_hat is the discounted Q quadrature."""
    plant = make_plant("zero", {"n": 1, "m": 1})
    ref = make_reference("zero", {"n": 1})
    basis = quad_basis(2)
    sat = SaturationSpec(u_m=1.0, R=np.array([[1.0]]))
    lcfg = LearnerConfig(alpha=0.0, gamma=0.1, T=1e-3, Q1=np.diag([2.0, 0.0]),
                         sat=sat, K1=np.zeros(5), K2=np.zeros((5, 5)))
    scfg = SimConfig(dt=1e-3, t_end=0.01)
    tel = run_experiment(plant, ref, basis, sat, lcfg, scfg,
                         x0=np.array([3.0]))
    z = tel.columns("z")
    assert np.all(z == z[0])
    gamma, T = 0.1, 1e-3
    want = 2.0 * 9.0 * (-np.expm1(-gamma * T)) / gamma
    I = tel.column("I_hat")
    assert np.allclose(I[2:], want, rtol=1e-10)


def test_reference_trajectory_independent_of_learner():
    out = {}
    for alpha in (1.0, 50.0):
        plant, ref, basis, sat, lcfg, scfg, dith = small_setup(alpha=alpha,
                                                               t_end=0.2)
        tel = run_experiment(plant, ref, basis, sat, lcfg, scfg,
                             dither_spec=dith, x0=np.array([2.0, 0.0]))
        out[alpha] = tel.columns("xd")
    assert np.array_equal(out[1.0], out[50.0])


def test_telemetry_ordering_and_finiteness():
    tel = Telemetry(dim_z=2, dim_x=1, dim_xd=1, m=1, n1=2)
    tel.append(0.0, [0, 0], [0], [0], [0], 0, 0, 0, 1, 0, 0, [0, 0])
    with pytest.raises(ConfigurationError):
        tel.append(0.0, [0, 0], [0], [0], [0], 0, 0, 0, 1, 0, 0, [0, 0])
    with pytest.raises(NumericFault):
        tel.append(1.0, [np.nan, 0], [0], [0], [0], 0, 0, 0, 1, 0, 0, [0, 0])


def test_saturation_holds_at_every_record():
    plant, ref, basis, sat, lcfg, scfg, _ = small_setup(alpha=500.0, t_end=0.3)
    tel = run_experiment(plant, ref, basis, sat, lcfg, scfg,
                         dither_spec=DitherSpec(amplitude=1.0),
                         x0=np.array([4.0, 1.0]))
    u = tel.columns("u_")
    assert np.max(np.abs(u)) <= sat.u_m


def test_run_experiment_rejects_bad_law_and_windows():
    plant, ref, basis, sat, lcfg, scfg, dith = small_setup()
    with pytest.raises(ConfigurationError):
        run_experiment(plant, ref, basis, sat, lcfg, scfg, law="fancy")
    bad_sim = SimConfig(dt=1e-3, t_end=5e-4)
    with pytest.raises(ConfigurationError):
        run_experiment(plant, ref, basis, sat, lcfg, bad_sim)


def test_numeric_fault_carries_partial_telemetry():
    plant, ref, basis, sat, lcfg, scfg, _ = small_setup(alpha=1e308, t_end=0.5)
    with pytest.raises(NumericFault) as exc:
        run_experiment(plant, ref, basis, sat, lcfg, scfg,
                       x0=np.array([5.0, 0.0]))
    tel = exc.value.telemetry
    assert tel is not None and len(tel.rows) >= 1


def test_env_advances_plant_and_reference():
    plant = make_plant("integrator", {"n": 1})
    ref = make_reference("zero", {"n": 1})
    env = AugmentedTrackingEnv(plant, ref, x0=np.array([0.0]))
    env.advance(np.array([2.0]), 0.0, 0.5)
    assert env.x[0] == pytest.approx(1.0, abs=1e-12)
    assert env.x_d[0] == 0.0


def test_operating_box_warning_recorded():
    from irltrack.models import AffinePlant, ReferenceModel

    plant = AffinePlant(n=1, m=1, f=lambda x: np.array([2.0]),
                        g=lambda x: np.ones((1, 1)), name="ramp",
                        domain=(np.array([-1.0]), np.array([1.0]))).validate()
    ref = ReferenceModel(H=lambda xd: np.zeros(1), x_d0=np.zeros(1),
                         name="zero").validate()
    basis = quad_basis(2)
    sat = SaturationSpec(u_m=1.0, R=np.array([[1.0]]))
    lcfg = LearnerConfig(alpha=0.0, gamma=0.1, T=1e-3, Q1=np.zeros((2, 2)),
                         sat=sat, K1=np.zeros(5), K2=np.zeros((5, 5)))
    scfg = SimConfig(dt=1e-3, t_end=1.0)
    tel = run_experiment(plant, ref, basis, sat, lcfg, scfg,
                         x0=np.array([0.0]))
    assert any("operating box" in w for w in tel.warnings)
