import os

import numpy as np
import pytest

import irltrack.cli as cli
from irltrack.config import parse_config, resolve, validate_config
from irltrack.errors import ConfigurationError


def bundled(name):
    return cli.resolve_config_path(name)


def edited_config(tmp_path, name, overrides):
    src = bundled(name)
    dst = tmp_path / "edited.ini"
    from irltrack.config import apply_overrides
    apply_overrides(src, overrides, dst)
    return str(dst)


class TestValidate:
    def test_bundled_configs_are_valid(self):
        for name in ("linear_benchmark", "uav_attitude"):
            cfg, errors = parse_config(bundled(name))
            assert not errors
            assert not validate_config(cfg)
            resolve(cfg)

    def test_negative_um_names_field(self, tmp_path):
        path = edited_config(tmp_path, "linear_benchmark",
                             ["saturation.u_m=-1"])
        cfg, errors = parse_config(path)
        errors += validate_config(cfg)
        assert any("saturation.u_m" in e for e in errors)

    def test_window_shorter_than_dt_names_constraint(self, tmp_path):
        path = edited_config(tmp_path, "linear_benchmark",
                             ["learner.t_window_s=0.0005"])
        cfg, errors = parse_config(path)
        errors += validate_config(cfg)
        assert any("sim.dt_s" in e and "t_window_s" in e for e in errors)

    def test_unknown_plant_lists_catalog(self, tmp_path):
        path = edited_config(tmp_path, "linear_benchmark",
                             ["experiment.plant=warp_drive"])
        cfg, errors = parse_config(path)
        errors += validate_config(cfg)
        assert any("experiment.plant" in e for e in errors)

    def test_cli_exit_codes(self, tmp_path):
        assert cli.main(["validate", "linear_benchmark"]) == cli.EXIT_OK
        bad = edited_config(tmp_path, "linear_benchmark", ["saturation.u_m=-1"])
        assert cli.main(["validate", bad]) == cli.EXIT_CONFIG
        assert cli.main(["validate", "no_such_config"]) == cli.EXIT_CONFIG


class TestRun:
    def test_artifacts_written(self, tmp_path):
        out = tmp_path / "run"
        code = cli.main(["run", "linear_benchmark",
                         "--override", "sim.t_end_s=0.5",
                         "--out", str(out)])
        assert code == cli.EXIT_OK
        assert (out / "telemetry.csv").is_file()
        assert (out / "manifest.txt").is_file()
        assert (out / "plot_series.py").is_file()
        series = sorted(os.listdir(out / "series"))
        assert "value.dat" in series and "hjb_error.dat" in series
        assert "weight_error_vs_oracle.dat" in series
        assert any(s.startswith("weight_") for s in series)
        header = (out / "telemetry.csv").read_text().splitlines()[0]
        assert header.startswith("t,z0,")
        manifest = (out / "manifest.txt").read_text()
        assert "status = ok" in manifest and "code_version" in manifest

    def test_law_override_recorded(self, tmp_path):
        out = tmp_path / "runb"
        code = cli.main(["run", "linear_benchmark",
                         "--override", "sim.t_end_s=0.1",
                         "--law", "baseline", "--out", str(out)])
        assert code == cli.EXIT_OK
        assert "law = baseline" in (out / "manifest.txt").read_text()

    def test_reproducible_byte_identical(self, tmp_path):
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / f"rep_{tag}"
            assert cli.main(["run", "linear_benchmark",
                             "--override", "sim.t_end_s=0.5",
                             "--out", str(out)]) == cli.EXIT_OK
            outs.append((out / "telemetry.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_numeric_fault_flushes_partial_artifacts(self, tmp_path):
        out = tmp_path / "fault"
        code = cli.main(["run", "linear_benchmark",
                         "--override", "learner.alpha=1e308",
                         "--override", "sim.t_end_s=1.0",
                         "--out", str(out)])
        assert code == cli.EXIT_NUMERIC
        assert (out / "telemetry.csv").is_file()
        assert "numeric fault" in (out / "manifest.txt").read_text()

    def test_config_error_exit(self, tmp_path):
        out = tmp_path / "cfg"
        code = cli.main(["run", "linear_benchmark",
                         "--override", "saturation.u_m=-5",
                         "--out", str(out)])
        assert code == cli.EXIT_CONFIG


class TestCheck:
    def test_fresh_suite_passes(self, capsys):
        assert cli.main(["check"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 6 and "[FAIL]" not in out

    def test_perturbed_penalty_detected(self, capsys):
        assert cli.main(["check", "--debug-perturb-penalty", "1e-3"]) == \
            cli.EXIT_ORACLE
        out = capsys.readouterr().out
        assert "[FAIL] penalty closed-form vs quadrature" in out

    def test_gamma_zero_edge_uses_cT_form(self, capsys):
        assert cli.main(["check", "--gamma", "0"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "gamma=0" in out


class TestSweep:
    def test_grid_cross_product_and_summary(self, tmp_path):
        out = tmp_path / "sweep"
        code = cli.main(["sweep", "linear_benchmark",
                         "--override", "sim.t_end_s=0.2",
                         "--override", "learner.alpha=150",
                         "--grid", "experiment.law=novel,baseline",
                         "--grid", "learner.q2=0,0.1",
                         "--out", str(out), "--workers", "2"])
        assert code == cli.EXIT_OK
        lines = (out / "summary.csv").read_text().splitlines()
        assert len(lines) == 5  # header + 4 rows
        header = lines[0].split(",")
        for col in ("run", "status", "ehat_rms_last10", "peak_z_norm",
                    "settle_time_s", "wall_s"):
            assert col in header
        assert all("ok" in ln for ln in lines[1:])

    def test_containment_row_equivalence(self, tmp_path):
        """novel law with all extra machinery off == baseline, to the byte."""
        outs = {}
        for law in ("novel", "baseline"):
            out = tmp_path / f"eq_{law}"
            assert cli.main(["run", "linear_benchmark",
                             "--override", "sim.t_end_s=1.0",
                             "--override", "learner.alpha=150",
                             "--override", "learner.q2=0",
                             "--override", "learner.k1_gain=0",
                             "--override", "learner.k2_gain=0",
                             "--override", "learner.stabilizer=off",
                             "--override", "learner.m_term=off",
                             "--law", law, "--out", str(out)]) == cli.EXIT_OK
            W = np.loadtxt(out / "telemetry.csv", delimiter=",", skiprows=1)
            outs[law] = W
        diff = np.max(np.abs(outs["novel"] - outs["baseline"]))
        assert diff <= 1e-10

    def test_sweep_survives_individual_faults(self, tmp_path):
        out = tmp_path / "sweepf"
        code = cli.main(["sweep", "linear_benchmark",
                         "--override", "sim.t_end_s=0.2",
                         "--grid", "learner.alpha=150,1e308",
                         "--out", str(out)])
        lines = (out / "summary.csv").read_text().splitlines()
        assert len(lines) == 3
        assert code == cli.EXIT_NUMERIC  # one run faulted
        assert any("exit3" in ln for ln in lines[1:])


def test_resolve_config_path_rejects_unknown():
    with pytest.raises(ConfigurationError):
        cli.resolve_config_path("definitely_missing_config")


class TestUavCliSurface:
    def test_uav_series_covers_six_panels(self, tmp_path):
        out = tmp_path / "uav"
        code = cli.main(["run", "uav_attitude",
                         "--override", "sim.t_end_s=0.05",
                         "--out", str(out)])
        assert code == cli.EXIT_OK
        series = set(os.listdir(out / "series"))
        assert "att_phi_deg.dat" in series and "att_phi_des_deg.dat" in series
        assert "rate_err_0.dat" in series
        assert "state_00.dat" in series and "state_11.dat" in series
        assert "ctrl_elevator.dat" in series and "ctrl_rudder.dat" in series
        assert "weight_26.dat" in series
        assert "value.dat" in series

    def test_trim_failure_maps_to_oracle_exit(self, tmp_path):
        out = tmp_path / "trimfail"
        code = cli.main(["run", "uav_attitude",
                         "--override", "plant.va_m_s=0.5",
                         "--out", str(out)])
        assert code == cli.EXIT_ORACLE


def test_malformed_ini_reports_parse_error(tmp_path):
    bad = tmp_path / "broken.ini"
    bad.write_text("[experiment\nname = x\n")
    cfg, errors = parse_config(str(bad))
    assert cfg is None
    assert errors and "parse error" in errors[0]
    assert cli.main(["validate", str(bad)]) == cli.EXIT_CONFIG


def test_catalog_registration_and_lookup():
    import numpy as np
    from irltrack import catalog
    from irltrack.models import AffinePlant

    @catalog.register_plant("test_cubic")
    def _cubic(params):
        return AffinePlant(n=1, m=1, f=lambda x: x ** 3,
                           g=lambda x: np.ones((1, 1)), name="cubic").validate()

    try:
        assert "test_cubic" in catalog.plant_names()
        plant = catalog.make_plant("test_cubic")
        assert plant.f(np.array([2.0]))[0] == 8.0
        with pytest.raises(ConfigurationError):
            catalog.make_plant("missing_plant")
    finally:
        catalog._PLANTS.pop("test_cubic", None)


def test_missing_required_keys_reported(tmp_path):
    p = tmp_path / "min.ini"
    p.write_text("[experiment]\nplant = zero\nreference = zero\n")
    cfg, errors = parse_config(str(p))
    joined = "\n".join(errors)
    assert "learner.alpha: missing required key" in joined
    assert "saturation.u_m" in joined
    assert "sim.dt_s" in joined
