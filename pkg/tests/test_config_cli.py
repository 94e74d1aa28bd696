import io
import textwrap

import numpy as np
import pytest

from preb import cli
from preb.config import ConfigError, parse_config
from preb.pipeline import run_ness
from preb.sweeps import SWEEP_COLUMNS, apply_axis, run_sweep, sweep_to_csv
from preb.thermo import REPORT_COLUMNS
from preb.validation import run_validation

ENGINE_INI = textwrap.dedent("""\
    [system]
    g = 1.0

    [bath1]
    kind = lorentzian
    kappa = 2.0
    lambda = 0.05
    omega0 = 2.0
    cutoff = 6.0
    beta = 0.1
    mu = -2.0

    [bath2]
    lambda = 0.05
    omega0 = -1.0
    beta = 1.0
    mu = -2.0

    [process]
    tau = 1.0
    l0 = 5
""")


@pytest.fixture
def engine_ini(tmp_path):
    path = tmp_path / "engine.ini"
    path.write_text(ENGINE_INI)
    return str(path)


class TestConfigParsing:
    def test_full_roundtrip(self, engine_ini):
        cfg = parse_config(engine_ini)
        assert cfg.g == 1.0
        assert cfg.bath1.beta == 0.1 and cfg.bath2.beta == 1.0
        assert cfg.bath1.omega0 == 2.0 and cfg.bath2.omega0 == -1.0
        assert cfg.process.tau == 1.0 and cfg.process.l_0 == 5

    def test_defaults_fill_missing_keys(self, tmp_path):
        path = tmp_path / "tiny.ini"
        path.write_text("[process]\ntau = 0.5\n")
        cfg = parse_config(path)
        assert cfg.bath1.kappa == 2.0 and cfg.bath1.cutoff == 6.0
        assert cfg.bath2.omega0 == -1.0
        assert cfg.process.tau == 0.5

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[bath1]\nwidth = 3\n")
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(path)

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[bath3]\nbeta = 1\n")
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config(path)

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[process]\ntau = one\n")
        with pytest.raises(ConfigError, match="bad value"):
            parse_config(path)

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config("/nonexistent/run.ini")

    def test_invalid_physics_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[bath1]\nbeta = -2\n")
        with pytest.raises(ConfigError):
            parse_config(path)


class TestSweeps:
    def sweep_ini(self, tmp_path, axis="tau", points=3):
        path = tmp_path / "sweep.ini"
        path.write_text(ENGINE_INI + textwrap.dedent(f"""
            [sweep]
            axis = {axis}
            min = 0.5
            max = 2.0
            points = {points}
            spacing = log
        """))
        return str(path)

    def test_rows_match_single_point_runs(self, tmp_path):
        cfg = parse_config(self.sweep_ini(tmp_path))
        rows = run_sweep(cfg)
        assert len(rows) == 3
        for row in rows:
            solo = run_ness(apply_axis(cfg, "tau", row.value))
            assert row.error is None
            assert row.report.p_ext == solo.p_ext
            assert row.report.qdot == solo.qdot

    def test_csv_is_deterministic(self, tmp_path):
        cfg = parse_config(self.sweep_ini(tmp_path))
        buf1, buf2 = io.StringIO(), io.StringIO()
        sweep_to_csv(buf1, run_sweep(cfg), axis="tau")
        sweep_to_csv(buf2, run_sweep(cfg), axis="tau")
        assert buf1.getvalue() == buf2.getvalue()
        header = buf1.getvalue().splitlines()[0]
        assert header == ",".join(SWEEP_COLUMNS)

    def test_failing_points_land_in_error_column(self, tmp_path):
        table = tmp_path / "weak.csv"
        w = np.linspace(-6, 6, 65)
        lines = ["omega,J"] + [f"{wi},1e-290" for wi in w]
        table.write_text("\n".join(lines) + "\n")
        path = tmp_path / "run.ini"
        path.write_text(textwrap.dedent(f"""\
            [bath1]
            kind = tabulated
            table = {table}
            beta = 0.1

            [bath2]
            kind = tabulated
            table = {table}
            beta = 1.0

            [sweep]
            axis = tau
            min = 0.5
            max = 1.0
            points = 2
            spacing = linear
        """))
        rows = run_sweep(parse_config(path))
        assert all(r.report is None for r in rows)
        assert all("NESS" in r.error or "Error" in r.error for r in rows)
        buf = io.StringIO()
        sweep_to_csv(buf, rows, axis="tau")
        assert len(buf.getvalue().splitlines()) == 3

    def test_parallel_equals_serial(self, tmp_path):
        cfg = parse_config(self.sweep_ini(tmp_path))
        serial = run_sweep(cfg, jobs=1)
        parallel = run_sweep(cfg, jobs=2)
        for a, b in zip(serial, parallel):
            assert a.report.csv_row() == b.report.csv_row()


class TestCli:
    def test_ness_command(self, engine_ini, tmp_path, capsys):
        out = tmp_path / "row.csv"
        assert cli.main(["ness", engine_ini, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(REPORT_COLUMNS)
        cells = lines[1].split(",")
        assert cells[REPORT_COLUMNS.index("regime")] == "heat-engine"

    def test_ness_to_stdout(self, engine_ini, capsys):
        assert cli.main(["ness", engine_ini]) == 0
        assert "heat-engine" in capsys.readouterr().out

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.ini"
        path.write_text("[bath1]\nbeta = nope\n")
        assert cli.main(["ness", str(path)]) == 2

    def test_no_ness_exit_code(self, tmp_path, capsys):
        path = tmp_path / "weak.ini"
        path.write_text(textwrap.dedent("""\
            [bath1]
            kappa = 1e-300
            [bath2]
            kappa = 1e-300
        """))
        assert cli.main(["ness", str(path)]) == 3

    def test_trajectory_command(self, engine_ini, tmp_path):
        out = tmp_path / "traj.csv"
        assert cli.main(["trajectory", engine_ini, "--steps", "5",
                         "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("step,deltaU,W_ext")
        assert len(lines) == 6

    def test_chainmap_command(self, engine_ini, tmp_path):
        base = tmp_path / "chain"
        assert cli.main(["chainmap", engine_ini, "--depth", "6",
                         "--out", str(base)]) == 0
        from preb.chainmap import ChainCoefficients
        cc = ChainCoefficients.from_csv(f"{base}.bath1.csv")
        assert cc.depth == 6
        assert cc.hop[0] == pytest.approx(1.0, abs=0.03)

    def test_negf_command(self, engine_ini, tmp_path):
        out = tmp_path / "negf.csv"
        trans = tmp_path / "trans.csv"
        assert cli.main(["negf", engine_ini, "--out", str(out),
                         "--transmission", str(trans)]) == 0
        header, row = out.read_text().splitlines()
        assert header.startswith("I,J,Q1,Q2")
        assert len(row.split(",")) == len(header.split(","))
        t_lines = trans.read_text().splitlines()
        assert t_lines[0] == "omega,T"
        assert len(t_lines) > 100

    def test_depth_and_l0_overrides(self, engine_ini):
        from preb.pipeline import build_bundle
        args_cfg = cli._load_config(
            cli._build_parser().parse_args(["ness", engine_ini, "--l0", "7"]))
        assert build_bundle(args_cfg).l_b == 11  # ceil(g_B) + 7 with g_B ~ 3


class TestValidationHarness:
    def test_quick_subset_passes(self):
        results = run_validation("quick")
        assert all(r.passed for r in results)

    def test_tampering_is_detected(self, monkeypatch):
        """Corrupting the Lyapunov solver must fail at least one criterion."""
        import preb.pipeline as pipeline
        real = pipeline.solve_dlyap_direct
        monkeypatch.setattr(pipeline, "solve_dlyap_direct",
                            lambda g, p: 1.01 * real(g, p))
        results = run_validation("quick", only=["C01"])
        assert not results[0].passed

    def test_validate_cli_exit_code_on_failure(self, monkeypatch, capsys):
        import preb.pipeline as pipeline
        real = pipeline.solve_dlyap_direct
        monkeypatch.setattr(pipeline, "solve_dlyap_direct",
                            lambda g, p: 1.01 * real(g, p))
        assert cli.main(["validate"]) == 5
