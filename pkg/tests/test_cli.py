import json

import numpy as np
import pytest
from pydantic import ValidationError

from app.cli import main
from app.cli.checks import CheckRecord, build_tasks, pohozaev_gaussian
from app.cli.config import load_config
from app.cli.output import output_lock, write_rows
from app.cli.plots import line_plot
from app.field import Field3, Gaussian, Grid, write_field
from app.functionals import Params, report
from app.profiles import GaussianProfile, ZeroProfile
from app.shared.exceptions import ConfigError, OutputLockedError, ParameterError

BASE = """
schema_version = 1
seed = 3

[grid]
n = 32
L_box = 8.0

[params]
omega = 1.0
e = 0.1
p = 3.0
"""

GAUSSIAN_PROFILE = """
[profile]
kind = "gaussian"
epsilon = 0.5
alpha = 1.0
"""


@pytest.fixture
def write_config(tmp_path):
    def write(*tables: str) -> str:
        path = tmp_path / "experiment.toml"
        path.write_text(BASE + "".join(tables))
        return str(path)

    return write


class TestLoadConfig:
    def test_defaults(self, write_config):
        config = load_config(write_config())
        assert config.seed == 3
        assert config.grid.build() == Grid(n=32, box_half_width=8.0)
        assert isinstance(config.rho, ZeroProfile)
        assert config.evolve is None
        assert config.verify.random_fields == 50
        assert config.input_path(None) == config.out / "u0.bin"

    def test_profile_table(self, write_config):
        config = load_config(write_config(GAUSSIAN_PROFILE))
        assert config.rho == GaussianProfile(epsilon=0.5, alpha=1.0)

    def test_overrides(self, write_config, tmp_path):
        config = load_config(write_config(), out=str(tmp_path / "run"), seed=11)
        assert config.seed == 11
        assert config.out == tmp_path / "run"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.toml")

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("schema_version = = 1\n")
        with pytest.raises(ConfigError, match="Malformed"):
            load_config(path)

    def test_schema_version(self, tmp_path):
        path = tmp_path / "old.toml"
        path.write_text(BASE.replace("schema_version = 1", "schema_version = 2"))
        with pytest.raises(ConfigError, match="schema_version"):
            load_config(path)

    def test_unknown_key(self, write_config):
        with pytest.raises(ValidationError):
            load_config(write_config("\n[fibering]\nlambda_grid = [1.0]\n"))

    def test_instability_needs_supercritical_power(self, tmp_path):
        path = tmp_path / "sub.toml"
        path.write_text(BASE.replace("p = 3.0", "p = 2.2") + "\n[evolve]\nlam = 1.2\n")
        with pytest.raises(ParameterError, match="7/3"):
            load_config(path)

    def test_fibering_sweep(self, write_config):
        sweep = load_config(write_config()).fibering.sweep()
        assert len(sweep) == 56
        assert sweep[0] == pytest.approx(0.25)
        assert sweep[-1] == pytest.approx(3.0)


class TestOutput:
    def test_lock_is_exclusive(self, tmp_path):
        with output_lock(tmp_path / "run") as out:
            with pytest.raises(OutputLockedError):
                with output_lock(out):
                    pass
        assert not (tmp_path / "run" / ".spoison.lock").exists()

    def test_rows_keep_full_precision(self, tmp_path):
        path = write_rows(tmp_path / "rows.csv", ["lam", "F"], [{"lam": 0.1, "F": 1 / 3}])
        assert path.read_text().splitlines() == ["lam,F", f"0.1,{1 / 3!r}"]

    def test_plots_are_reproducible(self, tmp_path):
        x = np.linspace(0.0, 1.0, 20)
        first = line_plot(tmp_path / "a.svg", x, {"f": x**2}, xlabel="lam", vline=0.5)
        second = line_plot(tmp_path / "b.svg", x, {"f": x**2}, xlabel="lam", vline=0.5)
        assert first.read_bytes() == second.read_bytes()


class TestChecks:
    def test_record_passes_on_tolerance(self):
        assert CheckRecord.of("a", "x = x", 1e-13, 1e-12).passed
        assert not CheckRecord.of("a", "x = x", 1e-11, 1e-12).passed
        assert not CheckRecord.of("a", "x = x", float("nan"), 1.0).passed

    def test_default_suites(self, write_config):
        tasks = build_tasks(load_config(write_config()))
        assert len(tasks) == 16
        assert len({task.id for task in tasks}) == 16

    def test_record_serializes_with_reference_keys(self):
        record = CheckRecord.of("a", "x = x", 1e-13, 1e-12)
        assert set(record.model_dump(by_alias=True)) == {"name", "paper_ref", "residual", "tolerance", "pass"}
        assert json.loads(record.model_dump_json(by_alias=True))["pass"] is True

    @pytest.mark.parametrize(("omega", "p"), [(1.0, 3.0), (0.5, 3.5)])
    def test_pohozaev_gaussian_sits_on_both_constraints(self, grid64, omega, p):
        params = Params(omega=omega, e=0.0, p=p)
        rep = report(pohozaev_gaussian(grid64, params), params, ZeroProfile())
        scale = rep.A + rep.B + rep.C
        assert abs(rep.Q) < 1e-8 * scale
        assert abs(rep.J) < 1e-8 * scale


class TestMain:
    def test_missing_config_reports_error(self, tmp_path, capsys):
        assert main(["verify", "--config", str(tmp_path / "absent.toml")]) == 2
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "ConfigError"

    def test_evolve_needs_ground_state(self, write_config, tmp_path):
        assert main(["evolve", "--config", write_config(), "--out", str(tmp_path / "run")]) == 2

    def test_verify_condition_suite(self, write_config, tmp_path, capsys):
        path = write_config('\n[verify]\nsuites = ["condition"]\n')
        assert main(["verify", "--config", path, "--out", str(tmp_path / "run")]) == 0
        lines = (tmp_path / "run" / "verify.jsonl").read_text().splitlines()
        assert len(lines) == 3
        assert all(json.loads(line)["pass"] for line in lines)
        assert len(capsys.readouterr().out.splitlines()) == 3

    def test_verify_fibering_suite(self, write_config, tmp_path):
        path = write_config(GAUSSIAN_PROFILE, '\n[verify]\nsuites = ["fibering"]\n')
        assert main(["verify", "--config", path, "--out", str(tmp_path / "run")]) == 0
        records = [json.loads(line) for line in (tmp_path / "run" / "verify.jsonl").read_text().splitlines()]
        assert [r["name"] for r in records] == [
            "fibering.g_one",
            "fibering.dg_one",
            "fibering.g_floor",
            "fibering.energy_inequality",
            "fibering.mass_bound",
            "nehari.residual",
            "nehari.reference",
            "fibering.dilation_signs",
        ]
        assert all(r["pass"] for r in records)

    def test_profile_check(self, write_config, tmp_path):
        path = write_config(GAUSSIAN_PROFILE)
        assert main(["profile-check", "--config", path, "--out", str(tmp_path / "run")]) == 0
        summary = json.loads((tmp_path / "run" / "profile.json").read_text())
        assert summary["kind"] == "gaussian"
        norms = summary["norms"]
        assert summary["smallness"] == pytest.approx(0.01 * (norms["rho"] + norms["xgrad"] + norms["xhess"]))
        assert summary["condition"]["holds"] is False

    def test_fibering(self, write_config, tmp_path):
        out = tmp_path / "run"
        out.mkdir()
        grid = Grid(n=32, box_half_width=8.0)
        write_field(out / "u0.bin", Field3.from_generator(grid, Gaussian(amplitude=3.0, beta=1.0)))
        path = write_config(GAUSSIAN_PROFILE, "\n[fibering]\nlambdas = [0.5, 1.0, 1.5]\nplots = false\n")
        assert main(["fibering", "--config", path, "--out", str(out)]) == 0
        rows = (out / "fibering.csv").read_text().splitlines()
        assert rows[0] == "lam,J,f,F,G,dF,d2F,dG,d2F_analytic,uniqueness_remainder"
        assert len(rows) == 4
        assert not (out / "F.svg").exists()
