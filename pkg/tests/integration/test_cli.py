"""
Integration tests for the dispersia command-line interface
"""

import json
import os

import pytest
from click.testing import CliRunner

from dispersia import cli
from modules.shallow_water.storage import read_field, read_json


@pytest.fixture
def runner():
    """Click runner keeping stdout and stderr apart"""
    return CliRunner(mix_stderr=False)


def invoke(runner, args):
    return runner.invoke(cli, args, obj={})


def payload(result):
    return json.loads(result.stdout)


class TestSolutionCommand:
    """Test the solution command"""

    @pytest.mark.integration
    def test_soliton_text_output(self, runner):
        """Test the human-readable soliton summary"""
        result = invoke(runner, ["solution", "soliton"])

        assert result.exit_code == 0
        assert "family: soliton" in result.stdout
        assert "amplitude:" in result.stdout
        assert "speed:" in result.stdout

    @pytest.mark.integration
    def test_soliton_json_output(self, runner):
        """Test that --json prints the family document and metrics"""
        result = invoke(runner, ["solution", "soliton", "--k", "1", "--l", "0.5", "--json"])

        assert result.exit_code == 0
        data = payload(result)
        assert data["family"]["kind"] == "soliton"
        assert data["family"]["format_version"] == 1
        assert data["metrics"]["amplitude"] > 0
        assert "zero_mean" not in data

    @pytest.mark.integration
    def test_physical_family_reports_zero_mean(self, runner):
        """Test the zero-mean check on a physical cnoidal wave"""
        result = invoke(runner, ["solution", "cnoidal-phys", "--json"])

        assert result.exit_code == 0
        assert payload(result)["zero_mean"]["status"] == "PASS"

    @pytest.mark.integration
    def test_superposition_amplitude(self, runner):
        """Test the physical superposition amplitude printed at the table parameters"""
        result = invoke(runner, ["solution", "superposition-phys", "--m", "0.85989", "--k", "1", "--l", "0.5",
                                 "--alpha", "0.15", "--beta", "0.1", "--gamma", "0.05", "--json"])

        assert result.exit_code == 0
        assert payload(result)["metrics"]["amplitude"] == pytest.approx(0.82388, abs=2e-4)

    @pytest.mark.integration
    def test_solution_and_table_agree(self, runner):
        """Test solution and table report the same cnoidal amplitude"""
        single = payload(invoke(runner, ["solution", "cnoidal-phys", "--json"]))
        table = payload(invoke(runner, ["table", "--json"]))

        row = next(r for r in table["rows"] if r["name"] == "A_cno")
        assert single["metrics"]["amplitude"] == pytest.approx(row["value"], abs=1e-12)

    @pytest.mark.integration
    def test_out_directory(self, runner, output_dir):
        """Test that --out writes the family, the profile and the manifest"""
        result = invoke(runner, ["solution", "soliton", "--samples", "64", "--out", output_dir])

        assert result.exit_code == 0
        assert os.path.exists(os.path.join(output_dir, "family.json"))
        assert os.path.exists(os.path.join(output_dir, "run.json"))
        with open(os.path.join(output_dir, "profile.csv")) as f:
            lines = f.read().splitlines()
        assert lines[0] == "xi,u"
        assert len(lines) == 65
        manifest = read_json(os.path.join(output_dir, "run.json"))
        assert manifest["command"] == "solution"
        assert manifest["outputs"]["profile"] == "profile.csv"

    @pytest.mark.integration
    def test_invalid_parameters_exit_2(self, runner):
        """Test that a non-positive beta is a validation error"""
        result = invoke(runner, ["solution", "soliton", "--beta", "0", "--json"])

        assert result.exit_code == 2
        data = payload(result)
        assert data["error"] == "ValidationError"
        assert data["exit_code"] == 2

    @pytest.mark.integration
    def test_elliptic_parameter_out_of_range(self, runner):
        """Test that m outside [0, 1] is rejected"""
        result = invoke(runner, ["solution", "cnoidal-math", "--m", "1.5"])

        assert result.exit_code == 2
        assert "Error:" in result.stderr


class TestTableCommand:
    """Test the reference table command"""

    @pytest.mark.integration
    def test_table_passes(self, runner):
        """Test that the default parameters reproduce the reference table"""
        result = invoke(runner, ["table", "--json"])

        assert result.exit_code == 0
        data = payload(result)
        assert data["passed"] is True
        assert data["tolerance"] == 2e-4
        assert [row["name"] for row in data["rows"]] == ["A_sol", "A_cno", "A_sup", "v_sol", "v_cno", "v_sup"]

    @pytest.mark.integration
    def test_table_text_output(self, runner):
        """Test the text rows"""
        result = invoke(runner, ["table"])

        assert result.exit_code == 0
        assert result.stdout.count("PASS") == 6

    @pytest.mark.integration
    def test_tight_tolerance_exit_3(self, runner):
        """Test that a tolerance below the rounding of the references fails with the report printed"""
        result = invoke(runner, ["table", "--tolerance", "1e-12", "--json"])

        assert result.exit_code == 3
        assert payload(result)["passed"] is False


class TestResidualCommand:
    """Test the residual command"""

    @pytest.mark.integration
    def test_help_states_gardner_default(self, runner):
        """Test the help text names the bracket term gardner21 leaves out by default"""
        result = invoke(runner, ["residual", "--help"])

        text = " ".join(result.stdout.split())
        assert result.exit_code == 0
        assert "gardner21 leaves the u I[u^2 u_yy] term out" in text
        assert "--printed-quartic" in text

    @pytest.mark.integration
    def test_soliton_plane_wave_passes(self, runner):
        """Test the KdV residual of the soliton in plane-wave mode"""
        result = invoke(runner, ["residual", "kdv21", "--soliton", "--json"])

        assert result.exit_code == 0
        data = payload(result)
        assert data["report"]["mode"] == "plane-wave"
        assert data["report"]["max_abs"] < 1e-10
        assert data["threshold"] == 1e-10

    @pytest.mark.integration
    def test_kp_soliton_classical(self, runner):
        """Test the classical KP residual of the KP soliton"""
        result = invoke(runner, ["residual", "kp-classical", "--kp-soliton", "--json"])

        assert result.exit_code == 0
        assert payload(result)["report"]["max_abs"] < 1e-9

    @pytest.mark.integration
    def test_text_status_line(self, runner):
        """Test the PASS status line"""
        result = invoke(runner, ["residual", "kdv21", "--family", "cnoidal-phys"])

        assert result.exit_code == 0
        assert "status:  PASS" in result.stdout

    @pytest.mark.integration
    def test_perturbed_solution_file_exit_3(self, runner, output_dir, tmp_path):
        """Test that a family with a wrong omega exceeds the threshold"""
        assert invoke(runner, ["solution", "soliton", "--out", output_dir]).exit_code == 0
        document = read_json(os.path.join(output_dir, "family.json"))
        document["wave"]["omega"] += 0.01
        perturbed = tmp_path / "perturbed.json"
        perturbed.write_text(json.dumps(document))

        result = invoke(runner, ["residual", "kdv21", "--solution-file", str(perturbed), "--json"])

        assert result.exit_code == 3
        data = payload(result)
        assert data["report"]["max_abs"] > 1e-3

    @pytest.mark.integration
    def test_bottom_in_plane_wave_mode_exit_2(self, runner):
        """Test that plane-wave residuals refuse a bathymetry"""
        result = invoke(runner, ["residual", "kdv21-bottom", "--soliton", "--ramp", "--json"])

        assert result.exit_code == 2
        assert payload(result)["error"] == "ContractError"

    @pytest.mark.integration
    def test_nothing_to_evaluate_exit_2(self, runner):
        """Test that a missing source is a validation error"""
        result = invoke(runner, ["residual", "kdv21"])

        assert result.exit_code == 2
        assert "Nothing to evaluate" in result.stderr

    @pytest.mark.integration
    def test_field_and_family_together_exit_2(self, runner, tmp_path):
        """Test that a family and stored fields are mutually exclusive"""
        field_file = tmp_path / "u.bin"
        field_file.write_bytes(b"")

        result = invoke(runner, ["residual", "kdv21", "--soliton", "--field", str(field_file)])

        assert result.exit_code == 2

    @pytest.mark.integration
    def test_report_written(self, runner, output_dir):
        """Test that --out stores the report next to the manifest"""
        result = invoke(runner, ["residual", "kdv21", "--soliton", "--l", "0", "--out", output_dir])

        assert result.exit_code == 0
        report = read_json(os.path.join(output_dir, "report.json"))
        assert report["equation"] == "kdv21"
        assert read_json(os.path.join(output_dir, "run.json"))["command"] == "residual"


class TestEvolveCommand:
    """Test the evolve command"""

    @pytest.fixture
    def evolve_config(self, tmp_path):
        """Short soliton run on a thin 40 x 64 box"""
        path = tmp_path / "evolve.json"
        path.write_text(json.dumps({
            "config": {"dt": 0.004, "t_end": 0.2, "snapshot_every": 25},
            "grid": {"nx": 128, "ny": 8, "length_x": 40.0, "length_y": 64.0},
            "initial": {"family": "soliton", "k": 1.0, "l": 0.0},
        }))
        return str(path)

    @pytest.mark.integration
    def test_soliton_run(self, runner, evolve_config):
        """Test a short KdV run against the translated exact soliton"""
        result = invoke(runner, ["evolve", evolve_config, "--json"])

        assert result.exit_code == 0
        data = payload(result)
        trajectory = data["trajectory"]
        assert trajectory["times"] == pytest.approx([0.0, 0.1, 0.2])
        assert trajectory["mass_drift"] < 1e-10
        assert data["shape_error"] < 1e-2

    @pytest.mark.integration
    def test_flags_override_config(self, runner, evolve_config):
        """Test that --t-end wins over the config file"""
        result = invoke(runner, ["evolve", evolve_config, "--t-end", "0.1", "--json"])

        assert result.exit_code == 0
        assert payload(result)["trajectory"]["times"][-1] == pytest.approx(0.1)

    @pytest.mark.integration
    def test_trajectory_directory_and_export(self, runner, evolve_config, tmp_path):
        """Test that a written trajectory can be exported to CSV"""
        run_dir = str(tmp_path / "run")
        csv_dir = str(tmp_path / "csv")

        assert invoke(runner, ["evolve", evolve_config, "--out", run_dir]).exit_code == 0
        manifest = read_json(os.path.join(run_dir, "run.json"))
        assert manifest["command"] == "evolve"
        assert len(manifest["outputs"]["snapshots"]) == 3

        result = invoke(runner, ["export", run_dir, "--out", csv_dir, "--json"])

        assert result.exit_code == 0
        outputs = payload(result)["outputs"]
        assert sorted(outputs) == ["snapshot_00000.csv", "snapshot_00001.csv", "snapshot_00002.csv"]
        with open(os.path.join(csv_dir, "snapshot_00000.csv")) as f:
            assert f.readline().strip() == "x,y,u"

    @pytest.mark.integration
    def test_negative_dt_exit_2(self, runner, evolve_config):
        """Test that a non-positive dt is rejected"""
        result = invoke(runner, ["evolve", evolve_config, "--dt", "-0.01"])

        assert result.exit_code == 2


class TestCompatCommand:
    """Test the Boussinesq compatibility command"""

    @pytest.mark.integration
    def test_case5_random_profile_passes(self, runner, output_dir):
        """Test the first-order Case5 check on a random plane field"""
        result = invoke(runner, ["compat", "case5", "--nx", "32", "--ny", "32", "--workers", "1",
                                 "--out", output_dir, "--json"])

        assert result.exit_code == 0
        data = payload(result)
        assert data["status"] == "PASS"
        assert data["slope"] >= 1.9
        assert len(data["rows"]) == 4
        with open(os.path.join(output_dir, "compat.csv")) as f:
            assert f.readline().strip() == "epsilon,max_difference,max_r1,max_r2"

    @pytest.mark.integration
    def test_broken_correction_is_reported(self, runner):
        """Test that dropping the transverse correction breaks the order as expected"""
        result = invoke(runner, ["compat", "case5", "--nx", "32", "--ny", "32", "--workers", "1",
                                 "--break", "Qg", "--json"])

        assert result.exit_code == 0
        data = payload(result)
        assert data["status"] == "BROKEN-AS-EXPECTED"
        assert data["disabled"] == ["Qg"]

    @pytest.mark.integration
    def test_invalid_order_exit_2(self, runner):
        """Test that Case5 has no second-order corrections"""
        result = invoke(runner, ["compat", "case5", "--order", "2", "--nx", "16", "--ny", "16"])

        assert result.exit_code == 2

    @pytest.mark.integration
    def test_increasing_epsilons_exit_2(self, runner):
        """Test that the epsilon list must decrease"""
        result = invoke(runner, ["compat", "case5", "--eps", "0.01", "--eps", "0.1",
                                 "--nx", "16", "--ny", "16"])

        assert result.exit_code == 2


class TestExportCommand:
    """Test the export command"""

    @pytest.mark.integration
    def test_family_to_fields_and_grid_residual(self, runner, tmp_path):
        """Test gridding a family and auditing the stored fields"""
        family_dir = str(tmp_path / "family")
        field_dir = str(tmp_path / "fields")
        assert invoke(runner, ["solution", "soliton", "--l", "0", "--out", family_dir]).exit_code == 0

        result = invoke(runner, ["export", os.path.join(family_dir, "family.json"), "--out", field_dir,
                                 "--nx", "64", "--ny", "8", "--json"])

        assert result.exit_code == 0
        assert payload(result)["outputs"] == {"u": "u.bin", "u_t": "u_t.bin"}
        u = read_field(os.path.join(field_dir, "u.bin"))
        assert u.grid.nx == 64
        assert u.grid.length_x == pytest.approx(40.0)

        result = invoke(runner, ["residual", "kdv21", "--field", os.path.join(field_dir, "u.bin"),
                                 "--field-t", os.path.join(field_dir, "u_t.bin"), "--json"])

        assert result.exit_code == 0
        assert payload(result)["report"]["mode"] == "grid"

    @pytest.mark.integration
    def test_field_to_csv(self, runner, tmp_path):
        """Test converting a single Field2D binary"""
        field_dir = str(tmp_path / "fields")
        csv_dir = str(tmp_path / "csv")
        family_dir = str(tmp_path / "family")
        invoke(runner, ["solution", "soliton", "--l", "0", "--out", family_dir])
        invoke(runner, ["export", os.path.join(family_dir, "family.json"), "--out", field_dir,
                        "--nx", "16", "--ny", "8"])

        result = invoke(runner, ["export", os.path.join(field_dir, "u.bin"), "--out", csv_dir])

        assert result.exit_code == 0
        with open(os.path.join(csv_dir, "u.csv")) as f:
            assert len(f.read().splitlines()) == 16 * 8 + 1

    @pytest.mark.integration
    def test_unknown_source_exit_4(self, runner, tmp_path, output_dir):
        """Test that an unrecognised source is a storage error"""
        source = tmp_path / "notes.txt"
        source.write_text("nothing")

        result = invoke(runner, ["export", str(source), "--out", output_dir, "--json"])

        assert result.exit_code == 4
        assert payload(result)["error"] == "StorageError"


class TestGlobalOptions:
    """Test group-level options"""

    @pytest.mark.integration
    def test_version(self, runner):
        """Test --version"""
        result = invoke(runner, ["--version"])

        assert result.exit_code == 0
        assert "dispersia" in result.stdout

    @pytest.mark.integration
    def test_config_file_overrides_defaults(self, runner, temp_config_file):
        """Test that a config file changes the default parameters"""
        result = invoke(runner, ["--config", temp_config_file, "solution", "soliton", "--json"])

        assert result.exit_code == 0
        assert payload(result)["family"]["params"]["alpha"] == 0.2

    @pytest.mark.integration
    def test_unreadable_config_exit_2(self, runner, tmp_path):
        """Test that a malformed config file stops the CLI"""
        path = tmp_path / "bad.json"
        path.write_text("{not json")

        result = invoke(runner, ["--config", str(path), "table"])

        assert result.exit_code == 2
        assert "Cannot read config file" in result.stderr
