"""
Tests for the malab command line and the experiment runner.
"""

import json
from unittest.mock import patch

import pytest

from malab import __version__
from malab.cli import MALabCLI
from malab.cli.commands import CommandRegistry, ExperimentCommand
from malab.cli.config import Command, parse_config
from malab.cli.jobs import JobOutcome, job_name
from malab.cli.runner import MANIFEST, ExperimentRunner, dump_json, run, write_rows
from malab.utils.exceptions import CommandError, DivergenceError, SingularEvaluationError


LIOUVILLE = "command = liouville\n[problem]\nalpha = 0.5\n[solver]\nspacing = 1/64\n"
MATRIX = "command = liouville\n[problem]\nalpha = 0.5\n[experiment]\nalphas = 0.25, 0.5, 0.75\n"


def _outcome(passed: bool):
    def job(config, alpha, name):
        return JobOutcome(name, Command.LIOUVILLE, alpha, {"value": alpha}, [{"alpha": alpha, "ok": passed}],
                          passed, f"{name}: {'PASS' if passed else 'FAIL'}")
    return job


def _by_alpha(config, alpha, name):
    if alpha == 0.25:
        raise DivergenceError("no convergence", history = [1.0, 0.5, 2.0])
    if alpha == 0.75:
        raise SingularEvaluationError("on the boundary")
    return _outcome(True)(config, alpha, name)


class TestMALabCLI:
    """Test cases for command routing."""

    def setup_method(self):
        self.cli = MALabCLI()

    def test_commands_registered(self):
        """Every experiment command and check are discovered."""
        for name in ("solve", "sections", "scaling", "barriers", "liouville", "maxsection"):
            assert issubclass(CommandRegistry.get(name), ExperimentCommand)
        assert not issubclass(CommandRegistry.get("check"), ExperimentCommand)

    def test_help(self, capsys):
        """No arguments prints help and succeeds."""
        assert self.cli.execute_from_command_line([]) == 0
        out = capsys.readouterr().out
        assert "Experiments:" in out
        assert "liouville" in out

    def test_command_help(self, capsys):
        """help <command> prints the command's options."""
        assert self.cli.execute_from_command_line(["help", "solve"]) == 0
        assert "--seed-free" in capsys.readouterr().out

    def test_version(self, capsys):
        """version prints the package version."""
        assert self.cli.execute_from_command_line(["version"]) == 0
        assert capsys.readouterr().out.strip() == f"MALab v{__version__}"

    @pytest.mark.parametrize("argv", [["fly"], ["help", "fly"]])
    def test_unknown_command(self, argv, capsys):
        """Unknown commands exit with status 2."""
        assert self.cli.execute_from_command_line(argv) == 2
        assert "Unknown command 'fly'" in capsys.readouterr().out

    def test_missing_config_option(self):
        """--config is required."""
        assert self.cli.execute_from_command_line(["solve"]) == 2

    def test_invalid_config(self, tmp_path, capsys):
        """Config issues are listed and exit with status 2."""
        path = tmp_path / "bad.ini"
        path.write_text("[problem]\nalpha = 3\n", encoding = "utf-8")
        assert self.cli.execute_from_command_line(["liouville", "--config", str(path)]) == 2
        out = capsys.readouterr().out
        assert "invalid run config" in out
        assert "line 2: [problem] alpha: alpha must be in (0,2)" in out

    def test_jobs_must_be_positive(self, tmp_path):
        """--jobs 0 is rejected."""
        path = tmp_path / "run.ini"
        path.write_text(LIOUVILLE, encoding = "utf-8")
        command = CommandRegistry.get("liouville")(called_from_command_line = False)
        with pytest.raises(CommandError):
            command.run_from_argv(["--config", str(path), "--jobs", "0"])


class TestRunner:
    """Test cases for the experiment runner with stubbed jobs."""

    def setup_method(self):
        self.config = parse_config(MATRIX)

    def test_job_names(self):
        """Matrix runs suffix the alpha; single runs use the command name."""
        assert ExperimentRunner(self.config).names == ["liouville-alpha0.25", "liouville-alpha0.5",
                                                       "liouville-alpha0.75"]
        assert job_name(Command.SOLVE, 0.5, False) == "solve"

    @pytest.mark.parametrize("passed, status", [(True, 0), (False, 1)])
    def test_exit_status(self, tmp_path, passed, status):
        """All-pass runs exit 0; a failing check exits 1."""
        with patch.dict("malab.cli.runner.JOBS", {Command.LIOUVILLE: _outcome(passed)}):
            assert run(self.config, out_dir = tmp_path, seed_free = True) == status
        manifest = json.loads((tmp_path / MANIFEST).read_text(encoding = "utf-8"))
        assert manifest["exit_status"] == status
        assert [job["status"] for job in manifest["jobs"]] == ["pass" if passed else "fail"] * 3
        assert "started" not in manifest

    def test_report_and_sweep_files(self, tmp_path):
        """Each job writes a report and a sweep; the manifest hashes them."""
        with patch.dict("malab.cli.runner.JOBS", {Command.LIOUVILLE: _outcome(True)}):
            run(self.config, out_dir = tmp_path, jobs = 2)
        report = json.loads((tmp_path / "liouville-alpha0.5.report.json").read_text(encoding = "utf-8"))
        assert report["pass"] is True
        assert report["result"] == {"value": 0.5, "wall_time": report["result"]["wall_time"]}
        assert report["config"]["problem"]["alpha"] == 0.5
        assert (tmp_path / "liouville-alpha0.5.sweep.csv").read_text(encoding = "utf-8") == "alpha,ok\n0.5,1\n"
        manifest = json.loads((tmp_path / MANIFEST).read_text(encoding = "utf-8"))
        assert len(manifest["files"]) == 6
        assert all(len(entry["sha256"]) == 64 for entry in manifest["files"])
        assert "started" in manifest and "finished" in manifest

    def test_errors(self, tmp_path, capsys):
        """Library errors become error reports; divergence keeps its residual history."""
        with patch.dict("malab.cli.runner.JOBS", {Command.LIOUVILLE: _by_alpha}):
            assert run(self.config, out_dir = tmp_path, seed_free = True) == 2
        report = json.loads((tmp_path / "liouville-alpha0.25.report.json").read_text(encoding = "utf-8"))
        assert report["status"] == "error"
        assert report["error_type"] == "DivergenceError"
        assert report["residual_history"] == "liouville-alpha0.25.residuals.csv"
        history = (tmp_path / "liouville-alpha0.25.residuals.csv").read_text(encoding = "utf-8")
        assert history == "iteration,residual\n0,1\n1,0.5\n2,2\n"
        other = json.loads((tmp_path / "liouville-alpha0.75.report.json").read_text(encoding = "utf-8"))
        assert other["error_type"] == "SingularEvaluationError"
        manifest = json.loads((tmp_path / MANIFEST).read_text(encoding = "utf-8"))
        assert [job["status"] for job in manifest["jobs"]] == ["error", "pass", "error"]
        assert "ERROR DivergenceError" in capsys.readouterr().out

    def test_unexpected_exception(self, tmp_path):
        """Software faults are caught by the worker and reported as errors."""
        def broken(config, alpha, name):
            raise ZeroDivisionError("bug")

        with patch.dict("malab.cli.runner.JOBS", {Command.LIOUVILLE: broken}):
            assert run(self.config, out_dir = tmp_path, seed_free = True) == 2
        report = json.loads((tmp_path / "liouville-alpha0.5.report.json").read_text(encoding = "utf-8"))
        assert report["error_type"] == "ZeroDivisionError"

    def test_unwritable_output(self, tmp_path):
        """An output directory that cannot be created exits 2."""
        blocker = tmp_path / "file"
        blocker.write_text("", encoding = "utf-8")
        with patch.dict("malab.cli.runner.JOBS", {Command.LIOUVILLE: _outcome(True)}):
            assert run(self.config, out_dir = blocker / "out") == 2

    def test_dump_json_is_stable(self):
        """Keys are sorted and non-finite numbers become null."""
        assert dump_json({"b": float("nan"), "a": 1}) == '{\n  "a": 1,\n  "b": null\n}\n'

    def test_write_rows_union_header(self, tmp_path):
        """CSV headers are the union of row keys in first-seen order."""
        path = write_rows(tmp_path / "rows.csv", [{"h": 0.5}, {"h": 0.25, "extent": 0.1}])
        assert path.read_text(encoding = "utf-8") == "h,extent\n0.5,\n0.25,0.10000000000000001\n"


class TestEndToEnd:
    """A real half-space run through the command line."""

    def test_liouville_run_is_reproducible(self, tmp_path):
        """Two --seed-free runs produce byte-identical files."""
        config = tmp_path / "liouville.ini"
        config.write_text(LIOUVILLE, encoding = "utf-8")
        outputs = []
        for name in ("first", "second"):
            out = tmp_path / name
            status = MALabCLI().execute_from_command_line(
                ["liouville", "--config", str(config), "--out", str(out), "--seed-free"]
            )
            assert status == 0
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert outputs[0] == outputs[1]
        assert set(outputs[0]) == {"liouville.report.json", "liouville.sweep.csv", MANIFEST}
        report = json.loads(outputs[0]["liouville.report.json"])
        assert report["pass"] is True
        assert report["result"]["observed_order"] > 0
