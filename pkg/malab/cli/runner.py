"""
Experiment runner.
Fans a RunConfig out into jobs (one per alpha of the matrix), runs them on
the worker pool, writes one report per job and finally the run manifest.

Exit statuses: 0 every job passed, 1 an experiment failed its check,
2 a runtime or software failure.
"""

import csv
import hashlib
import json
import math
import os
import time
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from threading import Lock
from typing import Any, Dict, List, Optional, Union

import numpy as np

from malab import __version__
from malab.cli.config import RunConfig
from malab.cli.jobs import JOBS, JobOutcome, job_name
from malab.core.concurrency import JobResult, run_jobs
from malab.utils import get_logger
from malab.utils.exceptions import DivergenceError, MALabError

logger = get_logger("MALab.Runner")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2
MANIFEST = "run-manifest.json"


# -- serialization -----------------------------------------------------------

def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""

    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dump_json(data: Dict[str, Any]) -> str:
    return json.dumps(jsonable(data), sort_keys = True, indent = 2, allow_nan = False) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (list, tuple, np.ndarray)):
        return " ".join(_cell(v) for v in value)
    return str(value)


def write_rows(path: Path, rows: List[Dict[str, Any]]) -> Path:
    """Plot-ready CSV: header is the union of row keys in first-seen order."""

    header: List[str] = []
    for row in rows:
        header.extend(k for k in row if k not in header)
    with path.open("w", newline = "", encoding = "utf-8") as fh:
        writer = csv.writer(fh, lineterminator = "\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row.get(k)) for k in header])
    return path


def sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


####
##      EXPERIMENT RUNNER
#####
class ExperimentRunner:
    """Runs every job of a config and owns the output directory."""

    def __init__(self, config: RunConfig, out_dir: Optional[Union[str, Path]] = None,
                 jobs: int = 1, seed_free: bool = False):
        self.config = config
        self.out_dir = Path(out_dir if out_dir is not None else config.output.dir)
        self.jobs = max(1, int(jobs))
        self.seed_free = seed_free
        self._write_lock = Lock()
        self._files: Dict[str, List[Path]] = {}
        self._status: Dict[str, str] = {}
        self._summaries: Dict[str, str] = {}

    @property
    def names(self) -> List[str]:
        alphas = self.config.alphas
        return [job_name(self.config.command, a, len(alphas) > 1) for a in alphas]

    def _prepare(self) -> bool:
        try:
            self.out_dir.mkdir(parents = True, exist_ok = True)
        except OSError as e:
            print(f"error: cannot create output directory {self.out_dir}: {e}")
            return False
        if not os.access(self.out_dir, os.W_OK):
            print(f"error: output directory {self.out_dir} is not writable")
            return False
        return True

    def _record(self, name: str, path: Path):
        self._files.setdefault(name, []).append(path)

    def _job(self, alpha: float, name: str):
        """Runs one job and writes its files; never raises for library errors."""

        started = time.perf_counter()
        try:
            outcome = JOBS[self.config.command](self.config, alpha, name)
        except MALabError as e:
            self._write_error(name, alpha, e)
            return None
        if not self.seed_free:
            outcome.report["wall_time"] = time.perf_counter() - started
        self._write_outcome(outcome)
        return outcome

    def _header(self, name: str, alpha: float) -> Dict[str, Any]:
        return {
            "job": name,
            "command": self.config.command.value,
            "alpha": alpha,
            "config": self.config.model_dump(mode = "json", exclude = {"output"}),
        }

    def _write_outcome(self, outcome: JobOutcome):
        report = {**self._header(outcome.name, outcome.alpha), "result": outcome.report,
                  "status": "pass" if outcome.passed else "fail", "pass": outcome.passed}
        with self._write_lock:
            path = self.out_dir / f"{outcome.name}.report.json"
            path.write_text(dump_json(report), encoding = "utf-8", newline = "\n")
            self._record(outcome.name, path)
            if outcome.rows:
                self._record(outcome.name, write_rows(self.out_dir / f"{outcome.name}.sweep.csv", outcome.rows))
            if outcome.solution is not None:
                self._record(outcome.name, outcome.solution.to_csv(self.out_dir / f"{outcome.name}.solution.csv"))
            self._status[outcome.name] = "pass" if outcome.passed else "fail"
            self._summaries[outcome.name] = outcome.summary

    def _write_error(self, name: str, alpha: float, error: BaseException):
        report = {**self._header(name, alpha), "status": "error", "pass": False,
                  "error": str(error), "error_type": type(error).__name__}
        summary = f"{name}: ERROR {type(error).__name__}: {error}"
        with self._write_lock:
            if isinstance(error, DivergenceError):
                history = self.out_dir / f"{name}.residuals.csv"
                write_rows(history, [{"iteration": i, "residual": r} for i, r in enumerate(error.history)])
                self._record(name, history)
                report["residual_history"] = history.name
                summary += f" (residual history: {history})"
            path = self.out_dir / f"{name}.report.json"
            path.write_text(dump_json(report), encoding = "utf-8", newline = "\n")
            self._record(name, path)
            self._status[name] = "error"
            self._summaries[name] = summary
        logger.info(summary)

    def _write_manifest(self, exit_status: int, started: datetime):
        entries = []
        for name in self.names:
            for path in self._files.get(name, []):
                entries.append({"path": path.name, "job": name, "sha256": sha256(path)})
        manifest: Dict[str, Any] = {
            "tool": "malab",
            "version": __version__,
            "command": self.config.command.value,
            "jobs": [{"job": name, "status": self._status.get(name, "error")} for name in self.names],
            "files": entries,
            "exit_status": exit_status,
        }
        if not self.seed_free:
            manifest["started"] = started.isoformat()
            manifest["finished"] = datetime.now(timezone.utc).isoformat()
        path = self.out_dir / MANIFEST
        path.write_text(dump_json(manifest), encoding = "utf-8", newline = "\n")
        return path

    def run(self) -> int:
        """Executes the matrix and returns the exit status."""

        if not self._prepare():
            return EXIT_ERROR
        started = datetime.now(timezone.utc)
        work = {name: (lambda a = alpha, n = name: self._job(a, n))
                for name, alpha in zip(self.names, self.config.alphas)}
        results: List[JobResult] = run_jobs(work, max_workers = self.jobs)

        for name, alpha, result in zip(self.names, self.config.alphas, results):
            if not result.ok and name not in self._status:
                error = result.error or RuntimeError("job did not complete")
                try:
                    self._write_error(name, alpha, error)
                except OSError as e:
                    print(f"error: cannot write report for {name}: {e}")
                    self._status[name] = "error"

        codes = {"pass": EXIT_PASS, "fail": EXIT_FAIL, "error": EXIT_ERROR}
        exit_status = max(codes[self._status.get(name, "error")] for name in self.names)
        try:
            manifest = self._write_manifest(exit_status, started)
        except OSError as e:
            print(f"error: cannot write {MANIFEST}: {e}")
            return EXIT_ERROR

        for name in self.names:
            print(self._summaries.get(name, f"{name}: ERROR"))
        logger.info(f"manifest written to {manifest}")
        return exit_status


def run(config: RunConfig, out_dir: Optional[Union[str, Path]] = None, jobs: int = 1,
        seed_free: bool = False) -> int:
    """Runs a validated config; returns 0 (pass), 1 (experiment fail) or 2 (runtime error)."""

    return ExperimentRunner(config, out_dir = out_dir, jobs = jobs, seed_free = seed_free).run()
