import csv
import json
import math
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from cli.schemas import ExperimentConfig
from provenance_chain.hash_chain_ledger import RunLedger

SUMMARY_NAME = "summary.txt"
STATUS_NAME = "status.json"
CONFIG_NAME = "effective_config.yaml"


def format_value(value: Any) -> str:
    """17 significant digits for floats so reruns are byte-identical."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.17g" % value
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return format_value(value) if not math.isfinite(value) else value
    if isinstance(value, np.integer):
        return int(value)
    return value


@dataclass
class CheckResult:
    """One asserted invariant of a run."""
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def to_row(self) -> Dict[str, Any]:
        return {"check": self.name, "value": self.value, "threshold": self.threshold,
                "passed": self.passed, "detail": self.detail}


@dataclass
class RunOutcome:
    subcommand: str
    checks: List[CheckResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, value: float, threshold: float, passed: bool, detail: str = "") -> CheckResult:
        check = CheckResult(name, float(value), float(threshold), bool(passed), detail)
        self.checks.append(check)
        return check


class ReportBuilder:
    """Writes the artifacts of one run into its own directory and chains them in the ledger."""

    def __init__(self, out_dir: Path, ledger: Optional[RunLedger] = None):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.ledger = ledger if ledger is not None else RunLedger(self.out_dir)
        self.written: List[Path] = []

    def register(self, path: Path, kind: str) -> Path:
        self.ledger.append_artifact(path, kind)
        self.written.append(path)
        return path

    def write_csv(self, name: str, rows: Sequence[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> Path:
        path = self.out_dir / name
        columns = list(columns) if columns is not None else (list(rows[0].keys()) if rows else [])
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(row.get(col, "")) for col in columns])
        return self.register(path, "csv")

    def write_table(self, name: str, pairs: Iterable, header: Sequence[str] = ("name", "value")) -> Path:
        return self.write_csv(name, [dict(zip(header, pair)) for pair in pairs], header)

    def write_effective_config(self, config: ExperimentConfig) -> Path:
        path = self.out_dir / CONFIG_NAME
        path.write_text(config.to_yaml(), encoding="utf-8")
        return self.register(path, "config")

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self.out_dir / name
        path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True), encoding="utf-8")
        return self.register(path, "json")

    def write_outcome(self, outcome: RunOutcome) -> Path:
        self.write_csv("checks.csv", [c.to_row() for c in outcome.checks], ["check", "value", "threshold", "passed", "detail"])
        lines = [f"hyperwave {outcome.subcommand}: {'PASS' if outcome.passed else 'FAIL'}", ""]
        for check in outcome.checks:
            mark = "ok  " if check.passed else "FAIL"
            lines.append(f"[{mark}] {check.name}: {format_value(check.value)} (threshold {format_value(check.threshold)})"
                         + (f"  {check.detail}" if check.detail else ""))
        if outcome.metrics:
            lines.append("")
            lines.extend(f"{key} = {format_value(value)}" for key, value in sorted(outcome.metrics.items()))
        if outcome.notes:
            lines.append("")
            lines.extend(outcome.notes)
        path = self.out_dir / SUMMARY_NAME
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return self.register(path, "summary")

    def summary_text(self) -> str:
        path = self.out_dir / SUMMARY_NAME
        return path.read_text(encoding="utf-8") if path.exists() else ""

    def write_status(self, status: str, exit_code: int, error: Optional[BaseException] = None,
                     outcome: Optional[RunOutcome] = None) -> Path:
        payload: Dict[str, Any] = {"status": status, "exit_code": exit_code}
        if outcome is not None:
            payload["passed"] = outcome.passed
            payload["failed_checks"] = [c.name for c in outcome.checks if not c.passed]
        if error is not None:
            payload["error_type"] = type(error).__name__
            payload["error_message"] = str(error)
            payload["violations"] = [v.to_dict() for v in getattr(error, "violations", [])]
            payload["diff_norms"] = list(getattr(error, "diff_norms", []))
            payload["traceback"] = "".join(traceback.format_exception(type(error), error, error.__traceback__))
        return self.write_json(STATUS_NAME, payload)
