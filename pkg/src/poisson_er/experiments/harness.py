"""Trial execution and report assembly.

A trial is a picklable top-level function called as ``fn(seed, index, *args)``
and returning a flat dict of JSON scalars. Trial ``index`` is the stream id,
so results do not depend on how trials are spread over workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from poisson_er.experiments.config import ExperimentConfig


def _call(task):
    fn, seed, index, args = task
    return fn(seed, index, *args)


def run_trials(
    fn: Callable[..., dict],
    seed: int,
    task_args: Sequence[tuple],
    workers: int = 1,
) -> list[dict]:
    """Run ``fn(seed, i, *task_args[i])`` for every ``i``, ordered by ``i``."""
    tasks = [(fn, seed, i, tuple(args)) for i, args in enumerate(task_args)]
    if workers <= 1 or len(tasks) <= 1:
        return [_call(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 16))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, tasks, chunksize=chunk))


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


@dataclass
class ExperimentReport:
    name: str
    config: dict
    per_trial: list[dict]
    aggregates: dict = field(default_factory=dict)
    targets: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    # Wall-clock time is kept off the serialised report so reruns are byte-identical.
    runtime_seconds: float = 0.0

    def target(self, name: str, value: float, provenance: str) -> float:
        self.targets[name] = {"value": value, "provenance": provenance}
        return value

    def verdict(self, name: str, passed: bool, observed, **bounds) -> bool:
        self.verdicts[name] = {"passed": bool(passed), "observed": observed, **bounds}
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return _clean(
            {
                "experiment": self.name,
                "config": self.config,
                "aggregates": self.aggregates,
                "targets": self.targets,
                "verdicts": self.verdicts,
                "notes": self.notes,
                "per_trial": self.per_trial,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        columns: list[str] = []
        for row in self.per_trial:
            for key in row:
                if key not in columns:
                    columns.append(key)
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in self.per_trial:
            writer.writerow(row)
        return buf.getvalue()

    def summary_lines(self) -> list[str]:
        lines = []
        for name, v in self.verdicts.items():
            status = "PASS" if v["passed"] else "FAIL"
            bounds = ", ".join(f"{k}={v[k]}" for k in v if k not in ("passed", "observed"))
            lines.append(f"[{status}] {self.name}: {name} observed={v['observed']} {bounds}".rstrip())
        if not self.verdicts:
            lines.append(f"[INFO] {self.name}: no verdicts ({'; '.join(self.notes) or 'none requested'})")
        return lines


def report_paths(out_dir: str | Path, config: ExperimentConfig) -> tuple[Path, Path]:
    stem = f"{config.experiment_name}_{config.seed}"
    out = Path(out_dir)
    return out / f"{stem}.json", out / f"{stem}.csv"


def write_report(report: ExperimentReport, out_dir: str | Path, config: ExperimentConfig) -> tuple[Path, Path]:
    json_path, csv_path = report_paths(out_dir, config)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(report.to_json(), newline="\n")
    csv_path.write_text(report.to_csv(), newline="\n")
    return json_path, csv_path
