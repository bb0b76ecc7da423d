"""CSV time series and JSON verdict reports for scenario runs."""
from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .scenarios import ScenarioResult, Series, report_dict


def series_columns(series: Series) -> tuple[list[str], np.ndarray]:
    """Header and data matrix: time, state coordinates, monitor channels."""
    traj = series.traj
    d = traj.states.shape[1]
    labels = list(series.labels)
    if len(labels) != d:
        labels = [f"y{k}" for k in range(d)]
    names = sorted(traj.channels)
    header = [traj.time_name] + labels + names
    cols = [traj.times[:, None], traj.states] + [np.asarray(traj.channels[k], dtype=float)[:, None] for k in names]
    return header, np.hstack(cols)


def write_csv(path: Path, series: Series) -> None:
    header, data = series_columns(series)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def write_outputs(cfg: dict, result: ScenarioResult, out_dir: str | Path) -> Path:
    """Write one CSV per series (when enabled) and ``<scenario>_report.json``.

    All numerical work is finished before the first file is written.
    Returns the path of the report.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = []
    if cfg["output"]["csv"]:
        for key, s in result.series.items():
            p = out / f"{result.scenario}_{key}.csv"
            write_csv(p, s)
            artifacts.append(p.name)
    created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    report = report_dict(cfg, result, artifacts, created)
    path = out / f"{result.scenario}_report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path
