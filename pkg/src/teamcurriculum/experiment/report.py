"""Aggregation across seeds, CSV panels, and the desk-scale trend checks."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

COLUMNS = ("student_reward", "teammate_reward", "team_reward")
PANELS = {"student_reward": "student_reward.csv", "teammate_reward": "teammate_reward.csv", "team_reward": "team_reward.csv"}


class ReportError(ValueError):
    pass


@dataclass
class RunLog:
    """One seed's per-episode rewards, columns as float arrays."""

    seed: int
    kind: str
    teammate: list[str]
    columns: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.teammate)


@dataclass
class AggregateSeries:
    kind: str
    seeds: tuple[int, ...]
    mean: dict[str, np.ndarray] = field(default_factory=dict)
    std: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(next(iter(self.mean.values())))


def read_log(path: str | Path) -> RunLog:
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(json.loads(line))
    if not rows:
        raise ReportError(f"empty log {path}")
    if any(r.get("invalid") for r in rows):
        raise ReportError(f"log {path} is flagged invalid")
    episodes = [r["episode"] for r in rows]
    if episodes != list(range(len(rows))):
        raise ReportError(f"log {path}: episode indices are not dense from 0")
    return RunLog(
        seed=rows[0]["seed"],
        kind=rows[0]["kind"],
        teammate=[r["teammate"] for r in rows],
        columns={c: np.array([r[c] for r in rows], dtype=np.float64) for c in COLUMNS},
    )


def rolling_average(series: Sequence[float], window: int) -> np.ndarray:
    """Trailing mean; the first ``window - 1`` entries average what is available."""
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        raise ReportError("cannot average an empty series")
    if window < 1:
        raise ReportError("window must be >= 1")
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(x.size)
    lo = np.maximum(0, idx - window + 1)
    return (csum[idx + 1] - csum[lo]) / (idx + 1 - lo)


def aggregate_seeds(logs: Sequence[RunLog]) -> AggregateSeries:
    """Per-episode mean and population std across seeds, per reward column."""
    if not logs:
        raise ReportError("no logs to aggregate")
    lengths = {len(lg) for lg in logs}
    if len(lengths) != 1:
        raise ReportError(f"ragged logs: lengths {sorted(lengths)}")
    ordered = sorted(logs, key=lambda lg: lg.seed)
    agg = AggregateSeries(kind=ordered[0].kind, seeds=tuple(lg.seed for lg in ordered))
    for c in COLUMNS:
        stack = np.stack([lg.columns[c] for lg in ordered])
        agg.mean[c] = stack.mean(axis=0)
        agg.std[c] = stack.std(axis=0)
    return agg


def tail_mean(series: np.ndarray, n: int) -> float:
    return float(np.mean(series[-min(n, len(series)) :]))


def emit_report(
    aggregates: Mapping[str, AggregateSeries],
    out_dir: str | Path,
    summary_window: int = 1_000,
) -> list[Path]:
    """Write one CSV per reward panel and a plain-text summary of tail means."""
    if not aggregates:
        raise ReportError("no aggregates to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kinds = list(aggregates)
    n = {len(a) for a in aggregates.values()}
    if len(n) != 1:
        raise ReportError(f"schedule kinds have different episode counts {sorted(n)}")
    (n_episodes,) = n
    written = []
    for column, filename in PANELS.items():
        path = out / filename
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["episode"] + [f"{k}_{stat}" for k in kinds for stat in ("mean", "std")])
            for e in range(n_episodes):
                row: list = [e]
                for k in kinds:
                    row += [repr(float(aggregates[k].mean[column][e])), repr(float(aggregates[k].std[column][e]))]
                w.writerow(row)
        written.append(path)

    lines = [
        f"mean reward per episode over the last {summary_window} episodes (mean across seeds)",
        f"{'schedule':<16}{'student':>12}{'teammate':>12}{'team':>12}",
    ]
    for k in kinds:
        vals = [tail_mean(aggregates[k].mean[c], summary_window) for c in COLUMNS]
        lines.append(f"{k:<16}" + "".join(f"{v:>12.3f}" for v in vals))
    summary = out / "summary.txt"
    summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(summary)
    return written


def read_summary(path: str | Path) -> dict[str, dict[str, float]]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines()[2:]:
        kind, *vals = line.split()
        out[kind] = dict(zip(COLUMNS, (float(v) for v in vals)))
    return out


# ---- trend checks -------------------------------------------------------


def milestone_trend(source: RunLog, milestones: Sequence[int], window: int) -> list[float]:
    """Rolling team reward at the last episode before each snapshot was taken."""
    rolled = rolling_average(source.columns["team_reward"], window)
    return [float(rolled[m - 1]) for m in milestones]


def final_fraction_mean(log: RunLog, column: str, fraction: float = 0.1) -> float:
    n = max(1, int(round(len(log) * fraction)))
    return tail_mean(log.columns[column], n)


@dataclass
class TrendResult:
    name: str
    passed: bool
    detail: str


def check_snapshot_quality(source: RunLog, milestones: Sequence[int], window: int) -> TrendResult:
    values = milestone_trend(source, milestones, window)
    ok = all(a <= b for a, b in zip(values, values[1:]))
    return TrendResult("snapshot-quality", ok, f"rolling team reward at {list(milestones)}: {values}")


def _kind_means(logs: Mapping[str, Sequence[RunLog]], column: str) -> dict[str, float]:
    return {
        k: float(np.mean([final_fraction_mean(lg, column) for lg in runs])) for k, runs in logs.items()
    }


def check_frozen_beats_scratch(logs: Mapping[str, Sequence[RunLog]]) -> TrendResult:
    means = _kind_means(logs, "team_reward")
    scratch = means["idqn_scratch"]
    fixed = {k: means[k] for k in ("fixed_low", "fixed_medium", "fixed_high")}
    ok = all(v > scratch for v in fixed.values())
    return TrendResult("frozen-beats-scratch", ok, f"final-10% team reward {fixed} vs idqn_scratch {scratch:.3f}")


def check_lazy_student(logs: Mapping[str, Sequence[RunLog]]) -> TrendResult:
    low = {lg.seed: final_fraction_mean(lg, "student_reward") for lg in logs["fixed_low"]}
    med = {lg.seed: final_fraction_mean(lg, "student_reward") for lg in logs["fixed_medium"]}
    per_seed = {s: low[s] < med[s] for s in sorted(low) if s in med}
    wins = sum(per_seed.values())
    ok = wins * 2 > len(per_seed)
    detail = ", ".join(
        f"seed {s}: low {low[s]:.2f} vs medium {med[s]:.2f} {'pass' if p else 'fail'}" for s, p in per_seed.items()
    )
    return TrendResult("lazy-student", ok, f"{wins}/{len(per_seed)} seeds; {detail}")


def check_curriculum_beats_scratch(logs: Mapping[str, Sequence[RunLog]]) -> tuple[TrendResult, str]:
    means = _kind_means(logs, "team_reward")
    scratch = means["idqn_scratch"]
    inc, dec = means["increasing"], means["decreasing"]
    ok = inc > scratch and dec > scratch
    note = (
        f"decreasing {dec:.3f} {'>' if dec > inc else '<='} increasing {inc:.3f} "
        "(report only, not a gate)"
    )
    return (
        TrendResult("curriculum-beats-scratch", ok, f"increasing {inc:.3f}, decreasing {dec:.3f}, idqn_scratch {scratch:.3f}"),
        note,
    )
