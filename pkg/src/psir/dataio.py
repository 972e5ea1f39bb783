"""Case-series ingestion, preprocessing, and CSV export."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .model import Trajectory


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray    # days
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("times and values must be vectors of equal length")
        if times.size > 1 and not (np.diff(times) > 0).all():
            raise ValueError("times must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.times.size


def _parse_day(token: str):
    """ISO date -> datetime.date, else finite day index, else None."""
    token = token.strip()
    try:
        return date.fromisoformat(token)
    except ValueError:
        pass
    try:
        day = float(token)
    except ValueError:
        return None
    return day if math.isfinite(day) else None


def load_case_series(path) -> TimeSeries:
    """Parse a two-column CSV of (ISO date or day index, non-negative count).

    A header row is skipped if its first column parses as neither. Dates are
    converted to day offsets from the first data row.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}: line {lineno}: expected 2 columns")
            day = _parse_day(row[0])
            if day is None:
                if lineno == 1:
                    continue   # header
                raise ValueError(
                    f"{path}: line {lineno}: unparseable date/day {row[0]!r}")
            try:
                count = float(row[1])
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: unparseable count {row[1]!r}") from None
            if not math.isfinite(count) or count < 0:
                raise ValueError(
                    f"{path}: line {lineno}: count must be >= 0, got {row[1]}")
            rows.append((lineno, day, count))
    if not rows:
        raise ValueError(f"{path}: no data rows")

    first = rows[0][1]
    times = []
    for lineno, day, _ in rows:
        if isinstance(day, date) != isinstance(first, date):
            raise ValueError(f"{path}: line {lineno}: mixed date and day-index rows")
        times.append(float((day - first).days) if isinstance(day, date) else day)
    return TimeSeries(times=np.array(times),
                      values=np.array([c for _, _, c in rows]))


def moving_average(series: TimeSeries, W: int) -> TimeSeries:
    """Centered moving average of odd width W; windows shrink symmetrically
    at the boundaries (width 1 at the endpoints). Grid is unchanged."""
    if W < 1 or W % 2 == 0:
        raise ValueError(f"W must be odd and >= 1, got {W}")
    n = len(series)
    if W > n:
        raise ValueError(f"W={W} exceeds series length {n}")
    half = W // 2
    v = series.values
    out = np.empty(n)
    for i in range(n):
        h = min(half, i, n - 1 - i)
        out[i] = v[i - h:i + h + 1].mean()
    return TimeSeries(times=series.times, values=out)


def normalize_cases(series: TimeSeries, population: float,
                    detection_factor: float) -> TimeSeries:
    """Scale counts to per-capita units corrected for under-detection."""
    if not population > 0:
        raise ValueError(f"population must be > 0, got {population}")
    if not detection_factor > 0:
        raise ValueError(f"detection_factor must be > 0, got {detection_factor}")
    return TimeSeries(times=series.times,
                      values=series.values * (detection_factor / population))


def export_trajectory(traj: Trajectory, labels, path) -> None:
    """Write a trajectory as CSV with 17-significant-digit values
    (round-trip exact for doubles)."""
    labels = list(labels)
    if len(labels) != traj.states.shape[1]:
        raise ValueError(
            f"{len(labels)} labels for {traj.states.shape[1]} state columns")
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("t," + ",".join(labels) + "\n")
            for t, row in zip(traj.times, traj.states):
                fh.write(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc}") from exc


def load_trajectory(path) -> tuple[list[str], Trajectory]:
    """Inverse of export_trajectory; returns (labels, trajectory)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return header[1:], Trajectory(times=data[:, 0], states=data[:, 1:])
