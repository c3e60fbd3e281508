"""Series ingestion, windowing and config/result persistence."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptySeries, ParseError, TooShort
from .filterbank import export_filters
from .training import TrainingConfig

FORMATS = ("csv_single_column", "csv_timestamp_value")


@dataclass
class TraceSeries:
    values: np.ndarray  # bytes per interval, or arbitrary units for synthetic data
    interval: float = 1.0  # sampling period, ms
    label: str = ""
    allow_negative: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ParseError(0, "series must be one-dimensional")
        if not self.interval > 0:
            raise ConfigError("interval must be positive")
        bad = np.flatnonzero(~np.isfinite(self.values))
        if bad.size:
            raise ParseError(int(bad[0]) + 1, "non-finite value")
        if not self.allow_negative:
            neg = np.flatnonzero(self.values < 0)
            if neg.size:
                raise ParseError(int(neg[0]) + 1, "negative value in a traffic trace")

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class WindowPlan:
    size: int = 1024
    stride: int = 1024

    def __post_init__(self):
        if self.size < 1 or self.stride < 1:
            raise ConfigError("window size and stride must be >= 1")

    def check_levels(self, levels: int):
        if self.size % (1 << levels):
            raise ConfigError(f"window size {self.size} is not divisible by 2**{levels}")


def read_series(path, format: str = "csv_single_column", *, interval: float = 1.0,
                label: str | None = None, allow_negative: bool = False) -> TraceSeries:
    """Parse a CSV series; rows are numbered from 1 in error messages.

    Blank lines are skipped. ``csv_timestamp_value`` reads the second column.
    """
    if format not in FORMATS:
        raise ConfigError(f"unknown format {format!r}; expected one of {FORMATS}")
    col = 0 if format == "csv_single_column" else 1
    values = []
    with open(path, newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) <= col:
                raise ParseError(row_no, f"expected at least {col + 1} column(s)")
            text = row[col].strip()
            try:
                v = float(text)
            except ValueError:
                raise ParseError(row_no, f"cannot parse {text!r} as a number") from None
            if not math.isfinite(v):
                raise ParseError(row_no, f"non-finite value {text!r}")
            if v < 0 and not allow_negative:
                raise ParseError(row_no, f"negative value {text!r} in a traffic trace")
            values.append(v)
    if not values:
        raise EmptySeries(f"{path}: no values")
    return TraceSeries(np.array(values), interval, label or Path(path).stem, allow_negative)


def write_series(path, values, timestamps=None):
    """Write one value per line with 17 significant digits (round-trip exact)."""
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        if timestamps is None:
            fh.writelines(f"{v:.17g}\n" for v in values)
        else:
            fh.writelines(f"{t:.17g},{v:.17g}\n" for t, v in zip(timestamps, values))


def windowize(s: TraceSeries | np.ndarray, plan: WindowPlan = WindowPlan()) -> np.ndarray:
    """Full windows only, shape ``(W, size)``; the tail remainder is dropped."""
    values = s.values if isinstance(s, TraceSeries) else np.asarray(s, dtype=float)
    n = values.size
    if n < plan.size:
        raise TooShort(f"series of length {n} is shorter than one window ({plan.size})")
    count = (n - plan.size) // plan.stride + 1
    starts = np.arange(count) * plan.stride
    return values[starts[:, None] + np.arange(plan.size)[None, :]].copy()


def load_config(path) -> TrainingConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return TrainingConfig.from_dict(data)


def save_config(path, cfg: TrainingConfig):
    write_json(path, cfg.to_dict())


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False, allow_nan=True)
        fh.write("\n")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, np.floating):
        return repr(float(v))
    return v


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p


def stack_document(stacks, cfg: TrainingConfig | None = None) -> dict:
    """JSON document for learned stacks.

    ``stacks`` is a list of ``(window_indices, stack)`` pairs. Each level
    carries the filter export fields plus the raw matrix.
    """
    doc = {"config": cfg.to_dict() if cfg is not None else None, "stacks": []}
    for windows, stack in stacks:
        levels = export_filters(stack)
        for entry, u in zip(levels, np.asarray(stack, dtype=float)):
            entry["matrix"] = [[float(v) for v in row] for row in u]
        doc["stacks"].append({"windows": [int(i) for i in windows], "levels": levels})
    return doc


def read_stacks(path) -> tuple[TrainingConfig | None, list[tuple[list[int], np.ndarray]]]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        cfg = TrainingConfig.from_dict(doc["config"]) if doc.get("config") else None
        stacks = []
        for entry in doc["stacks"]:
            mats = np.array([lev["matrix"] for lev in entry["levels"]], dtype=float)
            stacks.append((list(entry["windows"]), mats))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed stack document ({exc})") from None
    return cfg, stacks
