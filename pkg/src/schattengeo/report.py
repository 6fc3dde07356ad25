"""Run configuration, check records and delimited report output.

Reports are JSON lines: one record per object, keys sorted, so that two
runs with the same seed produce byte-identical streams. Wall-clock timing
is deliberately kept in its own trailing record; strip_timing removes it
before any byte comparison.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from . import linalg
from .exceptions import ValidationError

THREADS_ENV = "SCHATTEN_GEOM_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        k = int(raw)
    except ValueError as exc:
        raise ValidationError(
            f"{THREADS_ENV} must be a positive integer, got {raw!r}"
        ) from exc
    if k < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {k}")
    return k


@dataclass(frozen=True)
class RunConfig:
    """Validated knob set shared by the command line entry points."""

    command: str
    p: float = 2.0
    n: int = 3
    seed: int = 0
    tol: float = 1e-8
    max_iter: int = 5000
    max_word_len: int = 8
    samples: int = 200
    out: Optional[Path] = None
    summary: bool = False
    figures: bool = True
    threads: int = field(default_factory=thread_count)

    def __post_init__(self):
        linalg.check_exponent(self.p)
        if self.n < 1:
            raise ValidationError(f"dimension must be at least 1, got {self.n}")
        if not (self.tol > 0.0 and np.isfinite(self.tol)):
            raise ValidationError(f"tolerance must be positive, got {self.tol}")
        if self.max_iter < 1 or self.max_word_len < 1 or self.samples < 1:
            raise ValidationError("iteration, word-length and sample budgets must be positive")
        if self.threads < 1:
            raise ValidationError("thread count must be positive")


def _json_safe(value: Any) -> Any:
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, np.ndarray):
        return _json_safe(value.tolist())
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return str(value)


def record_line(record: dict) -> str:
    return json.dumps(_json_safe(record), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class CheckRecord:
    """One named pass/fail check with its measured value and threshold."""

    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def to_record(self) -> dict:
        return {
            "record": "check",
            "name": self.name,
            "passed": bool(self.passed),
            "value": float(self.value),
            "threshold": float(self.threshold),
            "detail": self.detail,
        }


def timing_record(seconds: float) -> dict:
    return {"record": "timing", "seconds": float(seconds)}


def strip_timing(lines: Iterable[str]) -> list:
    kept = []
    for line in lines:
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj.get("record") != "timing":
            kept.append(line)
    return kept


def write_report(records: Sequence[dict], path: Optional[Path]) -> str:
    """Serialize records (stable order and bytes); write when path given."""
    text = "".join(record_line(r) + "\n" for r in records)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return text


def run_battery(
    count: int,
    worker: Callable[[int], Any],
    threads: int = 1,
) -> list:
    """Evaluate worker(0..count-1), merged back in index order.

    Each item must derive all randomness from its own index so the merged
    output is the same for every thread count.
    """
    if count < 0:
        raise ValidationError("battery size must be nonnegative")
    if threads <= 1 or count <= 1:
        return [worker(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(count)))


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()

    def seconds(self) -> float:
        return time.perf_counter() - self.start


def summary_table(checks: Sequence[CheckRecord]) -> str:
    """Aligned text table over the check records."""
    if not checks:
        return "(no checks)\n"
    rows = [
        (
            c.name,
            "PASS" if c.passed else "FAIL",
            f"{c.value:.6g}",
            f"{c.threshold:.6g}",
            c.detail,
        )
        for c in checks
    ]
    headers = ("check", "status", "value", "threshold", "detail")
    widths = [
        max(len(headers[k]), max(len(r[k]) for r in rows)) for k in range(5)
    ]
    lines = [
        "  ".join(h.ljust(widths[k]) for k, h in enumerate(headers)),
        "  ".join("-" * widths[k] for k in range(5)),
    ]
    for r in rows:
        lines.append("  ".join(r[k].ljust(widths[k]) for k in range(5)))
    return "\n".join(lines) + "\n"
