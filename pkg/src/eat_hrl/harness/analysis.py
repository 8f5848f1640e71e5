"""Interruption-delay analysis over run traces.

Pairs each emergency interruption with the most recent preceding random
event in its episode and histograms the delays. Deterministic follow-up
events (the bridge becoming passable a fixed time after the opening
started) are present in traces but are not pairing anchors.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..envs.base import RANDOM_EVENT_KINDS

__all__ = ["InterruptionRecord", "AnalysisResult", "analyze_interruptions", "write_histogram_csv"]

_RANDOM_KIND_NAMES = {kind.value for kind in RANDOM_EVENT_KINDS}


@dataclass(frozen=True)
class InterruptionRecord:
    episode: object
    event_time: int
    interruption_time: int

    @property
    def delay(self) -> int:
        return self.interruption_time - self.event_time


@dataclass
class AnalysisResult:
    records: list[InterruptionRecord] = field(default_factory=list)
    orphan_interruptions: int = 0
    window: int = 0

    @property
    def histogram(self) -> Counter:
        """Delay counts truncated at the window."""
        return Counter(r.delay for r in self.records if r.delay <= self.window)

    @property
    def overflow(self) -> int:
        return sum(1 for r in self.records if r.delay > self.window)

    def fraction_within(self, steps: int) -> float:
        if not self.records:
            return 0.0
        return sum(1 for r in self.records if r.delay <= steps) / len(self.records)


def _parse_trace(path: Path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}:{lineno}: malformed trace line: {err}") from err
            if not isinstance(row, dict) or "type" not in row or "time" not in row or "episode" not in row:
                raise ValueError(f"{path}:{lineno}: trace line missing required fields")
            rows.append(row)
    return rows


def analyze_interruptions(trace_paths, window: int) -> AnalysisResult:
    """Pair interruptions with preceding random events across trace files.

    Interruptions with no preceding random event in their episode are
    counted separately as orphans.
    """
    if window < 0:
        raise ValueError(f"window must be >= 0, got {window}")
    result = AnalysisResult(window=window)
    for raw_path in trace_paths:
        path = Path(raw_path)
        last_event: dict[object, int] = {}
        for row in _parse_trace(path):
            key = row["episode"]
            if row["type"] == "event" and row.get("kind") in _RANDOM_KIND_NAMES:
                time = int(row["time"])
                if key not in last_event or time > last_event[key]:
                    last_event[key] = time
            elif row["type"] == "interruption":
                time = int(row["time"])
                if key in last_event and last_event[key] <= time:
                    result.records.append(
                        InterruptionRecord(
                            episode=(str(path), key),
                            event_time=last_event[key],
                            interruption_time=time,
                        )
                    )
                else:
                    result.orphan_interruptions += 1
    return result


def write_histogram_csv(result: AnalysisResult, path) -> None:
    hist = result.histogram
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("delay,count\n")
        for delay in sorted(hist):
            fh.write(f"{delay},{hist[delay]}\n")
