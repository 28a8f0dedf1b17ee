"""Tracking-data ingestion and the lagged-correlation baseline.

Loads positional tracking data from CSV into time frames, applies the
court-specific preprocessing (bench removal, half-court reflection,
attack-phase classification, event segmentation with resampling) and
provides a plain lagged Pearson correlation as a reference statistic.

Court conventions: the origin sits at center court, the first team defends
x < boundary and the second team x > boundary.  Entities parked at the
bench sentinel coordinate are treated as off court for that frame.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .core import TimeSeriesMatrix
from .errors import (
    DegenerateInput,
    EmptySelection,
    InsufficientData,
    InvalidInput,
    ParseError,
    SchemaError,
)

#: coordinate assigned to players sitting on the bench; slightly off court
BENCH_SENTINEL = (-48.5, -27.5)


class PhaseLabel(Enum):
    TEAM_A_ATTACKING = "team_a_attacking"
    TEAM_B_ATTACKING = "team_b_attacking"
    TRANSITION = "transition"


@dataclass(frozen=True)
class TrackingFrame:
    """Entity positions at one instant, tagged with an event id."""

    time: float
    entities: dict[str, tuple[float, float]]
    event_id: int = 0

    def __post_init__(self):
        for ent, (x, y) in self.entities.items():
            if not (np.isfinite(x) and np.isfinite(y)):
                raise InvalidInput(f"non-finite coordinates for entity {ent!r}")
        if self.event_id < 0:
            raise InvalidInput("event_id must be non-negative")


@dataclass(frozen=True)
class TrackingSchema:
    """Column names mapping a CSV file onto tracking frames."""

    time_col: str
    entity_col: str
    x_col: str
    y_col: str
    event_col: str | None = None


def load_csv(path, schema: TrackingSchema | dict) -> list[TrackingFrame]:
    """Read tracking rows and group them by time into frames.

    Rows carrying the bench sentinel coordinate drop that entity from its
    frame.  Without an event column all frames belong to event 0.  Rows may
    arrive in any order; frames come back sorted by time.
    """
    if isinstance(schema, dict):
        try:
            schema = TrackingSchema(**{
                k: schema[k] for k in ("time_col", "entity_col", "x_col", "y_col")
            } | ({"event_col": schema["event_col"]} if "event_col" in schema else {}))
        except KeyError as exc:
            raise SchemaError(f"schema is missing key {exc.args[0]!r}") from None
    path = Path(path)
    raw: dict[float, tuple[dict[str, tuple[float, float]], int]] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        required = [schema.time_col, schema.entity_col, schema.x_col, schema.y_col]
        if schema.event_col is not None:
            required.append(schema.event_col)
        for col in required:
            if col not in header:
                raise SchemaError(f"required column {col!r} not in header {header}")
        for line_no, row in enumerate(reader, start=2):
            try:
                time = float(row[schema.time_col])
                x = float(row[schema.x_col])
                y = float(row[schema.y_col])
                event = int(row[schema.event_col]) if schema.event_col else 0
            except (TypeError, ValueError) as exc:
                raise ParseError(str(exc), row=line_no) from None
            entities, _ = raw.setdefault(time, ({}, event))
            if (x, y) == BENCH_SENTINEL:
                continue
            entities[row[schema.entity_col]] = (x, y)
    return [
        TrackingFrame(time=t, entities=entities, event_id=event)
        for t, (entities, event) in sorted(raw.items())
    ]


def reflect_half_court(frames: list[TrackingFrame]) -> list[TrackingFrame]:
    """Fold both court halves together: every x becomes |x|.  Idempotent."""
    return [
        TrackingFrame(
            time=f.time,
            entities={e: (abs(x), y) for e, (x, y) in f.entities.items()},
            event_id=f.event_id,
        )
        for f in frames
    ]


def classify_phase(frame: TrackingFrame, team_a_ids, team_b_ids,
                   half_boundary: float = 0.0) -> PhaseLabel:
    """Which team is attacking, judged from signed (unreflected) x positions.

    The first team attacks when at least 9 of the 10 listed players stand
    strictly inside the second team's half (x > boundary); symmetrically
    for the second team.  Frames without exactly the 10 listed players on
    court are transition.
    """
    team_a = set(team_a_ids)
    team_b = set(team_b_ids)
    on_court = [e for e in frame.entities if e in team_a or e in team_b]
    if len(on_court) != len(team_a) + len(team_b) or len(on_court) != 10:
        return PhaseLabel.TRANSITION
    xs = np.array([frame.entities[e][0] for e in on_court])
    if (xs > half_boundary).sum() >= 9:
        return PhaseLabel.TEAM_A_ATTACKING
    if (xs < half_boundary).sum() >= 9:
        return PhaseLabel.TEAM_B_ATTACKING
    return PhaseLabel.TRANSITION


@dataclass(frozen=True)
class TrackSegment:
    """One entity's positions over one uninterrupted, resampled run.

    ``run_index`` identifies the run; ``offset`` is the index of the first
    resample point the entity is present for, so segments of different
    entities can be aligned in time.
    """

    run_index: int
    offset: int
    xy: np.ndarray  # 2 x T


def _runs(frames: list[TrackingFrame], labels: list[PhaseLabel],
          phase: PhaseLabel) -> list[list[TrackingFrame]]:
    """Maximal stretches of consecutive frames with this label and one event id."""
    runs: list[list[TrackingFrame]] = []
    current: list[TrackingFrame] = []
    for frame, label in zip(frames, labels):
        keep = label == phase
        if keep and current and frame.event_id != current[-1].event_id:
            runs.append(current)
            current = []
        if keep:
            current.append(frame)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def segment_by(frames: list[TrackingFrame], labels: list[PhaseLabel],
               phase: PhaseLabel, resample_dt: float,
               ) -> dict[str, list[TrackSegment]]:
    """Per-entity position segments for all runs of the requested phase.

    Each run is resampled on the grid t0, t0 + dt, ... by nearest-frame
    selection (resampling at the native frame spacing reproduces the run).
    An entity missing from part of a run contributes one segment per
    contiguous stretch of presence.
    """
    if len(labels) != len(frames):
        raise InvalidInput(f"{len(labels)} labels for {len(frames)} frames")
    if not resample_dt > 0:
        raise InvalidInput("resample_dt must be positive")
    runs = _runs(frames, labels, phase)
    if not runs:
        raise EmptySelection(f"no frames labelled {phase.value}")
    segments: dict[str, list[TrackSegment]] = {}
    for run_index, run in enumerate(runs):
        times = np.array([f.time for f in run])
        n_samples = int(np.floor((times[-1] - times[0]) / resample_dt + 1e-9)) + 1
        sample_times = times[0] + resample_dt * np.arange(n_samples)
        picks = np.abs(sample_times[:, None] - times[None, :]).argmin(axis=1)
        sampled = [run[i] for i in picks]
        entities = set()
        for frame in sampled:
            entities.update(frame.entities)
        for entity in entities:
            present = np.array([entity in f.entities for f in sampled])
            start = None
            for i, here in enumerate(list(present) + [False]):
                if here and start is None:
                    start = i
                elif not here and start is not None:
                    xy = np.array([sampled[j].entities[entity]
                                   for j in range(start, i)]).T
                    segments.setdefault(entity, []).append(
                        TrackSegment(run_index=run_index, offset=start, xy=xy)
                    )
                    start = None
    return segments


def pearson_lagged(x: TimeSeriesMatrix, y: TimeSeriesMatrix, tau: int,
                   ) -> np.ndarray:
    """Pearson correlations between lagged rows of x and rows of y.

    Entry (i, j) correlates x_i at time t - tau with y_j at time t.
    """
    if int(tau) != tau or tau < 0:
        raise InvalidInput(f"tau must be a non-negative integer, got {tau}")
    tau = int(tau)
    if x.length != y.length:
        raise InvalidInput(f"series lengths differ: {x.length} vs {y.length}")
    n = x.length - tau
    if n < 3:
        raise InsufficientData(f"need at least 3 lagged pairs, got {n}")
    lagged = x.data[:, :n]
    lead = y.data[:, tau:]
    lagged = lagged - lagged.mean(axis=1, keepdims=True)
    lead = lead - lead.mean(axis=1, keepdims=True)
    sx = np.sqrt((lagged ** 2).sum(axis=1))
    sy = np.sqrt((lead ** 2).sum(axis=1))
    for name, scale, series in (("x", sx, x), ("y", sy, y)):
        if (scale == 0.0).any():
            row = int(np.nonzero(scale == 0.0)[0][0])
            label = series.labels[row] if series.labels else str(row)
            raise DegenerateInput(f"zero-variance row {label!r} in {name}")
    return (lagged @ lead.T) / np.outer(sx, sy)
