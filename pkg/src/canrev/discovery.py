"""Narrow correlated channels down to the ones that encode a pedal.

Each candidate is re-decoded from the stationary calibration recording for
its pedal. Constant channels are dropped; the rest are ranked by the smooth
ratio, ``ceil(100 * std(diff(values)) / range(values))``, i.e. the typical
per-frame step as a percentage of the channel's span. Every channel tied at
the lowest smooth value is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .correlation import CorrelationResult
from .frame_model import ChannelSpec, PreconditionError
from .tokenization import decode_matrix, dedupe_last

ACCELERATOR = "accelerator"
BRAKE = "brake"

SELECTED = "selected"
CANDIDATE = "candidate"
ABSENT = "absent from calibration"
CONSTANT = "constant"
TOO_FEW = "too few samples"


@dataclass(frozen=True)
class ChannelCalibrationStats:
    n_samples: int
    unique_count: int
    range: int
    stdev_deriv: float
    ratio: float | None
    smooth: int | None

    @property
    def constant(self) -> bool:
        return self.range == 0


@dataclass(frozen=True)
class DiscoveryParams:
    min_unique: int = 1
    min_samples: int = 30
    max_candidates: int | None = None
    max_results: int | None = None
    min_abs_correlation: float | None = None
    sample_stdev: bool = False


@dataclass(frozen=True)
class DiscoveryRow:
    spec: ChannelSpec
    name: str
    r: float
    stats: ChannelCalibrationStats | None
    status: str

    @property
    def selected(self) -> bool:
        return self.status == SELECTED


@dataclass
class DiscoveryResult:
    control: str
    rows: list[DiscoveryRow] = field(default_factory=list)

    @property
    def selected(self) -> list[DiscoveryRow]:
        return [row for row in self.rows if row.selected]

    @property
    def survivors(self) -> list[DiscoveryRow]:
        return [row for row in self.rows if row.status in (SELECTED, CANDIDATE)]

    @property
    def no_candidates(self) -> bool:
        return not self.selected

    def reasons(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for row in self.rows:
            counts[row.status] = counts.get(row.status, 0) + 1
        return counts


def smooth_value(stdev_deriv: float, value_range: int) -> int:
    """Integer smooth percentage for a derivative spread and a value range."""
    if value_range <= 0:
        raise ValueError("smooth ratio is undefined for a zero range")
    # round away representation noise so exact integer ratios do not ceil up
    return math.ceil(round(100.0 * stdev_deriv / value_range, 9))


def stats_from_values(values, ddof: int = 0) -> ChannelCalibrationStats:
    values = np.asarray(values)
    n = values.shape[0]
    if n < 2:
        raise PreconditionError(f"calibration stats need at least 2 samples, got {n}")
    lo, hi = int(values.min()), int(values.max())
    span = hi - lo
    stdev = float(kernels.diff_stdev(values, ddof))
    unique = int(np.unique(values).shape[0])
    if span == 0:
        return ChannelCalibrationStats(n, unique, 0, stdev, None, None)
    return ChannelCalibrationStats(n, unique, span, stdev, 100.0 * stdev / span, smooth_value(stdev, span))


def channel_calibration_stats(series, ddof: int = 0) -> ChannelCalibrationStats:
    """Unique count, range, derivative spread and smooth ratio of a channel series.

    The derivative is the plain successive difference, not divided by time.
    ``ddof=0`` gives the population standard deviation.
    """
    values = series.values if hasattr(series, "values") else [v for _, v in series]
    return stats_from_values(values, ddof)


def _calibration_values(calibration, specs: Sequence[ChannelSpec]) -> dict[ChannelSpec, np.ndarray | None]:
    out: dict[ChannelSpec, np.ndarray | None] = {}
    by_id: dict[int, list[ChannelSpec]] = {}
    for spec in specs:
        by_id.setdefault(spec.arbitration_id, []).append(spec)
    for ident, group in by_id.items():
        frames = calibration.can.get(ident)
        if frames is None or len(frames) == 0:
            out.update((s, None) for s in group)
            continue
        dlc = int(frames.dlc.max())
        present = [s for s in group if s.bytes_needed <= dlc]
        out.update((s, None) for s in group if s.bytes_needed > dlc)
        if present:
            keep = dedupe_last(frames.timestamps)
            matrix = decode_matrix(frames, present)[:, keep]
            out.update(zip(present, matrix))
    return out


def discover_controls(
    ranked: Sequence[CorrelationResult],
    calibration,
    control: str = ACCELERATOR,
    params: DiscoveryParams | None = None,
) -> DiscoveryResult:
    """Pick the pedal channel(s) out of a correlation ranking.

    Rows come back with survivors first (sorted by smooth ascending, then
    ``|r|`` descending, then name) followed by excluded candidates in intake
    order. An empty selection is a legitimate outcome, not an error.
    """
    params = params or DiscoveryParams()
    ranked = list(ranked)
    if not ranked:
        raise PreconditionError("no correlated channels to examine")
    if params.min_abs_correlation is not None:
        ranked = [c for c in ranked if abs(c.r) >= params.min_abs_correlation]
    if params.max_candidates is not None:
        ranked = ranked[: params.max_candidates]
    ddof = 1 if params.sample_stdev else 0
    values = _calibration_values(calibration, [c.spec for c in ranked])

    survivors: list[tuple[CorrelationResult, ChannelCalibrationStats]] = []
    excluded: list[DiscoveryRow] = []
    for cand in ranked:
        series = values[cand.spec]
        if series is None:
            excluded.append(DiscoveryRow(cand.spec, cand.name, cand.r, None, ABSENT))
            continue
        if series.shape[0] < max(params.min_samples, 2):
            stats = stats_from_values(series, ddof) if series.shape[0] >= 2 else None
            excluded.append(DiscoveryRow(cand.spec, cand.name, cand.r, stats, TOO_FEW))
            continue
        stats = stats_from_values(series, ddof)
        if stats.constant or stats.unique_count <= params.min_unique:
            excluded.append(DiscoveryRow(cand.spec, cand.name, cand.r, stats, CONSTANT))
            continue
        survivors.append((cand, stats))

    survivors.sort(key=lambda cs: (cs[1].smooth, -abs(cs[0].r), cs[0].name))
    rows = []
    best = survivors[0][1].smooth if survivors else None
    taken = 0
    for cand, stats in survivors:
        pick = stats.smooth == best and (params.max_results is None or taken < params.max_results)
        taken += pick
        rows.append(DiscoveryRow(cand.spec, cand.name, cand.r, stats, SELECTED if pick else CANDIDATE))
    rows.extend(excluded)
    return DiscoveryResult(control, rows)
