"""Correlate every tokenized CAN channel against the IMU signals.

Each channel is joined to an IMU signal by nearest timestamp (the shorter
series drives the join) and scored with Pearson's r. Results are ranked by
``|r|`` descending, then join length descending, then channel name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .frame_model import ChannelSpec, PreconditionError, channel_name
from .imu_pipeline import ImuSignal
from .tokenization import decode_matrix, dedupe_last, enumerate_channel_specs

DEFAULT_MIN_SAMPLES = 30
R_SLACK = 1e-12


class TimeSeries(NamedTuple):
    timestamps: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class JoinedSeries:
    x: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))


@dataclass(frozen=True)
class CorrelationResult:
    spec: ChannelSpec
    name: str
    kind: str
    r: float
    n: int

    def sort_key(self):
        return (-abs(self.r), -self.n, self.name)


@dataclass(frozen=True)
class Exclusion:
    spec: ChannelSpec
    name: str
    kind: str
    reason: str
    n: int = 0


@dataclass
class RankedCorrelations:
    kind: str
    results: list[CorrelationResult] = field(default_factory=list)
    excluded: list[Exclusion] = field(default_factory=list)

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)

    def __getitem__(self, i):
        return self.results[i]


def _columns(series) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(series, "timestamps"):
        for attr in ("values", "magnitudes", "linear_y"):
            if hasattr(series, attr):
                return np.asarray(series.timestamps, dtype=np.float64), np.asarray(getattr(series, attr), dtype=np.float64)
    pairs = list(series)
    if not pairs:
        return np.empty(0), np.empty(0)
    ts, vs = zip(*pairs)
    return np.asarray(ts, dtype=np.float64), np.asarray(vs, dtype=np.float64)


def asof_join(a, b, max_gap: float | None = None) -> JoinedSeries:
    """Pair two time-ordered series by nearest timestamp.

    ``a`` and ``b`` are sequences of ``(timestamp, value)`` pairs or objects
    with ``timestamps`` and ``values``/``magnitudes`` arrays. The shorter
    series is dominant (``a`` on a length tie): each of its samples pairs
    with the nearest sample of the other, ties going to the earlier one.
    Pairs are always oriented ``(a value, b value)``.
    """
    ta, va = _columns(a)
    tb, vb = _columns(b)
    if ta.shape[0] == 0 or tb.shape[0] == 0:
        raise PreconditionError("as-of join needs two non-empty series")
    if ta.shape[0] <= tb.shape[0]:
        idx = kernels.nearest_indices(ta, tb)
        x, y = va, vb[idx]
        gaps = np.abs(ta - tb[idx])
    else:
        idx = kernels.nearest_indices(tb, ta)
        x, y = va[idx], vb
        gaps = np.abs(tb - ta[idx])
    if max_gap is not None:
        keep = gaps <= max_gap
        x, y = x[keep], y[keep]
    return JoinedSeries(np.ascontiguousarray(x), np.ascontiguousarray(y))


def pearson(joined: JoinedSeries) -> float | None:
    """Pearson's r of the joined pairs; ``None`` when either side is constant."""
    if joined.n < 2:
        raise PreconditionError(f"pearson needs at least 2 pairs, got {joined.n}")
    r = kernels.pearson(joined.x, joined.y)
    return None if math.isnan(r) else r


def _join_index(channel_ts, signal_ts, max_gap):
    """Column selectors for a channel-vs-signal join.

    Returns ``(channel_cols, signal_cols)`` such that pairing
    ``values[:, channel_cols]`` with ``signal[signal_cols]`` is the as-of join
    with the channel series as first argument.
    """
    if channel_ts.shape[0] <= signal_ts.shape[0]:
        sig = kernels.nearest_indices(channel_ts, signal_ts)
        chan = np.arange(channel_ts.shape[0])
        gaps = np.abs(channel_ts - signal_ts[sig])
    else:
        chan = kernels.nearest_indices(signal_ts, channel_ts)
        sig = np.arange(signal_ts.shape[0])
        gaps = np.abs(signal_ts - channel_ts[chan])
    if max_gap is not None:
        keep = gaps <= max_gap
        chan, sig = chan[keep], sig[keep]
    return chan, sig


def correlate_frame_series(
    frames,
    signals: tuple[ImuSignal, ...],
    min_samples: int = DEFAULT_MIN_SAMPLES,
    max_gap: float | None = None,
    derivative: bool = False,
):
    """Score every channel of one frame ID against each signal.

    Returns one ``(results, exclusions)`` pair per signal, unsorted.
    """
    out = [([], []) for _ in signals]
    specs = enumerate_channel_specs(frames.arbitration_id, int(frames.dlc.max()) if len(frames) else 0)
    if not specs:
        return out
    names = [channel_name(s) for s in specs]
    keep = dedupe_last(frames.timestamps)
    ts = frames.timestamps[keep]
    values = decode_matrix(frames, specs)[:, keep].astype(np.float64)
    if derivative:
        values = np.diff(values, axis=1)
        ts = ts[1:]
    for slot, signal in enumerate(signals):
        results, excluded = out[slot]
        if ts.shape[0] == 0:
            excluded.extend(Exclusion(s, nm, signal.kind, "too few samples", 0) for s, nm in zip(specs, names))
            continue
        chan, sig = _join_index(ts, signal.timestamps, max_gap)
        n = chan.shape[0]
        if n < max(min_samples, 2):
            excluded.extend(Exclusion(s, nm, signal.kind, "too few samples", n) for s, nm in zip(specs, names))
            continue
        rs = kernels.pearson_rows(values[:, chan], signal.magnitudes[sig])
        for spec, name, r in zip(specs, names, rs.tolist()):
            if math.isnan(r):
                excluded.append(Exclusion(spec, name, signal.kind, "degenerate variance", n))
            else:
                results.append(CorrelationResult(spec, name, signal.kind, r, n))
    return out


def rate_of_change_correlation(
    trip,
    accel: ImuSignal,
    decel: ImuSignal,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    max_gap: float | None = None,
    derivative: bool = False,
) -> tuple[RankedCorrelations, RankedCorrelations]:
    """Rank every channel of ``trip`` against the acceleration and deceleration signals."""
    if not trip.can:
        raise PreconditionError("trip recording has no CAN frames")
    ranked = (RankedCorrelations(accel.kind), RankedCorrelations(decel.kind))
    for ident in sorted(trip.can):
        frames = trip.can[ident]
        if len(frames) == 0:
            continue
        per_signal = correlate_frame_series(frames, (accel, decel), min_samples, max_gap, derivative)
        for bucket, (results, excluded) in zip(ranked, per_signal):
            bucket.results.extend(results)
            bucket.excluded.extend(excluded)
    for bucket in ranked:
        bucket.results.sort(key=CorrelationResult.sort_key)
    return ranked
