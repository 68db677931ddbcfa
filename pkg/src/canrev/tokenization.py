"""Exhaustive channel enumeration and per-channel time series."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .frame_model import LSB, MSB, CanFrameRecord, ChannelSpec, FrameSeries, PreconditionError, channel_name, spec_arrays


@dataclass(frozen=True, eq=False)
class ChannelSeries:
    spec: ChannelSpec
    name: str
    timestamps: np.ndarray
    values: np.ndarray

    @property
    def samples(self) -> list[tuple[float, int]]:
        return list(zip(self.timestamps.tolist(), self.values.tolist()))

    def __len__(self) -> int:
        return self.timestamps.shape[0]


def enumerate_channel_specs(arbitration_id: int, effective_dlc: int) -> list[ChannelSpec]:
    """All candidate channels for a frame ID carrying ``effective_dlc`` bytes.

    Byte channels come first by anchor, then widths 9 to 16, MSB before LSB
    within each width, anchors ascending. ``d`` bytes give ``d + 16 * (d - 1)``
    specs.
    """
    if not 0 <= effective_dlc <= 8:
        raise PreconditionError(f"effective_dlc must be in 0..8, got {effective_dlc}")
    specs = [ChannelSpec(arbitration_id, k, 8) for k in range(effective_dlc)]
    for length in range(9, 17):
        for endianness in (MSB, LSB):
            specs.extend(ChannelSpec(arbitration_id, k, length, endianness) for k in range(effective_dlc - 1))
    return specs


def dedupe_last(timestamps: np.ndarray) -> np.ndarray:
    """Indices that keep the last sample of each run of equal timestamps."""
    n = timestamps.shape[0]
    if n == 0:
        return np.arange(0)
    keep = np.ones(n, dtype=bool)
    keep[:-1] = timestamps[1:] != timestamps[:-1]
    return np.flatnonzero(keep)


def decode_matrix(frames: FrameSeries, specs: Sequence[ChannelSpec]) -> np.ndarray:
    """``(len(specs), len(frames))`` decoded values, read from zero-padded payloads."""
    anchors, lengths, msb = spec_arrays(specs)
    return kernels.decode_channels(frames.payload, anchors, lengths, msb)


def _as_series(frames) -> FrameSeries:
    if isinstance(frames, FrameSeries):
        if len(frames) == 0:
            raise PreconditionError("no frames")
        return frames
    if not frames:
        raise PreconditionError("no frames")
    ids = {f.arbitration_id for f in frames}
    if len(ids) != 1:
        raise PreconditionError(f"frames mix arbitration ids: {sorted(ids)}")
    return FrameSeries.from_frames(frames)


def build_channel_series(frames: Sequence[CanFrameRecord] | FrameSeries) -> list[ChannelSeries]:
    """Tokenize one ID's frames into every candidate channel series.

    Channels are enumerated against the largest DLC seen; shorter frames
    contribute values from their zero-padded payload. Frames sharing a
    timestamp collapse to the last one.
    """
    series = _as_series(frames)
    if (np.diff(series.timestamps) < 0).any():
        raise PreconditionError(f"timestamps decrease in ID {series.arbitration_id}")
    specs = enumerate_channel_specs(series.arbitration_id, int(series.dlc.max()))
    if not specs:
        return []
    keep = dedupe_last(series.timestamps)
    ts = series.timestamps[keep]
    ts.setflags(write=False)
    matrix = decode_matrix(series, specs)[:, keep]
    out = []
    for spec, row in zip(specs, matrix):
        row.setflags(write=False)
        out.append(ChannelSeries(spec, channel_name(spec), ts, row))
    return out
