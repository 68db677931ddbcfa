"""Split the longitudinal IMU axis into acceleration and deceleration signals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .frame_model import PreconditionError
from .tokenization import dedupe_last

ACCELERATION = "acceleration"
DECELERATION = "deceleration"
DEFAULT_WINDOW = 0.5


@dataclass(frozen=True, eq=False)
class ImuSignal:
    kind: str
    timestamps: np.ndarray
    magnitudes: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.timestamps.tolist(), self.magnitudes.tolist()))

    def __len__(self):
        return self.timestamps.shape[0]


def smooth(timestamps, values, window: float) -> np.ndarray:
    """Centered moving average over ``window`` seconds, truncated at the edges."""
    if window < 0:
        raise PreconditionError(f"smoothing window must be >= 0, got {window}")
    return kernels.moving_average(timestamps, values, window / 2.0)


def split_inertial_signals(imu, smoothing_window: float = DEFAULT_WINDOW, forward_negative: bool = True):
    """Return ``(acceleration, deceleration)`` magnitude signals.

    The axis is smoothed first, then half-wave rectified: with the default
    convention a negative reading is forward acceleration. Repeated
    timestamps keep their last sample.
    """
    if smoothing_window < 0:
        raise PreconditionError(f"smoothing window must be >= 0, got {smoothing_window}")
    ts = np.asarray(imu.timestamps, dtype=np.float64)
    ys = np.asarray(imu.linear_y, dtype=np.float64)
    if ts.shape[0] == 0:
        raise PreconditionError("empty IMU series")
    if (np.diff(ts) < 0).any():
        raise PreconditionError("IMU timestamps are not time-ordered")
    keep = dedupe_last(ts)
    ts, ys = ts[keep], ys[keep]
    forward = -smooth(ts, ys, smoothing_window) if forward_negative else smooth(ts, ys, smoothing_window)
    accel = np.maximum(forward, 0.0)
    decel = np.maximum(-forward, 0.0)
    # max(0, -0.0) keeps the sign bit; normalize so outputs are plain zeros
    accel += 0.0
    decel += 0.0
    return ImuSignal(ACCELERATION, ts, accel), ImuSignal(DECELERATION, ts, decel)
