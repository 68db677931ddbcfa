"""Two-stage analysis: channel correlation on the trip, then pedal discovery."""

from __future__ import annotations

from dataclasses import dataclass, field

from .correlation import DEFAULT_MIN_SAMPLES, RankedCorrelations, rate_of_change_correlation
from .discovery import ACCELERATOR, BRAKE, DiscoveryParams, DiscoveryResult, discover_controls
from .imu_pipeline import DEFAULT_WINDOW, split_inertial_signals
from .recording_io import Recording, RecordingSet


@dataclass(frozen=True)
class AnalysisParams:
    smoothing_window: float = DEFAULT_WINDOW
    forward_negative: bool = True
    min_samples: int = DEFAULT_MIN_SAMPLES
    max_gap: float | None = None
    derivative: bool = False
    discovery: DiscoveryParams = field(default_factory=DiscoveryParams)

    def __post_init__(self):
        if self.smoothing_window < 0:
            raise ValueError("smoothing window must be >= 0")
        if self.min_samples < 2:
            raise ValueError("min_samples must be >= 2")
        if self.max_gap is not None and self.max_gap < 0:
            raise ValueError("max_gap must be >= 0")


@dataclass
class AnalysisResult:
    acceleration: RankedCorrelations
    deceleration: RankedCorrelations
    accelerator: DiscoveryResult
    brake: DiscoveryResult

    @property
    def no_candidates(self) -> bool:
        return self.accelerator.no_candidates or self.brake.no_candidates


def correlate_trip(trip: Recording, params: AnalysisParams) -> tuple[RankedCorrelations, RankedCorrelations]:
    accel, decel = split_inertial_signals(trip.imu, params.smoothing_window, params.forward_negative)
    return rate_of_change_correlation(trip, accel, decel, params.min_samples, params.max_gap, params.derivative)


def discover(ranked: RankedCorrelations, calibration: Recording, control: str, params: AnalysisParams) -> DiscoveryResult:
    if len(ranked) == 0:
        return DiscoveryResult(control, [])
    return discover_controls(ranked.results, calibration, control, params.discovery)


def analyze(rset: RecordingSet, params: AnalysisParams | None = None) -> AnalysisResult:
    params = params or AnalysisParams()
    acc, dec = correlate_trip(rset.trip, params)
    return AnalysisResult(
        acc,
        dec,
        discover(acc, rset.calib_accel, ACCELERATOR, params),
        discover(dec, rset.calib_brake, BRAKE, params),
    )
