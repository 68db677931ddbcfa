"""Locate accelerator and brake pedal channels in raw CAN recordings."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .frame_model import CanFrameRecord, ChannelSpec, FrameSeries, PreconditionError, channel_name, parse_channel_name
from .tokenization import ChannelSeries, build_channel_series, enumerate_channel_specs
from .recording_io import ImuSeries, Recording, RecordingSet, load_recording, load_recording_set
from .imu_pipeline import ImuSignal, split_inertial_signals
from .correlation import CorrelationResult, RankedCorrelations, asof_join, pearson, rate_of_change_correlation
from .discovery import DiscoveryParams, DiscoveryResult, channel_calibration_stats, discover_controls
from .pipeline import AnalysisParams, AnalysisResult, analyze

__all__ = [
    "BACKEND",
    "CanFrameRecord",
    "ChannelSpec",
    "FrameSeries",
    "PreconditionError",
    "channel_name",
    "parse_channel_name",
    "ChannelSeries",
    "build_channel_series",
    "enumerate_channel_specs",
    "ImuSeries",
    "Recording",
    "RecordingSet",
    "load_recording",
    "load_recording_set",
    "ImuSignal",
    "split_inertial_signals",
    "CorrelationResult",
    "RankedCorrelations",
    "asof_join",
    "pearson",
    "rate_of_change_correlation",
    "DiscoveryParams",
    "DiscoveryResult",
    "channel_calibration_stats",
    "discover_controls",
    "AnalysisParams",
    "AnalysisResult",
    "analyze",
]
