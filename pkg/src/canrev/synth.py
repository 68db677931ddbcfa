"""Synthetic vehicles with a known channel layout.

A :class:`GroundTruthLayout` plays the part of a DBC file: it says which
bit window of which frame ID carries each signal. :func:`generate_recording_set`
drives a first-order longitudinal model through a pedal schedule and emits a
trip plus the two stationary calibration recordings, all deterministic for a
given seed.

Config files are JSON::

    {"scenario": {"duration": 420, "imu_rate": 100, "imu_noise": 0.15,
                  "seed": 7, "vehicle": {"accel_gain": 3.0, ...},
                  "presses": [{"pedal": "accel", "start": 5, "ramp_up": 2,
                               "hold": 4, "ramp_down": 2, "peak": 0.6}, ...],
                  "calib_presses": [...], "calib_duration": 60},
     "layout": {"signals": [{"role": "accel_pedal",
                             "placement": "190_msb_twelve_bit_2",
                             "scale": 4000, "offset": 40, "period": 0.02}, ...]}}

Omitted scenario keys take their defaults; an omitted ``presses`` list is
drawn at random from the seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .frame_model import MSB, ChannelSpec, FrameSeries, channel_name, parse_channel_name
from .recording_io import ImuSeries, Recording, RecordingSet

ACCEL_PEDAL = "accel_pedal"
BRAKE_PEDAL = "brake_pedal"
SPEED = "speed"
CONSTANT = "constant"
COUNTER = "counter"
RANDOM = "random"
DERIVED_ACCEL = "derived_accel"
ROLES = (ACCEL_PEDAL, BRAKE_PEDAL, SPEED, CONSTANT, COUNTER, RANDOM, DERIVED_ACCEL)
PEDALS = ("accel", "brake")


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class SignalDef:
    role: str
    placement: ChannelSpec
    scale: float = 1.0
    offset: float = 0.0
    period: float = 0.02

    @property
    def arbitration_id(self) -> int:
        return self.placement.arbitration_id


@dataclass(frozen=True)
class GroundTruthLayout:
    signals: tuple[SignalDef, ...]

    def __post_init__(self):
        object.__setattr__(self, "signals", tuple(self.signals))
        self.validate()

    def validate(self):
        periods: dict[int, float] = {}
        windows: dict[int, set] = {}
        for sig in self.signals:
            name = channel_name(sig.placement)
            if sig.role not in ROLES:
                raise LayoutError(f"{name}: unknown role {sig.role!r}")
            if not sig.scale > 0:
                raise LayoutError(f"{name}: scale must be positive")
            if not sig.period > 0:
                raise LayoutError(f"{name}: period must be positive")
            top = (1 << sig.placement.bit_length) - 1
            if sig.role in (ACCEL_PEDAL, BRAKE_PEDAL) and not 0 <= round(sig.offset) <= round(sig.offset + sig.scale) <= top:
                raise LayoutError(f"{name}: pedal range offset..offset+scale does not fit {top}")
            if sig.role == CONSTANT and not 0 <= round(sig.offset) <= top:
                raise LayoutError(f"{name}: constant {sig.offset} does not fit {top}")
            ident = sig.arbitration_id
            if periods.setdefault(ident, sig.period) != sig.period:
                raise LayoutError(f"signals on ID {ident} disagree on frame period")
            window = sig.placement.bit_window()
            used = windows.setdefault(ident, set())
            if used & window:
                raise LayoutError(f"{name} overlaps another signal on ID {ident}")
            used |= window

    def truth(self, role: str) -> SignalDef:
        for sig in self.signals:
            if sig.role == role:
                return sig
        raise LookupError(f"layout has no {role} signal")

    @property
    def frame_ids(self) -> list[int]:
        return sorted({s.arbitration_id for s in self.signals})

    def to_dict(self) -> dict:
        return {
            "signals": [
                {
                    "role": s.role,
                    "placement": channel_name(s.placement),
                    "scale": s.scale,
                    "offset": s.offset,
                    "period": s.period,
                }
                for s in self.signals
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> GroundTruthLayout:
        sigs = []
        for raw in data["signals"]:
            raw = dict(raw)
            raw["placement"] = parse_channel_name(raw["placement"])
            sigs.append(SignalDef(**raw))
        return cls(tuple(sigs))


def default_layout() -> GroundTruthLayout:
    """Two pedals among sixteen decoy signals on five frame IDs."""

    def sig(role, ident, anchor, length, endianness=MSB, scale=1.0, offset=0.0, period=0.02):
        return SignalDef(role, ChannelSpec(ident, anchor, length, endianness), scale, offset, period)

    return GroundTruthLayout(
        (
            sig(DERIVED_ACCEL, 170, 0, 16, scale=1000.0, offset=32768.0),
            sig(SPEED, 170, 2, 16, scale=100.0),
            sig(COUNTER, 170, 4, 8),
            sig(CONSTANT, 170, 5, 8, offset=60.0),
            sig(RANDOM, 170, 6, 8),
            sig(RANDOM, 190, 0, 8),
            sig(CONSTANT, 190, 1, 8, offset=17.0),
            sig(ACCEL_PEDAL, 190, 2, 12, scale=4000.0, offset=40.0),
            sig(COUNTER, 190, 5, 8),
            sig(CONSTANT, 209, 0, 8, offset=200.0),
            sig(BRAKE_PEDAL, 209, 1, 10, "lsb", scale=1000.0, offset=10.0),
            sig(COUNTER, 209, 4, 8),
            sig(RANDOM, 209, 5, 16),
            sig(SPEED, 300, 0, 8, scale=3.0, period=0.1),
            sig(CONSTANT, 300, 2, 8, offset=5.0, period=0.1),
            sig(COUNTER, 300, 7, 8, period=0.1),
            sig(RANDOM, 453, 0, 16, "lsb", period=0.05),
            sig(CONSTANT, 453, 3, 8, offset=99.0, period=0.05),
        )
    )


@dataclass(frozen=True)
class PressEvent:
    pedal: str
    start: float
    ramp_up: float
    hold: float
    ramp_down: float
    peak: float

    def __post_init__(self):
        if self.pedal not in PEDALS:
            raise ValueError(f"pedal must be one of {PEDALS}, got {self.pedal!r}")
        if not 0.0 <= self.peak <= 1.0:
            raise ValueError(f"peak fraction must be in [0, 1], got {self.peak}")
        if min(self.ramp_up, self.hold, self.ramp_down) < 0 or self.start < 0:
            raise ValueError("press timings must be non-negative")

    @property
    def end(self) -> float:
        return self.start + self.ramp_up + self.hold + self.ramp_down

    def level(self, t) -> np.ndarray:
        """Trapezoidal pedal position at times ``t``."""
        t = np.asarray(t, dtype=np.float64)
        rel = t - self.start
        up_end = self.ramp_up
        hold_end = up_end + self.hold
        down_end = hold_end + self.ramp_down
        out = np.zeros_like(t)
        if self.ramp_up > 0:
            rising = (rel >= 0) & (rel < up_end)
            out[rising] = rel[rising] / self.ramp_up
        out[(rel >= up_end) & (rel <= hold_end)] = 1.0
        if self.ramp_down > 0:
            falling = (rel > hold_end) & (rel < down_end)
            out[falling] = (down_end - rel[falling]) / self.ramp_down
        return out * self.peak


@dataclass(frozen=True)
class VehicleParams:
    accel_gain: float = 3.0
    brake_gain: float = 6.0
    drag: float = 0.01


def default_calibration_presses(count: int = 6, ramp: float = 3.0, hold: float = 1.0, gap: float = 2.0) -> tuple[PressEvent, ...]:
    """Full-travel presses for a stationary calibration, timed on the accel pedal."""
    presses = []
    t = 2.0
    for _ in range(count):
        presses.append(PressEvent("accel", t, ramp, hold, ramp, 1.0))
        t += 2 * ramp + hold + gap
    return tuple(presses)


@dataclass(frozen=True)
class Scenario:
    duration: float = 420.0
    imu_rate: float = 100.0
    presses: tuple[PressEvent, ...] = ()
    imu_noise: float = 0.15
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    calib_presses: tuple[PressEvent, ...] = field(default_factory=default_calibration_presses)
    calib_duration: float | None = None
    pedal_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "presses", tuple(self.presses))
        object.__setattr__(self, "calib_presses", tuple(self.calib_presses))
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.imu_rate > 0:
            raise ValueError("imu_rate must be positive")
        if self.imu_noise < 0 or self.pedal_noise < 0:
            raise ValueError("noise levels must be non-negative")

    @property
    def calibration_duration(self) -> float:
        if self.calib_duration is not None:
            return self.calib_duration
        end = max((p.end for p in self.calib_presses), default=0.0)
        return end + 2.0

    def to_dict(self) -> dict:
        data = asdict(self)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> Scenario:
        data = dict(data)
        if "vehicle" in data:
            data["vehicle"] = VehicleParams(**data["vehicle"])
        for key in ("presses", "calib_presses"):
            if key in data:
                data[key] = tuple(PressEvent(**p) for p in data[key])
        scenario = cls(**data)
        if "presses" not in data:
            scenario = replace(scenario, presses=random_trip_presses(scenario.duration, scenario.vehicle, scenario.seed))
        return scenario


def random_trip_presses(duration: float, vehicle: VehicleParams, seed: int) -> tuple[PressEvent, ...]:
    """Alternating accelerate/brake presses with coasting gaps.

    Braking effort is sized from a drag-free speed estimate so the vehicle
    mostly keeps rolling, with an occasional deliberate stop.
    """
    rng = np.random.default_rng([seed, 0x5EED])
    presses = []
    t = float(rng.uniform(2.0, 5.0))
    v = 0.0
    while True:
        up, hold, down = rng.uniform(1.0, 3.0), rng.uniform(2.0, 6.0), rng.uniform(1.0, 3.0)
        peak = rng.uniform(0.3, 1.0)
        gain_time = vehicle.accel_gain * (hold + (up + down) / 2)
        if v + peak * gain_time > 35.0:
            peak = max(0.2, (35.0 - v) / gain_time)
        press = PressEvent("accel", t, up, hold, down, min(1.0, peak))
        if press.end > duration - 1.0:
            break
        presses.append(press)
        v += press.peak * gain_time
        t = press.end + rng.uniform(1.0, 4.0)
        v = max(0.0, v - vehicle.drag * v * (press.end - press.start))

        up, hold, down = rng.uniform(0.5, 2.0), rng.uniform(1.0, 4.0), rng.uniform(0.5, 2.0)
        brake_time = vehicle.brake_gain * (hold + (up + down) / 2)
        full_stop = rng.uniform() < 0.1
        target = 1.0 if full_stop else rng.uniform(0.3, 0.7)
        peak = min(1.0, target * v / brake_time)
        if peak < 0.1:
            continue
        press = PressEvent("brake", t, up, hold, down, peak)
        if press.end > duration - 1.0:
            break
        presses.append(press)
        v = max(0.0, v - peak * brake_time)
        t = press.end + rng.uniform(1.0, 4.0)
    return tuple(presses)


def default_scenario(seed: int = 0, duration: float | None = None, imu_noise: float = 0.15) -> Scenario:
    """A 5 to 10 minute trip (drawn from the seed unless given) at 100 Hz IMU."""
    if duration is None:
        duration = float(np.random.default_rng([seed, 0xD0]).uniform(300.0, 600.0))
    vehicle = VehicleParams()
    return Scenario(
        duration=duration,
        presses=random_trip_presses(duration, vehicle, seed),
        imu_noise=imu_noise,
        vehicle=vehicle,
        seed=seed,
    )


def pedal_levels(presses, pedal: str, t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    level = np.zeros_like(t)
    for p in presses:
        if p.pedal == pedal:
            level += p.level(t)
    return np.clip(level, 0.0, 1.0)


def simulate_dynamics(scenario: Scenario, t: np.ndarray, accel_pedal: np.ndarray, brake_pedal: np.ndarray):
    """Euler-integrate speed on the grid ``t``; returns ``(speed, accel)``.

    Braking only acts while moving, and speed never goes negative.
    """
    veh = scenario.vehicle
    n = t.shape[0]
    v = np.zeros(n)
    a = np.zeros(n)
    dt = np.diff(t, append=t[-1] + (t[-1] - t[-2] if n > 1 else 1.0))
    speed = 0.0
    for k in range(n):
        moving = speed > 0.0
        acc = veh.accel_gain * accel_pedal[k] - veh.drag * speed
        if moving:
            acc -= veh.brake_gain * brake_pedal[k]
        elif acc < 0.0:
            acc = 0.0
        v[k] = speed
        a[k] = acc
        speed = max(0.0, speed + acc * dt[k])
    return v, a


def _encode_columns(payload: np.ndarray, spec: ChannelSpec, values: np.ndarray) -> None:
    values = values.astype(np.int64)
    k = spec.anchor_byte
    ext = spec.bit_length - 8
    if ext == 0:
        payload[:, k] |= values.astype(np.uint8)
    elif spec.endianness == MSB:
        payload[:, k] |= (values >> ext).astype(np.uint8)
        payload[:, k + 1] |= ((values & ((1 << ext) - 1)) << (8 - ext)).astype(np.uint8)
    else:
        payload[:, k] |= (values & 0xFF).astype(np.uint8)
        payload[:, k + 1] |= (values >> 8).astype(np.uint8)


def _frame_times(period: float, duration: float, phase: float) -> np.ndarray:
    count = int(np.floor((duration - phase) / period)) + 1
    times = phase + period * np.arange(max(count, 0))
    return times[times < duration]


def _build_can(layout, duration, phase_rng, value_rng, physical, pedal_noise):
    """``physical`` maps role -> callable(times) giving the physical quantity."""
    can = {}
    by_id: dict[int, list[SignalDef]] = {}
    for sig in layout.signals:
        by_id.setdefault(sig.arbitration_id, []).append(sig)
    for ident in sorted(by_id):
        sigs = by_id[ident]
        period = sigs[0].period
        phase = float(phase_rng.uniform(0.0, period))
        times = _frame_times(period, duration, phase)
        payload = np.zeros((times.shape[0], 8), dtype=np.uint8)
        for sig in sigs:
            top = (1 << sig.placement.bit_length) - 1
            if sig.role == CONSTANT:
                raw = np.full(times.shape[0], round(sig.offset), dtype=np.int64)
            elif sig.role == COUNTER:
                start = int(value_rng.integers(0, top + 1))
                raw = (start + np.arange(times.shape[0])) % (top + 1)
            elif sig.role == RANDOM:
                raw = value_rng.integers(0, top + 1, size=times.shape[0])
            else:
                x = physical[sig.role](times)
                scaled = sig.offset + sig.scale * x
                if sig.role in (ACCEL_PEDAL, BRAKE_PEDAL) and pedal_noise > 0:
                    scaled = scaled + value_rng.normal(0.0, pedal_noise * sig.scale, size=times.shape[0])
                raw = np.clip(np.rint(scaled), 0, top).astype(np.int64)
            _encode_columns(payload, sig.placement, raw)
        can[ident] = FrameSeries(ident, times, np.full(times.shape[0], 8, dtype=np.uint8), payload, validate=False)
    return can


def _imu_grid(duration: float, rate: float) -> np.ndarray:
    return np.arange(int(np.ceil(duration * rate))) / rate


def _stationary(scenario, layout, label, pedal, rng_streams):
    phase_rng, value_rng, noise_rng = rng_streams
    duration = scenario.calibration_duration
    t = _imu_grid(duration, scenario.imu_rate)
    y = noise_rng.normal(0.0, scenario.imu_noise, size=t.shape[0]) if scenario.imu_noise > 0 else np.zeros_like(t)
    presses = tuple(replace(p, pedal=pedal) for p in scenario.calib_presses)
    zero = lambda times: np.zeros_like(times)  # noqa: E731
    physical = {
        ACCEL_PEDAL: (lambda times: pedal_levels(presses, "accel", times)),
        BRAKE_PEDAL: (lambda times: pedal_levels(presses, "brake", times)),
        SPEED: zero,
        DERIVED_ACCEL: zero,
    }
    can = _build_can(layout, duration, phase_rng, value_rng, physical, scenario.pedal_noise)
    return Recording(ImuSeries(t, y), can, label)


def generate_recording_set(scenario: Scenario, layout: GroundTruthLayout | None = None, seed: int | None = None) -> RecordingSet:
    """Trip plus accelerator and brake calibrations for a synthetic vehicle.

    Trip IMU ``linear_y`` is the negated longitudinal acceleration plus
    Gaussian noise, so forward acceleration reads negative.
    """
    layout = layout or default_layout()
    seed = scenario.seed if seed is None else seed
    streams = [np.random.default_rng([seed, i]) for i in range(9)]

    t = _imu_grid(scenario.duration, scenario.imu_rate)
    pa = pedal_levels(scenario.presses, "accel", t)
    pb = pedal_levels(scenario.presses, "brake", t)
    v, a = simulate_dynamics(scenario, t, pa, pb)
    noise = streams[2].normal(0.0, scenario.imu_noise, size=t.shape[0]) if scenario.imu_noise > 0 else 0.0
    y = -a + noise
    y = y + 0.0
    idx_prev = lambda times: np.clip(np.searchsorted(t, times, side="right") - 1, 0, t.shape[0] - 1)  # noqa: E731
    physical = {
        ACCEL_PEDAL: (lambda times: pedal_levels(scenario.presses, "accel", times)),
        BRAKE_PEDAL: (lambda times: pedal_levels(scenario.presses, "brake", times)),
        SPEED: (lambda times: np.interp(times, t, v)),
        DERIVED_ACCEL: (lambda times: a[idx_prev(times)]),
    }
    trip_can = _build_can(layout, scenario.duration, streams[0], streams[1], physical, scenario.pedal_noise)
    trip = Recording(ImuSeries(t, y), trip_can, "trip")
    calib_accel = _stationary(scenario, layout, "calib_accel", "accel", streams[3:6])
    calib_brake = _stationary(scenario, layout, "calib_brake", "brake", streams[6:9])
    return RecordingSet(trip, calib_accel, calib_brake)


@dataclass(frozen=True)
class GroundTruthScore:
    truth: ChannelSpec
    hit: bool
    rank: int | None
    decoys: int


def evaluate_against_ground_truth(result, layout: GroundTruthLayout) -> GroundTruthScore:
    """Score a discovery result against the layout's pedal placement.

    A row matches when its bit window contains the true window. ``rank`` is
    the 1-based position of the first matching row among the result's
    ranked survivors; ``decoys`` counts selected rows that do not match.
    """
    role = ACCEL_PEDAL if result.control == "accelerator" else BRAKE_PEDAL
    truth = layout.truth(role).placement
    selected = result.selected
    hit = any(row.spec.contains(truth) for row in selected)
    rank = None
    for pos, row in enumerate(result.survivors, start=1):
        if row.spec.contains(truth):
            rank = pos
            break
    decoys = sum(not row.spec.contains(truth) for row in selected)
    return GroundTruthScore(truth, hit, rank, decoys)


def load_config(path) -> tuple[Scenario, GroundTruthLayout]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    scenario = Scenario.from_dict(data.get("scenario", {}))
    layout = GroundTruthLayout.from_dict(data["layout"]) if "layout" in data else default_layout()
    return scenario, layout


def dump_config(scenario: Scenario, layout: GroundTruthLayout) -> str:
    return json.dumps({"scenario": scenario.to_dict(), "layout": layout.to_dict()}, indent=2, sort_keys=True)
