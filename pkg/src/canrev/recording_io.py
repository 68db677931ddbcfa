"""Reading and writing recordings.

Layout of one recording directory::

    <dir>/imu.csv            Time Stamp (seconds),Linear Y[,extra columns...]
    <dir>/can/<id>.csv       Time Stamp (seconds),Byte 0,...,Byte 7,DLC

A recording set is three sibling directories ``trip/``, ``calib_accel/`` and
``calib_brake/``. IDs are decimal everywhere. Floats are written with
``repr`` so a reload reproduces them exactly.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .frame_model import MAX_ARBITRATION_ID, FrameSeries

log = logging.getLogger(__name__)

TIME_HEADER = "Time Stamp (seconds)"
IMU_COLUMN = "Linear Y"
IMU_HEADER = [TIME_HEADER, IMU_COLUMN]
CAN_HEADER = [TIME_HEADER] + [f"Byte {i}" for i in range(8)] + ["DLC"]
LABELS = ("trip", "calib_accel", "calib_brake")


class RecordingFormatError(ValueError):
    """A recording file could not be parsed. Carries the file and 1-based line."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = None if path is None else str(path)
        self.line = line
        where = ""
        if self.path is not None:
            where = self.path if line is None else f"{self.path}:{line}"
            where += ": "
        super().__init__(where + message)


class MissingRecordingError(RecordingFormatError):
    pass


class HeaderError(RecordingFormatError):
    pass


class NonNumericError(RecordingFormatError):
    pass


class ByteRangeError(RecordingFormatError):
    pass


class DlcRangeError(RecordingFormatError):
    pass


class PaddingError(RecordingFormatError):
    pass


class TimeOrderError(RecordingFormatError):
    pass


@dataclass(frozen=True)
class ImuRecord:
    timestamp: float
    linear_y: float


@dataclass(eq=False)
class ImuSeries:
    """Column-wise IMU samples; iterating yields :class:`ImuRecord`."""

    timestamps: np.ndarray
    linear_y: np.ndarray

    def __post_init__(self):
        self.timestamps = np.ascontiguousarray(self.timestamps, dtype=np.float64)
        self.linear_y = np.ascontiguousarray(self.linear_y, dtype=np.float64)
        if self.timestamps.shape != self.linear_y.shape:
            raise ValueError("timestamp and value lengths differ")

    @classmethod
    def from_records(cls, records: Iterable[ImuRecord]) -> ImuSeries:
        records = list(records)
        return cls([r.timestamp for r in records], [r.linear_y for r in records])

    def __len__(self):
        return self.timestamps.shape[0]

    def __iter__(self):
        for t, y in zip(self.timestamps.tolist(), self.linear_y.tolist()):
            yield ImuRecord(t, y)

    def __getitem__(self, i):
        return ImuRecord(float(self.timestamps[i]), float(self.linear_y[i]))

    def __eq__(self, other):
        if not isinstance(other, ImuSeries):
            return NotImplemented
        return np.array_equal(self.timestamps, other.timestamps) and np.array_equal(self.linear_y, other.linear_y)


@dataclass(eq=False)
class Recording:
    imu: ImuSeries
    can: dict[int, FrameSeries] = field(default_factory=dict)
    label: str = "trip"

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown recording label {self.label!r}")
        if not isinstance(self.imu, ImuSeries):
            self.imu = ImuSeries.from_records(self.imu)
        self.can = {
            int(k): v if isinstance(v, FrameSeries) else FrameSeries.from_frames(v)
            for k, v in sorted(self.can.items())
        }

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (
            self.label == other.label
            and self.imu == other.imu
            and self.can.keys() == other.can.keys()
            and all(self.can[k] == other.can[k] for k in self.can)
        )


@dataclass(eq=True)
class RecordingSet:
    trip: Recording
    calib_accel: Recording
    calib_brake: Recording

    def __post_init__(self):
        for label in LABELS:
            rec = getattr(self, label)
            if rec.label != label:
                raise ValueError(f"{label} slot holds a {rec.label!r} recording")


def _read_rows(path: Path):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise MissingRecordingError("file not found", path) from None
    with fh:
        yield from csv.reader(fh)


def _float(cell: str, path, line: int, what: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise NonNumericError(f"non-numeric {what}: {cell!r}", path, line) from None
    if not np.isfinite(value):
        raise NonNumericError(f"non-finite {what}: {cell!r}", path, line)
    return value


def _int(cell: str, path, line: int, what: str) -> int:
    try:
        return int(cell.strip())
    except ValueError:
        raise NonNumericError(f"non-integer {what}: {cell!r}", path, line) from None


def read_imu_csv(path, column: str = IMU_COLUMN) -> ImuSeries:
    path = Path(path)
    rows = _read_rows(path)
    header = next(rows, None)
    if header is None:
        raise HeaderError("empty file, expected header", path, 1)
    header = [h.strip() for h in header]
    if header[:1] != [TIME_HEADER] or column not in header[1:]:
        raise HeaderError(f"expected header starting {TIME_HEADER!r} with column {column!r}, got {header}", path, 1)
    if column == IMU_COLUMN and header[:2] != IMU_HEADER:
        raise HeaderError(f"expected header {','.join(IMU_HEADER)}, got {','.join(header)}", path, 1)
    col = header.index(column)
    ts, ys = [], []
    for line, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) <= col:
            raise HeaderError(f"row has {len(row)} cells, needs {col + 1}", path, line)
        t = _float(row[0], path, line, "timestamp")
        if ts and t < ts[-1]:
            raise TimeOrderError(f"timestamp {t} precedes {ts[-1]}", path, line)
        ts.append(t)
        ys.append(_float(row[col], path, line, column))
    return ImuSeries(ts, ys)


def read_can_csv(path, arbitration_id: int) -> FrameSeries:
    path = Path(path)
    rows = _read_rows(path)
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != CAN_HEADER:
        raise HeaderError(f"expected header {','.join(CAN_HEADER)}", path, 1)
    ts, dlcs, payloads = [], [], []
    for line, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 10:
            raise HeaderError(f"expected 10 cells, got {len(row)}", path, line)
        t = _float(row[0], path, line, "timestamp")
        if t < 0:
            raise TimeOrderError(f"negative timestamp {t}", path, line)
        if ts and t < ts[-1]:
            raise TimeOrderError(f"timestamp {t} precedes {ts[-1]}", path, line)
        payload = [_int(c, path, line, f"Byte {i}") for i, c in enumerate(row[1:9])]
        for i, b in enumerate(payload):
            if not 0 <= b <= 255:
                raise ByteRangeError(f"Byte {i} = {b} outside 0..255", path, line)
        dlc = _int(row[9], path, line, "DLC")
        if not 0 <= dlc <= 8:
            raise DlcRangeError(f"DLC {dlc} outside 0..8", path, line)
        if any(payload[dlc:]):
            raise PaddingError(f"nonzero byte beyond DLC {dlc}", path, line)
        ts.append(t)
        dlcs.append(dlc)
        payloads.append(payload)
    return FrameSeries(arbitration_id, ts, dlcs, np.array(payloads, dtype=np.uint8).reshape(-1, 8), validate=False)


def load_recording(directory, label: str = "trip", imu_column: str = IMU_COLUMN) -> Recording:
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingRecordingError(f"{label} recording directory not found", directory)
    imu = read_imu_csv(directory / "imu.csv", imu_column)
    can_dir = directory / "can"
    if not can_dir.is_dir():
        raise MissingRecordingError(f"{label} recording has no can/ directory", can_dir)
    can = {}
    for entry in sorted(can_dir.iterdir()):
        if entry.suffix != ".csv":
            continue
        stem = entry.stem
        if not stem.isdigit() or int(stem) > MAX_ARBITRATION_ID:
            raise RecordingFormatError(f"CAN file name must be a decimal arbitration id, got {entry.name!r}", entry)
        can[int(stem)] = read_can_csv(entry, int(stem))
    return Recording(imu, can, label)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_recording(recording: Recording, directory) -> None:
    directory = Path(directory)
    can_dir = directory / "can"
    can_dir.mkdir(parents=True, exist_ok=True)
    for stale in can_dir.glob("*.csv"):
        stale.unlink()
    with open(directory / "imu.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(IMU_HEADER) + "\n")
        for t, y in zip(recording.imu.timestamps.tolist(), recording.imu.linear_y.tolist()):
            fh.write(f"{_fmt(t)},{_fmt(y)}\n")
    for ident, frames in recording.can.items():
        with open(can_dir / f"{ident}.csv", "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(CAN_HEADER) + "\n")
            lines = []
            for t, dlc, payload in zip(frames.timestamps.tolist(), frames.dlc.tolist(), frames.payload.tolist()):
                lines.append(f"{_fmt(t)},{','.join(map(str, payload))},{dlc}\n")
            fh.write("".join(lines))


def load_recording_set(directory, imu_column: str = IMU_COLUMN) -> RecordingSet:
    directory = Path(directory)
    recs = {label: load_recording(directory / label, label, imu_column) for label in LABELS}
    return RecordingSet(**recs)


def write_recording_set(rset: RecordingSet, directory) -> None:
    directory = Path(directory)
    for label in LABELS:
        write_recording(getattr(rset, label), directory / label)


class RawLogError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


def import_raw_log(lines: Iterable[str], hex_values: bool = False, skip_malformed: bool = False) -> dict[int, FrameSeries]:
    """Parse ``timestamp id dlc b0 .. b7`` lines into per-ID frame series.

    ``hex_values`` switches the ID and byte fields to hexadecimal. A line may
    list either ``dlc`` bytes or all eight; bytes beyond the DLC are zeroed
    with a warning. Blank lines and ``#`` comments are skipped.
    """
    base = 16 if hex_values else 10
    buckets: dict[int, tuple[list, list, list]] = {}
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            t, ident, dlc, payload = _parse_raw_line(text, base, lineno)
        except RawLogError as exc:
            if not skip_malformed:
                raise
            log.warning("skipping malformed raw log %s", exc)
            continue
        ts, dlcs, payloads = buckets.setdefault(ident, ([], [], []))
        if ts and t < ts[-1]:
            exc = RawLogError(f"timestamp {t} precedes {ts[-1]} for id {ident}", lineno)
            if not skip_malformed:
                raise exc
            log.warning("skipping malformed raw log %s", exc)
            continue
        ts.append(t)
        dlcs.append(dlc)
        payloads.append(payload)
    return {
        ident: FrameSeries(ident, ts, dlcs, np.array(payloads, dtype=np.uint8).reshape(-1, 8), validate=False)
        for ident, (ts, dlcs, payloads) in sorted(buckets.items())
    }


def _parse_raw_line(text: str, base: int, lineno: int):
    fields = text.replace(",", " ").split()
    if len(fields) < 3:
        raise RawLogError(f"expected 'timestamp id dlc bytes...', got {text!r}", lineno)
    try:
        t = float(fields[0])
        ident = int(fields[1], base)
        dlc = int(fields[2])
        data = [int(f, base) for f in fields[3:]]
    except ValueError:
        raise RawLogError(f"non-numeric field in {text!r}", lineno) from None
    if not np.isfinite(t) or t < 0:
        raise RawLogError(f"bad timestamp {fields[0]!r}", lineno)
    if not 0 <= ident <= MAX_ARBITRATION_ID:
        raise RawLogError(f"arbitration id {ident} out of range", lineno)
    if not 0 <= dlc <= 8:
        raise RawLogError(f"dlc {dlc} outside 0..8", lineno)
    if len(data) not in (dlc, 8):
        raise RawLogError(f"dlc {dlc} but {len(data)} data bytes", lineno)
    if any(not 0 <= b <= 255 for b in data):
        raise RawLogError("data byte outside 0..255", lineno)
    payload = data + [0] * (8 - len(data))
    if any(payload[dlc:]):
        log.warning("line %d: zeroing %d data bytes beyond dlc %d", lineno, 8 - dlc, dlc)
        payload[dlc:] = [0] * (8 - dlc)
    return t, ident, dlc, payload


def file_digests(paths: Iterable[os.PathLike], root=None) -> Mapping[str, str]:
    """sha256 of each file, keyed by its path relative to ``root``."""
    out = {}
    for p in sorted(Path(x) for x in paths):
        key = str(p.relative_to(root)) if root else str(p)
        out[key] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out
