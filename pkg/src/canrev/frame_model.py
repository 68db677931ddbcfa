"""CAN frame and channel types, channel naming, and payload extraction.

A channel is a window of 8 to 16 bits anchored on one payload byte. Widths
above 8 take their extra bits from the following byte:

* MSB: the anchor byte is most significant and the extension bits are the
  top ``L - 8`` bits of the next byte.
* LSB: the anchor byte is least significant and the extension bits are the
  bottom ``L - 8`` bits of the next byte.

At 16 bits these are the big- and little-endian words at the anchor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_ARBITRATION_ID = 2**29 - 1
MSB = "msb"
LSB = "lsb"

LENGTH_WORDS = {
    9: "nine",
    10: "ten",
    11: "eleven",
    12: "twelve",
    13: "thirteen",
    14: "fourteen",
    15: "fifteen",
    16: "sixteen",
}
_WORD_LENGTHS = {word: length for length, word in LENGTH_WORDS.items()}

_NAME_RE = re.compile(
    r"^(?P<id>\d+)_(?:byte_(?P<byte>\d)|(?P<end>msb|lsb)_(?P<word>[a-z]+)_bit_(?P<anchor>\d))$"
)


class PreconditionError(ValueError):
    """An operation was called with arguments outside its domain."""


@dataclass(frozen=True)
class CanFrameRecord:
    timestamp: float
    arbitration_id: int
    dlc: int
    payload: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.arbitration_id <= MAX_ARBITRATION_ID:
            raise ValueError(f"arbitration id out of range: {self.arbitration_id}")
        if not 0 <= self.dlc <= 8:
            raise ValueError(f"dlc out of range: {self.dlc}")
        payload = tuple(int(b) for b in self.payload)
        if len(payload) != 8:
            raise ValueError(f"payload must have 8 bytes, got {len(payload)}")
        if any(not 0 <= b <= 255 for b in payload):
            raise ValueError(f"payload byte out of range: {payload}")
        if any(payload[self.dlc :]):
            raise ValueError(f"nonzero payload byte beyond dlc {self.dlc}: {payload}")
        object.__setattr__(self, "payload", payload)


@dataclass(frozen=True, order=True)
class ChannelSpec:
    arbitration_id: int
    anchor_byte: int
    bit_length: int
    endianness: str = MSB

    def __post_init__(self):
        if self.endianness not in (MSB, LSB):
            raise ValueError(f"endianness must be 'msb' or 'lsb', got {self.endianness!r}")
        if not 8 <= self.bit_length <= 16:
            raise ValueError(f"bit_length must be in 8..16, got {self.bit_length}")
        max_anchor = 7 if self.bit_length == 8 else 6
        if not 0 <= self.anchor_byte <= max_anchor:
            raise ValueError(
                f"anchor_byte {self.anchor_byte} invalid for a {self.bit_length}-bit channel"
            )
        if not 0 <= self.arbitration_id <= MAX_ARBITRATION_ID:
            raise ValueError(f"arbitration id out of range: {self.arbitration_id}")
        if self.bit_length == 8:
            object.__setattr__(self, "endianness", MSB)

    @property
    def bytes_needed(self) -> int:
        """Minimum DLC for the channel to lie inside the transmitted payload."""
        return self.anchor_byte + (1 if self.bit_length == 8 else 2)

    def bit_window(self) -> frozenset[tuple[int, int]]:
        """The (byte, bit) positions the channel reads; bit 7 is the byte's MSB."""
        bits = {(self.anchor_byte, b) for b in range(8)}
        ext = self.bit_length - 8
        if ext:
            nxt = self.anchor_byte + 1
            if self.endianness == MSB:
                bits.update((nxt, b) for b in range(8 - ext, 8))
            else:
                bits.update((nxt, b) for b in range(ext))
        return frozenset(bits)

    def contains(self, other: ChannelSpec) -> bool:
        return self.arbitration_id == other.arbitration_id and other.bit_window() <= self.bit_window()


def channel_name(spec: ChannelSpec) -> str:
    if spec.bit_length == 8:
        return f"{spec.arbitration_id}_byte_{spec.anchor_byte}"
    word = LENGTH_WORDS[spec.bit_length]
    return f"{spec.arbitration_id}_{spec.endianness}_{word}_bit_{spec.anchor_byte}"


def channel_suffix(spec: ChannelSpec) -> str:
    """The name without its leading ID, as printed in report tables."""
    return channel_name(spec).split("_", 1)[1]


def parse_channel_name(name: str) -> ChannelSpec:
    """Inverse of :func:`channel_name`."""
    m = _NAME_RE.match(name.strip().lower().replace(" ", "_"))
    if not m:
        raise ValueError(f"not a channel name: {name!r}")
    ident = int(m["id"])
    if m["byte"] is not None:
        return ChannelSpec(ident, int(m["byte"]), 8)
    try:
        length = _WORD_LENGTHS[m["word"]]
    except KeyError:
        raise ValueError(f"unknown bit length word in {name!r}") from None
    return ChannelSpec(ident, int(m["anchor"]), length, m["end"])


def extract_channel_value(payload: Sequence[int], dlc: int, spec: ChannelSpec) -> int:
    if spec.bytes_needed > dlc:
        raise PreconditionError(f"{channel_name(spec)} needs dlc >= {spec.bytes_needed}, got dlc {dlc}")
    head = int(payload[spec.anchor_byte])
    if spec.bit_length == 8:
        return head
    ext = spec.bit_length - 8
    nxt = int(payload[spec.anchor_byte + 1])
    if spec.endianness == MSB:
        return (head << ext) | (nxt >> (8 - ext))
    return head | ((nxt & ((1 << ext) - 1)) << 8)


def encode_channel_value(payload: bytearray, spec: ChannelSpec, value: int) -> None:
    """Write ``value`` into the channel's bit window of ``payload`` in place.

    Bits of the payload outside the window are left untouched.
    """
    if not 0 <= value < (1 << spec.bit_length):
        raise ValueError(f"value {value} does not fit {channel_name(spec)}")
    k = spec.anchor_byte
    ext = spec.bit_length - 8
    if ext == 0:
        payload[k] = value
        return
    if spec.endianness == MSB:
        payload[k] = value >> ext
        keep = payload[k + 1] & ((1 << (8 - ext)) - 1)
        payload[k + 1] = keep | ((value & ((1 << ext) - 1)) << (8 - ext))
    else:
        payload[k] = value & 0xFF
        keep = payload[k + 1] & ~((1 << ext) - 1) & 0xFF
        payload[k + 1] = keep | (value >> 8)


def spec_arrays(specs: Sequence[ChannelSpec]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column arrays (anchors, lengths, msb flags) for the decode kernel."""
    anchors = np.fromiter((s.anchor_byte for s in specs), dtype=np.int64, count=len(specs))
    lengths = np.fromiter((s.bit_length for s in specs), dtype=np.int64, count=len(specs))
    msb = np.fromiter((s.endianness == MSB for s in specs), dtype=np.uint8, count=len(specs))
    return anchors, lengths, msb


class FrameSeries(Sequence[CanFrameRecord]):
    """Time-ordered frames of one arbitration ID, stored column-wise.

    Indexing and iteration yield :class:`CanFrameRecord`; the arrays are
    what the kernels consume.
    """

    def __init__(self, arbitration_id: int, timestamps, dlc, payload, *, validate: bool = True):
        self.arbitration_id = int(arbitration_id)
        self.timestamps = np.ascontiguousarray(timestamps, dtype=np.float64)
        self.dlc = np.ascontiguousarray(dlc, dtype=np.uint8)
        self.payload = np.ascontiguousarray(payload, dtype=np.uint8).reshape(-1, 8)
        n = self.timestamps.shape[0]
        if self.dlc.shape != (n,) or self.payload.shape[0] != n:
            raise ValueError("timestamps, dlc and payload lengths differ")
        if validate:
            self._validate()
        for arr in (self.timestamps, self.dlc, self.payload):
            arr.setflags(write=False)

    def _validate(self):
        if not 0 <= self.arbitration_id <= MAX_ARBITRATION_ID:
            raise ValueError(f"arbitration id out of range: {self.arbitration_id}")
        if (self.dlc > 8).any():
            raise ValueError(f"dlc out of range in ID {self.arbitration_id}")
        beyond = np.arange(8)[None, :] >= self.dlc[:, None]
        if (self.payload[beyond] != 0).any():
            raise ValueError(f"nonzero payload byte beyond dlc in ID {self.arbitration_id}")
        if (np.diff(self.timestamps) < 0).any():
            raise ValueError(f"timestamps decrease in ID {self.arbitration_id}")

    @classmethod
    def from_frames(cls, frames: Sequence[CanFrameRecord]) -> FrameSeries:
        if isinstance(frames, FrameSeries):
            return frames
        if not frames:
            raise ValueError("no frames")
        ids = {f.arbitration_id for f in frames}
        if len(ids) != 1:
            raise ValueError(f"frames mix arbitration ids: {sorted(ids)}")
        return cls(
            ids.pop(),
            [f.timestamp for f in frames],
            [f.dlc for f in frames],
            [f.payload for f in frames],
        )

    def __len__(self) -> int:
        return self.timestamps.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return FrameSeries(
                self.arbitration_id, self.timestamps[i], self.dlc[i], self.payload[i], validate=False
            )
        return CanFrameRecord(
            float(self.timestamps[i]),
            self.arbitration_id,
            int(self.dlc[i]),
            tuple(int(b) for b in self.payload[i]),
        )

    def __eq__(self, other):
        if not isinstance(other, FrameSeries):
            return NotImplemented
        return (
            self.arbitration_id == other.arbitration_id
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.dlc, other.dlc)
            and np.array_equal(self.payload, other.payload)
        )

    __hash__ = None

    def __repr__(self):
        return f"FrameSeries(id={self.arbitration_id}, n={len(self)})"
