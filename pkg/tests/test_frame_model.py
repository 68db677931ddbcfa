import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canrev.frame_model import (
    LSB,
    MSB,
    CanFrameRecord,
    ChannelSpec,
    FrameSeries,
    PreconditionError,
    channel_name,
    encode_channel_value,
    extract_channel_value,
    parse_channel_name,
)

payloads = st.lists(st.integers(0, 255), min_size=8, max_size=8)


def valid_specs(ident=st.integers(0, 2**29 - 1)):
    def build(args):
        i, length, end, anchor = args
        anchor = anchor % (8 if length == 8 else 7)
        return ChannelSpec(i, anchor, length, end)

    return st.tuples(ident, st.integers(8, 16), st.sampled_from([MSB, LSB]), st.integers(0, 7)).map(build)


def bitstring_oracle(payload, spec):
    """Reassemble the channel from a 64-character bit string of the payload."""
    bits = "".join(format(b, "08b") for b in payload)
    k = spec.anchor_byte
    head = bits[8 * k : 8 * k + 8]
    if spec.bit_length == 8:
        return int(head, 2)
    ext = spec.bit_length - 8
    nxt = bits[8 * (k + 1) : 8 * (k + 2)]
    if spec.endianness == MSB:
        return int(head + nxt[:ext], 2)
    return int(nxt[8 - ext :] + head, 2)


class TestChannelNames:
    @pytest.mark.parametrize(
        "spec, name",
        [
            (ChannelSpec(211, 0, 16, MSB), "211_msb_sixteen_bit_0"),
            (ChannelSpec(190, 2, 8, MSB), "190_byte_2"),
            (ChannelSpec(454, 5, 13, MSB), "454_msb_thirteen_bit_5"),
            (ChannelSpec(209, 1, 10, LSB), "209_lsb_ten_bit_1"),
        ],
    )
    def test_known_names(self, spec, name):
        assert channel_name(spec) == name
        assert parse_channel_name(name) == spec

    def test_byte_channels_are_canonical(self):
        assert ChannelSpec(1, 3, 8, LSB) == ChannelSpec(1, 3, 8, MSB)

    def test_parse_accepts_spaced_form(self):
        assert parse_channel_name("211 msb sixteen bit 0") == ChannelSpec(211, 0, 16)

    @pytest.mark.parametrize("bad", ["", "211", "211_msb_seventeen_bit_0", "211_mid_ten_bit_0", "x_byte_1"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_channel_name(bad)

    @given(valid_specs())
    def test_round_trip(self, spec):
        assert parse_channel_name(channel_name(spec)) == spec

    def test_injective_over_one_id(self):
        specs = {ChannelSpec(5, a, L, e) for L in range(8, 17) for e in (MSB, LSB) for a in range(8 if L == 8 else 7)}
        names = {channel_name(s) for s in specs}
        assert len(names) == len(specs) == 8 + 16 * 7


class TestSpecValidation:
    @pytest.mark.parametrize(
        "args",
        [(1, 7, 9, MSB), (1, 8, 8, MSB), (1, 0, 7, MSB), (1, 0, 17, MSB), (1, 0, 12, "mid"), (-1, 0, 8, MSB), (2**29, 0, 8, MSB)],
    )
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            ChannelSpec(*args)

    def test_bit_windows(self):
        assert ChannelSpec(1, 2, 12, MSB).bit_window() == {(2, b) for b in range(8)} | {(3, b) for b in range(4, 8)}
        assert ChannelSpec(1, 1, 10, LSB).bit_window() == {(1, b) for b in range(8)} | {(2, 0), (2, 1)}

    def test_containment(self):
        byte = ChannelSpec(3, 2, 8)
        assert ChannelSpec(3, 2, 16, MSB).contains(byte)
        assert ChannelSpec(3, 2, 16, LSB).contains(byte)
        assert ChannelSpec(3, 1, 16, MSB).contains(byte)
        assert not ChannelSpec(4, 2, 16, MSB).contains(byte)
        assert not ChannelSpec(3, 2, 12, MSB).contains(ChannelSpec(3, 2, 12, LSB))


class TestExtraction:
    pay = [0x01, 0x02, 0, 0, 0, 0, 0, 0]
    pay2 = [0xAB, 0xCD, 0, 0, 0, 0, 0, 0]

    def test_sixteen_bit_words(self):
        assert extract_channel_value(self.pay, 8, ChannelSpec(1, 0, 16, MSB)) == 258
        assert extract_channel_value(self.pay, 8, ChannelSpec(1, 0, 16, LSB)) == 513

    def test_twelve_bit(self):
        assert extract_channel_value(self.pay2, 8, ChannelSpec(1, 0, 12, MSB)) == 2748
        assert extract_channel_value(self.pay2, 8, ChannelSpec(1, 0, 12, LSB)) == 3499

    def test_frozen_oracle_values(self):
        # frozen from bitstring_oracle on a fixed payload
        pay = [0x00, 0x0A, 0xAD, 0x00, 0x00, 0x13, 0x00, 0x50]
        assert extract_channel_value(pay, 8, ChannelSpec(272, 1, 13, MSB)) == 341
        assert extract_channel_value(pay, 8, ChannelSpec(272, 1, 13, LSB)) == 3338
        assert extract_channel_value(pay, 8, ChannelSpec(272, 5, 16, LSB)) == 19
        assert extract_channel_value(pay, 8, ChannelSpec(272, 2, 8)) == 173

    def test_dlc_precondition(self):
        with pytest.raises(PreconditionError, match="dlc"):
            extract_channel_value(self.pay, 1, ChannelSpec(1, 0, 9, MSB))
        assert extract_channel_value(self.pay, 1, ChannelSpec(1, 0, 8)) == 1

    @given(payloads, valid_specs(st.just(1)))
    def test_matches_bitstring_oracle(self, payload, spec):
        value = extract_channel_value(payload, 8, spec)
        assert value == bitstring_oracle(payload, spec)
        assert 0 <= value < 2**spec.bit_length

    @given(payloads, st.integers(0, 6))
    def test_word_composition(self, payload, k):
        hi = extract_channel_value(payload, 8, ChannelSpec(1, k, 8))
        lo = extract_channel_value(payload, 8, ChannelSpec(1, k + 1, 8))
        assert extract_channel_value(payload, 8, ChannelSpec(1, k, 16, MSB)) == 256 * hi + lo
        assert extract_channel_value(payload, 8, ChannelSpec(1, k, 16, LSB)) == hi + 256 * lo

    @given(payloads, st.integers(0, 6), st.integers(9, 16))
    def test_byte_projection(self, payload, k, length):
        byte = extract_channel_value(payload, 8, ChannelSpec(1, k, 8))
        assert extract_channel_value(payload, 8, ChannelSpec(1, k, length, MSB)) >> (length - 8) == byte
        assert extract_channel_value(payload, 8, ChannelSpec(1, k, length, LSB)) % 256 == byte

    @given(payloads, valid_specs(st.just(1)), st.data())
    def test_encode_round_trip(self, payload, spec, data):
        value = data.draw(st.integers(0, 2**spec.bit_length - 1))
        buf = bytearray(payload)
        encode_channel_value(buf, spec, value)
        assert extract_channel_value(buf, 8, spec) == value
        outside = [(i, b) for i in range(8) for b in range(8) if (i, b) not in spec.bit_window()]
        for i, b in outside:
            assert (buf[i] >> b) & 1 == (payload[i] >> b) & 1


class TestFrames:
    def test_padding_rule(self):
        CanFrameRecord(0.0, 1, 3, (1, 2, 3, 0, 0, 0, 0, 0))
        with pytest.raises(ValueError, match="beyond dlc"):
            CanFrameRecord(0.0, 1, 2, (1, 2, 3, 0, 0, 0, 0, 0))

    @pytest.mark.parametrize("dlc", [-1, 9])
    def test_dlc_range(self, dlc):
        with pytest.raises(ValueError):
            CanFrameRecord(0.0, 1, dlc, (0,) * 8)

    def test_series_round_trip(self):
        frames = [CanFrameRecord(0.1 * i, 7, 8, tuple((i + j) % 256 for j in range(8))) for i in range(5)]
        fs = FrameSeries.from_frames(frames)
        assert len(fs) == 5
        assert list(fs) == frames
        assert fs[1:3] == FrameSeries.from_frames(frames[1:3])
        assert not fs.payload.flags.writeable

    def test_series_rejects_mixed_ids(self):
        frames = [CanFrameRecord(0.0, 7, 8, (0,) * 8), CanFrameRecord(0.1, 8, 8, (0,) * 8)]
        with pytest.raises(ValueError):
            FrameSeries.from_frames(frames)

    def test_series_validation(self):
        with pytest.raises(ValueError):
            FrameSeries(1, [0.0], [2], np.array([[1, 2, 3, 0, 0, 0, 0, 0]], dtype=np.uint8))
