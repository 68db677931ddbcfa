import logging

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from canrev.frame_model import CanFrameRecord, FrameSeries
from canrev.recording_io import (
    CAN_HEADER,
    ByteRangeError,
    DlcRangeError,
    HeaderError,
    ImuRecord,
    ImuSeries,
    MissingRecordingError,
    NonNumericError,
    PaddingError,
    RawLogError,
    Recording,
    RecordingFormatError,
    RecordingSet,
    TimeOrderError,
    import_raw_log,
    load_recording,
    load_recording_set,
    read_can_csv,
    read_imu_csv,
    write_recording,
    write_recording_set,
)

IMU_TEXT = "Time Stamp (seconds),Linear Y\n0,0.886614\n0.0200396,0.974758\n"
CAN_HEAD = ",".join(CAN_HEADER) + "\n"


def make_recording_dir(root, imu=IMU_TEXT, can=None):
    (root / "can").mkdir(parents=True)
    (root / "imu.csv").write_text(imu)
    for ident, text in (can or {}).items():
        (root / "can" / f"{ident}.csv").write_text(text)
    return root


class TestLoad:
    def test_sample_rows(self, tmp_path):
        d = make_recording_dir(tmp_path, can={272: CAN_HEAD + "0.00338745,0,10,173,0,0,19,0,80,8\n"})
        rec = load_recording(d, "trip")
        assert list(rec.imu) == [ImuRecord(0.0, 0.886614), ImuRecord(0.0200396, 0.974758)]
        assert rec.can[272][0] == CanFrameRecord(0.00338745, 272, 8, (0, 10, 173, 0, 0, 19, 0, 80))

    def test_empty_can_dir(self, tmp_path):
        rec = load_recording(make_recording_dir(tmp_path), "calib_accel")
        assert rec.can == {}
        assert rec.label == "calib_accel"

    def test_extra_imu_columns(self, tmp_path):
        p = tmp_path / "imu.csv"
        p.write_text("Time Stamp (seconds),Linear Y,Linear X,Gyro Z\n0.5,1.5,9,9\n")
        assert list(read_imu_csv(p)) == [ImuRecord(0.5, 1.5)]

    def test_alternate_column(self, tmp_path):
        p = tmp_path / "imu.csv"
        p.write_text("Time Stamp (seconds),Linear Y,Linear X\n0.5,1.5,-2\n")
        assert read_imu_csv(p, "Linear X").linear_y.tolist() == [-2.0]

    def test_missing_directory(self, tmp_path):
        with pytest.raises(MissingRecordingError):
            load_recording(tmp_path / "nope")

    def test_missing_imu(self, tmp_path):
        (tmp_path / "can").mkdir()
        with pytest.raises(MissingRecordingError):
            load_recording(tmp_path)

    def test_bad_can_file_name(self, tmp_path):
        d = make_recording_dir(tmp_path, can={"x12": CAN_HEAD})
        with pytest.raises(RecordingFormatError):
            load_recording(d)


class TestParseErrors:
    @pytest.mark.parametrize(
        "body, err",
        [
            ("0.1,0,0,0,0,0,0,0,0\n", HeaderError),
            ("abc,0,0,0,0,0,0,0,0,8\n", NonNumericError),
            ("0.1,0,0,0,0,0,0,0,x,8\n", NonNumericError),
            ("0.1,0,0,256,0,0,0,0,0,8\n", ByteRangeError),
            ("0.1,0,0,0,0,0,0,0,0,9\n", DlcRangeError),
            ("0.1,1,2,3,0,0,0,0,0,2\n", PaddingError),
            ("0.2,0,0,0,0,0,0,0,0,8\n0.1,0,0,0,0,0,0,0,0,8\n", TimeOrderError),
            ("nan,0,0,0,0,0,0,0,0,8\n", NonNumericError),
        ],
    )
    def test_can_errors(self, tmp_path, body, err):
        p = tmp_path / "1.csv"
        p.write_text(CAN_HEAD + body)
        with pytest.raises(err) as info:
            read_can_csv(p, 1)
        assert info.value.line is not None and info.value.line >= 2
        assert str(p) in str(info.value)

    def test_can_header(self, tmp_path):
        p = tmp_path / "1.csv"
        p.write_text("Time,Byte 0\n")
        with pytest.raises(HeaderError):
            read_can_csv(p, 1)

    @pytest.mark.parametrize(
        "text",
        ["Time,Linear Y\n0,1\n", "Time Stamp (seconds),Linear X\n0,1\n", ""],
    )
    def test_imu_header(self, tmp_path, text):
        p = tmp_path / "imu.csv"
        p.write_text(text)
        with pytest.raises(HeaderError):
            read_imu_csv(p)

    def test_imu_time_order(self, tmp_path):
        p = tmp_path / "imu.csv"
        p.write_text("Time Stamp (seconds),Linear Y\n1,0\n0.5,0\n")
        with pytest.raises(TimeOrderError):
            read_imu_csv(p)

    @given(st.text(alphabet="0123456789.,-xe\n ", max_size=80))
    @settings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=150)
    def test_fuzz_never_crashes(self, tmp_path, body):
        p = tmp_path / "1.csv"
        p.write_text(CAN_HEAD + body)
        try:
            read_can_csv(p, 1)
        except RecordingFormatError as exc:
            assert exc.line is not None


def random_recording(rng, label="trip"):
    n_imu = int(rng.integers(0, 30))
    imu = ImuSeries(np.sort(rng.uniform(0, 100, n_imu)), rng.normal(0, 3, n_imu))
    can = {}
    for ident in rng.choice(2**11, size=int(rng.integers(0, 4)), replace=False):
        n = int(rng.integers(1, 20))
        dlc = rng.integers(0, 9, n)
        payload = rng.integers(0, 256, (n, 8)).astype(np.uint8)
        payload[np.arange(8)[None, :] >= dlc[:, None]] = 0
        can[int(ident)] = FrameSeries(int(ident), np.sort(rng.uniform(0, 100, n)), dlc, payload)
    return Recording(imu, can, label)


class TestRoundTrip:
    def test_single_frame(self, tmp_path):
        rec = Recording(ImuSeries([0.0], [1.0]), {5: [CanFrameRecord(0.1, 5, 8, (1, 2, 3, 4, 5, 6, 7, 8))]})
        write_recording(rec, tmp_path)
        assert load_recording(tmp_path) == rec

    def test_short_dlc_written_padded(self, tmp_path):
        rec = Recording(ImuSeries([], []), {5: [CanFrameRecord(0.1, 5, 3, (1, 2, 3, 0, 0, 0, 0, 0))]})
        write_recording(rec, tmp_path)
        assert (tmp_path / "can" / "5.csv").read_text().splitlines()[1] == "0.1,1,2,3,0,0,0,0,0,3"

    def test_random_recordings(self, tmp_path):
        rng = np.random.default_rng(3)
        for i in range(100):
            rec = random_recording(rng)
            write_recording(rec, tmp_path / str(i))
            assert load_recording(tmp_path / str(i)) == rec

    def test_rewrite_drops_stale_ids(self, tmp_path):
        rng = np.random.default_rng(4)
        write_recording(Recording(ImuSeries([], []), {1: FrameSeries(1, [0.0], [1], [[1, 0, 0, 0, 0, 0, 0, 0]])}), tmp_path)
        rec = random_recording(rng)
        write_recording(rec, tmp_path)
        assert load_recording(tmp_path) == rec

    def test_recording_set(self, tmp_path, short_set):
        write_recording_set(short_set, tmp_path)
        assert load_recording_set(tmp_path) == short_set

    def test_label_slots(self):
        rec = Recording(ImuSeries([], []), {}, "trip")
        with pytest.raises(ValueError):
            RecordingSet(rec, rec, rec)


class TestRawLog:
    def test_sample_line(self):
        can = import_raw_log(["0.01 272 8 0 10 173 0 0 19 0 80"])
        assert list(can) == [272]
        assert can[272][0] == CanFrameRecord(0.01, 272, 8, (0, 10, 173, 0, 0, 19, 0, 80))

    def test_empty(self):
        assert import_raw_log([]) == {}

    def test_hex(self):
        can = import_raw_log(["1.5 1a0 2 ff 0a"], hex_values=True)
        assert can[0x1A0][0].payload == (255, 10, 0, 0, 0, 0, 0, 0)

    def test_padding_normalized(self, caplog):
        with caplog.at_level(logging.WARNING, logger="canrev"):
            can = import_raw_log(["0.0 7 2 1 2 3 4 5 6 7 8"])
        assert can[7][0].payload == (1, 2, 0, 0, 0, 0, 0, 0)
        assert "beyond dlc" in caplog.text

    def test_comments_and_grouping(self):
        lines = ["# header", "", "0.0 1 1 5", "0.1 2 1 6", "0.2 1 1 7"]
        can = import_raw_log(lines)
        assert [f.payload[0] for f in can[1]] == [5, 7]
        assert len(can[2]) == 1

    @pytest.mark.parametrize(
        "line",
        ["0.0 1", "x 1 1 5", "0.0 1 9 0 0 0 0 0 0 0 0 0", "0.0 1 2 5", "0.0 1 1 300", "-1 1 1 5"],
    )
    def test_malformed(self, line):
        with pytest.raises(RawLogError) as info:
            import_raw_log(["0.0 1 1 5", line])
        assert info.value.line == 2

    def test_skip_malformed(self):
        can = import_raw_log(["0.0 1 1 5", "junk", "0.1 1 1 6"], skip_malformed=True)
        assert len(can[1]) == 2

    def test_decreasing_time(self):
        with pytest.raises(RawLogError, match="precedes"):
            import_raw_log(["0.2 1 1 5", "0.1 1 1 5"])
