"""Command-line entry point.

Exit codes: 0 success, 2 analysis finished but a pedal had no surviving
candidate, 1 error (a JSON object describing it is printed on stderr).
Set ``CANREV_LOG_LEVEL`` (e.g. ``INFO``) for progress output.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__, kernels, reports
from .correlation import DEFAULT_MIN_SAMPLES
from .discovery import ACCELERATOR, BRAKE, DiscoveryParams
from .frame_model import PreconditionError
from .imu_pipeline import DEFAULT_WINDOW, split_inertial_signals
from .pipeline import AnalysisParams, AnalysisResult, correlate_trip, discover
from .recording_io import (
    IMU_COLUMN,
    LABELS,
    ImuSeries,
    Recording,
    RecordingFormatError,
    RawLogError,
    file_digests,
    import_raw_log,
    load_recording,
    load_recording_set,
    read_imu_csv,
    write_recording,
    write_recording_set,
)
from .synth import LayoutError, default_layout, default_scenario, dump_config, generate_recording_set, load_config

log = logging.getLogger("canrev")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CANDIDATES = 2


class CliError(Exception):
    def __init__(self, kind: str, message: str, **extra):
        super().__init__(message)
        self.kind = kind
        self.extra = extra


def _formats(text: str) -> tuple[str, ...]:
    fmts = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in fmts if f not in ("csv", "json")]
    if bad or not fmts:
        raise argparse.ArgumentTypeError(f"formats must be csv and/or json, got {text!r}")
    return fmts


def _non_negative(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _add_imu_args(p):
    g = p.add_argument_group("IMU preprocessing")
    g.add_argument("--imu-column", default=IMU_COLUMN, help="IMU CSV column holding the longitudinal axis (default: %(default)s)")
    g.add_argument("--forward-positive", action="store_true", help="treat positive readings as forward acceleration (default: negative is forward)")
    g.add_argument("--smoothing-window", type=_non_negative, default=DEFAULT_WINDOW, help="centered moving-average width in seconds, 0 disables (default: %(default)s)")


def _add_correlation_args(p):
    g = p.add_argument_group("correlation")
    g.add_argument("--min-samples", type=int, default=DEFAULT_MIN_SAMPLES, help="minimum joined pairs per channel (default: %(default)s)")
    g.add_argument("--max-gap", type=_non_negative, default=None, help="drop joined pairs further apart than this many seconds")
    g.add_argument("--derivative", action="store_true", help="correlate successive channel differences instead of raw values")


def _add_discovery_args(p):
    g = p.add_argument_group("discovery")
    g.add_argument("--min-unique", type=int, default=1, help="drop channels with at most this many distinct calibration values (default: %(default)s)")
    g.add_argument("--calib-min-samples", type=int, default=30, help="minimum calibration samples per channel (default: %(default)s)")
    g.add_argument("--max-candidates", type=_positive_int, default=None, help="only examine the top N correlated channels")
    g.add_argument("--max-results", type=_positive_int, default=None, help="cap the number of selected channels")
    g.add_argument("--min-correlation", type=_non_negative, default=None, help="only examine channels with |r| at or above this")
    g.add_argument("--sample-stdev", action="store_true", help="use the sample (n-1) standard deviation of the derivative")


def _add_output_args(p):
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--format", dest="formats", type=_formats, default=("csv", "json"), help="csv, json or csv,json (default: both)")


def _params(args) -> AnalysisParams:
    disc = DiscoveryParams(
        min_unique=getattr(args, "min_unique", 1),
        min_samples=getattr(args, "calib_min_samples", 30),
        max_candidates=getattr(args, "max_candidates", None),
        max_results=getattr(args, "max_results", None),
        min_abs_correlation=getattr(args, "min_correlation", None),
        sample_stdev=getattr(args, "sample_stdev", False),
    )
    return AnalysisParams(
        smoothing_window=getattr(args, "smoothing_window", DEFAULT_WINDOW),
        forward_negative=not getattr(args, "forward_positive", False),
        min_samples=getattr(args, "min_samples", DEFAULT_MIN_SAMPLES),
        max_gap=getattr(args, "max_gap", None),
        derivative=getattr(args, "derivative", False),
        discovery=disc,
    )


def _load_set(path: Path, imu_column: str):
    if not path.is_dir():
        raise CliError("missing_recording", f"recording set directory not found: {path}", path=str(path))
    for label in LABELS:
        sub = path / label
        if not sub.is_dir() or not (sub / "can").is_dir() or not any((sub / "can").glob("*.csv")):
            raise CliError("missing_recording", f"{label} recording is missing or has no CAN data: {sub}", recording=label, path=str(sub))
    return load_recording_set(path, imu_column)


def _input_digests(root: Path) -> dict:
    files = [p for p in root.rglob("*.csv") if p.is_file()]
    return dict(file_digests(files, root))


def _write_manifest(out: Path, command: str, args, params: AnalysisParams | None, inputs: dict, outputs: list[Path], status: str, extra=None):
    doc = {
        "tool": "canrev",
        "version": __version__,
        "command": command,
        "backend": kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "parameters": asdict(params) if params is not None else {},
        "formats": list(getattr(args, "formats", ())),
        "inputs": inputs,
        "outputs": sorted(str(p.relative_to(out)) for p in outputs),
        "status": status,
    }
    if extra:
        doc.update(extra)
    reports.write_text(out / "manifest.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _write_analysis(result: AnalysisResult, out: Path, formats) -> list[Path]:
    written = []
    written += reports.write_correlation(result.acceleration, out, formats)
    written += reports.write_correlation(result.deceleration, out, formats)
    written += reports.write_discovery(result.accelerator, out, formats)
    written += reports.write_discovery(result.brake, out, formats)
    return written


def _selection_summary(*results) -> dict:
    return {"selected": {r.control: [row.name for row in r.selected] for r in results}}


def cmd_synth(args) -> int:
    if args.config:
        scenario, layout = load_config(args.config)
        if args.seed is not None:
            scenario = replace(scenario, seed=args.seed)
    else:
        scenario = default_scenario(args.seed or 0, args.duration, args.noise)
        layout = default_layout()
    rset = generate_recording_set(scenario, layout)
    write_recording_set(rset, args.out)
    reports.write_text(args.out / "ground_truth.json", dump_config(scenario, layout) + "\n")
    log.info("wrote synthetic recording set to %s", args.out)
    return EXIT_OK


def cmd_import(args) -> int:
    with open(args.log, encoding="utf-8") as fh:
        can = import_raw_log(fh, hex_values=args.hex, skip_malformed=args.skip_malformed)
    imu = read_imu_csv(args.imu, args.imu_column) if args.imu else ImuSeries([], [])
    write_recording(Recording(imu, can, args.label), args.out)
    log.info("imported %d frame ids into %s", len(can), args.out)
    return EXIT_OK


def _trip_dir(path: Path) -> Path:
    return path / "trip" if (path / "trip").is_dir() else path


def cmd_correlate(args) -> int:
    params = _params(args)
    src = _trip_dir(args.recording)
    trip = load_recording(src, "trip", args.imu_column)
    acc, dec = correlate_trip(trip, params)
    written = reports.write_correlation(acc, args.out, args.formats) + reports.write_correlation(dec, args.out, args.formats)
    _write_manifest(args.out, "correlate", args, params, _input_digests(src), written, "ok")
    return EXIT_OK


def _find_report(directory: Path, stem: str) -> Path:
    for suffix in (".json", ".csv"):
        p = directory / f"{stem}{suffix}"
        if p.is_file():
            return p
    raise CliError("missing_report", f"no {stem}.json or {stem}.csv in {directory}", path=str(directory))


def cmd_discover(args) -> int:
    params = _params(args)
    rset = _load_set(args.recording_set, args.imu_column)
    acc = reports.read_correlation(_find_report(args.correlation, reports.CORRELATION_FILES["acceleration"]))
    dec = reports.read_correlation(_find_report(args.correlation, reports.CORRELATION_FILES["deceleration"]))
    accel_res = discover(acc, rset.calib_accel, ACCELERATOR, params)
    brake_res = discover(dec, rset.calib_brake, BRAKE, params)
    written = reports.write_discovery(accel_res, args.out, args.formats) + reports.write_discovery(brake_res, args.out, args.formats)
    no_cand = accel_res.no_candidates or brake_res.no_candidates
    status = "no_candidates" if no_cand else "ok"
    _write_manifest(args.out, "discover", args, params, _input_digests(args.recording_set), written, status, _selection_summary(accel_res, brake_res))
    return EXIT_NO_CANDIDATES if no_cand else EXIT_OK


def cmd_pipeline(args) -> int:
    params = _params(args)
    rset = _load_set(args.recording_set, args.imu_column)
    acc, dec = correlate_trip(rset.trip, params)
    result = AnalysisResult(
        acc,
        dec,
        discover(acc, rset.calib_accel, ACCELERATOR, params),
        discover(dec, rset.calib_brake, BRAKE, params),
    )
    written = _write_analysis(result, args.out, args.formats)
    if args.figures:
        accel_sig, decel_sig = split_inertial_signals(rset.trip.imu, params.smoothing_window, params.forward_negative)
        fig_dir = args.out / "figures"
        written += reports.export_traces(result.accelerator, rset.calib_accel, rset.trip, accel_sig, fig_dir)
        written += reports.export_traces(result.brake, rset.calib_brake, rset.trip, decel_sig, fig_dir)
    status = "no_candidates" if result.no_candidates else "ok"
    _write_manifest(args.out, "pipeline", args, params, _input_digests(args.recording_set), written, status, _selection_summary(result.accelerator, result.brake))
    for res in (result.accelerator, result.brake):
        names = ", ".join(row.name for row in res.selected) or "none"
        print(f"{res.control}: {names}")
    return EXIT_NO_CANDIDATES if result.no_candidates else EXIT_OK


def cmd_report(args) -> int:
    shown = 0
    for kind, stem in reports.CORRELATION_FILES.items():
        path = args.results / f"{stem}.json"
        if path.is_file() or (args.results / f"{stem}.csv").is_file():
            ranked = reports.read_correlation(_find_report(args.results, stem))
            print(f"# {kind} correlation")
            print(reports.render_table(reports.correlation_records(ranked), reports.CORRELATION_COLUMNS[:3], args.top))
            shown += 1
    for control, stem in reports.DISCOVERY_FILES.items():
        path = args.results / f"{stem}.json"
        if path.is_file():
            doc = reports.read_discovery_json(path)
            rows = doc["rows"] if args.all_rows else [r for r in doc["rows"] if r["Selected"]]
            print(f"# {control} discovery")
            print(reports.render_table(rows, ["ID", "Channel", "Correlation", "Range", "Unique", "StDev(*)", "Smooth"], args.top))
            shown += 1
    if not shown:
        raise CliError("missing_report", f"no result files found in {args.results}", path=str(args.results))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="canrev", description="Find accelerator and brake pedal channels in CAN recordings.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic recording set with known pedal channels")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--config", type=Path, help="JSON scenario/layout file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--duration", type=float, default=None, help="trip length in seconds (default: 300-600 drawn from the seed)")
    p.add_argument("--noise", type=_non_negative, default=0.15, help="IMU noise sigma in m/s^2 (default: %(default)s)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("import", help="convert a raw 'timestamp id dlc bytes' log into a recording directory")
    p.add_argument("log", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--label", choices=LABELS, default="trip")
    p.add_argument("--hex", action="store_true", help="ID and data bytes are hexadecimal")
    p.add_argument("--skip-malformed", action="store_true", help="warn and skip bad lines instead of failing")
    p.add_argument("--imu", type=Path, help="IMU CSV to copy into the recording")
    p.add_argument("--imu-column", default=IMU_COLUMN)
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("correlate", help="rank trip channels against IMU acceleration and deceleration")
    p.add_argument("recording", type=Path, help="trip recording directory, or a recording set containing trip/")
    _add_imu_args(p)
    _add_correlation_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("discover", help="pick pedal channels from correlation reports and calibrations")
    p.add_argument("correlation", type=Path, help="directory holding the correlation reports")
    p.add_argument("recording_set", type=Path)
    p.add_argument("--imu-column", default=IMU_COLUMN)
    _add_discovery_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("pipeline", help="correlate and discover in one run")
    p.add_argument("recording_set", type=Path)
    _add_imu_args(p)
    _add_correlation_args(p)
    _add_discovery_args(p)
    _add_output_args(p)
    p.add_argument("--figures", action="store_true", help="export calibration and trip traces of selected channels")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="print result tables from an output directory")
    p.add_argument("results", type=Path)
    p.add_argument("--top", type=int, default=25)
    p.add_argument("--all-rows", action="store_true", help="show every discovery row, not just the selected ones")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CANREV_LOG_LEVEL", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        err = {"error": exc.kind, "message": str(exc), **exc.extra}
    except RecordingFormatError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "path": exc.path, "line": exc.line}
    except RawLogError as exc:
        err = {"error": "RawLogError", "message": str(exc), "line": exc.line}
    except (PreconditionError, LayoutError, ValueError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
