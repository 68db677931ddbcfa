"""CSV/JSON report files and plain-text table rendering.

Correlation reports carry ``ID, Channel, Correlation, N``; discovery reports
add ``Range, Unique, StDev(*), Smooth, Ratio, Selected, Status``. ``Channel``
is the channel name without its ID prefix, e.g. ``msb_sixteen_bit_0``.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable

from . import kernels
from .correlation import CorrelationResult, Exclusion, RankedCorrelations
from .discovery import DiscoveryResult
from .frame_model import channel_suffix, parse_channel_name
from .tokenization import decode_matrix, dedupe_last

CORRELATION_COLUMNS = ["ID", "Channel", "Correlation", "N"]
DISCOVERY_COLUMNS = ["ID", "Channel", "Correlation", "Range", "Unique", "StDev(*)", "Smooth", "Ratio", "Selected", "Status"]
CORRELATION_FILES = {"acceleration": "acceleration_correlation", "deceleration": "deceleration_correlation"}
DISCOVERY_FILES = {"accelerator": "accelerator_discovery", "brake": "brake_discovery"}


def _r(x: float) -> str:
    return f"{x:.8f}"


def correlation_records(ranked: RankedCorrelations) -> list[dict]:
    return [
        {"ID": c.spec.arbitration_id, "Channel": channel_suffix(c.spec), "Correlation": c.r, "N": c.n}
        for c in ranked.results
    ]


def discovery_records(result: DiscoveryResult) -> list[dict]:
    out = []
    for row in result.rows:
        s = row.stats
        out.append(
            {
                "ID": row.spec.arbitration_id,
                "Channel": channel_suffix(row.spec),
                "Correlation": row.r,
                "Range": None if s is None else s.range,
                "Unique": None if s is None else s.unique_count,
                "StDev(*)": None if s is None else s.stdev_deriv,
                "Smooth": None if s is None else s.smooth,
                "Ratio": None if s is None else s.ratio,
                "Selected": row.selected,
                "Status": row.status,
            }
        )
    return out


def _csv_cell(key: str, value) -> str:
    if value is None:
        return ""
    if key == "Correlation":
        # full precision so a reloaded report ranks exactly like the original
        return repr(float(value))
    if key in ("StDev(*)", "Ratio"):
        return f"{value:.6f}"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_csv(records: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_csv_cell(col, rec[col]) for col in columns])
    return buf.getvalue()


def correlation_json(ranked: RankedCorrelations) -> str:
    doc = {
        "kind": ranked.kind,
        "columns": CORRELATION_COLUMNS,
        "rows": correlation_records(ranked),
        "excluded": [
            {"ID": e.spec.arbitration_id, "Channel": channel_suffix(e.spec), "Reason": e.reason, "N": e.n}
            for e in ranked.excluded
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def discovery_json(result: DiscoveryResult) -> str:
    doc = {
        "control": result.control,
        "columns": DISCOVERY_COLUMNS,
        "rows": discovery_records(result),
        "selected": [row.name for row in result.selected],
        "status_counts": dict(sorted(result.reasons().items())),
    }
    return json.dumps(doc, indent=1) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def write_correlation(ranked: RankedCorrelations, out_dir, formats: Iterable[str] = ("csv", "json")) -> list[Path]:
    stem = Path(out_dir) / CORRELATION_FILES[ranked.kind]
    written = []
    if "csv" in formats:
        written.append(write_text(stem.with_suffix(".csv"), render_csv(correlation_records(ranked), CORRELATION_COLUMNS)))
    if "json" in formats:
        written.append(write_text(stem.with_suffix(".json"), correlation_json(ranked)))
    return written


def write_discovery(result: DiscoveryResult, out_dir, formats: Iterable[str] = ("csv", "json")) -> list[Path]:
    stem = Path(out_dir) / DISCOVERY_FILES[result.control]
    written = []
    if "csv" in formats:
        written.append(write_text(stem.with_suffix(".csv"), render_csv(discovery_records(result), DISCOVERY_COLUMNS)))
    if "json" in formats:
        written.append(write_text(stem.with_suffix(".json"), discovery_json(result)))
    return written


def _spec_of(ident, channel: str):
    return parse_channel_name(f"{int(ident)}_{channel}")


def read_correlation(path) -> RankedCorrelations:
    """Load a correlation report written by :func:`write_correlation` (CSV or JSON)."""
    path = Path(path)
    kind = next((k for k, stem in CORRELATION_FILES.items() if path.stem == stem), None)
    if path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        kind = doc.get("kind", kind)
        rows = doc["rows"]
        excluded = [
            Exclusion(_spec_of(e["ID"], e["Channel"]), f"{e['ID']}_{e['Channel']}", kind, e["Reason"], e.get("N", 0))
            for e in doc.get("excluded", [])
        ]
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CORRELATION_COLUMNS:
                raise ValueError(f"{path}: expected columns {CORRELATION_COLUMNS}, got {reader.fieldnames}")
            rows = list(reader)
        excluded = []
    if kind is None:
        raise ValueError(f"{path}: cannot tell whether this is the acceleration or deceleration report")
    results = []
    for row in rows:
        spec = _spec_of(row["ID"], row["Channel"])
        results.append(CorrelationResult(spec, f"{spec.arbitration_id}_{row['Channel']}", kind, float(row["Correlation"]), int(row["N"])))
    return RankedCorrelations(kind, results, excluded)


def read_discovery_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def render_table(records: list[dict], columns: list[str], limit: int | None = None) -> str:
    """Pipe-separated rows, e.g. ``211 | msb_sixteen_bit_0 | 0.87761497``."""
    lines = [" | ".join(columns)]
    for rec in records[:limit]:
        lines.append(" | ".join(_display(col, rec.get(col)) for col in columns))
    return "\n".join(lines) + "\n"


def _display(col: str, value) -> str:
    if value is None:
        return "-"
    if col == "Correlation":
        return _r(float(value))
    if col == "StDev(*)":
        return str(int(round(float(value))))
    if col == "Ratio":
        return f"{float(value):.4f}"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def export_traces(result: DiscoveryResult, calibration, trip, signal, out_dir) -> list[Path]:
    """Per-selected-channel calibration and trip traces as plain CSV columns."""
    out_dir = Path(out_dir) / result.control
    written = []
    for row in result.selected:
        for label, rec in (("calibration", calibration), ("trip", trip)):
            frames = rec.can.get(row.spec.arbitration_id)
            if frames is None or len(frames) == 0:
                continue
            keep = dedupe_last(frames.timestamps)
            ts = frames.timestamps[keep]
            vals = decode_matrix(frames, [row.spec])[0, keep]
            header = ["Time Stamp (seconds)", "Value"]
            columns = [ts.tolist(), vals.tolist()]
            if label == "trip":
                nearest = kernels.nearest_indices(ts, signal.timestamps)
                header.append(f"{signal.kind.capitalize()} (m/s^2)")
                columns.append(signal.magnitudes[nearest].tolist())
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(header)
            for values in zip(*columns):
                writer.writerow([repr(v) if isinstance(v, float) else str(v) for v in values])
            written.append(write_text(out_dir / f"{row.name}.{label}.csv", buf.getvalue()))
    return written
