"""File formats: trace/sweep CSV, key-value config files, JSON and CSV output."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, FileIOError, SchemaError
from .spectroscopy import ComplexTrace
from .tuning import FieldSweepRecord
from .units import parse_quantity

TRACE_HEADER = ("freq_hz", "re", "im")
SWEEP_HEADER = ("b_tesla", "angle_rad", "f_r_hz", "q_i", "direction")


@dataclass(frozen=True)
class TracePoint:
    freq_hz: float
    s11: complex


def trace_from_points(points, power_at_sample=None) -> ComplexTrace:
    """Assemble ingested trace points into a :class:`ComplexTrace` (which
    enforces its own minimum length)."""
    return ComplexTrace(np.array([p.freq_hz for p in points]),
                        np.array([p.s11 for p in points]), power_at_sample)


# --- CSV ingest ------------------------------------------------------------

def _read_rows(path):
    try:
        with open(path, newline="") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise FileIOError(f"cannot read {path}: {exc}") from exc


def _check_header(found, expected):
    found = [h.strip() for h in found]
    if len(found) != len(expected):
        raise SchemaError(f"expected header {','.join(expected)}, got {','.join(found)}",
                          row=0)
    for col, (got, want) in enumerate(zip(found, expected)):
        if got != want:
            raise SchemaError(f"header column {col + 1} is {got!r}, expected {want!r}",
                              row=0, column=got)


def _number(text, row, column, optional=False):
    text = text.strip()
    if text == "" and optional:
        return None
    try:
        value = float(text)
    except ValueError:
        raise SchemaError(f"row {row}, column {column}: {text!r} is not a number",
                          row=row, column=column) from None
    if not math.isfinite(value):
        raise SchemaError(f"row {row}, column {column}: value is not finite",
                          row=row, column=column)
    return value


def ingest_csv(path, schema):
    """Read a ``trace`` or ``sweep`` CSV with strict validation.

    Rows are numbered from 1 after the header.  Malformed rows are rejected,
    never repaired.  Returns a list of :class:`TracePoint` or of
    :class:`FieldSweepRecord`.
    """
    if schema not in ("trace", "sweep"):
        raise SchemaError(f"unknown schema {schema!r}")
    rows = _read_rows(path)
    if not rows:
        raise SchemaError(f"{path} is empty", row=0)
    expected = TRACE_HEADER if schema == "trace" else SWEEP_HEADER
    _check_header(rows[0], expected)
    body = rows[1:]
    for i, r in enumerate(body, start=1):
        if len(r) != len(expected):
            raise SchemaError(f"row {i}: expected {len(expected)} fields, got {len(r)}", row=i)

    if schema == "trace":
        points = []
        for i, (fr, re_, im) in enumerate(body, start=1):
            fv = _number(fr, i, "freq_hz")
            if points and not fv > points[-1].freq_hz:
                raise SchemaError(f"row {i}: frequency not strictly increasing",
                                  row=i, column="freq_hz")
            points.append(TracePoint(fv, complex(_number(re_, i, "re"), _number(im, i, "im"))))
        return points

    records = []
    for i, (b, ang, fr, qi, direction) in enumerate(body, start=1):
        direction = direction.strip()
        if direction not in ("up", "down"):
            raise SchemaError(f"row {i}: direction must be 'up' or 'down'",
                              row=i, column="direction")
        bv = _number(b, i, "b_tesla")
        fv = _number(fr, i, "f_r_hz")
        if bv < 0 or fv <= 0:
            raise SchemaError(f"row {i}: field must be >= 0 and f_r > 0", row=i)
        records.append(FieldSweepRecord(bv, fv, _number(ang, i, "angle_rad", True),
                                        _number(qi, i, "q_i", True), direction))
    return records


# --- CSV / JSON output -------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_trace_csv(path, trace: ComplexTrace):
    write_csv(path, TRACE_HEADER,
              [(f, s.real, s.imag) for f, s in zip(trace.frequencies, trace.s11)])


def write_sweep_csv(path, records):
    write_csv(path, SWEEP_HEADER,
              [(r.field_magnitude, r.field_angle, r.f_r, r.Q_i, r.direction) for r in records])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps_json(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj))


# --- config files ----------------------------------------------------------

def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines; ``#`` starts a comment.  Duplicate keys and
    malformed lines are errors."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileIOError(f"cannot read {path}: {exc}") from exc
    return parse_config_text(text, str(path))


def typed_config(raw, schema):
    """Convert raw strings using ``schema = {key: (kind, default)}``.

    Unknown keys raise :class:`ConfigError`; missing keys take the default.
    Kinds are those of :mod:`ppres.units` plus ``"int"`` and ``"text"``.
    """
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    for key, (kind, default) in schema.items():
        if key not in raw:
            out[key] = default
            continue
        text = raw[key]
        if kind == "text":
            out[key] = text
        elif kind == "int":
            try:
                out[key] = int(text)
            except ValueError:
                raise ConfigError(f"{key}: {text!r} is not an integer") from None
        else:
            try:
                out[key] = parse_quantity(text, kind)
            except ConfigError as exc:
                raise ConfigError(f"{key}: {exc}") from None
    return out


DESIGN_FIELDS = {
    "capacitor_diameter": "length", "nanowire_length": "length",
    "nanowire_width": "length", "film_thickness": "length",
    "dielectric_thickness": "length", "dielectric_epsilon_r": "dimensionless",
    "sheet_kinetic_inductance": "sheet_inductance",
}
CIRCUIT_FIELDS = {"f_r": "frequency", "L": "inductance", "L_k": "inductance",
                  "Z": "impedance", "delta_I": "current"}


def dump_record(obj, fields):
    """Serialize a dataclass record to config text (SI units, exact floats)."""
    from .units import format_quantity
    lines = []
    for name, kind in fields.items():
        value = getattr(obj, name)
        text = repr(float(value)) if kind == "dimensionless" else format_quantity(value, kind)
        lines.append(f"{name} = {text}")
    return "\n".join(lines) + "\n"


def load_record(cls, text, fields):
    raw = parse_config_text(text)
    missing = sorted(set(fields) - set(raw))
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    typed = typed_config(raw, {k: (kind, None) for k, kind in fields.items()})
    return cls(**typed)
