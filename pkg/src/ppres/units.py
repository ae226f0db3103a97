"""Strict parsing of unit-suffixed scalars such as ``300nm`` or ``7.5GHz``."""
from __future__ import annotations

import math
import re

from .errors import ConfigError

PREFIXES = {
    "f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3,
    "": 1.0, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12,
}

#: accepted unit symbols for each quantity kind
KINDS = {
    "length": ("m",),
    "frequency": ("Hz",),
    "inductance": ("H",),
    "sheet_inductance": ("H/sq",),
    "current": ("A",),
    "impedance": ("Ohm",),
    "field": ("T",),
    "time": ("s",),
    "rate": ("/s",),
    "angular_rate": ("rad/s",),
    "power": ("W",),
    "dbm": ("dBm",),
    "temperature": ("K",),
    "angle": ("rad",),
    "dimensionless": ("",),
}

#: canonical unit string written next to values of each kind
CANONICAL = {k: v[0] for k, v in KINDS.items()}
CANONICAL["dimensionless"] = "1"

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_TOKEN = re.compile(rf"^\s*({_NUMBER})\s*([^\s\d.+-][^\s]*)?\s*$")


def parse_quantity(text: str, kind: str) -> float:
    """Parse ``text`` as a quantity of ``kind`` and return its SI value.

    The unit suffix is mandatory for dimensional kinds and must match one of
    the kind's symbols exactly, optionally preceded by an SI prefix.  No
    spaces inside the number, no thousands separators.

    >>> parse_quantity("300nm", "length")
    3e-07
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown quantity kind {kind!r}")
    m = _TOKEN.match(str(text))
    if not m:
        raise ConfigError(f"cannot parse {text!r} as a {kind}")
    value = float(m.group(1))
    suffix = m.group(2) or ""
    if kind == "dimensionless":
        if suffix:
            raise ConfigError(f"{text!r}: dimensionless value takes no unit")
        return value
    if kind == "dbm":
        if suffix != "dBm":
            raise ConfigError(f"{text!r}: expected unit dBm")
        return value
    for unit in KINDS[kind]:
        if suffix.endswith(unit):
            prefix = suffix[: len(suffix) - len(unit)]
            if prefix in PREFIXES:
                out = value * PREFIXES[prefix]
                if not math.isfinite(out):
                    raise ConfigError(f"{text!r} is not finite")
                return out
    raise ConfigError(f"{text!r}: expected a {kind} with unit {KINDS[kind][0]!r}")


def format_quantity(value: float, kind: str) -> str:
    """Inverse of :func:`parse_quantity` in SI base units (round-trip exact)."""
    unit = KINDS[kind][0]
    return f"{value!r}{unit}"


def unit_of(kind: str) -> str:
    return CANONICAL[kind]
