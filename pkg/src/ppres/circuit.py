"""Lumped-element model of the parallel-plate resonator.

The resonator is treated as an LC circuit. Its inductance ``L``, current
zero-point fluctuation ``delta_I``, impedance ``Z`` and frequency ``f_r`` are
tied together by

    L = hbar * w_r / (2 * delta_I**2),    Z = w_r * L,    w_r = 2 pi f_r

so any two of them fix the rest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import hbar
from .errors import DomainError, InvalidGeometryError


def _positive(name, value):
    if not (value > 0) or not math.isfinite(value):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class DeviceDesign:
    """Geometry and material record of a parallel-plate resonator (SI units)."""

    capacitor_diameter: float
    nanowire_length: float
    nanowire_width: float
    film_thickness: float
    dielectric_thickness: float
    dielectric_epsilon_r: float
    sheet_kinetic_inductance: float

    def __post_init__(self):
        for name in ("capacitor_diameter", "nanowire_length", "nanowire_width",
                     "film_thickness", "dielectric_thickness"):
            value = getattr(self, name)
            if not (value > 0):
                raise InvalidGeometryError(f"{name} must be > 0, got {value!r}")
        if self.nanowire_width > self.capacitor_diameter:
            raise InvalidGeometryError("nanowire_width exceeds capacitor_diameter")
        if not (self.dielectric_epsilon_r >= 1):
            raise InvalidGeometryError("dielectric_epsilon_r must be >= 1")
        if not (self.sheet_kinetic_inductance >= 0):
            raise InvalidGeometryError("sheet_kinetic_inductance must be >= 0")


@dataclass(frozen=True)
class CircuitParams:
    f_r: float
    L: float
    L_k: float
    Z: float
    delta_I: float

    def __post_init__(self):
        for name in ("f_r", "L", "L_k", "Z", "delta_I"):
            _positive(name, getattr(self, name))

    @property
    def omega_r(self):
        return 2 * math.pi * self.f_r

    @classmethod
    def from_pair(cls, *, L_k, f_r=None, L=None, delta_I=None, Z=None):
        """Build a consistent parameter set from exactly two of
        ``f_r``, ``L``, ``delta_I`` and ``Z``."""
        given = {k: v for k, v in dict(f_r=f_r, L=L, delta_I=delta_I, Z=Z).items()
                 if v is not None}
        if len(given) != 2:
            raise DomainError(
                f"exactly two of f_r, L, delta_I, Z are required, got {sorted(given)}")
        for k, v in given.items():
            _positive(k, v)

        if f_r is None:
            if L is not None and delta_I is not None:
                omega = 2 * L * delta_I**2 / hbar
            elif L is not None:
                omega = Z / L
            else:
                omega = math.sqrt(2 * Z * delta_I**2 / hbar)
            f_r = omega / (2 * math.pi)
        if L is None:
            if delta_I is not None:
                L = hbar * 2 * math.pi * f_r / (2 * delta_I**2)
            else:
                L = Z / (2 * math.pi * f_r)
        if delta_I is None:
            delta_I = current_zpf(L, f_r)
        if Z is None:
            Z = impedance(f_r, delta_I)
        return cls(f_r=f_r, L=L, L_k=L_k, Z=Z, delta_I=delta_I)


@dataclass(frozen=True)
class QualityFactors:
    Q_i: float
    Q_c: float
    Q_total: float
    kappa: float
    kappa_c: float
    kappa_i: float


def kinetic_inductance(design: DeviceDesign) -> float:
    """Kinetic inductance of the nanowire, ``L_k,sq * l / w``."""
    w, l = design.nanowire_width, design.nanowire_length
    if not (w > 0) or not (l > 0):
        raise InvalidGeometryError("nanowire length and width must be > 0")
    return design.sheet_kinetic_inductance * l / w


def current_zpf(L: float, f_r: float) -> float:
    """Current zero-point fluctuation amplitude of an LC mode, in amperes."""
    _positive("L", L)
    _positive("f_r", f_r)
    return math.sqrt(hbar * 2 * math.pi * f_r / (2 * L))


def impedance(f_r: float, delta_I: float) -> float:
    """Mode impedance ``(hbar/2) (w_r/delta_I)**2``, in ohms."""
    _positive("f_r", f_r)
    _positive("delta_I", delta_I)
    omega = 2 * math.pi * f_r
    return hbar / 2 * (omega / delta_I) ** 2


def galvanic_coupling_q(Z: float, line_impedance: float = 50.0) -> float:
    """Coupling Q of a resonator wired directly to a transmission line.

    Uses ``Q_c = line_impedance / Z``: the impedance mismatch sets the
    external damping, and a matched resonator has ``Q_c = 1``.
    """
    _positive("Z", Z)
    _positive("line_impedance", line_impedance)
    return line_impedance / Z


def filter_coupling_kappa(g_bus: float, delta_box: float, kappa_box: float) -> float:
    """Effective decay rate through a lossy intermediate (box) mode.

    Standard two-mode Purcell-filter result
    ``kappa_box * g_bus**2 / (delta_box**2 + (kappa_box/2)**2)``.
    All rates angular (rad/s).
    """
    if not (kappa_box > 0):
        raise DomainError(f"kappa_box must be > 0, got {kappa_box!r}")
    return kappa_box * g_bus**2 / (delta_box**2 + (kappa_box / 2) ** 2)


def quality_factors(Q_i: float, Q_c: float, f_r: float) -> QualityFactors:
    """Combine intrinsic and coupling Q; ``Q_c = inf`` means an uncoupled port."""
    _positive("Q_i", Q_i)
    _positive("f_r", f_r)
    if not (Q_c > 0):
        raise DomainError(f"Q_c must be > 0, got {Q_c!r}")
    omega = 2 * math.pi * f_r
    kappa_i = omega / Q_i
    kappa_c = omega / Q_c
    Q_total = 1.0 / (1.0 / Q_i + 1.0 / Q_c)
    return QualityFactors(Q_i=Q_i, Q_c=Q_c, Q_total=Q_total,
                          kappa=omega / Q_total, kappa_c=kappa_c, kappa_i=kappa_i)
