"""Two-dimensional magnetostatic model of the nanowire cross-section.

The nanowire (width ``w``, thickness ``t``) sits on the substrate (``y < 0``)
under a dielectric of thickness ``d`` and a superconducting counter-electrode
whose surface is the plane ``y = t + d``.  The counter-electrode carries an
image current of opposite sign, mirrored about that plane.  Both conductors
are collapsed to zero-thickness sheets of uniform surface current:

* nanowire sheet at ``y = t/2`` carrying ``+delta_I``
* image sheet at ``y = 2 (t + d) - t/2`` carrying ``-delta_I``

Each sheet has a closed-form field (Biot-Savart integrated over the strip
width), so the model needs no mesh.  Current flows along ``+z``.

The ideal sheet field diverges logarithmically at the strip edges.  Grid
points within a guard distance of either sheet are excluded, and the peak
field used for the mode volume is taken over the spin host region (the
substrate, ``y <= 0``, by default), where the maximum sits just below the
nanowire corners and is grid-converged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import c as speed_of_light
from .constants import G_ER_CAWO4, G_FREE_ELECTRON, h, mu0, muB_over_h
from .errors import DegenerateError, DomainError, EmptyWindowError, GuardZoneError

DEFAULT_GUARD = 5e-9
DEFAULT_SPACING = 5e-9


@dataclass(frozen=True)
class CrossSection:
    w: float
    t: float
    d: float
    delta_I: float
    image: bool = True

    def __post_init__(self):
        for name in ("w", "t", "d", "delta_I"):
            if not (getattr(self, name) > 0):
                raise DomainError(f"{name} must be > 0")

    @property
    def wire_height(self):
        return self.t / 2

    @property
    def image_height(self):
        return 2 * (self.t + self.d) - self.t / 2

    @property
    def counter_electrode_surface(self):
        return self.t + self.d

    def sheets(self):
        """(height, current) of every current sheet in the model."""
        out = [(self.wire_height, self.delta_I)]
        if self.image:
            out.append((self.image_height, -self.delta_I))
        return out


@dataclass(frozen=True)
class SpinSpecies:
    name: str
    g_factor: float
    nonradiative_rate: float = 0.0
    quantization_axis: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not (self.g_factor > 0):
            raise DomainError("g_factor must be > 0")
        n = float(np.linalg.norm(self.quantization_axis))
        if abs(n - 1) > 1e-9:
            raise DomainError("quantization_axis must be a unit vector")

    @property
    def gyro_ratio(self):
        """Gyromagnetic ratio in Hz/T."""
        return self.g_factor * muB_over_h


FREE_ELECTRON = SpinSpecies("free electron", G_FREE_ELECTRON, 1e-3)
ER_CAWO4 = SpinSpecies("Er3+:CaWO4", G_ER_CAWO4, 1.0)


def sheet_field(x, y, height, width, current):
    """Field of a uniform current sheet ``|x| <= width/2`` at ``y = height``.

    Vectorized over ``x`` and ``y``.  Returns ``(Bx, By)`` in tesla.
    """
    x = np.asarray(x, dtype=float)
    dy = np.asarray(y, dtype=float) - height
    half = width / 2
    k = mu0 * current / width
    # angle subtended by the strip, signed like dy; atan2 keeps it continuous
    # across dy = 0 outside the strip
    theta = np.arctan2(width * dy, dy * dy + x * x - half * half)
    bx = -k / (2 * np.pi) * theta
    by = k / (4 * np.pi) * np.log(((x + half) ** 2 + dy * dy) / ((x - half) ** 2 + dy * dy))
    return bx, by


def _sheet_distance(section, x, y, height):
    dx = np.maximum(np.abs(x) - section.w / 2, 0.0)
    return np.hypot(dx, y - height)


def _field_unchecked(section, x, y):
    bx = np.zeros(np.shape(x))
    by = np.zeros(np.shape(x))
    for height, current in section.sheets():
        sx, sy = sheet_field(x, y, height, section.w, current)
        bx = bx + sx
        by = by + sy
    return bx, by


def delta_b(section: CrossSection, point, guard: float = DEFAULT_GUARD) -> np.ndarray:
    """Magnetic field ZPF ``(Bx, By)`` at ``point = (x, y)``, in tesla."""
    x, y = float(point[0]), float(point[1])
    for height, _ in section.sheets():
        if _sheet_distance(section, x, y, height) < guard:
            raise GuardZoneError(
                f"point ({x:g}, {y:g}) lies within {guard:g} m of a current sheet")
    bx, by = _field_unchecked(section, x, y)
    return np.array([float(bx), float(by)])


@dataclass(frozen=True)
class FieldMap:
    """Sampled field on a rectilinear grid; excluded points hold NaN."""

    xs: np.ndarray
    ys: np.ndarray
    bx: np.ndarray
    by: np.ndarray
    excluded: np.ndarray
    spacing: float
    B_max: float = field(init=False)

    def __post_init__(self):
        mag = self.magnitude
        stored = mag[~self.excluded]
        object.__setattr__(self, "B_max", float(stored.max()) if stored.size else 0.0)

    @property
    def magnitude(self):
        return np.hypot(self.bx, self.by)

    def argmax(self):
        mag = np.where(self.excluded, -np.inf, self.magnitude)
        iy, ix = np.unravel_index(np.argmax(mag), mag.shape)
        return float(self.xs[ix]), float(self.ys[iy])

    def rows(self):
        """Yield ``(x, y, Bx, By, |B|)`` for every stored point, row-major."""
        mag = self.magnitude
        for iy, yv in enumerate(self.ys):
            for ix, xv in enumerate(self.xs):
                if not self.excluded[iy, ix]:
                    yield (float(xv), float(yv), float(self.bx[iy, ix]),
                           float(self.by[iy, ix]), float(mag[iy, ix]))


def default_window(section: CrossSection):
    return (-1e-6, 1e-6, -0.5e-6, section.t + section.d)


def _axis(lo, hi, spacing):
    # integer multiples of the spacing keep symmetric windows exactly symmetric
    i0 = math.ceil(lo / spacing - 1e-9)
    i1 = math.floor(hi / spacing + 1e-9)
    return spacing * np.arange(i0, i1 + 1, dtype=float)


def field_map(section: CrossSection, window=None, spacing: float = DEFAULT_SPACING,
              guard: float = DEFAULT_GUARD, host: str = "substrate") -> FieldMap:
    """Evaluate the field on a grid.

    ``window`` is ``(x_min, x_max, y_min, y_max)``.  Points inside a conductor,
    within ``guard`` of a current sheet, or (for ``host="substrate"``) above
    the substrate surface are excluded.  ``host="all"`` keeps the dielectric
    gap as well.
    """
    if not (spacing > 0):
        raise DomainError("spacing must be > 0")
    if host not in ("substrate", "all"):
        raise DomainError(f"unknown host region {host!r}")
    x0, x1, y0, y1 = default_window(section) if window is None else window
    if not all(math.isfinite(v) for v in (x0, x1, y0, y1)):
        raise EmptyWindowError("window must be finite")
    xs = _axis(x0, x1, spacing)
    ys = _axis(y0, y1, spacing)
    if xs.size == 0 or ys.size == 0:
        raise EmptyWindowError(f"window {window!r} contains no grid points")
    X, Y = np.meshgrid(xs, ys)

    # the film occupies 0 < y <= t; the y = 0 interface belongs to the substrate
    excluded = (np.abs(X) <= section.w / 2) & (Y > 0) & (Y <= section.t)
    excluded |= Y >= section.counter_electrode_surface
    for height, _ in section.sheets():
        excluded |= _sheet_distance(section, X, Y, height) < guard
    if host == "substrate":
        excluded |= Y > 0

    with np.errstate(divide="ignore", invalid="ignore"):
        bx, by = _field_unchecked(section, X, Y)
    bx = np.where(excluded, np.nan, bx)
    by = np.where(excluded, np.nan, by)
    return FieldMap(xs=xs, ys=ys, bx=bx, by=by, excluded=excluded, spacing=spacing)


def g0_at(section: CrossSection, point, spin: SpinSpecies,
          b0_direction=(0.0, 0.0, 1.0), guard: float = DEFAULT_GUARD) -> float:
    """Spin-resonator coupling ``g0/2pi`` in Hz.

    Half the field ZPF perpendicular to the static field direction, times the
    gyromagnetic ratio.  The default static field runs along the wire, so the
    whole in-plane ZPF counts.
    """
    n = np.asarray(b0_direction, dtype=float)
    norm = np.linalg.norm(n)
    if abs(norm - 1) > 1e-9:
        raise DomainError("b0_direction must be a unit vector")
    bx, by = delta_b(section, point, guard)
    b = np.array([bx, by, 0.0])
    perp = b - np.dot(b, n) * n
    return 0.5 * float(np.linalg.norm(perp)) * spin.gyro_ratio


@dataclass(frozen=True)
class ModeMetrics:
    V_star: float
    V_star_over_lambda3: float
    wavelength: float
    B_max: float
    F_P_max: float = float("nan")


def mode_volume_from_peak(B_max: float, f_r: float, Q: float = None) -> ModeMetrics:
    """Modified mode volume: inductive vacuum energy ``h f_r / 4`` divided by
    the peak magnetic ZPF energy density ``B_max**2 / (2 mu0)``."""
    if not (B_max > 0):
        raise DegenerateError("peak field is zero; mode volume undefined")
    if not (f_r > 0):
        raise DomainError("f_r must be > 0")
    v = (h * f_r / 4) / (B_max**2 / (2 * mu0))
    lam = speed_of_light / f_r
    m = ModeMetrics(V_star=v, V_star_over_lambda3=v / lam**3, wavelength=lam, B_max=B_max)
    if Q is not None:
        m = ModeMetrics(v, m.V_star_over_lambda3, lam, B_max, purcell_factor(m, Q, 1.0))
    return m


def mode_volume_star(fmap: FieldMap, f_r: float, Q: float = None) -> ModeMetrics:
    if fmap.excluded.all():
        raise DegenerateError("field map holds no stored points")
    return mode_volume_from_peak(fmap.B_max, f_r, Q)


def purcell_factor(metrics: ModeMetrics, Q: float, f_norm: float) -> float:
    if not (Q > 0):
        raise DomainError("Q must be > 0")
    if not (0 <= f_norm <= 1):
        raise DomainError("f_norm must lie in [0, 1]")
    return 3 / (4 * math.pi**2) * Q / metrics.V_star_over_lambda3 * f_norm**2


def purcell_rate(g0: float, kappa: float) -> float:
    """Resonant Purcell emission rate ``4 (2 pi g0)**2 / kappa`` in 1/s.

    ``g0`` in Hz (i.e. g0/2pi), ``kappa`` angular.
    """
    if not (g0 > 0) or not (kappa > 0):
        raise DomainError("g0 and kappa must be > 0")
    return 4 * (2 * math.pi * g0) ** 2 / kappa


#: coupling gain of the parallel-plate design over a single-layer resonator
#: with the same nanowire cross-section
SINGLE_LAYER_COUPLING_RATIO = 5.0


def single_layer_reference(section: CrossSection,
                           coupling_ratio: float = SINGLE_LAYER_COUPLING_RATIO) -> CrossSection:
    """Cross-section of a single-layer resonator with the same nanowire.

    There is no counter-electrode, so no image sheet, and its larger parasitic
    inductance lowers the current ZPF by ``coupling_ratio`` for the same
    frequency.
    """
    if not (coupling_ratio > 0):
        raise DomainError("coupling_ratio must be > 0")
    return CrossSection(section.w, section.t, section.d,
                        section.delta_I / coupling_ratio, image=False)
