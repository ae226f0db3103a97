"""Magnetic-field tuning of the resonance.

An in-plane field suppresses the superfluid density, so the relative
frequency shift grows as ``|B|**2``::

    f_r(B) = f_r0 * (1 - a * B**2)

Trapped vortices show up as abrupt downward steps; they are detected from the
sweep itself and absorbed as baseline offsets before the quadratic fit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, DomainError, OverlapError
from .search import golden_max

JUMP_SIGMAS = 5.0
# absolute floor on the jump threshold, relative to f_r; keeps noiseless data
# from flagging rounding error as events
JUMP_FLOOR = 1e-9


@dataclass(frozen=True)
class FieldSweepRecord:
    field_magnitude: float
    f_r: float
    field_angle: float | None = None
    Q_i: float | None = None
    direction: str = "up"

    def __post_init__(self):
        if not (self.field_magnitude >= 0):
            raise DomainError("field_magnitude must be >= 0")
        if not (self.f_r > 0):
            raise DomainError("f_r must be > 0")
        if self.direction not in ("up", "down"):
            raise DomainError(f"direction must be 'up' or 'down', got {self.direction!r}")


@dataclass(frozen=True)
class VortexEvent:
    field_magnitude: float
    step: float
    index: int


@dataclass(frozen=True)
class QuadraticTuneFit:
    f_r0: float
    a_coeff: float
    residual_rms: float
    offsets: tuple = ()
    events: tuple = field(default=())

    def __post_init__(self):
        if not (self.f_r0 > 0):
            raise DomainError("f_r0 must be > 0")
        if not (self.a_coeff >= 0):
            raise DomainError("a_coeff must be >= 0")


@dataclass(frozen=True)
class HysteresisResult:
    max_difference: float
    events_up: tuple
    events_down: tuple

    @property
    def events(self):
        return self.events_up + self.events_down


def detect_vortex_jumps(records, n_sigma=JUMP_SIGMAS):
    """Flag abrupt frequency steps in a single sweep, in acquisition order.

    Consecutive differences are compared with the quadratic law: the
    curvature is estimated robustly as the median of ``df / d(B**2)``, and a
    step whose residual exceeds ``n_sigma`` robust standard deviations is an
    event, located at the field of the record after the step.
    """
    if len(records) < 3:
        return []
    b2 = np.array([r.field_magnitude for r in records]) ** 2
    fr = np.array([r.f_r for r in records])
    df = np.diff(fr)
    db2 = np.diff(b2)
    ok = db2 != 0
    slope = float(np.median(df[ok] / db2[ok])) if ok.any() else 0.0
    resid = df - slope * db2
    mad = float(np.median(np.abs(resid - np.median(resid))))
    sigma = 1.4826 * mad
    threshold = max(n_sigma * sigma, JUMP_FLOOR * float(np.median(fr)))
    return [VortexEvent(float(records[i + 1].field_magnitude), float(resid[i]), int(i) + 1)
            for i in np.flatnonzero(np.abs(resid) > threshold)]


def fit_quadratic_tuning(records, exclude_jumps=True, n_sigma=JUMP_SIGMAS) -> QuadraticTuneFit:
    """Least-squares fit of ``f_r0 (1 - a B**2)``.

    With ``exclude_jumps`` each detected vortex step starts a new baseline
    segment; segments share ``a`` and ``f_r0`` but carry their own offset.
    """
    records = list(records)
    if len({r.field_magnitude for r in records}) < 3:
        raise DegenerateDataError("need at least 3 distinct field magnitudes")
    events = []
    if exclude_jumps:
        for direction in ("up", "down"):
            sub = [i for i, r in enumerate(records) if r.direction == direction]
            for ev in detect_vortex_jumps([records[i] for i in sub], n_sigma):
                events.append((sub[ev.index], ev))

    b2 = np.array([r.field_magnitude for r in records]) ** 2
    fr = np.array([r.f_r for r in records])
    cols = [np.ones_like(b2), b2]
    dirs = [r.direction for r in records]
    for idx, _ in events:
        step = np.zeros_like(b2)
        for j in range(idx, len(records)):
            if dirs[j] == dirs[idx]:
                step[j] = 1.0
        cols.append(step)
    A = np.column_stack(cols)
    scale = np.abs(A).max(axis=0)
    sol, *_ = np.linalg.lstsq(A / scale, fr, rcond=None)
    sol = sol / scale
    f0, c1 = float(sol[0]), float(sol[1])
    resid = fr - A @ sol
    a = max(-c1 / f0, 0.0)
    return QuadraticTuneFit(f_r0=f0, a_coeff=a,
                            residual_rms=float(np.sqrt(np.mean(resid**2)) / f0),
                            offsets=tuple(float(o) for o in sol[2:]),
                            events=tuple(ev for _, ev in events))


def predict_detuning(fit: QuadraticTuneFit, B):
    """Frequency shift ``f_r(B) - f_r(0)`` in Hz."""
    B = np.asarray(B, dtype=float)
    if np.any(B < 0):
        raise DomainError("field magnitude must be >= 0")
    out = -fit.f_r0 * fit.a_coeff * B**2
    return float(out) if out.ndim == 0 else out


def alignment_search(response, angle_window, tolerance):
    """Field angle that maximises the resonance frequency.

    ``response(angle) -> f_r`` is the measurement oracle and
    ``angle_window = (lo, hi)`` the allowed rotation range, which callers
    shrink as the field grows.  The in-plane direction is where ``f_r`` peaks.
    """
    lo, hi = angle_window
    x, _, _ = golden_max(response, lo, hi, tolerance)
    return x


def _sorted_curve(records):
    b = np.array([r.field_magnitude for r in records], dtype=float)
    f = np.array([r.f_r for r in records], dtype=float)
    order = np.argsort(b, kind="stable")
    b, f = b[order], f[order]
    ub, inv = np.unique(b, return_inverse=True)
    fm = np.bincount(inv, weights=f) / np.bincount(inv)
    return ub, fm


def hysteresis_metric(up, down) -> HysteresisResult:
    """Largest up/down frequency difference over the shared field range.

    Both sweeps are linearly interpolated onto the union of their field
    points inside the overlap.  Vortex steps in either sweep are reported.
    """
    if len(up) < 2 or len(down) < 2:
        raise DegenerateDataError("each sweep needs at least two records")
    bu, fu = _sorted_curve(up)
    bd, fd = _sorted_curve(down)
    lo, hi = max(bu[0], bd[0]), min(bu[-1], bd[-1])
    if not (hi >= lo):
        raise OverlapError("up and down sweeps cover disjoint field ranges")
    grid = np.union1d(bu, bd)
    grid = grid[(grid >= lo) & (grid <= hi)]
    diff = np.abs(np.interp(grid, bu, fu) - np.interp(grid, bd, fd))
    return HysteresisResult(max_difference=float(diff.max()),
                            events_up=tuple(detect_vortex_jumps(list(up))),
                            events_down=tuple(detect_vortex_jumps(list(down))))


def synthesize_sweep(f_r0, a_coeff, fields, direction="up", noise_hz=0.0, seed=None,
                     jumps=(), Q_i=None):
    """Synthetic sweep records; ``jumps`` is a list of ``(B, step_hz)``."""
    fields = np.asarray(fields, dtype=float)
    f = f_r0 * (1 - a_coeff * fields**2)
    for b_jump, step in jumps:
        f = f + np.where(fields >= b_jump - 1e-12, step, 0.0)
    if noise_hz > 0:
        f = f + noise_hz * np.random.default_rng(seed).standard_normal(fields.size)
    return [FieldSweepRecord(float(b), float(x), None, Q_i, direction)
            for b, x in zip(fields, f)]


def reverse_engineered_coefficient(detuning, B, f_r0):
    """Quadratic coefficient reproducing a measured shift ``detuning`` at ``B``."""
    if not (B > 0) or not (f_r0 > 0):
        raise DomainError("B and f_r0 must be > 0")
    return -detuning / (f_r0 * B * B)

