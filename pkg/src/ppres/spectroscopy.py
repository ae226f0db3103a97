"""Single-port reflection spectroscopy.

Reflection convention::

    S11(f) = (kappa_c - kappa_i - 2j*dw) / (kappa_c + kappa_i + 2j*dw),
    dw = 2 pi (f - f_r)

which is the probe-detuned form of the dispersive reflection coefficient.  Far
from resonance it tends to -1; on resonance it is ``(kappa_c - kappa_i)/kappa``.
Measured data are modelled as ``background(f) * S11(f)`` with the background
``a * exp(1j*(phi0 + 2 pi tau f))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .constants import h, hbar, kB
from .errors import (DomainError, FitFailedError, InsufficientSpanError,
                     RejectedFitError, SchemaError)

MIN_POINTS = 16
MAX_ITERATIONS = 200
Q_BOUNDS = (1.0, 1e9)
OFF_RESONANT_S11 = -1.0 + 0.0j


@dataclass(frozen=True)
class ComplexTrace:
    frequencies: np.ndarray
    s11: np.ndarray
    power_at_sample: float | None = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        s = np.asarray(self.s11, dtype=complex)
        if f.ndim != 1 or f.shape != s.shape:
            raise SchemaError("frequencies and s11 must be 1-D arrays of equal length")
        if f.size < MIN_POINTS:
            raise SchemaError(f"a trace needs at least {MIN_POINTS} points, got {f.size}")
        if not np.all(np.diff(f) > 0):
            raise SchemaError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "s11", s)

    def __len__(self):
        return self.frequencies.size


@dataclass(frozen=True)
class DeembedParams:
    a: float = 1.0
    phi0: float = 0.0
    tau: float = 0.0
    amplitude_slope: float = 0.0
    f_ref: float = 0.0

    def __post_init__(self):
        if not (self.a > 0):
            raise DomainError("background amplitude must be > 0")

    def background(self, f):
        f = np.asarray(f, dtype=float)
        amp = self.a * (1 + self.amplitude_slope * (f - self.f_ref))
        return amp * np.exp(1j * (self.phi0 + 2 * np.pi * self.tau * f))

    def compose(self, other: "DeembedParams") -> "DeembedParams":
        """Background equal to ``self.background * other.background`` (slopes
        must be zero on at least one side)."""
        slope = self.amplitude_slope or other.amplitude_slope
        f_ref = self.f_ref if self.amplitude_slope else other.f_ref
        return DeembedParams(a=self.a * other.a, phi0=_wrap(self.phi0 + other.phi0),
                             tau=self.tau + other.tau, amplitude_slope=slope, f_ref=f_ref)

    def to_dict(self):
        return {"a": self.a, "phi0": self.phi0, "tau": self.tau,
                "amplitude_slope": self.amplitude_slope, "f_ref": self.f_ref}


@dataclass(frozen=True)
class ResonanceFit:
    f_r: float
    Q_i: float
    Q_c: float
    residual_rms: float = 0.0
    uncertainties: dict = field(default_factory=dict)
    deembed: DeembedParams = field(default_factory=DeembedParams)

    def __post_init__(self):
        if not (self.Q_i > 0 and self.Q_c > 0):
            raise DomainError("Q_i and Q_c must be > 0")
        if not (self.residual_rms >= 0):
            raise DomainError("residual_rms must be >= 0")

    @property
    def kappa_c(self):
        return 2 * np.pi * self.f_r / self.Q_c

    @property
    def kappa_i(self):
        return 2 * np.pi * self.f_r / self.Q_i

    @property
    def Q_total(self):
        return 1 / (1 / self.Q_i + 1 / self.Q_c)

    def report(self):
        return {
            "f_r": self.f_r, "Q_i": self.Q_i, "Q_c": self.Q_c,
            "residual_rms": self.residual_rms,
            "uncertainties": dict(self.uncertainties),
            "deembed": {"a": self.deembed.a, "phi0": self.deembed.phi0,
                        "tau": self.deembed.tau},
        }


@dataclass(frozen=True)
class TlsParams:
    tan_delta0_eff: float
    n_c: float = 1.0
    beta: float = 1.0
    Q_other: float = 1e5
    temperature: float = 0.02

    def __post_init__(self):
        for name in ("tan_delta0_eff", "n_c", "Q_other", "temperature"):
            if not (getattr(self, name) > 0):
                raise DomainError(f"{name} must be > 0")
        if not (0 < self.beta <= 2):
            raise DomainError("beta must lie in (0, 2]")


def _wrap(phi):
    return float((phi + np.pi) % (2 * np.pi) - np.pi)


def model_s11(f, f_r, kappa_c, kappa_i):
    """Reflection coefficient of a one-port resonator (angular rates)."""
    if not (f_r > 0) or kappa_c < 0 or not (kappa_i >= 0) or not (kappa_c + kappa_i > 0):
        raise DomainError("f_r must be > 0 and decay rates non-negative")
    dw = 2 * np.pi * (np.asarray(f, dtype=float) - f_r)
    return (kappa_c - kappa_i - 2j * dw) / (kappa_c + kappa_i + 2j * dw)


def default_frequencies(f_r, Q_i, Q_c, n_points=401, span_linewidths=10.0):
    q = 1 / (1 / Q_i + 1 / Q_c)
    lw = f_r / q
    return np.linspace(f_r - span_linewidths / 2 * lw, f_r + span_linewidths / 2 * lw, n_points)


def synthesize_trace(params, deembed: DeembedParams | None = None, noise_sigma=0.0,
                     seed=None, frequencies=None, n_points=401, span_linewidths=10.0):
    """Synthetic reflection trace ``background * S11 + noise``.

    ``params`` is anything with ``f_r``, ``Q_i`` and ``Q_c`` attributes.  The
    noise is complex Gaussian with standard deviation ``noise_sigma`` in each
    quadrature.
    """
    if noise_sigma < 0:
        raise DomainError("noise_sigma must be >= 0")
    deembed = deembed or DeembedParams()
    f_r, Q_i, Q_c = params.f_r, params.Q_i, params.Q_c
    if frequencies is None:
        frequencies = default_frequencies(f_r, Q_i, Q_c, n_points, span_linewidths)
    f = np.asarray(frequencies, dtype=float)
    w = 2 * np.pi * f_r
    s = deembed.background(f) * model_s11(f, f_r, w / Q_c, w / Q_i)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        s = s + noise_sigma * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
    return ComplexTrace(f, s)


def circle_fit(z):
    """Algebraic (Kasa) circle fit of complex points.

    Returns ``(center, radius, rms_residual)``; the residual is the rms of
    ``|z - center| - radius``.
    """
    z = np.asarray(z, dtype=complex)
    shift = z.mean()
    scale = np.abs(z - shift).max()
    if scale == 0:
        raise DomainError("all points coincide; no circle")
    u = (z - shift) / scale
    x, y = u.real, u.imag
    A = np.column_stack([x, y, np.ones_like(x)])
    b = -(x * x + y * y)
    (D, E, F), *_ = np.linalg.lstsq(A, b, rcond=None)
    cu = complex(-D / 2, -E / 2)
    r2 = cu.real**2 + cu.imag**2 - F
    if r2 <= 0:
        raise DomainError("degenerate circle fit")
    center = shift + scale * cu
    radius = scale * math.sqrt(r2)
    resid = np.abs(z - center) - radius
    return center, radius, float(np.sqrt(np.mean(resid**2)))


# --- joint least-squares fit ----------------------------------------------

def _unpack(p, fc):
    f_r, lkc, lki, la, phic, tau = p
    return f_r, math.exp(lkc), math.exp(lki), math.exp(la), phic, tau


def _model_and_jac(p, f, fc, want_jac=True):
    f_r, kc, ki, a, phic, tau = _unpack(p, fc)
    dw = 2 * np.pi * (f - f_r)
    N = kc - ki - 2j * dw
    D = kc + ki + 2j * dw
    S = N / D
    B = a * np.exp(1j * (phic + 2 * np.pi * tau * (f - fc)))
    M = B * S
    if not want_jac:
        return M, None
    D2 = D * D
    cols = [
        B * (-4j * kc / D2) * (-2 * np.pi),
        B * kc * (2 * ki + 4j * dw) / D2,
        B * ki * (-2 * kc / D2),
        M,
        1j * M,
        1j * 2 * np.pi * (f - fc) * M,
    ]
    return M, np.column_stack(cols)


def _joint_fit(f, s, x0, fit_background=True):
    """Least-squares fit of ``background * S11`` with bounded parameters."""
    fc = 0.5 * (f[0] + f[-1])
    w0 = 2 * np.pi * x0[0]
    lo_k = math.log(w0 / Q_BOUNDS[1])
    hi_k = math.log(w0 / Q_BOUNDS[0])
    free = np.ones(6, bool) if fit_background else np.array([1, 1, 1, 0, 0, 0], bool)
    x0 = np.asarray(x0, dtype=float)
    x0[1:3] = np.clip(x0[1:3], lo_k + 1e-9, hi_k - 1e-9)
    span = f[-1] - f[0]
    lower = np.array([f[0] - span, lo_k, lo_k, -np.inf, -np.inf, -np.inf])[free]
    upper = np.array([f[-1] + span, hi_k, hi_k, np.inf, np.inf, np.inf])[free]

    def full(q):
        p = x0.copy()
        p[free] = q
        return p

    def resid(q):
        M, _ = _model_and_jac(full(q), f, fc, want_jac=False)
        r = M - s
        return np.concatenate([r.real, r.imag])

    def jac(q):
        _, J = _model_and_jac(full(q), f, fc)
        J = J[:, free]
        return np.vstack([J.real, J.imag])

    res = least_squares(resid, x0[free], jac=jac, bounds=(lower, upper), method="trf",
                        x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=MAX_ITERATIONS)
    p = full(res.x)
    rms = float(np.sqrt(np.mean(res.fun**2) * 2))
    if res.status <= 0 and rms > 1e-9:
        raise FitFailedError(f"least squares did not converge: {res.message}", rms)
    # a decay rate pinned at its bound means the true Q lies outside Q_BOUNDS
    pinned = np.minimum(np.abs(p[1:3] - lo_k), np.abs(p[1:3] - hi_k)) < 1e-6
    if pinned.any():
        raise RejectedFitError(f"quality factor pinned at the fit bound {Q_BOUNDS}")

    J = res.jac
    dof = max(J.shape[0] - J.shape[1], 1)
    s2 = float(np.sum(res.fun**2)) / dof
    try:
        cov = np.linalg.pinv(J.T @ J) * s2
        sig = np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        sig = np.full(J.shape[1], np.nan)
    sig_full = np.zeros(6)
    sig_full[free] = sig
    return p, fc, rms, sig_full


def _fit_result(p, fc, rms, sig):
    f_r, kc, ki, a, phic, tau = _unpack(p, fc)
    w = 2 * np.pi * f_r
    Q_i, Q_c = w / ki, w / kc
    for name, q in (("Q_i", Q_i), ("Q_c", Q_c)):
        if not (Q_BOUNDS[0] <= q <= Q_BOUNDS[1]):
            raise RejectedFitError(f"{name} = {q:.4g} outside {Q_BOUNDS}")
    bg = DeembedParams(a=float(a), phi0=_wrap(phic - 2 * np.pi * tau * fc), tau=float(tau))
    unc = {"f_r": float(sig[0]), "Q_c": float(Q_c * sig[1]), "Q_i": float(Q_i * sig[2]),
           "a": float(a * sig[3]), "phi0": float(sig[4]), "tau": float(sig[5])}
    return ResonanceFit(f_r=float(f_r), Q_i=float(Q_i), Q_c=float(Q_c), residual_rms=rms,
                        uncertainties=unc, deembed=bg)


def _resonance_seed(f, z):
    """Seed ``(f_r, kappa, kappa_c, resonant point, center, radius)`` from a
    circle fit and the point of fastest travel along the locus."""
    center, radius, _ = circle_fit(z)
    speed = np.abs(np.diff(z)) / np.diff(f)
    k = int(np.argmax(speed))
    f_r = 0.5 * (f[k] + f[k + 1])
    z_res = 0.5 * (z[k] + z[k + 1])
    # |dS/dw| at resonance equals 4 r / kappa for a locus of radius r
    # normalised to the off-resonant amplitude
    return f_r, speed[k] / (2 * np.pi), center, radius, z_res


def fit_resonance(trace: ComplexTrace, initial_guess=None, fit_background=True) -> ResonanceFit:
    """Fit ``(f_r, Q_i, Q_c)`` to a de-embedded trace.

    A small residual background (amplitude, phase, delay) is fitted alongside
    unless ``fit_background`` is false; it is reported in ``fit.deembed``.
    Without ``initial_guess`` the fit is seeded by an algebraic circle fit and
    the frequency of maximum ``|dS11/df|``.
    """
    f, s = trace.frequencies, trace.s11
    if initial_guess is None:
        f_r, dsdw, center, radius, z_res = _resonance_seed(f, s)
        p_off = 2 * center - z_res
        amp = abs(p_off)
        kappa = 4 * radius / dsdw
        kc = min(radius / amp, 0.999) * kappa
        ki = max(kappa - kc, 1e-3 * kappa)
        x0 = [f_r, math.log(kc), math.log(ki), 0.0, 0.0, 0.0]
    else:
        g = initial_guess
        w = 2 * np.pi * g.f_r
        x0 = [g.f_r, math.log(w / g.Q_c), math.log(w / g.Q_i), 0.0, 0.0, 0.0]
    p, fc, rms, sig = _joint_fit(f, s, x0, fit_background)
    return _fit_result(p, fc, rms, sig)


def _phase_slope_delay(f, s, outer_fraction):
    n = len(f)
    m = max(int(round(n * outer_fraction / 2)), 3)
    slopes = []
    for sl in (slice(0, m), slice(n - m, n)):
        ph = np.unwrap(np.angle(s[sl]))
        slopes.append(np.polyfit(f[sl], ph, 1)[0])
    return float(np.mean(slopes)) / (2 * np.pi)


def deembed(trace: ComplexTrace, outer_fraction: float = 0.2,
            min_span_linewidths: float = 5.0):
    """Estimate and remove the cable background from a raw trace.

    The delay is first estimated from the phase slope of the outer
    ``outer_fraction`` of points and the amplitude/phase from the off-resonant
    point of the reflection circle; these estimates then seed a joint fit of
    background and resonance, whose background part is returned.

    Returns ``(corrected_trace, DeembedParams)``.  The corrected trace has the
    off-resonant baseline of :func:`model_s11` (``-1``).
    """
    f, s = trace.frequencies, trace.s11
    tau0 = _phase_slope_delay(f, s, outer_fraction)
    z = s * np.exp(-2j * np.pi * tau0 * f)

    spread = np.abs(z - z.mean()).max()
    if spread <= 1e-9 * np.abs(z).mean():
        # flat baseline, no resonance in the data
        bg = DeembedParams(a=float(np.abs(z.mean())),
                           phi0=_wrap(np.angle(z.mean() / OFF_RESONANT_S11)), tau=float(tau0))
        return ComplexTrace(f, s / bg.background(f), trace.power_at_sample), bg

    try:
        f_r, dsdw, center, radius, z_res = _resonance_seed(f, z)
    except DomainError as exc:
        raise InsufficientSpanError(f"cannot identify the off-resonant baseline: {exc}")
    p_off = 2 * center - z_res
    amp = abs(p_off)
    phi_c = float(np.angle(p_off / OFF_RESONANT_S11))
    fc = 0.5 * (f[0] + f[-1])
    kappa = 4 * radius / dsdw
    kc = min(radius / amp, 0.999) * kappa
    ki = max(kappa - kc, 1e-3 * kappa)
    x0 = [f_r, math.log(kc), math.log(ki), math.log(amp),
          phi_c + 2 * np.pi * tau0 * fc, tau0]
    span = f[-1] - f[0]

    def too_narrow(linewidth):
        return InsufficientSpanError(
            f"trace spans {span / linewidth:.2f} linewidths, need >= {min_span_linewidths}")

    try:
        p, fc, rms, sig = _joint_fit(f, s, x0)
        fit = _fit_result(p, fc, rms, sig)
    except (FitFailedError, RejectedFitError):
        seed_linewidth = kappa / (2 * np.pi)
        if span < min_span_linewidths * seed_linewidth:
            raise too_narrow(seed_linewidth) from None
        raise

    linewidth = fit.f_r / fit.Q_total
    if span < min_span_linewidths * linewidth:
        raise too_narrow(linewidth)
    bg = fit.deembed
    return ComplexTrace(f, s / bg.background(f), trace.power_at_sample), bg


def fit_trace(trace: ComplexTrace):
    """De-embed a raw trace and fit it; returns ``(fit, background)``."""
    corrected, bg = deembed(trace)
    fit = fit_resonance(corrected)
    total = bg.compose(fit.deembed)
    return ResonanceFit(fit.f_r, fit.Q_i, fit.Q_c, fit.residual_rms, fit.uncertainties,
                        total), total


# --- power dependence ------------------------------------------------------

def qi_vs_photon_number(params: TlsParams, f_r, n_bar):
    """Intrinsic Q versus mean photon number for a saturable TLS bath."""
    if not (f_r > 0):
        raise DomainError("f_r must be > 0")
    n = np.asarray(n_bar, dtype=float)
    if np.any(n < 0):
        raise DomainError("photon numbers must be >= 0")
    thermal = math.tanh(h * f_r / (2 * kB * params.temperature))
    inv_q = (params.tan_delta0_eff * thermal / (1 + n / params.n_c) ** (params.beta / 2)
             + 1 / params.Q_other)
    return 1 / inv_q


def fit_tls(f_r, n_bar, Q_i, temperature=0.02, n_c=1.0, beta=1.0) -> TlsParams:
    """Fit ``tan_delta0_eff`` and ``Q_other`` with the saturation shape fixed.

    With ``n_c`` and ``beta`` held, ``1/Q_i`` is linear in the two unknowns,
    so the fit is a weighted linear least-squares problem (relative errors).
    """
    n = np.asarray(n_bar, dtype=float)
    q = np.asarray(Q_i, dtype=float)
    if n.shape != q.shape or n.size < 2:
        raise DomainError("need at least two (n_bar, Q_i) pairs of equal length")
    thermal = math.tanh(h * f_r / (2 * kB * temperature))
    A = np.column_stack([thermal / (1 + n / n_c) ** (beta / 2), np.ones_like(n)])
    b = 1 / q
    wts = q  # relative weighting of 1/Q residuals
    sol, *_ = np.linalg.lstsq(A * wts[:, None], b * wts, rcond=None)
    tan_d, inv_q_other = sol
    if tan_d <= 0 or inv_q_other <= 0:
        raise FitFailedError("TLS fit produced non-positive loss terms")
    return TlsParams(tan_delta0_eff=float(tan_d), n_c=n_c, beta=beta,
                     Q_other=float(1 / inv_q_other), temperature=temperature)


def photon_number_from_power(P_in, f_r, kappa_c, kappa, probe_detuning=0.0):
    """Steady-state mean photon number for incident power ``P_in`` (W)."""
    if not (P_in > 0) or not (f_r > 0) or kappa_c < 0 or not (kappa > 0):
        raise DomainError("P_in, f_r and kappa must be > 0, kappa_c >= 0")
    rate_in = P_in / (h * f_r)
    return rate_in * kappa_c / ((kappa / 2) ** 2 + probe_detuning**2)


def emitted_power(n_bar, kappa, f_r):
    """Power leaving a resonator holding ``n_bar`` photons, ``n kappa hbar w``."""
    return n_bar * kappa * hbar * 2 * np.pi * f_r
