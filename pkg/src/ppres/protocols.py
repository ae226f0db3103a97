"""Single-spin detection protocols: photon counting and dispersive readout.

Unit convention: ``g0`` is stored in Hz (the coupling divided by 2 pi);
decay rates ``kappa``, ``gamma`` and detunings ``delta`` are angular (rad/s,
or 1/s for population decay).  Every formula converts ``g0`` with an explicit
``2 * pi``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import erf

from .constants import hbar
from .errors import DomainError, PpresError, ZeroDetuningError
from .search import golden_max

TWPA_SATURATION_DBM = -100.0


class ShortMeasurementWarning(UserWarning):
    """Measurement shorter than ten resonator lifetimes; steady state is not
    reached and the dispersive SNR is optimistic."""


# --- photon counting -------------------------------------------------------

@dataclass(frozen=True)
class PhotonCountingScenario:
    T1: float
    eta: float
    alpha: float
    snr_target: float = 2.0

    def __post_init__(self):
        if not (self.T1 > 0):
            raise DomainError("T1 must be > 0")
        if not (0 < self.eta <= 1):
            raise DomainError("eta must lie in (0, 1]")
        if not (self.alpha >= 0):
            raise DomainError("alpha must be >= 0")
        if not (self.snr_target > 0):
            raise DomainError("snr_target must be > 0")


class Regime(str, Enum):
    SHOT_NOISE = "shot-noise-limited"
    DARK_COUNT = "dark-count-limited"
    CROSSOVER = "crossover"


def _pc_noise(s: PhotonCountingScenario):
    # per-T1-window variance: binomial detection plus dark counts in the
    # signal and reference windows
    return 2 * s.T1 * s.alpha + s.eta * (1 - s.eta)


def pc_snr(s: PhotonCountingScenario, tau_m: float) -> float:
    """Photon-counting SNR after integrating for ``tau_m`` seconds."""
    if not (tau_m > 0):
        raise DomainError("tau_m must be > 0")
    noise = _pc_noise(s)
    if noise == 0:
        return math.inf
    return s.eta * math.sqrt(tau_m / s.T1) / math.sqrt(noise)


def pc_integration_time(s: PhotonCountingScenario) -> float:
    """Integration time needed to reach ``s.snr_target``."""
    return (s.snr_target / s.eta) ** 2 * s.T1 * _pc_noise(s)


def pc_regime(s: PhotonCountingScenario) -> Regime:
    dark, shot = 2 * s.T1 * s.alpha, s.eta * (1 - s.eta)
    if dark < shot / 10:
        return Regime.SHOT_NOISE
    if dark > 10 * shot:
        return Regime.DARK_COUNT
    return Regime.CROSSOVER


def mc_photon_counting(s: PhotonCountingScenario, tau_m, trials=10_000, seed=0):
    """Monte Carlo estimate of the photon-counting SNR.

    Each trial pairs a spin window with a background-only window.  The spin
    emits one photon per ``T1`` (the trailing partial interval emits with
    probability equal to its fraction); each photon is detected with
    probability ``eta``; both windows collect ``Poisson(alpha tau_m)`` dark
    counts.  Returns ``(snr, standard_error)`` with the SNR taken as
    mean/std of the count difference.
    """
    if trials < 1000:
        raise DomainError("at least 1000 trials are required")
    rng = np.random.default_rng(seed)
    n_emit = tau_m / s.T1
    whole = math.floor(n_emit)
    emitted = whole + (rng.random(trials) < (n_emit - whole))
    detected = rng.binomial(emitted, s.eta)
    signal = detected + rng.poisson(s.alpha * tau_m, trials)
    background = rng.poisson(s.alpha * tau_m, trials)
    return _ratio_with_error(signal - background)


def _ratio_with_error(x):
    x = np.asarray(x, dtype=float)
    n = x.size
    m = x.mean()
    sd = x.std(ddof=1)
    if sd == 0:
        return (math.inf if m > 0 else 0.0), 0.0
    r = m / sd
    z = (x - m) / sd
    skew = float(np.mean(z**3))
    kurt = float(np.mean(z**4))
    var = (1 - r * skew + r * r * (kurt - 1) / 4) / n
    return float(r), float(math.sqrt(max(var, 0.0)))


# --- dispersive readout ----------------------------------------------------

@dataclass(frozen=True)
class DispersiveScenario:
    g0: float
    kappa_c: float
    kappa_i: float
    eta: float
    gamma_nr: float = 1.0
    f_r: float = 7.5e9
    safety_factor: float = 2.0

    def __post_init__(self):
        for name in ("g0", "kappa_c", "kappa_i", "f_r", "safety_factor"):
            if not (getattr(self, name) > 0):
                raise DomainError(f"{name} must be > 0")
        if not (0 < self.eta <= 1):
            raise DomainError("eta must lie in (0, 1]")
        if not (self.gamma_nr >= 0):
            raise DomainError("gamma_nr must be >= 0")

    @property
    def kappa(self):
        return self.kappa_c + self.kappa_i

    @property
    def g(self):
        """Angular coupling 2 pi g0."""
        return 2 * math.pi * self.g0

    @classmethod
    def critically_coupled(cls, g0, Q, f_r, eta, gamma_nr=1.0, safety_factor=2.0):
        kappa = 2 * math.pi * f_r / Q
        return cls(g0=g0, kappa_c=kappa / 2, kappa_i=kappa / 2, eta=eta,
                   gamma_nr=gamma_nr, f_r=f_r, safety_factor=safety_factor)


@dataclass(frozen=True)
class DispersivePair:
    chi: float
    n_crit: float
    S11_g: complex
    S11_e: complex


@dataclass(frozen=True)
class ReadoutOptimum:
    delta_opt: float
    tau_m_opt: float
    fidelity: float
    n_bar: float
    T1_at_delta: float
    F_r: float = float("nan")
    P_e: float = float("nan")
    power_dbm: float = float("nan")

    def __post_init__(self):
        if not (0 <= self.fidelity <= 1):
            raise DomainError("fidelity must lie in [0, 1]")
        if not (self.tau_m_opt > 0):
            raise DomainError("tau_m_opt must be > 0")


@dataclass(frozen=True)
class ReadoutFailure:
    delta: float
    error: str
    message: str


def purcell_t1_detuned(s: DispersiveScenario, delta: float) -> float:
    """Spin lifetime with Purcell decay through a detuned resonator."""
    half = s.kappa / 2
    rate = 4 * s.g**2 / s.kappa * half**2 / (half**2 + delta**2) + s.gamma_nr
    return 1 / rate


def dispersive_pair(s: DispersiveScenario, delta: float) -> DispersivePair:
    """Dispersive shift, critical photon number and the two reflection
    coefficients seen at the bare resonator frequency."""
    if delta == 0:
        raise ZeroDetuningError("dispersive quantities need a non-zero detuning")
    chi = s.g**2 / delta
    n_crit = delta**2 / (4 * s.g**2)
    num = s.kappa_c - s.kappa_i
    S_g = (num + 2j * chi) / (s.kappa - 2j * chi)
    S_e = (num - 2j * chi) / (s.kappa + 2j * chi)
    return DispersivePair(chi=chi, n_crit=n_crit, S11_g=complex(S_g), S11_e=complex(S_e))


def readout_photon_number(s: DispersiveScenario, delta: float) -> float:
    return dispersive_pair(s, delta).n_crit / s.safety_factor


def incident_photon_rate(s: DispersiveScenario, delta: float, n_bar: float) -> float:
    chi = dispersive_pair(s, delta).chi
    return n_bar * ((s.kappa / 2) ** 2 + chi**2) / s.kappa_c


def dispersive_snr(s: DispersiveScenario, delta: float, tau_m: float, n_bar=None) -> float:
    """Homodyne SNR for discriminating the two spin states.

    ``n_bar`` defaults to ``n_crit / safety_factor``.  Warns with
    :class:`ShortMeasurementWarning` below ten resonator lifetimes.
    """
    if not (tau_m > 0):
        raise DomainError("tau_m must be > 0")
    if tau_m < 10 / s.kappa:
        warnings.warn(ShortMeasurementWarning(
            f"tau_m = {tau_m:g} s is shorter than 10/kappa = {10 / s.kappa:g} s"))
    pair = dispersive_pair(s, delta)
    if n_bar is None:
        n_bar = pair.n_crit / s.safety_factor
    if n_bar < 0:
        raise DomainError("n_bar must be >= 0")
    return math.sqrt(8 * n_bar * tau_m * s.eta * s.kappa_c
                     / ((s.kappa / 2) ** 2 + pair.chi**2)) * abs(pair.chi)


def weak_dispersive_snr(s: DispersiveScenario, tau_m: float) -> float:
    """Detuning-independent SNR at ``n_bar = n_crit/2`` for ``chi << kappa/2``."""
    return 2 * s.g / s.kappa * math.sqrt(tau_m * s.eta * s.kappa_c)


def total_fidelity(s: DispersiveScenario, delta: float, tau_m: float):
    """``(F, F_r, P_e)``: overall, readout-only and survival probability."""
    if tau_m == 0:
        return 0.0, 0.0, 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ShortMeasurementWarning)
        snr = dispersive_snr(s, delta, tau_m)
    F_r = float(erf(snr / 2))
    P_e = math.exp(-tau_m / purcell_t1_detuned(s, delta))
    return P_e * F_r, F_r, P_e


def optimize_readout(s: DispersiveScenario, delta_grid, rel_tol=1e-3):
    """Best measurement time for each detuning on ``delta_grid``.

    Each point is a golden-section search over ``log(tau_m)`` on
    ``[10/kappa, 100 T1(delta)]``.  Points whose search fails return a
    :class:`ReadoutFailure` entry; the others are unaffected.
    """
    grid = list(delta_grid)
    if not grid:
        raise DomainError("delta_grid is empty")
    out = []
    for delta in grid:
        try:
            t1 = purcell_t1_detuned(s, delta)
            lo, hi = math.log(10 / s.kappa), math.log(100 * t1)
            x, _, _ = golden_max(lambda lt: total_fidelity(s, delta, math.exp(lt))[0],
                                 lo, hi, math.log1p(rel_tol))
            tau = math.exp(x)
            F, F_r, P_e = total_fidelity(s, delta, tau)
            n_bar = readout_photon_number(s, delta)
            power, _ = twpa_power_check(n_bar, s.kappa, s.f_r)
            out.append(ReadoutOptimum(delta_opt=float(delta), tau_m_opt=tau, fidelity=F,
                                      n_bar=float(n_bar), T1_at_delta=float(t1), F_r=F_r,
                                      P_e=P_e, power_dbm=power))
        except PpresError as exc:
            out.append(ReadoutFailure(float(delta), exc.code, str(exc)))
    return out


def best_readout(results):
    ok = [r for r in results if isinstance(r, ReadoutOptimum)]
    if not ok:
        raise DomainError("no successful grid point")
    return max(ok, key=lambda r: r.fidelity)


def default_delta_grid(n=41, lo_hz=1e6, hi_hz=100e6):
    """Angular detunings, log-spaced between ``lo_hz`` and ``hi_hz``."""
    return 2 * np.pi * np.geomspace(lo_hz, hi_hz, n)


def twpa_power_check(n_bar, kappa, f_r, saturation_dbm=TWPA_SATURATION_DBM):
    """Power emitted by ``n_bar`` photons, in dBm, and whether it stays below
    the amplifier saturation level."""
    if n_bar < 0 or not (kappa > 0) or not (f_r > 0):
        raise DomainError("n_bar must be >= 0 and kappa, f_r > 0")
    p = n_bar * kappa * hbar * 2 * math.pi * f_r
    dbm = 10 * math.log10(p / 1e-3) if p > 0 else -math.inf
    return dbm, dbm < saturation_dbm


def mc_dispersive(s: DispersiveScenario, delta, tau_m, trials=10_000, seed=0, n_bar=None):
    """Monte Carlo estimate of the dispersive SNR.

    Integrated homodyne records for each spin state have mean
    ``S11 * sqrt(2 N_in tau_m eta)`` and unit-variance Gaussian noise per
    quadrature.  Records are projected on the empirical separation axis;
    the SNR is the mean separation over the pooled standard deviation.
    Returns ``(snr, standard_error)``.
    """
    if trials < 1000:
        raise DomainError("at least 1000 trials are required")
    pair = dispersive_pair(s, delta)
    if n_bar is None:
        n_bar = pair.n_crit / s.safety_factor
    amp = math.sqrt(2 * incident_photon_rate(s, delta, n_bar) * tau_m * s.eta)
    rng = np.random.default_rng(seed)

    def records(S):
        noise = rng.standard_normal(trials) + 1j * rng.standard_normal(trials)
        # subtract the known mean offset before adding noise to keep precision
        return (S - pair.S11_g) * amp + noise

    g, e = records(pair.S11_g), records(pair.S11_e)
    sep = e.mean() - g.mean()
    axis = sep / abs(sep) if abs(sep) > 0 else 1.0
    pg = (g * np.conj(axis)).real
    pe = (e * np.conj(axis)).real
    sd = math.sqrt(0.5 * (pg.var(ddof=1) + pe.var(ddof=1)))
    r = abs(sep) / sd
    se = math.sqrt(2 / trials + r * r / (4 * trials))
    return float(r), float(se)
