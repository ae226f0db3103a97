"""Command-line front end.

    ppres design              [--config FILE] [--out DIR] [--set key=value ...]
    ppres fit TRACE.csv       [--out DIR]
    ppres tune SWEEP.csv      [--out DIR]
    ppres protocol-count      [--config FILE] [--seed N]
    ppres protocol-dispersive [--config FILE] [--seed N]
    ppres simulate            [--config FILE] [--seed N]

Each run writes ``results.json`` plus CSV tables and SVG plots into the output
directory.  Failures print a JSON error object on stdout and a human-readable
message on stderr.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import circuit, fields, io, protocols, spectroscopy, tuning
from .constants import G_ER_CAWO4, G_FREE_ELECTRON
from .errors import ConfigError, FileIOError, PpresError
from .plots import PlotSpec, Series, emit_plot

COMMANDS = ("design", "fit", "tune", "protocol-count", "protocol-dispersive", "simulate")

SCHEMAS = {
    "design": {
        "capacitor_diameter": ("length", 825e-6),
        "nanowire_length": ("length", 10e-6),
        "nanowire_width": ("length", 300e-9),
        "film_thickness": ("length", 50e-9),
        "dielectric_thickness": ("length", 500e-9),
        "dielectric_epsilon_r": ("dimensionless", 11.9),
        "sheet_kinetic_inductance": ("sheet_inductance", 0.2e-12),
        "f_r": ("frequency", 7.5e9),
        "L": ("inductance", 15.93e-12),
        "delta_I": ("current", None),
        "Q": ("dimensionless", 1e4),
        "line_impedance": ("impedance", 50.0),
        "spin_x": ("length", 0.0),
        "spin_y": ("length", -50e-9),
        "g_electron": ("dimensionless", G_FREE_ELECTRON),
        "g_er": ("dimensionless", G_ER_CAWO4),
        "spacing": ("length", 5e-9),
        "guard": ("length", 5e-9),
        "host": ("text", "substrate"),
        "window_x_min": ("length", -1e-6),
        "window_x_max": ("length", 1e-6),
        "window_y_min": ("length", -0.5e-6),
        "window_y_max": ("length", None),
        "plot_spacing": ("length", 20e-9),
    },
    "fit": {
        "outer_fraction": ("dimensionless", 0.2),
        "min_span_linewidths": ("dimensionless", 5.0),
    },
    "tune": {
        "jump_sigmas": ("dimensionless", tuning.JUMP_SIGMAS),
        "predict_max_field": ("field", 0.5),
        "predict_points": ("int", 51),
    },
    "protocol-count": {
        "T1_reference": ("time", 0.8e-3),
        "T1": ("time", None),
        "g0": ("frequency", 30.0e3),
        "Q": ("dimensionless", 1e4),
        "f_r": ("frequency", 7.5e9),
        "eta": ("dimensionless", 0.3),
        "alpha": ("rate", 100.0),
        "snr_target": ("dimensionless", 2.0),
        "mc_trials": ("int", 10000),
        "grid_T1_min": ("time", 1e-6),
        "grid_T1_max": ("time", 0.1),
        "grid_points": ("int", 41),
    },
    "protocol-dispersive": {
        "g0": ("frequency", 30.0e3),
        "Q": ("dimensionless", 1e4),
        "f_r": ("frequency", 7.5e9),
        "eta": ("dimensionless", 0.3),
        "gamma_nr": ("rate", 1.0),
        "safety_factor": ("dimensionless", 2.0),
        "delta_min": ("frequency", 1e6),
        "delta_max": ("frequency", 100e6),
        "delta_points": ("int", 41),
        "saturation": ("dbm", protocols.TWPA_SATURATION_DBM),
        "mc_trials": ("int", 0),
        "mc_delta": ("frequency", 10e6),
        "mc_tau_m": ("time", 5e-3),
    },
    "simulate": {
        "f_r": ("frequency", 7.5e9),
        "Q_i": ("dimensionless", 2e4),
        "Q_c": ("dimensionless", 1e4),
        "a": ("dimensionless", 0.8),
        "phi0": ("angle", 1.0),
        "tau": ("time", 50e-9),
        "noise_sigma": ("dimensionless", 0.0),
        "n_points": ("int", 401),
        "span_linewidths": ("dimensionless", 10.0),
        "f_r0": ("frequency", 7.48e9),
        "a_coeff": ("dimensionless", tuning.reverse_engineered_coefficient(
            -121.971828413557e6, 0.5, 7.48e9)),
        "b_max": ("field", 0.5),
        "n_fields": ("int", 26),
        "noise_hz": ("frequency", 0.0),
        "jump_field": ("field", None),
        "jump_step": ("frequency", -2e6),
    },
}

# commands that take a data file rather than parameters
INPUT_SCHEMA = {"fit": "trace", "tune": "sweep"}


@dataclass
class RunConfig:
    command: str
    input_paths: list = field(default_factory=list)
    output_dir: Path = Path(".")
    overrides: list = field(default_factory=list)
    seed: int | None = None
    config_path: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        self.output_dir = Path(self.output_dir)


def q(value, unit):
    """A number with its unit, as stored in results.json."""
    return {"value": value, "unit": unit}


def _load_params(cfg: RunConfig):
    raw = io.read_config(cfg.config_path) if cfg.config_path else {}
    for item in cfg.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = (p.strip() for p in item.split("=", 1))
        if k not in SCHEMAS[cfg.command]:
            raise ConfigError(f"--set: unknown key {k!r} for {cfg.command}")
        raw[k] = v
    return io.typed_config(raw, SCHEMAS[cfg.command]), raw


# --- pipelines -------------------------------------------------------------

def _design(p, raw, cfg, out):
    design = circuit.DeviceDesign(
        p["capacitor_diameter"], p["nanowire_length"], p["nanowire_width"],
        p["film_thickness"], p["dielectric_thickness"], p["dielectric_epsilon_r"],
        p["sheet_kinetic_inductance"])
    L_k = circuit.kinetic_inductance(design)
    if p["delta_I"] is not None:
        if "L" in raw:
            raise ConfigError("give either L or delta_I, not both")
        cp = circuit.CircuitParams.from_pair(L_k=L_k, f_r=p["f_r"], delta_I=p["delta_I"])
    else:
        cp = circuit.CircuitParams.from_pair(L_k=L_k, f_r=p["f_r"], L=p["L"])
    qf = circuit.quality_factors(2 * p["Q"], 2 * p["Q"], cp.f_r)

    section = fields.CrossSection(design.nanowire_width, design.film_thickness,
                                  design.dielectric_thickness, cp.delta_I)
    point = (p["spin_x"], p["spin_y"])
    b = fields.delta_b(section, point, p["guard"])
    b_fid = float(np.hypot(*b))
    electron = fields.SpinSpecies("electron", p["g_electron"])
    erbium = fields.SpinSpecies("Er3+", p["g_er"])
    g_e = fields.g0_at(section, point, electron, guard=p["guard"])
    g_er = fields.g0_at(section, point, erbium, guard=p["guard"])
    y_max = p["window_y_max"] if p["window_y_max"] is not None else section.t + section.d
    window = (p["window_x_min"], p["window_x_max"], p["window_y_min"], y_max)
    fmap = fields.field_map(section, window, p["spacing"], p["guard"], p["host"])
    metrics = fields.mode_volume_star(fmap, cp.f_r, p["Q"])
    fp_fid = fields.purcell_factor(metrics, p["Q"], b_fid / fmap.B_max)
    rate_er = fields.purcell_rate(g_er, qf.kappa)
    bx_max, by_max = fmap.argmax()

    io.write_csv(out / "fieldmap.csv", ("x_m", "y_m", "bx_t", "by_t", "b_t"), fmap.rows())
    coarse = fields.field_map(section, window, p["plot_spacing"], p["guard"], p["host"])
    rows = list(coarse.rows())
    table = {"x": [r[0] * 1e9 for r in rows], "y": [r[1] * 1e9 for r in rows],
             "b": [r[4] * 1e9 for r in rows]}
    emit_plot(PlotSpec("heatmap", (Series("x", "y", z="b"),), "x", "nm", "y", "nm",
                       title="magnetic field ZPF", z_label="|dB| (nT)"),
              table, out / "fieldmap.svg")

    results = {
        "kinetic_inductance": q(L_k, "H"),
        "f_r": q(cp.f_r, "Hz"),
        "inductance": q(cp.L, "H"),
        "impedance": q(cp.Z, "Ohm"),
        "delta_I": q(cp.delta_I, "A"),
        "galvanic_Q_c": q(circuit.galvanic_coupling_q(cp.Z, p["line_impedance"]), "1"),
        "spin_point": {"x": q(point[0], "m"), "y": q(point[1], "m")},
        "delta_B_at_spin": q(b_fid, "T"),
        "g0_electron": q(g_e, "Hz"),
        "g0_er": q(g_er, "Hz"),
        "B_max": q(fmap.B_max, "T"),
        "B_max_location": {"x": q(bx_max, "m"), "y": q(by_max, "m")},
        "V_star": q(metrics.V_star, "m^3"),
        "V_star_over_lambda3": q(metrics.V_star_over_lambda3, "1"),
        "wavelength": q(metrics.wavelength, "m"),
        "Q": q(p["Q"], "1"),
        "F_P_max": q(metrics.F_P_max, "1"),
        "F_P_spin": q(fp_fid, "1"),
        "purcell_rate_er": q(rate_er, "1/s"),
        "T1_er": q(1 / rate_er, "s"),
        "host_region": p["host"],
    }
    return results, ["fieldmap.csv", "fieldmap.svg"]


def _fit(p, raw, cfg, out):
    trace = io.trace_from_points(io.ingest_csv(cfg.input_paths[0], "trace"))
    corrected, bg = spectroscopy.deembed(trace, p["outer_fraction"], p["min_span_linewidths"])
    fit0 = spectroscopy.fit_resonance(corrected)
    total = bg.compose(fit0.deembed)
    fit = spectroscopy.ResonanceFit(fit0.f_r, fit0.Q_i, fit0.Q_c, fit0.residual_rms,
                                    fit0.uncertainties, total)
    w = 2 * math.pi * fit.f_r
    model = total.background(trace.frequencies) * spectroscopy.model_s11(
        trace.frequencies, fit.f_r, w / fit.Q_c, w / fit.Q_i)
    io.write_csv(out / "fit.csv", ("freq_hz", "re", "im", "model_re", "model_im"),
                 zip(trace.frequencies, trace.s11.real, trace.s11.imag,
                     model.real, model.imag))
    emit_plot(PlotSpec("line", (Series("f", "data", "data", style="."),
                                Series("f", "model", "fit")),
                       "frequency offset", "MHz", "|S11|", "1"),
              {"f": (trace.frequencies - fit.f_r) / 1e6, "data": np.abs(trace.s11),
               "model": np.abs(model)}, out / "fit.svg")
    u = fit.uncertainties
    results = {
        "f_r": q(fit.f_r, "Hz"), "Q_i": q(fit.Q_i, "1"), "Q_c": q(fit.Q_c, "1"),
        "Q_total": q(fit.Q_total, "1"),
        "residual_rms": q(fit.residual_rms, "1"),
        "uncertainties": {"f_r": q(u["f_r"], "Hz"), "Q_i": q(u["Q_i"], "1"),
                          "Q_c": q(u["Q_c"], "1")},
        "deembed": {"a": q(total.a, "1"), "phi0": q(total.phi0, "rad"),
                    "tau": q(total.tau, "s")},
    }
    return results, ["fit.csv", "fit.svg"]


def _events(events):
    return [{"field": q(e.field_magnitude, "T"), "step": q(e.step, "Hz")} for e in events]


def _tune(p, raw, cfg, out):
    records = io.ingest_csv(cfg.input_paths[0], "sweep")
    fit = tuning.fit_quadratic_tuning(records, n_sigma=p["jump_sigmas"])
    events = list(fit.events)
    bs = np.linspace(0, p["predict_max_field"], p["predict_points"])
    pred = tuning.predict_detuning(fit, bs)
    io.write_csv(out / "tuning.csv", ("b_tesla", "predicted_detuning_hz"), zip(bs, pred))
    meas_b = np.array([r.field_magnitude for r in records])
    meas_rel = np.array([r.f_r for r in records]) / fit.f_r0 - 1
    emit_plot(PlotSpec("line", (Series("b", "meas", "data", style="o"),
                                Series("bp", "pred", "quadratic fit")),
                       "|B|", "mT", "relative frequency shift", "1"),
              {"b": meas_b * 1e3, "meas": meas_rel, "bp": bs * 1e3, "pred": pred / fit.f_r0},
              out / "tuning.svg")
    results = {
        "f_r0": q(fit.f_r0, "Hz"),
        "a_coeff": q(fit.a_coeff, "1/T^2"),
        "residual_rms": q(fit.residual_rms, "1"),
        "detuning_at_max_field": q(tuning.predict_detuning(fit, p["predict_max_field"]), "Hz"),
        "max_field": q(p["predict_max_field"], "T"),
        "offsets": [q(o, "Hz") for o in fit.offsets],
        "events": _events(events),
    }
    up = [r for r in records if r.direction == "up"]
    down = [r for r in records if r.direction == "down"]
    if len(up) >= 2 and len(down) >= 2:
        h = tuning.hysteresis_metric(up, down)
        results["hysteresis"] = q(h.max_difference, "Hz")
    qi = [r.Q_i for r in records if r.Q_i is not None]
    if qi:
        results["Q_i_summary"] = {"min": q(min(qi), "1"), "max": q(max(qi), "1"),
                                  "mean": q(float(np.mean(qi)), "1")}
    return results, ["tuning.csv", "tuning.svg"]


def _protocol_count(p, raw, cfg, out):
    kappa = 2 * math.pi * p["f_r"] / p["Q"]
    t1_new = p["T1"] if p["T1"] is not None else 1 / fields.purcell_rate(p["g0"], kappa)
    ref = protocols.PhotonCountingScenario(p["T1_reference"], p["eta"], p["alpha"],
                                           p["snr_target"])
    new = protocols.PhotonCountingScenario(t1_new, p["eta"], p["alpha"], p["snr_target"])
    tau_ref = protocols.pc_integration_time(ref)
    tau_new = protocols.pc_integration_time(new)
    results = {
        "T1_reference": q(ref.T1, "s"), "T1": q(new.T1, "s"),
        "T1_reduction": q(ref.T1 / new.T1, "1"),
        "tau_m_reference": q(tau_ref, "s"), "tau_m": q(tau_new, "s"),
        "tau_m_reduction": q(tau_ref / tau_new, "1"),
        "regime_reference": protocols.pc_regime(ref).value,
        "regime": protocols.pc_regime(new).value,
        "snr_target": q(p["snr_target"], "1"),
    }
    if p["mc_trials"] > 0:
        seed = 0 if cfg.seed is None else cfg.seed
        snr, se = protocols.mc_photon_counting(ref, tau_ref, p["mc_trials"], seed)
        results["monte_carlo_reference"] = {"snr": q(snr, "1"), "stderr": q(se, "1"),
                                            "trials": q(p["mc_trials"], "1")}

    t1s = np.geomspace(p["grid_T1_min"], p["grid_T1_max"], p["grid_points"])
    alphas = [1.0, 10.0, 100.0, 1000.0]
    rows, table = [], {"T1": t1s * 1e3}
    for a in alphas:
        col = []
        for t1 in t1s:
            s = protocols.PhotonCountingScenario(t1, p["eta"], a, p["snr_target"])
            tau = protocols.pc_integration_time(s)
            rows.append((t1, a, tau, protocols.pc_regime(s).value))
            col.append(tau * 1e3)
        table[f"a{a:g}"] = col
    table["star_ref_x"], table["star_ref_y"] = [ref.T1 * 1e3], [tau_ref * 1e3]
    table["star_new_x"], table["star_new_y"] = [new.T1 * 1e3], [tau_new * 1e3]
    io.write_csv(out / "regime_map.csv", ("t1_s", "alpha_per_s", "tau_m_s", "regime"), rows)
    shot = p["snr_target"] ** 2 * (1 - p["eta"]) / p["eta"]
    x0 = t1s[0] * 1e3
    guides = (("shot-noise limited (slope 1)", x0, shot * x0, 1.0),
              ("dark-count limited (slope 2)", x0,
               (p["snr_target"] / p["eta"]) ** 2 * 2 * p["alpha"] * (x0 * 1e-3) ** 2 * 1e3, 2.0))
    series = tuple(Series("T1", f"a{a:g}", f"alpha = {a:g}/s") for a in alphas) + (
        Series("star_ref_x", "star_ref_y", "reference setup", style="k*"),
        Series("star_new_x", "star_new_y", "this resonator", style="m*"))
    emit_plot(PlotSpec("loglog", series, "T1", "ms", "tau_m for target SNR", "ms",
                       guides=guides), table, out / "regime_map.svg")
    return results, ["regime_map.csv", "regime_map.svg"]


def _protocol_dispersive(p, raw, cfg, out):
    s = protocols.DispersiveScenario.critically_coupled(
        p["g0"], p["Q"], p["f_r"], p["eta"], p["gamma_nr"], p["safety_factor"])
    grid = protocols.default_delta_grid(p["delta_points"], p["delta_min"], p["delta_max"])
    res = protocols.optimize_readout(s, grid)
    rows = []
    for r in res:
        if isinstance(r, protocols.ReadoutOptimum):
            rows.append((r.delta_opt, r.n_bar, r.tau_m_opt, r.T1_at_delta, r.fidelity,
                         r.F_r, r.P_e, r.power_dbm, ""))
        else:
            rows.append((r.delta, None, None, None, None, None, None, None, r.error))
    io.write_csv(out / "readout.csv",
                 ("delta_rad_s", "n_bar", "tau_m_opt_s", "t1_s", "fidelity", "f_r_readout",
                  "p_e", "power_dbm", "error"), rows)
    ok = [r for r in res if isinstance(r, protocols.ReadoutOptimum)]
    best = protocols.best_readout(res)
    emit_plot(PlotSpec("line", (Series("d", "F", "total fidelity"),
                                Series("d", "tau", "tau_m at optimum (ms / 10)")),
                       "detuning / 2pi", "MHz", "value", "1"),
              {"d": [r.delta_opt / (2 * math.pi * 1e6) for r in ok],
               "F": [r.fidelity for r in ok], "tau": [r.tau_m_opt * 100 for r in ok]},
              out / "readout.svg")
    _, within = protocols.twpa_power_check(best.n_bar, s.kappa, s.f_r, p["saturation"])
    results = {
        "kappa": q(s.kappa, "rad/s"),
        "best": {"delta": q(best.delta_opt, "rad/s"), "tau_m": q(best.tau_m_opt, "s"),
                 "fidelity": q(best.fidelity, "1"), "n_bar": q(best.n_bar, "1"),
                 "T1": q(best.T1_at_delta, "s"), "power": q(best.power_dbm, "dBm"),
                 "within_twpa_budget": within},
        "grid_points": q(len(res), "1"),
        "failed_points": q(len(res) - len(ok), "1"),
        "weak_dispersive_snr_5ms": q(protocols.weak_dispersive_snr(s, 5e-3), "1"),
    }
    if p["mc_trials"] > 0:
        seed = 0 if cfg.seed is None else cfg.seed
        delta = 2 * math.pi * p["mc_delta"]
        snr, se = protocols.mc_dispersive(s, delta, p["mc_tau_m"], p["mc_trials"], seed)
        results["monte_carlo"] = {
            "snr": q(snr, "1"), "stderr": q(se, "1"),
            "analytic_snr": q(protocols.dispersive_snr(s, delta, p["mc_tau_m"]), "1")}
    return results, ["readout.csv", "readout.svg"]


def _simulate(p, raw, cfg, out):
    seed = 0 if cfg.seed is None else cfg.seed
    params = spectroscopy.ResonanceFit(p["f_r"], p["Q_i"], p["Q_c"])
    bg = spectroscopy.DeembedParams(p["a"], p["phi0"], p["tau"])
    trace = spectroscopy.synthesize_trace(params, bg, p["noise_sigma"], seed,
                                          n_points=p["n_points"],
                                          span_linewidths=p["span_linewidths"])
    io.write_trace_csv(out / "trace.csv", trace)
    bs = np.linspace(0, p["b_max"], p["n_fields"])
    jumps = [] if p["jump_field"] is None else [(p["jump_field"], p["jump_step"])]
    sweep = tuning.synthesize_sweep(p["f_r0"], p["a_coeff"], bs, "up", p["noise_hz"],
                                    seed + 1, jumps)
    io.write_sweep_csv(out / "sweep.csv", sweep)
    results = {
        "trace_points": q(len(trace), "1"),
        "sweep_points": q(len(sweep), "1"),
        "injected": {"f_r": q(p["f_r"], "Hz"), "Q_i": q(p["Q_i"], "1"),
                     "Q_c": q(p["Q_c"], "1"), "a": q(p["a"], "1"),
                     "phi0": q(p["phi0"], "rad"), "tau": q(p["tau"], "s"),
                     "f_r0": q(p["f_r0"], "Hz"), "a_coeff": q(p["a_coeff"], "1/T^2")},
    }
    return results, ["trace.csv", "sweep.csv"]


PIPELINES = {
    "design": _design, "fit": _fit, "tune": _tune, "protocol-count": _protocol_count,
    "protocol-dispersive": _protocol_dispersive, "simulate": _simulate,
}


def execute(cfg: RunConfig):
    """Run a pipeline and write its artifacts; returns the results document."""
    p, raw = _load_params(cfg)
    if cfg.command in INPUT_SCHEMA and len(cfg.input_paths) != 1:
        raise ConfigError(f"{cfg.command} needs exactly one input file")
    out = cfg.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise FileIOError(f"cannot create {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise FileIOError(f"{out} is not writable")
    results, files = PIPELINES[cfg.command](p, raw, cfg, out)
    doc = {
        "command": cfg.command,
        "seed": q(cfg.seed, "1") if cfg.seed is not None else None,
        "results": results,
        "files": sorted(files + ["results.json"]),
    }
    io.write_json(out / "results.json", doc)
    return doc


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        execute(cfg)
    except PpresError as exc:
        stdout.write(io.dumps_json(exc.to_dict()))
        stderr.write(f"ppres {cfg.command}: {exc}\n")
        return 2 if exc.code in ("config-parse", "schema", "file-io") else 1
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="ppres", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("inputs", nargs="*", help="input CSV for fit/tune")
    ap.add_argument("--config", help="key = value parameter file")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config key (repeatable)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.command, list(args.inputs), Path(args.out), list(args.set),
                        args.seed, args.config)
    except PpresError as exc:
        sys.stdout.write(io.dumps_json(exc.to_dict()))
        sys.stderr.write(f"ppres: {exc}\n")
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
