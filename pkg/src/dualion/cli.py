"""Command-line runner: dispatch experiments, write CSV curves, fit
summaries and figures.

Exit codes: 0 success, 2 configuration error, 3 fit non-convergence,
4 output I/O error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import estimators, protocols
from .config import ConfigError, RunConfig, load_config, reference_config_text
from .protocols import MUB_LABELS, CurveRecord, ExperimentResult

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FIT = 3
EXIT_IO = 4


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def write_curve_csv(path: Path, records: list[CurveRecord], sweep_name: str = "sweep_value") -> None:
    with_mub = any(r.per_mub is not None for r in records)
    header = [sweep_name, "mean", "stderr"]
    if with_mub:
        header += [f"mub_{label}" for label in MUB_LABELS]
    lines = [",".join(header)]
    for r in records:
        row = [_fmt(r.sweep_value), _fmt(r.mean), _fmt(r.stderr)]
        if with_mub:
            row += [_fmt(v) for v in (r.per_mub or (math.nan,) * 6)]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def write_fit_summary(path: Path, blocks: list[dict]) -> None:
    chunks = []
    for block in blocks:
        lines = [f"{key} = {value}" for key, value in block.items()]
        chunks.append("\n".join(lines))
    path.write_text("\n\n".join(chunks) + "\n")


def _fit_block(name: str, fit, config: RunConfig, info: dict | None = None) -> dict:
    block = {
        "fit": name,
        "model": fit.model,
        "converged": "true" if fit.converged else "false",
        "iterations": fit.iterations,
        "residual_rss": _fmt(fit.residual_rss),
        "seed": config.seed,
        "config_hash": config.config_hash(),
    }
    for key, value in fit.params.items():
        block[f"param_{key}"] = _fmt(value)
    for key, value in fit.stderrs.items():
        block[f"stderr_{key}"] = _fmt(value)
    for key, value in (info or {}).items():
        block[f"info_{key}"] = _fmt(value)
    return block


def _error_block(name: str, message: str, config: RunConfig) -> dict:
    return {
        "fit": name,
        "model": "none",
        "converged": "false",
        "error": message,
        "seed": config.seed,
        "config_hash": config.config_hash(),
    }


def _curve_arrays(records):
    x = np.array([r.sweep_value for r in records])
    y = np.array([r.mean for r in records])
    err = np.array([r.stderr for r in records])
    return x, y, err


def _run_experiment(config: RunConfig) -> ExperimentResult:
    plan = config.plan()
    kind = config.experiment
    if kind == "conversion_cycle":
        return protocols.run_conversion_cycle(plan, config.conversion_settings())
    if kind == "raman_crosstalk":
        return protocols.run_raman_crosstalk(
            plan, config.crosstalk_rates(), config.f_spam(), config.raman_settings(),
            prep_discard=config.values["crosstalk"]["prep_discard"],
        )
    if kind in ("pump_detect_crosstalk_0", "pump_detect_crosstalk_1"):
        return protocols.run_pump_detect_crosstalk(
            plan, config.crosstalk_rates(), config.f_spam(),
            with_pi_pulse=kind.endswith("_1"),
            s_outcome_deviation=config.values["crosstalk"]["s_outcome_deviation"],
            prep_discard=config.values["crosstalk"]["prep_discard"],
        )
    if kind in ("sympathetic_cooling", "global_cooling"):
        return protocols.run_sympathetic_cooling(
            plan, config.cooling_settings(), config.modes(), config.crosstalk_rates(),
            config.f_spam(), config.thermometry_settings(),
        )
    if kind in ("rb_s_qubit", "rb_f_qubit"):
        return protocols.run_rb(
            plan, config.rb_channel("s" if kind == "rb_s_qubit" else "f"),
            config.rb_spam(), config.values["rb"]["sequences_per_point"],
        )
    if kind == "thermometry":
        t = config.values["thermometry"]
        from .motion import ThermalState
        thermal = ThermalState(temperature=t["temperature"])
        return protocols.run_thermometry(
            plan, thermal, config.modes(), 2 * math.pi * t["rabi_freq_hz"], trace_shots=t["trace_shots"],
        )
    raise ConfigError(f"unknown experiment {kind}")


def _fit_and_report(config: RunConfig, result: ExperimentResult, out: Path):
    """Fit the experiment curves; returns (summary blocks, list of figure specs)."""
    kind = result.kind
    blocks = []
    figures = []
    failed = False
    x, y, err = _curve_arrays(result.curve)

    def attempt(name, fn, info=None):
        nonlocal failed
        try:
            fit = fn()
        except ValueError as exc:
            failed = True
            blocks.append(_error_block(name, str(exc), config))
            return None
        blocks.append(_fit_block(name, fit, config, info))
        if not fit.converged:
            failed = True
        return fit

    if kind in ("conversion_cycle", "raman_crosstalk", "pump_detect_crosstalk_0", "pump_detect_crosstalk_1"):
        info = dict(result.info)
        if kind == "raman_crosstalk":
            # Diagnostic only: relative focused-beam intensity at the neighbor ion.
            from .noise import spatial_crosstalk_ratio
            geo = config.values["geometry"]
            info["spatial_intensity_ratio"] = spatial_crosstalk_ratio(
                geo["beam_waist_radius"], geo["ion_separation"]
            )
        fit = attempt("fidelity_decay", lambda: estimators.fit_power_decay(x, y, err), info=info)
        overlay = None
        if fit is not None:
            f0, eps = fit.params["F0"], fit.params["eps"]
            overlay = (lambda xs: f0 * (1.0 - eps) ** xs, "power-decay fit")
        xlabel = "rounds" if kind == "conversion_cycle" else "cycles"
        figures.append(("figure_curve.png", result.curve, xlabel, "MUB-averaged fidelity", kind, overlay))
    elif kind in ("sympathetic_cooling", "global_cooling"):
        t_ss = config.values["cooling"]["steady_temperature"]
        dt = np.clip(y - t_ss, 1e-9, None)
        fit = attempt("temperature_relaxation", lambda: estimators.fit_exp_decay(x, dt, err), info=result.info)
        overlay = None
        if fit is not None:
            f0, tc = fit.params["F0"], fit.params["Tc"]
            overlay = (lambda xs: t_ss + f0 * np.exp(-xs / tc), "relaxation fit")
        figures.append(("figure_curve.png", result.curve, "cooling time (s)", "fitted temperature (K)", kind, overlay))
        if "f_coherence" in result.traces:
            coh = result.traces["f_coherence"]
            cx, cy, cerr = _curve_arrays(coh)
            t_c_cfg = config.values["crosstalk"]["t_c"]
            derived = -math.expm1(-1e-3 / t_c_cfg)
            cfit = attempt(
                "f_coherence",
                lambda: estimators.fit_exp_decay(cx, cy, cerr),
                info={"derived_crosstalk_error_1ms": derived},
            )
            overlay = None
            if cfit is not None:
                f0c, tcc = cfit.params["F0"], cfit.params["Tc"]
                overlay = (lambda xs: f0c * np.exp(-xs / tcc), "exponential fit")
            figures.append(("figure_coherence.png", coh, "cooling light on (s)", "F-qubit MUB fidelity", "spectator coherence", overlay))
    elif kind in ("rb_s_qubit", "rb_f_qubit"):
        fit = attempt("rb_decay", lambda: estimators.fit_rb(x, y, err))
        overlay = None
        if fit is not None:
            a, b, p = fit.params["A"], fit.params["B"], fit.params["p"]
            overlay = (lambda xs: a * p**xs + b, "RB fit")
        figures.append(("figure_curve.png", result.curve, "sequence length", "survival probability", kind, overlay))
    elif kind == "thermometry":
        modes = config.modes()
        t_cfg = config.values["thermometry"]
        fit = attempt(
            "thermal_rabi",
            lambda: estimators.fit_thermal_rabi(x, y, err, modes=modes),
            info={
                "configured_T": t_cfg["temperature"],
                "configured_Omega0": 2 * math.pi * t_cfg["rabi_freq_hz"],
            },
        )
        overlay = None
        if fit is not None:
            from .motion import ThermalState, thermal_carrier_signal
            omega0, temp = fit.params["Omega0"], fit.params["T"]
            overlay = (
                lambda xs: np.asarray(thermal_carrier_signal(xs, omega0, ThermalState(temperature=temp), modes)),
                "thermal-Rabi fit",
            )
        figures.append(("figure_curve.png", result.curve, "probe time (s)", "survival probability", kind, overlay))

    # Secondary traces get plain figures.
    trace_names = {"s_rabi": ("figure_trace.png", "Raman drive time (s)", "P(|1>)"),
                   "s_outcome": ("figure_trace.png", "cycles", "S-qubit bright probability")}
    for name, trace in result.traces.items():
        if name in trace_names:
            fname, xlabel, ylabel = trace_names[name]
            figures.append((fname, trace, xlabel, ylabel, name, None))
    return blocks, figures, failed


def run(config: RunConfig) -> int:
    """Execute the configured experiment; write curve, fit summary, figures."""
    out = Path(config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: cannot write to output directory: {exc}", file=sys.stderr)
        return EXIT_IO
    result = _run_experiment(config)
    sweep_names = {
        "conversion_cycle": "rounds",
        "raman_crosstalk": "n_pi2_pulses",
        "pump_detect_crosstalk_0": "cycles",
        "pump_detect_crosstalk_1": "cycles",
        "sympathetic_cooling": "cooling_time_s",
        "global_cooling": "cooling_time_s",
        "rb_s_qubit": "sequence_length",
        "rb_f_qubit": "sequence_length",
        "thermometry": "probe_time_s",
    }
    try:
        write_curve_csv(out / "curve.csv", result.curve, sweep_names[result.kind])
        for name, trace in result.traces.items():
            fname = "curve_coherence.csv" if name == "f_coherence" else f"trace_{name}.csv"
            write_curve_csv(out / fname, trace, "sweep_value")
        blocks, figures, failed = _fit_and_report(config, result, out)
        write_fit_summary(out / "fit_summary.txt", blocks)
        if config.figures:
            from . import plots
            for fname, records, xlabel, ylabel, title, overlay in figures:
                plots.render_curve(out / fname, records, xlabel, ylabel, title, fit=overlay)
    except OSError as exc:
        print(f"error: output write failed: {exc}", file=sys.stderr)
        return EXIT_IO
    if failed:
        print("warning: at least one fit did not converge", file=sys.stderr)
        return EXIT_FIT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualion",
        description="Simulate dual-type trapped-ion qubit experiments and fit the resulting curves.",
    )
    parser.add_argument("--config", metavar="PATH", help="TOML configuration file (defaults apply when omitted)")
    parser.add_argument("--experiment", metavar="NAME", help="experiment kind (overrides the config)")
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed (overrides the config)")
    parser.add_argument("--shots", type=int, metavar="N", help="shots per sweep point (overrides the config)")
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
    parser.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    parser.add_argument(
        "--emit-reference-config", action="store_true",
        help="print the full default configuration as TOML and exit",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.emit_reference_config:
        print(reference_config_text())
        return EXIT_OK
    overrides = {}
    if args.experiment is not None:
        overrides["run.experiment"] = args.experiment
    if args.seed is not None:
        overrides["run.seed"] = args.seed
    if args.shots is not None:
        overrides["run.shots"] = args.shots
    if args.out is not None:
        overrides["run.out_dir"] = args.out
    if args.no_figures:
        overrides["run.figures"] = False
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
