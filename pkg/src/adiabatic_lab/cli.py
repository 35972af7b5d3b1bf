"""Batch front end: ``adiabatic-lab <experiment> --config run.yaml --output dir``.

Each run writes ``<experiment>_series.csv`` (one row per time, lambda, t or
beta sample) and then ``<experiment>_summary.json`` with scalar results and
the fully resolved configuration.  Identical configuration and seed give
byte-identical files.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import csv
import difflib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import yaml

from . import __version__
from .adiabatic import (
    POINTS_PER_PERIOD,
    TimeGrid,
    assemble_states,
    berry_cycle_phase,
    lambda_sweep_fit,
    oscillatory_decay_probe,
    propagate_amplitudes,
    propagate_leading,
    sampling_per_period,
    schedule_frames,
)
from .errors import LabError, ValidationError
from .models import (
    IDENTITY2,
    MODEL_KINDS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    _check_params,
    grid_model,
    make_schedule,
)
from .interaction import (
    SplitHamiltonian,
    assemble_ip_solution,
    dressed_frame_check,
    h0_expectations,
    interaction_ledger,
    neglect_ratio,
)
from .oracle import fidelity, propagate_dense
from .spectral import FrameSequence, geometric_phase, phase_distance
from .wk import beta_scaling, norm_defect, small_time_scan

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

NYQUIST_POINTS = 2
TWO_PI = 2 * math.pi
TOP_LEVEL_KEYS = ("experiment", "model", "lambda", "lambdas", "grid", "H0", "options", "output", "seed")
GRID_KEYS = ("t0", "t1", "steps")
GRID_MODEL_KEYS = {"L": 1.0, "m": 1.0, "n": 64, "potential": "sin", "amplitude": 1.0}
POTENTIALS = ("sin", "cos", "const")

DEFAULTS: dict[str, dict[str, Any]] = {
    "leading": {
        "model": {"kind": "gapped-lz"},
        "lambda": 5.0,
        "grid": {"t0": -2.0, "t1": 2.0, "steps": 4000},
        "options": {"level": 0, "tol": 1e-10, "exact_amplitudes": True},
    },
    "sweep": {
        "model": {"kind": "gapped-lz"},
        "lambdas": [float(10**p) for p in np.arange(1.0, 4.01, 0.5)],
        "grid": {"t0": 0.0, "t1": 2.0, "steps": 20000},
        "options": {"level": 0, "tol": 1e-10},
    },
    "oscillatory-probe": {
        "lambdas": [float(10**p) for p in np.arange(2.0, 4.01, 0.25)],
        "options": {"profile": "crossing", "width": 0.2, "window": [-1.0, 1.0], "points_per_period": 40},
    },
    "berry": {
        "model": {"kind": "berry-xz"},
        "lambda": 200.0,
        "grid": {"steps": 2000},
        "options": {"level": 0, "oracle": True, "tol": 1e-11, "gauge_trials": 3},
    },
    "ip-check": {
        "model": {"kind": "berry-xz"},
        "H0": {"x": 0.0, "y": 0.1, "z": 0.0, "identity": 0.0},
        "lambdas": [50.0, 200.0, 800.0],
        "grid": {"t0": 0.0, "t1": TWO_PI, "steps": 20000},
        "options": {"level": 0, "check_time": 0.5, "tol": 1e-11},
    },
    "wk-scan": {
        "model": {"kind": "grid"},
        "options": {"times": [0.05, 0.02, 0.01, 0.005], "long_time": 1.0, "short_time": 0.01},
    },
    "wk-beta": {
        "model": {"kind": "grid"},
        "options": {"betas": [0.1, 0.05, 0.025]},
    },
}
EXPERIMENTS = tuple(DEFAULTS)
TIME_GRID_EXPERIMENTS = ("leading", "sweep", "berry", "ip-check")


@dataclass(frozen=True)
class Finding:
    level: str  # "error" or "warning"
    message: str

    def __str__(self) -> str:
        return f"{self.level}: {self.message}"


def _suggest(key: str, valid) -> str:
    close = difflib.get_close_matches(key, list(valid), n=1)
    return f"; did you mean {close[0]!r}?" if close else f"; valid keys: {sorted(valid)}"


def resolve(config: dict) -> dict:
    """Fill experiment defaults into a raw configuration (no validation)."""
    config = copy.deepcopy(config)
    exp = config.get("experiment")
    if exp not in DEFAULTS:
        return config
    out = copy.deepcopy(DEFAULTS[exp])
    for key, value in config.items():
        if key == "model" and isinstance(value, dict) and "kind" in value:
            out["model"] = copy.deepcopy(value)
        elif key in ("grid", "options", "H0", "model") and isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    if "lambda" in config and "lambdas" in out and "lambdas" not in config:
        del out["lambdas"]
    if "lambdas" in config and "lambda" in out and "lambda" not in config:
        del out["lambda"]
    model = out.get("model")
    if isinstance(model, dict):
        kind = model.get("kind")
        if kind in MODEL_KINDS:
            model["params"] = {**MODEL_KINDS[kind][1], **model.get("params", {})}
        elif kind == "grid":
            model["params"] = {**GRID_MODEL_KEYS, **model.get("params", {})}
    out.setdefault("seed", 0)
    return out


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def validate(config: dict) -> list[Finding]:
    """Check a configuration; returns findings instead of raising."""
    findings: list[Finding] = []

    def error(msg):
        findings.append(Finding("error", msg))

    if not isinstance(config, dict):
        return [Finding("error", "configuration must be a mapping")]
    for key in config:
        if key not in TOP_LEVEL_KEYS:
            error(f"unknown key {key!r}{_suggest(key, TOP_LEVEL_KEYS)}")
    exp = config.get("experiment")
    if exp not in DEFAULTS:
        error(f"unknown experiment {exp!r}; valid experiments: {list(EXPERIMENTS)}")
        return findings
    cfg = resolve(config)
    defaults = DEFAULTS[exp]

    for key in cfg:
        if key in TOP_LEVEL_KEYS and key not in defaults and key not in ("experiment", "output", "seed", "lambda", "lambdas"):
            error(f"key {key!r} is not used by experiment {exp!r}")
    if not isinstance(cfg.get("seed"), int) or isinstance(cfg.get("seed"), bool):
        error("seed must be an integer")

    for key in cfg.get("options", {}):
        if key not in defaults.get("options", {}):
            error(f"unknown option {key!r} for {exp!r}{_suggest(key, defaults.get('options', {}))}")

    model = cfg.get("model")
    schedule = None
    if "model" in defaults:
        if not isinstance(model, dict):
            error("model must be a mapping with 'kind' and 'params'")
        else:
            for key in model:
                if key not in ("kind", "params"):
                    error(f"unknown model key {key!r}{_suggest(key, ('kind', 'params'))}")
            kind = model.get("kind")
            grid_exp = exp in ("wk-scan", "wk-beta")
            if grid_exp:
                if kind != "grid":
                    error(f"experiment {exp!r} needs model kind 'grid', got {kind!r}")
                else:
                    _validate_grid_model(model.get("params", {}), error)
            elif kind not in MODEL_KINDS:
                error(f"unknown model kind {kind!r}; valid kinds: {sorted(MODEL_KINDS)}")
            else:
                try:
                    _check_params(kind, model.get("params", {}))
                    schedule = make_schedule(kind, model.get("params"))
                except ValidationError as exc:
                    error(str(exc))

    lams = None
    if "lambda" in cfg:
        if not _is_number(cfg["lambda"]) or cfg["lambda"] <= 0:
            error(f"lambda must be a positive number, got {cfg['lambda']!r}")
        else:
            lams = [float(cfg["lambda"])]
    if "lambdas" in cfg:
        vals = cfg["lambdas"]
        if not isinstance(vals, list) or not all(_is_number(v) and v > 0 for v in vals):
            error("lambdas must be a list of positive numbers")
        elif any(b <= a for a, b in zip(vals, vals[1:])):
            error(f"lambdas must be strictly increasing, got {vals}")
        else:
            lams = [float(v) for v in vals]
        if exp in ("sweep", "oscillatory-probe") and isinstance(vals, list) and len(vals) < 4:
            error(f"{exp!r} needs at least 4 lambdas for a fit")
    if exp in ("sweep", "oscillatory-probe", "ip-check") and "lambdas" not in cfg:
        error(f"{exp!r} needs a 'lambdas' list")

    grid = None
    if exp in TIME_GRID_EXPERIMENTS:
        g = cfg.get("grid", {})
        for key in g:
            if key not in GRID_KEYS:
                error(f"unknown grid key {key!r}{_suggest(key, GRID_KEYS)}")
        if exp == "berry" and ("t0" in g or "t1" in g):
            error("berry grid covers exactly one period; give only 'steps'")
        steps = g.get("steps")
        if not isinstance(steps, int) or isinstance(steps, bool) or steps < 16:
            error(f"grid steps must be an integer >= 16, got {steps!r}")
        elif exp == "berry":
            if schedule is not None:
                if schedule.period is None:
                    error(f"model {schedule.kind!r} is not periodic; berry needs a cyclic model")
                else:
                    grid = TimeGrid(0.0, schedule.period, steps)
        elif not (_is_number(g.get("t0")) and _is_number(g.get("t1")) and g["t1"] > g["t0"]):
            error("grid needs numeric t0 < t1")
        else:
            grid = TimeGrid(float(g["t0"]), float(g["t1"]), steps)

    if exp == "ip-check":
        H0 = cfg.get("H0", {})
        for key, val in H0.items():
            if key not in ("x", "y", "z", "identity"):
                error(f"unknown H0 coefficient {key!r}{_suggest(key, ('x', 'y', 'z', 'identity'))}")
            elif not _is_number(val):
                error(f"H0 coefficient {key!r} must be a number")

    opts = cfg.get("options", {})
    if exp == "oscillatory-probe":
        if opts.get("profile") not in ("crossing", "gapped"):
            error(f"profile must be 'crossing' or 'gapped', got {opts.get('profile')!r}")
        w = opts.get("window")
        if not (isinstance(w, list) and len(w) == 2 and all(_is_number(v) for v in w) and w[1] > w[0]):
            error("window must be [a, b] with a < b")
    if exp == "wk-scan":
        times = opts.get("times")
        if not (isinstance(times, list) and len(times) >= 4 and all(_is_number(t) and t > 0 for t in times)):
            error("times must list at least 4 positive values")
        elif any(b >= a for a, b in zip(times, times[1:])):
            error("times must be strictly decreasing")
    if exp == "wk-beta":
        betas = opts.get("betas")
        if not (isinstance(betas, list) and len(betas) >= 3 and all(_is_number(b) and b > 0 for b in betas)):
            error("betas must list at least 3 positive values")
    if "tol" in opts and not (_is_number(opts["tol"]) and 1e-12 <= opts["tol"] <= 1e-6):
        error("tol must lie in [1e-12, 1e-6]")

    if schedule is not None and grid is not None and lams:
        target = schedule
        if exp == "ip-check":
            target = make_schedule(model["kind"], model.get("params")).plus_constant(
                _h0_matrix(cfg.get("H0", {})), max(lams)
            )
            ppp = sampling_per_period(target, 1.0, grid)
        else:
            ppp = sampling_per_period(target, max(lams), grid)
        # Only the exact amplitude equations integrate the oscillation itself;
        # leading-order runs need just enough points to track the phase.
        rule = POINTS_PER_PERIOD if exp == "leading" else NYQUIST_POINTS
        if ppp < rule:
            findings.append(
                Finding(
                    "warning",
                    f"oscillation undersampled: {ppp:.2f} grid points per period at lambda={max(lams):g} "
                    f"(rule: >= {rule}); increase grid steps",
                )
            )
    return findings


def _validate_grid_model(params: dict, error: Callable) -> None:
    for key in params:
        if key not in GRID_MODEL_KEYS:
            error(f"unknown grid-model parameter {key!r}{_suggest(key, GRID_MODEL_KEYS)}")
    if params.get("potential") not in POTENTIALS:
        error(f"potential must be one of {list(POTENTIALS)}")
    n = params.get("n")
    if not isinstance(n, int) or n < 16 or n & (n - 1):
        error(f"grid-model n must be a power of two >= 16, got {n!r}")
    for key in ("L", "m"):
        if not (_is_number(params.get(key)) and params[key] > 0):
            error(f"grid-model {key} must be positive")


def _h0_matrix(coeffs: dict) -> np.ndarray:
    return (
        coeffs.get("x", 0.0) * SIGMA_X
        + coeffs.get("y", 0.0) * SIGMA_Y
        + coeffs.get("z", 0.0) * SIGMA_Z
        + coeffs.get("identity", 0.0) * IDENTITY2
    )


def _build_grid_model(params: dict):
    L, g = params["L"], params["amplitude"]
    shapes = {
        "sin": lambda x: g * np.sin(2 * np.pi * x / L),
        "cos": lambda x: g * np.cos(2 * np.pi * x / L),
        "const": lambda x: g + 0 * x,
    }
    return grid_model(L, params["m"], shapes[params["potential"]], params["n"])


def _grid(cfg) -> TimeGrid:
    g = cfg["grid"]
    return TimeGrid(float(g["t0"]), float(g["t1"]), int(g["steps"]))


def _schedule(cfg):
    return make_schedule(cfg["model"]["kind"], cfg["model"]["params"])


def _columns(prefix: str, values: np.ndarray) -> dict[str, np.ndarray]:
    return {f"{prefix}_{n}": values[:, n] for n in range(values.shape[1])}


def run_leading(cfg):
    sched, grid, lam, opts = _schedule(cfg), _grid(cfg), float(cfg["lambda"]), cfg["options"]
    traj = propagate_leading(sched, lam, opts["level"], grid)
    exact = propagate_dense(sched, lam, traj.states[0], grid.t0, grid.t1, tol=opts["tol"], n_out=grid.steps)
    fid = np.array([fidelity(a, b) for a, b in zip(traj.states, exact.states)])
    series = {"t": traj.times, **_columns("E", traj.frames.energies), **_columns("gamma", traj.ledger.geometric),
              **_columns("theta", traj.ledger.dynamical), "fidelity_leading": fid}
    results = {"final_fidelity_leading": fid[-1], "oracle_steps": exact.steps,
               "oracle_error_estimate": exact.error_estimate,
               "max_norm_error": float(np.max(np.abs(np.linalg.norm(traj.states, axis=1) - 1)))}
    if opts["exact_amplitudes"]:
        amp = propagate_amplitudes(sched, lam, opts["level"], grid)
        fid_a = np.array([fidelity(a, b) for a, b in zip(amp.states, exact.states)])
        series.update(_columns("pop", np.abs(amp.amplitudes) ** 2))
        series["fidelity_amplitudes"] = fid_a
        results["final_fidelity_amplitudes"] = fid_a[-1]
        results["final_populations"] = (np.abs(amp.amplitudes[-1]) ** 2).tolist()
    return results, series


def run_sweep(cfg):
    opts = cfg["options"]
    res = lambda_sweep_fit(_schedule(cfg), cfg["lambdas"], _grid(cfg), opts["level"], opts["tol"])
    ratios = res.errors[1:] / res.errors[:-1]
    results = {"slope": res.slope, "slope_stderr": res.slope_stderr, "intercept": res.intercept,
               "monotone_within_5pct": bool(np.all(ratios <= 1.05))}
    return results, {"lambda": res.lambdas, "infidelity": res.errors}


def _probe_functions(opts):
    width = float(opts["width"])
    if opts["profile"] == "crossing":
        return (lambda t: t), (lambda t: np.exp(-(t**2) / (2 * width**2)))
    a = float(opts["window"][0])
    return (lambda t: np.ones_like(t)), (lambda t: np.exp(-((t - a) ** 2) / (2 * width**2)))


def run_probe(cfg):
    opts = cfg["options"]
    gap, env = _probe_functions(opts)
    res = oscillatory_decay_probe(gap, env, cfg["lambdas"], tuple(opts["window"]), int(opts["points_per_period"]))
    results = {"slope": res.slope, "slope_stderr": res.slope_stderr, "intercept": res.intercept}
    return results, {"lambda": res.lambdas, "abs_integral": res.errors}


def run_berry(cfg):
    sched, lam, opts = _schedule(cfg), float(cfg["lambda"]), cfg["options"]
    steps = int(cfg["grid"]["steps"])
    cyc = berry_cycle_phase(sched, lam, steps)
    traj = cyc.trajectory
    level = int(opts["level"])
    rng = np.random.default_rng(cfg["seed"])
    base = geometric_phase(traj.frames, closed=True)[-1]
    gauge_dev = 0.0
    for _ in range(int(opts["gauge_trials"])):
        chi = np.exp(1j * rng.uniform(-np.pi, np.pi, traj.frames.energies.shape))
        scrambled = FrameSequence(traj.frames.times, traj.frames.energies, traj.frames.basis * chi[:, None, :])
        gauge_dev = max(gauge_dev, float(np.max(phase_distance(geometric_phase(scrambled, closed=True)[-1], base))))
    c = np.zeros(sched.dim, dtype=complex)
    c[level] = 1.0
    states = assemble_states(traj.frames, traj.ledger, c)
    results = {
        "level": level,
        "geometric_phase": float(cyc.geometric_phase[level]),
        "geometric_phase_per_level": cyc.geometric_phase.tolist(),
        "distance_from_pi": float(phase_distance(cyc.geometric_phase[level], np.pi)),
        "dynamical_phase": float(cyc.dynamical_phase[level]),
        "cycle_overlap_re": float(cyc.overlap[level].real),
        "cycle_overlap_im": float(cyc.overlap[level].imag),
        "transported_overlap_re": float(cyc.transported_overlap[level].real),
        "transported_overlap_im": float(cyc.transported_overlap[level].imag),
        "gauge_invariance_deviation": gauge_dev,
    }
    series = {"t": traj.times, **_columns("E", traj.frames.energies), **_columns("gamma", traj.ledger.geometric),
              **_columns("theta", traj.ledger.dynamical)}
    if opts["oracle"]:
        exact = propagate_dense(sched, lam, states[0], 0.0, sched.period, tol=opts["tol"], n_out=steps)
        fid = np.array([fidelity(a, b) for a, b in zip(states, exact.states)])
        series["fidelity_leading"] = fid
        ov = np.vdot(exact.states[0], exact.final) * np.exp(1j * cyc.dynamical_phase[level])
        results.update({"final_fidelity_leading": fid[-1], "oracle_transported_overlap_re": float(ov.real),
                        "oracle_transported_overlap_im": float(ov.imag)})
    return results, series


def run_ip_check(cfg):
    V, grid, opts = _schedule(cfg), _grid(cfg), cfg["options"]
    H0 = _h0_matrix(cfg["H0"])
    lams = [float(v) for v in cfg["lambdas"]]
    split = SplitHamiltonian(H0, V, lams[0])
    report = dressed_frame_check(split, float(opts["check_time"]))
    ledger = interaction_ledger(split, grid, gauge_seed=cfg["seed"])
    frames = schedule_frames(V, grid.times)
    alpha_dot = np.gradient(ledger.alpha_extracted, grid.dt, axis=0, edge_order=2)
    infid, ratios = [], []
    for lam in lams:
        sp = split.with_lambda(lam)
        sol = assemble_ip_solution(sp, opts["level"], grid)
        exact = propagate_dense(sp.full_schedule(), 1.0, sol.states[0], grid.t0, grid.t1, tol=opts["tol"])
        infid.append(1 - fidelity(sol.states[-1], exact.final))
        ratios.append(neglect_ratio(sp, grid).value)
    results = {
        "spectrum_error": report.spectrum_error,
        "overlap_magnitude_defect": report.max_overlap_defect,
        "alpha_rate_error": float(np.max(np.abs(alpha_dot + h0_expectations(H0, frames)))),
        "gamma_interaction_error": float(np.max(np.abs(ledger.gamma_interaction - ledger.gamma))),
        "infidelity_strictly_decreasing": bool(all(b < a for a, b in zip(infid, infid[1:]))),
    }
    return results, {"lambda": np.array(lams), "infidelity": np.array(infid), "neglect_ratio": np.array(ratios)}


def run_wk_scan(cfg):
    model, opts = _build_grid_model(cfg["model"]["params"]), cfg["options"]
    scan = small_time_scan(model, opts["times"], opts["long_time"], opts["short_time"])
    times = scan.fit.lambdas
    defects = np.array([norm_defect(model, t) for t in times])
    results = {"exponent": scan.fit.slope, "exponent_stderr": scan.fit.slope_stderr,
               "breakdown_ratio": scan.breakdown_ratio}
    return results, {"t": times, "max_abs_error": scan.fit.errors, "norm_defect": defects}


def run_wk_beta(cfg):
    model = _build_grid_model(cfg["model"]["params"])
    sc = beta_scaling(model, cfg["options"]["betas"])
    results = {"exponent": sc.fit.slope, "quartic_prefactor": sc.prefactor,
               "within_quartic_bound": bool(np.all(sc.within_quartic_bound))}
    return results, {"beta": sc.fit.lambdas, "residual": sc.fit.errors,
                     "quartic_bound": sc.prefactor * sc.fit.lambdas**4}


RUNNERS: dict[str, Callable] = {
    "leading": run_leading,
    "sweep": run_sweep,
    "oscillatory-probe": run_probe,
    "berry": run_berry,
    "ip-check": run_ip_check,
    "wk-scan": run_wk_scan,
    "wk-beta": run_wk_beta,
}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def write_series(path: Path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    data = [np.asarray(columns[n], dtype=float) for n in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*data):
            w.writerow([format(v, ".17g") for v in row])


def execute(config: dict, output: Optional[Path] = None) -> dict:
    """Validate, run and write artifacts; returns the summary document."""
    errors = [f for f in validate(config) if f.level == "error"]
    if errors:
        raise ValidationError("; ".join(f.message for f in errors))
    cfg = resolve(config)
    out = Path(output or cfg.get("output") or f"runs/{cfg['experiment']}")
    out.mkdir(parents=True, exist_ok=True)
    exp = cfg["experiment"]
    results, series = RUNNERS[exp](cfg)
    summary = {
        "experiment": exp,
        "version": __version__,
        "config": _plain({k: v for k, v in cfg.items() if k != "output"}),
        "results": _plain(results),
    }
    stem = exp.replace("-", "_")
    write_series(out / f"{stem}_series.csv", series)
    with open(out / f"{stem}_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def load_config(path: Path) -> dict:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: configuration must be a mapping")
    return data


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adiabatic-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", type=Path, help="YAML or JSON run configuration")
        sp.add_argument("--output", type=Path, help="output directory (overrides config)")
        sp.add_argument("--seed", type=int, help="seed for randomized gauge checks")
        sp.add_argument("--validate-only", action="store_true", help="check the configuration and exit")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else {}
    except (OSError, yaml.YAMLError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if config.get("experiment", args.experiment) != args.experiment:
        print(f"error: config is for {config['experiment']!r}, not {args.experiment!r}", file=sys.stderr)
        return EXIT_VALIDATION
    config["experiment"] = args.experiment
    if args.seed is not None:
        config["seed"] = args.seed
    findings = validate(config)
    for f in findings:
        print(f, file=sys.stderr)
    if any(f.level == "error" for f in findings):
        return EXIT_VALIDATION
    if args.validate_only:
        return EXIT_OK
    try:
        summary = execute(config, args.output)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except LabError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(summary["results"], indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
