"""Command-line runner: ``dissipator <subcommand> [--config FILE] [overrides]``.

Exit status is 0 on success, 2 for configuration errors and 3 for
numerical or module failures; errors are printed to stderr as one JSON
object.
"""

import argparse
import json
import math
import sys
import time

import numpy as np
import yaml

from . import __version__, analytics, experiments
from .calibration import FitError, fit_exponential, fit_lorentzian
from .config import ConfigError, build_config, describe_device, load_yaml
from .dynamics import NumericalError
from .io import MANIFEST_SCHEMA, OutputWriter, read_xy_csv, write_manifest
from .model import dissipator_frequency
from .units import UnitError, constants_hash, to_ghz, to_mhz

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

ANALYTIC_FORMULAS = ("thermal", "cavity-temperature", "dephasing", "loss", "flux")


def _mhz(x):
    return float(to_mhz(x))


# -- experiment runners ------------------------------------------------------
# each returns (list of (filename, rows, header or None), results dict)

def _axis_out(axis, v):
    return _mhz(v) if axis.unit == "MHz" else float(v)


def run_ringdown(cfg):
    res = experiments.ringdown_spectroscopy(cfg.device, cfg.sweep, cfg.options["n_times"], cfg.options["cutoff"],
                                            threads=cfg.threads)
    a1, a2 = cfg.sweep.axes
    rows = [(_axis_out(a1, x), _axis_out(a2, y), v, u) for x, y, v, u in res.rows()]
    zero = a2.values == 0
    results = {
        "max_rate_per_us": float(np.nanmax(res.rates)),
        "omega_p_at_max_MHz": _mhz(a1.values[np.unravel_index(np.nanargmax(res.rates), res.rates.shape)[0]]),
        "failed_points": len(res.failures),
    }
    if zero.any():
        results["zero_drive_rate_per_us"] = float(np.nanmean(res.rates[:, zero]))
    return [("ringdown.csv", rows, None)], results


def run_reset(cfg):
    o = cfg.options
    res = experiments.reset_experiment(cfg.device, o["g_p"], o["n_bar0"], cfg.sweep.axes[0].values,
                                       gamma_2_0=o["gamma_2_0"], gap=o["gap"], threshold=o["threshold"])
    results = {"gamma_cav_per_us": res.gamma_cav, "recovery_time_us": res.recovery_time,
               "recovery_time_grid_us": res.recovery_time_grid}
    return [("reset.csv", res.rows(), None)], results


def run_cool(cfg):
    g_axis, n_axis = cfg.sweep.axes
    res = experiments.refrigeration_experiment(cfg.device, g_axis.values, n_axis.values, cfg.options["gamma_2_0"])
    rows = [(_mhz(g), n, v, u) for g, n, v, u in res.rows()]
    results = {"zero_power_gamma_2e_per_us": [float(x) for x in res.gamma_2e[0]],
               "max_power_gamma_2e_per_us": [float(x) for x in res.gamma_2e[-1]]}
    return [("cool.csv", rows, None)], results


def run_spectroscopy(cfg):
    o = cfg.options
    res = experiments.flux_spectroscopy(cfg.device, cfg.sweep.axes[0].values, o["include_filter"], o["include_qubit"])
    rows = [(p, k, _mhz(w), u) for p, k, w, u in res.rows()]
    results = {"branch_labels": list(res.labels)}
    lo, hi = experiments.dissipator_range(cfg.device)
    targets = [("c", cfg.device.omega_c)] + ([("f", cfg.device.omega_f)] if o["include_filter"] else [])
    for mode, w in targets:
        if lo < w < hi:
            gap, phi = experiments.crossing_gap(cfg.device, mode, o["include_filter"], o["include_qubit"])
            results[f"gap_{mode}_MHz"] = _mhz(gap)
            results[f"phi_{mode}"] = phi
    return [("spectroscopy.csv", rows, None)], results


def evaluate_analytic(cfg):
    """Evaluate one closed-form expression; returns ``(value, unit)``."""
    o, p = cfg.options, cfg.device
    f = o["formula"]
    if f == "thermal":
        return analytics.thermal_occupation(o["f"], o["T"]), "photons"
    if f == "cavity-temperature":
        return analytics.driven_cavity_temperature(p, _need(o, "kappa_eff")) * 1e3, "mK"
    if f == "dephasing":
        kappa = o.get("kappa", p.kappa_c)
        return analytics.photon_dephasing(p.chi, kappa, _need(o, "n_bar"), o["m"]), "1/us"
    if f == "loss":
        return analytics.effective_loss(_need(o, "g_p"), p.kappa_diss).rate, "1/us"
    if f == "flux":
        return to_ghz(dissipator_frequency(p, _need(o, "phi"))), "GHz"
    raise ConfigError(f"unknown formula (known: {', '.join(ANALYTIC_FORMULAS)})", "options.formula")


def _need(options, key):
    if key not in options:
        raise ConfigError("required for this formula", f"options.{key}")
    return options[key]


def run_fit(cfg, rng):
    o = cfg.options
    files = []
    if "data" in o:
        x, y = read_xy_csv(o["data"], o.get("x_column"), o.get("y_column"))
    else:
        x = np.linspace(0.0, o["t_max"], o["points"])
        clean = o["amplitude"] * np.exp(-o["rate"] * x) + o["offset"]
        y = clean + o["noise"] * o["amplitude"] * rng.standard_normal(x.size)
        files.append(("data.csv", [(float(a), float(b)) for a, b in zip(x, y)], ("x", "y")))
    if o["model"] == "exponential":
        fit = fit_exponential(x, y)
    elif o["model"] == "lorentzian":
        fit = fit_lorentzian(x, y)
    else:
        raise ConfigError("model must be 'exponential' or 'lorentzian'", "options.model")
    rows = [(n, float(v), float(e)) for n, v, e in zip(fit.names, fit.values, fit.uncertainties)]
    files.append(("fit.csv", rows, ("parameter", "value", "uncertainty")))
    results = {k: (v if not isinstance(v, float) or math.isfinite(v) else str(v)) for k, v in fit.as_dict().items()}
    return files, results


RUNNERS = {"ringdown": run_ringdown, "reset": run_reset, "cool": run_cool, "spectroscopy": run_spectroscopy}


# -- orchestration -----------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def run(cfg, out_dir=None, stdout=None, write=True):
    """Execute a validated :class:`~dissipator.config.RunConfig`; returns the manifest.

    With ``write=False`` nothing is written to disk (used for bare
    ``analytic`` queries) and the manifest lists no files.
    """
    stdout = stdout or sys.stdout
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    out_dir = out_dir or cfg.output
    if cfg.experiment == "analytic":
        value, unit = evaluate_analytic(cfg)
        print(f"{value:.3g}", file=stdout)
        files, results = [("analytic.csv", [(cfg.options["formula"], float(value), unit)],
                           ("formula", "value", "unit"))], {"value": float(value), "unit": unit}
    elif cfg.experiment == "fit":
        files, results = run_fit(cfg, rng)
    else:
        files, results = RUNNERS[cfg.experiment](cfg)

    writer = OutputWriter(out_dir)
    for name, rows, header in files:
        if header is None:
            writer.add_csv(name, rows)
        else:
            writer.add_csv(name, rows, header)
    entries = writer.flush() if write else []
    manifest = {
        "version": __version__,
        "experiment": cfg.experiment,
        "config": _jsonable({"raw": cfg.raw, "device": describe_device(cfg.device), "options": cfg.options,
                             "threads": cfg.threads, "output": out_dir}),
        "constants_hash": constants_hash(),
        "wall_time_s": time.perf_counter() - t0,
        "seed": cfg.seed,
        "axes": [{"name": a.name, "unit": a.unit, "size": len(a)} for a in cfg.sweep.axes] if cfg.sweep else [],
        "files": entries,
        "results": _jsonable(results),
    }
    if write:
        write_manifest(out_dir, manifest)
    if cfg.experiment != "analytic":
        print(json.dumps(manifest["results"], sort_keys=True), file=stdout)
    return manifest


def _parse_set(items):
    """``device.kappa_c=500kHz`` style overrides into a nested dict."""
    tree = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key.path=value", "--set")
        key, value = item.split("=", 1)
        parts = key.split(".")
        node = tree
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot nest under scalar in {key!r}", "--set")
        node[parts[-1]] = _scalar(value)
    return tree


def _scalar(text):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def _merge(base, extra):
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="dissipator", description="Parametric cavity-reset simulations.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="experiment", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="YAML run configuration")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="seed for synthetic noise")
        p.add_argument("--threads", type=int, help="worker threads for sweeps")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", dest="overrides",
                       help="override a config entry, e.g. device.kappa_c=500kHz (repeatable)")
        return p

    common(sub.add_parser("ringdown", help="ringdown-rate map over drive frequency and strength"))
    p = common(sub.add_parser("reset", help="qubit decoherence recovery after readout"))
    p.add_argument("--g-p", dest="g_p", help="exchange rate, e.g. 10MHz ('none' for no drive)")
    p.add_argument("--n-bar0", dest="n_bar0", type=float)
    common(sub.add_parser("cool", help="echo decoherence versus exchange rate and injected photons"))
    common(sub.add_parser("spectroscopy", help="eigenfrequency branches over flux"))
    p = common(sub.add_parser("analytic", help="evaluate a closed-form expression"))
    p.add_argument("formula", nargs="?", choices=ANALYTIC_FORMULAS)
    p.add_argument("--f", help="mode frequency, e.g. 5.594GHz")
    p.add_argument("--T", help="temperature, e.g. 115mK")
    p.add_argument("--kappa-eff", dest="kappa_eff", help="drive-induced loss, e.g. 54/us")
    p.add_argument("--kappa", help="cavity linewidth, e.g. 477kHz")
    p.add_argument("--n-bar", dest="n_bar", type=float)
    p.add_argument("--m", type=int, choices=(1, 2))
    p.add_argument("--g-p", dest="g_p", help="exchange rate, e.g. 11MHz")
    p.add_argument("--phi", type=float, help="flux bias in flux quanta")
    p = common(sub.add_parser("fit", help="fit a ringdown or line shape from a two-column CSV"))
    p.add_argument("--data", help="CSV with x, y columns (synthetic data when omitted)")
    p.add_argument("--model", choices=("exponential", "lorentzian"))
    p.add_argument("--x", dest="x_column", metavar="NAME", help="x column name in --data")
    p.add_argument("--y", dest="y_column", metavar="NAME", help="y column name in --data")
    return parser


OPTION_FLAGS = ("formula", "f", "T", "kappa_eff", "kappa", "n_bar", "m", "g_p", "phi", "n_bar0", "data", "model",
                "x_column", "y_column")


def config_from_args(args):
    data = load_yaml(args.config) if args.config else {}
    data = data if data is not None else {}
    if not isinstance(data, dict):
        raise ConfigError("top level of the config must be a mapping")
    options = {}
    for flag in OPTION_FLAGS:
        v = getattr(args, flag, None)
        if v is not None:
            if flag == "g_p" and isinstance(v, str) and v.lower() == "none":
                v = None
            options[flag] = v
    if options:
        data = _merge(data, {"options": options})
    data = _merge(data, _parse_set(args.overrides))
    if args.seed is not None:
        data["seed"] = args.seed
    if args.threads is not None:
        data["threads"] = args.threads
    return build_config(data, args.experiment)


def _fail(code, exc, stderr):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if getattr(exc, "path", None):
        payload["field"] = exc.path
    print(json.dumps(payload, sort_keys=True), file=stderr)
    return code


def main(argv=None, stdout=None, stderr=None):
    stderr = stderr or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        # bare formula queries only print unless an output location is given
        write = not (cfg.experiment == "analytic" and args.out is None and "output" not in cfg.raw)
        run(cfg, args.out or cfg.output, stdout=stdout, write=write)
    except (ConfigError, UnitError) as exc:
        return _fail(EXIT_CONFIG, exc, stderr)
    except (NumericalError, FitError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERICAL, exc, stderr)
    return EXIT_OK


__all__ = ["main", "run", "build_parser", "config_from_args", "MANIFEST_SCHEMA"]

if __name__ == "__main__":
    sys.exit(main())
