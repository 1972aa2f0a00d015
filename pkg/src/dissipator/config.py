"""YAML run configuration: parsing, unit conversion, defaults and validation.

Every frequency in a config file carries a unit suffix (``GHz``, ``MHz``,
``kHz``, ``Hz``); temperatures use ``K``/``mK``, times ``us``/``ns``, rates
``/us``.  Values are converted to rad/us, kelvin and us here and nowhere
else.  Loss rates (``kappa_*``) may alternatively be given as decay rates
(``3.0 /us``).  A config may omit the ``device`` block entirely:

=================  ===========  =================  ===========
field              default      field              default
=================  ===========  =================  ===========
omega_c            5.594 GHz    g_q                53.9 MHz
omega_q            3.368 GHz    g_c                145 MHz
omega_f            8.6 GHz      g_f                535 MHz
omega_diss_max     15.3 GHz     kappa_c            477 kHz
omega_diss         8.6 GHz      kappa_f            120 MHz
alpha_q            -172 MHz     kappa_diss         60 MHz
alpha_diss         -350 MHz     chi                200 kHz
d                  0.085        T0, T_bath         115 mK
diss_levels        2
=================  ===========  =================  ===========
"""

from dataclasses import dataclass, field

import numpy as np
import yaml

from .experiments import ECHO_GAMMA_2_0, RESET_GAMMA_2_0, RESET_GAP, Axis, SweepGrid
from .model import DeviceParams
from .units import UnitError, parse_frequency, parse_rate, parse_temperature, parse_time, to_mhz

EXPERIMENTS = ("ringdown", "reset", "cool", "spectroscopy", "analytic", "fit")
TOP_LEVEL_KEYS = ("experiment", "device", "sweep", "output", "seed", "threads", "options")

_FREQUENCY_FIELDS = {"omega_c", "omega_q", "omega_f", "omega_diss_max", "omega_diss", "alpha_q", "alpha_diss",
                     "g_q", "g_c", "g_f", "kappa_c", "kappa_f", "kappa_diss", "chi"}
_TEMPERATURE_FIELDS = {"T0", "T_bath"}

# axis name -> (kind, unit label written to the manifest)
AXIS_KINDS = {
    "omega_p": ("frequency", "MHz"),
    "g_p": ("frequency", "MHz"),
    "epsilon_p": ("frequency", "MHz"),
    "n_inj": ("number", "photons"),
    "phi": ("number", "flux quanta"),
    "tau": ("time", "us"),
}
ALLOWED_AXES = {
    "ringdown": ({"omega_p"}, {"g_p", "epsilon_p"}),
    "reset": ({"tau"},),
    "cool": ({"g_p"}, {"n_inj"}),
    "spectroscopy": ({"phi"},),
    "analytic": (),
    "fit": (),
}

# option name -> kind, per experiment; defaults fill in below
OPTIONS = {
    "ringdown": {"n_times": "int", "cutoff": "int"},
    "reset": {"g_p": "frequency?", "n_bar0": "number", "gamma_2_0": "rate", "gap": "time", "threshold": "number"},
    "cool": {"gamma_2_0": "rate"},
    "spectroscopy": {"include_filter": "bool", "include_qubit": "bool"},
    "analytic": {"formula": "str", "f": "frequency", "T": "temperature", "kappa_eff": "loss", "kappa": "loss",
                 "n_bar": "number", "m": "int", "g_p": "frequency", "phi": "number"},
    "fit": {"model": "str", "data": "str", "x_column": "str", "y_column": "str", "noise": "number", "points": "int", "amplitude": "number",
            "rate": "rate", "offset": "number", "t_max": "time"},
}
DEFAULT_OPTIONS = {
    "ringdown": {"n_times": 61, "cutoff": 2},
    "reset": {"g_p": "10 MHz", "n_bar0": 39.8, "gamma_2_0": f"{RESET_GAMMA_2_0} /us", "gap": f"{RESET_GAP * 1e3:g} ns",
              "threshold": 0.05},
    "cool": {"gamma_2_0": f"{ECHO_GAMMA_2_0} /us"},
    "spectroscopy": {"include_filter": True, "include_qubit": False},
    "analytic": {"formula": "thermal", "f": "5.594 GHz", "T": "115 mK", "m": 1},
    "fit": {"model": "exponential", "noise": 0.02, "points": 101, "amplitude": 1.0, "rate": "3.0 /us",
            "offset": 0.0, "t_max": "2 us"},
}
DEFAULT_SWEEPS = {
    "ringdown": {"omega_p": {"start": "-150 MHz", "stop": "150 MHz", "num": 21, "relative_to": "delta"},
                 "g_p": {"start": "0 MHz", "stop": "11 MHz", "num": 11}},
    "reset": {"tau": {"start": "0 us", "stop": "3 us", "num": 301}},
    "cool": {"g_p": {"start": "0 MHz", "stop": "20 MHz", "num": 21}, "n_inj": [0.0, 0.14, 0.35, 1.10]},
    "spectroscopy": {"phi": {"start": 0.0, "stop": 0.5, "num": 201}},
}


class ConfigError(ValueError):
    """Schema violation; ``path`` names the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.detail = message


@dataclass
class RunConfig:
    experiment: str
    device: DeviceParams = field(default_factory=DeviceParams)
    sweep: SweepGrid = None
    output: str = "out"
    seed: int = 0
    threads: int = 1
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _convert(kind, value, path):
    try:
        if kind == "frequency":
            return parse_frequency(value)
        if kind == "frequency?":
            return None if value is None else parse_frequency(value)
        if kind == "temperature":
            return parse_temperature(value)
        if kind == "time":
            return parse_time(value)
        if kind == "rate":
            return parse_rate(value)
        if kind == "loss":
            # a linewidth ('477 kHz') or directly a decay rate ('3.0 /us')
            if isinstance(value, str) and "/" in value:
                return parse_rate(value)
            return parse_frequency(value)
    except UnitError as exc:
        raise ConfigError(str(exc), path) from None
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", path)
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path)
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", path)
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path)
        return value
    raise AssertionError(kind)


def _require_mapping(value, path):
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"expected a mapping, got {type(value).__name__}", path)
    return value


def parse_device(block, path="device"):
    block = _require_mapping(block, path)
    names = set(DeviceParams.field_names())
    kwargs = {}
    for key, value in block.items():
        where = f"{path}.{key}"
        if key not in names:
            raise ConfigError(f"unknown device field (known: {', '.join(sorted(names))})", where)
        if key.startswith("kappa"):
            kwargs[key] = _convert("loss", value, where)
        elif key in _FREQUENCY_FIELDS:
            kwargs[key] = _convert("frequency", value, where)
        elif key in _TEMPERATURE_FIELDS:
            kwargs[key] = _convert("temperature", value, where)
        elif key == "diss_levels":
            kwargs[key] = _convert("int", value, where)
        else:
            kwargs[key] = _convert("number", value, where)
    try:
        return DeviceParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from None


def _axis_values(name, spec, device, path):
    kind, unit = AXIS_KINDS[name]
    if isinstance(spec, list):
        if not spec:
            raise ConfigError("axis has no values", path)
        vals = [_convert(kind, v, f"{path}[{i}]") for i, v in enumerate(spec)]
        offset = 0.0
    elif isinstance(spec, dict):
        extra = set(spec) - {"start", "stop", "num", "relative_to"}
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)} (use start, stop, num, relative_to)", path)
        for k in ("start", "stop", "num"):
            if k not in spec:
                raise ConfigError(f"missing '{k}'", path)
        num = _convert("int", spec["num"], f"{path}.num")
        if num < 1:
            raise ConfigError("num must be >= 1", f"{path}.num")
        start = _convert(kind, spec["start"], f"{path}.start")
        stop = _convert(kind, spec["stop"], f"{path}.stop")
        vals = list(np.linspace(start, stop, num))
        rel = spec.get("relative_to")
        if rel is None:
            offset = 0.0
        elif rel == "delta" and name == "omega_p":
            offset = abs(device.delta)
        else:
            raise ConfigError(f"relative_to must be 'delta' on the omega_p axis, got {rel!r}", f"{path}.relative_to")
    else:
        raise ConfigError("axis must be a list of values or a {start, stop, num} mapping", path)
    return Axis(name, unit, np.asarray(vals, dtype=float) + offset)


def _with_default_axes(block, defaults, slots):
    # partial axis mappings fill in from the default axis; empty slots take the default
    out = dict(block)
    for name, spec in block.items():
        base = defaults.get(name)
        if isinstance(spec, dict) and isinstance(base, dict):
            out[name] = {**base, **spec}
    for slot in slots:
        if not any(k in slot for k in block):
            out.update({k: v for k, v in defaults.items() if k in slot})
    return out


def parse_sweep(block, experiment, device, path="sweep"):
    if ALLOWED_AXES[experiment] == ():
        if block:
            raise ConfigError(f"experiment '{experiment}' takes no sweep", path)
        return None
    slots = ALLOWED_AXES[experiment]
    block = _with_default_axes(_require_mapping(block, path), DEFAULT_SWEEPS[experiment], slots)
    axes = []
    for slot in slots:
        present = [k for k in block if k in slot]
        if len(present) != 1:
            raise ConfigError(f"expected exactly one axis from {sorted(slot)}", path)
        axes.append(_axis_values(present[0], block[present[0]], device, f"{path}.{present[0]}"))
    allowed = set().union(*slots)
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown axis for '{experiment}' (allowed: {sorted(allowed)})", f"{path}.{key}")
    try:
        return SweepGrid(tuple(axes))
    except ValueError as exc:
        raise ConfigError(str(exc), path) from None


def parse_options(block, experiment, path="options"):
    block = _require_mapping(block, path)
    known = OPTIONS[experiment]
    merged = dict(DEFAULT_OPTIONS[experiment])
    for key, value in block.items():
        if key not in known:
            raise ConfigError(f"unknown option for '{experiment}' (known: {', '.join(sorted(known))})", f"{path}.{key}")
        merged[key] = value
    return {k: _convert(known[k], v, f"{path}.{k}") for k, v in merged.items()}


def build_config(data, experiment=None):
    """Validate a parsed key tree and convert it to a :class:`RunConfig`."""
    data = _require_mapping(data, "")
    for key in data:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"unknown top-level key (known: {', '.join(TOP_LEVEL_KEYS)})", str(key))
    declared = data.get("experiment")
    if declared is not None and declared not in EXPERIMENTS:
        raise ConfigError(f"must be one of {', '.join(EXPERIMENTS)}", "experiment")
    if experiment is not None and declared is not None and declared != experiment:
        raise ConfigError(f"config is for '{declared}' but '{experiment}' was requested", "experiment")
    exp = experiment or declared
    if exp is None:
        raise ConfigError("no experiment given", "experiment")
    device = parse_device(data.get("device"))
    sweep = parse_sweep(data.get("sweep"), exp, device)
    options = parse_options(data.get("options"), exp)
    seed = _convert("int", data.get("seed", 0), "seed")
    threads = _convert("int", data.get("threads", 1), "threads")
    if threads < 1:
        raise ConfigError("must be >= 1", "threads")
    output = _convert("str", data.get("output", "out"), "output")
    return RunConfig(exp, device, sweep, output, seed, threads, options, dict(data))


def load_yaml(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config file is not UTF-8: {exc}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"malformed config at {where}: {problem}") from None


def load_config(path, experiment=None):
    """Read, validate and convert a YAML run configuration.

    >>> import tempfile, os
    >>> fd, p = tempfile.mkstemp(suffix=".yaml"); _ = os.write(fd, b"device: {kappa_c: 0.477 MHz}"); os.close(fd)
    >>> round(load_config(p, "analytic").device.kappa_c, 3)
    2.997
    """
    return build_config(load_yaml(path), experiment)


def describe_device(params):
    """Linear-unit echo of a parameter set, for manifests."""
    out = {}
    for k, v in params.as_dict().items():
        if k in _FREQUENCY_FIELDS:
            out[k] = f"{to_mhz(v):.12g} MHz"
        elif k in _TEMPERATURE_FIELDS:
            out[k] = f"{v * 1e3:.12g} mK"
        else:
            out[k] = v
    return out

