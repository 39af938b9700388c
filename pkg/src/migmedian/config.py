"""Experiment configuration: parsing, validation and defaults.

A config is a YAML mapping. Validation produces a *resolved* config, a plain
JSON-serializable dict with every default filled in; the library objects
are built from that. Errors carry the offending field path and, when the
text came from a file, its line number.

Example
-------
.. code-block:: yaml

    experiment: pd_curve
    seed: 7
    scenario:
      interference: {count: 2, scnr_db: 10}
    p_fa: 0.01
    scnr_db: [0, 5, 10, 15, 20]
"""

import math

import yaml

from .detector import DetectorConfig, secondary_indices
from .filtering import FilterParams
from .geometry import DETECTOR_MEASURES
from .median import MedianSolverConfig
from .scenario import ClutterScenario, InterferenceSpec, TargetSpec

__all__ = ["ConfigError", "EXPERIMENTS", "validate_text", "validate_data", "scenario_from",
           "median_from", "detectors_from", "to_jsonable"]

EXPERIMENTS = ("offset_error", "sample_count", "statistic_profile", "ad", "pd_curve", "calibrate")
MEASURES = tuple(m.value for m in DETECTOR_MEASURES)
_U64 = 2**64


class ConfigError(ValueError):
    """Invalid configuration; ``str()`` is a one-line diagnostic."""

    def __init__(self, message, path=(), line=None, source=None):
        self.message = message
        self.path = tuple(path)
        self.line = line
        self.source = source
        where = source or "<config>"
        if line is not None:
            where += f":{line}"
        field = ".".join(str(p) for p in self.path)
        super().__init__(f"{where}: {field + ': ' if field else ''}{message}")


def _line_map(node, path=(), out=None):
    """Map field paths to 1-based line numbers from a composed YAML node."""
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            out[path + (("key", k.value),)] = k.start_mark.line + 1
            _line_map(v, path + (k.value,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, path + (i,), out)
    return out


class _Checker:
    def __init__(self, lines=None, source=None):
        self.lines = lines or {}
        self.source = source

    def fail(self, path, message, key_line=False):
        # the field's own line, else the nearest enclosing one
        p = tuple(path)
        line = self.lines.get(p[:-1] + (("key", p[-1]),)) if key_line and p else None
        while line is None:
            line = self.lines.get(p)
            if not p:
                break
            p = p[:-1]
        raise ConfigError(message, path, line, self.source)

    # scalar checks

    def real(self, value, path, lo=None, hi=None, lo_open=False, hi_open=False, allow_inf=False):
        if isinstance(value, bool):
            self.fail(path, f"expected a number, got {value!r}")
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                self.fail(path, f"expected a number, got {value!r}")
        if not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        value = float(value)
        if math.isnan(value) or (math.isinf(value) and not allow_inf):
            self.fail(path, f"must be finite, got {value}")
        if lo is not None and (value < lo or (lo_open and value == lo)):
            self.fail(path, f"must be {'>' if lo_open else '>='} {lo}, got {value:g}")
        if hi is not None and (value > hi or (hi_open and value == hi)):
            self.fail(path, f"must be {'<' if hi_open else '<='} {hi}, got {value:g}")
        return value

    def integer(self, value, path, lo=None, hi=None):
        if isinstance(value, bool):
            self.fail(path, f"expected an integer, got {value!r}")
        if isinstance(value, str):
            try:
                value = float(value) if any(c in value for c in ".eE") else int(value)
            except ValueError:
                self.fail(path, f"expected an integer, got {value!r}")
        if isinstance(value, float):
            if not value.is_integer():
                self.fail(path, f"expected an integer, got {value!r}")
            value = int(value)
        if not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
        if lo is not None and value < lo:
            self.fail(path, f"must be >= {lo}, got {value}")
        if hi is not None and value > hi:
            self.fail(path, f"must be <= {hi}, got {value}")
        return value

    def choice(self, value, path, options):
        if not isinstance(value, str) or value.lower() not in options:
            self.fail(path, f"must be one of {', '.join(options)}; got {value!r}")
        return value.lower()

    def mapping(self, value, path, allowed):
        if value is None:
            value = {}
        if not isinstance(value, dict):
            self.fail(path, f"expected a mapping, got {type(value).__name__}")
        for k in value:
            if k not in allowed:
                self.fail(tuple(path) + (k,), f"unknown field; allowed: {', '.join(allowed)}",
                          key_line=True)
        return value

    def seq(self, value, path, nonempty=True):
        if not isinstance(value, (list, tuple)):
            self.fail(path, f"expected a list, got {type(value).__name__}")
        if nonempty and not value:
            self.fail(path, "must not be empty")
        return list(value)


# sections

_SCENARIO_KEYS = ("n", "rho", "f_c", "sigma_n2", "cnr_db", "texture", "shape", "interference")
_INTERF_KEYS = ("count", "f_d", "scnr_db", "placement")


def _interference(ck, raw, path, with_count=True):
    keys = _INTERF_KEYS if with_count else ("f_d", "scnr_db")
    raw = ck.mapping(raw, path, keys)
    out = {}
    if with_count:
        out["count"] = ck.integer(raw.get("count", 0), path + ("count",), lo=0)
    out["f_d"] = ck.real(raw.get("f_d", 0.2), path + ("f_d",))
    out["scnr_db"] = ck.real(raw.get("scnr_db", 15.0), path + ("scnr_db",))
    if with_count:
        placement = raw.get("placement", "random")
        if isinstance(placement, str):
            ck.choice(placement, path + ("placement",), ("random",))
            out["placement"] = "random"
        else:
            cells = ck.seq(placement, path + ("placement",), nonempty=False)
            out["placement"] = [ck.integer(c, path + ("placement", i), lo=0)
                                for i, c in enumerate(cells)]
            if len(out["placement"]) != out["count"]:
                ck.fail(path + ("placement",), "fixed placement must list exactly `count` cells")
    return out


def _scenario(ck, raw, path=("scenario",)):
    raw = ck.mapping(raw, path, _SCENARIO_KEYS)
    out = {
        "n": ck.integer(raw.get("n", 8), path + ("n",), lo=2),
        "rho": ck.real(raw.get("rho", 0.95), path + ("rho",), 0, 1, lo_open=True, hi_open=True),
        "f_c": ck.real(raw.get("f_c", 0.1), path + ("f_c",)),
        "sigma_n2": ck.real(raw.get("sigma_n2", 1.0), path + ("sigma_n2",), lo=0, lo_open=True),
        "cnr_db": ck.real(raw.get("cnr_db", 20.0), path + ("cnr_db",)),
        "texture": ck.choice(raw.get("texture", "gaussian"), path + ("texture",),
                             ("gaussian", "compound")),
        "shape": ck.real(raw.get("shape", 1.0), path + ("shape",), lo=0, lo_open=True),
    }
    out["interference"] = _interference(ck, raw.get("interference"), path + ("interference",))
    return out


def _median(ck, raw, path=("median",)):
    raw = ck.mapping(raw, path, ("tol", "max_iter", "weiszfeld_floor"))
    return {
        "tol": ck.real(raw.get("tol", 1e-8), path + ("tol",), lo=0, lo_open=True),
        "max_iter": ck.integer(raw.get("max_iter", 200), path + ("max_iter",), lo=1),
        "weiszfeld_floor": ck.real(raw.get("weiszfeld_floor", 1e-12), path + ("weiszfeld_floor",),
                                   lo=0, lo_open=True),
    }


def _filter(ck, raw, path):
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            ck.fail(path, "filter shorthand must be [m, h]")
        raw = {"m": raw[0], "h": raw[1]}
    raw = ck.mapping(raw, path, ("m", "h"))
    m = ck.integer(raw.get("m", 11), path + ("m",), lo=1)
    if m % 2 == 0:
        ck.fail(path + ("m",), f"window size must be odd, got {m}")
    return {"m": m, "h": ck.real(raw.get("h", 1.5), path + ("h",), lo=0, lo_open=True)}


def _target(ck, raw, path):
    raw = ck.mapping(raw, path, ("f_d", "scnr_db"))
    scnr = ck.real(raw.get("scnr_db", 15.0), path + ("scnr_db",), allow_inf=True)
    if scnr == math.inf:
        ck.fail(path + ("scnr_db",), "must be finite or -inf")
    return {"f_d": ck.real(raw.get("f_d", 0.2), path + ("f_d",)), "scnr_db": scnr}


def _measures(ck, raw, path):
    items = ck.seq(raw, path)
    out = [ck.choice(m, path + (i,), MEASURES) for i, m in enumerate(items)]
    if len(set(out)) != len(out):
        ck.fail(path, "measures must be distinct")
    return out


def default_detector_list(params=(11, 1.5)):
    out = []
    for m in MEASURES:
        out.append({"kind": "mig", "measure": m, "filter": None, "guard_cells": 0})
        out.append({"kind": "mig", "measure": m, "filter": {"m": params[0], "h": params[1]},
                    "guard_cells": 0})
    out.append({"kind": "amf", "steering_f_d": 0.2, "guard_cells": 0})
    return out


def _detectors(ck, raw, path=("detectors",)):
    if raw is None:
        return default_detector_list()
    out = []
    for i, item in enumerate(ck.seq(raw, path)):
        p = path + (i,)
        item = ck.mapping(item, p, ("kind", "measure", "filter", "guard_cells", "steering_f_d"))
        kind = ck.choice(item.get("kind", "mig"), p + ("kind",), ("mig", "amf"))
        guard = ck.integer(item.get("guard_cells", 0), p + ("guard_cells",), lo=0)
        if kind == "amf":
            for bad in ("measure", "filter"):
                if bad in item:
                    ck.fail(p + (bad,), "not used by the amf detector", key_line=True)
            out.append({"kind": "amf",
                        "steering_f_d": ck.real(item.get("steering_f_d", 0.2),
                                                p + ("steering_f_d",)),
                        "guard_cells": guard})
        else:
            if "measure" not in item:
                ck.fail(p, "missing required field `measure`")
            if "steering_f_d" in item:
                ck.fail(p + ("steering_f_d",), "only used by the amf detector", key_line=True)
            measure = ck.choice(item["measure"], p + ("measure",), MEASURES)
            filt = item.get("filter")
            out.append({"kind": "mig", "measure": measure,
                        "filter": None if filt is None else _filter(ck, filt, p + ("filter",)),
                        "guard_cells": guard})
    ids = [_detector_id(d) for d in out]
    dup = sorted({x for x in ids if ids.count(x) > 1})
    if dup:
        ck.fail(path, f"duplicate detectors: {', '.join(dup)}")
    return out


def _detector_id(d):
    return detector_from(d, MedianSolverConfig(), 0.5).detector_id


def _default_filter_params():
    return [{"m": 11, "h": 1.5}, {"m": 11, "h": 2.0}, {"m": 13, "h": 1.5}]


# per-experiment fields: key -> resolver(ck, raw_value_or_None, path, partially_resolved)

def _trials(default):
    return lambda ck, v, p, r: ck.integer(default if v is None else v, p, lo=1)


def _int(default, lo=None):
    return lambda ck, v, p, r: ck.integer(default if v is None else v, p, lo=lo)


def _measures_field(ck, v, p, r):
    return list(MEASURES) if v is None else _measures(ck, v, p)


def _counts(ck, v, p, r):
    items = list(range(1, 16)) if v is None else ck.seq(v, p)
    return [ck.integer(c, p + (i,), lo=0, hi=r["k"]) for i, c in enumerate(items)]


def _k_values(ck, v, p, r):
    items = [8, 12, 16, 24, 32, 40] if v is None else ck.seq(v, p)
    return [ck.integer(c, p + (i,), lo=1) for i, c in enumerate(items)]


def _target_cell(ck, v, p, r):
    return ck.integer(19 if v is None else v, p, lo=0, hi=r["n_cells"] - 1)


def _filter_list(ck, v, p, r):
    if v is None:
        return _default_filter_params()
    return [_filter(ck, f, p + (i,)) for i, f in enumerate(ck.seq(v, p))]


def _p_fa(ck, v, p, r):
    return ck.real(1e-3 if v is None else v, p, 0, 1, lo_open=True, hi_open=True)


def _calib_trials(ck, v, p, r):
    need = 10 / r["p_fa"]
    trials = ck.integer(math.ceil(100 / r["p_fa"] - 1e-9) if v is None else v, p, lo=1)
    if trials < need - 1e-9:
        ck.fail(p, f"calibration needs >= 10/p_fa = {math.ceil(need - 1e-9)} trials, got {trials}")
    return trials


def _scnr_grid(ck, v, p, r):
    items = [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0] if v is None else ck.seq(v, p)
    return [ck.real(s, p + (i,), allow_inf=True) for i, s in enumerate(items)]


def _real(default, **kw):
    return lambda ck, v, p, r: ck.real(default if v is None else v, p, **kw)


_SCHEMAS = {
    "offset_error": {
        "trials": _trials(50), "k": _int(40, lo=1), "counts": _counts,
        "interference": lambda ck, v, p, r: _interference(ck, v, p, with_count=False),
        "measures": _measures_field,
    },
    "sample_count": {
        "trials": _trials(50), "k_values": _k_values, "measures": _measures_field,
    },
    "statistic_profile": {
        "trials": _trials(50), "n_cells": _int(40, lo=3), "target_cell": _target_cell,
        "target": lambda ck, v, p, r: _target(ck, v, p), "filter_params": _filter_list,
        "measures": _measures_field,
    },
    "ad": {
        "trials": _trials(100), "n_cells": _int(40, lo=3), "target_cell": _target_cell,
        "target": lambda ck, v, p, r: _target(ck, v, p),
        "filter": lambda ck, v, p, r: _filter(ck, v, p), "measures": _measures_field,
    },
    "pd_curve": {
        "trials": _trials(2000), "k": _int(8, lo=1), "p_fa": _p_fa,
        "calibration_trials": _calib_trials, "scnr_db": _scnr_grid,
        "target_f_d": _real(0.2), "detectors": lambda ck, v, p, r: _detectors(ck, v, p),
    },
    "calibrate": {
        "k": _int(8, lo=1), "p_fa": _p_fa, "trials": _calib_trials,
        "validation_trials": _int(0, lo=0),
        "detectors": lambda ck, v, p, r: _detectors(ck, v, p),
    },
}

_COMMON = ("experiment", "seed", "scenario", "median", "output")


def validate_data(data, lines=None, source=None, experiment=None, seed=None):
    """Resolve a parsed config mapping; raise :class:`ConfigError` if invalid.

    ``experiment`` and ``seed``, when given, act as command-line overrides:
    the experiment must agree with the config's (if it names one) and the
    seed replaces the config's.
    """
    ck = _Checker(lines, source)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        ck.fail((), "top level must be a mapping")
    exp = data.get("experiment", experiment)
    if exp is None:
        ck.fail((), "missing required field `experiment`")
    if not isinstance(exp, str) or exp not in EXPERIMENTS:
        ck.fail(("experiment",), f"unknown experiment {exp!r}; valid: {', '.join(EXPERIMENTS)}")
    if experiment is not None and exp != experiment:
        ck.fail(("experiment",), f"config is for {exp!r}, but {experiment!r} was requested")
    schema = _SCHEMAS[exp]
    ck.mapping(data, (), _COMMON + tuple(schema))
    out = {"experiment": exp}
    if seed is not None:
        out["seed"] = ck.integer(seed, ("seed",), lo=0, hi=_U64 - 1)
    elif "seed" not in data:
        ck.fail((), "missing required field `seed`")
    else:
        out["seed"] = ck.integer(data["seed"], ("seed",), lo=0, hi=_U64 - 1)
    out["scenario"] = _scenario(ck, data.get("scenario"))
    out["median"] = _median(ck, data.get("median"))
    for key, fn in schema.items():
        out[key] = fn(ck, data.get(key), (key,), out)
    raw_out = ck.mapping(data.get("output"), ("output",), ("name", "format"))
    name = raw_out.get("name", exp)
    if not isinstance(name, str) or not name or "/" in name or name.startswith("."):
        ck.fail(("output", "name"), f"must be a plain file stem, got {name!r}")
    out["output"] = {"name": name,
                     "format": ck.choice(raw_out.get("format", "csv"), ("output", "format"),
                                         ("csv",))}
    _cross_checks(ck, out)
    return out


def _cross_checks(ck, cfg):
    sc = cfg["scenario"]
    n_int = sc["interference"]["count"]
    exp = cfg["experiment"]
    if exp in ("pd_curve", "calibrate"):
        if n_int > cfg["k"]:
            ck.fail(("scenario", "interference", "count"),
                    f"{n_int} interferences do not fit in k = {cfg['k']} secondary cells")
        if sc["interference"]["placement"] != "random":
            bad = [c for c in sc["interference"]["placement"] if c > cfg["k"] or c == cfg["k"] // 2]
            if bad:
                ck.fail(("scenario", "interference", "placement"),
                        f"cells {bad} are outside the map or the CUT (index {cfg['k'] // 2})")
        for i, d in enumerate(cfg["detectors"]):
            try:
                secondary_indices(cfg["k"] + 1, cfg["k"] // 2, d["guard_cells"])
            except ValueError:
                ck.fail(("detectors", i, "guard_cells"), "guard region leaves no secondary cells")
    elif n_int:
        ck.fail(("scenario", "interference", "count"),
                f"{exp} draws its own cell maps; scenario interferences are not used"
                + ("; set the top-level `interference` block" if exp == "offset_error" else ""))
    # building the objects catches anything the per-field checks missed
    try:
        scenario_from(cfg)
    except ValueError as exc:
        ck.fail(("scenario",), str(exc))


def validate_text(text, source=None, experiment=None, seed=None):
    """Parse YAML (or JSON) text and resolve it; see :func:`validate_data`.

    The text may also be a run's JSON sidecar, whose recorded config is
    validated in its place.
    """
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None) or getattr(exc, "context_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"YAML syntax error: {problem}", (), line, source) from None
    lines = _line_map(node) if node is not None else {}
    if _is_sidecar(data):
        # a run's JSON sidecar: validate the resolved config it records
        data = data["config"]
        lines = {k[1:]: v for k, v in lines.items() if k[:1] == ("config",)}
    return validate_data(data, lines, source, experiment, seed)


def _is_sidecar(data):
    return (isinstance(data, dict) and isinstance(data.get("config"), dict)
            and {"status", "columns"} <= set(data))


# building library objects from a resolved config

def scenario_from(cfg) -> ClutterScenario:
    sc = cfg["scenario"]
    it = sc["interference"]
    placement = it["placement"] if it["placement"] == "random" else tuple(it["placement"])
    return ClutterScenario(
        n=sc["n"], rho=sc["rho"], f_c=sc["f_c"], sigma_n2=sc["sigma_n2"], cnr_db=sc["cnr_db"],
        texture=sc["texture"], shape=sc["shape"],
        interference=InterferenceSpec(it["count"], it["f_d"], it["scnr_db"], placement))


def median_from(cfg) -> MedianSolverConfig:
    return MedianSolverConfig(**cfg["median"])


def detector_from(d, median_cfg, p_fa):
    if d["kind"] == "amf":
        return DetectorConfig(kind="amf", guard_cells=d["guard_cells"], p_fa=p_fa,
                              steering_f_d=d["steering_f_d"])
    filt = None if d["filter"] is None else FilterParams(d["filter"]["m"], d["filter"]["h"])
    return DetectorConfig(measure=d["measure"], filter=filt, median_cfg=median_cfg,
                          guard_cells=d["guard_cells"], p_fa=p_fa)


def detectors_from(cfg):
    med = median_from(cfg)
    return [detector_from(d, med, cfg["p_fa"]) for d in cfg["detectors"]]


def target_from(raw) -> TargetSpec:
    return TargetSpec(raw["f_d"], raw["scnr_db"])


def to_jsonable(obj):
    """Copy of ``obj`` with non-finite floats spelled as strings (strict JSON)."""
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj
