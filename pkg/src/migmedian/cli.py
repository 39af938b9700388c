"""Command-line front end: ``migmedian <experiment> --config FILE [--out DIR]``.

Each run writes ``<name>.csv`` (one header row, then one row per result)
and a ``<name>.json`` sidecar holding the resolved config, the seed and the
standard errors. Rows are streamed to ``<name>.csv.partial`` and the file
is renamed once the run completes.

Exit status: 0 on success, 2 for an invalid config or usage error, 3 when
the run stops on a numerical failure (the ``.partial`` file is kept).
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import experiments as ex
from .config import (EXPERIMENTS, ConfigError, detectors_from, median_from, scenario_from,
                     target_from, to_jsonable, validate_text)
from .errors import (DegenerateIsotropyError, DegenerateSampleError, NotPositiveDefiniteError,
                     NumericalFailureError)
from .filtering import FilterParams
from .scenario import InterferenceSpec

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

NUMERICAL_ERRORS = (NumericalFailureError, NotPositiveDefiniteError, DegenerateSampleError,
                    DegenerateIsotropyError, np.linalg.LinAlgError, FloatingPointError)

COLUMNS = {
    "offset_error": ["count", "estimator", "l_error", "stderr", "trials"],
    "sample_count": ["k", "estimator", "t_error", "stderr", "trials"],
    "statistic_profile": ["measure", "config", "cell", "statistic", "stderr", "normalized",
                          "trials"],
    "ad": ["measure", "variant", "mean_ad", "stderr", "trials"],
    "pd_curve": ["scnr_db", "detector_id", "measure", "filtered", "p_d", "stderr", "trials"],
    "calibrate": ["detector_id", "measure", "filtered", "p_fa", "trials", "threshold"],
}
_VALIDATION_COLUMNS = ["empirical_fa", "fa_stderr", "validation_trials"]


def columns_for(cfg):
    cols = list(COLUMNS[cfg["experiment"]])
    if cfg["experiment"] == "calibrate" and cfg["validation_trials"]:
        cols += _VALIDATION_COLUMNS
    return cols


def format_value(v):
    """CSV cell text: 17 significant digits for reals, lowercase booleans."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def iter_rows(cfg, threads=1):
    """Result rows of the experiment described by a resolved config."""
    exp = cfg["experiment"]
    sc = scenario_from(cfg)
    med = median_from(cfg)
    seed = cfg["seed"]
    if exp == "offset_error":
        it = cfg["interference"]
        return ex.iter_offset_error(
            sc, counts=cfg["counts"], k=cfg["k"], trials=cfg["trials"], seed=seed,
            measures=cfg["measures"],
            interference=InterferenceSpec(count=0, f_d=it["f_d"], scnr_db=it["scnr_db"]),
            median_cfg=med)
    if exp == "sample_count":
        return ex.iter_sample_count(sc, k_values=cfg["k_values"], trials=cfg["trials"], seed=seed,
                                    measures=cfg["measures"], median_cfg=med)
    if exp == "statistic_profile":
        return ex.iter_statistic_profile(
            sc, n_cells=cfg["n_cells"], target_cell=cfg["target_cell"],
            target=target_from(cfg["target"]),
            params=[(f["m"], f["h"]) for f in cfg["filter_params"]], measures=cfg["measures"],
            trials=cfg["trials"], seed=seed, median_cfg=med)
    if exp == "ad":
        return ex.iter_ad(
            sc, trials=cfg["trials"], seed=seed, n_cells=cfg["n_cells"],
            target_cell=cfg["target_cell"], target=target_from(cfg["target"]),
            filter_params=FilterParams(cfg["filter"]["m"], cfg["filter"]["h"]),
            measures=cfg["measures"], median_cfg=med)
    if exp == "pd_curve":
        return ex.iter_pd_curve(
            sc, detectors_from(cfg), cfg["scnr_db"], k=cfg["k"], p_fa=cfg["p_fa"],
            trials=cfg["trials"], calib_trials=cfg["calibration_trials"], seed=seed,
            target_f_d=cfg["target_f_d"], threads=threads)
    if exp == "calibrate":
        return ex.iter_calibrate(sc, detectors_from(cfg), k=cfg["k"], p_fa=cfg["p_fa"],
                                 trials=cfg["trials"], seed=seed,
                                 validation_trials=cfg["validation_trials"], threads=threads)
    raise AssertionError(exp)  # pragma: no cover


def _sidecar(cfg, columns, stderrs, status, error=None):
    doc = {
        "experiment": cfg["experiment"],
        "seed": cfg["seed"],
        "status": status,
        "version": __version__,
        "columns": columns,
        "rows": len(stderrs),
        "stderr": stderrs,
        "config": cfg,
    }
    if error is not None:
        doc["error"] = error
    return json.dumps(to_jsonable(doc), indent=2, allow_nan=False) + "\n"


def _remove(path):
    try:
        os.remove(path)
    except FileNotFoundError:
        pass


def run(cfg, out_dir, threads=1, log=None):
    """Run a resolved config, writing CSV and sidecar into ``out_dir``; returns the exit code."""
    log = log or sys.stderr
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, cfg["output"]["name"])
    csv_path, json_path = stem + ".csv", stem + ".json"
    for p in (csv_path, json_path, csv_path + ".partial", json_path + ".partial"):
        _remove(p)
    columns = columns_for(cfg)
    stderrs = []
    with open(csv_path + ".partial", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        try:
            for row in iter_rows(cfg, threads):
                writer.writerow([format_value(row[c]) for c in columns])
                fh.flush()
                se = row.get("stderr", row.get("fa_stderr"))
                if se is not None:
                    stderrs.append(float(se))
        except NUMERICAL_ERRORS as exc:
            msg = f"{type(exc).__name__}: {exc}"
            fh.close()
            with open(json_path + ".partial", "w", encoding="utf-8") as js:
                js.write(_sidecar(cfg, columns, stderrs, "partial", msg))
            print(f"numerical failure after {len(stderrs)} rows: {msg}", file=log)
            print(f"partial results kept in {csv_path}.partial", file=log)
            return EXIT_NUMERICAL
    os.replace(csv_path + ".partial", csv_path)
    with open(json_path, "w", encoding="utf-8") as js:
        js.write(_sidecar(cfg, columns, stderrs, "complete"))
    return EXIT_OK


def _parser():
    p = argparse.ArgumentParser(prog="migmedian", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in EXPERIMENTS + ("validate",):
        help_text = ("check a config and print it with all defaults filled in"
                     if name == "validate" else f"run the {name} experiment")
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="YAML (or JSON) config file")
        sp.add_argument("--seed", type=int, default=None, help="overrides the config's seed")
        if name != "validate":
            sp.add_argument("--out", default=".", help="output directory (default: .)")
            sp.add_argument("--threads", type=int, default=1,
                            help="worker threads; affects speed only, never results")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    experiment = None if args.command == "validate" else args.command
    try:
        cfg = validate_text(text, source=args.config, experiment=experiment, seed=args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(json.dumps(to_jsonable(cfg), indent=2, allow_nan=False))
        return EXIT_OK
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, args.out, threads=args.threads)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
