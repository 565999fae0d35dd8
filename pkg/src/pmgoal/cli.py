"""Command-line entry point: ``pmgoal <subcommand> [flags]``.

Flags may also come from a flat JSON file given with ``--config``; keys use
the flag names (kebab or snake case). Precedence: flags > file > defaults.
Exit codes: 0 success, 1 validation/usage error, 2 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .align import CostFunction
from .data import CsvSchema, load_dataset, save_dataset, synth_dataset, truncate_prefix
from .discover import build_model
from .errors import PMGoalError, ValidationError
from .evaluation import PipelineConfig, cross_validate
from .featsel import FeatureSelection, fit_selection
from .quantize import Codebook, discretize, fit_codebook
from .recognize import Artifacts, WeightParams, recognize
from .tune import grid_search, lhs_sample, tune_weights

DEFAULTS = {
    "out": None,
    "data": None,
    "artifacts": "artifacts",
    "report_dir": "report",
    "trace_col": "Trace",
    "goal_col": "Goal",
    "goals": 3,
    "traces": 30,
    "features": 47,
    "regimes": 4,
    "noise": 0.3,
    "rows_min": 3,
    "rows_max": 8,
    "informative": None,
    "seed": 0,
    "n_f": 10,
    "n_c": 20,
    "linkage": "average",
    "no_normalize": False,
    "filter_threshold": 0.0,
    "dot": False,
    "prefix": None,
    "fraction": 1.0,
    "phi": 1.0,
    "delta": 1.0,
    "lam": 2.0,
    "beta": 1.0,
    "tie_epsilon": 1e-9,
    "log_cost": 1.0,
    "model_cost": 0.0,
    "obs_levels": "0.1,0.3,0.5,0.7",
    "methods": "PM,LDA",
    "subject": "1",
    "workers": 1,
    "nf_range": "1:10",
    "nc_range": "10,20",
    "lhs_samples": 100,
    "lhs_seed": 0,
    "progress": None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add(p, flag, help_text, **kw):
    key = flag.lstrip("-").replace("-", "_")
    default = DEFAULTS.get(key)
    suffix = "" if kw.get("action") == "store_true" else f" (default: {default})"
    p.add_argument(flag, default=argparse.SUPPRESS, help=help_text + suffix, **kw)


def _common(p):
    _add(p, "--config", "flat JSON file of flag values", type=str)
    _add(p, "--trace-col", "CSV column holding the trace id", type=str)
    _add(p, "--goal-col", "CSV column holding the goal label", type=str)


def _pipeline_flags(p):
    _add(p, "--n-f", "number of representative features N_f (count)", type=int)
    _add(p, "--n-c", "number of event clusters N_c (count)", type=int)
    _add(p, "--seed", "k-means seed (integer)", type=int)
    _add(p, "--linkage", "feature clustering linkage: average|single|complete", type=str)
    _add(p, "--no-normalize", "disable z-scoring before k-means", action="store_true")
    _add(p, "--filter-threshold", "minimum relative arc frequency kept (fraction in [0,1))", type=float)


def _weight_flags(p):
    _add(p, "--phi", "weight offset phi (unitless)", type=float)
    _add(p, "--delta", "position discount exponent delta (>= 0)", type=float)
    _add(p, "--lam", "trailing log-move penalty lambda (>= 1)", type=float)
    _add(p, "--beta", "model trust beta in (0, 1]", type=float)
    _add(p, "--tie-epsilon", "probability margin for multi-goal inference", type=float)
    _add(p, "--log-cost", "cost of a move on trace", type=float)
    _add(p, "--model-cost", "cost of a move on model", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmgoal", description="Process-mining goal recognition on continuous traces.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth", help="write a seeded synthetic dataset CSV")
    _common(p)
    _add(p, "--out", "output CSV path", type=str)
    _add(p, "--goals", "number of goals (count)", type=int)
    _add(p, "--traces", "traces per goal (count)", type=int)
    _add(p, "--features", "features per row (count)", type=int)
    _add(p, "--regimes", "hidden regimes per goal (count)", type=int)
    _add(p, "--noise", "Gaussian noise standard deviation (feature units)", type=float)
    _add(p, "--rows-min", "minimum rows per regime (count)", type=int)
    _add(p, "--rows-max", "maximum rows per regime (count)", type=int)
    _add(p, "--informative", "features carrying signal (count; default all)", type=int)
    _add(p, "--seed", "random seed (integer)", type=int)

    p = sub.add_parser("features", help="fit and save the feature selection")
    _common(p)
    _add(p, "--data", "training dataset CSV", type=str)
    _add(p, "--artifacts", "artifact directory", type=str)
    _add(p, "--n-f", "number of representative features N_f (count)", type=int)
    _add(p, "--linkage", "feature clustering linkage: average|single|complete", type=str)

    p = sub.add_parser("codebook", help="fit and save the k-means codebook")
    _common(p)
    _add(p, "--data", "training dataset CSV", type=str)
    _add(p, "--artifacts", "artifact directory holding selection.json", type=str)
    _add(p, "--n-c", "number of event clusters N_c (count)", type=int)
    _add(p, "--seed", "k-means seed (integer)", type=int)
    _add(p, "--no-normalize", "disable z-scoring before k-means", action="store_true")

    p = sub.add_parser("discover", help="build and save one model per goal")
    _common(p)
    _add(p, "--data", "training dataset CSV", type=str)
    _add(p, "--artifacts", "artifact directory holding selection.json and codebook.json", type=str)
    _add(p, "--filter-threshold", "minimum relative arc frequency kept (fraction in [0,1))", type=float)
    _add(p, "--dot", "also write model.<goal>.dot files", action="store_true")

    p = sub.add_parser("recognize", help="goal posterior for observed prefixes")
    _common(p)
    _add(p, "--artifacts", "artifact directory", type=str)
    _add(p, "--prefix", "CSV with one or more observed traces", type=str)
    _add(p, "--fraction", "observed fraction of each trace in (0, 1]", type=float)
    _add(p, "--out", "output JSON path (stdout when omitted)", type=str)
    _weight_flags(p)

    p = sub.add_parser("evaluate", help="cross-validated evaluation report")
    _common(p)
    _add(p, "--data", "dataset CSV", type=str)
    _add(p, "--report-dir", "directory for report.json, report.csv, instances.csv", type=str)
    _add(p, "--obs-levels", "comma-separated observed fractions", type=str)
    _add(p, "--methods", "comma-separated methods from PM,LDA", type=str)
    _add(p, "--subject", "subject label written to the report", type=str)
    _add(p, "--workers", "parallel fold workers (count)", type=int)
    _pipeline_flags(p)
    _weight_flags(p)

    p = sub.add_parser("tune", help="grid search over (N_f, N_c) then LHS over weights")
    _common(p)
    _add(p, "--data", "dataset CSV", type=str)
    _add(p, "--out", "output TuneResult JSON path", type=str)
    _add(p, "--nf-range", "N_f values: 'a:b' inclusive range or comma list", type=str)
    _add(p, "--nc-range", "N_c values: 'a:b:step' range or comma list", type=str)
    _add(p, "--lhs-samples", "number of weight configurations (count; 0 skips)", type=int)
    _add(p, "--lhs-seed", "LHS seed (integer)", type=int)
    _add(p, "--obs-levels", "comma-separated observed fractions", type=str)
    _add(p, "--workers", "parallel fold workers (count)", type=int)
    _add(p, "--progress", "resumable progress JSON path", type=str)
    _pipeline_flags(p)
    _weight_flags(p)
    return parser


def _resolve(ns) -> dict:
    opts = dict(DEFAULTS)
    explicit = vars(ns)
    if explicit.get("config"):
        file_opts = json.loads(Path(explicit["config"]).read_text(encoding="utf-8"))
        if not isinstance(file_opts, dict):
            raise ValidationError("config file must hold a flat JSON object")
        for k, v in file_opts.items():
            key = k.replace("-", "_")
            if key not in DEFAULTS:
                raise ValidationError(f"unknown config key {k!r}")
            opts[key] = v
    opts.update({k: v for k, v in explicit.items() if k != "config"})
    return opts


def _need(opts, key):
    if opts.get(key) in (None, ""):
        raise UsageError(f"--{key.replace('_', '-')} is required")
    return opts[key]


def _schema(opts):
    return CsvSchema(trace_id=opts["trace_col"], goal=opts["goal_col"])


def _floats(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _int_range(text) -> list:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    text = str(text)
    if ":" in text:
        parts = [int(v) for v in text.split(":")]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(parts[0], parts[1] + 1, step))
    return [int(v) for v in text.split(",") if v.strip()]


def _params(opts) -> WeightParams:
    return WeightParams(phi=opts["phi"], delta=opts["delta"], lam=opts["lam"], beta=opts["beta"],
                        tie_epsilon=opts["tie_epsilon"])


def _config(opts) -> PipelineConfig:
    return PipelineConfig(
        n_f=int(opts["n_f"]), n_c=int(opts["n_c"]), seed=int(opts["seed"]),
        filter_threshold=float(opts["filter_threshold"]), linkage=opts["linkage"],
        normalize=not opts["no_normalize"], params=_params(opts),
        costs=CostFunction(log=opts["log_cost"], model=opts["model_cost"]),
    )


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


def cmd_synth(opts):
    ds = synth_dataset(opts["goals"], opts["traces"], opts["features"], opts["regimes"], opts["noise"],
                       opts["seed"], (opts["rows_min"], opts["rows_max"]), opts["informative"])
    out = _need(opts, "out")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, out, _schema(opts))


def cmd_features(opts):
    ds = load_dataset(_need(opts, "data"), _schema(opts)).validate()
    sel = fit_selection(ds.all_rows(), opts["n_f"], opts["linkage"])
    _write(Path(opts["artifacts"]) / "selection.json", sel.to_json())


def cmd_codebook(opts):
    ds = load_dataset(_need(opts, "data"), _schema(opts)).validate()
    d = Path(opts["artifacts"])
    sel = FeatureSelection.from_json((d / "selection.json").read_text(encoding="utf-8"))
    cb = fit_codebook(ds.all_rows(), sel.selected, opts["n_c"], opts["seed"], not opts["no_normalize"])
    _write(d / "codebook.json", cb.to_json())


def cmd_discover(opts):
    ds = load_dataset(_need(opts, "data"), _schema(opts)).validate()
    d = Path(opts["artifacts"])
    sel = FeatureSelection.from_json((d / "selection.json").read_text(encoding="utf-8"))
    cb = Codebook.from_json((d / "codebook.json").read_text(encoding="utf-8"))
    logs = discretize(ds, sel, cb)
    models = {g: build_model(logs[g], opts["filter_threshold"], goal=g) for g in ds.goals}
    Artifacts(sel, cb, models).save(d)
    if opts["dot"]:
        for g, m in models.items():
            _write(d / f"model.{g}.dot", m.to_dot())


def cmd_recognize(opts):
    art = Artifacts.load(opts["artifacts"])
    ds = load_dataset(_need(opts, "prefix"), _schema(opts)).validate()
    costs = CostFunction(log=opts["log_cost"], model=opts["model_cost"])
    out = {}
    for t in ds.traces:
        post = recognize(truncate_prefix(t, opts["fraction"]), art, _params(opts), costs)
        out[t.trace_id] = post.to_dict()
    _write(opts["out"], json.dumps(out, indent=2, sort_keys=True) + "\n")


def cmd_evaluate(opts):
    ds = load_dataset(_need(opts, "data"), _schema(opts)).validate()
    methods = tuple(m.strip() for m in str(opts["methods"]).split(",") if m.strip())
    report = cross_validate(ds, _config(opts), methods, _floats(opts["obs_levels"]), str(opts["subject"]),
                            workers=int(opts["workers"]))
    d = Path(opts["report_dir"])
    _write(d / "report.json", report.to_json() + "\n")
    _write(d / "report.csv", report.to_csv())
    _write(d / "instances.csv", report.instances_csv())


def cmd_tune(opts):
    ds = load_dataset(_need(opts, "data"), _schema(opts)).validate()
    base = _config(opts)
    levels = _floats(opts["obs_levels"])
    grid = grid_search(ds, _int_range(opts["nf_range"]), _int_range(opts["nc_range"]), base, levels,
                       int(opts["workers"]), opts["progress"])
    result = {"grid": grid.to_dict()}
    if int(opts["lhs_samples"]) > 0:
        candidates = lhs_sample(int(opts["lhs_samples"]), int(opts["lhs_seed"]),
                                tie_epsilon=float(opts["tie_epsilon"]))
        weights = tune_weights(ds, candidates, grid.best_config, levels, int(opts["workers"]), opts["progress"])
        result["weights"] = weights.to_dict()
        result["weights"]["seeds"]["lhs_seed"] = int(opts["lhs_seed"])
    _write(_need(opts, "out"), json.dumps(result, indent=2, sort_keys=True) + "\n")


COMMANDS = {
    "synth": cmd_synth,
    "features": cmd_features,
    "codebook": cmd_codebook,
    "discover": cmd_discover,
    "recognize": cmd_recognize,
    "evaluate": cmd_evaluate,
    "tune": cmd_tune,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if not ns.command:
            parser.print_help(sys.stderr)
            return 1
        command = ns.command
        del ns.command
        opts = _resolve(ns)
        COMMANDS[command](opts)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ValidationError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"pmgoal: error: {exc}", file=sys.stderr)
        return 1
    except (PMGoalError, Exception) as exc:  # noqa: BLE001
        print(f"pmgoal: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
