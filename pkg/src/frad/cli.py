"""Command-line entry point.

Subcommands:
    synth      generate a labeled synthetic dataset CSV
    corr       write a feature-correlation SVG heatmap
    train      split/standardize/search/fit on an existing dataset
    evaluate   re-score the persisted models of a run directory
    run-all    synth + corr + train + report in one deterministic pass
    predict    class probabilities for the rows of a dataset file

Exit codes: 0 success, 1 usage, 2 file I/O, 3 schema/validation,
4 numerical failure. ``FRAD_OUT_DIR`` provides the default output
directory; ``--config file.toml`` supplies defaults that explicit flags
override.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .data import load_dataset, save_dataset, CLASS_NAMES
from .datagen import GeneratorConfig, generate_dataset
from .ensembles import predicted_class
from .errors import FradError, SchemaError
from .features import apply_standardizer, pearson_correlation, render_heatmap
from .pipeline import ALL_MODELS, RunConfig, evaluate_run, run_all, train_run

EXIT_CODES_HELP = (
    "exit codes: 0 success, 1 usage, 2 file I/O, 3 schema/validation, "
    "4 numerical failure"
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_out_dir() -> str:
    return os.environ.get("FRAD_OUT_DIR", "frad-out")


def _parse_proportions(text: str):
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise SchemaError(f"cannot parse class proportions from {text!r}") from None
    if len(parts) != 3:
        raise SchemaError("class proportions need exactly three comma-separated values")
    return parts


def _parse_models(text: str):
    models = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in models if m not in ALL_MODELS]
    if bad:
        raise SchemaError(f"unknown models {bad}; choose from {list(ALL_MODELS)}")
    return models


def _add_generator_flags(p: argparse.ArgumentParser, n_default=None):
    p.add_argument("--n", type=int, default=n_default, required=n_default is None,
                   help="number of rows to generate")
    p.add_argument("--noise-sigma", type=float, default=0.25,
                   help="log-normal jitter width (0 = exact class structure)")
    p.add_argument("--proportions", type=str, default=None,
                   help="class proportions, e.g. 0.4,0.3,0.3 (default: equal)")
    p.add_argument("--suppression-tx-mean", type=float, default=20.0,
                   help="mean attacker tx count for suppression scenarios")


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--models", type=str, default=",".join(ALL_MODELS),
                   help="comma-separated subset of rf,gb,xgb,mlp")
    p.add_argument("--hpo-budget", type=int, default=25,
                   help="Bayesian search trials per model")
    p.add_argument("--no-hpo", action="store_true",
                   help="skip hyperparameter search, use built-in defaults")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for tree fitting (results identical for any value)")
    p.add_argument("--out-dir", type=str, default=None,
                   help="artifact directory (default: $FRAD_OUT_DIR or ./frad-out)")


def _build_parser():
    parser = _Parser(prog="frad", description=__doc__.splitlines()[0],
                     epilog=EXIT_CODES_HELP)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    p = sub.add_parser("synth", parents=[], help="generate a synthetic dataset",
                       epilog=EXIT_CODES_HELP)
    _add_generator_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default="dataset.csv")
    p.add_argument("--config", type=str, default=None)
    subparsers["synth"] = p

    p = sub.add_parser("corr", help="feature-correlation heatmap",
                       epilog=EXIT_CODES_HELP)
    p.add_argument("--data", type=str, required=True, help="dataset CSV path")
    p.add_argument("--out", type=str, default="correlation.svg")
    p.add_argument("--config", type=str, default=None)
    subparsers["corr"] = p

    p = sub.add_parser("train", help="train models on an existing dataset",
                       epilog=EXIT_CODES_HELP)
    p.add_argument("--data", type=str, required=True, help="dataset CSV path")
    p.add_argument("--seed", type=int, default=42)
    _add_run_flags(p)
    p.add_argument("--config", type=str, default=None)
    subparsers["train"] = p

    p = sub.add_parser("evaluate", help="re-score a run directory",
                       epilog=EXIT_CODES_HELP)
    p.add_argument("--run-dir", type=str, required=True)
    p.add_argument("--config", type=str, default=None)
    subparsers["evaluate"] = p

    p = sub.add_parser("run-all", help="full pipeline in one pass",
                       epilog=EXIT_CODES_HELP)
    _add_generator_flags(p, n_default=9798)
    p.add_argument("--seed", type=int, default=42)
    _add_run_flags(p)
    p.add_argument("--config", type=str, default=None)
    subparsers["run-all"] = p

    p = sub.add_parser("predict", help="class probabilities for dataset rows",
                       epilog=EXIT_CODES_HELP)
    p.add_argument("--model", type=str, required=True, help="model JSON file")
    p.add_argument("--data", type=str, required=True, help="dataset CSV path")
    p.add_argument("--out", type=str, default=None, help="output CSV (default stdout)")
    p.add_argument("--config", type=str, default=None)
    subparsers["predict"] = p

    return parser, subparsers


def _apply_config_file(parser, subparsers, argv):
    """TOML values become defaults; explicit flags keep priority."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            from .errors import DataFileError

            raise DataFileError(f"config file not found: {path}")
        with open(path, "rb") as fh:
            values = tomllib.load(fh)
        sp = subparsers[args.command]
        known = {a.dest for a in sp._actions}
        unknown = [k for k in values if k not in known]
        if unknown:
            raise SchemaError(f"unknown config keys {unknown} for {args.command}")
        sp.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def _generator_config(args) -> GeneratorConfig:
    kwargs = dict(n_total=args.n, noise_sigma=args.noise_sigma, seed=args.seed,
                  suppression_tx_mean=args.suppression_tx_mean)
    if args.proportions:
        kwargs["class_proportions"] = _parse_proportions(args.proportions)
    return GeneratorConfig(**kwargs)


def _run_config(args) -> RunConfig:
    return RunConfig(
        seed=args.seed,
        models=_parse_models(args.models),
        hpo=not args.no_hpo,
        hpo_budget=args.hpo_budget,
        train_fraction=args.train_fraction,
        threads=args.threads,
    )


def _cmd_synth(args) -> int:
    dataset = generate_dataset(_generator_config(args))
    save_dataset(dataset, args.out)
    print(f"[frad] wrote {dataset.n_rows} rows to {args.out} (seed={args.seed})")
    return 0


def _cmd_corr(args) -> int:
    dataset = load_dataset(args.data)
    corr = pearson_correlation(dataset.features, dataset.feature_names)
    render_heatmap(corr, args.out, meta=f"source={args.data}")
    print(f"[frad] wrote correlation heatmap to {args.out}")
    return 0


def _cmd_predict(args) -> int:
    from .model_io import load_model, load_standardizer

    dataset = load_dataset(args.data)
    model, doc = load_model(args.model, expect_feature_names=dataset.feature_names)
    scaler = load_standardizer(doc)
    X = apply_standardizer(scaler, dataset.features) if scaler else dataset.features
    probs = model.predict_proba(X)
    labels = predicted_class(probs)
    lines = ["prob_displacement,prob_insertion,prob_suppression,predicted_label"]
    for row, lab in zip(probs, labels):
        lines.append(",".join(repr(float(v)) for v in row) + f",{int(lab)}")
    payload = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
        print(f"[frad] wrote {len(labels)} predictions to {args.out}")
    else:
        sys.stdout.write(payload)
    return 0


def main(argv=None) -> int:
    parser, subparsers = _build_parser()
    try:
        args = _apply_config_file(parser, subparsers, argv)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "corr":
            return _cmd_corr(args)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "evaluate":
            evaluate_run(args.run_dir)
            return 0
        out_dir = args.out_dir or _default_out_dir()
        if args.command == "train":
            train_run(args.data, _run_config(args), out_dir)
            return 0
        if args.command == "run-all":
            run_all(_generator_config(args), _run_config(args), out_dir)
            return 0
        raise SchemaError(f"unknown command {args.command!r}")
    except FradError as exc:
        print(f"frad: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
