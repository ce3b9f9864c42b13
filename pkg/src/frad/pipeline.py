"""End-to-end orchestration: split, standardize, search, fit, report.

The whole run is a pure function of its configuration. Every component seed
is derived from the master seed through a named path, worker threads only
ever fit independent pre-seeded trees, and report writers avoid wall-clock
content, so re-running a persisted configuration reproduces every artifact
byte for byte (trial logs exclude their duration field from this guarantee;
durations are wall-clock measurements).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .data import FEATURE_NAMES, Dataset, load_dataset, save_dataset
from .datagen import GeneratorConfig, generate_dataset
from .ensembles import (
    BoostModel,
    BoostParams,
    ForestModel,
    ForestParams,
    fit_boosting,
    fit_random_forest,
    predicted_class,
)
from .errors import SchemaError
from .evaluate import (
    comparison_report,
    compute_metrics,
    confusion_matrix,
    stratified_split,
)
from .features import apply_standardizer, fit_standardizer, pearson_correlation, render_heatmap
from .hpo import MODEL_SPACES, bayes_optimize, write_trials_jsonl
from .mlp import MlpTrainConfig, train_mlp
from .model_io import save_model
from .tree import TreeParams
from .utils import child_seed, config_hash, to_jsonable, dumps_canonical

ALL_MODELS = ("rf", "gb", "xgb", "mlp")

# fixed (non-searched) settings per model family
RF_DEFAULTS = ForestParams(
    n_trees=200, bootstrap=True,
    tree=TreeParams(max_depth=12, min_samples_leaf=1, n_feature_candidates=4))
GB_DEFAULTS = BoostParams(
    n_rounds=150, learning_rate=0.1,
    tree=TreeParams(max_depth=3, min_samples_leaf=5, n_feature_candidates=0),
    subsample_rows=1.0, subsample_cols=1.0, variant="first_order")
XGB_DEFAULTS = BoostParams(
    n_rounds=150, learning_rate=0.1,
    tree=TreeParams(max_depth=4, min_samples_leaf=5, n_feature_candidates=0,
                    reg_lambda=1.0, gamma=0.0),
    subsample_rows=1.0, subsample_cols=0.8, variant="second_order")
MLP_DEFAULTS = MlpTrainConfig()

MIN_SAMPLES_LEAF_BOOST = 5
XGB_SUBSAMPLE_COLS = 0.8
HPO_N_INIT = 8


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    models: tuple = ALL_MODELS
    hpo: bool = True
    hpo_budget: int = 25
    train_fraction: float = 0.8
    threads: int = 1

    def __post_init__(self):
        bad = [m for m in self.models if m not in ALL_MODELS]
        if bad:
            raise SchemaError(f"unknown models {bad}; choose from {ALL_MODELS}")
        if self.hpo and self.hpo_budget < 1:
            raise SchemaError("hpo_budget must be >= 1")


def params_from_trial(name: str, trial: dict | None, seed: int):
    """Translate a named HPO point (or None for defaults) into fit params."""
    if name == "rf":
        if trial is None:
            return RF_DEFAULTS
        return ForestParams(
            n_trees=int(trial["n_trees"]), bootstrap=True,
            tree=TreeParams(max_depth=int(trial["max_depth"]), min_samples_leaf=1,
                            n_feature_candidates=int(trial["n_feature_candidates"])))
    if name == "gb":
        if trial is None:
            return GB_DEFAULTS
        return BoostParams(
            n_rounds=int(trial["n_rounds"]), learning_rate=float(trial["learning_rate"]),
            tree=TreeParams(max_depth=int(trial["max_depth"]),
                            min_samples_leaf=MIN_SAMPLES_LEAF_BOOST,
                            n_feature_candidates=0),
            subsample_rows=float(trial["subsample"]), subsample_cols=1.0,
            variant="first_order")
    if name == "xgb":
        if trial is None:
            return XGB_DEFAULTS
        return BoostParams(
            n_rounds=int(trial["n_rounds"]), learning_rate=float(trial["learning_rate"]),
            tree=TreeParams(max_depth=int(trial["max_depth"]),
                            min_samples_leaf=MIN_SAMPLES_LEAF_BOOST,
                            n_feature_candidates=0,
                            reg_lambda=float(trial["reg_lambda"]), gamma=0.0),
            subsample_rows=float(trial["subsample"]), subsample_cols=XGB_SUBSAMPLE_COLS,
            variant="second_order")
    if name == "mlp":
        if trial is None:
            return replace(MLP_DEFAULTS, seed=seed)
        return replace(
            MLP_DEFAULTS,
            n_hidden=int(trial["n_hidden"]),
            initial_learning_rate=float(trial["learning_rate"]),
            batch_size=int(trial["batch_size"]),
            seed=seed)
    raise SchemaError(f"unknown model {name!r}")


def fit_model(name: str, params, X: np.ndarray, y: np.ndarray, seed: int, threads: int):
    if name == "rf":
        return fit_random_forest(X, y, params, seed, n_threads=threads)
    if name in ("gb", "xgb"):
        return fit_boosting(X, y, params, seed, n_threads=threads)
    if name == "mlp":
        model, _ = train_mlp(X, y, params)
        return model
    raise SchemaError(f"unknown model {name!r}")


def _hpo_search(name: str, train: Dataset, cfg: RunConfig):
    """Maximize validation accuracy on a seeded 75/25 split of the train set."""
    inner_train, inner_val = stratified_split(
        train, 0.75, seed=child_seed(cfg.seed, name, "hpo-split"))
    scaler = fit_standardizer(inner_train.features)
    Xi = apply_standardizer(scaler, inner_train.features)
    Xv = apply_standardizer(scaler, inner_val.features)
    yi, yv = inner_train.labels, inner_val.labels
    fit_seed = child_seed(cfg.seed, name, "hpo-fit")

    def objective(trial_params: dict) -> float:
        params = params_from_trial(name, trial_params, fit_seed)
        model = fit_model(name, params, Xi, yi, fit_seed, cfg.threads)
        pred = predicted_class(model.predict_proba(Xv))
        return float((pred == yv).mean())

    n_init = min(HPO_N_INIT, cfg.hpo_budget)
    return bayes_optimize(
        objective, MODEL_SPACES[name], budget=cfg.hpo_budget, n_init=n_init,
        seed=child_seed(cfg.seed, name, "hpo"))


def train_models(dataset: Dataset, cfg: RunConfig, out_dir, run_id: str, cfg_hash: str,
                 log=print):
    """Split, optionally search, fit and persist every requested model.

    Returns (reports, artifacts dict).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train, test = stratified_split(dataset, cfg.train_fraction, seed=cfg.seed)
    scaler = fit_standardizer(train.features)
    Xtr = apply_standardizer(scaler, train.features)
    Xte = apply_standardizer(scaler, test.features)

    reports = []
    model_params = {}
    trials_files = {}
    for name in cfg.models:
        trial_params = None
        if cfg.hpo:
            log(f"[frad] {name}: hyperparameter search, budget {cfg.hpo_budget}")
            best, trials = _hpo_search(name, train, cfg)
            trials_file = f"trials_{name}.jsonl"
            write_trials_jsonl(trials, out_dir / trials_file)
            trials_files[name] = trials_file
            trial_params = best.params
            log(f"[frad] {name}: best validation accuracy "
                f"{best.objective:.4f} at {best.params}")
        params = params_from_trial(name, trial_params, child_seed(cfg.seed, name, "final"))
        log(f"[frad] {name}: fitting final model on {train.n_rows} rows")
        model = fit_model(name, params, Xtr, train.labels,
                          child_seed(cfg.seed, name, "final"), cfg.threads)
        save_model(
            out_dir / f"model_{name}.json", model,
            feature_names=dataset.feature_names, standardizer=scaler,
            mlp_config=params if name == "mlp" else None,
            config_hash=cfg_hash)
        y_pred = predicted_class(model.predict_proba(Xte))
        cm = confusion_matrix(test.labels, y_pred)
        rep = compute_metrics(cm, model_name=name)
        log(f"[frad] {name}: test accuracy {rep.accuracy:.4f}, "
            f"macro F1 {rep.macro_f1:.4f}")
        reports.append(rep)
        model_params[name] = _params_payload(name, params)
    payload = comparison_report(
        reports, out_dir, run_id=run_id, seed=cfg.seed,
        dataset_provenance=dataset.provenance,
        model_params=model_params, trials_files=trials_files)
    return reports, payload


def _params_payload(name: str, params) -> dict:
    from dataclasses import asdict

    return to_jsonable(asdict(params))


def run_all(gen_cfg: GeneratorConfig, cfg: RunConfig, out_dir, log=print):
    """Generate, analyze, train, and report in one deterministic pass."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    from dataclasses import asdict

    semantic = {
        "command": "run-all",
        "generator": to_jsonable(asdict(gen_cfg)),
        "run": {
            "seed": cfg.seed, "models": list(cfg.models), "hpo": cfg.hpo,
            "hpo_budget": cfg.hpo_budget, "train_fraction": cfg.train_fraction,
        },
    }
    cfg_hash = config_hash(semantic)
    run_id = f"frad-{cfg_hash}"
    log(f"[frad] run {run_id}: generating {gen_cfg.n_total} rows "
        f"(noise_sigma={gen_cfg.noise_sigma})")
    dataset = generate_dataset(gen_cfg)
    save_dataset(dataset, out_dir / "dataset.csv")
    if dataset.n_rows >= 2:
        corr = pearson_correlation(dataset.features, dataset.feature_names)
        render_heatmap(corr, out_dir / "correlation.svg",
                       meta=f"run_id={run_id} seed={cfg.seed}")
    run_config = {
        **semantic,
        "run_id": run_id,
        "config_hash": cfg_hash,
        "dataset": "dataset.csv",
        "threads": cfg.threads,
    }
    (out_dir / "run_config.json").write_text(
        dumps_canonical(to_jsonable(run_config)) + "\n", encoding="utf-8")
    reports, payload = train_models(dataset, cfg, out_dir, run_id, cfg_hash, log=log)
    log(f"[frad] artifacts written to {out_dir}")
    return reports, payload


def train_run(dataset_path, cfg: RunConfig, out_dir, log=print):
    """Train on an existing dataset file, persisting the same artifact set."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = load_dataset(dataset_path)
    semantic = {
        "command": "train",
        "dataset": str(dataset_path),
        "run": {
            "seed": cfg.seed, "models": list(cfg.models), "hpo": cfg.hpo,
            "hpo_budget": cfg.hpo_budget, "train_fraction": cfg.train_fraction,
        },
    }
    cfg_hash = config_hash(semantic)
    run_id = f"frad-{cfg_hash}"
    run_config = {
        **semantic,
        "run_id": run_id,
        "config_hash": cfg_hash,
        "threads": cfg.threads,
    }
    (out_dir / "run_config.json").write_text(
        dumps_canonical(to_jsonable(run_config)) + "\n", encoding="utf-8")
    reports, payload = train_models(dataset, cfg, out_dir, run_id, cfg_hash, log=log)
    log(f"[frad] artifacts written to {out_dir}")
    return reports, payload


def evaluate_run(run_dir, log=print):
    """Re-score the persisted models of a run directory on its test split."""
    import json

    from .model_io import load_model, load_standardizer

    run_dir = Path(run_dir)
    config_path = run_dir / "run_config.json"
    if not config_path.exists():
        from .errors import DataFileError

        raise DataFileError(f"no run_config.json in {run_dir}")
    run_config = json.loads(config_path.read_text(encoding="utf-8"))
    dataset_ref = run_config["dataset"]
    dataset_path = run_dir / dataset_ref if (run_dir / dataset_ref).exists() else Path(dataset_ref)
    dataset = load_dataset(dataset_path)
    run = run_config["run"]
    _, test = stratified_split(dataset, run["train_fraction"], seed=run["seed"])
    reports = []
    model_params = {}
    trials_files = {}
    for name in run["models"]:
        model, doc = load_model(run_dir / f"model_{name}.json",
                                expect_feature_names=dataset.feature_names)
        scaler = load_standardizer(doc)
        Xte = apply_standardizer(scaler, test.features) if scaler else test.features
        y_pred = predicted_class(model.predict_proba(Xte))
        cm = confusion_matrix(test.labels, y_pred)
        rep = compute_metrics(cm, model_name=name)
        log(f"[frad] {name}: test accuracy {rep.accuracy:.4f}, macro F1 {rep.macro_f1:.4f}")
        reports.append(rep)
        model_params[name] = doc["params"]
        if (run_dir / f"trials_{name}.jsonl").exists():
            trials_files[name] = f"trials_{name}.jsonl"
    payload = comparison_report(
        reports, run_dir, run_id=run_config["run_id"], seed=run["seed"],
        dataset_provenance=dataset.provenance if run_config["command"] == "train"
        else "synthetic",
        model_params=model_params, trials_files=trials_files)
    return reports, payload
