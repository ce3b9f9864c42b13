"""Versioned JSON model files for the four classifier families.

Envelope: ``{format_version, model_type, feature_names, params, trees|weights,
standardizer, seed, config_hash}``. The standardizer travels with the model
so a saved file is self-contained for prediction; loading a file against
data with different feature names is an error.
"""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .data import FEATURE_NAMES
from .ensembles import BoostModel, BoostParams, ForestModel, ForestParams
from .errors import DataFileError, FeatureMismatchError, SchemaError
from .features import Standardizer
from .mlp import MlpModel, MlpTrainConfig
from .tree import Tree, TreeParams
from .utils import dumps_canonical, to_jsonable

FORMAT_VERSION = 1


def _tree_params_from(d: dict) -> TreeParams:
    return TreeParams(**d)


def save_model(
    path,
    model,
    feature_names=FEATURE_NAMES,
    standardizer: Standardizer | None = None,
    mlp_config: MlpTrainConfig | None = None,
    config_hash: str | None = None,
) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "feature_names": list(feature_names),
        "standardizer": standardizer.as_dict() if standardizer else None,
        "config_hash": config_hash,
    }
    if isinstance(model, ForestModel):
        doc.update(
            model_type="random_forest",
            params=to_jsonable(asdict(model.params)),
            seed=model.seed,
            trees=[t.as_dict() for t in model.trees],
        )
    elif isinstance(model, BoostModel):
        doc.update(
            model_type="gradient_boosting",
            params=to_jsonable(asdict(model.params)),
            seed=model.seed,
            base_score=model.base_score.tolist(),
            train_loss=list(model.train_loss),
            trees=[[t.as_dict() for t in round_trees] for round_trees in model.stage_trees],
        )
    elif isinstance(model, MlpModel):
        if mlp_config is None:
            raise SchemaError("saving an MLP requires its training config")
        doc.update(
            model_type="mlp",
            params=to_jsonable(asdict(mlp_config)),
            seed=mlp_config.seed,
            weights=model.as_dict(),
        )
    else:
        raise SchemaError(f"cannot serialize model of type {type(model).__name__}")
    try:
        Path(path).write_text(dumps_canonical(doc) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataFileError(f"cannot write model to {path}: {exc}") from exc


def load_model(path, expect_feature_names=FEATURE_NAMES):
    """Returns (model, doc). ``doc`` keeps params/standardizer metadata."""
    path = Path(path)
    if not path.exists():
        raise DataFileError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFileError(f"cannot read model from {path}: {exc}") from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported model format version")
    names = tuple(doc.get("feature_names", ()))
    if expect_feature_names is not None and names != tuple(expect_feature_names):
        raise FeatureMismatchError(
            f"{path}: model feature names {names} do not match expected "
            f"{tuple(expect_feature_names)}")
    n_features = len(names)
    kind = doc.get("model_type")
    if kind == "random_forest":
        p = dict(doc["params"])
        params = ForestParams(
            n_trees=p["n_trees"], bootstrap=p["bootstrap"],
            tree=_tree_params_from(p["tree"]))
        trees = [
            Tree.from_dict(td, n_features, "classification", 3) for td in doc["trees"]
        ]
        model = ForestModel(trees=trees, params=params, seed=doc["seed"],
                            n_features=n_features)
    elif kind == "gradient_boosting":
        p = dict(doc["params"])
        params = BoostParams(
            n_rounds=p["n_rounds"], learning_rate=p["learning_rate"],
            tree=_tree_params_from(p["tree"]), subsample_rows=p["subsample_rows"],
            subsample_cols=p["subsample_cols"], variant=p["variant"])
        stage_trees = [
            [Tree.from_dict(td, n_features, "regression", 1) for td in round_trees]
            for round_trees in doc["trees"]
        ]
        model = BoostModel(
            stage_trees=stage_trees,
            base_score=np.array(doc["base_score"], dtype=np.float64),
            params=params, seed=doc["seed"], n_features=n_features,
            train_loss=list(doc.get("train_loss", [])))
    elif kind == "mlp":
        model = MlpModel.from_dict(doc["weights"])
    else:
        raise SchemaError(f"{path}: unknown model_type {kind!r}")
    return model, doc


def load_standardizer(doc: dict) -> Standardizer | None:
    raw = doc.get("standardizer")
    return Standardizer.from_dict(raw) if raw else None
