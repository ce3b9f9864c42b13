"""frad: ternary classification of Ethereum front-running attacks.

Classifies attack records into displacement, insertion, and suppression
using four from-scratch models (random forest, first- and second-order
gradient boosting, MLP) with Gaussian-process Bayesian hyperparameter
search, plus a synthetic scenario generator and a full evaluation report.
"""

from .data import (
    AttackClass,
    AttackInstance,
    CLASS_NAMES,
    CSV_HEADER,
    Dataset,
    FEATURE_NAMES,
    decode_label,
    encode_label,
    load_dataset,
    save_dataset,
)
from .datagen import GeneratorConfig, generate_dataset, generate_instance, rule_classify
from .ensembles import (
    BoostModel,
    BoostParams,
    ForestModel,
    ForestParams,
    fit_boosting,
    fit_random_forest,
    predict_proba,
    predicted_class,
)
from .errors import FradError
from .evaluate import (
    ConfusionMatrix,
    MetricsReport,
    compute_metrics,
    confusion_matrix,
    comparison_report,
    per_class_recall,
    stratified_split,
)
from .features import (
    CorrelationMatrix,
    Standardizer,
    apply_standardizer,
    featurize,
    fit_standardizer,
    invert_standardizer,
    pearson_correlation,
    render_heatmap,
)
from .hpo import (
    Dimension,
    GpSurrogate,
    KernelConfig,
    MODEL_SPACES,
    SearchSpace,
    Trial,
    bayes_optimize,
    expected_improvement,
    gp_fit,
    gp_posterior,
)
from .mlp import MlpModel, MlpTrainConfig, forward, init_mlp, loss_and_gradients, train_mlp
from .model_io import load_model, save_model
from .pipeline import RunConfig, run_all, train_run, evaluate_run
from .tree import (
    Tree,
    TreeParams,
    fit_classification_tree,
    fit_regression_tree,
    gini_impurity,
    predict_tree,
)

__version__ = "0.1.0"
