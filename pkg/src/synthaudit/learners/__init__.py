"""From-scratch classifiers, cross-entropy risks and classification metrics."""

from .forest import ForestModel, ForestParams, train_forest
from .logistic import LogisticModel, LogisticParams, logistic_objective, train_logistic
from .losses import bce_loss, cce_loss
from .metrics import MetricsBundle, classification_metrics, midranks, roc_auc_binary
from .validation import (FOREST, LOGISTIC, ClassifierSpec, CrossValidationResult,
                         cross_validate, evaluate, stability_flags)

__all__ = [
    "ForestModel", "ForestParams", "train_forest",
    "LogisticModel", "LogisticParams", "logistic_objective", "train_logistic",
    "bce_loss", "cce_loss",
    "MetricsBundle", "classification_metrics", "midranks", "roc_auc_binary",
    "FOREST", "LOGISTIC", "ClassifierSpec", "CrossValidationResult",
    "cross_validate", "evaluate", "stability_flags",
]
