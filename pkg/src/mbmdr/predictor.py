"""Individual prediction from the top-ranked MDR models.

A trained classifier keeps the s best models. For a new sample, each model
contributes the cell the sample falls into: its case proportion for
probability estimates, its H/L label for hard classification, and +1/-1/0
for the additive risk score. Cells labeled O, empty cells and lookups hitting
a missing genotype either drop out of the average (``o_as_na``) or contribute
the global training case proportion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import MISSING, GenotypeDataset
from .engine import (
    LABEL_H,
    LABEL_L,
    LABEL_O,
    HyperParams,
    MdrModel,
    enumerate_and_rank,
    mixed_radix_codes,
)
from .errors import ValidationError

MODEL_FORMAT_VERSION = 1

_LABEL_CHARS = {LABEL_H: "H", LABEL_L: "L", LABEL_O: "O"}
_CHAR_LABELS = {v: k for k, v in _LABEL_CHARS.items()}


@dataclass(frozen=True)
class MbmdrClassifier:
    """Top-s MDR models plus the metadata needed to validate and score inputs."""

    models: tuple[MdrModel, ...]
    hyperparams: HyperParams
    fallback: float
    feature_names: tuple[str, ...]
    levels: np.ndarray

    @property
    def s(self) -> int:
        return len(self.models)

    @property
    def o_as_na(self) -> bool:
        return self.hyperparams.o_as_na


def train_classifier(ds: GenotypeDataset, hp: HyperParams, ranking=None,
                     **enumerate_kwargs) -> MbmdrClassifier:
    """Enumerate and rank all tuples, keep the s best models.

    A precomputed ranking for the same (ds, hp) may be passed to avoid
    repeating the scan.
    """
    if ranking is None:
        ranking = enumerate_and_rank(ds, hp, **enumerate_kwargs)
    return MbmdrClassifier(
        models=tuple(ranking.top(hp.s)),
        hyperparams=hp,
        fallback=ds.case_fraction,
        feature_names=ds.feature_names,
        levels=ds.levels.copy(),
    )


def _as_matrix(clf: MbmdrClassifier, x) -> tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=np.int64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != len(clf.feature_names):
        raise ValidationError(
            f"expected {len(clf.feature_names)} features, got shape {X.shape}"
        )
    bad = (X != MISSING) & ((X < 0) | (X >= clf.levels[None, :]))
    if bad.any():
        j = int(np.argmax(bad.any(axis=0)))
        raise ValidationError(
            f"feature {clf.feature_names[j]!r}: level out of range"
            f" (levels must be in [0, {int(clf.levels[j])}) or missing)"
        )
    return X, single


def _cell_lookup(clf: MbmdrClassifier, X: np.ndarray):
    """Per-model labels and case proportions for each sample.

    Returns (labels (s, n) int8 with O for missing lookups, proportions (s, n)
    with NaN wherever no cell proportion is available).
    """
    n = X.shape[0]
    labels = np.zeros((clf.s, n), dtype=np.int8)
    props = np.full((clf.s, n), np.nan)
    for i, m in enumerate(clf.models):
        codes = mixed_radix_codes(X[:, list(m.tuple)], m.radices)
        valid = codes >= 0
        labels[i, valid] = m.labels[codes[valid]]
        props[i, valid] = m.case_proportion[codes[valid]]
    return labels, props


def predict_proba(clf: MbmdrClassifier, x):
    """Estimated probability of being a case (mean of per-model cell proportions).

    H and L cells contribute their case proportion; O cells, empty cells and
    missing lookups are skipped when ``o_as_na`` else contribute the global
    fallback. When every model is skipped the fallback is returned.
    """
    X, single = _as_matrix(clf, x)
    labels, props = _cell_lookup(clf, X)
    informative = (labels != LABEL_O) & np.isfinite(props)
    if clf.o_as_na:
        contrib = np.where(informative, props, 0.0)
        k = informative.sum(axis=0)
        with np.errstate(invalid="ignore"):
            out = np.where(k > 0, contrib.sum(axis=0) / np.maximum(k, 1), clf.fallback)
    else:
        contrib = np.where(informative, props, clf.fallback)
        out = contrib.mean(axis=0)
    return float(out[0]) if single else out


def predict_class(clf: MbmdrClassifier, x):
    """Hard 0/1 prediction: majority label over the s models.

    Ties (including all-O) go to the majority class of the training data
    (1 iff fallback > 0.5).
    """
    X, single = _as_matrix(clf, x)
    labels, _ = _cell_lookup(clf, X)
    n_h = (labels == LABEL_H).sum(axis=0)
    n_l = (labels == LABEL_L).sum(axis=0)
    tie_class = 1 if clf.fallback > 0.5 else 0
    out = np.where(n_h > n_l, 1, np.where(n_l > n_h, 0, tie_class)).astype(np.int64)
    return int(out[0]) if single else out


def risk_score(clf: MbmdrClassifier, x):
    """Additive risk score in [-s, s]: +1 per H cell, -1 per L cell, 0 otherwise."""
    X, single = _as_matrix(clf, x)
    labels, _ = _cell_lookup(clf, X)
    out = labels.astype(np.int64).sum(axis=0)
    return int(out[0]) if single else out


def _model_to_dict(m: MdrModel) -> dict:
    return {
        "tuple": list(m.tuple),
        "radices": list(m.radices),
        "statistic": m.statistic,
        "labels": "".join(_LABEL_CHARS[int(v)] for v in m.labels),
        "case_proportion": [None if not np.isfinite(v) else float(v)
                            for v in m.case_proportion],
        "case_counts": [int(v) for v in m.case_counts],
        "control_counts": [int(v) for v in m.control_counts],
        "fallback": m.fallback,
    }


def _model_from_dict(d: dict) -> MdrModel:
    return MdrModel(
        tuple=tuple(d["tuple"]),
        radices=tuple(d["radices"]),
        labels=np.array([_CHAR_LABELS[c] for c in d["labels"]], dtype=np.int8),
        case_proportion=np.array([np.nan if v is None else v
                                  for v in d["case_proportion"]]),
        case_counts=np.array(d["case_counts"], dtype=np.int64),
        control_counts=np.array(d["control_counts"], dtype=np.int64),
        statistic=float(d["statistic"]),
        fallback=float(d["fallback"]),
    )


def save_model(clf: MbmdrClassifier, path) -> None:
    """Write the classifier as versioned JSON (floats keep full precision)."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "hyperparams": clf.hyperparams.to_dict(),
        "fallback": clf.fallback,
        "feature_names": list(clf.feature_names),
        "levels": [int(v) for v in clf.levels],
        "models": [_model_to_dict(m) for m in clf.models],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> MbmdrClassifier:
    """Load a classifier saved by :func:`save_model`.

    Raises ValidationError on malformed files or unknown format versions.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: truncated or malformed model file: {exc}") from exc
    try:
        version = doc["format_version"]
        if version != MODEL_FORMAT_VERSION:
            raise ValidationError(
                f"{path}: unsupported model file version {version!r}"
                f" (this build reads version {MODEL_FORMAT_VERSION})"
            )
        return MbmdrClassifier(
            models=tuple(_model_from_dict(d) for d in doc["models"]),
            hyperparams=HyperParams.from_dict(doc["hyperparams"]),
            fallback=float(doc["fallback"]),
            feature_names=tuple(doc["feature_names"]),
            levels=np.array(doc["levels"], dtype=np.int64),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: model file violates the schema: {exc}") from exc
