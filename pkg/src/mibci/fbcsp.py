"""Filter-bank CSP feature extraction with mutual-information selection.

For every band of the filter bank and every class-vs-rest pairing a
spatial-filter model is fitted; the flattened log-variance features are
then ranked by mutual information with the class label and the top
entries kept.  Feature order is band-major, then pairing, then
component, and every feature carries a (band, pairing, component)
provenance tag.
"""

from __future__ import annotations

import json

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .csp import CspModel, csp_fit, regularized_covariance
from .filters import DEFAULT_BANDS, FilterBank


def equal_frequency_bins(values: np.ndarray, n_bins: int = 8) -> np.ndarray:
    """Discretize a feature into (at most) n_bins quantile bins.

    Duplicate quantile edges collapse bins, so a constant feature lands
    in a single bin.
    """
    values = np.asarray(values, dtype=np.float64)
    edges = np.quantile(values, np.arange(1, n_bins) / n_bins)
    return np.searchsorted(edges, values, side="right")


def mutual_information_rank(
    features: np.ndarray, labels: np.ndarray, n_bins: int = 8
) -> tuple[np.ndarray, np.ndarray]:
    """Rank feature columns by mutual information with the label.

    MI is the plug-in estimate on the joint histogram of the
    equal-frequency-binned feature and the label, in nats.

    Parameters
    ----------
    features : ndarray, (n_trials, n_features)
    labels : ndarray, (n_trials,)
    n_bins : int
        Bins for the equal-frequency discretization.

    Returns
    -------
    order : ndarray of int
        Feature indices, best first; ties break toward the lower index.
    scores : ndarray of float
        MI score per feature, in the original column order.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("mutual information needs at least two classes")
    n = labels.shape[0]
    class_idx = np.searchsorted(classes, labels)

    scores = np.empty(features.shape[1])
    for j in range(features.shape[1]):
        bins = equal_frequency_bins(features[:, j], n_bins)
        joint = np.zeros((bins.max() + 1, classes.size))
        np.add.at(joint, (bins, class_idx), 1.0)
        joint /= n
        pb = joint.sum(axis=1, keepdims=True)
        pc = joint.sum(axis=0, keepdims=True)
        mask = joint > 0
        scores[j] = float(np.sum(joint[mask] * np.log(joint[mask] / (pb @ pc)[mask])))

    order = np.lexsort((np.arange(scores.size), -scores))
    return order, scores


_FILTER_CHUNK = 256


def _apply_band(bank: FilterBank, band_index: int, X: np.ndarray) -> np.ndarray:
    """Band-filter a trial stack in chunks to bound peak memory."""
    if len(X) <= _FILTER_CHUNK:
        return bank.apply(X, band_index)
    return np.concatenate(
        [bank.apply(X[i:i + _FILTER_CHUNK], band_index)
         for i in range(0, len(X), _FILTER_CHUNK)]
    )


def _batch_logvar_features(models: list[CspModel], band_data: np.ndarray) -> np.ndarray:
    """Log-variance features for all trials under all pairing models.

    band_data is (n_trials, channels, samples); output is
    (n_trials, n_pairings * m), pairing-major, matching csp_features on
    each trial individually.
    """
    cols = []
    for model in models:
        projected = np.einsum("mc,ncs->nms", model.filters, band_data)
        variances = projected.var(axis=2)
        totals = variances.sum(axis=1, keepdims=True)
        if np.any(totals <= 0.0):
            bad = int(np.argmax(totals[:, 0] <= 0.0))
            raise ValueError(f"trial {bad}: zero total variance under spatial filters")
        cols.append(np.log(variances / totals))
    return np.concatenate(cols, axis=1)


class FbcspTransformer(BaseEstimator, TransformerMixin):
    """Band-filtered CSP features with mutual-information selection.

    Parameters
    ----------
    bands : sequence of BandSpec, optional
        Filter-bank bands; defaults to the seven-band decomposition.
    filter_order : int, default 5
    sample_rate : float, default 250.0
    components_per_band : even int, default 4
        Spatial filters kept per (band, pairing).
    select_k : int, default 4
        Features kept after MI ranking ("global": in total;
        "per_pairing": per class pairing).
    selection : {"global", "per_pairing"}, default "global"
    shrinkage : float, default 0.05
        Covariance shrinkage weight.
    n_bins : int, default 8
        Bins for the MI estimator.
    expected_classes : tuple of int, default (1, 2, 3, 4)
        Classes that must all be present in the training labels.

    Attributes
    ----------
    models_ : dict mapping (band_index, class) to CspModel
    selected_ : ndarray of int
        Indices into the flattened pre-selection feature vector.
    provenance_ : list of (band_name, pairing, component) per flattened index
    n_features_pre_ : int
        Flattened feature count before selection.
    """

    def __init__(self, bands=None, filter_order=5, sample_rate=250.0,
                 components_per_band=4, select_k=4, selection="global",
                 shrinkage=0.05, n_bins=8, expected_classes=(1, 2, 3, 4)):
        self.bands = bands
        self.filter_order = filter_order
        self.sample_rate = sample_rate
        self.components_per_band = components_per_band
        self.select_k = select_k
        self.selection = selection
        self.shrinkage = shrinkage
        self.n_bins = n_bins
        self.expected_classes = expected_classes

    def _validate_X(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 3:
            raise ValueError(f"X must be (n_trials, channels, samples), got {X.shape}")
        return X

    def fit(self, X, y):
        """Fit band filters, per-pairing spatial filters, and selection.

        Parameters
        ----------
        X : ndarray, (n_trials, channels, samples)
        y : ndarray, (n_trials,) of class labels
        """
        self._fit(X, y)
        return self

    def fit_transform(self, X, y):
        """Fit and return the training features without refiltering."""
        features = self._fit(X, y)
        return features[:, self.selected_]

    def _fit(self, X, y):
        X = self._validate_X(X)
        y = np.asarray(y)
        classes = sorted(self.expected_classes)
        missing = [c for c in classes if not np.any(y == c)]
        if missing:
            raise ValueError(f"training labels are missing class(es) {missing}")

        self.bank_ = FilterBank(
            bands=self.bands if self.bands is not None else DEFAULT_BANDS,
            order=self.filter_order,
            sample_rate=self.sample_rate,
        )
        self.classes_ = classes
        m = self.components_per_band

        self.models_ = {}
        self.provenance_ = []
        feature_blocks = []
        for b, band in enumerate(self.bank_.bands):
            Xb = _apply_band(self.bank_, b, X)
            band_models = []
            for c in classes:
                cov_c = regularized_covariance(Xb[y == c], self.shrinkage)
                cov_rest = regularized_covariance(Xb[y != c], self.shrinkage)
                model = csp_fit(cov_c, cov_rest, m, pairing=f"class{c}-vs-rest")
                self.models_[(b, c)] = model
                band_models.append(model)
                self.provenance_.extend(
                    (band.name, f"class{c}-vs-rest", j) for j in range(m)
                )
            feature_blocks.append(_batch_logvar_features(band_models, Xb))
        features = np.concatenate(feature_blocks, axis=1)
        self.n_features_pre_ = features.shape[1]

        order, scores = mutual_information_rank(features, y, self.n_bins)
        self.mi_scores_ = scores
        if self.selection == "global":
            if self.select_k > self.n_features_pre_:
                raise ValueError(
                    f"select_k={self.select_k} exceeds the {self.n_features_pre_} "
                    "available features"
                )
            self.selected_ = order[: self.select_k]
        elif self.selection == "per_pairing":
            per_class = self.n_features_pre_ // len(classes)
            if self.select_k > per_class:
                raise ValueError(
                    f"select_k={self.select_k} exceeds the {per_class} features "
                    "per pairing"
                )
            chosen = []
            for c in classes:
                pairing = f"class{c}-vs-rest"
                member = np.array(
                    [i for i in order if self.provenance_[i][1] == pairing]
                )
                chosen.extend(member[: self.select_k])
            self.selected_ = np.array(chosen)
        else:
            raise ValueError(f"unknown selection mode {self.selection!r}")
        return features

    def transform(self, X):
        """Project trials to the selected feature vector.

        Returns
        -------
        ndarray, (n_trials, k)
        """
        X = self._validate_X(X)
        n_chan = self.models_[(0, self.classes_[0])].filters.shape[1]
        if X.shape[1] != n_chan:
            raise ValueError(f"trials have {X.shape[1]} channels, expected {n_chan}")
        blocks = []
        for b in range(len(self.bank_)):
            Xb = _apply_band(self.bank_, b, X)
            band_models = [self.models_[(b, c)] for c in self.classes_]
            blocks.append(_batch_logvar_features(band_models, Xb))
        features = np.concatenate(blocks, axis=1)
        return features[:, self.selected_]

    def feature_names(self) -> list[str]:
        """Human-readable provenance of each output feature, in order."""
        return [
            f"{band}/{pairing}/c{comp}"
            for band, pairing, comp in
            (self.provenance_[i] for i in self.selected_)
        ]

    def to_dict(self) -> dict:
        return {
            "schema": "mibci-fbcsp/1",
            "bank": self.bank_.to_dict(),
            "components_per_band": self.components_per_band,
            "select_k": self.select_k,
            "selection": self.selection,
            "shrinkage": self.shrinkage,
            "n_bins": self.n_bins,
            "classes": list(self.classes_),
            "n_features_pre": self.n_features_pre_,
            "selected": [int(i) for i in self.selected_],
            "provenance": [list(p) for p in self.provenance_],
            "models": [
                {
                    "band_index": b,
                    "pairing_class": c,
                    "pairing": model.pairing,
                    "filters": model.filters.tolist(),
                    "eigenvalues": model.eigenvalues.tolist(),
                }
                for (b, c), model in sorted(self.models_.items())
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FbcspTransformer":
        if d.get("schema") != "mibci-fbcsp/1":
            raise ValueError(f"unsupported extractor schema {d.get('schema')!r}")
        bank = FilterBank.from_dict(d["bank"])
        est = cls(
            bands=bank.bands,
            filter_order=bank.order,
            sample_rate=bank.sample_rate,
            components_per_band=d["components_per_band"],
            select_k=d["select_k"],
            selection=d["selection"],
            shrinkage=d["shrinkage"],
            n_bins=d["n_bins"],
            expected_classes=tuple(d["classes"]),
        )
        est.bank_ = bank
        est.classes_ = list(d["classes"])
        est.n_features_pre_ = d["n_features_pre"]
        est.selected_ = np.array(d["selected"], dtype=int)
        est.provenance_ = [tuple(p) for p in d["provenance"]]
        est.models_ = {
            (m["band_index"], m["pairing_class"]): CspModel(
                filters=np.array(m["filters"]),
                eigenvalues=np.array(m["eigenvalues"]),
                pairing=m["pairing"],
            )
            for m in d["models"]
        }
        return est

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "FbcspTransformer":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
