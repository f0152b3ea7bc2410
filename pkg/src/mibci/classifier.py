"""Swarm-tuned Sugeno fuzzy classifier with a sklearn-style surface.

fit() searches premise membership parameters and rule weights with a
global-best particle swarm whose fitness is accuracy on an internal
stratified validation split; consequents are refitted in closed form on
the full training data with the winning premise.  Synthetic
(augmented) rows can be flagged so that the internal validation split
only ever contains real trials.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._rng import PURPOSE_INNER_SPLIT, SplitMix64, derive_seed
from .anfis import (
    AnfisModel,
    RuleBase,
    anfis_finetune,
    fit_consequents,
    forward_batch,
    predict,
    rules_report,
)
from .pso import ParameterCodec, PsoConfig, make_validation_fitness, pso_optimize


class AnfisPsoClassifier(BaseEstimator, ClassifierMixin):
    """Grid-rule Sugeno classifier tuned by particle swarm.

    Parameters
    ----------
    mfs_per_input : int, default 2
        Fuzzy sets per input feature (grid rule base, capped at 128
        rules).
    mf_kind : {"gaussian", "bell", "triangular"}, default "gaussian"
    ridge : float, default 1e-3
        Ridge weight for the consequent least-squares fits.
    particles, iterations, c1, c2, inertia, velocity_clamp :
        Swarm settings; see PsoConfig.
    val_fraction : float, default 0.25
        Share of real training rows held out per class as the swarm's
        validation set.
    finetune : bool, default False
        Run gradient descent on the premise after the swarm, then refit
        consequents.
    finetune_epochs : int, default 200
    finetune_lr : float, default 0.02
    n_classes : int, default 4
    seed : int, default 0
    n_jobs : int or None
        Parallel fitness evaluations inside each swarm iteration.

    Attributes
    ----------
    model_ : AnfisModel
    history_ : list of dict
        Swarm history (iteration, gbest_fitness, mean_fitness).
    best_fitness_ : float
        Validation accuracy of the winning particle.
    inner_split_ : dict with "train" and "val" row-index lists.
    """

    def __init__(self, mfs_per_input=2, mf_kind="gaussian", ridge=1e-3,
                 particles=40, iterations=75, c1=1.7, c2=1.7,
                 inertia=(0.9, 0.7), velocity_clamp=0.2, val_fraction=0.25,
                 finetune=False, finetune_epochs=200, finetune_lr=0.02,
                 n_classes=4, seed=0, n_jobs=None):
        self.mfs_per_input = mfs_per_input
        self.mf_kind = mf_kind
        self.ridge = ridge
        self.particles = particles
        self.iterations = iterations
        self.c1 = c1
        self.c2 = c2
        self.inertia = inertia
        self.velocity_clamp = velocity_clamp
        self.val_fraction = val_fraction
        self.finetune = finetune
        self.finetune_epochs = finetune_epochs
        self.finetune_lr = finetune_lr
        self.n_classes = n_classes
        self.seed = seed
        self.n_jobs = n_jobs

    def _inner_split(self, y, real_mask):
        """Stratified split of real rows; synthetic rows go to train."""
        train_rows, val_rows = [], []
        for label in range(1, self.n_classes + 1):
            rows = [
                i for i in range(len(y))
                if y[i] == label and real_mask[i]
            ]
            rng = SplitMix64(derive_seed(self.seed, PURPOSE_INNER_SPLIT, label))
            rng.shuffle(rows)
            n_train = int(np.floor((1.0 - self.val_fraction) * len(rows)))
            train_rows.extend(rows[:n_train])
            val_rows.extend(rows[n_train:])
        train_rows.extend(i for i in range(len(y)) if not real_mask[i])
        if not val_rows:
            raise ValueError("internal validation split is empty; need more rows")
        return sorted(train_rows), sorted(val_rows)

    def fit(self, X, y, real_mask=None):
        """Tune premise and weights by swarm search, then fit consequents.

        Parameters
        ----------
        X : ndarray, (n_trials, n_features)
        y : ndarray of 1-based labels in [1, n_classes]
        real_mask : boolean array, optional
            False marks synthetic rows, which are excluded from the
            internal validation split.
        """
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        y = np.asarray(y, dtype=np.int64)
        if real_mask is None:
            real_mask = np.ones(len(y), dtype=bool)
        real_mask = np.asarray(real_mask, dtype=bool)
        if len(real_mask) != len(y) or len(y) != len(X):
            raise ValueError("X, y and real_mask lengths must agree")

        train_rows, val_rows = self._inner_split(y, real_mask)
        self.inner_split_ = {"train": train_rows, "val": val_rows}

        codec = ParameterCodec.for_features(
            X, mf_kind=self.mf_kind, mfs_per_input=self.mfs_per_input
        )
        fitness = make_validation_fitness(
            codec,
            X[train_rows], y[train_rows],
            X[val_rows], y[val_rows],
            ridge=self.ridge,
            n_classes=self.n_classes,
        )
        lower, upper = codec.bounds()
        result = pso_optimize(
            fitness, lower, upper,
            PsoConfig(
                particles=self.particles, iterations=self.iterations,
                c1=self.c1, c2=self.c2, inertia=self.inertia,
                velocity_clamp=self.velocity_clamp, seed=self.seed,
            ),
            maximize=True,
            n_jobs=self.n_jobs,
        )
        self.history_ = result.history
        self.best_fitness_ = result.best_fitness

        memberships, weights = codec.decode(result.best_position)
        rule_base = RuleBase(
            n_inputs=codec.n_inputs,
            mfs_per_input=self.mfs_per_input,
            weights=weights,
        )
        model = AnfisModel(
            memberships=memberships,
            rule_base=rule_base,
            consequents=np.zeros((rule_base.n_rules, self.n_classes, codec.n_inputs + 1)),
            n_classes=self.n_classes,
        )
        model = fit_consequents(model, X, y, self.ridge)

        if self.finetune:
            model, self.finetune_losses_ = anfis_finetune(
                model, X, y,
                epochs=self.finetune_epochs,
                learning_rate=self.finetune_lr,
            )
            model = fit_consequents(model, X, y, self.ridge)

        self.codec_ = codec
        self.model_ = model
        self.classes_ = np.arange(1, self.n_classes + 1)
        return self

    def decision_function(self, X):
        """Raw class scores, (n_trials, n_classes)."""
        scores, _ = forward_batch(self.model_, np.atleast_2d(X))
        return scores

    def predict(self, X):
        """1-based class labels; score ties go to the lowest class."""
        return predict(self.model_, np.atleast_2d(X))

    def rules(self, reference_X, input_names=None) -> str:
        """Human-readable rule listing on a reference feature set."""
        return rules_report(self.model_, reference_X, input_names=input_names)
