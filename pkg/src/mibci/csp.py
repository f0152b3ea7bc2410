"""Spatial-pattern filters from paired class covariances.

csp_fit solves the generalized symmetric eigenproblem for
(cov_a, cov_a + cov_b): the resulting filters simultaneously
diagonalize both class covariances, and the eigenvalues give the share
of variance class A keeps under each filter.  Taking filters from both
ends of the spectrum yields directions where the two classes differ
most in variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg


@dataclass
class CspModel:
    """Spatial filters from one class-vs-rest covariance pairing.

    filters has shape (m, channels); eigenvalues are the m matching
    generalized eigenvalues, each in [0, 1].
    """

    filters: np.ndarray
    eigenvalues: np.ndarray
    pairing: str = ""

    @property
    def n_components(self) -> int:
        return self.filters.shape[0]


def regularized_covariance(trials, shrinkage: float = 0.05) -> np.ndarray:
    """Average trace-normalized trial covariances with diagonal shrinkage.

    Each trial's covariance is divided by its trace so that trials
    contribute equally regardless of amplitude.  The average is then
    shrunk toward (trace/channels) * identity, which keeps it positive
    definite even when trials are few.

    Parameters
    ----------
    trials : sequence of ndarray, each (channels, samples)
    shrinkage : float in [0, 1]

    Returns
    -------
    ndarray, (channels, channels), symmetric positive definite
    """
    if not 0.0 <= shrinkage <= 1.0:
        raise ValueError(f"shrinkage must be in [0, 1], got {shrinkage}")
    trials = list(trials)
    if not trials:
        raise ValueError("need at least one trial")

    acc = None
    for i, trial in enumerate(trials):
        X = np.asarray(trial, dtype=np.float64)
        if not np.all(np.isfinite(X)):
            raise ValueError(f"trial {i} contains non-finite values")
        Xc = X - X.mean(axis=1, keepdims=True)
        cov = Xc @ Xc.T
        trace = np.trace(cov)
        if trace <= 0.0:
            raise ValueError(f"trial {i} has zero variance")
        cov /= trace
        acc = cov if acc is None else acc + cov
    avg = acc / len(trials)
    n = avg.shape[0]
    target = (np.trace(avg) / n) * np.eye(n)
    return (1.0 - shrinkage) * avg + shrinkage * target


def _check_spd(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be square, got {mat.shape}")
    if not np.allclose(mat, mat.T, atol=1e-10):
        raise ValueError(f"{name} is not symmetric")
    eigvals = np.linalg.eigvalsh(mat)
    if eigvals[0] <= 0.0:
        raise ValueError(f"{name} is not positive definite (min eig {eigvals[0]:.3e})")
    return mat


def csp_fit(cov_a: np.ndarray, cov_b: np.ndarray, n_components: int,
            pairing: str = "") -> CspModel:
    """Fit spatial filters discriminating two covariance conditions.

    Solves W (cov_a) W^T = diag(lambda), W (cov_a + cov_b) W^T = I and
    keeps the n_components/2 filters from each end of the eigenvalue
    spectrum (most-A-variance and least-A-variance directions).

    Parameters
    ----------
    cov_a, cov_b : ndarray
        Symmetric positive definite, same shape.
    n_components : even int
        Total filters retained; at most twice the channel count.
    pairing : str
        Free-form tag recorded on the model (e.g. "class1-vs-rest").
    """
    A = _check_spd(cov_a, "cov_a")
    B = _check_spd(cov_b, "cov_b")
    if A.shape != B.shape:
        raise ValueError(f"covariance shapes differ: {A.shape} vs {B.shape}")
    n = A.shape[0]
    if n_components % 2 != 0 or n_components < 2:
        raise ValueError(f"n_components must be a positive even count, got {n_components}")
    if n_components > 2 * n:
        raise ValueError(f"n_components {n_components} exceeds 2 x channels ({2 * n})")

    eigvals, eigvecs = linalg.eigh(A, A + B)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    W = eigvecs[:, order].T  # rows are filters, sorted by eigenvalue desc

    half = n_components // 2
    idx = list(range(half)) + list(range(n - half, n))
    return CspModel(filters=W[idx], eigenvalues=eigvals[idx], pairing=pairing)


def csp_features(model: CspModel, data: np.ndarray) -> np.ndarray:
    """Normalized log-variance of each spatial-filter projection.

    f_j = log( var(w_j X) / sum_k var(w_k X) ), invariant to any global
    rescaling of the trial.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.shape[0] != model.filters.shape[1]:
        raise ValueError(
            f"trial has {data.shape[0]} channels, filters expect "
            f"{model.filters.shape[1]}"
        )
    projected = model.filters @ data
    variances = projected.var(axis=1)
    total = variances.sum()
    if total <= 0.0:
        raise ValueError("zero total variance under the spatial filters")
    return np.log(variances / total)
