"""Trial normalization and ICA-based artifact suppression.

The default preprocessing chain is: per-session channel
standardization, optional ICA cleanup, then per-trial z-scoring.  Each
step is a pure function; nothing here mutates its input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import numpy_rng
from .trials import Trial, TrialSet


def zscore_trial(trial: Trial, mode: str = "per_channel") -> Trial:
    """Standardize one trial to zero mean, unit standard deviation.

    Parameters
    ----------
    trial : Trial
    mode : {"per_channel", "per_trial"}
        "per_channel" standardizes each channel with its own mean and
        std; "per_trial" uses a single scalar mean/std for the whole
        channels-x-samples matrix.

    Returns
    -------
    Trial
        New trial; the input is untouched.
    """
    data = trial.data.astype(np.float64)
    if mode == "per_channel":
        mean = data.mean(axis=1, keepdims=True)
        std = data.std(axis=1, keepdims=True)
        dead = np.flatnonzero(std[:, 0] == 0.0)
        if dead.size:
            raise ValueError(
                f"zero-variance channel(s) {dead.tolist()} cannot be z-scored"
            )
    elif mode == "per_trial":
        mean = data.mean()
        std = data.std()
        if std == 0.0:
            raise ValueError("constant trial cannot be z-scored")
    else:
        raise ValueError(f"unknown zscore mode {mode!r}")
    return Trial(
        data=(data - mean) / std,
        label=trial.label,
        subject=trial.subject,
        session=trial.session,
    )


def session_standardize(trial_set: TrialSet) -> TrialSet:
    """Standardize each channel within each (subject, session) block.

    Channel statistics are pooled over every trial of the session, so
    amplitude offsets between sessions are removed while within-session
    trial structure is preserved.  Label-free by construction.
    """
    groups: dict[tuple[int, int], list[int]] = {}
    for i, t in enumerate(trial_set.trials):
        groups.setdefault((t.subject, t.session), []).append(i)

    new_trials: list[Trial | None] = [None] * len(trial_set.trials)
    for (subject, session), indices in groups.items():
        stacked = np.concatenate(
            [trial_set.trials[i].data.astype(np.float64) for i in indices], axis=1
        )
        mean = stacked.mean(axis=1, keepdims=True)
        std = stacked.std(axis=1, keepdims=True)
        dead = np.flatnonzero(std[:, 0] == 0.0)
        if dead.size:
            raise ValueError(
                f"subject {subject} session {session}: zero-variance "
                f"channel(s) {dead.tolist()}"
            )
        for i in indices:
            t = trial_set.trials[i]
            new_trials[i] = Trial(
                data=(t.data.astype(np.float64) - mean) / std,
                label=t.label,
                subject=t.subject,
                session=t.session,
            )
    return TrialSet(
        trials=list(new_trials),
        sample_rate=trial_set.sample_rate,
        channel_names=list(trial_set.channel_names),
        cue_window=trial_set.cue_window,
    )


@dataclass
class IcaDecomposition:
    """Fitted ICA unmixing/mixing pair with per-component diagnostics.

    unmixing has shape (components, channels) and maps centered data to
    sources; mixing is its pseudo-inverse.  kurtosis holds the excess
    kurtosis of each recovered source, the usual screen for ocular and
    muscular artifacts.
    """

    unmixing: np.ndarray
    mixing: np.ndarray
    mean: np.ndarray
    kurtosis: np.ndarray
    converged: list[bool]
    n_iter: list[int]

    @property
    def n_components(self) -> int:
        return self.unmixing.shape[0]

    def sources(self, data: np.ndarray) -> np.ndarray:
        data = np.asarray(data, dtype=np.float64)
        return self.unmixing @ (data - self.mean[:, None])


def fastica_fit(
    data: np.ndarray,
    n_components: int | None = None,
    seed: int = 0,
    max_iter: int = 200,
    tol: float = 1e-6,
) -> IcaDecomposition:
    """Deflation-based fixed-point ICA with a tanh nonlinearity.

    Parameters
    ----------
    data : ndarray, shape (channels, samples)
        More samples than channels are required; the data is centered
        internally.
    n_components : int, optional
        Defaults to the channel count.
    seed : int
        Seeds the random initial directions.
    max_iter, tol :
        Per-component fixed-point iteration budget and convergence
        criterion on the direction update.

    Returns
    -------
    IcaDecomposition

    Raises
    ------
    ValueError
        If the channel covariance is rank deficient (whitening failure).
    """
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] <= X.shape[0]:
        raise ValueError(f"need (channels, samples) with samples > channels, got {X.shape}")
    n_channels, n_samples = X.shape
    if n_components is None:
        n_components = n_channels
    if not 1 <= n_components <= n_channels:
        raise ValueError(f"n_components must be in [1, {n_channels}], got {n_components}")

    mean = X.mean(axis=1)
    Xc = X - mean[:, None]

    cov = (Xc @ Xc.T) / (n_samples - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    if eigvals[n_components - 1] <= eigvals[0] * 1e-10:
        raise ValueError(
            "whitening failure: channel covariance is rank deficient "
            f"(eigenvalue ratio {eigvals[n_components - 1] / eigvals[0]:.2e})"
        )
    whiten = eigvecs[:, :n_components].T / np.sqrt(eigvals[:n_components])[:, None]
    Z = whiten @ Xc  # identity covariance

    rng = numpy_rng(seed)
    W = np.zeros((n_components, n_components))
    converged, iters = [], []
    for i in range(n_components):
        w = rng.standard_normal(n_components)
        w /= np.linalg.norm(w)
        ok = False
        it = 0
        for it in range(1, max_iter + 1):
            wz = w @ Z
            g = np.tanh(wz)
            g_prime = 1.0 - g**2
            w_new = (Z * g).mean(axis=1) - g_prime.mean() * w
            # deflation: stay orthogonal to the components already found
            w_new -= W[:i].T @ (W[:i] @ w_new)
            norm = np.linalg.norm(w_new)
            if norm == 0.0:
                break
            w_new /= norm
            if abs(abs(w_new @ w) - 1.0) < tol:
                w = w_new
                ok = True
                break
            w = w_new
        W[i] = w
        converged.append(ok)
        iters.append(it)

    unmixing = W @ whiten
    mixing = np.linalg.pinv(unmixing)
    sources = unmixing @ Xc
    centered = sources - sources.mean(axis=1, keepdims=True)
    m2 = (centered**2).mean(axis=1)
    m4 = (centered**4).mean(axis=1)
    kurtosis = m4 / m2**2 - 3.0

    return IcaDecomposition(
        unmixing=unmixing,
        mixing=mixing,
        mean=mean,
        kurtosis=kurtosis,
        converged=converged,
        n_iter=iters,
    )


def ica_clean(decomp: IcaDecomposition, data: np.ndarray, reject) -> np.ndarray:
    """Reconstruct data with the given source components zeroed out.

    With an empty reject list this is the identity on the retained
    subspace (exact identity when as many components as channels were
    fitted).
    """
    reject = list(reject)
    for idx in reject:
        if not 0 <= idx < decomp.n_components:
            raise ValueError(
                f"component index {idx} out of range [0, {decomp.n_components})"
            )
    data = np.asarray(data, dtype=np.float64)
    sources = decomp.sources(data)
    if reject:
        sources = sources.copy()
        sources[reject, :] = 0.0
    return decomp.mixing @ sources + decomp.mean[:, None]


def artifact_components(decomp: IcaDecomposition, kurtosis_threshold: float = 5.0):
    """Indices of components whose |excess kurtosis| crosses the threshold."""
    return np.flatnonzero(np.abs(decomp.kurtosis) > kurtosis_threshold).tolist()
