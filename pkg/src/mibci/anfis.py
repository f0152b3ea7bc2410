"""First-order Sugeno fuzzy inference with a trainable grid rule base.

The network evaluates five stages: membership degrees per input, rule
firing strengths (weighted products), normalization, per-rule linear
consequents, and a firing-weighted sum per class.  Four class heads
share one premise layer; the predicted label is the argmax.

Consequents are fitted in closed form by ridge least squares; premise
parameters are left to the swarm optimizer (see pso.py) or, optionally,
to the gradient fine-tuner below.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

MF_KINDS = ("gaussian", "bell", "triangular")
MAX_RULES = 128
_UNDERFLOW = 1e-300


@dataclass(frozen=True)
class MembershipFunction:
    """One fuzzy set on one input.

    Parameter layout by kind:
      gaussian   (center, width)            width > 0
      bell       (center, width, slope)     width > 0, slope > 0
      triangular (left, peak, right)        left <= peak <= right, left < right
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in MF_KINDS:
            raise ValueError(f"unknown membership kind {self.kind!r}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if self.kind == "gaussian":
            if len(p) != 2 or p[1] <= 0:
                raise ValueError(f"gaussian needs (center, width>0), got {p}")
        elif self.kind == "bell":
            if len(p) != 3 or p[1] <= 0 or p[2] <= 0:
                raise ValueError(f"bell needs (center, width>0, slope>0), got {p}")
        else:
            if len(p) != 3 or not (p[0] <= p[1] <= p[2]) or p[0] == p[2]:
                raise ValueError(
                    f"triangular needs left <= peak <= right with left < right, got {p}"
                )


def mf_eval(mf: MembershipFunction, x) -> np.ndarray:
    """Membership degree in [0, 1]; total on the reals, vectorized."""
    x = np.asarray(x, dtype=np.float64)
    if mf.kind == "gaussian":
        c, w = mf.params
        return np.exp(-((x - c) ** 2) / (2.0 * w**2))
    if mf.kind == "bell":
        c, w, s = mf.params
        return 1.0 / (1.0 + np.abs((x - c) / w) ** (2.0 * s))
    left, peak, right = mf.params
    with np.errstate(divide="ignore", invalid="ignore"):
        up = (x - left) / (peak - left) if peak > left else np.ones_like(x)
        down = (right - x) / (right - peak) if right > peak else np.ones_like(x)
    return np.clip(np.minimum(up, down), 0.0, 1.0)


@dataclass
class RuleBase:
    """Full grid of rules: one membership index per input, per rule."""

    n_inputs: int
    mfs_per_input: int
    weights: np.ndarray
    combos: np.ndarray = field(default=None)

    def __post_init__(self):
        n_rules = self.mfs_per_input**self.n_inputs
        if n_rules > MAX_RULES:
            raise ValueError(
                f"{self.mfs_per_input}^{self.n_inputs} = {n_rules} rules exceeds "
                f"the cap of {MAX_RULES}"
            )
        if self.combos is None:
            self.combos = np.array(
                list(itertools.product(range(self.mfs_per_input), repeat=self.n_inputs)),
                dtype=np.intp,
            )
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (n_rules,) or np.any(self.weights <= 0):
            raise ValueError(f"need {n_rules} strictly positive rule weights")

    @property
    def n_rules(self) -> int:
        return self.combos.shape[0]

    @classmethod
    def grid(cls, n_inputs: int, mfs_per_input: int, weights=None) -> "RuleBase":
        n_rules = mfs_per_input**n_inputs
        if weights is None:
            weights = np.ones(n_rules)
        return cls(n_inputs=n_inputs, mfs_per_input=mfs_per_input, weights=weights)


@dataclass
class AnfisModel:
    """Premise memberships, rule base and per-class linear consequents.

    consequents has shape (n_rules, n_classes, n_inputs + 1); the last
    coefficient of each row is the bias.  input_names carry feature
    provenance for rule reporting.
    """

    memberships: list[list[MembershipFunction]]
    rule_base: RuleBase
    consequents: np.ndarray
    n_classes: int = 4
    input_names: list[str] | None = None

    def __post_init__(self):
        d = self.rule_base.n_inputs
        if len(self.memberships) != d:
            raise ValueError(f"need membership lists for {d} inputs")
        for i, mfs in enumerate(self.memberships):
            if len(mfs) != self.rule_base.mfs_per_input:
                raise ValueError(
                    f"input {i} has {len(mfs)} membership functions, rule base "
                    f"expects {self.rule_base.mfs_per_input}"
                )
        self.consequents = np.asarray(self.consequents, dtype=np.float64)
        expected = (self.rule_base.n_rules, self.n_classes, d + 1)
        if self.consequents.shape != expected:
            raise ValueError(
                f"consequents must have shape {expected}, got {self.consequents.shape}"
            )
        if not np.all(np.isfinite(self.consequents)):
            raise ValueError("consequents contain non-finite values")

    @property
    def n_inputs(self) -> int:
        return self.rule_base.n_inputs


def _membership_grid(model: AnfisModel, X: np.ndarray) -> list[np.ndarray]:
    """Per input: (n_trials, mfs_per_input) membership degrees."""
    return [
        np.stack([mf_eval(mf, X[:, i]) for mf in mfs], axis=1)
        for i, mfs in enumerate(model.memberships)
    ]


def _firing_strengths(model: AnfisModel, mu: list[np.ndarray]) -> np.ndarray:
    combos = model.rule_base.combos
    firing = np.tile(model.rule_base.weights, (mu[0].shape[0], 1))
    for i in range(model.n_inputs):
        firing = firing * mu[i][:, combos[:, i]]
    return firing


def _normalize_firing(firing: np.ndarray) -> np.ndarray:
    totals = firing.sum(axis=1, keepdims=True)
    n_rules = firing.shape[1]
    uniform = np.full_like(firing, 1.0 / n_rules)
    with np.errstate(invalid="ignore", divide="ignore"):
        normalized = firing / totals
    return np.where(totals < _UNDERFLOW, uniform, normalized)


def forward_batch(model: AnfisModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the network on a batch of feature vectors.

    Parameters
    ----------
    model : AnfisModel
    X : ndarray, (n_trials, n_inputs)

    Returns
    -------
    scores : ndarray, (n_trials, n_classes)
    normalized_firing : ndarray, (n_trials, n_rules), rows sum to 1
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} inputs, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("inputs contain non-finite values")
    mu = _membership_grid(model, X)
    normalized = _normalize_firing(_firing_strengths(model, mu))
    X_aug = np.concatenate([X, np.ones((X.shape[0], 1))], axis=1)
    rule_out = np.einsum("nj,rcj->nrc", X_aug, model.consequents)
    scores = np.einsum("nr,nrc->nc", normalized, rule_out)
    return scores, normalized


def anfis_forward(model: AnfisModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Single-vector forward pass; returns (class scores, firings)."""
    scores, normalized = forward_batch(model, np.asarray(x, dtype=np.float64)[None, :])
    return scores[0], normalized[0]


def predict(model: AnfisModel, X) -> np.ndarray:
    """Predicted 1-based class labels; ties go to the lowest class id."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    scores, _ = forward_batch(model, X)
    return np.argmax(scores, axis=1) + 1


def fit_consequents(model: AnfisModel, X, y, ridge: float = 0.0) -> AnfisModel:
    """Ridge least-squares fit of all consequent coefficients.

    The regressor for trial n is the Kronecker pairing of its
    normalized firing strengths with (x_n, 1); targets are one-hot
    class indicators.  All class heads share the same design matrix.

    Parameters
    ----------
    model : AnfisModel
        Supplies premise and rule base; consequent values are ignored.
    X : ndarray, (n_trials, n_inputs)
    y : ndarray of 1-based labels in [1, n_classes]
    ridge : float >= 0

    Returns
    -------
    AnfisModel
        New model with fitted consequents; the input model is untouched.
    """
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if np.any((y < 1) | (y > model.n_classes)):
        raise ValueError(f"labels must lie in [1, {model.n_classes}]")
    _, normalized = forward_batch(model, X)
    n, d = X.shape
    r = model.rule_base.n_rules

    X_aug = np.concatenate([X, np.ones((n, 1))], axis=1)
    # phi[n, r*(d+1) + j] = normalized[n, r] * X_aug[n, j]
    phi = (normalized[:, :, None] * X_aug[:, None, :]).reshape(n, r * (d + 1))
    targets = np.zeros((n, model.n_classes))
    targets[np.arange(n), y - 1] = 1.0

    gram = phi.T @ phi + ridge * np.eye(phi.shape[1])
    eigvals = np.linalg.eigvalsh(gram)
    if eigvals[0] <= eigvals[-1] * 1e-12:
        raise ValueError(
            "singular normal equations in consequent fit; increase ridge "
            f"(min/max eigenvalue ratio {eigvals[0] / max(eigvals[-1], 1e-300):.2e})"
        )
    theta = np.linalg.solve(gram, phi.T @ targets)  # (r*(d+1), n_classes)
    consequents = theta.reshape(r, d + 1, model.n_classes).transpose(0, 2, 1)
    return replace(model, consequents=consequents)


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(model: AnfisModel, X, y) -> float:
    """Mean cross-entropy of softmaxed class scores."""
    scores, _ = forward_batch(model, np.atleast_2d(X))
    p = _softmax(scores)
    idx = np.asarray(y, dtype=np.int64) - 1
    return float(-np.log(np.clip(p[np.arange(len(idx)), idx], 1e-300, None)).mean())


def _premise_param_refs(model: AnfisModel):
    """Flat list of (input index, mf index, param index) over all MF params."""
    refs = []
    for i, mfs in enumerate(model.memberships):
        for j, mf in enumerate(mfs):
            refs.extend((i, j, k) for k in range(len(mf.params)))
    return refs


def _with_premise_param(model: AnfisModel, i: int, j: int, k: int,
                        value: float) -> AnfisModel:
    mfs = [list(per_input) for per_input in model.memberships]
    old = mfs[i][j]
    params = list(old.params)
    params[k] = value
    mfs[i][j] = MembershipFunction(old.kind, tuple(params))
    return replace(model, memberships=[list(m) for m in mfs])


def _gaussian_premise_gradient(model: AnfisModel, X: np.ndarray,
                               y: np.ndarray) -> dict[tuple[int, int, int], float]:
    """Analytic d(cross-entropy)/d(center, width) for Gaussian premises.

    Rows whose total firing underflowed contribute zero gradient (they
    are handled by the uniform-normalization fallback in the forward
    pass).
    """
    X = np.atleast_2d(X)
    n, d = X.shape
    mu = _membership_grid(model, X)
    firing = _firing_strengths(model, mu)
    totals = firing.sum(axis=1)
    live = totals >= _UNDERFLOW
    normalized = _normalize_firing(firing)

    X_aug = np.concatenate([X, np.ones((n, 1))], axis=1)
    rule_out = np.einsum("nj,rcj->nrc", X_aug, model.consequents)
    scores = np.einsum("nr,nrc->nc", normalized, rule_out)
    p = _softmax(scores)
    dL_ds = p.copy()
    dL_ds[np.arange(n), y - 1] -= 1.0
    dL_ds /= n

    # dL/df[n, q] = sum_c dL_ds[n, c] * (rule_out[n, q, c] - scores[n, c]) / total[n]
    diff = rule_out - scores[:, None, :]
    dL_df = np.einsum("nc,nqc->nq", dL_ds, diff)
    dL_df[live] /= totals[live, None]
    dL_df[~live] = 0.0

    combos = model.rule_base.combos
    grads: dict[tuple[int, int, int], float] = {}
    for i in range(d):
        if not any(mf.kind == "gaussian" for mf in model.memberships[i]):
            continue
        # firing with input i's membership factor divided out
        partial = np.tile(model.rule_base.weights, (n, 1))
        for i2 in range(d):
            if i2 != i:
                partial = partial * mu[i2][:, combos[:, i2]]
        for j, mf in enumerate(model.memberships[i]):
            if mf.kind != "gaussian":
                continue
            c, w = mf.params
            uses = combos[:, i] == j
            if not np.any(uses):
                continue
            mu_ij = mu[i][:, j]
            dmu_dc = mu_ij * (X[:, i] - c) / w**2
            dmu_dw = mu_ij * (X[:, i] - c) ** 2 / w**3
            upstream = (dL_df[:, uses] * partial[:, uses]).sum(axis=1)
            grads[(i, j, 0)] = float((upstream * dmu_dc).sum())
            grads[(i, j, 1)] = float((upstream * dmu_dw).sum())
    return grads


def anfis_finetune(
    model: AnfisModel,
    X,
    y,
    epochs: int = 200,
    learning_rate: float = 0.02,
    patience: int = 20,
) -> tuple[AnfisModel, list[float]]:
    """Gradient descent on premise parameters against cross-entropy.

    Gaussian parameters use analytic gradients; bell and triangular
    parameters use central finite differences with step
    1e-5 * max(1, |theta|).  Training stops early once the loss stops
    improving over a ``patience``-epoch window; the best parameters seen
    are returned.

    Returns
    -------
    (AnfisModel, list of float)
        Tuned model and the per-epoch loss trace (entry 0 is the
        starting loss).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    current = model
    losses = [cross_entropy(current, X, y)]
    best_model, best_loss = current, losses[0]

    for _ in range(epochs):
        grads: dict[tuple[int, int, int], float] = {}
        refs = _premise_param_refs(current)
        gaussian_refs = [
            (i, j, k) for (i, j, k) in refs
            if current.memberships[i][j].kind == "gaussian"
        ]
        if gaussian_refs:
            grads.update(_gaussian_premise_gradient(current, X, y))
        for (i, j, k) in refs:
            if current.memberships[i][j].kind == "gaussian":
                continue
            theta = current.memberships[i][j].params[k]
            h = 1e-5 * max(1.0, abs(theta))
            try:
                up = cross_entropy(_with_premise_param(current, i, j, k, theta + h), X, y)
                down = cross_entropy(_with_premise_param(current, i, j, k, theta - h), X, y)
            except ValueError:
                # perturbed parameter left the valid region; freeze it
                grads[(i, j, k)] = 0.0
                continue
            grads[(i, j, k)] = (up - down) / (2.0 * h)

        stepped = current
        for (i, j, k), g in grads.items():
            mf = stepped.memberships[i][j]
            new_val = mf.params[k] - learning_rate * g
            if mf.kind in ("gaussian", "bell") and k >= 1 and new_val <= 0.0:
                new_val = mf.params[k] * 0.5  # shrink instead of crossing zero
            try:
                stepped = _with_premise_param(stepped, i, j, k, new_val)
            except ValueError:
                continue  # step would break MF invariants; skip this parameter
        current = stepped

        loss = cross_entropy(current, X, y)
        if not np.isfinite(loss):
            raise RuntimeError(
                f"non-finite fine-tuning loss at epoch {len(losses)}; "
                f"last finite loss {losses[-1]:.6f}, learning_rate {learning_rate}"
            )
        losses.append(loss)
        if loss < best_loss:
            best_loss, best_model = loss, current
        window = len(losses) - 1 - patience
        if window >= 0 and losses[-1] > losses[window]:
            break
    return best_model, losses


def rules_report(model: AnfisModel, reference_X, input_names=None) -> str:
    """Render the rule base as text, most active rule first.

    Rules are ordered by mean normalized firing strength over the
    reference set (ties by rule index), so the report leads with the
    rules that actually drive decisions on that data.
    """
    X = np.atleast_2d(np.asarray(reference_X, dtype=np.float64))
    _, normalized = forward_batch(model, X)
    avg = normalized.mean(axis=0)
    order = np.lexsort((np.arange(avg.size), -avg))

    names = input_names or model.input_names
    if names is None:
        names = [f"x{i + 1}" for i in range(model.n_inputs)]

    lines = []
    for rank, r in enumerate(order, start=1):
        combo = model.rule_base.combos[r]
        antecedent = " AND ".join(
            f"{names[i]} is {_format_mf(model.memberships[i][combo[i]])}"
            for i in range(model.n_inputs)
        )
        consequents = "; ".join(
            f"class{c + 1} = " + _format_linear(model.consequents[r, c], names)
            for c in range(model.n_classes)
        )
        lines.append(
            f"rule {rank:3d} (#{int(r) + 1:3d}) | weight {model.rule_base.weights[r]:.4f} "
            f"| avg firing {avg[r]:.4f} | IF {antecedent} THEN {consequents}"
        )
    return "\n".join(lines) + "\n"


def _format_mf(mf: MembershipFunction) -> str:
    inner = ", ".join(f"{p:.4f}" for p in mf.params)
    return f"{mf.kind}({inner})"


def _format_linear(coeffs: np.ndarray, names) -> str:
    terms = [f"{coeffs[i]:+.4f}*{names[i]}" for i in range(len(names))]
    terms.append(f"{coeffs[-1]:+.4f}")
    return " ".join(terms)


def model_to_dict(model: AnfisModel) -> dict:
    return {
        "schema": "mibci-anfis/1",
        "n_classes": model.n_classes,
        "mfs_per_input": model.rule_base.mfs_per_input,
        "memberships": [
            [{"kind": mf.kind, "params": list(mf.params)} for mf in mfs]
            for mfs in model.memberships
        ],
        "rule_weights": model.rule_base.weights.tolist(),
        "consequents": model.consequents.tolist(),
        "input_names": model.input_names,
    }


def model_from_dict(d: dict) -> AnfisModel:
    if d.get("schema") != "mibci-anfis/1":
        raise ValueError(f"unsupported model schema {d.get('schema')!r}")
    memberships = [
        [MembershipFunction(m["kind"], tuple(m["params"])) for m in mfs]
        for mfs in d["memberships"]
    ]
    rule_base = RuleBase(
        n_inputs=len(memberships),
        mfs_per_input=d["mfs_per_input"],
        weights=np.array(d["rule_weights"]),
    )
    return AnfisModel(
        memberships=memberships,
        rule_base=rule_base,
        consequents=np.array(d["consequents"]),
        n_classes=d["n_classes"],
        input_names=d.get("input_names"),
    )
