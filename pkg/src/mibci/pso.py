"""Global-best particle swarm over a bounded box.

The optimizer drives the fuzzy model's premise parameters and rule
weights; the default fitness is accuracy on a held-out validation
split.  Bound handling is by reflection, velocities are clamped to a
fraction of the box width, and the random stream is PCG64 seeded
through the shared derivation scheme, so histories are reproducible
for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ._rng import PURPOSE_PSO, numpy_rng
from .anfis import AnfisModel, MembershipFunction, RuleBase, fit_consequents, predict


@dataclass
class PsoConfig:
    """Swarm hyperparameters; defaults sit mid-range of the usual bands."""

    particles: int = 40
    iterations: int = 75
    c1: float = 1.7
    c2: float = 1.7
    inertia: float | tuple[float, float] = (0.9, 0.7)
    velocity_clamp: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.particles < 1 or self.iterations < 1:
            raise ValueError("particles and iterations must be >= 1")
        if self.velocity_clamp <= 0:
            raise ValueError("velocity_clamp must be positive")

    def inertia_at(self, iteration: int) -> float:
        """Inertia weight for a 1-based iteration index."""
        if isinstance(self.inertia, (int, float)):
            return float(self.inertia)
        w_start, w_end = self.inertia
        if self.iterations == 1:
            return float(w_start)
        frac = (iteration - 1) / (self.iterations - 1)
        return float(w_start + (w_end - w_start) * frac)


@dataclass
class PsoResult:
    best_position: np.ndarray
    best_fitness: float
    history: list[dict] = field(default_factory=list)


def _evaluate(fitness, positions: np.ndarray, n_jobs) -> np.ndarray:
    """Fitness per particle, reduced in particle-index order."""
    if n_jobs in (None, 0, 1):
        values = [fitness(p) for p in positions]
    else:
        values = Parallel(n_jobs=n_jobs)(delayed(fitness)(p) for p in positions)
    values = np.asarray(values, dtype=np.float64)
    if np.any(np.isnan(values)):
        bad = int(np.argmax(np.isnan(values)))
        raise RuntimeError(
            f"fitness returned NaN at position {positions[bad].tolist()}"
        )
    return values


def pso_optimize(
    fitness,
    lower,
    upper,
    config: PsoConfig,
    maximize: bool = True,
    n_jobs=None,
) -> PsoResult:
    """Optimize a fitness function over a finite box.

    Parameters
    ----------
    fitness : callable(ndarray) -> float
        Must be defined everywhere on the box.  NaN aborts the run;
        -inf is accepted as an "infeasible" sentinel.
    lower, upper : array-like
        Per-dimension finite bounds.
    config : PsoConfig
    maximize : bool
        If False the fitness is negated internally; the reported values
        stay on the caller's scale.
    n_jobs : int, optional
        Parallel fitness evaluations within an iteration; results are
        reduced in particle order either way, so the outcome does not
        depend on scheduling.

    Returns
    -------
    PsoResult
        Best position/fitness and one history entry per iteration
        (including the initial sweep as iteration 0) with the global
        best and the iteration's mean fitness.
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if lower.shape != upper.shape or lower.ndim != 1:
        raise ValueError("lower/upper must be 1-D arrays of equal length")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ValueError("bounds must be finite")
    if np.any(upper <= lower):
        raise ValueError("every upper bound must exceed its lower bound")

    sign = 1.0 if maximize else -1.0
    rng = numpy_rng(config.seed, PURPOSE_PSO)
    width = upper - lower
    v_max = config.velocity_clamp * width

    positions = lower + rng.uniform(size=(config.particles, lower.size)) * width
    velocities = np.zeros_like(positions)

    raw = _evaluate(fitness, positions, n_jobs)
    values = sign * raw
    pbest_pos = positions.copy()
    pbest_val = values.copy()
    g_idx = int(np.argmax(pbest_val))
    gbest_pos = pbest_pos[g_idx].copy()
    gbest_val = pbest_val[g_idx]

    history = [{
        "iteration": 0,
        "gbest_fitness": float(sign * gbest_val),
        "mean_fitness": float(raw.mean()),
    }]

    for it in range(1, config.iterations + 1):
        w = config.inertia_at(it)
        r1 = rng.uniform(size=positions.shape)
        r2 = rng.uniform(size=positions.shape)
        velocities = (
            w * velocities
            + config.c1 * r1 * (pbest_pos - positions)
            + config.c2 * r2 * (gbest_pos - positions)
        )
        np.clip(velocities, -v_max, v_max, out=velocities)
        positions = positions + velocities

        over = positions > upper
        positions[over] = (2 * np.broadcast_to(upper, positions.shape) - positions)[over]
        velocities[over] *= -1.0
        under = positions < lower
        positions[under] = (2 * np.broadcast_to(lower, positions.shape) - positions)[under]
        velocities[under] *= -1.0
        np.clip(positions, lower, upper, out=positions)

        raw = _evaluate(fitness, positions, n_jobs)
        values = sign * raw
        improved = values > pbest_val
        pbest_pos[improved] = positions[improved]
        pbest_val[improved] = values[improved]
        g_idx = int(np.argmax(pbest_val))
        if pbest_val[g_idx] > gbest_val:
            gbest_val = pbest_val[g_idx]
            gbest_pos = pbest_pos[g_idx].copy()

        history.append({
            "iteration": it,
            "gbest_fitness": float(sign * gbest_val),
            "mean_fitness": float(raw.mean()),
        })

    return PsoResult(
        best_position=gbest_pos,
        best_fitness=float(sign * gbest_val),
        history=history,
    )


class CodecBoundsError(ValueError):
    """A position component fell outside the codec's declared bounds."""


class ParameterCodec:
    """Maps flat swarm positions to premise memberships and rule weights.

    Per input, per membership function, the encoded block is:
      gaussian   (center, width)
      bell       (center, width, slope)
      triangular (left, peak, right) -- sorted on decode, so any real
                  triple decodes to a valid hat function
    followed by one weight per rule.  Bounds keep widths and slopes
    strictly positive, so every in-bounds position decodes to a valid
    model.
    """

    def __init__(self, mf_kind: str, centers_box, width_box,
                 slope_box=(1.0, 5.0), n_rules: int = 0,
                 weight_box=(0.1, 2.0), mfs_per_input: int = 2):
        self.mf_kind = mf_kind
        self.centers_box = [tuple(map(float, b)) for b in centers_box]  # per input
        self.width_box = [tuple(map(float, b)) for b in width_box]
        self.slope_box = tuple(map(float, slope_box))
        self.n_rules = n_rules
        self.weight_box = tuple(map(float, weight_box))
        self.mfs_per_input = mfs_per_input
        self.n_inputs = len(self.centers_box)
        self._params_per_mf = {"gaussian": 2, "bell": 3, "triangular": 3}[mf_kind]

    @classmethod
    def for_features(cls, X, mf_kind: str = "gaussian", mfs_per_input: int = 2,
                     weight_box=(0.1, 2.0)) -> "ParameterCodec":
        """Derive per-input boxes from feature ranges of training data."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        n_inputs = X.shape[1]
        centers, widths = [], []
        for i in range(n_inputs):
            lo, hi = float(X[:, i].min()), float(X[:, i].max())
            span = max(hi - lo, 1e-6)
            centers.append((lo - 0.25 * span, hi + 0.25 * span))
            widths.append((0.05 * span, 1.5 * span))
        n_rules = mfs_per_input**n_inputs
        return cls(
            mf_kind=mf_kind, centers_box=centers, width_box=widths,
            n_rules=n_rules, weight_box=weight_box, mfs_per_input=mfs_per_input,
        )

    @property
    def n_dims(self) -> int:
        return self.n_inputs * self.mfs_per_input * self._params_per_mf + self.n_rules

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lower, upper = [], []
        for i in range(self.n_inputs):
            c_lo, c_hi = self.centers_box[i]
            w_lo, w_hi = self.width_box[i]
            for _ in range(self.mfs_per_input):
                if self.mf_kind == "gaussian":
                    lower += [c_lo, w_lo]
                    upper += [c_hi, w_hi]
                elif self.mf_kind == "bell":
                    lower += [c_lo, w_lo, self.slope_box[0]]
                    upper += [c_hi, w_hi, self.slope_box[1]]
                else:  # triangular: three abscissae, sorted on decode
                    lower += [c_lo - w_hi, c_lo - w_hi, c_lo - w_hi]
                    upper += [c_hi + w_hi, c_hi + w_hi, c_hi + w_hi]
        lower += [self.weight_box[0]] * self.n_rules
        upper += [self.weight_box[1]] * self.n_rules
        return np.asarray(lower), np.asarray(upper)

    def decode(self, position) -> tuple[list[list[MembershipFunction]], np.ndarray]:
        position = np.asarray(position, dtype=np.float64)
        if position.shape != (self.n_dims,):
            raise CodecBoundsError(
                f"position has shape {position.shape}, expected ({self.n_dims},)"
            )
        lower, upper = self.bounds()
        if np.any(position < lower) or np.any(position > upper):
            bad = int(np.argmax((position < lower) | (position > upper)))
            raise CodecBoundsError(
                f"dimension {bad} = {position[bad]:.6g} outside "
                f"[{lower[bad]:.6g}, {upper[bad]:.6g}]"
            )
        k = self._params_per_mf
        memberships = []
        pos = 0
        for _ in range(self.n_inputs):
            mfs = []
            for _ in range(self.mfs_per_input):
                chunk = position[pos:pos + k]
                pos += k
                if self.mf_kind == "triangular":
                    a, b, c = sorted(chunk)
                    if a == c:
                        c = a + 1e-6
                    mfs.append(MembershipFunction("triangular", (a, b, c)))
                else:
                    mfs.append(MembershipFunction(self.mf_kind, tuple(chunk)))
            memberships.append(mfs)
        weights = position[pos:].copy()
        return memberships, weights

    def encode(self, memberships, weights) -> np.ndarray:
        flat: list[float] = []
        for mfs in memberships:
            for mf in mfs:
                flat.extend(mf.params)
        flat.extend(np.asarray(weights, dtype=np.float64))
        return np.asarray(flat)


def make_validation_fitness(
    codec: ParameterCodec,
    X_train,
    y_train,
    X_val,
    y_val,
    ridge: float = 1e-3,
    n_classes: int = 4,
):
    """Fitness closure: decode -> fit consequents -> validation accuracy.

    Decode failures and singular consequent fits return -inf rather
    than aborting, so the swarm can route around infeasible corners.
    """
    X_train = np.atleast_2d(np.asarray(X_train, dtype=np.float64))
    y_train = np.asarray(y_train, dtype=np.int64)
    X_val = np.atleast_2d(np.asarray(X_val, dtype=np.float64))
    y_val = np.asarray(y_val, dtype=np.int64)
    if len(X_val) == 0:
        raise ValueError("validation set must be non-empty")

    def fitness(position) -> float:
        try:
            memberships, weights = codec.decode(position)
        except CodecBoundsError:
            return float("-inf")
        rule_base = RuleBase(
            n_inputs=codec.n_inputs,
            mfs_per_input=codec.mfs_per_input,
            weights=weights,
        )
        model = AnfisModel(
            memberships=memberships,
            rule_base=rule_base,
            consequents=np.zeros((rule_base.n_rules, n_classes, codec.n_inputs + 1)),
            n_classes=n_classes,
        )
        try:
            model = fit_consequents(model, X_train, y_train, ridge)
        except ValueError:
            return float("-inf")
        return float(np.mean(predict(model, X_val) == y_val))

    return fitness
