import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mibci.anfis import (
    AnfisModel,
    MembershipFunction,
    RuleBase,
    anfis_finetune,
    anfis_forward,
    cross_entropy,
    fit_consequents,
    forward_batch,
    mf_eval,
    model_from_dict,
    model_to_dict,
    predict,
    rules_report,
    _gaussian_premise_gradient,
)


# --- independent oracle: plain-python five-stage evaluation -------------------

def brute_mf(mf, x):
    if mf.kind == "gaussian":
        c, w = mf.params
        return math.exp(-((x - c) ** 2) / (2.0 * w * w))
    if mf.kind == "bell":
        c, w, s = mf.params
        return 1.0 / (1.0 + abs((x - c) / w) ** (2.0 * s))
    left, peak, right = mf.params
    if x < left or x > right:
        return 0.0
    if x <= peak:
        return 1.0 if peak == left else (x - left) / (peak - left)
    return 1.0 if right == peak else (right - x) / (right - peak)


def brute_forward(model, x):
    d = model.n_inputs
    n_rules = model.rule_base.n_rules
    mu = [[brute_mf(mf, x[i]) for mf in model.memberships[i]] for i in range(d)]
    firing = []
    for r in range(n_rules):
        f = float(model.rule_base.weights[r])
        for i in range(d):
            f *= mu[i][model.rule_base.combos[r][i]]
        firing.append(f)
    total = sum(firing)
    if total < 1e-300:
        norm = [1.0 / n_rules] * n_rules
    else:
        norm = [f / total for f in firing]
    scores = []
    for c in range(model.n_classes):
        s = 0.0
        for r in range(n_rules):
            out = float(model.consequents[r][c][d])
            for i in range(d):
                out += float(model.consequents[r][c][i]) * x[i]
            s += norm[r] * out
        scores.append(s)
    return scores, norm


def random_model(rng, n_classes=4):
    d = int(rng.integers(1, 5))
    mfs_per_input = int(rng.integers(2, 4))
    kinds = [str(rng.choice(["gaussian", "bell", "triangular"])) for _ in range(d)]
    memberships = []
    for i in range(d):
        mfs = []
        for _ in range(mfs_per_input):
            c = float(rng.uniform(-2, 2))
            w = float(rng.uniform(0.2, 2.0))
            if kinds[i] == "gaussian":
                mfs.append(MembershipFunction("gaussian", (c, w)))
            elif kinds[i] == "bell":
                mfs.append(MembershipFunction("bell", (c, w, float(rng.uniform(1, 4)))))
            else:
                mfs.append(MembershipFunction("triangular", (c - w, c, c + w)))
        memberships.append(mfs)
    rule_base = RuleBase.grid(d, mfs_per_input,
                              weights=rng.uniform(0.1, 2.0, mfs_per_input**d))
    consequents = rng.uniform(-2, 2, (rule_base.n_rules, n_classes, d + 1))
    return AnfisModel(memberships=memberships, rule_base=rule_base,
                      consequents=consequents, n_classes=n_classes)


def single_rule_model(biases, d=1):
    memberships = [[MembershipFunction("gaussian", (0.0, 1.0))] for _ in range(d)]
    rule_base = RuleBase(n_inputs=d, mfs_per_input=1, weights=np.array([1.0]))
    consequents = np.zeros((1, len(biases), d + 1))
    consequents[0, :, d] = biases
    return AnfisModel(memberships=memberships, rule_base=rule_base,
                      consequents=consequents, n_classes=len(biases))


# --- membership functions ------------------------------------------------------

def test_gaussian_peak_is_one():
    mf = MembershipFunction("gaussian", (1.3, 0.7))
    assert mf_eval(mf, 1.3) == pytest.approx(1.0)


@pytest.mark.parametrize("slope", [0.5, 1.0, 2.5, 7.0])
def test_bell_half_width_point(slope):
    mf = MembershipFunction("bell", (2.0, 1.5, slope))
    assert mf_eval(mf, 2.0 + 1.5) == pytest.approx(0.5)
    assert mf_eval(mf, 2.0 - 1.5) == pytest.approx(0.5)


def test_triangular_interpolation():
    mf = MembershipFunction("triangular", (0.0, 1.0, 2.0))
    assert mf_eval(mf, 0.5) == pytest.approx(0.5)
    assert mf_eval(mf, 1.0) == pytest.approx(1.0)
    assert mf_eval(mf, -0.1) == 0.0
    assert mf_eval(mf, 2.1) == 0.0


def test_membership_validation():
    with pytest.raises(ValueError):
        MembershipFunction("gaussian", (0.0, 0.0))
    with pytest.raises(ValueError):
        MembershipFunction("bell", (0.0, 1.0, -1.0))
    with pytest.raises(ValueError):
        MembershipFunction("triangular", (1.0, 0.5, 2.0))
    with pytest.raises(ValueError):
        MembershipFunction("sigmoid", (0.0, 1.0))


@given(st.floats(min_value=-1e6, max_value=1e6))
def test_membership_outputs_stay_in_unit_interval(x):
    for mf in (
        MembershipFunction("gaussian", (0.5, 2.0)),
        MembershipFunction("bell", (-1.0, 0.5, 3.0)),
        MembershipFunction("triangular", (-2.0, 0.0, 5.0)),
    ):
        v = float(mf_eval(mf, x))
        assert 0.0 <= v <= 1.0


# --- forward pass ----------------------------------------------------------------

def test_single_rule_model_returns_consequent():
    model = single_rule_model([0.3, -0.7, 0.1, 0.9])
    for x in (-3.0, 0.0, 12.0):
        scores, norm = anfis_forward(model, [x])
        np.testing.assert_allclose(scores, [0.3, -0.7, 0.1, 0.9], atol=1e-12)
        assert norm[0] == pytest.approx(1.0)


def test_constant_consequents_yield_constant_scores():
    rng = np.random.default_rng(0)
    model = random_model(rng)
    consequents = np.zeros_like(model.consequents)
    consequents[:, :, -1] = 1.25
    model = AnfisModel(model.memberships, model.rule_base, consequents,
                       model.n_classes)
    for _ in range(5):
        x = rng.uniform(-2, 2, model.n_inputs)
        scores, _ = anfis_forward(model, x)
        np.testing.assert_allclose(scores, 1.25, atol=1e-12)


def test_two_gaussian_rules_scripted_evaluation():
    # d=1, MFs at -1 and +1 (width 1), unit weights, class-0
    # consequents x + 0 and 2x + 1: evaluate every stage by hand at x=0.
    memberships = [[MembershipFunction("gaussian", (-1.0, 1.0)),
                    MembershipFunction("gaussian", (1.0, 1.0))]]
    rule_base = RuleBase.grid(1, 2)
    consequents = np.zeros((2, 4, 2))
    consequents[0, 0] = [1.0, 0.0]
    consequents[1, 0] = [2.0, 1.0]
    model = AnfisModel(memberships, rule_base, consequents)

    mu = math.exp(-0.5)  # both MFs at x=0
    norm_expected = [0.5, 0.5]
    score_expected = 0.5 * (1.0 * 0.0 + 0.0) + 0.5 * (2.0 * 0.0 + 1.0)
    scores, norm = anfis_forward(model, [0.0])
    np.testing.assert_allclose(norm, norm_expected, atol=1e-12)
    assert scores[0] == pytest.approx(score_expected, abs=1e-12)
    assert mu == pytest.approx(brute_mf(memberships[0][0], 0.0))


def test_forward_matches_brute_force_on_random_models():
    rng = np.random.default_rng(1)
    for _ in range(60):
        model = random_model(rng)
        x = rng.uniform(-3, 3, model.n_inputs)
        scores, norm = anfis_forward(model, x)
        b_scores, b_norm = brute_forward(model, x)
        np.testing.assert_allclose(scores, b_scores, atol=1e-10)
        np.testing.assert_allclose(norm, b_norm, atol=1e-10)
        assert abs(norm.sum() - 1.0) < 1e-12


def test_underflow_falls_back_to_uniform():
    memberships = [[MembershipFunction("gaussian", (0.0, 1e-3)),
                    MembershipFunction("gaussian", (0.0, 1e-3))]]
    model = AnfisModel(memberships, RuleBase.grid(1, 2),
                       np.ones((2, 4, 2)))
    _, norm = anfis_forward(model, [1e6])  # both memberships underflow
    np.testing.assert_allclose(norm, [0.5, 0.5])


def test_scores_are_convex_combination_of_rule_outputs():
    rng = np.random.default_rng(2)
    for _ in range(20):
        model = random_model(rng)
        x = rng.uniform(-3, 3, model.n_inputs)
        scores, _ = anfis_forward(model, x)
        x_aug = np.append(x, 1.0)
        rule_out = model.consequents @ x_aug  # (rules, classes)
        assert np.all(scores >= rule_out.min(axis=0) - 1e-9)
        assert np.all(scores <= rule_out.max(axis=0) + 1e-9)


def test_rule_cap_enforced():
    with pytest.raises(ValueError, match="cap"):
        RuleBase.grid(8, 2)  # 256 rules


# --- predict -----------------------------------------------------------------------

def test_predict_argmax_and_ties():
    model = single_rule_model([0.1, 0.9, 0.2, 0.2])
    assert predict(model, [[0.0]])[0] == 2
    tie = single_rule_model([0.5, 0.1, 0.5, 0.0])
    assert predict(tie, [[0.0]])[0] == 1  # tie between classes 1 and 3


def test_predict_dominant_class():
    rng = np.random.default_rng(3)
    model = random_model(rng)
    consequents = model.consequents.copy()
    consequents[:, 2, :] = 0.0
    consequents[:, 2, -1] = 100.0  # class 3 dominates everywhere
    model = AnfisModel(model.memberships, model.rule_base, consequents,
                       model.n_classes)
    X = rng.uniform(-3, 3, (20, model.n_inputs))
    assert np.all(predict(model, X) == 3)


def test_predict_invariant_to_common_bias_shift():
    rng = np.random.default_rng(4)
    model = random_model(rng)
    X = rng.uniform(-2, 2, (25, model.n_inputs))
    base = predict(model, X)
    shifted_consequents = model.consequents.copy()
    shifted_consequents[:, :, -1] += 17.0
    shifted = AnfisModel(model.memberships, model.rule_base,
                         shifted_consequents, model.n_classes)
    np.testing.assert_array_equal(predict(shifted, X), base)


# --- consequent fitting ---------------------------------------------------------

def test_single_rule_fit_reduces_to_linear_regression():
    model = single_rule_model([0.0, 0.0], d=1)
    rng = np.random.default_rng(5)
    X = rng.uniform(-1, 1, (30, 1))
    y = np.where(X[:, 0] > 0, 2, 1)
    fitted = fit_consequents(model, X, y, ridge=0.0)
    # oracle: ordinary least squares of [x, 1] onto each one-hot column
    A = np.column_stack([X[:, 0], np.ones(len(X))])
    for c in range(2):
        target = (y == c + 1).astype(float)
        coef, *_ = np.linalg.lstsq(A, target, rcond=None)
        np.testing.assert_allclose(fitted.consequents[0, c], coef, atol=1e-10)


def test_large_ridge_shrinks_consequents_to_zero():
    rng = np.random.default_rng(6)
    model = random_model(rng, n_classes=4)
    X = rng.uniform(-2, 2, (40, model.n_inputs))
    y = rng.integers(1, 5, 40)
    fitted = fit_consequents(model, X, y, ridge=1e12)
    assert np.max(np.abs(fitted.consequents)) < 1e-6


def test_tiny_system_matches_normal_equations():
    memberships = [[MembershipFunction("gaussian", (-1.0, 1.0)),
                    MembershipFunction("gaussian", (1.0, 1.0))]]
    model = AnfisModel(memberships, RuleBase.grid(1, 2), np.zeros((2, 2, 2)),
                       n_classes=2)
    X = np.array([[0.0], [0.5], [1.0]])
    y = np.array([1, 2, 2])
    ridge = 0.1
    fitted = fit_consequents(model, X, y, ridge=ridge)

    # oracle: build phi row by row from the rule firings, then solve the
    # 4x4 normal equations directly
    rows = []
    for x in X[:, 0]:
        mu0 = math.exp(-((x + 1.0) ** 2) / 2.0)
        mu1 = math.exp(-((x - 1.0) ** 2) / 2.0)
        n0, n1 = mu0 / (mu0 + mu1), mu1 / (mu0 + mu1)
        rows.append([n0 * x, n0, n1 * x, n1])
    phi = np.array(rows)
    targets = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
    theta = np.linalg.solve(phi.T @ phi + ridge * np.eye(4), phi.T @ targets)
    expected = theta.reshape(2, 2, 2).transpose(0, 2, 1)
    np.testing.assert_allclose(fitted.consequents, expected, atol=1e-10)


def test_singular_system_suggests_ridge():
    model = single_rule_model([0.0, 0.0], d=1)
    X = np.zeros((3, 1))  # rank-deficient design
    y = np.array([1, 2, 1])
    with pytest.raises(ValueError, match="ridge"):
        fit_consequents(model, X, y, ridge=0.0)


# --- fine-tuning -----------------------------------------------------------------

def separable_toy():
    rng = np.random.default_rng(7)
    X = np.vstack([rng.normal(-1.0, 0.3, (30, 1)), rng.normal(1.0, 0.3, (30, 1))])
    y = np.array([1] * 30 + [2] * 30)
    memberships = [[MembershipFunction("gaussian", (-0.4, 1.0)),
                    MembershipFunction("gaussian", (0.4, 1.0))]]
    model = AnfisModel(memberships, RuleBase.grid(1, 2), np.zeros((2, 2, 2)),
                       n_classes=2)
    return fit_consequents(model, X, y, ridge=1e-3), X, y


def test_zero_learning_rate_keeps_model():
    model, X, y = separable_toy()
    tuned, losses = anfis_finetune(model, X, y, epochs=5, learning_rate=0.0)
    np.testing.assert_array_equal(tuned.consequents, model.consequents)
    for before, after in zip(model.memberships, tuned.memberships):
        for a, b in zip(before, after):
            assert a.params == b.params
    assert len(set(np.round(losses, 15))) == 1


def test_gaussian_analytic_gradient_matches_finite_differences():
    rng = np.random.default_rng(8)
    for _ in range(10):
        d = int(rng.integers(1, 4))
        mfs = int(rng.integers(2, 4))
        memberships = [
            [MembershipFunction("gaussian",
                                (float(rng.uniform(-1, 1)), float(rng.uniform(0.5, 2))))
             for _ in range(mfs)]
            for _ in range(d)
        ]
        rule_base = RuleBase.grid(d, mfs, weights=rng.uniform(0.5, 1.5, mfs**d))
        model = AnfisModel(memberships, rule_base,
                           rng.uniform(-1, 1, (rule_base.n_rules, 4, d + 1)))
        X = rng.uniform(-2, 2, (12, d))
        y = rng.integers(1, 5, 12)

        grads = _gaussian_premise_gradient(model, X, y)
        for (i, j, k), g in grads.items():
            theta = model.memberships[i][j].params[k]
            h = 1e-6 * max(1.0, abs(theta))

            def loss_at(value):
                params = list(model.memberships[i][j].params)
                params[k] = value
                mem = [list(row) for row in model.memberships]
                mem[i][j] = MembershipFunction("gaussian", tuple(params))
                probe = AnfisModel(mem, model.rule_base, model.consequents,
                                   model.n_classes)
                return cross_entropy(probe, X, y)

            fd = (loss_at(theta + h) - loss_at(theta - h)) / (2 * h)
            denom = max(abs(fd), abs(g), 1e-8)
            assert abs(g - fd) / denom < 1e-5, (i, j, k)


def test_finetune_does_not_hurt_training_accuracy():
    model, X, y = separable_toy()
    before = float(np.mean(predict(model, X) == y))
    tuned, losses = anfis_finetune(model, X, y, epochs=50, learning_rate=0.02)
    after = float(np.mean(predict(tuned, X) == y))
    assert after >= before
    assert losses[-1] <= losses[0] + 1e-12


def test_finetune_moves_bell_parameters_via_finite_differences():
    rng = np.random.default_rng(9)
    X = np.vstack([rng.normal(-1.0, 0.3, (20, 1)), rng.normal(1.0, 0.3, (20, 1))])
    y = np.array([1] * 20 + [2] * 20)
    memberships = [[MembershipFunction("bell", (-0.4, 1.0, 2.0)),
                    MembershipFunction("bell", (0.4, 1.0, 2.0))]]
    model = fit_consequents(
        AnfisModel(memberships, RuleBase.grid(1, 2), np.zeros((2, 2, 2)), n_classes=2),
        X, y, ridge=1e-3,
    )
    tuned, losses = anfis_finetune(model, X, y, epochs=10, learning_rate=0.02)
    assert losses[-1] <= losses[0]
    moved = any(
        a.params != b.params
        for a, b in zip(model.memberships[0], tuned.memberships[0])
    )
    assert moved


# --- rule report -----------------------------------------------------------------

def test_report_single_rule_line_count():
    model = single_rule_model([0.1, 0.2, 0.3, 0.4])
    text = rules_report(model, [[0.0]])
    assert len(text.strip().splitlines()) == 1


def test_report_81_lines_for_three_mfs_four_inputs():
    rng = np.random.default_rng(10)
    memberships = [
        [MembershipFunction("gaussian", (c, 1.0)) for c in (-1.0, 0.0, 1.0)]
        for _ in range(4)
    ]
    rule_base = RuleBase.grid(4, 3)
    model = AnfisModel(memberships, rule_base,
                       rng.uniform(-1, 1, (81, 4, 5)))
    text = rules_report(model, rng.uniform(-1, 1, (10, 4)))
    assert len(text.strip().splitlines()) == 81


def test_report_regeneration_is_byte_identical():
    rng = np.random.default_rng(11)
    model = random_model(rng)
    ref = rng.uniform(-2, 2, (15, model.n_inputs))
    assert rules_report(model, ref) == rules_report(model, ref)


def test_model_serialization_roundtrip():
    rng = np.random.default_rng(12)
    model = random_model(rng)
    clone = model_from_dict(model_to_dict(model))
    X = rng.uniform(-2, 2, (10, model.n_inputs))
    np.testing.assert_allclose(forward_batch(clone, X)[0],
                               forward_batch(model, X)[0], atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=-100, max_value=100), min_size=2, max_size=2))
def test_normalized_firings_sum_to_one(xs):
    memberships = [
        [MembershipFunction("gaussian", (-1.0, 0.8)),
         MembershipFunction("triangular", (-2.0, 0.0, 2.0))],
        [MembershipFunction("bell", (0.5, 1.0, 2.0)),
         MembershipFunction("gaussian", (1.0, 1.2))],
    ]
    model = AnfisModel(memberships, RuleBase.grid(2, 2), np.ones((4, 4, 3)))
    _, norm = anfis_forward(model, xs)
    assert abs(float(norm.sum()) - 1.0) < 1e-12
