import numpy as np
import pytest

from mibci.metrics import confusion, metrics


# --- independent oracle: literal formula evaluation with loops ----------------

def brute_metrics(cm):
    cm = [[float(v) for v in row] for row in cm]
    n = len(cm)
    total = sum(sum(row) for row in cm)
    diag = sum(cm[i][i] for i in range(n))
    accuracy = diag / total

    precisions, recalls, f1s = [], [], []
    for c in range(n):
        col = sum(cm[r][c] for r in range(n))
        row = sum(cm[c][p] for p in range(n))
        p = cm[c][c] / col if col > 0 else 0.0
        r = cm[c][c] / row if row > 0 else 0.0
        precisions.append(p)
        recalls.append(r)
        f1s.append(2 * p * r / (p + r) if (p + r) > 0 else 0.0)

    p_e = sum(
        (sum(cm[c][j] for j in range(n)) * sum(cm[i][c] for i in range(n)))
        for c in range(n)
    ) / total**2
    kappa = (accuracy - p_e) / (1.0 - p_e)
    return (accuracy, sum(precisions) / n, sum(recalls) / n, sum(f1s) / n, kappa)


def test_confusion_counts():
    cm = confusion([1, 1, 2], [1, 2, 2])
    expected = np.zeros((4, 4), dtype=np.int64)
    expected[0, 0] = 1
    expected[0, 1] = 1
    expected[1, 1] = 1
    np.testing.assert_array_equal(cm, expected)


def test_confusion_perfect_is_diagonal():
    y = [1, 2, 3, 4, 1, 2, 3, 4]
    cm = confusion(y, y)
    np.testing.assert_array_equal(cm, np.diag([2, 2, 2, 2]))


def test_confusion_empty_and_errors():
    np.testing.assert_array_equal(confusion([], []), np.zeros((4, 4)))
    with pytest.raises(ValueError, match="lie in"):
        confusion([1, 5], [1, 1])
    with pytest.raises(ValueError, match="mismatch"):
        confusion([1, 2], [1])


def test_perfect_diagonal_scores():
    m = metrics(np.diag([10, 10, 10, 10]))
    assert m.accuracy == 1.0
    assert m.kappa == 1.0
    assert m.as_percentages()["accuracy"] == 100.0
    assert m.as_percentages()["kappa"] == 100.0


def test_all_one_class_prediction_uniform_truth():
    cm = np.zeros((4, 4))
    cm[:, 0] = 5.0  # everything predicted class 1, 5 trials per true class
    m = metrics(cm)
    assert m.accuracy == pytest.approx(0.25)
    assert m.kappa == pytest.approx(0.0, abs=1e-15)


def test_three_class_example_against_brute_force():
    cm = np.array([[2, 1, 0], [0, 3, 0], [1, 0, 2]])
    m = metrics(cm)
    acc, prec, rec, f1, kappa = brute_metrics(cm)
    assert m.accuracy == pytest.approx(acc, abs=1e-15)
    assert m.precision == pytest.approx(prec, abs=1e-15)
    assert m.recall == pytest.approx(rec, abs=1e-15)
    assert m.f1 == pytest.approx(f1, abs=1e-15)
    assert m.kappa == pytest.approx(kappa, abs=1e-15)


def test_random_matrices_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(300):
        cm = rng.integers(0, 30, (4, 4))
        if cm.sum() == 0 or not np.all(np.isfinite(cm)):
            continue
        row, col = cm.sum(axis=1), cm.sum(axis=0)
        if (row * col).sum() == cm.sum() ** 2:
            continue  # degenerate p_e = 1
        m = metrics(cm)
        expected = brute_metrics(cm)
        got = (m.accuracy, m.precision, m.recall, m.f1, m.kappa)
        np.testing.assert_allclose(got, expected, atol=1e-12)
        assert -1.0 <= m.kappa <= 1.0
        if np.all(cm - np.diag(np.diag(cm)) == 0):
            assert m.kappa == pytest.approx(1.0)


def test_kappa_is_one_iff_diagonal():
    rng = np.random.default_rng(1)
    diag = np.diag(rng.integers(1, 10, 4))
    assert metrics(diag).kappa == pytest.approx(1.0)
    off = diag.copy()
    off[0, 1] = 3
    assert metrics(off).kappa < 1.0


def test_degenerate_expected_agreement_raises():
    cm = np.zeros((4, 4))
    cm[0, 0] = 7.0  # all mass in one row/column pair
    with pytest.raises(ValueError, match="undefined"):
        metrics(cm)


def test_empty_matrix_raises():
    with pytest.raises(ValueError, match="empty"):
        metrics(np.zeros((4, 4)))


def test_zero_division_convention():
    # class 4 never occurs and is never predicted: its P/R/F1 count as 0
    cm = np.zeros((4, 4))
    cm[0, 0] = cm[1, 1] = cm[2, 2] = 4.0
    cm[0, 1] = 2.0
    m = metrics(cm)
    brute = brute_metrics(cm)
    np.testing.assert_allclose(
        (m.accuracy, m.precision, m.recall, m.f1, m.kappa), brute, atol=1e-15
    )
    assert m.precision < 1.0  # the empty class drags the macro average
