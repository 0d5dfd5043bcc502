import numpy as np
import pytest

from qmlgrid.metrics import (Metrics, evaluate, f1_score, precision_score,
                             recall_score)


def test_counts():
    m = evaluate([1, 1, 0, 0, 1, 0], [1, 0, 0, 1, 1, 0])
    assert (m.tp, m.fp, m.fn, m.tn) == (2, 1, 1, 2)


def test_perfect_prediction():
    m = evaluate([0, 1, 1, 0], [0, 1, 1, 0])
    assert m.precision == m.recall == m.f1 == 1.0


def test_zero_denominators_give_zero():
    assert precision_score(0, 0) == 0.0
    assert recall_score(0, 0) == 0.0
    assert f1_score(0.0, 0.0) == 0.0
    # all-negative predictions on all-negative truth: no positives anywhere
    m = evaluate([0, 0, 0], [0, 0, 0])
    assert m.f1 == 0.0


def test_f1_is_harmonic_mean():
    # frozen reference point: P=0.64, R=0.83
    assert f1_score(0.64, 0.83) == pytest.approx(0.72272, abs=5e-6)
    p, r = 0.3, 0.9
    assert f1_score(p, r) == pytest.approx(2 / (1 / p + 1 / r), rel=1e-12)


def test_from_counts_matches_evaluate():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 2, size=200)
    pred = rng.integers(0, 2, size=200)
    m = evaluate(y, pred)
    assert m == Metrics.from_counts(m.tp, m.fp, m.fn, m.tn)
    assert m.tp + m.fp + m.fn + m.tn == 200


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        evaluate([1, 0], [1, 0, 1])
