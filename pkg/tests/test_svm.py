import warnings

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from olidstack.features import SparseVector
from olidstack.svm import (
    ConvergenceWarning,
    LinearModel,
    PlattCalibrator,
    fit_calibrator,
    fit_platt,
    predict_proba,
    train,
)
from oracles import platt_reference, svm_l2_objective, svm_l2_qp
from svm_data import SEPARABLE, signs

PAIR_X = np.array([[-1.0], [1.0]])
PAIR_Y = ["neg", "pos"]


@pytest.mark.parametrize("reg", ["L1", "L2"])
def test_symmetric_pair(reg):
    m = train(PAIR_X, PAIR_Y, reg=reg, C=1.0, tol=1e-8)
    d = m.decision_function(np.array([[0.0], [-1.0], [1.0]]))
    assert abs(d[0]) <= 1e-6
    assert d[1] < 0 < d[2]
    assert m.predict(PAIR_X) == PAIR_Y


def test_l2_pair_closed_form():
    # margin constraint active at w=1, b=0 and slack zero
    m = train(PAIR_X, PAIR_Y, reg="L2", C=1.0, tol=1e-10)
    assert m.weights[0, 0] == pytest.approx(1.0, abs=1e-6)
    assert m.bias[0] == pytest.approx(0.0, abs=1e-6)


def test_l1_pair_closed_form():
    # min |w| + 2C(1-w)^2 at C=1 gives w = 3/4
    m = train(PAIR_X, PAIR_Y, reg="L1", C=1.0, tol=1e-10)
    assert m.weights[0, 0] == pytest.approx(0.75, abs=1e-6)


@pytest.mark.parametrize("k", range(len(SEPARABLE)))
def test_l2_objective_matches_qp(k):
    X, y = SEPARABLE[k]
    ref, _, _ = svm_l2_qp(X, signs(y), 1.0)
    m = train(X, y, reg="L2", C=1.0)
    got = svm_l2_objective(X, signs(y), 1.0, m.weights[0], m.bias[0])
    assert abs(got - ref) <= 1e-3 * abs(ref)
    assert m.predict(X) == y


@pytest.mark.parametrize("k", range(len(SEPARABLE)))
def test_l1_at_least_as_sparse(k):
    X, y = SEPARABLE[k]
    l1 = train(X, y, reg="L1", C=0.1)
    l2 = train(X, y, reg="L2", C=0.1)
    assert np.mean(l1.weights == 0) >= np.mean(l2.weights == 0)


def test_zero_features_give_bias():
    X = np.zeros((6, 3))
    m = train(X, ["a", "b", "b", "a", "b", "b"])
    d = m.decision_function(X)
    assert np.all(d == m.bias[0])
    assert m.decision(SparseVector([], [], 3)) == m.bias[0]


def test_decision_single_index_and_batch_agree():
    X, y = SEPARABLE[3]
    m = train(X, y)
    x = SparseVector([1], [2.5], 3)
    assert m.decision(x) == pytest.approx(m.weights[0, 1] * 2.5 + m.bias[0])
    batch = m.decision_function(X)
    for i in range(len(X)):
        assert batch[i] == pytest.approx(m.decision(SparseVector.from_dense(X[i])), abs=1e-12)


@pytest.mark.parametrize("reg", ["L1", "L2"])
def test_objective_trace_non_increasing(reg):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 8))
    y = ["p" if v > 0 else "n" for v in X[:, 0] + 0.5 * rng.normal(size=60)]
    m = train(X, y, reg=reg, C=0.5, tol=1e-6)
    trace = m.objective_trace[0]
    assert trace.size > 1
    assert np.all(np.diff(trace) <= 1e-12 * np.maximum(1.0, np.abs(trace[:-1])))


def test_determinism_and_seed():
    rng = np.random.default_rng(0)
    X = sp.random(40, 20, density=0.3, random_state=1, format="csr")
    y = list(rng.choice(["x", "y", "z"], size=40))
    a = train(X, y, seed=5)
    b = train(X, y, seed=5)
    assert np.array_equal(a.weights, b.weights) and np.array_equal(a.bias, b.bias)


def test_scaling_keeps_training_predictions():
    X, y = SEPARABLE[4]
    a = train(X, y, C=1.0)
    b = train(2.0 * X, y, C=1.0)
    assert a.predict(X) == b.predict(2.0 * X) == y
    assert not np.allclose(a.decision_function(X), b.decision_function(2.0 * X))


def test_multiclass_one_vs_rest_and_ties():
    X = np.array([[1.0, 0], [0, 1.0], [-1.0, -1.0], [1.2, 0], [0, 1.1], [-1.0, -1.2]])
    y = ["IND", "GRP", "OTH", "IND", "GRP", "OTH"]
    m = train(X, y, C=10.0)
    assert m.classes == ("GRP", "IND", "OTH")
    assert m.weights.shape == (3, 2)
    assert m.predict(X) == y
    tied = LinearModel(np.zeros((3, 2)), np.zeros(3), ("GRP", "IND", "OTH"))
    assert tied.predict(np.ones((1, 2))) == ["GRP"]


def test_non_convergence_is_a_warning():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(50, 5))
    y = list(rng.choice(["a", "b"], size=50))
    with pytest.warns(ConvergenceWarning):
        m = train(X, y, tol=1e-12, max_iter=2)
    assert not m.converged


def test_train_errors():
    with pytest.raises(ValueError):
        train(PAIR_X, ["a", "a"])
    with pytest.raises(ValueError):
        train(PAIR_X, ["a"])
    with pytest.raises(ValueError):
        train(PAIR_X, PAIR_Y, reg="L3")
    with pytest.raises(ValueError):
        train(PAIR_X, PAIR_Y, C=0.0)
    m = train(PAIR_X, PAIR_Y)
    with pytest.raises(ValueError):
        m.decision_function(np.zeros((1, 2)))
    with pytest.raises(ValueError):
        m.decision(SparseVector([0], [1.0], 2))


def test_model_roundtrip(tmp_path):
    X = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [1.0, 1.0, 0]])
    m = train(X, ["a", "b", "c", "a"], reg="L1", C=0.7)
    p = tmp_path / "model.txt"
    m.save(p)
    assert p.read_text(encoding="utf-8").splitlines()[0] == "linsvm v1 L1 0.7 3 a b c"
    back = LinearModel.load(p)
    assert back.classes == m.classes and back.reg == "L1" and back.C == 0.7
    assert np.array_equal(back.weights, m.weights) and np.array_equal(back.bias, m.bias)


# --- Platt -------------------------------------------------------------------

def test_platt_separated():
    d = np.r_[-np.ones(50), np.ones(50)]
    lab = np.r_[np.zeros(50, bool), np.ones(50, bool)]
    cal = fit_platt(d, lab)
    assert cal(1.0) > 0.9 and cal(-1.0) < 0.1
    a, b = platt_reference(d, lab)
    assert cal.a == pytest.approx(a, abs=1e-3) and cal.b == pytest.approx(b, abs=1e-3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_platt_matches_generic_optimizer(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 60))
    lab = rng.random(n) < 0.4
    lab[0], lab[1] = True, False
    d = rng.normal(size=n) + 1.5 * lab
    cal = fit_platt(d, lab)
    a, b = platt_reference(d, lab)
    if a <= 0:
        grid = np.linspace(-3, 3, 13)
        assert np.allclose(cal(grid), PlattCalibrator(a, b)(grid), atol=1e-4)


def test_platt_single_pair_strictly_inside():
    cal = fit_platt([-1.0, 1.0], [False, True])
    p = cal(np.array([-1.0, 1.0]))
    assert np.all((p > 0) & (p < 1))
    assert p[0] < 0.5 < p[1]


def test_platt_degenerate_and_no_signal():
    cal = fit_platt(np.zeros(10), [True] * 3 + [False] * 7)
    assert cal.a == 0.0 and cal.b == pytest.approx(np.log(7 / 3))
    rng = np.random.default_rng(7)
    d = rng.normal(size=4000)
    lab = rng.random(4000) < 0.3
    p = fit_platt(d, lab)(np.linspace(-2, 2, 9))
    assert np.all(np.abs(p - lab.mean()) <= 0.02)


def test_platt_errors_and_roundtrip(tmp_path):
    with pytest.raises(ValueError):
        fit_platt([1.0, 2.0], [True, True])
    with pytest.raises(ValueError):
        PlattCalibrator(float("nan"), 0.0)
    cal = PlattCalibrator(-1.25, 0.5)
    cal.save(tmp_path / "p.txt")
    assert PlattCalibrator.load(tmp_path / "p.txt") == cal
    assert np.all(cal(np.array([-1e6, 1e6])) > 0) and np.all(cal(np.array([-1e6, 1e6])) < 1)


def test_predict_proba_binary_and_multiclass():
    X = np.array([[-1.0], [1.0], [-2.0], [2.0], [-0.5], [0.5]])
    y = ["neg", "pos"] * 3
    m = train(X, y)
    cal = fit_calibrator(m, m.decision_function(X), y)
    P = predict_proba(m, cal, np.array([[0.0], [3.0]]))
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9)
    assert P[0, 1] == pytest.approx(0.5, abs=0.05)
    assert P[1, 1] > P[0, 1]

    rng = np.random.default_rng(11)
    X3 = rng.normal(size=(90, 4))
    y3 = [("GRP", "IND", "OTH")[int(np.argmax(r[:3]))] for r in X3]
    m3 = train(X3, y3)
    cal3 = fit_calibrator(m3, m3.decision_function(X3), y3)
    T = rng.normal(size=(500, 4))
    P3 = predict_proba(m3, cal3, T)
    assert np.allclose(P3.sum(axis=1), 1.0, atol=1e-9)
    assert np.array_equal(P3.argmax(axis=1), m3.decision_function(T).argmax(axis=1))
    assert predict_proba(m3, cal3, SparseVector([0], [1.0], 4)).shape == (1, 3)
