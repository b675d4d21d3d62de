import json

import numpy as np
import pytest

import sscl


def two_clusters(per_class=15, d=2, seed=0, noise=0.0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-3.0, 1.0, (per_class, d)), rng.normal(3.0, 1.0, (per_class, d))])
    y = np.repeat([0, 1], per_class)
    flip = rng.random(y.size) < noise
    y[flip] = 1 - y[flip]
    return X, y


def test_l1_quadratic_matches_soft_threshold():
    # Diagonal P separates: v_i = -sign(q_i) max(|q_i| - gamma, 0) / P_ii.
    P = np.diag([2.0, 1.0, 4.0])
    q = np.array([-3.0, 0.5, 2.0])
    out = sscl.solve_l1_quadratic(P, q, 1.0)
    assert out["converged"]
    np.testing.assert_allclose(out["x"], [1.0, 0.0, -0.25], atol=1e-12)


def test_box_qp_clips_the_diagonal_maximiser():
    # For diagonal M the maximiser is clip(1 / M_ii, 0, upper).
    M = np.diag([1.0, 0.5])
    out = sscl.solve_box_qp(M, 0.4)
    assert out["converged"]
    np.testing.assert_allclose(out["x"], [0.4, 0.4], atol=1e-12)
    out = sscl.solve_box_qp(np.diag([2.0, 4.0]), 1.0)
    np.testing.assert_allclose(out["x"], [0.5, 0.25], atol=1e-12)


def test_classifier_fits_separable_clusters():
    X, y = two_clusters()
    labels = np.where(y == 0, "neg", "pos")
    clf = sscl.SSCLClassifier(seed=3).fit(X, labels)
    assert clf.score(X, labels) == 1.0
    assert set(clf.predict(X[:3])) <= {"neg", "pos"}


def test_model_round_trip(tmp_path):
    X, y = two_clusters(seed=1, noise=0.1)
    model = sscl.fit(X, y.tolist(), sscl.make_hyperparams(alpha=0.1))
    path = str(tmp_path / "model.json")
    model.save(path)
    loaded = sscl.Ensemble.load(path)
    assert loaded.predict(X) == model.predict(X)
    assert json.loads(loaded.to_json())["format"] == "sscl-model"
    assert loaded.scores(X[0]) == model.scores(X[0])


def test_cross_validation_report():
    X, y = two_clusters(per_class=20)
    report = sscl.cross_validate(X, y.tolist(), ["sscl", "knn"], folds=5, seed=2, knn_k=3)
    for name in ("sscl", "knn"):
        r = report[name]
        assert len(r["folds"]) == 5
        assert r["mean"] == pytest.approx(np.mean(r["folds"]))
        assert len(r["predictions"]) == 40
    assert report["sscl"]["mean"] == 1.0


def test_convergence_trace_accounting():
    X, y = two_clusters(seed=4, noise=0.1)
    hyper = sscl.make_hyperparams(alpha=0.1, max_outer_iter=20)
    rows = sscl.convergence(X, y.tolist(), hyper)
    assert 1 <= len(rows) <= 20
    assert [r["t"] for r in rows] == list(range(1, len(rows) + 1))
    assert all(0.0 < r["multiplier_step"] <= 1.0 for r in rows)
    assert sscl.convergence(X, y.tolist(), hyper) == rows
    hyper.max_outer_iter = 1
    assert len(sscl.convergence(X, y.tolist(), hyper)) == 1


def test_errors_map_to_python_exceptions():
    X, y = two_clusters()
    with pytest.raises(sscl.ConfigError):
        sscl.fit(X, y.tolist(), sscl.make_hyperparams(alpha=10.0, beta=1.0))
    with pytest.raises(sscl.ConfigError):
        sscl.fit(X, y.tolist()[:-1])
    with pytest.raises(TypeError):
        sscl.make_hyperparams(delta=1.0)
    with pytest.raises(sscl.DataError):
        sscl.load_csv("/nonexistent.csv")
