#!/usr/bin/env python3
"""
Script de prueba para el entrenamiento soft-margin
"""

import sys
from pathlib import Path

# Agregar src al path
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest

from src.dataset import make_dataset
from src.errors import InvalidArgumentError, UndefinedClassifierError
from src.logger import logger
from src import trainer as trainer_module
from src.models import BiasStrategy, SolveReport
from src.reference_oracle import brute_nearest, random_instance
from src.trainer import (
    decision_value,
    kkt_check,
    line_search_bias,
    mu_range,
    predict,
    train,
    training_errors,
)


def dataset_a():
    """I₊ = {(2,0),(3,1)}, I₋ = {(0,0),(−1,1)}"""
    return make_dataset([[2, 0], [3, 1], [0, 0], [-1, 1]], [1, 1, -1, -1])


def overlapping_instance(seed: int = 0, n: int = 30):
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((n, 2))
    labels = np.where(np.arange(n) % 2 == 0, 1, -1)
    points[labels == 1] += [1.5, 0.5]
    return make_dataset(points, labels)


def test_train_hard_margin():
    """μ = 1 sobre datos separables"""
    logger.header("Testing train at mu = 1")

    ds = dataset_a()
    for solver in ("ellipsoid", "nearest_point"):
        logger.step(f"Solver {solver}")
        clf = train(ds, 1.0, solver=solver)
        assert abs(clf.margin - 2.0) <= 1e-6
        assert np.allclose(clf.w / clf.w_norm, [1, 0], atol=1e-6)
        assert abs(clf.b_plus - 4.0) <= 1e-6 and abs(clf.b_minus) <= 1e-6
        assert clf.support_indices == [0, 2]
        assert np.allclose(clf.xi, 0.0, atol=1e-9)
        assert clf.diagnostics["solver"] == solver

    logger.step("Decision values")
    assert abs(decision_value(clf, [1, 0])) <= 1e-6
    assert abs(decision_value(clf, [2, 0]) - clf.margin * clf.w_norm / 2.0) <= 1e-6
    assert predict(clf, [[5, 0], [-3, 0]]).tolist() == [1, -1]
    assert training_errors(clf, ds) == 0

    logger.step("KKT conditions")
    report = kkt_check(clf, ds, tol=1e-5)
    assert report.passed, report.failed()

    logger.success("Hard margin tests completed")


def test_train_degenerate_and_errors():
    """Envolventes que se intersectan y μ fuera de rango"""
    logger.header("Testing degenerate classifiers")

    logger.step("Test 1: coincident centroids")
    ds = make_dataset([[-1], [1], [-2], [2]], [1, 1, -1, -1])
    clf = train(ds, 0.5)
    assert clf.margin == 0.0
    assert clf.is_degenerate
    assert kkt_check(clf, ds).passed
    with pytest.raises(UndefinedClassifierError):
        decision_value(clf, [0.0])
    with pytest.raises(UndefinedClassifierError):
        line_search_bias(clf, ds)

    logger.step("Test 2: mu out of range")
    with pytest.raises(InvalidArgumentError):
        train(ds, 0.4)
    with pytest.raises(InvalidArgumentError):
        train(ds, 1.5)
    with pytest.raises(InvalidArgumentError):
        train(ds, 0.5, solver="simplex")
    with pytest.raises(InvalidArgumentError):
        train(ds, True)
    assert mu_range(ds) == (0.5, 1.0)

    logger.step("Test 3: numpy scalars are accepted as mu")
    assert train(ds, np.int64(1)).mu == 1.0
    assert train(ds, np.float32(0.5)).mu == 0.5

    logger.success("Degenerate tests completed")


def test_soft_margin_against_reference():
    """‖v*‖² contra la enumeración de conjuntos activos"""
    logger.header("Testing train vs brute_nearest")

    rng = np.random.default_rng(42)
    for index in range(15):
        ds = random_instance(rng)
        low, _ = mu_range(ds)
        mu = float(rng.uniform(low, 1.0))
        clf = train(ds, mu)
        expected, _ = brute_nearest(ds, mu)
        assert abs(clf.squared_distance - expected) <= 1e-7 * max(1.0, expected), (index, mu)

    logger.success("Reference comparison completed")


def test_solver_agreement_and_kkt():
    """Elipsoide y nearest_point coinciden; KKT se cumple"""
    logger.header("Testing solver agreement")

    for seed in range(5):
        ds = overlapping_instance(seed)
        mu = 0.2 + 0.1 * seed
        by_ellipsoid = train(ds, mu, solver="ellipsoid")
        by_fw = train(ds, mu, solver="nearest_point")
        scale = max(1.0, by_fw.squared_distance)
        assert abs(by_ellipsoid.squared_distance - by_fw.squared_distance) <= 1e-5 * scale
        for clf in (by_ellipsoid, by_fw):
            report = kkt_check(clf, ds, tol=1e-5)
            assert report.passed, (seed, report.failed())

        logger.step(f"Seed {seed}: ellipsoid value matches the nearest point value")
        diagnostics = by_ellipsoid.diagnostics
        assert "ellipsoid_error" not in diagnostics
        allowed = max(1e-6, 10 * diagnostics["eps"]) + diagnostics["ellipsoid_gap"]
        assert abs(diagnostics["ellipsoid_value"] - diagnostics["nearest_point_value"]) <= allowed
        assert abs(diagnostics["ellipsoid_value"] - by_fw.squared_distance) <= allowed + 1e-6 * scale
        assert not diagnostics.get("solver_disagreement")

    logger.step("Perturbed alpha breaks w reconstruction")
    clf = train(overlapping_instance(0), 0.3)
    alpha = clf.alpha.copy()
    alpha[0] += 0.1
    broken = clf.model_copy(update={"alpha": alpha})
    report = kkt_check(broken, overlapping_instance(0), tol=1e-5)
    assert not report.conditions["w_reconstruction"].passed

    logger.success("Solver agreement tests completed")


def test_ellipsoid_disagreement_is_flagged():
    """Un valor del elipsoide lejos del óptimo queda marcado en diagnostics"""
    logger.header("Testing ellipsoid cross-check")

    def wrong_answer(*args, **kwargs):
        return SolveReport(best_point=np.array([100.0, 100.0]), best_value=20000.0,
                           certified_gap=0.0, iterations=1, termination="tolerance_met")

    with pytest.MonkeyPatch.context() as patch:
        patch.setattr(trainer_module, "ellipsoid_minimize", wrong_answer)
        clf = train(dataset_a(), 1.0, solver="ellipsoid")

    assert abs(clf.margin - 2.0) <= 1e-6
    assert clf.diagnostics["solver_disagreement"] is True
    assert abs(clf.diagnostics["cross_check_gap"] - 19996.0) <= 1e-4

    clf = train(dataset_a(), 1.0, solver="ellipsoid")
    assert "solver_disagreement" not in clf.diagnostics

    logger.success("Ellipsoid cross-check tests completed")


def test_geometric_invariance():
    """Traslación y rotación de los datos"""
    logger.header("Testing translation and rotation invariance")

    ds = overlapping_instance(1)
    mu = 0.3
    clf = train(ds, mu)

    logger.step("Test 1: translation keeps alpha and w, shifts b+ and b-")
    t = np.array([7.5, -3.25])
    moved = train(make_dataset(ds.points + t, ds.labels), mu)
    assert np.allclose(moved.alpha, clf.alpha, atol=1e-6)
    assert np.allclose(moved.w, clf.w, atol=1e-6)
    assert abs(moved.margin - clf.margin) <= 1e-6
    shift = float(clf.w @ t)
    assert abs(moved.b_plus - (clf.b_plus + shift)) <= 1e-6 * max(1.0, abs(shift))
    assert abs(moved.b_minus - (clf.b_minus + shift)) <= 1e-6 * max(1.0, abs(shift))

    logger.step("Test 2: rotation rotates w")
    angle = np.pi / 6
    R = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    turned = train(make_dataset(ds.points @ R.T, ds.labels), mu)
    assert np.allclose(turned.w, R @ clf.w, atol=1e-6)
    assert abs(turned.margin - clf.margin) <= 1e-6

    logger.success("Invariance tests completed")


def test_large_instance():
    """n = 10,000 y d = 10 terminan con un clasificador consistente"""
    logger.header("Testing a 10,000 x 10 dataset")

    rng = np.random.default_rng(2024)
    n, d = 10_000, 10
    labels = np.where(np.arange(n) % 2 == 0, 1, -1)
    points = rng.standard_normal((n, d))
    points[labels == 1, 0] += 3.0
    ds = make_dataset(points, labels)

    clf = train(ds, 0.01)
    assert clf.diagnostics["solver"] == "nearest_point"
    assert clf.margin > 0
    assert abs(float(np.sum(clf.alpha[ds.i_plus])) - 1.0) <= 1e-6
    assert abs(float(np.sum(clf.alpha[ds.i_minus])) - 1.0) <= 1e-6
    assert float(np.max(clf.alpha)) <= 0.01 + 1e-9
    assert clf.w[0] > 0

    logger.success("Large instance test completed")


def test_bias_strategies():
    """halfway y min_errors_line_search"""
    logger.header("Testing bias strategies")

    logger.step("Test 1: separable data keeps the halfway bias")
    ds = dataset_a()
    clf = train(ds, 1.0, bias=BiasStrategy.MIN_ERRORS_LINE_SEARCH)
    assert clf.bias_strategy == BiasStrategy.MIN_ERRORS_LINE_SEARCH
    assert abs(clf.b - (clf.b_plus + clf.b_minus) / 2.0) <= 1e-9

    logger.step("Test 2: a deep outlier costs exactly one error")
    points = [[2, 0], [3, 0], [4, 0], [-3, 0], [0, 0], [-1, 0], [-2, 0]]
    ds = make_dataset(points, [1, 1, 1, 1, -1, -1, -1])
    clf = train(ds, 0.4)
    assert not clf.is_degenerate
    bias = line_search_bias(clf, ds)
    assert training_errors(clf, ds, bias) == 1
    assert training_errors(clf, ds, bias) <= training_errors(clf, ds)

    logger.success("Bias strategy tests completed")


def main():
    """Ejecuta todas las pruebas"""
    logger.header("Trainer Tests")

    try:
        test_train_hard_margin()
        test_train_degenerate_and_errors()
        test_soft_margin_against_reference()
        test_solver_agreement_and_kkt()
        test_ellipsoid_disagreement_is_flagged()
        test_geometric_invariance()
        test_large_instance()
        test_bias_strategies()

        logger.header("All Tests Completed Successfully!")

    except Exception as e:
        logger.error(f"Tests failed: {str(e)}")
        logger.log_exception(e)
        sys.exit(1)


if __name__ == '__main__':
    main()
