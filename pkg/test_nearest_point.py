#!/usr/bin/env python3
"""
Script de prueba para nearest_point y el oráculo de separación
"""

import sys
from pathlib import Path

# Agregar src al path
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest

from src.errors import InvalidArgumentError, NonConvergenceError
from src.lmo import difference_lmo, hull_lmo, make_hull, zonotope_lmo
from src.logger import logger
from src.models import Zonotope
from src.nearest_point import (
    NearestPointState,
    make_separation_oracle,
    nearest_point,
    verify_hyperplane,
)


def dataset_a_lmo():
    """P = H₊ ⊖ H₋ con H₊ = {(2,0),(3,1)}, H₋ = {(0,0),(−1,1)}, μ = 1"""
    return difference_lmo(make_hull([[2, 0], [3, 1]], 1.0), make_hull([[0, 0], [-1, 1]], 1.0))


def test_nearest_point_examples():
    """Puntos más cercanos conocidos"""
    logger.header("Testing nearest_point")

    logger.step("Test 1: segment and an outside target")
    segment = hull_lmo(make_hull([[0, 0], [2, 0]], 1.0))
    result = nearest_point(segment, [1, 5])
    assert np.allclose(result.point, [1, 0], atol=1e-9)
    assert abs(result.squared_norm - 25.0) <= 1e-9
    assert 0 <= result.duality_gap <= 1e-9

    logger.step("Test 2: difference polytope and the origin")
    result = nearest_point(dataset_a_lmo(), [0, 0])
    assert np.allclose(result.point, [2, 0], atol=1e-6)
    assert abs(result.squared_norm - 4.0) <= 1e-8
    assert np.allclose(result.weights, [1, 0, 1, 0], atol=1e-6)

    logger.step("Test 3: target inside the body")
    square = zonotope_lmo(Zonotope(generators=[[1, 0], [0, 1]], upper_bounds=[1, 1]))
    result = nearest_point(square, [0.25, 0.5], tol=1e-12)
    assert result.squared_norm <= 1e-9

    logger.step("Test 4: invalid tolerance")
    with pytest.raises(InvalidArgumentError):
        nearest_point(square, [0, 0], tol=0)

    logger.success("nearest_point tests completed")


def test_iteration_cap_and_warm_start():
    """Límite de iteraciones con mejor iterado y arranque en caliente"""
    logger.header("Testing iteration cap and warm start")

    rng = np.random.default_rng(1)
    H = make_hull(rng.standard_normal((40, 5)), 0.1)
    lmo = hull_lmo(H)
    target = rng.standard_normal(5) * 3

    logger.step("Test 1: cap raises with the best iterate")
    with pytest.raises(NonConvergenceError) as info:
        nearest_point(lmo, target, tol=1e-15, max_iterations=2)
    assert info.value.best is not None
    assert info.value.best.iterations == 2

    logger.step("Test 2: warm start reuses the active set")
    state = NearestPointState()
    cold = nearest_point(lmo, target, tol=1e-10, state=state)
    warm = nearest_point(lmo, target, tol=1e-10, state=state)
    assert abs(cold.squared_norm - warm.squared_norm) <= 1e-8
    assert warm.iterations <= cold.iterations

    logger.step("Test 3: witness weights reproduce the point")
    assert np.allclose(cold.weights @ H.points, cold.point, atol=1e-9)
    assert abs(float(np.sum(cold.weights)) - 1.0) <= 1e-9
    assert np.all(cold.weights <= H.mu + 1e-9)

    logger.success("Iteration cap tests completed")


def test_separation_oracle():
    """Inside / Hyperplane"""
    logger.header("Testing separation oracle")

    logger.step("Test 1: zonotope generator endpoint is inside")
    Z = Zonotope(generators=[[1, 1], [-1, 1]], upper_bounds=[1, 1])
    oracle = make_separation_oracle(zonotope_lmo(Z))
    assert oracle([1, 1]).inside

    logger.step("Test 2: unit segment and (0, 1)")
    oracle = make_separation_oracle(hull_lmo(make_hull([[0, 0], [1, 0]], 1.0)))
    result = oracle([0, 1])
    assert not result.inside
    assert np.allclose(result.normal, [0, 1], atol=1e-12)
    assert abs(result.offset) <= 1e-12
    assert result.separation_margin > 0

    logger.step("Test 3: difference polytope and the origin")
    lmo = dataset_a_lmo()
    result = make_separation_oracle(lmo)([0, 0])
    assert np.allclose(result.normal, [-1, 0], atol=1e-6)
    assert abs(result.offset + 2.0) <= 1e-6
    assert verify_hyperplane(lmo, result.normal, result.offset)

    logger.step("Test 4: early exit still returns a valid cut")
    oracle = make_separation_oracle(lmo, early_exit=True)
    result = oracle([-3, 4])
    assert not result.inside
    assert float(result.normal @ np.array([-3, 4])) > result.offset
    assert verify_hyperplane(lmo, result.normal, result.offset)

    logger.step("Test 5: coarse gap leaves the point uncertified")
    segment = hull_lmo(make_hull([[-1, 0], [1, 0]], 1.0))
    oracle = make_separation_oracle(segment, gap_tol=10.0)
    result = oracle([0, 1e-3])
    assert result.kind == "uncertified"
    assert not result.inside
    assert result.distance > oracle.tol
    assert result.offset is None

    logger.success("Separation oracle tests completed")


def main():
    """Ejecuta todas las pruebas"""
    logger.header("Nearest Point Tests")

    try:
        test_nearest_point_examples()
        test_iteration_cap_and_warm_start()
        test_separation_oracle()

        logger.header("All Tests Completed Successfully!")

    except Exception as e:
        logger.error(f"Tests failed: {str(e)}")
        logger.log_exception(e)
        sys.exit(1)


if __name__ == '__main__':
    main()
