#!/usr/bin/env python3
"""
Script de prueba para el motor de elipsoides
"""

import math
import sys
from pathlib import Path

# Agregar src al path
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest

from src.ellipsoid import (
    central_cut,
    central_cut_det_factor,
    ellipsoid_max_coordinate,
    ellipsoid_minimize,
)
from src.errors import InfeasibleError, InvalidArgumentError
from src.lmo import difference_lmo, hull_lmo, initial_radius, make_hull, zonotope_extreme
from src.logger import logger
from src.models import CutRequest, EllipsoidState, SeparationResult, Zonotope
from src.nearest_point import make_separation_oracle


def squared_norm(v):
    return float(v @ v)


def squared_norm_gradient(v):
    return 2.0 * v


def test_central_cut():
    """Razón de determinantes de un corte central"""
    logger.header("Testing central_cut")

    logger.step("Test 1: closed-form factors")
    assert central_cut_det_factor(1) == 0.25
    assert abs(central_cut_det_factor(2) - 16.0 / 27.0) <= 1e-15
    for k in range(2, 30):
        assert central_cut_det_factor(k) <= math.exp(-1.0 / (k + 1))

    logger.step("Test 2: det(Q) shrinks by the exact factor")
    rng = np.random.default_rng(9)
    for k in (1, 2, 3, 6):
        A = rng.standard_normal((k, k))
        state = EllipsoidState(center=rng.standard_normal(k), shape=A @ A.T + k * np.eye(k))
        before = state.log_det()
        after = central_cut(state, CutRequest(kind="objective", normal=rng.standard_normal(k), offset=0.0))
        ratio = math.exp(after - before)
        assert abs(ratio - central_cut_det_factor(k)) <= 1e-8 * central_cut_det_factor(k)
        assert state.is_symmetric()
        assert state.is_positive_definite()
        assert state.iteration == 1

    logger.step("Test 3: k = 1 bisects the interval")
    state = EllipsoidState(center=np.array([0.0]), shape=np.array([[4.0]]))
    central_cut(state, CutRequest(kind="feasibility", normal=[1.0], offset=0.0))
    assert state.center.tolist() == [-1.0]
    assert state.shape.tolist() == [[1.0]]

    logger.step("Test 4: flat direction leaves the state untouched")
    state = EllipsoidState(center=np.zeros(2), shape=np.diag([1.0, 1e-40]))
    assert central_cut(state, CutRequest(kind="objective", normal=[0.0, 1.0], offset=0.0)) is None
    assert state.iteration == 0
    assert state.center.tolist() == [0.0, 0.0]

    logger.step("Test 5: a nearly singular shape stays positive definite")
    state = EllipsoidState(center=np.zeros(2), shape=np.array([[1.0, 1.0 - 1e-12], [1.0 - 1e-12, 1.0]]))
    for _ in range(40):
        if central_cut(state, CutRequest(kind="objective", normal=[1.0, -1.0], offset=0.0)) is None:
            break
    assert np.all(np.isfinite(state.shape))
    assert state.is_symmetric()

    logger.success("central_cut tests completed")


def test_ellipsoid_minimize():
    """Minimización de ‖v‖² sobre politopos"""
    logger.header("Testing ellipsoid_minimize")

    logger.step("Test 1: difference of two segments")
    H_plus = make_hull([[2, 0], [3, 1]], 1.0)
    H_minus = make_hull([[0, 0], [-1, 1]], 1.0)
    oracle = make_separation_oracle(difference_lmo(H_plus, H_minus), early_exit=True)
    solved = ellipsoid_minimize(
        [oracle], squared_norm, squared_norm_gradient,
        radius=initial_radius(H_plus, H_minus), eps=1e-7, dimension=2,
        feasible_hint=[2.5, 0.0], record_history=True,
    )
    assert abs(solved.best_value - 4.0) <= 1e-3
    assert np.allclose(solved.best_point, [2, 0], atol=1e-2)
    assert solved.termination in ("tolerance_met", "volume_exhausted")

    logger.step("Test 2: log det history follows the exact factor")
    steps = np.diff(solved.log_det_history)
    assert len(steps) == solved.iterations
    assert np.allclose(steps[:10], math.log(central_cut_det_factor(2)), rtol=0, atol=1e-8)
    assert np.all(steps <= -1.0 / 3.0 + 1e-6)

    logger.step("Test 3: singleton region")
    origin = make_separation_oracle(hull_lmo(make_hull([[0, 0]], 1.0)))
    solved = ellipsoid_minimize([origin], squared_norm, squared_norm_gradient, radius=2.0, dimension=2)
    assert solved.best_value == 0.0
    assert solved.termination == "tolerance_met"

    logger.step("Test 4: disjoint bodies are infeasible")
    far_a = make_separation_oracle(hull_lmo(make_hull([[5, 5]], 1.0)))
    far_b = make_separation_oracle(hull_lmo(make_hull([[-5, -5]], 1.0)))
    with pytest.raises(InfeasibleError) as info:
        ellipsoid_minimize([far_a, far_b], squared_norm, squared_norm_gradient,
                           radius=10.0, eps=1e-3, dimension=2)
    assert isinstance(info.value.certificate, EllipsoidState)

    logger.step("Test 5: invalid arguments")
    with pytest.raises(InvalidArgumentError):
        ellipsoid_minimize([origin], squared_norm, squared_norm_gradient, radius=1.0, eps=0.0, dimension=2)
    with pytest.raises(InvalidArgumentError):
        ellipsoid_minimize([origin], squared_norm, squared_norm_gradient, radius=1.0)

    logger.step("Test 6: uncertified centers are never the best point")

    def never_certified(q):
        return SeparationResult(kind="uncertified", normal=[1.0, 0.0], distance=1.0)

    with pytest.raises(InfeasibleError) as info:
        ellipsoid_minimize([never_certified], squared_norm, squared_norm_gradient,
                           radius=1.0, eps=1e-3, dimension=2, feasible_hint=[0.5, 0.5])
    assert info.value.report.uncertified_centers == 1
    assert info.value.report.best_point is None

    logger.success("ellipsoid_minimize tests completed")


def test_ellipsoid_max_coordinate():
    """Máxima coordenada sobre Z₁ ∩ Z₂"""
    logger.header("Testing ellipsoid_max_coordinate")

    logger.step("Test 1: identical zonotopes")
    Z = Zonotope(generators=[[1.0, 0.5], [0.5, 1.0]], upper_bounds=[1.0, 1.0])
    solved = ellipsoid_max_coordinate(Z, Z, coord=1, eps=1e-6)
    expected = float(zonotope_extreme(Z, [0.0, 1.0])[0][1])
    assert abs(solved.best_value - expected) <= 1e-4

    logger.step("Test 2: orthogonal segments meet only at the origin")
    Z1 = Zonotope(generators=[[1.0, 0.0]], upper_bounds=[1.0])
    Z2 = Zonotope(generators=[[0.0, 1.0]], upper_bounds=[1.0])
    solved = ellipsoid_max_coordinate(Z1, Z2, coord=0, eps=1e-6)
    assert abs(solved.best_value) <= 1e-6

    logger.step("Test 3: 1D lifted interval instance")
    Z_plus = Zonotope(generators=[[0.0, 1.0], [2.0, 1.0]], upper_bounds=[1.0, 1.0])
    Z_minus = Zonotope(generators=[[1.0, 1.0], [3.0, 1.0]], upper_bounds=[1.0, 1.0])
    solved = ellipsoid_max_coordinate(Z_plus, Z_minus, coord=1, eps=1e-7)
    assert abs(solved.best_value - 4.0 / 3.0) <= 1e-4

    logger.step("Test 4: coordinate out of range")
    with pytest.raises(InvalidArgumentError):
        ellipsoid_max_coordinate(Z1, Z2, coord=2)

    logger.success("ellipsoid_max_coordinate tests completed")


def main():
    """Ejecuta todas las pruebas"""
    logger.header("Ellipsoid Tests")

    try:
        test_central_cut()
        test_ellipsoid_minimize()
        test_ellipsoid_max_coordinate()

        logger.header("All Tests Completed Successfully!")

    except Exception as e:
        logger.error(f"Tests failed: {str(e)}")
        logger.log_exception(e)
        sys.exit(1)


if __name__ == '__main__':
    main()
