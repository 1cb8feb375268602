"""
Separabilidad de margen cero
μ₀ = máximo μ con envolventes reducidas linealmente separables, vía la
coordenada final máxima sobre Z₊ ∩ Z₋, y su normalización μ*
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import psutil

from .dataset import lift_dataset
from .ellipsoid import ellipsoid_max_coordinate
from .errors import InvalidArgumentError, NonConvergenceError, ZonoSVMError
from .lmo import zonotope_lmo
from .logger import logger, log_function
from .models import LabeledDataset, SeparabilityResult, Zonotope
from .nearest_point import nearest_point
from .trainer import SLACK_TOL, mu_range, train


def normalize_mu(mu_zero: float, n: int) -> float:
    """μ* = (μ₀ − 2/n)/(1 − 2/n)"""
    if n <= 2:
        raise InvalidArgumentError("mu_star needs n > 2")
    return (mu_zero - 2.0 / n) / (1.0 - 2.0 / n)


def lifted_zonotopes(ds: LabeledDataset):
    """Z₊ y Z₋: zonotopos de los vectores levantados con uᵢ = 1"""
    V_plus, V_minus = lift_dataset(ds)
    return (
        Zonotope(generators=V_plus, upper_bounds=np.ones(V_plus.shape[0])),
        Zonotope(generators=V_minus, upper_bounds=np.ones(V_minus.shape[0])),
    )


def _witness_weights(Z: Zonotope, point: np.ndarray, tol: float) -> np.ndarray:
    """Pesos α ∈ [0, 1]^m con Σ αᵢvᵢ ≈ point"""
    try:
        return nearest_point(zonotope_lmo(Z), point, tol=tol * 1e-6, max_iterations=100_000).weights
    except NonConvergenceError as e:
        logger.log_warning(f"Witness recovery stopped early: {e}")
        return e.best.weights


@log_function
def zero_margin_mu(
    ds: LabeledDataset,
    eps: float = 1e-7,
    tol: float = 1e-9,
    separation_gap_tol: float = 1e-10,
    detect_separable: bool = True,
    record_history: bool = False,
) -> SeparabilityResult:
    """
    Calcula el μ de margen cero

    Maximiza Σαᵢ (la última coordenada) sobre Z₊ ∩ Z₋; el óptimo b*
    cumple μ₀ = 1/b*. Con b* ≤ 1 + eps los cascos convexos tienen
    interiores disjuntos: separable_flag y μ₀ = 1.

    Si los cascos están estrictamente separados Z₊ ∩ Z₋ = {0} y el
    elipsoide solo puede colapsar sobre el origen; por eso primero se
    entrena con μ = 1 y un margen duro > eps resuelve el caso sin
    elipsoide (testigo α = 0, punto común 0).

    Args:
        ds: Dataset etiquetado
        eps: Gap objetivo del elipsoide
        tol: Tolerancia de los oráculos de separación y del testigo
        separation_gap_tol: Gap de cada resolución de separación
        detect_separable: Entrenar primero con μ = 1 (guarda el margen duro)
        record_history: Guardar log det(Q) por iteración

    Returns:
        SeparabilityResult
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")

    low = max(1.0 / len(ds.i_plus), 1.0 / len(ds.i_minus))
    mu_star = None
    if ds.is_balanced and ds.n > 2:
        mu_star = normalize_mu(1.0, ds.n)

    hard_margin = None
    if detect_separable:
        try:
            hard = train(ds, 1.0, eps=eps, tol=tol, separation_gap_tol=separation_gap_tol)
            hard_margin = hard.margin
        except ZonoSVMError as e:
            logger.log_warning(f"Hard margin training failed ({e}); solving on the zonotopes")
        else:
            if hard_margin > eps:
                logger.log_info(f"zero_margin_mu: separable, hard margin at mu=1 is {hard_margin}")
                return SeparabilityResult(
                    mu_zero=1.0,
                    mu_star=mu_star,
                    weight_sum=0.0,
                    alpha=np.zeros(ds.n),
                    common_point=np.zeros(ds.d + 1),
                    separable_flag=True,
                    hard_margin=hard_margin,
                    iterations=int(hard.diagnostics.get("iterations", 0)),
                    termination="hard_margin",
                )

    Z_plus, Z_minus = lifted_zonotopes(ds)
    solved = ellipsoid_max_coordinate(
        Z_plus, Z_minus, coord=ds.d, eps=eps,
        separation_tol=tol, separation_gap_tol=separation_gap_tol,
        record_history=record_history,
    )
    weight_sum = float(solved.best_value)
    common_point = np.asarray(solved.best_point, dtype=float)

    # Testigo: pesos de cada zonotopo que reproducen el punto común
    alpha = np.zeros(ds.n)
    alpha[ds.i_plus] = _witness_weights(Z_plus, common_point, tol)
    alpha[ds.i_minus] = _witness_weights(Z_minus, common_point, tol)

    separable = weight_sum <= 1.0 + eps
    mu_zero = 1.0 if separable else float(np.clip(1.0 / weight_sum, low, 1.0))
    if mu_star is not None:
        mu_star = normalize_mu(mu_zero, ds.n)

    logger.log_info(
        f"zero_margin_mu: weight_sum={weight_sum} mu_zero={mu_zero} mu_star={mu_star} "
        f"separable={separable} termination={solved.termination}"
    )

    return SeparabilityResult(
        mu_zero=mu_zero,
        mu_star=mu_star,
        weight_sum=weight_sum,
        alpha=alpha,
        common_point=common_point,
        separable_flag=separable,
        hard_margin=hard_margin if separable else None,
        iterations=solved.iterations,
        termination=solved.termination,
    )


def margin_at_mu(ds: LabeledDataset, mu: float, **train_options) -> float:
    """Margen del clasificador entrenado con este μ"""
    return train(ds, mu, **train_options).margin


def _profile_point(args) -> Dict[str, Any]:
    ds, mu, train_options = args
    clf = train(ds, mu, **train_options)
    return {
        "mu": mu,
        "margin": clf.margin,
        "support_vectors": len(clf.support_indices),
        "squared_distance": clf.squared_distance,
        "training_errors": int(np.sum(clf.xi > SLACK_TOL)),
    }


def mu_grid(ds: LabeledDataset, points: int = 10) -> List[float]:
    """Rejilla uniforme de μ sobre el rango factible"""
    if points < 2:
        raise InvalidArgumentError("a mu grid needs at least 2 points")
    low, high = mu_range(ds)
    return np.linspace(low, high, points).tolist()


def worker_count(jobs: int) -> int:
    """Workers efectivos: no más que núcleos físicos disponibles"""
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    return max(1, min(jobs, cores))


def margin_profile(
    ds: LabeledDataset,
    mus: Optional[Iterable[float]] = None,
    points: int = 10,
    jobs: int = 1,
    **train_options,
) -> List[Dict[str, Any]]:
    """
    Filas (μ, margen, |SV|) sobre una rejilla de μ

    Args:
        ds: Dataset etiquetado
        mus: Valores de μ (por defecto mu_grid(ds, points))
        points: Tamaño de la rejilla por defecto
        jobs: Procesos en paralelo (entrenamientos independientes)

    Returns:
        Lista de filas ordenada por μ
    """
    mus = sorted(mus) if mus is not None else mu_grid(ds, points)
    tasks = [(ds, float(mu), train_options) for mu in mus]
    workers = worker_count(jobs)

    if workers == 1 or len(tasks) == 1:
        rows = [_profile_point(task) for task in tasks]
    else:
        logger.log_info(f"margin_profile: {len(tasks)} trainings on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_profile_point, tasks))
    return rows
