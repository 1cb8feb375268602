"""
Método del elipsoide de corte central con objetivo deslizante
Minimización convexa sobre regiones dadas por oráculos de separación
"""

import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import ConditioningError, InfeasibleError, InvalidArgumentError
from .lmo import initial_radius, zonotope_lmo
from .logger import logger
from .models import CutRequest, EllipsoidState, SolveReport, Zonotope
from .nearest_point import SeparationOracle, make_separation_oracle


DEFAULT_EPS = 1e-7
# aᵀQa relativo a ‖a‖²·tr(Q) por debajo del cual el elipsoide es plano en a
_FLAT_FLOOR = float(np.finfo(float).eps)

Objective = Callable[[np.ndarray], float]
Subgradient = Callable[[np.ndarray], np.ndarray]


def central_cut_det_factor(k: int) -> float:
    """
    Razón exacta det(Q⁺)/det(Q) de un corte central en dimensión k

    (k²/(k²−1))^k · (k−1)/(k+1) para k ≥ 2; 1/4 para k = 1. Siempre
    es ≤ e^{−1/(k+1)}.
    """
    if k < 1:
        raise InvalidArgumentError(f"dimension must be >= 1, got {k}")
    if k == 1:
        return 0.25
    return (k * k / (k * k - 1.0)) ** k * (k - 1.0) / (k + 1.0)


def iteration_cap(k: int, radius: float, eps: float) -> int:
    """2k(k+1)·ln(R/eps) + 1000"""
    return int(2 * k * (k + 1) * max(math.log(radius / eps), 0.0)) + 1000


def _factorize(shape: np.ndarray, iteration: int):
    """Cholesky de Q; si falla, reinfla Q una vez antes de abortar"""
    k = shape.shape[0]
    shape = (shape + shape.T) / 2.0
    try:
        return shape, np.linalg.cholesky(shape)
    except np.linalg.LinAlgError:
        shape = shape + (1e-12 * np.trace(shape) / k) * np.eye(k)
        try:
            return shape, np.linalg.cholesky(shape)
        except np.linalg.LinAlgError:
            raise ConditioningError(f"ellipsoid shape lost positive definiteness at iteration {iteration}")


def central_cut(state: EllipsoidState, cut: CutRequest) -> Optional[float]:
    """
    Aplica el corte a·x ≤ a·c por el centro y actualiza el estado

    Los cortes profundos (β < a·c) se aplican como centrales: el
    semiespacio central contiene al profundo. La actualización se hace
    sobre el factor Q = L Lᵀ: con p = Lᵀa y u = p/‖p‖,
    L⁺ = s·L(I − γuuᵀ), que es no singular para cualquier corte.

    Returns:
        log det(Q) tras el corte, o None si el elipsoide es plano a lo
        largo de a (aᵀQa = ‖Lᵀa‖² en el piso de precisión); el estado
        conserva centro y forma en ese caso

    Raises:
        ConditioningError si Q deja de ser definida positiva
    """
    k = state.dimension
    a = cut.normal
    if state.factor is None:
        state.shape, state.factor = _factorize(state.shape, state.iteration)
    L = state.factor

    p = L.T @ a
    aQa = float(p @ p)
    if aQa <= _FLAT_FLOOR * float(a @ a) * float(np.trace(state.shape)):
        logger.log_debug(f"ellipsoid flat along cut normal at iteration {state.iteration} (aᵀQa = {aQa})")
        return None
    u = p / math.sqrt(aQa)
    g = L @ u

    if k == 1:
        center = state.center - g / 2.0
        factor = L / 2.0
    else:
        beta = 2.0 / (k + 1.0)
        gamma = 1.0 - math.sqrt(1.0 - beta)
        center = state.center - g / (k + 1.0)
        factor = math.sqrt(k * k / (k * k - 1.0)) * (L - gamma * np.outer(g, u))

    shape = factor @ factor.T
    shape = (shape + shape.T) / 2.0
    sign, log_abs = np.linalg.slogdet(factor)
    if sign == 0 or not math.isfinite(log_abs):
        shape, factor = _factorize(shape, state.iteration)
        log_abs = float(np.sum(np.log(np.diag(factor))))

    state.center = center
    state.shape = shape
    state.factor = factor
    state.iteration += 1
    return float(2.0 * log_abs)


def _classify(oracles: Sequence[Callable], x: np.ndarray):
    """
    ("feasible", None), ("cut", CutRequest) o ("uncertified", None)

    Un hiperplano certificado de cualquier oráculo tiene prioridad sobre
    un resultado no certificado.
    """
    uncertified = False
    for oracle in oracles:
        result = oracle(x)
        if result.kind == "hyperplane":
            return "cut", CutRequest(kind="feasibility", normal=result.normal, offset=result.offset)
        if result.kind == "uncertified":
            uncertified = True
    return ("uncertified", None) if uncertified else ("feasible", None)


def ellipsoid_minimize(
    oracles: Sequence[Callable],
    objective: Objective,
    subgradient: Subgradient,
    radius: float,
    eps: float = DEFAULT_EPS,
    dimension: Optional[int] = None,
    feasible_hint=None,
    max_iterations: Optional[int] = None,
    record_history: bool = False,
) -> SolveReport:
    """
    Minimiza una función convexa sobre la intersección de los cuerpos de los oráculos

    En cada iteración: si el centro viola algún oráculo se corta con su
    hiperplano; si no, se corta con el subgradiente del objetivo en el
    centro. La cota inferior f(c) − √(gᵀQg) de los centros factibles
    certifica el gap.

    Args:
        oracles: Oráculos de separación (q → SeparationResult)
        objective: Función convexa f
        subgradient: Subgradiente de f
        radius: Radio R de una bola centrada en el origen que contiene la región
        eps: Gap objetivo
        dimension: Dimensión k (se infiere de feasible_hint si se omite)
        feasible_hint: Punto candidato evaluado antes de iterar
        max_iterations: Límite (por defecto 2k(k+1)·ln(R/eps) + 1000)
        record_history: Guardar log det(Q) de cada iteración

    Returns:
        SolveReport con termination tolerance_met, volume_exhausted o iteration_cap

    Raises:
        InfeasibleError si nunca se encuentra un punto factible (certificate = elipsoide final)
        ConditioningError si Q pierde definitud positiva
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    if not radius > 0:
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    if dimension is None:
        if feasible_hint is None:
            raise InvalidArgumentError("dimension is required when no feasible_hint is given")
        dimension = int(np.asarray(feasible_hint).shape[0])

    k = dimension
    cap = max_iterations if max_iterations is not None else iteration_cap(k, radius, eps)
    state = EllipsoidState(center=np.zeros(k), shape=(radius ** 2) * np.eye(k))
    log_det = 2.0 * k * math.log(radius)
    volume_floor = 2.0 * k * math.log(eps)

    best_point, best_value = None, math.inf
    lower_bound = -math.inf
    history: List[float] = [log_det] if record_history else []
    feasibility_cuts = objective_cuts = uncertified = 0

    if feasible_hint is not None:
        hint = np.asarray(feasible_hint, dtype=float)
        if _classify(oracles, hint)[0] == "feasible":
            best_point, best_value = hint.copy(), float(objective(hint))

    def report(termination: str) -> SolveReport:
        return SolveReport(
            best_point=best_point,
            best_value=best_value if best_point is not None else None,
            certified_gap=max(best_value - lower_bound, 0.0) if best_point is not None else math.inf,
            iterations=state.iteration,
            termination=termination,
            feasibility_cuts=feasibility_cuts,
            objective_cuts=objective_cuts,
            uncertified_centers=uncertified,
            log_det_history=history,
        )

    termination = "iteration_cap"
    while state.iteration < cap:
        center = state.center
        status, cut = _classify(oracles, center)

        if status == "cut":
            feasibility_cuts += 1
        else:
            value = float(objective(center))
            if status == "uncertified":
                # Corta por el objetivo pero no es candidato a mejor punto
                uncertified += 1
            elif value < best_value:
                best_point, best_value = center.copy(), value
            g = np.asarray(subgradient(center), dtype=float)
            spread = math.sqrt(max(float(g @ state.shape @ g), 0.0))
            lower_bound = max(lower_bound, value - spread)

            if best_value - lower_bound <= eps:
                termination = "tolerance_met"
                break
            if spread == 0.0:
                termination = "tolerance_met" if status == "feasible" else "volume_exhausted"
                break
            cut = CutRequest(kind="objective", normal=g, offset=float(g @ center))
            objective_cuts += 1

        log_det = central_cut(state, cut)
        if log_det is None:
            termination = "volume_exhausted"
            break
        if record_history:
            history.append(log_det)
        if log_det <= volume_floor:
            termination = "volume_exhausted"
            break

    logger.log_debug(
        f"ellipsoid: k={k} iterations={state.iteration} termination={termination} "
        f"best={best_value} lower_bound={lower_bound} cuts={feasibility_cuts}/{objective_cuts} uncertified={uncertified}"
    )

    if best_point is None:
        raise InfeasibleError(
            f"no feasible point found after {state.iteration} iterations ({termination})",
            certificate=state,
            report=report(termination),
        )
    return report(termination)


def ellipsoid_max_coordinate(
    Z1: Zonotope,
    Z2: Zonotope,
    coord: int,
    eps: float = DEFAULT_EPS,
    feasible_hint=None,
    separation_tol: float = 1e-9,
    separation_gap_tol: float = 1e-10,
    max_iterations: Optional[int] = None,
    record_history: bool = False,
) -> SolveReport:
    """
    Maximiza x[coord] sobre Z₁ ∩ Z₂

    La separación de la intersección se resuelve por separado para cada
    zonotopo. El origen pertenece a todo zonotopo y es el punto inicial
    por defecto.

    Returns:
        SolveReport cuyo best_value es el máximo de la coordenada
    """
    if Z1.k != Z2.k:
        raise InvalidArgumentError("both zonotopes must live in the same dimension")
    k = Z1.k
    if not 0 <= coord < k:
        raise InvalidArgumentError(f"coordinate {coord} out of range for dimension {k}")

    oracles: List[SeparationOracle] = [
        make_separation_oracle(zonotope_lmo(Z), tol=separation_tol,
                               gap_tol=separation_gap_tol, early_exit=True)
        for Z in (Z1, Z2)
    ]
    unit = np.zeros(k)
    unit[coord] = 1.0
    hint = np.zeros(k) if feasible_hint is None else np.asarray(feasible_hint, dtype=float)

    solved = ellipsoid_minimize(
        oracles,
        objective=lambda x: -float(x[coord]),
        subgradient=lambda x: -unit,
        radius=initial_radius(Z1, Z2, intersection=True),
        eps=eps,
        dimension=k,
        feasible_hint=hint,
        max_iterations=max_iterations,
        record_history=record_history,
    )
    return solved.model_copy(update={"best_value": -solved.best_value})
