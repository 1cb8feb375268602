"""
Punto más cercano sobre cuerpos convexos dados por un LMO
Frank–Wolfe con pasos away y búsqueda lineal exacta, y el oráculo de separación
que usa el motor de elipsoides
"""

from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import InvalidArgumentError, NonConvergenceError
from .logger import logger
from .lmo import LmoHandle
from .models import NearestPointResult, SeparationResult


DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITERATIONS = 1_000_000
# Cada cuántas iteraciones se recompone x desde el conjunto activo
_RESYNC_EVERY = 200


class NearestPointState:
    """
    Conjunto activo de Frank–Wolfe: vértices del LMO con sus coeficientes

    Se puede reutilizar entre resoluciones sobre el mismo cuerpo
    (con otro objetivo q) como arranque en caliente.
    """

    def __init__(self):
        self.points: List[np.ndarray] = []
        self.weights: List[np.ndarray] = []
        self.coeffs: List[float] = []
        self.index: Dict[bytes, int] = {}

    def __len__(self) -> int:
        return len(self.points)

    def reset(self, point: np.ndarray, weights: np.ndarray):
        """Deja un único vértice con coeficiente 1"""
        self.points = [point]
        self.weights = [weights]
        self.coeffs = [1.0]
        self.index = {point.tobytes(): 0}

    def add(self, point: np.ndarray, weights: np.ndarray) -> int:
        key = point.tobytes()
        if key in self.index:
            return self.index[key]
        self.points.append(point)
        self.weights.append(weights)
        self.coeffs.append(0.0)
        self.index[key] = len(self.points) - 1
        return self.index[key]

    def remove(self, position: int):
        """Quita un vértice (intercambio con el último)"""
        last = len(self.points) - 1
        del self.index[self.points[position].tobytes()]
        if position != last:
            self.points[position] = self.points[last]
            self.weights[position] = self.weights[last]
            self.coeffs[position] = self.coeffs[last]
            self.index[self.points[position].tobytes()] = position
        self.points.pop()
        self.weights.pop()
        self.coeffs.pop()

    def iterate(self) -> np.ndarray:
        """x = Σ λⱼ sⱼ"""
        return np.asarray(self.coeffs) @ np.vstack(self.points)

    def combined_weights(self) -> np.ndarray:
        """Pesos del testigo: Σ λⱼ αⱼ"""
        return np.asarray(self.coeffs) @ np.vstack(self.weights)

    def normalize(self):
        total = float(np.sum(self.coeffs))
        self.coeffs = [c / total for c in self.coeffs]


def _result(state: NearestPointState, x: np.ndarray, q: np.ndarray, gap: float, iterations: int) -> NearestPointResult:
    diff = x - q
    return NearestPointResult(
        point=x,
        squared_norm=float(diff @ diff),
        weights=state.combined_weights(),
        duality_gap=max(0.0, float(gap)),
        iterations=iterations,
        active_vertices=len(state),
    )


def nearest_point(
    lmo: LmoHandle,
    q,
    tol: float = DEFAULT_TOL,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    state: Optional[NearestPointState] = None,
    early_stop: Optional[Callable[[np.ndarray, np.ndarray], bool]] = None,
) -> NearestPointResult:
    """
    Punto v* del cuerpo más cercano a q

    Frank–Wolfe con pasos away sobre el conjunto activo y búsqueda lineal
    exacta (el objetivo es cuadrático). Termina cuando el gap
    (v−q)·(v−s) ≤ tol, con s el vértice de Frank–Wolfe.

    Args:
        lmo: Oráculo que maximiza una dirección sobre el cuerpo
        q: Punto objetivo
        tol: Tolerancia absoluta del gap de dualidad
        max_iterations: Límite de iteraciones
        state: Conjunto activo para arrancar en caliente (se actualiza)
        early_stop: Callback (x, s) → bool evaluado tras cada llamada al LMO;
            True termina con el iterado actual aunque el gap no haya convergido

    Returns:
        NearestPointResult

    Raises:
        InvalidArgumentError si tol <= 0
        NonConvergenceError si se agota max_iterations (con el mejor iterado)
    """
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")
    q = np.asarray(q, dtype=float)
    state = state if state is not None else NearestPointState()

    if len(state) == 0:
        # Dirección inicial hacia q (o el vector de unos si q = 0)
        start = q if np.any(q != 0) else np.ones_like(q)
        point, weights = lmo(start)
        state.reset(np.asarray(point, dtype=float), np.asarray(weights, dtype=float))

    x = state.iterate()
    gap = float('inf')

    for iteration in range(1, max_iterations + 1):
        if iteration % _RESYNC_EVERY == 0:
            state.normalize()
            x = state.iterate()

        grad = x - q
        if not np.any(grad != 0):
            return _result(state, x, q, 0.0, iteration - 1)

        s, s_weights = lmo(-grad)
        s = np.asarray(s, dtype=float)
        gap = float(grad @ (x - s))

        if early_stop is not None and early_stop(x, s):
            return _result(state, x, q, gap, iteration)
        if gap <= tol:
            return _result(state, x, q, gap, iteration)

        # Vértice away: el del conjunto activo con mayor gradiente
        vertices = np.vstack(state.points)
        away = int(np.argmax(vertices @ grad))
        away_gap = float(grad @ (vertices[away] - x))

        if gap >= away_gap or len(state) == 1 or state.coeffs[away] >= 1.0:
            direction = s - x
            gamma_max = 1.0
            step_is_fw = True
        else:
            direction = x - vertices[away]
            lam = state.coeffs[away]
            gamma_max = lam / (1.0 - lam)
            step_is_fw = False

        norm2 = float(direction @ direction)
        if norm2 == 0.0:
            return _result(state, x, q, gap, iteration)
        gamma = min(max(-float(grad @ direction) / norm2, 0.0), gamma_max)

        if step_is_fw:
            if gamma >= 1.0:
                state.reset(s, np.asarray(s_weights, dtype=float))
                x = s.copy()
                continue
            state.coeffs = [c * (1.0 - gamma) for c in state.coeffs]
            position = state.add(s, np.asarray(s_weights, dtype=float))
            state.coeffs[position] += gamma
        else:
            state.coeffs = [c * (1.0 + gamma) for c in state.coeffs]
            state.coeffs[away] -= gamma
            if gamma >= gamma_max or state.coeffs[away] <= 0.0:
                state.remove(away)
                state.normalize()

        x = x + gamma * direction

    best = _result(state, x, q, gap, max_iterations)
    logger.log_warning(f"nearest_point hit the iteration cap ({max_iterations}), gap={gap}")
    raise NonConvergenceError(
        f"nearest point did not converge in {max_iterations} iterations (gap {gap})", best=best
    )


def verify_hyperplane(lmo: LmoHandle, normal, offset: float, tol: float = DEFAULT_TOL) -> bool:
    """Comprueba con una llamada extra al LMO que a·z ≤ β + tol en todo el cuerpo"""
    normal = np.asarray(normal, dtype=float)
    z, _ = lmo(normal)
    return bool(float(normal @ np.asarray(z)) <= offset + tol)


class SeparationOracle:
    """
    Oráculo de separación construido sobre nearest_point

    Para un punto q retorna Inside si dist(q, cuerpo) ≤ tol y, en otro
    caso, el hiperplano a·z ≤ β con a = (q − v*)/‖q − v*‖ y β el valor
    exacto del soporte en a (una llamada al LMO), de modo que el corte
    es válido aunque v* sea aproximado. Si ningún corte se puede
    certificar a la precisión de Frank–Wolfe retorna "uncertified" con la
    normal aproximada: q no está ni dentro ni separado.
    """

    def __init__(
        self,
        lmo: LmoHandle,
        tol: float = DEFAULT_TOL,
        gap_tol: float = 1e-10,
        early_exit: bool = False,
        max_iterations: int = DEFAULT_MAX_ITERATIONS,
    ):
        if not tol > 0 or not gap_tol > 0:
            raise InvalidArgumentError("separation tolerances must be positive")
        self.lmo = lmo
        self.tol = tol
        self.gap_tol = gap_tol
        self.early_exit = early_exit
        self.max_iterations = max_iterations
        self.state = NearestPointState()
        self.calls = 0
        self.last_result: Optional[NearestPointResult] = None

    def _hyperplane(self, q: np.ndarray, normal: np.ndarray, support: float, distance: float, iterations: int):
        return SeparationResult(
            kind="hyperplane",
            normal=normal,
            offset=support,
            separation_margin=float(normal @ q) - support,
            distance=distance,
            iterations=iterations,
        )

    def __call__(self, q) -> SeparationResult:
        q = np.asarray(q, dtype=float)
        self.calls += 1
        certificate = {}

        def certify(x, s):
            diff = q - x
            distance = float(np.linalg.norm(diff))
            if distance <= self.tol:
                # q ya está a distancia ≤ tol del cuerpo
                return True
            normal = diff / distance
            support = float(normal @ s)
            margin = float(normal @ q) - support
            if margin >= self.tol and margin > certificate.get("margin", 0.0):
                certificate.update(normal=normal, support=support, margin=margin)
            return self.early_exit and "normal" in certificate

        result = nearest_point(
            self.lmo, q, tol=self.gap_tol, max_iterations=self.max_iterations,
            state=self.state, early_stop=certify,
        )
        self.last_result = result
        distance = float(np.sqrt(result.squared_norm))

        if distance <= self.tol:
            return SeparationResult(kind="inside", distance=distance, iterations=result.iterations)

        if not (self.early_exit and "normal" in certificate):
            normal = (q - result.point) / distance
            z, _ = self.lmo(normal)
            support = float(normal @ np.asarray(z))
            if float(normal @ q) - support > 0:
                return self._hyperplane(q, normal, support, distance, result.iterations)

        if "normal" in certificate:
            return self._hyperplane(q, certificate["normal"], certificate["support"],
                                    distance, result.iterations)

        # Separación no certificable a esta precisión: q está a distancia ~√gap
        logger.log_debug(f"Separation at distance {distance} not certifiable")
        approx = (q - result.point) / distance
        return SeparationResult(kind="uncertified", normal=approx, distance=distance,
                                iterations=result.iterations)


def make_separation_oracle(
    lmo: LmoHandle,
    tol: float = DEFAULT_TOL,
    gap_tol: float = 1e-10,
    early_exit: bool = False,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> SeparationOracle:
    """
    Crea un oráculo de separación para el cuerpo del LMO

    Args:
        lmo: Oráculo del cuerpo
        tol: Distancia por debajo de la cual q se considera dentro
        gap_tol: Gap de Frank–Wolfe de cada resolución interna
        early_exit: Terminar en cuanto exista un corte certificado
        max_iterations: Límite de iteraciones por resolución

    Returns:
        SeparationOracle (callable q → SeparationResult)
    """
    return SeparationOracle(lmo, tol=tol, gap_tol=gap_tol, early_exit=early_exit,
                            max_iterations=max_iterations)
