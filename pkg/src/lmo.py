"""
Oráculos de optimización lineal (LMO)
Zonotopos, envolventes convexas reducidas y el politopo diferencia P = H₊ ⊖ H₋
"""

from typing import Callable, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from .errors import InvalidArgumentError
from .models import (
    Zonotope, ReducedHull, HullVertexWitness, DifferenceWitness,
    LabeledDataset, ClassTransition, TransitionReport,
)


# Un LMO recibe una dirección w y retorna (punto extremo, pesos del testigo)
LmoHandle = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]

# Holgura para q = floor(1/μ) cuando 1/μ no es exacto en punto flotante
_FILL_SLACK = 1e-12
# Por debajo de este tamaño se ordena todo el vector de proyecciones
_PARTITION_MIN = 64


def make_hull(points, mu: float) -> ReducedHull:
    """
    Construye una ReducedHull traduciendo errores de validación

    Raises:
        InvalidArgumentError si μ no está en (0, 1]
        InfeasibleError si μ·m < 1
    """
    try:
        return ReducedHull(points=points, mu=mu)
    except ValidationError as e:
        messages = "; ".join(err.get("msg", "") for err in e.errors())
        raise InvalidArgumentError(f"invalid reduced hull: {messages}") from e


def _direction(w, dim: int) -> np.ndarray:
    """Valida una dirección no nula de dimensión dim"""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] != dim:
        raise InvalidArgumentError(f"direction must be a vector of dimension {dim}, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidArgumentError("direction contains non-finite values")
    if not np.linalg.norm(w) > 0:
        raise InvalidArgumentError("direction must be nonzero")
    return w


def _descending_order(proj: np.ndarray, count: Optional[int] = None) -> np.ndarray:
    """
    Índices en orden de proyección decreciente, empates por índice ascendente

    Con count solo se garantiza el prefijo de longitud count.
    """
    m = proj.shape[0]
    if count is None or count >= m or m < _PARTITION_MIN:
        return np.argsort(-proj, kind='stable')

    threshold = -np.partition(-proj, count - 1)[count - 1]
    candidates = np.flatnonzero(proj >= threshold)
    prefix = candidates[np.argsort(-proj[candidates], kind='stable')]
    return prefix[:count]


def fill_count(mu: float, m: int) -> Tuple[int, float]:
    """
    Pesos saturados y remanente del llenado voraz

    Returns:
        Tupla (q, r): q puntos reciben μ y, si r > 0, el siguiente recibe r
    """
    q = min(int(np.floor(1.0 / mu + _FILL_SLACK)), m)
    remainder = max(0.0, 1.0 - q * mu)
    if q == m or remainder <= 1e-15:
        remainder = 0.0
    return q, remainder


def greedy_fill(order: np.ndarray, mu: float, m: int) -> Tuple[np.ndarray, Optional[int]]:
    """
    Asigna μ a los primeros q índices de order y el remanente al siguiente

    Args:
        order: Índices ordenados (al menos q+1)
        mu: Tope común de pesos
        m: Número total de puntos

    Returns:
        Tupla (pesos de longitud m, índice transicional o None)
    """
    q, remainder = fill_count(mu, m)
    weights = np.zeros(m)
    weights[order[:q]] = mu
    transitional = None
    if remainder > 0:
        transitional = int(order[q])
        weights[transitional] = min(remainder, mu)
    return weights, transitional


# === Zonotopos ===

def zonotope_extreme(Z: Zonotope, w) -> Tuple[np.ndarray, np.ndarray]:
    """
    Maximiza w·z sobre el zonotopo Z

    αᵢ = uᵢ si w·vᵢ > 0 y αᵢ = 0 en otro caso (incluido w·vᵢ = 0).

    Args:
        Z: Zonotopo
        w: Dirección no nula en R^k

    Returns:
        Tupla (punto extremo, pesos α)
    """
    w = _direction(w, Z.k)
    proj = Z.generators @ w
    alpha = np.where(proj > 0, Z.upper_bounds, 0.0)
    return alpha @ Z.generators, alpha


# === Envolventes reducidas ===

def hull_extreme(H: ReducedHull, w) -> HullVertexWitness:
    """
    Maximiza w·x sobre la envolvente reducida H_μ

    Llena αᵢ = μ en orden de proyección decreciente hasta que la suma
    llega a 1; el siguiente punto recibe el remanente.

    Args:
        H: Envolvente reducida (no vacía por construcción)
        w: Dirección no nula en R^d

    Returns:
        HullVertexWitness con pesos, punto, valor e índice transicional
    """
    w = _direction(w, H.d)
    proj = H.points @ w
    q, remainder = fill_count(H.mu, H.m)
    order = _descending_order(proj, q + 1 if remainder > 0 else q)
    weights, transitional = greedy_fill(order, H.mu, H.m)

    support = order[:q + (1 if transitional is not None else 0)]
    point = weights[support] @ H.points[support]

    return HullVertexWitness(
        weights=weights,
        point=point,
        value=float(point @ w),
        mu=H.mu,
        transitional_index=transitional,
    )


def difference_extreme(H_plus: ReducedHull, H_minus: ReducedHull, w) -> DifferenceWitness:
    """
    Maximiza w·(v₊ − v₋) sobre P = H₊ ⊖ H₋

    Equivale a maximizar w sobre H₊ y −w sobre H₋ por separado.
    """
    if H_plus.d != H_minus.d:
        raise InvalidArgumentError("both hulls must live in the same dimension")
    plus = hull_extreme(H_plus, w)
    minus = hull_extreme(H_minus, -np.asarray(w, dtype=float))
    return DifferenceWitness(
        point=plus.point - minus.point,
        value=plus.value + minus.value,
        plus=plus,
        minus=minus,
    )


# === Handles para los solvers ===

def zonotope_lmo(Z: Zonotope) -> LmoHandle:
    """LMO del zonotopo (pesos α de longitud m)"""
    def lmo(w):
        return zonotope_extreme(Z, w)
    return lmo


def hull_lmo(H: ReducedHull) -> LmoHandle:
    """LMO de la envolvente reducida (pesos α de longitud m)"""
    def lmo(w):
        witness = hull_extreme(H, w)
        return witness.point, witness.weights
    return lmo


def difference_lmo(H_plus: ReducedHull, H_minus: ReducedHull) -> LmoHandle:
    """LMO de P (pesos concatenados [α₊, α₋])"""
    def lmo(w):
        witness = difference_extreme(H_plus, H_minus, w)
        return witness.point, np.concatenate([witness.plus.weights, witness.minus.weights])
    return lmo


# === Radio inicial ===

def norm_bound(body: Union[Zonotope, ReducedHull]) -> float:
    """
    Cota superior de ‖z‖ sobre el cuerpo

    Zonotopo: Σ uᵢ‖vᵢ‖. Envolvente reducida: el llenado voraz de las
    normas, que acota ‖Σ αᵢ xᵢ‖ ≤ Σ αᵢ ‖xᵢ‖.
    """
    if isinstance(body, Zonotope):
        return float(body.upper_bounds @ np.linalg.norm(body.generators, axis=1))
    if isinstance(body, ReducedHull):
        norms = np.linalg.norm(body.points, axis=1)
        order = np.argsort(-norms, kind='stable')
        weights, _ = greedy_fill(order, body.mu, body.m)
        return float(weights @ norms)
    raise InvalidArgumentError(f"unsupported body type {type(body).__name__}")


def initial_radius(*bodies, intersection: bool = False) -> float:
    """
    Radio R de una bola centrada en el origen que contiene la región

    Args:
        bodies: Cuerpos que componen la región
        intersection: True para Z₁ ∩ Z₂ (máximo de cotas); False para
            sumas/diferencias de Minkowski (suma de cotas)

    Returns:
        Cota + 1
    """
    if not bodies:
        raise InvalidArgumentError("initial_radius needs at least one body")
    bounds = [norm_bound(body) for body in bodies]
    return (max(bounds) if intersection else sum(bounds)) + 1.0


# === Estructura de transición ===

def _class_transition(
    label: int,
    indices: np.ndarray,
    proj: np.ndarray,
    mu: float,
    transition: Optional[float],
) -> ClassTransition:
    m = indices.shape[0]
    # Lado "incorrecto" primero: proyección baja para I₊, alta para I₋
    key = proj if label == 1 else -proj
    order = np.argsort(key, kind='stable')

    if transition is None:
        q, remainder = fill_count(mu, m)
        last = q if remainder > 0 else q - 1
        transition = float(proj[order[last]])

    tol = 1e-7 * (1.0 + abs(transition))
    on_plane = np.abs(proj - transition) <= tol
    wrong_side = (proj < transition) if label == 1 else (proj > transition)

    zero, transitional, capped = [], [], []
    for local, global_index in enumerate(indices.tolist()):
        if on_plane[local]:
            transitional.append(global_index)
        elif wrong_side[local]:
            capped.append(global_index)
        else:
            zero.append(global_index)

    return ClassTransition(
        label=label,
        order=indices[order],
        transition=float(transition),
        zero=zero,
        transitional=transitional,
        capped=capped,
    )


def transition_decompose(
    ds: LabeledDataset,
    mu: float,
    w,
    b_plus: Optional[float] = None,
    b_minus: Optional[float] = None,
) -> TransitionReport:
    """
    Clasifica cada índice como cero, transicional o saturado

    w apunta de la clase negativa a la positiva. Sin b₊/b₋ explícitos, el
    valor de transición de cada clase es la proyección del último punto
    que recibe peso al llenar la clase desde su lado incorrecto.

    Args:
        ds: Dataset etiquetado
        mu: Tope de pesos
        w: Normal candidata (no nula)
        b_plus: Valor de transición de I₊ (opcional)
        b_minus: Valor de transición de I₋ (opcional)

    Returns:
        TransitionReport con una partición por clase
    """
    w = _direction(w, ds.d)
    # Valida μ y la no vacuidad de ambas envolventes
    make_hull(ds.positive_points, mu)
    make_hull(ds.negative_points, mu)
    mu = min(float(mu), 1.0)

    proj = ds.points @ w
    return TransitionReport(
        plus=_class_transition(1, ds.i_plus, proj[ds.i_plus], mu, b_plus),
        minus=_class_transition(-1, ds.i_minus, proj[ds.i_minus], mu, b_minus),
    )
