"""
Oráculo de referencia por fuerza bruta
Solvers exhaustivos para instancias diminutas, independientes de lmo y
nearest_point, usados como verdad de referencia en las verificaciones
"""

from itertools import combinations, product
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidArgumentError, OracleLimitError
from .models import LabeledDataset, OracleConfig, ReducedHull, Zonotope


Body = Union[Zonotope, ReducedHull, Tuple[ReducedHull, ReducedHull]]

_TOL = 1e-9


def _guard(m: int, d: int, config: OracleConfig):
    if m > config.max_n:
        raise OracleLimitError(f"instance has {m} points; the reference oracle accepts at most {config.max_n}")
    if d > config.max_d:
        raise OracleLimitError(f"instance has dimension {d}; the reference oracle accepts at most {config.max_d}")


def _integral_inverse(mu: float) -> Optional[int]:
    """k si μ = 1/k con k entero, None en otro caso"""
    k = int(round(1.0 / mu))
    return k if k >= 1 and abs(k * mu - 1.0) <= _TOL else None


def _strictly_separable(inside: np.ndarray, outside: np.ndarray, rng: np.random.Generator, samples: int) -> bool:
    """¿Existe w con w·x > w·y para todo x en inside, y en outside?"""
    if outside.shape[0] == 0:
        return True
    d = inside.shape[1]

    # Muestreo de direcciones primero
    if samples > 0:
        directions = rng.standard_normal((samples, d))
        gaps = (inside @ directions.T).min(axis=0) - (outside @ directions.T).max(axis=0)
        if np.any(gaps > _TOL):
            return True

    # LP exacto: max t con (x − y)·w ≥ t, −1 ≤ w ≤ 1, t ≤ 1
    differences = (inside[:, None, :] - outside[None, :, :]).reshape(-1, d)
    A_ub = np.hstack([-differences, np.ones((differences.shape[0], 1))])
    b_ub = np.zeros(differences.shape[0])
    cost = np.zeros(d + 1)
    cost[-1] = -1.0
    bounds = [(-1.0, 1.0)] * d + [(None, 1.0)]
    solution = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    return bool(solution.status == 0 and -solution.fun > _TOL)


def enumerate_hull_vertices(
    H: ReducedHull,
    config: OracleConfig = OracleConfig(),
    seed: int = 0,
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Vértices de H_μ con μ = 1/k

    Cada subconjunto de k puntos estrictamente separable del resto
    define un vértice: el promedio del subconjunto.

    Returns:
        Lista de (vértice, pesos)

    Raises:
        InvalidArgumentError si 1/μ no es entero
        OracleLimitError si la instancia excede los límites
    """
    _guard(H.m, H.d, config)
    k = _integral_inverse(H.mu)
    if k is None:
        raise InvalidArgumentError(f"vertex enumeration needs mu = 1/k, got {H.mu}")

    rng = np.random.default_rng(seed)
    vertices = []
    everything = set(range(H.m))
    for subset in combinations(range(H.m), k):
        rest = sorted(everything.difference(subset))
        if _strictly_separable(H.points[list(subset)], H.points[rest], rng, config.grid_resolution):
            weights = np.zeros(H.m)
            weights[list(subset)] = 1.0 / k
            vertices.append((H.points[list(subset)].mean(axis=0), weights))
    return vertices


def _hull_max(H: ReducedHull, w: np.ndarray, config: OracleConfig) -> float:
    if _integral_inverse(H.mu) is not None:
        return max(float(vertex @ w) for vertex, _ in enumerate_hull_vertices(H, config))

    # μ ≠ 1/k: LP sobre los pesos
    solution = linprog(
        -(H.points @ w),
        A_eq=np.ones((1, H.m)), b_eq=[1.0],
        bounds=[(0.0, H.mu)] * H.m,
        method="highs",
    )
    if solution.status != 0:
        raise InvalidArgumentError(f"weight LP failed: {solution.message}")
    return float(-solution.fun)


def brute_lmo(body: Body, w, config: OracleConfig = OracleConfig()) -> float:
    """
    max w·z sobre el cuerpo por enumeración

    Zonotopo: los 2^m patrones de segmentos. Envolvente reducida: sus
    vértices (μ = 1/k) o el LP de pesos. Par (H₊, H₋): el politopo
    diferencia.
    """
    w = np.asarray(w, dtype=float)

    if isinstance(body, Zonotope):
        _guard(body.m, body.k, config)
        contributions = body.upper_bounds * (body.generators @ w)
        return max(float(np.dot(pattern, contributions)) for pattern in product((0.0, 1.0), repeat=body.m))

    if isinstance(body, ReducedHull):
        _guard(body.m, body.d, config)
        return _hull_max(body, w, config)

    if isinstance(body, tuple) and len(body) == 2:
        H_plus, H_minus = body
        return brute_lmo(H_plus, w, config) + brute_lmo(H_minus, -w, config)

    raise InvalidArgumentError(f"unsupported body {type(body).__name__}")


def _class_patterns(m: int, mu: float, max_free: int):
    """Asignaciones {0, μ, libre} cuya suma puede llegar a 1"""
    patterns = []
    for pattern in product((0, 1, 2), repeat=m):
        capped = [i for i, p in enumerate(pattern) if p == 1]
        free = [i for i, p in enumerate(pattern) if p == 2]
        remainder = 1.0 - mu * len(capped)
        if len(free) > max_free:
            continue
        if not free and abs(remainder) > _TOL:
            continue
        if free and not (-_TOL <= remainder <= mu * len(free) + _TOL):
            continue
        patterns.append((capped, free, remainder))
    return patterns


def _solve_free(base: np.ndarray, columns: np.ndarray, groups: np.ndarray, totals: Sequence[float]):
    """
    min ‖base + columns·β‖² con Σ_{grupo g} β = totals[g]

    Returns:
        β (o None si el sistema KKT es inconsistente)
    """
    f = columns.shape[1]
    if f == 0:
        return np.zeros(0)
    present = sorted(set(groups.tolist()))
    E = np.array([[1.0 if groups[j] == g else 0.0 for j in range(f)] for g in present])
    r = np.array([totals[g] for g in present])

    gram = columns.T @ columns
    kkt = np.block([[2.0 * gram, E.T], [E, np.zeros((len(present), len(present)))]])
    rhs = np.concatenate([-2.0 * columns.T @ base, r])
    solution, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    if np.max(np.abs(kkt @ solution - rhs)) > 1e-8 * max(1.0, float(np.max(np.abs(rhs)))):
        return None
    return solution[:f]


def brute_nearest(ds: LabeledDataset, mu: float, config: OracleConfig = OracleConfig()) -> Tuple[float, np.ndarray]:
    """
    Resuelve min ‖Σ_{I₊}αᵢxᵢ − Σ_{I₋}αᵢxᵢ‖² por enumeración de conjuntos activos

    Cada αᵢ se asigna a {0, μ, libre} (≤ d+2 libres por clase); con el
    patrón fijo se resuelve el problema de mínimos cuadrados con
    restricciones de igualdad y se conserva la mejor solución factible.

    Returns:
        Tupla (distancia al cuadrado, α en el orden del dataset)
    """
    _guard(ds.n, ds.d, config)
    counts = ds.class_counts
    if mu * min(counts.values()) < 1 - _TOL or mu > 1 + _TOL:
        raise InvalidArgumentError(f"mu={mu} outside the feasible range")
    mu = min(mu, 1.0)

    X_plus, X_minus = ds.positive_points, ds.negative_points
    max_free = ds.d + 2
    best_value, best_alpha = np.inf, None

    for capped_p, free_p, rest_p in _class_patterns(X_plus.shape[0], mu, max_free):
        fixed_p = mu * X_plus[capped_p].sum(axis=0)
        for capped_m, free_m, rest_m in _class_patterns(X_minus.shape[0], mu, max_free):
            if len(free_p) + len(free_m) > max_free:
                continue
            base = fixed_p - mu * X_minus[capped_m].sum(axis=0)
            columns = np.hstack([X_plus[free_p].T, -X_minus[free_m].T]).reshape(ds.d, -1)
            groups = np.array([0] * len(free_p) + [1] * len(free_m), dtype=int)
            beta = _solve_free(base, columns, groups, (rest_p, rest_m))
            if beta is None or np.any(beta < -_TOL) or np.any(beta > mu + _TOL):
                continue
            beta = np.clip(beta, 0.0, mu)
            value = float(np.sum((base + columns @ beta) ** 2))
            if value < best_value - 1e-15:
                alpha_p = np.zeros(X_plus.shape[0])
                alpha_m = np.zeros(X_minus.shape[0])
                alpha_p[capped_p] = mu
                alpha_m[capped_m] = mu
                alpha_p[free_p] = beta[:len(free_p)]
                alpha_m[free_m] = beta[len(free_p):]
                best_value, best_alpha = value, (alpha_p, alpha_m)

    if best_alpha is None:
        raise InvalidArgumentError("no feasible active set found")

    alpha = np.zeros(ds.n)
    alpha[ds.i_plus], alpha[ds.i_minus] = best_alpha
    return best_value, alpha


def brute_zero_margin_mu(ds: LabeledDataset, config: OracleConfig = OracleConfig()) -> Tuple[float, float, np.ndarray]:
    """
    μ de margen cero por programación lineal

    max Σ_{I₊}βᵢ sujeto a Σ_{I₊}βᵢvᵢ = Σ_{I₋}βᵢvᵢ, 0 ≤ β ≤ 1, con vᵢ = (xᵢ, 1).

    Returns:
        Tupla (mu_zero, suma óptima de pesos, β en el orden del dataset)
    """
    _guard(ds.n, ds.d, config)
    lifted = np.hstack([ds.points, np.ones((ds.n, 1))])
    signed = (lifted * ds.labels[:, None]).T
    cost = -(ds.labels == 1).astype(float)

    solution = linprog(cost, A_eq=signed, b_eq=np.zeros(ds.d + 1),
                       bounds=[(0.0, 1.0)] * ds.n, method="highs")
    if solution.status != 0:
        raise InvalidArgumentError(f"separability LP failed: {solution.message}")

    weight_sum = float(-solution.fun)
    low = max(1.0 / len(ds.i_plus), 1.0 / len(ds.i_minus))
    mu_zero = 1.0 if weight_sum <= 1.0 + _TOL else float(np.clip(1.0 / weight_sum, low, 1.0))
    return mu_zero, weight_sum, np.asarray(solution.x)


def random_instance(
    rng: np.random.Generator,
    config: OracleConfig = OracleConfig(),
    min_n: int = 4,
    spread: float = 1.5,
) -> LabeledDataset:
    """
    Dataset aleatorio dentro de los límites del oráculo

    Puntos gaussianos; la clase positiva se desplaza un vector aleatorio
    de norma ~spread para variar el grado de solapamiento.
    """
    n = int(rng.integers(min(min_n, config.max_n), config.max_n + 1))
    d = int(rng.integers(1, config.max_d + 1))
    n_plus = int(rng.integers(1, n))
    labels = np.array([1] * n_plus + [-1] * (n - n_plus))
    points = rng.standard_normal((n, d))
    points[:n_plus] += spread * rng.standard_normal(d)
    order = rng.permutation(n)
    return LabeledDataset(points=points[order], labels=labels[order])


def random_hull_mu(rng: np.random.Generator, m: int, integral: bool = True) -> float:
    """μ factible para m puntos: 1/k con k ≤ m, o uniforme en [1/m, 1]"""
    if integral:
        return 1.0 / int(rng.integers(1, m + 1))
    return float(rng.uniform(1.0 / m, 1.0))
