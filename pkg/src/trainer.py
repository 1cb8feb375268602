"""
Entrenamiento soft-margin con μ fijo
Resuelve el dual (punto más cercano al origen en P = H₊ ⊖ H₋) y recupera
el slab primal (w, b₊, b₋), los pesos α, los vectores soporte y las holguras
"""

import math
from typing import Literal, Optional

import numpy as np
from scipy.optimize import brentq

from .ellipsoid import ellipsoid_minimize
from .errors import (
    ConditioningError, InfeasibleError, InvalidArgumentError, NonConvergenceError,
    UndefinedClassifierError,
)
from .lmo import difference_lmo, initial_radius, make_hull, transition_decompose, hull_extreme
from .logger import logger, log_function
from .models import (
    BiasStrategy, KktCondition, KktReport, LabeledDataset, SolveReport, TrainedClassifier,
    TransitionReport,
)
from .nearest_point import NearestPointState, make_separation_oracle, nearest_point


Solver = Literal["auto", "ellipsoid", "nearest_point"]

DEFAULT_EPS = 1e-7
DEFAULT_TOL = 1e-9
SUPPORT_TOL_FACTOR = 1e-7
SLACK_TOL = 1e-6
# Con más puntos, "auto" resuelve directamente con nearest_point
ELLIPSOID_MAX_N = 2000


def mu_range(ds: LabeledDataset):
    """Rango factible [1/min(|I₊|,|I₋|), 1] de μ"""
    return 1.0 / min(ds.class_counts.values()), 1.0


def check_mu(ds: LabeledDataset, mu: float) -> float:
    """Valida μ contra el tamaño de ambas clases"""
    low, high = mu_range(ds)
    if isinstance(mu, bool) or not isinstance(mu, (int, float, np.integer, np.floating)) or not math.isfinite(mu):
        raise InvalidArgumentError(f"mu must be a finite real, got {mu}")
    if mu * min(ds.class_counts.values()) < 1 - 1e-12 or mu > high + 1e-12:
        raise InvalidArgumentError(f"mu must lie in [{low}, {high}], got {mu}")
    return float(min(mu, 1.0))


def _capped_simplex(values: np.ndarray, total: float, cap: float) -> Optional[np.ndarray]:
    """Proyección euclídea sobre {0 ≤ a ≤ cap, Σa = total}"""
    size = values.shape[0]
    if total < -1e-12 or total > cap * size + 1e-12:
        return None
    if total <= 0:
        return np.zeros(size)
    if total >= cap * size:
        return np.full(size, cap)

    def excess(shift):
        return float(np.sum(np.clip(values + shift, 0.0, cap))) - total

    shift = brentq(excess, -float(np.max(values)), cap - float(np.min(values)), xtol=1e-16)
    return np.clip(values + shift, 0.0, cap)


def snap_weights(alpha: np.ndarray, transitions: TransitionReport, mu: float) -> Optional[np.ndarray]:
    """
    Lleva α a la estructura de transición

    Índices cero → 0, saturados → μ, transicionales → proyección de sus
    pesos para que cada clase sume 1. None si la estructura es inconsistente.
    """
    snapped = alpha.copy()
    for cls in (transitions.plus, transitions.minus):
        snapped[cls.zero] = 0.0
        snapped[cls.capped] = mu
        needed = 1.0 - mu * len(cls.capped)
        if not cls.transitional:
            if abs(needed) > 1e-9:
                return None
            continue
        projected = _capped_simplex(alpha[cls.transitional], needed, mu)
        if projected is None:
            return None
        snapped[cls.transitional] = projected
    return snapped


def reconstruct_w(ds: LabeledDataset, alpha: np.ndarray) -> np.ndarray:
    """w = Σ_{I₊} αᵢxᵢ − Σ_{I₋} αᵢxᵢ"""
    return ds.points.T @ (alpha * ds.labels)


def compute_slacks(ds: LabeledDataset, w: np.ndarray, b_plus: float, b_minus: float) -> np.ndarray:
    """ξᵢ = max(0, b₊ − w·xᵢ) en I₊ y max(0, w·xᵢ − b₋) en I₋"""
    proj = ds.points @ w
    return np.where(ds.labels == 1, np.maximum(0.0, b_plus - proj), np.maximum(0.0, proj - b_minus))


def _scatter_weights(ds: LabeledDataset, weights: np.ndarray) -> np.ndarray:
    """Pesos concatenados [α₊, α₋] del LMO de P → orden del dataset"""
    alpha = np.zeros(ds.n)
    m_plus = ds.i_plus.shape[0]
    alpha[ds.i_plus] = weights[:m_plus]
    alpha[ds.i_minus] = weights[m_plus:]
    return alpha


def _degenerate_classifier(ds, alpha, mu, squared_distance, diagnostics) -> TrainedClassifier:
    support_tol = SUPPORT_TOL_FACTOR * mu
    return TrainedClassifier(
        w=np.zeros(ds.d),
        b_plus=0.0,
        b_minus=0.0,
        b=0.0,
        alpha=alpha,
        support_indices=np.flatnonzero(alpha > support_tol).tolist(),
        margin=0.0,
        xi=np.zeros(ds.n),
        mu=mu,
        squared_distance=squared_distance,
        diagnostics=diagnostics,
    )


def _classifier_from_alpha(ds, alpha, mu, diagnostics) -> TrainedClassifier:
    w = reconstruct_w(ds, alpha)
    proj = ds.points @ w
    b_plus = float(alpha[ds.i_plus] @ proj[ds.i_plus])
    b_minus = float(alpha[ds.i_minus] @ proj[ds.i_minus])
    w_norm = float(np.linalg.norm(w))
    transitions = transition_decompose(ds, mu, w)
    support_tol = SUPPORT_TOL_FACTOR * mu

    return TrainedClassifier(
        w=w,
        b_plus=b_plus,
        b_minus=b_minus,
        b=(b_plus + b_minus) / 2.0,
        alpha=alpha,
        support_indices=np.flatnonzero(alpha > support_tol).tolist(),
        margin=max(0.0, (b_plus - b_minus) / w_norm),
        xi=compute_slacks(ds, w, b_plus, b_minus),
        mu=mu,
        bias_strategy=BiasStrategy.HALFWAY,
        transition_plus=transitions.plus.transition,
        transition_minus=transitions.minus.transition,
        squared_distance=float(w @ w),
        diagnostics=diagnostics,
    )


def _cross_check(solved: SolveReport, polished_value: float, eps: float, diagnostics: dict):
    """
    Compara el valor del elipsoide con el del pulido de nearest_point

    El valor del elipsoide es una cota superior del óptimo a menos de su
    gap certificado; una diferencia mayor que max(1e-6, 10·eps) + gap se
    marca como desacuerdo.
    """
    gap = solved.best_value - polished_value
    diagnostics["cross_check_gap"] = abs(gap)
    allowed = max(1e-6, 10.0 * eps)
    if gap < -allowed or gap > allowed + solved.certified_gap:
        diagnostics["solver_disagreement"] = True
        logger.log_warning(
            f"Ellipsoid value {solved.best_value} and nearest_point value {polished_value} "
            f"disagree by {gap} (certified gap {solved.certified_gap})"
        )


@log_function
def train(
    ds: LabeledDataset,
    mu: float,
    bias: BiasStrategy = BiasStrategy.HALFWAY,
    eps: float = DEFAULT_EPS,
    solver: Solver = "auto",
    tol: float = DEFAULT_TOL,
    max_iterations: int = 1_000_000,
    separation_gap_tol: float = 1e-10,
    ellipsoid_max_n: int = ELLIPSOID_MAX_N,
    record_history: bool = False,
) -> TrainedClassifier:
    """
    Entrena el clasificador soft-margin con μ fijo

    Minimiza ‖v‖² sobre P = H₊μ ⊖ H₋μ con el motor de elipsoides y
    termina con nearest_point arrancado desde el mejor punto del
    elipsoide, que da los pesos α y sirve de verificación cruzada. Si
    ‖v*‖ ≤ eps las envolventes reducidas se intersectan y se reporta
    margen 0 con w = 0.

    Args:
        ds: Dataset etiquetado
        mu: Tope de pesos, 1/min(|I₊|,|I₋|) ≤ μ ≤ 1
        bias: Estrategia del umbral b
        eps: Gap objetivo del elipsoide y umbral de margen cero
        solver: 'ellipsoid', 'nearest_point' o 'auto' (elipsoide hasta ellipsoid_max_n puntos)
        tol: Gap de Frank–Wolfe del pulido final
        max_iterations: Límite de iteraciones de Frank–Wolfe
        separation_gap_tol: Gap de cada resolución del oráculo de separación
        ellipsoid_max_n: Umbral de 'auto'
        record_history: Guardar log det(Q) por iteración en diagnostics

    Returns:
        TrainedClassifier

    Raises:
        InvalidArgumentError si μ está fuera de rango
        NonConvergenceError si el pulido final no converge
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    if solver not in ("auto", "ellipsoid", "nearest_point"):
        raise InvalidArgumentError(f"unknown solver '{solver}'")
    mu = check_mu(ds, mu)
    bias = BiasStrategy(bias)

    H_plus = make_hull(ds.positive_points, mu)
    H_minus = make_hull(ds.negative_points, mu)
    lmo = difference_lmo(H_plus, H_minus)
    origin = np.zeros(ds.d)

    use_ellipsoid = solver == "ellipsoid" or (solver == "auto" and ds.n <= ellipsoid_max_n)
    diagnostics = {"solver": "ellipsoid" if use_ellipsoid else "nearest_point", "eps": eps}
    state = NearestPointState()
    iterations = 0
    solved = None

    if use_ellipsoid:
        oracle = make_separation_oracle(lmo, tol=tol, gap_tol=separation_gap_tol,
                                        early_exit=True, max_iterations=max_iterations)
        hint = ds.positive_points.mean(axis=0) - ds.negative_points.mean(axis=0)
        try:
            solved = ellipsoid_minimize(
                [oracle],
                objective=lambda v: float(v @ v),
                subgradient=lambda v: 2.0 * v,
                radius=initial_radius(H_plus, H_minus),
                eps=eps,
                dimension=ds.d,
                feasible_hint=hint,
                record_history=record_history,
            )
            iterations += solved.iterations
            diagnostics.update(
                ellipsoid_termination=solved.termination,
                ellipsoid_iterations=solved.iterations,
                ellipsoid_value=solved.best_value,
                ellipsoid_gap=solved.certified_gap,
            )
            if record_history:
                diagnostics["log_det_history"] = solved.log_det_history
            # Conjunto activo que reproduce el punto del elipsoide
            seeded = nearest_point(lmo, solved.best_point, tol=tol, max_iterations=max_iterations, state=state)
            iterations += seeded.iterations
        except (NonConvergenceError, ConditioningError, InfeasibleError) as e:
            logger.log_warning(f"Ellipsoid phase failed ({e}); falling back to nearest_point")
            diagnostics["ellipsoid_error"] = str(e)
            solved = None
            state = NearestPointState()

    try:
        polished = nearest_point(lmo, origin, tol=tol, max_iterations=max_iterations, state=state)
        if np.sqrt(polished.squared_norm) <= eps:
            # Reintento con tolerancia más fina antes de declarar margen cero
            polished = nearest_point(lmo, origin, tol=tol * 1e-3, max_iterations=max_iterations, state=state)
    except NonConvergenceError as e:
        raise NonConvergenceError(f"training did not converge at mu={mu}: {e}", best=e.best)

    iterations += polished.iterations
    diagnostics.update(iterations=iterations, gap=polished.duality_gap,
                       nearest_point_value=polished.squared_norm)
    if solved is not None:
        _cross_check(solved, polished.squared_norm, eps, diagnostics)

    alpha = _scatter_weights(ds, polished.weights)

    if np.sqrt(polished.squared_norm) <= eps:
        logger.log_info(f"Reduced hulls intersect at mu={mu}: margin 0")
        diagnostics["degenerate"] = True
        return _degenerate_classifier(ds, alpha, mu, polished.squared_norm, diagnostics)

    snapped = snap_weights(alpha, transition_decompose(ds, mu, polished.point), mu)
    if snapped is not None:
        snapped_norm = float(np.sum(reconstruct_w(ds, snapped) ** 2))
        if snapped_norm - polished.squared_norm <= 10 * max(tol, 1e-9 * polished.squared_norm):
            alpha = snapped
        else:
            diagnostics["snap_rejected"] = snapped_norm - polished.squared_norm

    clf = _classifier_from_alpha(ds, alpha, mu, diagnostics)

    if bias == BiasStrategy.MIN_ERRORS_LINE_SEARCH:
        clf = clf.model_copy(update={
            "b": line_search_bias(clf, ds),
            "bias_strategy": BiasStrategy.MIN_ERRORS_LINE_SEARCH,
        })

    logger.log_info(
        f"Trained mu={mu}: margin={clf.margin} |SV|={len(clf.support_indices)} "
        f"solver={diagnostics['solver']} iterations={iterations}"
    )
    return clf


def decision_value(clf: TrainedClassifier, x) -> float:
    """w·x − b; la clase es el signo"""
    if clf.is_degenerate:
        raise UndefinedClassifierError("classifier has w = 0; no decision rule is defined")
    return float(clf.w @ np.asarray(x, dtype=float) - clf.b)


def predict(clf: TrainedClassifier, X) -> np.ndarray:
    """Etiquetas ±1 (un valor de decisión 0 se asigna a -1)"""
    if clf.is_degenerate:
        raise UndefinedClassifierError("classifier has w = 0; no decision rule is defined")
    values = np.asarray(X, dtype=float) @ clf.w - clf.b
    return np.where(values > 0, 1, -1)


def _error_counts(pos_proj: np.ndarray, neg_proj: np.ndarray, biases: np.ndarray) -> np.ndarray:
    """Errores por umbral; un punto exactamente sobre b cuenta como error"""
    pos_sorted = np.sort(pos_proj)
    neg_sorted = np.sort(neg_proj)
    pos_errors = np.searchsorted(pos_sorted, biases, side='right')
    neg_errors = neg_sorted.shape[0] - np.searchsorted(neg_sorted, biases, side='left')
    return pos_errors + neg_errors


def training_errors(clf: TrainedClassifier, ds: LabeledDataset, bias: Optional[float] = None) -> int:
    """Número de puntos con yᵢ(w·xᵢ − b) ≤ 0"""
    proj = ds.points @ clf.w
    b = clf.b if bias is None else bias
    return int(_error_counts(proj[ds.i_plus], proj[ds.i_minus], np.array([b]))[0])


def line_search_bias(clf: TrainedClassifier, ds: LabeledDataset) -> float:
    """
    Umbral b que minimiza los errores de entrenamiento

    Candidatos: las proyecciones w·xᵢ, los puntos medios entre valores
    distintos consecutivos, el umbral halfway y los extremos ±1. Los
    empates se resuelven hacia el umbral halfway.
    """
    if clf.is_degenerate:
        raise UndefinedClassifierError("line search needs w != 0")
    halfway = (clf.b_plus + clf.b_minus) / 2.0
    proj = ds.points @ clf.w
    if np.ptp(proj) == 0:
        return halfway

    values = np.unique(proj)
    candidates = np.concatenate([
        values,
        (values[:-1] + values[1:]) / 2.0,
        [halfway, values[0] - 1.0, values[-1] + 1.0],
    ])
    errors = _error_counts(proj[ds.i_plus], proj[ds.i_minus], candidates)
    best = np.flatnonzero(errors == errors.min())
    # Empates: más cercano a halfway, luego el menor
    chosen = min(best, key=lambda i: (abs(candidates[i] - halfway), candidates[i]))
    return float(candidates[chosen])


def kkt_check(clf: TrainedClassifier, ds: LabeledDataset, tol: float = 1e-5) -> KktReport:
    """
    Verifica las condiciones KKT del clasificador

    Condiciones: factibilidad dual, reconstrucción de w, factibilidad del
    slab con holguras, soporte de ambas envolventes reducidas, holgura
    complementaria y la regla "todo error es vector soporte".
    """
    mu = clf.mu
    alpha = clf.alpha
    conditions = {}

    # Factibilidad dual
    box = max(float(np.max(-alpha)), float(np.max(alpha - mu)), 0.0)
    sums = max(abs(float(np.sum(alpha[ds.i_plus])) - 1.0), abs(float(np.sum(alpha[ds.i_minus])) - 1.0))
    violation = max(box, sums)
    conditions["dual_feasibility"] = KktCondition(
        passed=violation <= tol, max_violation=violation,
        detail="0 <= alpha <= mu and each class sums to 1",
    )

    # Reconstrucción de w
    residual = float(np.max(np.abs(reconstruct_w(ds, alpha) - clf.w)))
    recon_tol = tol
    if clf.is_degenerate:
        recon_tol = max(tol, float(clf.diagnostics.get("eps", tol)))
    conditions["w_reconstruction"] = KktCondition(
        passed=residual <= recon_tol, max_violation=residual,
        detail="w = sum alpha_i x_i (I+) - sum alpha_i x_i (I-)",
    )

    proj = ds.points @ clf.w
    scale = max(1.0, float(np.max(np.abs(proj))) if proj.size else 1.0)

    # Factibilidad primal del slab
    primal = np.where(ds.labels == 1, clf.b_plus - clf.xi - proj, proj - clf.b_minus - clf.xi)
    violation = max(float(np.max(primal)), float(np.max(-clf.xi)), 0.0)
    conditions["primal_feasibility"] = KktCondition(
        passed=violation <= tol * scale, max_violation=violation,
        detail="w.x_i >= b+ - xi_i on I+, w.x_i <= b- + xi_i on I-",
    )

    if clf.is_degenerate:
        conditions["slab_support"] = KktCondition(passed=True, max_violation=0.0, detail="vacuous (w = 0)")
        conditions["complementary_slackness"] = KktCondition(passed=True, max_violation=0.0, detail="vacuous (w = 0)")
    else:
        # b₊ = min_{H₊} w·v y b₋ = max_{H₋} w·v
        H_plus = make_hull(ds.positive_points, mu)
        H_minus = make_hull(ds.negative_points, mu)
        low_plus = -hull_extreme(H_plus, -clf.w).value
        high_minus = hull_extreme(H_minus, clf.w).value
        violation = max(abs(clf.b_plus - low_plus), abs(clf.b_minus - high_minus))
        conditions["slab_support"] = KktCondition(
            passed=violation <= tol * scale, max_violation=violation,
            detail="b+ and b- support both reduced hulls",
        )

        transitions = transition_decompose(ds, mu, clf.w, clf.transition_plus, clf.transition_minus)
        t_plus, t_minus = transitions.plus.transition, transitions.minus.transition
        support_tol = SUPPORT_TOL_FACTOR * mu
        partial = (alpha > support_tol) & (alpha < mu - tol)
        plane = np.where(ds.labels == 1, t_plus, t_minus)
        off_plane = np.where(partial, np.abs(proj - plane), 0.0)
        slack_violation = np.where(clf.xi > SLACK_TOL, np.abs(mu - alpha), 0.0)
        violation = max(float(np.max(off_plane)), float(np.max(slack_violation)))
        conditions["complementary_slackness"] = KktCondition(
            passed=float(np.max(off_plane)) <= tol * scale and float(np.max(slack_violation)) <= tol,
            max_violation=violation,
            detail="0 < alpha_i < mu => on its transition plane; xi_i > 0 => alpha_i = mu",
        )

    errors = set(np.flatnonzero(clf.xi > SLACK_TOL).tolist())
    missing = sorted(errors - set(clf.support_indices))
    conditions["support_errors"] = KktCondition(
        passed=not missing, max_violation=float(len(missing)),
        detail="every training error is a support vector" + (f" (missing {missing})" if missing else ""),
    )

    return KktReport(tol=tol, conditions=conditions)
