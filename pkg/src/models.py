"""
Modelos Pydantic para validación de datos
Tipos de dominio (datasets, zonotopos, envolventes reducidas, resultados de solvers)
y configuración de la CLI
"""

from enum import Enum
from pathlib import Path
from typing import Optional, Dict, List, Literal, Any, Tuple
from datetime import datetime

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.special import comb

from .errors import InfeasibleError


def _frozen_array(value: Any, ndim: int, dtype=float) -> np.ndarray:
    """Convierte a ndarray de solo lectura con la dimensión pedida"""
    arr = np.array(value, dtype=dtype, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-D array, got shape {arr.shape}")
    if dtype is float and not np.all(np.isfinite(arr)):
        raise ValueError("array contains non-finite values")
    arr.flags.writeable = False
    return arr


class ArrayModel(BaseModel):
    """Base para modelos inmutables que guardan arrays numpy"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# === dataset_core ===

class LabeledDataset(ArrayModel):
    """Vectores de entrenamiento x_i ∈ R^d con etiquetas y_i ∈ {+1, -1}"""
    points: np.ndarray
    labels: np.ndarray

    @field_validator('points', mode='before')
    @classmethod
    def validate_points(cls, v):
        arr = _frozen_array(v, 2)
        if arr.shape[1] < 1:
            raise ValueError("points must have dimension d >= 1")
        return arr

    @field_validator('labels', mode='before')
    @classmethod
    def validate_labels(cls, v):
        raw = np.array(v, dtype=float)
        if raw.ndim != 1:
            raise ValueError("labels must be a 1-D sequence")
        if not np.all(np.isin(raw, (1.0, -1.0))):
            raise ValueError("labels must be +1 or -1")
        arr = raw.astype(np.int8)
        arr.flags.writeable = False
        return arr

    @model_validator(mode='after')
    def validate_partition(self):
        n = self.points.shape[0]
        if n != self.labels.shape[0]:
            raise ValueError(f"{n} points but {self.labels.shape[0]} labels")
        if n < 2:
            raise ValueError("a dataset needs at least 2 points")
        if not np.any(self.labels == 1) or not np.any(self.labels == -1):
            raise ValueError("both classes must be nonempty")
        return self

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])

    @property
    def i_plus(self) -> np.ndarray:
        """Índices (0-based) de I₊"""
        return np.flatnonzero(self.labels == 1)

    @property
    def i_minus(self) -> np.ndarray:
        """Índices (0-based) de I₋"""
        return np.flatnonzero(self.labels == -1)

    @property
    def positive_points(self) -> np.ndarray:
        return self.points[self.labels == 1]

    @property
    def negative_points(self) -> np.ndarray:
        return self.points[self.labels == -1]

    @property
    def class_counts(self) -> Dict[str, int]:
        return {"+1": int(np.sum(self.labels == 1)), "-1": int(np.sum(self.labels == -1))}

    @property
    def is_balanced(self) -> bool:
        counts = self.class_counts
        return counts["+1"] == counts["-1"]


class LiftedVector(ArrayModel):
    """v_i = (x_i, 1) ∈ R^{d+1}"""
    v: np.ndarray

    @field_validator('v', mode='before')
    @classmethod
    def validate_last_coordinate(cls, v):
        arr = _frozen_array(v, 1)
        if arr.shape[0] < 2:
            raise ValueError("a lifted vector has dimension d+1 >= 2")
        if arr[-1] != 1.0:
            raise ValueError("last coordinate of a lifted vector must be exactly 1")
        return arr


class FeatureMapSpec(BaseModel):
    """Parámetros del mapa polinomial explícito Φ: R^d → R^{d'}"""
    model_config = ConfigDict(frozen=True)

    degree: int = Field(ge=1)
    input_dim: int = Field(ge=1)
    lifted_dim: Optional[int] = None

    @model_validator(mode='before')
    @classmethod
    def fill_lifted_dim(cls, data):
        if isinstance(data, dict) and data.get('lifted_dim') is None:
            degree, input_dim = data.get('degree'), data.get('input_dim')
            if isinstance(degree, int) and isinstance(input_dim, int) and degree >= 1 and input_dim >= 1:
                data = {**data, 'lifted_dim': int(comb(input_dim + degree - 1, degree, exact=True))}
        return data

    @model_validator(mode='after')
    def validate_lifted_dim(self):
        expected = int(comb(self.input_dim + self.degree - 1, self.degree, exact=True))
        if self.lifted_dim != expected:
            raise ValueError(f"lifted_dim must be C(d+p-1, p) = {expected}")
        return self


# === lmo ===

class Zonotope(ArrayModel):
    """Suma de Minkowski de segmentos {α v_i | 0 ≤ α ≤ u_i}"""
    generators: np.ndarray
    upper_bounds: np.ndarray

    @field_validator('generators', mode='before')
    @classmethod
    def validate_generators(cls, v):
        arr = _frozen_array(v, 2)
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("a zonotope needs m >= 1 generators of dimension k >= 1")
        return arr

    @field_validator('upper_bounds', mode='before')
    @classmethod
    def validate_upper_bounds(cls, v):
        arr = _frozen_array(v, 1)
        if np.any(arr < 0):
            raise ValueError("upper bounds must be nonnegative")
        return arr

    @model_validator(mode='after')
    def validate_shapes(self):
        if self.generators.shape[0] != self.upper_bounds.shape[0]:
            raise ValueError("one upper bound per generator is required")
        return self

    @property
    def m(self) -> int:
        return int(self.generators.shape[0])

    @property
    def k(self) -> int:
        return int(self.generators.shape[1])


class ReducedHull(ArrayModel):
    """
    Envolvente convexa reducida H_μ de los puntos de una clase

    Un μ con μ·m < 1 deja el politopo vacío: la construcción falla
    con InfeasibleError en lugar de propagar un conjunto vacío.
    """
    points: np.ndarray
    mu: float

    @field_validator('points', mode='before')
    @classmethod
    def validate_points(cls, v):
        arr = _frozen_array(v, 2)
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("a reduced hull needs at least one point of dimension >= 1")
        return arr

    @field_validator('mu')
    @classmethod
    def validate_mu(cls, v):
        if not np.isfinite(v) or v <= 0 or v > 1 + 1e-12:
            raise ValueError(f"mu must lie in (0, 1], got {v}")
        return float(min(v, 1.0))

    @model_validator(mode='after')
    def validate_nonempty(self):
        m = self.points.shape[0]
        if self.mu * m < 1 - 1e-12:
            raise InfeasibleError(f"reduced hull is empty: mu={self.mu} < 1/m={1.0 / m}")
        return self

    @property
    def m(self) -> int:
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])


class HullVertexWitness(ArrayModel):
    """Vértice extremo de H_μ junto con los pesos α que lo generan"""
    weights: np.ndarray
    point: np.ndarray
    value: float
    mu: float
    transitional_index: Optional[int] = None

    @field_validator('weights', 'point', mode='before')
    @classmethod
    def validate_vectors(cls, v):
        return _frozen_array(v, 1)

    @model_validator(mode='after')
    def validate_weights(self):
        if np.any(self.weights < 0) or np.any(self.weights > self.mu):
            raise ValueError("witness weights must satisfy 0 <= alpha_i <= mu")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-12:
            raise ValueError("witness weights must sum to 1")
        return self


class DifferenceWitness(ArrayModel):
    """Punto v₊ − v₋ de P con los testigos de ambas envolventes"""
    point: np.ndarray
    value: float
    plus: HullVertexWitness
    minus: HullVertexWitness


class ClassTransition(ArrayModel):
    """Estructura de transición de una clase a lo largo de la normal w"""
    label: Literal[1, -1]
    order: np.ndarray
    transition: float
    zero: List[int]
    transitional: List[int]
    capped: List[int]

    @field_validator('order', mode='before')
    @classmethod
    def validate_order(cls, v):
        return _frozen_array(v, 1, dtype=np.int64)


class TransitionReport(BaseModel):
    """Descomposición {cero, transicional, saturado} por clase"""
    model_config = ConfigDict(frozen=True)

    plus: ClassTransition
    minus: ClassTransition

    @property
    def support_candidates(self) -> List[int]:
        return sorted(self.plus.transitional + self.plus.capped
                      + self.minus.transitional + self.minus.capped)


# === nearest_point ===

class NearestPointResult(ArrayModel):
    """Punto más cercano v* del cuerpo convexo al objetivo q"""
    point: np.ndarray
    squared_norm: float = Field(ge=0)
    weights: np.ndarray
    duality_gap: float = Field(ge=0)
    iterations: int = Field(ge=0)
    active_vertices: int = 0

    @field_validator('point', 'weights', mode='before')
    @classmethod
    def validate_vectors(cls, v):
        return _frozen_array(v, 1)


class SeparationResult(ArrayModel):
    """Inside, un hiperplano a·z ≤ β válido para el cuerpo con a·q > β, o uncertified"""
    kind: Literal["inside", "hyperplane", "uncertified"]
    normal: Optional[np.ndarray] = None
    offset: Optional[float] = None
    separation_margin: float = 0.0
    distance: float = 0.0
    iterations: int = 0

    @field_validator('normal', mode='before')
    @classmethod
    def validate_normal(cls, v):
        if v is None:
            return None
        return _frozen_array(v, 1)

    @model_validator(mode='after')
    def validate_hyperplane(self):
        if self.kind == "hyperplane":
            if self.normal is None or self.offset is None:
                raise ValueError("a hyperplane result needs normal and offset")
            if not self.separation_margin > 0:
                raise ValueError("a separating hyperplane must have a positive margin")
        return self

    @property
    def inside(self) -> bool:
        return self.kind == "inside"


# === ellipsoid ===

class EllipsoidState(BaseModel):
    """Elipsoide de localización {x | (x−c)ᵀ Q⁻¹ (x−c) ≤ 1}"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    center: np.ndarray
    shape: np.ndarray
    iteration: int = 0
    # Factor de Cholesky L (Q = L Lᵀ) del último corte
    factor: Optional[np.ndarray] = None

    @model_validator(mode='after')
    def validate_shape(self):
        k = self.center.shape[0]
        if self.shape.shape != (k, k):
            raise ValueError(f"shape matrix must be {k}x{k}")
        return self

    @property
    def dimension(self) -> int:
        return int(self.center.shape[0])

    def is_symmetric(self, rtol: float = 1e-10) -> bool:
        scale = max(float(np.max(np.abs(self.shape))), np.finfo(float).tiny)
        return bool(np.max(np.abs(self.shape - self.shape.T)) <= rtol * scale)

    def is_positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.shape)
            return True
        except np.linalg.LinAlgError:
            return False

    def log_det(self) -> float:
        sign, value = np.linalg.slogdet(self.shape)
        return float(value) if sign > 0 else float('-inf')


class CutRequest(ArrayModel):
    """Corte a·x ≤ β aplicado por el motor (factibilidad u objetivo)"""
    kind: Literal["feasibility", "objective"]
    normal: np.ndarray
    offset: float

    @field_validator('normal', mode='before')
    @classmethod
    def validate_normal(cls, v):
        arr = _frozen_array(v, 1)
        if not np.linalg.norm(arr) > 0:
            raise ValueError("cut normal must be nonzero")
        return arr


class SolveReport(ArrayModel):
    """Resultado del motor de elipsoides"""
    best_point: Optional[np.ndarray] = None
    best_value: Optional[float] = None
    certified_gap: float = float('inf')
    iterations: int = 0
    termination: Literal["tolerance_met", "volume_exhausted", "iteration_cap"]
    feasibility_cuts: int = 0
    objective_cuts: int = 0
    uncertified_centers: int = 0
    log_det_history: List[float] = Field(default_factory=list)


# === trainer ===

class BiasStrategy(str, Enum):
    """Cómo se fija el umbral b dentro de la familia de planos paralelos"""
    HALFWAY = "halfway"
    MIN_ERRORS_LINE_SEARCH = "min_errors_line_search"


class TrainedClassifier(ArrayModel):
    """Clasificador soft-margin recuperado de la solución dual"""
    w: np.ndarray
    b_plus: float
    b_minus: float
    b: float
    alpha: np.ndarray
    support_indices: List[int]
    margin: float = Field(ge=0)
    xi: np.ndarray
    mu: float
    bias_strategy: BiasStrategy = BiasStrategy.HALFWAY
    transition_plus: Optional[float] = None
    transition_minus: Optional[float] = None
    squared_distance: float = 0.0
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @field_validator('w', 'alpha', 'xi', mode='before')
    @classmethod
    def validate_vectors(cls, v):
        return _frozen_array(v, 1)

    @property
    def w_norm(self) -> float:
        return float(np.linalg.norm(self.w))

    @property
    def is_degenerate(self) -> bool:
        return not self.w_norm > 0


class KktCondition(BaseModel):
    """Resultado de una condición KKT"""
    passed: bool
    max_violation: float
    detail: str = ""


class KktReport(BaseModel):
    """Verificación de condiciones KKT de un clasificador entrenado"""
    tol: float
    conditions: Dict[str, KktCondition]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def failed(self) -> List[str]:
        return [name for name, c in self.conditions.items() if not c.passed]


# === separability ===

class SeparabilityResult(ArrayModel):
    """μ de margen cero, su normalización μ* y el testigo (pesos α y punto común)"""
    mu_zero: float
    mu_star: Optional[float] = None
    weight_sum: float
    alpha: np.ndarray
    common_point: np.ndarray
    separable_flag: bool
    hard_margin: Optional[float] = None
    iterations: int = 0
    termination: str = ""

    @field_validator('alpha', 'common_point', mode='before')
    @classmethod
    def validate_vectors(cls, v):
        return _frozen_array(v, 1)


# === reference_oracle ===

class OracleConfig(BaseModel):
    """Límites del oráculo de fuerza bruta"""
    model_config = ConfigDict(frozen=True)

    max_n: int = Field(default=8, ge=1, le=10)
    max_d: int = Field(default=3, ge=1)
    grid_resolution: int = Field(default=64, ge=0)


# === cli ===

class RunConfig(BaseModel):
    """Configuración de una ejecución de la CLI"""
    command: Literal["train", "separability", "lift", "check", "sweep"]
    input_path: Optional[Path] = None
    format: Literal["csv", "svmlight"] = "csv"
    mu: Optional[float] = None
    degree: Optional[int] = None
    bias: BiasStrategy = BiasStrategy.HALFWAY
    eps: float = Field(default=1e-7, gt=0)
    output: Optional[Path] = None
    plot: Optional[Path] = None
    solver: Literal["auto", "ellipsoid", "nearest_point"] = "auto"
    points: int = Field(default=10, ge=2)
    jobs: int = Field(default=1, ge=1)
    instances: int = Field(default=50, ge=1)
    seed: Optional[int] = None

    @model_validator(mode='after')
    def validate_command_options(self):
        if (self.mu is not None) != (self.command == "train"):
            raise ValueError("--mu is required for train and only accepted there")
        if self.command == "lift" and self.degree is None:
            raise ValueError("--degree is required for lift")
        if self.degree is not None and self.command not in ("lift", "train"):
            raise ValueError("--degree is only accepted by lift and train")
        if self.degree is not None and self.degree < 1:
            raise ValueError("--degree must be a positive integer")
        if self.command != "check" and self.input_path is None:
            raise ValueError(f"{self.command} needs an input dataset")
        if self.plot is not None and self.command != "train":
            raise ValueError("--plot is only accepted by train")
        return self


class InputSummary(BaseModel):
    n: int
    d: int
    class_counts: Dict[str, int]


class Diagnostics(BaseModel):
    iterations: int = 0
    solver: str = ""
    gap: Optional[float] = None


class Report(BaseModel):
    """Documento JSON que emite la CLI"""
    command: str
    input_summary: Optional[InputSummary] = None
    result: Dict[str, Any]
    diagnostics: Diagnostics
    version: str


class RunHistoryEntry(BaseModel):
    """Registro de una ejecución de la CLI"""
    id: int
    command: str
    timestamp: datetime = Field(default_factory=datetime.now)
    success: bool
    duration_seconds: float = 0.0
    input_path: Optional[str] = None
    summary: Dict[str, Any] = Field(default_factory=dict)
    error_message: Optional[str] = None


class GlobalConfig(BaseModel):
    """Configuración global de ZonoSVM"""
    version: str = "1.0.0"
    base_path: str = "~/zonosvm"
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    default_bias: BiasStrategy = BiasStrategy.HALFWAY
    default_format: Literal["csv", "svmlight"] = "csv"
    eps: float = Field(default=1e-7, gt=0)
    nearest_point_tol: float = Field(default=1e-9, gt=0)
    separation_gap_tol: float = Field(default=1e-10, gt=0)
    max_fw_iterations: int = Field(default=1_000_000, ge=1)
    ellipsoid_max_n: int = Field(default=2000, ge=2)
    sweep_points: int = Field(default=10, ge=2)
    sweep_jobs: int = Field(default=1, ge=1)
    plot_directions: int = Field(default=360, ge=8)
    oracle_max_n: int = Field(default=8, ge=1, le=10)
    oracle_max_d: int = Field(default=3, ge=1)
    check_instances: int = Field(default=50, ge=1)
    record_history: bool = True

    @field_validator('base_path')
    @classmethod
    def expand_path(cls, v):
        """Expande ~ en el path"""
        return str(Path(v).expanduser())


# Validadores helpers

def validate_global_config(config_dict: Dict) -> GlobalConfig:
    """
    Valida y retorna un objeto GlobalConfig

    Args:
        config_dict: Dict con configuración

    Returns:
        GlobalConfig validado

    Raises:
        ValidationError si la configuración es inválida
    """
    return GlobalConfig(**config_dict)
