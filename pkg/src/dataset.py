"""
Datasets etiquetados
Parseo csv/svmlight, lifting (x, 1) a zonotopos y mapa polinomial explícito
"""

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from pathlib import Path
from typing import List, Tuple, Sequence

import numpy as np
from pydantic import ValidationError

from .errors import DatasetParseError, DatasetValidationError, InvalidArgumentError
from .logger import logger
from .models import LabeledDataset, LiftedVector, FeatureMapSpec


FORMATS = ("csv", "svmlight")


def make_dataset(points, labels) -> LabeledDataset:
    """
    Construye un LabeledDataset traduciendo errores de validación

    Args:
        points: Matriz n×d (o lista de listas)
        labels: Etiquetas ±1

    Returns:
        LabeledDataset validado

    Raises:
        DatasetValidationError si se viola algún invariante
    """
    try:
        return LabeledDataset(points=points, labels=labels)
    except ValidationError as e:
        messages = "; ".join(err.get("msg", "") for err in e.errors())
        raise DatasetValidationError(f"invalid dataset: {messages}") from e
    except ValueError as e:
        raise DatasetValidationError(f"invalid dataset: {e}") from e


# === Lifting (x, 1) ===

def lift_point(x: Sequence[float]) -> LiftedVector:
    """Retorna v = (x, 1)"""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 1:
        raise InvalidArgumentError("a point must be a vector of dimension d >= 1")
    return LiftedVector(v=np.append(x, 1.0))


def lift_dataset(ds: LabeledDataset) -> Tuple[np.ndarray, np.ndarray]:
    """
    Levanta cada x_i a v_i = (x_i, 1)

    Args:
        ds: Dataset etiquetado

    Returns:
        Tupla (V₊, V₋): una fila por vector levantado de cada clase,
        en el orden de ds.i_plus / ds.i_minus
    """
    lifted = np.hstack([ds.points, np.ones((ds.n, 1))])
    return lifted[ds.i_plus], lifted[ds.i_minus]


def as_lifted_vectors(rows: np.ndarray) -> List[LiftedVector]:
    """Vista de las filas de lift_dataset como LiftedVector validados"""
    return [LiftedVector(v=row) for row in rows]


# === Mapa polinomial ===

@lru_cache(maxsize=64)
def monomial_exponents(d: int, p: int) -> Tuple[Tuple[int, ...], ...]:
    """
    Monomios de grado p en orden lexicográfico graduado

    Cada monomio es el multiconjunto de índices de coordenadas
    (por ejemplo (0, 0) = v₁², (0, 1) = v₁v₂ para d = 2, p = 2).
    """
    return tuple(combinations_with_replacement(range(d), p))


@lru_cache(maxsize=64)
def _monomial_table(d: int, p: int) -> Tuple[np.ndarray, np.ndarray]:
    monomials = monomial_exponents(d, p)
    index = np.array(monomials, dtype=np.int64).reshape(len(monomials), p)
    scales = np.empty(len(monomials))
    for row, monomial in enumerate(monomials):
        counts = np.bincount(np.asarray(monomial), minlength=d)
        multinomial = math.factorial(p) // math.prod(math.factorial(int(c)) for c in counts)
        scales[row] = math.sqrt(multinomial)
    index.flags.writeable = False
    scales.flags.writeable = False
    return index, scales


def feature_map_spec(d: int, p: int) -> FeatureMapSpec:
    """Retorna el FeatureMapSpec (con d' = C(d+p-1, p)) o InvalidArgumentError"""
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise InvalidArgumentError(f"polynomial degree must be a positive integer, got {p}")
    return FeatureMapSpec(degree=int(p), input_dim=int(d))


def polynomial_feature_map(x: Sequence[float], p: int) -> np.ndarray:
    """
    Φ(x) tal que Φ(v)·Φ(w) = (v·w)^p

    Cada coordenada es un monomio de grado p escalado por la raíz de
    su coeficiente multinomial.

    Args:
        x: Vector en R^d
        p: Grado (>= 1)

    Returns:
        Vector en R^{d'} con d' = C(d+p-1, p)
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 1:
        raise InvalidArgumentError("polynomial_feature_map expects a vector of dimension d >= 1")
    return feature_map_matrix(x[None, :], p)[0]


def feature_map_matrix(X: np.ndarray, p: int) -> np.ndarray:
    """Versión por lotes de polynomial_feature_map (una fila por punto)"""
    X = np.asarray(X, dtype=float)
    spec = feature_map_spec(X.shape[1], p)
    index, scales = _monomial_table(spec.input_dim, spec.degree)
    return np.prod(X[:, index], axis=2) * scales


def lift_features(ds: LabeledDataset, p: int) -> LabeledDataset:
    """Aplica Φ de grado p a todos los puntos conservando las etiquetas"""
    lifted = feature_map_matrix(ds.points, p)
    logger.log_debug(f"Lifted dataset from d={ds.d} to d'={lifted.shape[1]} (p={p})")
    return make_dataset(lifted, ds.labels)


# === Parseo ===

def _parse_label(token: str, line_no: int) -> int:
    try:
        value = float(token)
    except ValueError:
        raise DatasetParseError(f"invalid label '{token}'", line_no)
    if value == 1.0:
        return 1
    if value == -1.0:
        return -1
    raise DatasetParseError(f"label must be +1 or -1, got '{token}'", line_no)


def _parse_float(token: str, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DatasetParseError(f"invalid number '{token}'", line_no)
    if not math.isfinite(value):
        raise DatasetParseError(f"non-finite value '{token}'", line_no)
    return value


def _data_lines(text: str):
    """Itera (número de línea 1-based, contenido) ignorando vacías y comentarios '#'"""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        yield line_no, line


def _parse_csv(text: str) -> Tuple[List[List[float]], List[int]]:
    rows, labels = [], []
    dimension = None

    for line_no, line in _data_lines(text):
        fields = [field.strip() for field in line.split(',')]
        if len(fields) < 2:
            raise DatasetParseError("expected 'label,x1,...,xd'", line_no)

        label = _parse_label(fields[0], line_no)
        values = [_parse_float(field, line_no) for field in fields[1:]]

        if dimension is None:
            dimension = len(values)
        elif len(values) != dimension:
            raise DatasetParseError(
                f"expected {dimension} coordinates, found {len(values)}", line_no
            )

        rows.append(values)
        labels.append(label)

    return rows, labels


def _parse_svmlight(text: str) -> Tuple[List[List[float]], List[int]]:
    sparse_rows, labels = [], []
    dimension = 0
    first_line = None

    for line_no, line in _data_lines(text):
        # Comentario al final de la fila
        line = line.split('#', 1)[0].strip()
        tokens = line.split()
        if not tokens:
            raise DatasetParseError("missing label", line_no)

        label = _parse_label(tokens[0], line_no)
        if first_line is None:
            first_line = line_no
        entries = {}

        for token in tokens[1:]:
            key, sep, value = token.partition(':')
            if not sep:
                raise DatasetParseError(f"expected 'index:value', got '{token}'", line_no)
            if key == 'qid':
                continue
            try:
                index = int(key)
            except ValueError:
                raise DatasetParseError(f"invalid feature index '{key}'", line_no)
            if index < 1:
                raise DatasetParseError(f"feature indices are 1-based, got {index}", line_no)
            if index in entries:
                raise DatasetParseError(f"duplicate feature index {index}", line_no)
            entries[index] = _parse_float(value, line_no)
            dimension = max(dimension, index)

        sparse_rows.append(entries)
        labels.append(label)

    if sparse_rows and dimension == 0:
        raise DatasetParseError("no feature indices found", first_line)

    rows = []
    for entries in sparse_rows:
        dense = [0.0] * dimension
        for index, value in entries.items():
            dense[index - 1] = value
        rows.append(dense)

    return rows, labels


def parse_dataset(text: str, fmt: str = "csv") -> LabeledDataset:
    """
    Parsea un dataset desde texto

    Args:
        text: Contenido (UTF-8, líneas '\\n' o '\\r\\n', comentarios '#')
        fmt: 'csv' ("label,x1,...,xd") o 'svmlight' ("label idx:val ...")

    Returns:
        LabeledDataset validado

    Raises:
        DatasetParseError con el número de línea (1-based) si una fila es inválida
        DatasetValidationError si el dataset viola un invariante (una sola clase...)
    """
    if fmt == "csv":
        rows, labels = _parse_csv(text)
    elif fmt == "svmlight":
        rows, labels = _parse_svmlight(text)
    else:
        raise InvalidArgumentError(f"unknown dataset format '{fmt}' (expected one of {FORMATS})")

    if not rows:
        raise DatasetValidationError("dataset is empty")

    ds = make_dataset(np.array(rows, dtype=float), labels)
    logger.log_debug(f"Parsed {fmt} dataset: n={ds.n}, d={ds.d}, classes={ds.class_counts}")
    return ds


def read_dataset(path: Path, fmt: str = "csv") -> LabeledDataset:
    """Lee y parsea un dataset desde archivo"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise InvalidArgumentError(f"cannot read dataset {path}: {e}") from e
    return parse_dataset(text, fmt)


def _format_label(label: int) -> str:
    return "+1" if label == 1 else "-1"


def serialize_dataset(ds: LabeledDataset, fmt: str = "csv") -> str:
    """
    Serializa un dataset (inverso de parse_dataset)

    Los valores usan la representación round-trip de Python. En svmlight
    siempre se escribe el índice d para conservar la dimensión.
    """
    lines = []

    if fmt == "csv":
        for x, label in zip(ds.points, ds.labels):
            lines.append(",".join([_format_label(label)] + [repr(float(v)) for v in x]))
    elif fmt == "svmlight":
        for x, label in zip(ds.points, ds.labels):
            tokens = [_format_label(label)]
            for index, value in enumerate(x, start=1):
                if value != 0.0 or index == ds.d:
                    tokens.append(f"{index}:{repr(float(value))}")
            lines.append(" ".join(tokens))
    else:
        raise InvalidArgumentError(f"unknown dataset format '{fmt}' (expected one of {FORMATS})")

    return "\n".join(lines) + "\n"


def write_dataset(path: Path, ds: LabeledDataset, fmt: str = "csv"):
    """Escribe un dataset serializado a archivo"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(serialize_dataset(ds, fmt))
