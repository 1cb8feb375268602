"""
Validaciones de reportes y configuraciones de ejecución
Comprueba los reportes JSON contra el modelo Report y el schema de docs/
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from .errors import InvalidArgumentError
from .logger import logger
from .models import Report, RunConfig
from .utils import load_json_file


SCHEMA_PATH = Path(__file__).parent.parent / "docs" / "report.schema.json"

_JSON_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "boolean": bool,
    "null": type(None),
}


def load_report_schema(schema_path: Optional[Path] = None) -> Dict[str, Any]:
    """Carga el schema del reporte"""
    schema = load_json_file(schema_path or SCHEMA_PATH)
    if schema is None:
        raise InvalidArgumentError(f"report schema not found at {schema_path or SCHEMA_PATH}")
    return schema


def _matches_type(value: Any, expected) -> bool:
    names = expected if isinstance(expected, list) else [expected]
    for name in names:
        if name == "integer":
            if isinstance(value, int) and not isinstance(value, bool):
                return True
        elif name == "number":
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                return True
        elif isinstance(value, _JSON_TYPES[name]):
            return True
    return False


def check_against_schema(value: Any, schema: Dict[str, Any], path: str = "$") -> List[str]:
    """
    Verifica type/required/enum/minimum/properties del schema

    Returns:
        Lista de errores (vacía si el documento es válido)
    """
    errors = []

    if "type" in schema and not _matches_type(value, schema["type"]):
        return [f"{path}: expected {schema['type']}, got {type(value).__name__}"]

    if "enum" in schema and value not in schema["enum"]:
        errors.append(f"{path}: {value!r} not in {schema['enum']}")

    if "minimum" in schema and isinstance(value, (int, float)) and value < schema["minimum"]:
        errors.append(f"{path}: {value} < minimum {schema['minimum']}")

    if isinstance(value, dict):
        for key in schema.get("required", []):
            if key not in value:
                errors.append(f"{path}: missing required key '{key}'")
        for key, subschema in schema.get("properties", {}).items():
            if key in value:
                errors.extend(check_against_schema(value[key], subschema, f"{path}.{key}"))

    return errors


def _non_finite_numbers(value: Any, path: str = "$") -> List[str]:
    if isinstance(value, float) and not math.isfinite(value):
        return [f"{path}: non-finite number"]
    if isinstance(value, dict):
        return [e for k, v in value.items() for e in _non_finite_numbers(v, f"{path}.{k}")]
    if isinstance(value, list):
        return [e for i, v in enumerate(value) for e in _non_finite_numbers(v, f"{path}[{i}]")]
    return []


def validate_report(document: Dict[str, Any], schema_path: Optional[Path] = None) -> Tuple[bool, List[str]]:
    """
    Valida un reporte de la CLI

    El documento debe pasar por json (sin NaN ni infinitos), construir
    un Report de pydantic y cumplir el schema de docs/.

    Args:
        document: Reporte ya convertido a tipos JSON
        schema_path: Schema alternativo

    Returns:
        Tupla (is_valid, errors)
    """
    errors = _non_finite_numbers(document)

    try:
        round_tripped = json.loads(json.dumps(document, allow_nan=False))
    except (TypeError, ValueError) as e:
        return False, errors + [f"not serializable as JSON: {e}"]

    try:
        Report(**round_tripped)
    except ValidationError as e:
        errors.extend(f"$.{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())

    errors.extend(check_against_schema(round_tripped, load_report_schema(schema_path)))

    if errors:
        logger.log_debug(f"Report validation failed: {errors}")
    return not errors, errors


def validate_run_config(**options) -> RunConfig:
    """
    Construye el RunConfig de una ejecución

    Raises:
        InvalidArgumentError con el primer mensaje de validación
    """
    try:
        return RunConfig(**options)
    except ValidationError as e:
        first = e.errors()[0]
        message = first['msg'].removeprefix("Value error, ")
        raise InvalidArgumentError(message)
