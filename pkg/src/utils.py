"""
Utilidades generales para ZonoSVM
"""

import os
import json
from pathlib import Path
from typing import Optional, Dict, Any

import numpy as np
from dotenv import load_dotenv


def get_base_path() -> Path:
    """Obtiene el path base de ZonoSVM"""
    return Path.home() / "zonosvm"


def load_json_file(file_path: Path) -> Optional[Any]:
    """Carga un archivo JSON"""
    try:
        if file_path.exists():
            with open(file_path, 'r', encoding='utf-8') as f:
                return json.load(f)
        return None
    except Exception as e:
        raise Exception(f"Error loading JSON from {file_path}: {str(e)}")


def save_json_file(file_path: Path, data: Any, indent: int = 2) -> bool:
    """Guarda un archivo JSON"""
    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=indent, ensure_ascii=False)
        return True
    except Exception as e:
        raise Exception(f"Error saving JSON to {file_path}: {str(e)}")


def load_config() -> Dict[str, Any]:
    """Carga el archivo de configuración global"""
    config_path = get_base_path() / "config.json"
    try:
        config = load_json_file(config_path)
    except Exception:
        config = None

    if config is None:
        # Retornar configuración por defecto
        return get_default_config()

    # Validar con Pydantic si es posible
    try:
        from .models import validate_global_config
        validated = validate_global_config({**get_default_config(), **config})
        return validated.model_dump(mode="json")
    except Exception:
        # Si falla la validación, usar los defaults
        return get_default_config()


def get_default_config() -> Dict[str, Any]:
    """Retorna la configuración por defecto"""
    return {
        "version": "1.0.0",
        "base_path": str(get_base_path()),
        "log_level": "INFO",
        "default_bias": "halfway",
        "default_format": "csv",
        "eps": 1e-7,
        "nearest_point_tol": 1e-9,
        "separation_gap_tol": 1e-10,
        "max_fw_iterations": 1_000_000,
        "ellipsoid_max_n": 2000,
        "sweep_points": 10,
        "sweep_jobs": 1,
        "plot_directions": 360,
        "oracle_max_n": 8,
        "oracle_max_d": 3,
        "check_instances": 50,
        "record_history": True,
    }


def ensure_base_directories():
    """Asegura que existan los directorios base"""
    base_path = get_base_path()
    for directory in (base_path, base_path / "logs"):
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError:
            pass


def get_seed() -> int:
    """
    Semilla para el muestreo interno

    Lee ZONOSVM_SEED (también desde un .env en el directorio actual).
    Un valor no entero se ignora y se usa 0.
    """
    load_dotenv(Path.cwd() / ".env", override=False)
    raw = os.environ.get("ZONOSVM_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def get_rng(seed: Optional[int] = None) -> np.random.Generator:
    """Generador aleatorio determinista (ZONOSVM_SEED si no se da semilla)"""
    return np.random.default_rng(get_seed() if seed is None else seed)


def get_version() -> str:
    """Obtiene la versión de ZonoSVM"""
    from . import __version__
    return __version__


def to_jsonable(value: Any) -> Any:
    """
    Convierte arrays numpy y escalares a tipos JSON nativos

    Los floats conservan la representación round-trip de Python
    (nunca se redondean a menos dígitos de los necesarios).
    """
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def format_float(value: float, digits: int = 6) -> str:
    """Formatea un float solo para mostrar (nunca para calcular)"""
    if value is None:
        return "N/A"
    return f"{value:.{digits}g}"
