"""
Gestión de historial de ejecuciones
Registra y muestra información de las corridas de la CLI
"""

from pathlib import Path
from typing import Optional, List, Dict, Any

from pydantic import ValidationError

from .logger import logger
from .models import RunHistoryEntry
from .utils import get_base_path, load_json_file, save_json_file, to_jsonable


class HistoryManager:
    """Manager para historial de ejecuciones"""

    def __init__(self, base_path: Optional[Path] = None):
        """
        Inicializa el HistoryManager

        Args:
            base_path: Directorio base (usa ~/zonosvm si es None)
        """
        self.base_path = Path(base_path) if base_path is not None else get_base_path()
        self.history_file = self.base_path / "run-history.json"

    def load_history(self) -> List[Dict]:
        """
        Carga el historial de ejecuciones

        Returns:
            Lista de ejecuciones (entradas inválidas se descartan)
        """
        if not self.history_file.exists():
            return []

        try:
            raw = load_json_file(self.history_file) or []
        except Exception:
            return []

        history = []
        for entry in raw:
            try:
                history.append(RunHistoryEntry(**entry).model_dump(mode="json"))
            except (ValidationError, TypeError):
                logger.log_debug(f"Skipping malformed history entry: {entry}")
        return history

    def save_history(self, history: List[Dict]) -> bool:
        """
        Guarda el historial

        Returns:
            True si exitoso
        """
        try:
            return save_json_file(self.history_file, history)
        except Exception as e:
            logger.log_debug(f"Error saving history: {str(e)}")
            return False

    def add_run(
        self,
        command: str,
        success: bool,
        duration: float,
        input_path: Optional[str] = None,
        summary: Optional[Dict[str, Any]] = None,
        error: Optional[str] = None,
    ) -> Optional[int]:
        """
        Registra una ejecución

        Args:
            command: Comando ejecutado ('train', 'separability'...)
            success: Si terminó con éxito
            duration: Duración en segundos
            input_path: Dataset de entrada
            summary: Resultados principales (margen, mu_zero...)
            error: Mensaje de error si hubo falla

        Returns:
            ID de la ejecución o None si no se pudo registrar
        """
        try:
            history = self.load_history()
            entry = RunHistoryEntry(
                id=len(history) + 1,
                command=command,
                success=success,
                duration_seconds=round(duration, 3),
                input_path=input_path,
                summary=to_jsonable(summary or {}),
                error_message=error,
            )
            history.append(entry.model_dump(mode="json"))
            self.save_history(history)
            return entry.id
        except Exception as e:
            logger.log_debug(f"Error adding run to history: {str(e)}")
            return None

    def get_run(self, run_id: int) -> Optional[Dict]:
        """Obtiene una ejecución por ID"""
        for run in self.load_history():
            if run.get('id') == run_id:
                return run
        return None

    def get_successful_runs_count(self) -> int:
        return sum(1 for r in self.load_history() if r.get('success', False))

    def get_failed_runs_count(self) -> int:
        return sum(1 for r in self.load_history() if not r.get('success', False))

    def cleanup_old_entries(self, keep_count: int = 200) -> int:
        """
        Elimina entradas antiguas del historial

        Args:
            keep_count: Cantidad de entradas a mantener

        Returns:
            Cantidad de entradas eliminadas
        """
        try:
            history = self.load_history()

            if len(history) <= keep_count:
                return 0

            new_history = history[-keep_count:]

            # Reindexar IDs
            for i, entry in enumerate(new_history, start=1):
                entry['id'] = i

            self.save_history(new_history)
            return len(history) - len(new_history)

        except Exception:
            return 0


# Helper functions

def add_run_to_history(
    command: str,
    success: bool,
    duration: float,
    input_path: Optional[str] = None,
    summary: Optional[Dict[str, Any]] = None,
    error: Optional[str] = None,
) -> Optional[int]:
    """Helper para registrar una ejecución en el historial por defecto"""
    try:
        manager = HistoryManager()
        run_id = manager.add_run(command, success, duration, input_path, summary, error)
        manager.cleanup_old_entries()
        return run_id
    except Exception:
        return None
