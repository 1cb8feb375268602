"""
Jerarquía de excepciones de ZonoSVM
Cada error sabe con qué código de salida termina la CLI
"""

from typing import Any, Optional


class ZonoSVMError(Exception):
    """Error base del sistema"""

    exit_code: int = 3


class InvalidArgumentError(ZonoSVMError, ValueError):
    """Argumento fuera de dominio (dirección nula, μ fuera de rango, grado inválido)"""

    exit_code = 1


class DatasetParseError(ZonoSVMError):
    """Fila mal formada en un archivo csv/svmlight"""

    exit_code = 1

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DatasetValidationError(ZonoSVMError):
    """Dataset sintácticamente válido pero que viola un invariante (una sola clase, n < 2...)"""

    exit_code = 1


class InfeasibleError(ZonoSVMError):
    """
    Región factible vacía

    Cuando lo lanza el motor de elipsoides, `certificate` contiene el
    elipsoide final (EllipsoidState) y `report` el SolveReport parcial.
    """

    exit_code = 2

    def __init__(self, message: str, certificate: Any = None, report: Any = None):
        super().__init__(message)
        self.certificate = certificate
        self.report = report


class NonConvergenceError(ZonoSVMError):
    """Se agotó el límite de iteraciones; `best` guarda el mejor iterado"""

    exit_code = 2

    def __init__(self, message: str, best: Optional[Any] = None):
        super().__init__(message)
        self.best = best


class ConditioningError(ZonoSVMError):
    """La matriz de forma del elipsoide dejó de ser definida positiva"""

    exit_code = 2


class UndefinedClassifierError(ZonoSVMError):
    """Clasificador con w = 0: no hay regla de decisión"""

    exit_code = 1


class OracleLimitError(ZonoSVMError):
    """Instancia demasiado grande para el oráculo de fuerza bruta"""

    exit_code = 1
