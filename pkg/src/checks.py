"""
Verificación cruzada contra el oráculo de referencia
Compara LMOs, entrenamiento y separabilidad con los solvers de fuerza bruta
sobre instancias aleatorias con semilla
"""

from typing import Any, Callable, Dict, Optional

import numpy as np

from .errors import ZonoSVMError
from .lmo import hull_extreme, zonotope_extreme
from .logger import logger
from .models import OracleConfig, ReducedHull, Zonotope
from .reference_oracle import (
    brute_lmo, brute_nearest, brute_zero_margin_mu, random_hull_mu, random_instance,
)
from .separability import zero_margin_mu
from .trainer import kkt_check, mu_range, train
from .utils import get_rng


CHECK_NAMES = ("zonotope_lmo", "hull_lmo", "dual_qp", "kkt", "zero_margin_mu")


class CheckTally:
    """Contador de aciertos/fallos y error máximo por verificación"""

    def __init__(self):
        self.results: Dict[str, Dict[str, Any]] = {
            name: {"passed": 0, "failed": 0, "max_error": 0.0} for name in CHECK_NAMES
        }

    def record(self, name: str, error: float, tolerance: float):
        entry = self.results[name]
        entry["max_error"] = max(entry["max_error"], float(error))
        if error <= tolerance:
            entry["passed"] += 1
        else:
            entry["failed"] += 1
            logger.log_warning(f"check {name} failed: error {error} > {tolerance}")

    def fail(self, name: str, reason: str):
        self.results[name]["failed"] += 1
        logger.log_warning(f"check {name} failed: {reason}")

    @property
    def passed(self) -> bool:
        return all(entry["failed"] == 0 for entry in self.results.values())


def _check_lmos(rng: np.random.Generator, config: OracleConfig, tally: CheckTally):
    m = int(rng.integers(1, config.max_n + 1))
    k = int(rng.integers(1, config.max_d + 1))
    w = rng.standard_normal(k)

    Z = Zonotope(generators=rng.standard_normal((m, k)), upper_bounds=rng.uniform(0.0, 2.0, m))
    point, _ = zonotope_extreme(Z, w)
    expected = brute_lmo(Z, w, config)
    tally.record("zonotope_lmo", abs(float(point @ w) - expected), 1e-9 * max(1.0, abs(expected)))

    H = ReducedHull(points=rng.standard_normal((m, k)), mu=random_hull_mu(rng, m))
    value = hull_extreme(H, w).value
    expected = brute_lmo(H, w, config)
    tally.record("hull_lmo", abs(value - expected), 1e-9 * max(1.0, abs(expected)))


def run_oracle_checks(
    instances: int = 50,
    seed: int = 0,
    config: OracleConfig = OracleConfig(),
    eps: float = 1e-7,
    separability_every: int = 5,
    on_progress: Optional[Callable[[int], None]] = None,
) -> Dict[str, Any]:
    """
    Ejecuta todas las verificaciones cruzadas

    Args:
        instances: Número de instancias aleatorias
        seed: Semilla del generador
        config: Límites del oráculo
        eps: eps de entrenamiento y separabilidad
        separability_every: Verificar μ₀ cada tantas instancias
        on_progress: Callback con el número de instancias completadas

    Returns:
        Dict con el resumen por verificación y 'passed'
    """
    rng = get_rng(seed)
    tally = CheckTally()

    for index in range(instances):
        _check_lmos(rng, config, tally)

        ds = random_instance(rng, config)
        low, _ = mu_range(ds)
        mu = float(rng.uniform(low, 1.0))
        try:
            clf = train(ds, mu, eps=eps)
            expected, _ = brute_nearest(ds, mu, config)
            tally.record("dual_qp", abs(clf.squared_distance - expected), 1e-7 * max(1.0, expected))
            report = kkt_check(clf, ds, tol=1e-5)
            tally.record("kkt", 0.0 if report.passed else 1.0, 0.5)
        except ZonoSVMError as e:
            tally.fail("dual_qp", str(e))

        if index % separability_every == 0:
            try:
                result = zero_margin_mu(ds, eps=eps)
                expected_mu, _, _ = brute_zero_margin_mu(ds, config)
                tally.record("zero_margin_mu", abs(result.mu_zero - expected_mu), 1e-4)
            except ZonoSVMError as e:
                tally.fail("zero_margin_mu", str(e))

        if on_progress is not None:
            on_progress(index + 1)

    summary = {
        "instances": instances,
        "seed": seed,
        "checks": tally.results,
        "passed": tally.passed,
    }
    logger.log_info(f"Oracle checks: passed={tally.passed} {tally.results}")
    return summary
