#!/usr/bin/env python3
"""
Script de prueba para la CLI de ZonoSVM
"""

import json
import sys
import tempfile
from pathlib import Path

# Agregar src al path
sys.path.insert(0, str(Path(__file__).parent))

from click.testing import CliRunner

from src.cli import cli
from src.dataset import read_dataset
from src.logger import logger
from src.validators import validate_report


DATASET_A = "+1,2,0\n+1,3,1\n-1,0,0\n-1,-1,1\n"
INTERVALS = "+1,0\n-1,1\n+1,2\n-1,3\n"
CUBE = "+1,1,0,0\n+1,2,1,0\n-1,-1,0,1\n-1,-2,1,1\n"


class Workspace:
    """Directorio temporal que hace de HOME y guarda datasets y reportes"""

    def __init__(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.path = Path(self._tmp.name)
        self.runner = CliRunner()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self._tmp.cleanup()

    def write(self, name: str, text: str) -> Path:
        path = self.path / name
        path.write_text(text, encoding="utf-8")
        return path

    def invoke(self, *args):
        return self.runner.invoke(cli, [str(a) for a in args], obj={}, env={"HOME": str(self.path)})

    def report(self, name: str):
        return json.loads((self.path / name).read_text(encoding="utf-8"))


def test_train_command():
    """train escribe un reporte válido"""
    logger.header("Testing train command")

    with Workspace() as ws:
        data = ws.write("a.csv", DATASET_A)

        logger.step("Test 1: hard margin on separable data")
        result = ws.invoke("train", "--input", data, "--mu", "1.0", "--output", ws.path / "train.json")
        assert result.exit_code == 0, result.output
        report = ws.report("train.json")
        assert report["command"] == "train"
        assert report["input_summary"] == {"n": 4, "d": 2, "class_counts": {"+1": 2, "-1": 2}}
        assert abs(report["result"]["margin"] - 2.0) <= 1e-6
        assert report["result"]["support_indices"] == [0, 2]
        assert report["result"]["kkt_passed"] is True
        assert report["diagnostics"]["iterations"] > 0

        valid, problems = validate_report(report)
        assert valid, problems

        logger.step("Test 2: plot for 2D data")
        plot = ws.path / "a.svg"
        result = ws.invoke("train", "--input", data, "--mu", "0.5", "--plot", plot,
                           "--output", ws.path / "plot.json")
        assert result.exit_code == 0, result.output
        svg = plot.read_text(encoding="utf-8")
        assert "<svg" in svg
        assert ws.report("plot.json")["result"]["plot"] == str(plot)

        logger.step("Test 3: polynomial lifting before training")
        result = ws.invoke("train", "--input", data, "--mu", "1.0", "--degree", "2",
                           "--output", ws.path / "poly.json")
        assert result.exit_code == 0, result.output
        assert ws.report("poly.json")["input_summary"]["d"] == 3

    logger.success("train command tests completed")


def test_argument_errors():
    """Errores de argumentos y datos terminan con código 1"""
    logger.header("Testing argument errors")

    with Workspace() as ws:
        data = ws.write("a.csv", DATASET_A)
        cube = ws.write("cube.csv", CUBE)

        logger.step("Test 1: train without --mu")
        assert ws.invoke("train", "--input", data).exit_code == 1

        logger.step("Test 2: mu out of range")
        assert ws.invoke("train", "--input", data, "--mu", "0.3").exit_code == 1

        logger.step("Test 3: missing dataset")
        assert ws.invoke("train", "--input", ws.path / "missing.csv", "--mu", "1").exit_code == 1

        logger.step("Test 4: malformed dataset")
        bad = ws.write("bad.csv", "+1,0\n-1,1,2\n")
        assert ws.invoke("separability", "--input", bad).exit_code == 1

        logger.step("Test 5: plot needs 2D data")
        result = ws.invoke("train", "--input", cube, "--mu", "1.0", "--plot", ws.path / "cube.svg")
        assert result.exit_code == 1
        assert not (ws.path / "cube.svg").exists()

        logger.step("Test 6: lift without --degree")
        assert ws.invoke("lift", "--input", data).exit_code == 1

    logger.success("Argument error tests completed")


def test_separability_lift_sweep():
    """separability, lift y sweep"""
    logger.header("Testing separability, lift and sweep")

    with Workspace() as ws:
        intervals = ws.write("intervals.csv", INTERVALS)
        data = ws.write("a.csv", DATASET_A)

        logger.step("Test 1: zero margin mu of interleaved intervals")
        result = ws.invoke("separability", "--input", intervals, "--output", ws.path / "sep.json")
        assert result.exit_code == 0, result.output
        report = ws.report("sep.json")
        assert abs(report["result"]["mu_zero"] - 0.75) <= 1e-4
        assert abs(report["result"]["mu_star"] - 0.5) <= 2e-4
        assert report["result"]["separable"] is False
        assert validate_report(report)[0]

        logger.step("Test 2: lift writes the dataset in the same format")
        lifted_path = ws.path / "lifted.csv"
        result = ws.invoke("lift", "--input", data, "--degree", "2", "--output", lifted_path)
        assert result.exit_code == 0, result.output
        lifted = read_dataset(lifted_path, "csv")
        assert (lifted.n, lifted.d) == (4, 3)

        logger.step("Test 3: sweep rows")
        result = ws.invoke("sweep", "--input", data, "--points", "3", "--output", ws.path / "sweep.json")
        assert result.exit_code == 0, result.output
        rows = ws.report("sweep.json")["result"]["rows"]
        assert [row["mu"] for row in rows] == [0.5, 0.75, 1.0]

    logger.success("separability, lift and sweep tests completed")


def test_check_and_housekeeping():
    """check, version, config show e historial"""
    logger.header("Testing check and housekeeping commands")

    with Workspace() as ws:
        logger.step("Test 1: oracle cross-checks")
        result = ws.invoke("check", "--instances", "2", "--seed", "1", "--output", ws.path / "check.json")
        report = ws.report("check.json")
        assert report["result"]["instances"] == 2
        assert report["result"]["seed"] == 1
        assert result.exit_code == (0 if report["result"]["passed"] else 1)

        logger.step("Test 2: version and config")
        assert ws.invoke("version").exit_code == 0
        assert ws.invoke("--version").exit_code == 0
        assert ws.invoke("config", "show").exit_code == 0

        logger.step("Test 3: history records every run")
        ws.invoke("train", "--input", ws.path / "missing.csv", "--mu", "1")
        history = json.loads((ws.path / "zonosvm" / "run-history.json").read_text(encoding="utf-8"))
        assert [entry["command"] for entry in history] == ["check", "train"]
        assert history[1]["success"] is False
        assert ws.invoke("history").exit_code == 0
        assert ws.invoke("history", "1").exit_code == 0
        assert ws.invoke("history", "99").exit_code == 1

    logger.success("Housekeeping tests completed")


def test_check_default_config():
    """check con la configuración por defecto termina con código 0"""
    logger.header("Testing check with the default configuration")

    with Workspace() as ws:
        result = ws.invoke("check", "--output", ws.path / "check.json")
        report = ws.report("check.json")
        assert result.exit_code == 0, report["result"]["checks"]
        assert report["result"]["passed"] is True
        assert report["result"]["instances"] == 50
        assert all(entry["failed"] == 0 for entry in report["result"]["checks"].values())

    logger.success("Default check test completed")


def main():
    """Ejecuta todas las pruebas"""
    logger.header("CLI Tests")

    try:
        test_train_command()
        test_argument_errors()
        test_separability_lift_sweep()
        test_check_and_housekeeping()
        test_check_default_config()

        logger.header("All Tests Completed Successfully!")

    except Exception as e:
        logger.error(f"Tests failed: {str(e)}")
        logger.log_exception(e)
        sys.exit(1)


if __name__ == '__main__':
    main()
