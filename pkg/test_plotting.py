#!/usr/bin/env python3
"""
Script de prueba para el renderizado de plots SVG
"""

import sys
import tempfile
from pathlib import Path

# Agregar src al path
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest

from src.dataset import make_dataset
from src.errors import InvalidArgumentError
from src.logger import logger
from src.plotting import PlotRenderer, clip_line, hull_outline
from src.trainer import train


def test_geometry_helpers():
    """Contornos de envolventes y recorte de rectas"""
    logger.header("Testing plot geometry")

    logger.step("Test 1: reduced triangle outline")
    triangle = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    outline = hull_outline(triangle, 0.5, directions=90)
    found = sorted(tuple(np.round(v, 9)) for v in outline)
    assert found == [(0.0, 0.5), (0.5, 0.0), (0.5, 0.5)]

    logger.step("Test 2: centroid outline is a single point")
    outline = hull_outline(triangle, 1.0 / 3.0)
    assert len(outline) == 1
    assert np.allclose(outline[0], [1 / 3, 1 / 3])

    logger.step("Test 3: clipping")
    start, end = clip_line(np.array([1.0, 0.0]), 1.0, (0.0, 0.0, 2.0, 2.0))
    assert np.allclose(start, [1, 0]) and np.allclose(end, [1, 2])
    assert clip_line(np.array([1.0, 0.0]), 5.0, (0.0, 0.0, 2.0, 2.0)) is None

    logger.success("Plot geometry tests completed")


def test_renderer():
    """Contexto y SVG de un clasificador 2D"""
    logger.header("Testing PlotRenderer")

    ds = make_dataset([[2, 0], [3, 1], [0, 0], [-1, 1]], [1, 1, -1, -1])
    renderer = PlotRenderer()

    logger.step("Test 1: context at mu = 1 has lines but no outlines")
    clf = train(ds, 1.0)
    context = renderer.build_context(clf, ds)
    assert [line["name"] for line in context["lines"]] == ["slab_plus", "slab_minus", "decision"]
    assert context["outlines"] == {}
    assert [p["support"] for p in context["points"]] == [True, False, True, False]

    logger.step("Test 2: SVG written with hull outlines")
    clf = train(ds, 0.5)
    with tempfile.TemporaryDirectory() as tmp:
        path = renderer.render_and_save(clf, ds, Path(tmp) / "plots" / "a.svg")
        svg = path.read_text(encoding="utf-8")
    assert svg.count('class="hull-') == 2
    assert 'class="decision"' in svg
    assert svg.count('class="positive"') == 2

    logger.step("Test 3: only 2D data")
    cube = make_dataset([[1, 0, 0], [2, 1, 0], [-1, 0, 1], [-2, 1, 1]], [1, 1, -1, -1])
    with pytest.raises(InvalidArgumentError):
        renderer.build_context(train(cube, 1.0), cube)

    logger.success("PlotRenderer tests completed")


def main():
    """Ejecuta todas las pruebas"""
    logger.header("Plotting Tests")

    try:
        test_geometry_helpers()
        test_renderer()

        logger.header("All Tests Completed Successfully!")

    except Exception as e:
        logger.error(f"Tests failed: {str(e)}")
        logger.log_exception(e)
        sys.exit(1)


if __name__ == '__main__':
    main()
