"""
Renderizado de plots SVG con Jinja2
Puntos por clase, líneas del slab, línea de decisión y contornos de las
envolventes reducidas en 2D
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from jinja2 import Environment, FileSystemLoader, TemplateNotFound

from .errors import InvalidArgumentError, ZonoSVMError
from .lmo import hull_extreme, make_hull
from .logger import logger
from .models import LabeledDataset, TrainedClassifier


PLOT_TEMPLATE = "plot.svg.j2"

CANVAS = 600
PADDING = 40

_POINT_TOL = 1e-9


def hull_outline(points: np.ndarray, mu: float, directions: int = 360) -> List[np.ndarray]:
    """
    Contorno poligonal de H_μ barriendo hull_extreme en `directions` direcciones

    Con μ = 1/m el contorno se reduce a un solo punto (el centroide).

    Returns:
        Vértices en orden angular, sin repetidos consecutivos
    """
    H = make_hull(points, mu)
    outline: List[np.ndarray] = []
    for theta in np.linspace(0.0, 2.0 * np.pi, directions, endpoint=False):
        vertex = hull_extreme(H, np.array([np.cos(theta), np.sin(theta)])).point
        if not outline or np.linalg.norm(vertex - outline[-1]) > _POINT_TOL:
            outline.append(np.asarray(vertex, dtype=float))
    if len(outline) > 1 and np.linalg.norm(outline[0] - outline[-1]) <= _POINT_TOL:
        outline.pop()
    return outline


def clip_line(w: np.ndarray, c: float, box: Tuple[float, float, float, float]) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    Segmento de la recta w·x = c dentro del rectángulo (xmin, ymin, xmax, ymax)

    Returns:
        Extremos del segmento o None si la recta no corta el rectángulo
    """
    xmin, ymin, xmax, ymax = box
    hits = []
    if abs(w[1]) > 0:
        for x in (xmin, xmax):
            y = (c - w[0] * x) / w[1]
            if ymin - _POINT_TOL <= y <= ymax + _POINT_TOL:
                hits.append(np.array([x, y]))
    if abs(w[0]) > 0:
        for y in (ymin, ymax):
            x = (c - w[1] * y) / w[0]
            if xmin - _POINT_TOL <= x <= xmax + _POINT_TOL:
                hits.append(np.array([x, y]))
    if len(hits) < 2:
        return None

    # Los dos cortes más alejados entre sí
    direction = np.array([-w[1], w[0]])
    hits.sort(key=lambda p: float(p @ direction))
    return hits[0], hits[-1]


class PlotRenderer:
    """Renderer de plots 2D sobre el template SVG"""

    def __init__(self, templates_dir: Optional[Path] = None):
        """
        Inicializa el PlotRenderer

        Args:
            templates_dir: Directorio de templates. Si es None, usa el directorio del proyecto
        """
        if templates_dir is None:
            self.templates_dir = Path(__file__).parent.parent / "templates"
        else:
            self.templates_dir = Path(templates_dir)

        if not self.templates_dir.exists():
            logger.log_warning(f"Templates directory not found: {self.templates_dir}")

        self.env = Environment(
            loader=FileSystemLoader(str(self.templates_dir)),
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True
        )

    def build_context(self, clf: TrainedClassifier, ds: LabeledDataset, directions: int = 360) -> Dict[str, Any]:
        """
        Calcula la geometría del plot en coordenadas de pantalla

        Args:
            clf: Clasificador entrenado sobre ds
            ds: Dataset de dimensión 2
            directions: Direcciones del barrido de contornos

        Returns:
            Contexto para el template
        """
        if ds.d != 2:
            raise InvalidArgumentError(f"plots need 2-dimensional data, got d={ds.d}")

        outlines = {}
        if clf.mu < 1.0:
            outlines = {
                "plus": hull_outline(ds.positive_points, clf.mu, directions),
                "minus": hull_outline(ds.negative_points, clf.mu, directions),
            }

        # Caja de datos con 10% de holgura
        low = ds.points.min(axis=0)
        high = ds.points.max(axis=0)
        span = np.maximum(high - low, 1.0)
        low, high = low - 0.1 * span, high + 0.1 * span
        box = (float(low[0]), float(low[1]), float(high[0]), float(high[1]))
        scale = (CANVAS - 2 * PADDING) / float(max(high - low))

        def to_screen(p) -> Tuple[float, float]:
            return (
                round(PADDING + (float(p[0]) - low[0]) * scale, 3),
                round(CANVAS - PADDING - (float(p[1]) - low[1]) * scale, 3),
            )

        lines = []
        if not clf.is_degenerate:
            for name, value in (("slab_plus", clf.b_plus), ("slab_minus", clf.b_minus), ("decision", clf.b)):
                segment = clip_line(clf.w, value, box)
                if segment is not None:
                    lines.append({"name": name, "start": to_screen(segment[0]), "end": to_screen(segment[1])})

        return {
            "width": CANVAS,
            "height": CANVAS,
            "mu": clf.mu,
            "margin": clf.margin,
            "points": [
                {"xy": to_screen(x), "label": int(y), "support": i in clf.support_indices}
                for i, (x, y) in enumerate(zip(ds.points, ds.labels))
            ],
            "lines": lines,
            "outlines": {
                name: [to_screen(v) for v in vertices] for name, vertices in outlines.items()
            },
        }

    def render(self, context: Dict[str, Any]) -> str:
        try:
            template = self.env.get_template(PLOT_TEMPLATE)
        except TemplateNotFound:
            raise ZonoSVMError(f"Template not found: {PLOT_TEMPLATE} in {self.templates_dir}")
        rendered = template.render(**context)
        logger.log_debug(f"Template {PLOT_TEMPLATE} rendered successfully")
        return rendered

    def render_and_save(self, clf: TrainedClassifier, ds: LabeledDataset, output_path: Path, directions: int = 360) -> Path:
        """
        Renderiza el plot y lo guarda

        Returns:
            Path del archivo escrito
        """
        content = self.render(self.build_context(clf, ds, directions))
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(content, encoding='utf-8')
        logger.log_info(f"Plot saved to {output_path}")
        return output_path


def emit_plot_data(clf: TrainedClassifier, ds: LabeledDataset, path: Path, directions: int = 360) -> Path:
    """Helper: escribe el SVG del clasificador 2D en path"""
    return PlotRenderer().render_and_save(clf, ds, path, directions)
