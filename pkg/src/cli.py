"""
CLI principal usando Click
Define todos los comandos y subcomandos de ZonoSVM
"""

import json
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click

from .errors import ZonoSVMError
from .logger import logger
from .models import InputSummary, LabeledDataset, OracleConfig, RunConfig, TrainedClassifier
from .utils import (
    get_version,
    ensure_base_directories,
    load_config,
    get_seed,
    to_jsonable,
    format_float,
)


# === Ejecución de un RunConfig ===

def _input_summary(ds: LabeledDataset) -> Dict[str, Any]:
    return InputSummary(n=ds.n, d=ds.d, class_counts=ds.class_counts).model_dump()


def _load_input(config: RunConfig) -> LabeledDataset:
    from .dataset import lift_features, read_dataset

    ds = read_dataset(config.input_path, config.format)
    logger.log_info(f"Loaded {config.input_path}: n={ds.n} d={ds.d} classes={ds.class_counts}")
    if config.degree is not None and config.command == "train":
        ds = lift_features(ds, config.degree)
        logger.log_info(f"Lifted to degree {config.degree}: d'={ds.d}")
    return ds


def classifier_result(clf: TrainedClassifier, ds: LabeledDataset) -> Dict[str, Any]:
    """Campos serializados de un clasificador entrenado"""
    from .trainer import training_errors

    return {
        "mu": clf.mu,
        "w": clf.w,
        "b_plus": clf.b_plus,
        "b_minus": clf.b_minus,
        "b": clf.b,
        "bias_strategy": clf.bias_strategy.value,
        "margin": clf.margin,
        "squared_distance": clf.squared_distance,
        "alpha": clf.alpha,
        "support_indices": clf.support_indices,
        "xi": clf.xi,
        "transition_plus": clf.transition_plus,
        "transition_minus": clf.transition_minus,
        "training_errors": training_errors(clf, ds),
        "degenerate": clf.is_degenerate,
    }


def _run_train(config: RunConfig, settings: Dict[str, Any]) -> Tuple[Dict, Dict, Dict]:
    from .trainer import kkt_check, train
    from .plotting import emit_plot_data

    ds = _load_input(config)
    clf = train(
        ds,
        config.mu,
        bias=config.bias,
        eps=config.eps,
        solver=config.solver,
        tol=settings["nearest_point_tol"],
        max_iterations=settings["max_fw_iterations"],
        separation_gap_tol=settings["separation_gap_tol"],
        ellipsoid_max_n=settings["ellipsoid_max_n"],
    )

    if clf.is_degenerate:
        logger.warning(f"Reduced hulls intersect at mu={clf.mu}: margin 0 and w = 0")
        logger.info("Lower --mu or run 'separability' to find the zero-margin mu")

    result = classifier_result(clf, ds)
    result["kkt_passed"] = kkt_check(clf, ds).passed

    if config.plot is not None:
        emit_plot_data(clf, ds, config.plot, settings["plot_directions"])
        result["plot"] = str(config.plot)

    diagnostics = {
        "iterations": clf.diagnostics.get("iterations", 0),
        "solver": clf.diagnostics.get("solver", config.solver),
        "gap": clf.diagnostics.get("gap"),
        **{k: v for k, v in clf.diagnostics.items() if k not in ("iterations", "solver", "gap")},
    }
    return _input_summary(ds), result, diagnostics


def _run_separability(config: RunConfig, settings: Dict[str, Any]) -> Tuple[Dict, Dict, Dict]:
    from .separability import zero_margin_mu

    ds = _load_input(config)
    found = zero_margin_mu(
        ds,
        eps=config.eps,
        tol=settings["nearest_point_tol"],
        separation_gap_tol=settings["separation_gap_tol"],
    )
    if found.mu_star is None:
        logger.info("Classes are unbalanced (or n <= 2): mu_star is not defined")

    result = {
        "mu_zero": found.mu_zero,
        "mu_star": found.mu_star,
        "weight_sum": found.weight_sum,
        "separable": found.separable_flag,
        "hard_margin": found.hard_margin,
        "witness": {"alpha": found.alpha, "common_point": found.common_point},
    }
    diagnostics = {
        "iterations": found.iterations,
        "solver": "hard_margin" if found.termination == "hard_margin" else "ellipsoid",
        "gap": None,
        "termination": found.termination,
    }
    return _input_summary(ds), result, diagnostics


def _run_lift(config: RunConfig, settings: Dict[str, Any]) -> Tuple[Dict, Dict, Dict]:
    from .dataset import feature_map_spec, lift_features, serialize_dataset, write_dataset

    ds = _load_input(config)
    lifted = lift_features(ds, config.degree)
    spec = feature_map_spec(ds.d, config.degree)

    result = {
        "degree": spec.degree,
        "input_dim": spec.input_dim,
        "lifted_dim": spec.lifted_dim,
        "format": config.format,
    }
    if config.output is not None:
        write_dataset(config.output, lifted, config.format)
        result["dataset"] = str(config.output)
    else:
        result["dataset"] = serialize_dataset(lifted, config.format)

    return _input_summary(ds), result, {"iterations": 0, "solver": "feature_map", "gap": None}


def _run_check(config: RunConfig, settings: Dict[str, Any]) -> Tuple[Dict, Dict, Dict]:
    from .checks import run_oracle_checks

    oracle = OracleConfig(max_n=settings["oracle_max_n"], max_d=settings["oracle_max_d"])
    seed = config.seed if config.seed is not None else get_seed()

    with logger.progress() as progress:
        task = progress.add_task("Cross-checking against the reference oracle", total=config.instances)
        summary = run_oracle_checks(
            instances=config.instances,
            seed=seed,
            config=oracle,
            eps=config.eps,
            on_progress=lambda done: progress.update(task, completed=done),
        )

    return None, summary, {"iterations": config.instances, "solver": "reference_oracle", "gap": None}


def _run_sweep(config: RunConfig, settings: Dict[str, Any]) -> Tuple[Dict, Dict, Dict]:
    from .separability import margin_profile

    ds = _load_input(config)
    rows = margin_profile(
        ds,
        points=config.points,
        jobs=config.jobs,
        eps=config.eps,
        solver=config.solver,
        tol=settings["nearest_point_tol"],
        max_iterations=settings["max_fw_iterations"],
        separation_gap_tol=settings["separation_gap_tol"],
        ellipsoid_max_n=settings["ellipsoid_max_n"],
    )
    return _input_summary(ds), {"rows": rows}, {"iterations": len(rows), "solver": config.solver, "gap": None}


_RUNNERS = {
    "train": _run_train,
    "separability": _run_separability,
    "lift": _run_lift,
    "check": _run_check,
    "sweep": _run_sweep,
}


def run(config: RunConfig, settings: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Ejecuta un comando y construye el reporte

    Args:
        config: Configuración validada de la ejecución
        settings: Configuración global (load_config() si es None)

    Returns:
        Reporte listo para json.dumps

    Raises:
        ZonoSVMError según el comando
    """
    settings = settings or load_config()
    input_summary, result, diagnostics = _RUNNERS[config.command](config, settings)
    return to_jsonable({
        "command": config.command,
        "input_summary": input_summary,
        "result": result,
        "diagnostics": diagnostics,
        "version": get_version(),
    })


def _history_summary(report: Dict[str, Any]) -> Dict[str, Any]:
    result = report.get("result", {})
    keys = ("mu", "margin", "mu_zero", "mu_star", "lifted_dim", "passed", "instances")
    summary = {k: result[k] for k in keys if k in result and not isinstance(result[k], (list, dict))}
    if "rows" in result:
        summary["rows"] = len(result["rows"])
    return summary


def execute(ctx: click.Context, **options):
    """
    Valida opciones, ejecuta, emite el reporte y registra el historial

    Termina el proceso con código 1 (argumentos/datos, check fallido),
    2 (no convergencia, infactible) o 3 (error interno).
    """
    from .history_manager import add_run_to_history
    from .validators import validate_report, validate_run_config

    settings = ctx.obj.get('CONFIG') or load_config()
    command = options["command"]
    started = time.time()
    input_path = str(options["input_path"]) if options.get("input_path") else None

    def record(success: bool, summary=None, error=None):
        if settings.get("record_history", True):
            add_run_to_history(command, success, time.time() - started, input_path, summary, error)

    try:
        config = validate_run_config(**options)
        logger.step(f"Running {command}")
        report = run(config, settings)

        valid, problems = validate_report(report)
        if not valid:
            raise ZonoSVMError(f"report failed schema validation: {problems}")

        text = json.dumps(report, indent=2, allow_nan=False)
        if config.output is not None and command != "lift":
            config.output.parent.mkdir(parents=True, exist_ok=True)
            config.output.write_text(text + "\n", encoding="utf-8")
            logger.success(f"Report written to {config.output}")
        else:
            click.echo(text)

    except ZonoSVMError as e:
        logger.error(str(e))
        logger.log_exception(e)
        record(False, error=str(e))
        sys.exit(e.exit_code)
    except Exception as e:
        logger.error(f"Internal error: {str(e)}")
        logger.log_exception(e)
        record(False, error=str(e))
        sys.exit(3)

    record(True, _history_summary(report))

    if command == "check" and not report["result"]["passed"]:
        logger.error("Oracle cross-checks failed")
        sys.exit(1)
    logger.success(f"{command} completed in {time.time() - started:.2f}s")


# === Opciones compartidas ===

def input_options(func):
    """--input y --format"""
    func = click.option('--format', 'fmt', type=click.Choice(['csv', 'svmlight']), default=None,
                        help='Formato del dataset (default: config default_format)')(func)
    func = click.option('--input', 'input_path', required=True, type=click.Path(path_type=Path),
                        help='Dataset de entrada')(func)
    return func


def _fmt(ctx: click.Context, fmt: Optional[str]) -> str:
    return fmt or ctx.obj['CONFIG'].get("default_format", "csv")


def _eps(ctx: click.Context, eps: Optional[float]) -> float:
    return eps if eps is not None else ctx.obj['CONFIG'].get("eps", 1e-7)


# === Grupo principal ===

@click.group()
@click.version_option(version=get_version(), prog_name="ZonoSVM")
@click.pass_context
def cli(ctx):
    """
    ZonoSVM

    Entrenamiento de SVM soft-margin sobre envolventes convexas reducidas
    y zonotopos, y medida de separabilidad de margen cero.
    """
    # Asegurar que existan directorios base
    ensure_base_directories()

    # Guardar contexto
    ctx.ensure_object(dict)
    ctx.obj['CONFIG'] = load_config()
    logger.set_level(ctx.obj['CONFIG'].get("log_level", "INFO"))


# === Comando: version ===

@cli.command()
def version():
    """Muestra la versión de ZonoSVM"""
    import numpy
    import scipy

    version_info = {
        "ZonoSVM Version": get_version(),
        "Python": sys.version.split()[0],
        "NumPy": numpy.__version__,
        "SciPy": scipy.__version__,
    }

    logger.header("ZonoSVM Version Information")

    for key, value in version_info.items():
        logger.info(f"{key}: [bold]{value}[/bold]")

    logger.print()


# === Comando: train ===

@cli.command()
@input_options
@click.option('--mu', type=float, help='Tope de pesos μ (1/min(|I+|,|I-|) <= μ <= 1)')
@click.option('--degree', type=int, help='Levantar a features polinomiales de grado p antes de entrenar')
@click.option('--bias', type=click.Choice(['halfway', 'min_errors_line_search']), default=None,
              help='Estrategia del umbral b (default: config default_bias)')
@click.option('--eps', type=float, help='Gap objetivo del elipsoide')
@click.option('--solver', type=click.Choice(['auto', 'ellipsoid', 'nearest_point']), default='auto',
              help='Solver del problema dual')
@click.option('--output', type=click.Path(path_type=Path), help='Escribir el reporte aquí en vez de stdout')
@click.option('--plot', type=click.Path(path_type=Path), help='Escribir un SVG (solo datos 2D)')
@click.pass_context
def train(ctx, input_path, fmt, mu, degree, bias, eps, solver, output, plot):
    """
    Entrena un clasificador soft-margin con μ fijo

    Emite w, b+, b-, b, margen, α, índices de soporte y holguras ξ.
    """
    execute(
        ctx, command="train", input_path=input_path, format=_fmt(ctx, fmt), mu=mu, degree=degree,
        bias=bias or ctx.obj['CONFIG'].get("default_bias", "halfway"),
        eps=_eps(ctx, eps), solver=solver, output=output, plot=plot,
    )


# === Comando: separability ===

@cli.command()
@input_options
@click.option('--eps', type=float, help='Gap objetivo del elipsoide')
@click.option('--output', type=click.Path(path_type=Path), help='Escribir el reporte aquí en vez de stdout')
@click.pass_context
def separability(ctx, input_path, fmt, eps, output):
    """
    Calcula el μ de margen cero y su normalización μ*

    μ* solo se define con clases balanceadas.
    """
    execute(ctx, command="separability", input_path=input_path, format=_fmt(ctx, fmt),
            eps=_eps(ctx, eps), output=output)


# === Comando: lift ===

@cli.command()
@input_options
@click.option('--degree', type=int, help='Grado p del mapa polinomial')
@click.option('--output', type=click.Path(path_type=Path),
              help='Escribir el dataset levantado aquí (si no, va dentro del reporte)')
@click.pass_context
def lift(ctx, input_path, fmt, degree, output):
    """Levanta un dataset a features polinomiales explícitas (mismo formato)"""
    execute(ctx, command="lift", input_path=input_path, format=_fmt(ctx, fmt), degree=degree, output=output)


# === Comando: check ===

@cli.command()
@click.option('--instances', type=int, default=None, help='Instancias aleatorias (default: config check_instances)')
@click.option('--seed', type=int, default=None, help='Semilla (default: ZONOSVM_SEED)')
@click.option('--eps', type=float, help='Gap objetivo del elipsoide')
@click.option('--output', type=click.Path(path_type=Path), help='Escribir el reporte aquí en vez de stdout')
@click.pass_context
def check(ctx, instances, seed, eps, output):
    """Verifica LMOs, entrenamiento y μ de margen cero contra el oráculo de fuerza bruta"""
    execute(
        ctx, command="check", seed=seed, eps=_eps(ctx, eps), output=output,
        instances=instances or ctx.obj['CONFIG'].get("check_instances", 50),
    )


# === Comando: sweep ===

@cli.command()
@input_options
@click.option('--points', type=int, default=None, help='Puntos de la rejilla de μ (default: config sweep_points)')
@click.option('--jobs', type=int, default=None, help='Procesos en paralelo (default: config sweep_jobs)')
@click.option('--eps', type=float, help='Gap objetivo del elipsoide')
@click.option('--solver', type=click.Choice(['auto', 'ellipsoid', 'nearest_point']), default='auto',
              help='Solver del problema dual')
@click.option('--output', type=click.Path(path_type=Path), help='Escribir el reporte aquí en vez de stdout')
@click.pass_context
def sweep(ctx, input_path, fmt, points, jobs, eps, solver, output):
    """Tabla (μ, margen, |SV|) sobre una rejilla de μ"""
    settings = ctx.obj['CONFIG']
    execute(
        ctx, command="sweep", input_path=input_path, format=_fmt(ctx, fmt), eps=_eps(ctx, eps),
        solver=solver, output=output,
        points=points or settings.get("sweep_points", 10),
        jobs=jobs or settings.get("sweep_jobs", 1),
    )


# === Comando: config ===

@cli.group()
def config():
    """Gestiona la configuración global"""
    pass


@config.command('show')
@click.pass_context
def config_show(ctx):
    """Muestra la configuración efectiva"""
    logger.print_config(ctx.obj['CONFIG'], "ZonoSVM Configuration")


# === Comando: history ===

@cli.command()
@click.argument('run_id', required=False, type=int)
@click.option('--limit', type=int, default=20, help='Cantidad de ejecuciones a mostrar')
def history(run_id, limit):
    """Muestra historial de ejecuciones"""
    from .history_manager import HistoryManager
    from rich.table import Table

    history_manager = HistoryManager()

    def timestamp_of(run: Dict[str, Any], pattern: str) -> str:
        timestamp = run.get('timestamp', '')
        try:
            return datetime.fromisoformat(timestamp).strftime(pattern)
        except (TypeError, ValueError):
            return timestamp or "unknown"

    # Si se especifica un ID, mostrar detalles
    if run_id:
        run = history_manager.get_run(run_id)

        if not run:
            logger.error(f"Run #{run_id} not found")
            sys.exit(1)

        logger.header(f"Run #{run_id} Details")

        success = run.get('success', False)
        status_str = "[green]✓ Success[/green]" if success else "[red]✗ Failed[/red]"

        info = f"""[yellow]Command:[/yellow] {run.get('command', 'unknown')}
[yellow]Status:[/yellow] {status_str}
[yellow]Timestamp:[/yellow] {timestamp_of(run, "%Y-%m-%d %H:%M:%S")}
[yellow]Duration:[/yellow] {run.get('duration_seconds', 0):.2f}s
[yellow]Input:[/yellow] {run.get('input_path') or 'N/A'}"""

        summary = run.get('summary', {})
        if summary:
            info += "\n\n[yellow]Summary:[/yellow]"
            for key, value in summary.items():
                info += f"\n  • {key}: {value}"

        error = run.get('error_message')
        if error:
            info += f"\n\n[red]Error:[/red] {error}"

        logger.panel(info, title=f"Run #{run_id}")
        return

    history_list = history_manager.load_history()

    if not history_list:
        logger.info("No run history found")
        logger.info("Runs are recorded automatically by train, separability, lift, check and sweep")
        return

    # Limitar cantidad
    history_list = history_list[-limit:]

    logger.header(f"Run History (last {len(history_list)} runs)")

    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("ID", style="cyan", width=5)
    table.add_column("Date/Time", style="white")
    table.add_column("Command", style="yellow")
    table.add_column("Duration", style="magenta", justify="right")
    table.add_column("Status", justify="center")
    table.add_column("Result", style="dim")

    for run in history_list:
        success = run.get('success', False)
        status_color = "green" if success else "red"
        summary = run.get('summary', {})
        headline = ", ".join(
            f"{k}={format_float(v) if isinstance(v, float) else v}" for k, v in list(summary.items())[:2]
        )

        table.add_row(
            str(run.get('id', '?')),
            timestamp_of(run, "%Y-%m-%d %H:%M"),
            run.get('command', 'unknown'),
            f"{run.get('duration_seconds', 0):.2f}s",
            f"[{status_color}]{'✓' if success else '✗'}[/{status_color}]",
            headline or (run.get('error_message') or "")[:40],
        )

    logger.print(table)
    logger.print()

    total = len(history_manager.load_history())
    successful = history_manager.get_successful_runs_count()
    failed = history_manager.get_failed_runs_count()

    logger.info(f"Total runs: {total} ([green]{successful} successful[/green], [red]{failed} failed[/red])")
    logger.info("View run details: zonosvm history <id>")


# === Punto de entrada ===

def main():
    """Punto de entrada principal"""
    try:
        cli.main(obj={}, standalone_mode=False)
    except click.exceptions.Abort:
        logger.error("Aborted")
        sys.exit(1)
    except click.ClickException as e:
        # Errores de uso: mismo código que los argumentos inválidos
        e.show()
        sys.exit(1)


if __name__ == '__main__':
    main()
