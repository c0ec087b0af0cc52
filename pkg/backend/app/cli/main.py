"""CLI entry point for locality-renorm with basis/validate/renormalize/kernel/model commands."""

from __future__ import annotations

import functools
import json
import logging
from pathlib import Path
from typing import Any, Callable

import click
import numpy as np

from ..models.character import COUNIT, Character
from ..models.equation_spec import EquationSpec
from ..models.errors import HypothesisViolation, RenormError
from ..models.grid import SpacetimeGrid
from ..models.kernel import TorusGrid
from ..models.run_config import RunConfig
from ..services import trees
from ..services.bphz import bphz_character
from ..services.characters import character_on_grid, load_character
from ..services.counterterms import counter_terms, render_latex, terms_as_json
from ..services.green import green_kernels
from ..services.kernel_checks import kernel_report
from ..services.model_evaluator import ModelPair, model_bound_report
from ..services.noise import load_noises, sample_ensemble
from ..services.output_manager import OutputManager
from ..services.parametrix import OperatorCoefficients, Parametrix
from ..services.preparation import from_character, identity
from ..services.remediation import RemediationService
from ..services.rules import generate_basis, require_valid, validate_spec
from ..utils.logging_setup import setup_logging
from ..utils.settings import load_settings
from .report_renderer import ReportRenderer, report_lines

logger = logging.getLogger(__name__)

DUMP_TIMES = (1e-3, 1e-2, 1e-1)
CHECK_POINTS = ((0, 0), (1, 3))


def _handle_errors(command: Callable[..., Any]) -> Callable[..., Any]:
    """Map toolkit failures to remediation advice and exit codes 2/3/4."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except RenormError as exc:
            advice = RemediationService.message_from_exception(exc)
            logger.error("%s: %s", advice.error_code.value, exc)
            ReportRenderer().render_failure(f"{advice.message}: {exc}", advice.action)
            raise SystemExit(advice.exit_code) from exc

    return wrapper


def _emit(payload: Any, output_format: str, text: str | None = None) -> None:
    if output_format == "json" or text is None:
        click.echo(json.dumps(payload, ensure_ascii=False, indent=2))
    else:
        click.echo(text)


def _run_config(ctx: click.Context, command: str, **options: Any) -> RunConfig:
    settings = load_settings()
    defaults = {
        "out_dir": settings.output_dir,
        "nt": settings.grid_nt,
        "nx": settings.grid_nx,
        "tolerance": float(settings.slope_tolerance),
        "seed": settings.seed,
        "samples": settings.samples,
    }
    merged = {key: value for key, value in options.items() if value is not None}
    return RunConfig.build(command=command, **{**defaults, **merged})


def _load_spec(config: RunConfig) -> EquationSpec:
    spec = EquationSpec.from_file(config.spec_path)
    require_valid(spec)
    return spec


def _grid(config: RunConfig) -> SpacetimeGrid:
    return SpacetimeGrid(config.nt, config.nx, config.horizon)


def _character(config: RunConfig, grid: SpacetimeGrid) -> Character:
    if config.character is None:
        return COUNIT
    return character_on_grid(load_character(config.character), grid.t_points, grid.x_points)


spec_option = click.option(
    "--spec", "spec_path", required=True, type=click.Path(path_type=Path), help="Equation spec (JSON or TOML)"
)
format_option = click.option("--format", "output_format", type=click.Choice(["json", "latex", "csv"]), default="json")
grid_options = [
    click.option("--nt", type=int, default=None, help="Time grid points (power of two)"),
    click.option("--nx", type=int, default=None, help="Space grid points (power of two)"),
    click.option("--seed", type=int, default=None, help="Seed of the random smooth noise"),
    click.option("--noise", default="random", show_default=True, help="random | file:a.npy;b.npy | expr:cos(x1);..."),
    click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None, help="Output root directory"),
]


def _with_options(options: list[Callable[[Any], Any]]) -> Callable[[Any], Any]:
    def decorate(command: Any) -> Any:
        for option in reversed(options):
            command = option(command)
        return command

    return decorate


@click.group()
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
@click.option("--progress/--no-progress", default=False, help="Show tqdm progress bars")
@click.pass_context
def cli(ctx: click.Context, log_level: str | None, progress: bool) -> None:
    """locality-renorm - renormalised models and counter-terms for parabolic SPDE systems."""
    ctx.ensure_object(dict)
    ctx.obj["progress"] = progress
    setup_logging(level=log_level)


@cli.command()
@spec_option
@_handle_errors
def validate(spec_path: Path) -> None:
    """Check ellipticity, subcriticality and the cutoff of a spec."""
    spec = EquationSpec.from_file(spec_path)
    diagnostics = validate_spec(spec)
    ReportRenderer(verbose=True).render_diagnostics(diagnostic.as_dict() for diagnostic in diagnostics)
    if any(not item.passed and item.severity == "error" for item in diagnostics):
        raise SystemExit(2)


@cli.command()
@spec_option
@format_option
@click.pass_context
@_handle_errors
def basis(ctx: click.Context, spec_path: Path, output_format: str) -> None:
    """List the generated basis with degrees and the B⁻ marking."""
    spec = EquationSpec.from_file(spec_path)
    require_valid(spec)
    generated = generate_basis(spec, show_progress=ctx.obj["progress"])
    payload = generated.as_dict()
    negative = set(generated.minus())
    text = "\n".join(
        f"{'-' if tree in negative else ' '} {generated.degree(tree)!s:>8}  {tree.to_text()}" for tree in generated
    )
    if output_format == "csv":
        text = "tree,degree,negative\n" + "\n".join(
            f"\"{tree.to_text()}\",{generated.degree(tree)},{tree in negative}" for tree in generated
        )
    _emit(payload, output_format, text)


@cli.command()
@spec_option
@click.option("--character", type=click.Path(path_type=Path), default=None, help="Character JSON on B⁻")
@click.option("--bphz", is_flag=True, help="Compute the BPHZ character from the model first")
@click.option("--samples", type=int, default=None, help="Noise samples for --bphz")
@click.option("--terms", "n_terms", type=int, default=1, show_default=True)
@_with_options(grid_options)
@format_option
@click.pass_context
@_handle_errors
def renormalize(ctx: click.Context, bphz: bool, **options: Any) -> None:
    """Emit the counter-terms of the renormalised system."""
    config = _run_config(ctx, "renormalize", **options)
    spec = _load_spec(config)
    generated = generate_basis(spec, show_progress=ctx.obj["progress"])
    grid = _grid(config)
    if bphz:
        greens = green_kernels(spec, grid, config.n_terms, show_progress=ctx.obj["progress"])
        if config.samples == 1:
            samples = [load_noises(config.noise, grid, spec.noise_count, config.seed)]
        else:
            samples = sample_ensemble(grid, spec.noise_count, config.samples, config.seed)
        character = bphz_character(
            generated, grid, samples, greens, load_settings().max_workers, show_progress=ctx.obj["progress"]
        )
    else:
        character = _character(config, grid)
    prep = from_character(character, generated.assignment, generated.minus()) if character.support else identity(generated.assignment)
    points = CHECK_POINTS if character.is_grid_valued() else ()
    terms = counter_terms(spec, prep, generated, points=points)
    latex = render_latex(spec, terms)
    payload = {"spec": spec.name, "character": character.as_dict(), "counterTerms": terms_as_json(terms), "latex": latex}
    manager = OutputManager(config.out_dir)
    manager.prepare_run(config.run_id)
    manager.write_metadata(config.run_id, "counterterms.json", payload)
    manager.write_report(config.run_id, "counterterms.tex", [latex])
    _emit(payload, config.output_format, latex)


@cli.command()
@spec_option
@click.option("--sort", type=int, default=1, show_default=True, help="Equation component of the kernel")
@click.option("--terms", "n_terms", type=int, default=1, show_default=True, help="Volterra terms N")
@click.option("--tol", "tolerance", type=float, default=None, help="Slope tolerance")
@click.option("--nx", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None)
@format_option
@click.pass_context
@_handle_errors
def kernel(ctx: click.Context, **options: Any) -> None:
    """Build the parametrix of one sort, dump it and verify its scaling estimates."""
    config = _run_config(ctx, "kernel", **options)
    spec = _load_spec(config)
    if config.sort > spec.component_count:
        raise HypothesisViolation(f"spec has {spec.component_count} components, sort {config.sort} requested")
    component = spec.components[config.sort - 1]
    coefficients = OperatorCoefficients.from_expressions(component.a, component.b)
    space = TorusGrid(config.nx)
    parametrix = Parametrix(coefficients, space, load_settings().fourier_modes)
    report = kernel_report(parametrix, config.n_terms, config.tolerance, show_progress=ctx.obj["progress"])

    manager = OutputManager(config.out_dir)
    manager.prepare_run(config.run_id)
    volterra = parametrix.volterra(config.n_terms)
    rows = []
    for t in DUMP_TIMES:
        column = volterra.profile(t, space.points, 0.0)
        rows.extend((t, 0.0, float(x1), 0.0, 0.0, float(value)) for x1, value in zip(space.points, column))
        header = {"t": t, "alpha": volterra.alpha, "nx": space.nx, "a": component.a, "b": component.b, "nTerms": config.n_terms}
        manager.write_grid(config.run_id, f"kernel_t{t:g}.bin", volterra.matrix(t), header)
    manager.write_csv(config.run_id, "kernel.csv", rows)
    manager.write_metadata(config.run_id, "kernel_report.json", report)
    manager.write_report(config.run_id, "kernel_report.txt", report_lines(report))
    if config.output_format == "json":
        _emit(report, "json")
    else:
        ReportRenderer(verbose=True).render(report)


@cli.command()
@spec_option
@click.option("--character", type=click.Path(path_type=Path), default=None, help="Character JSON on B⁻")
@click.option("--bphz", is_flag=True, help="Renormalise with the BPHZ character")
@click.option("--terms", "n_terms", type=int, default=1, show_default=True)
@_with_options(grid_options)
@format_option
@click.pass_context
@_handle_errors
def model(ctx: click.Context, bphz: bool, **options: Any) -> None:
    """Evaluate Π^R on every basis tree, dump the grids and report the model bounds."""
    config = _run_config(ctx, "model", **options)
    spec = _load_spec(config)
    generated = generate_basis(spec, show_progress=ctx.obj["progress"])
    grid = _grid(config)
    noises = load_noises(config.noise, grid, spec.noise_count, config.seed)
    greens = green_kernels(spec, grid, config.n_terms, show_progress=ctx.obj["progress"])
    if bphz:
        character = bphz_character(generated, grid, [noises], greens, show_progress=ctx.obj["progress"])
    else:
        character = _character(config, grid)
    prep = from_character(character, generated.assignment, generated.minus()) if character.support else identity(generated.assignment)
    pair = ModelPair(grid, noises, greens, prep)
    evaluated = [tree for tree in generated if not trees.vanishes(tree)]

    manager = OutputManager(config.out_dir)
    manager.prepare_run(config.run_id)
    for index, tree in enumerate(evaluated):
        header = {"tree": tree.to_text(), "degree": str(generated.degree(tree)), **grid.as_dict()}
        manager.write_grid(config.run_id, f"pi_{index:03d}.bin", pair.pi(tree).evaluate(), header)
    points = [(grid.nt // 2, grid.nx // 2), (grid.nt // 4, grid.nx // 3)]
    checks = model_bound_report(pair, evaluated, points)
    report = {
        "manifest": pair.manifest(evaluated),
        "character": character.as_dict(),
        "checks": [check.as_dict() for check in checks],
        "passed": all(check.passed for check in checks),
        "noiseSup": [float(np.max(np.abs(noise.values))) for noise in noises],
    }
    manager.write_metadata(config.run_id, "model_manifest.json", report)
    manager.write_report(config.run_id, "model_report.txt", report_lines(report))
    if config.output_format == "json":
        _emit(report, "json")
    else:
        ReportRenderer(verbose=True).render(report)


if __name__ == "__main__":
    cli()
