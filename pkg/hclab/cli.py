"""Typer CLI entry point for hclab.

Provides seven commands:

- ``gen-seq``: Generate a block sequence with a fixed cross-block ratio.
- ``check``: Run a sequence condition check (C, Sigma, liminf, classes, claims, i(Λ)).
- ``partition`` / ``disks`` / ``construct``: Run the construction up to a stage
  and write its artifacts.
- ``verify``: Verify a stored fit (or the exact target) on sampled arc points.
- ``pipeline``: Construction, fit and verification end to end.
"""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import replace
from enum import StrEnum
from pathlib import Path

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import Progress, SpinnerColumn, TextColumn

from hclab import artifacts, formatter, verify
from hclab.errors import HCLabError, ParameterError
from hclab.models import ClassMembership, ConditionReport, ILambdaBounds, RunConfig
from hclab.sequences import (
    DEFAULT_CLASS_GAPS,
    Sequence,
    check_condition_C,
    check_condition_Sigma,
    check_liminf_ratio,
    classify,
    empirical_i_lambda,
    generate_prop51_sequence,
    i_lambda_bounds,
    parse_generator_formula,
    regenerate,
    sequence_from_formula,
    verify_claims,
)

app = typer.Typer(
    name="hclab",
    help="Certified numerical constructions for common hypercyclic translation operators.",
    add_completion=False,
)

# Ensure UTF-8 console output on Windows (prevents cp1252 encoding errors)
if hasattr(sys.stdout, "reconfigure"):
    sys.stdout.reconfigure(encoding="utf-8")

_console = Console()

# Exit codes: 1 for construction and verification failures, 2 for bad input.
_EXIT_FAILURE = 1
_EXIT_USAGE = 2


class CheckMode(StrEnum):
    """Which sequence check ``check`` runs."""

    C = "C"
    sigma = "sigma"
    liminf = "liminf"
    claims = "claims"
    ilambda = "ilambda"
    classes = "classes"


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _describe_validation(exc: ValidationError) -> str:
    """One ``dotted.path: message`` entry per validation error."""
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        parts.append(f"{loc}: {err['msg']}" if loc else err["msg"])
    return "; ".join(parts)


@contextmanager
def _handle_errors() -> Iterator[None]:
    """Map hclab and config errors onto ``Error: ...`` lines and exit codes."""
    try:
        yield
    except ParameterError as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(_EXIT_USAGE)
    except ValidationError as exc:
        typer.echo(f"Error: invalid configuration: {_describe_validation(exc)}", err=True)
        raise typer.Exit(_EXIT_USAGE)
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(_EXIT_USAGE)
    except HCLabError as exc:
        where = f" in stage '{exc.stage}'" if exc.stage else ""
        typer.echo(f"Error{where}: {exc}", err=True)
        raise typer.Exit(_EXIT_FAILURE)


def _load(config_path: Path, m: int | None = None) -> tuple[RunConfig, Sequence]:
    """Load a run configuration (optionally overriding ``m``) and its sequence."""
    cfg = artifacts.load_config(config_path)
    if m is not None:
        construction = cfg.construction.model_copy(update={"m": m})
        cfg = cfg.model_copy(update={"construction": construction})
    seq = artifacts.sequence_from_source(cfg.sequence, config_path.parent)
    return cfg, seq


def _parse_gaps(raw: str | None) -> tuple[float, ...]:
    """Gaps for ``--mode classes``; the default sweep when *raw* is empty."""
    if not raw:
        return DEFAULT_CLASS_GAPS
    try:
        return tuple(float(part) for part in raw.split(","))
    except ValueError as exc:
        raise ParameterError(f"--gaps must be comma-separated numbers, got {raw!r}") from exc


def _spinner(description: str) -> Progress:
    progress = Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=_console,
        transient=True,
    )
    progress.add_task(description, total=None)
    return progress


def _output_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# gen-seq command
# ---------------------------------------------------------------------------


@app.command("gen-seq")
def gen_seq(
    ratio: float = typer.Option(..., "--M", help="Cross-block ratio M (> 1)."),
    blocks: int = typer.Option(6, "--blocks", help="Number of blocks (>= 2)."),
    out: Path = typer.Option(..., "--out", "-o", help="Sequence file to write."),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logging."),
) -> None:
    """Generate a block sequence whose ratio across block boundaries is exactly M."""
    _configure_logging(verbose)
    with _handle_errors():
        gen = generate_prop51_sequence(ratio, blocks)
        artifacts.save_sequence(out, gen.enumeration)

    head = ", ".join(f"{v:g}" for v in gen.values[:8])
    _console.print(f"[green]Wrote {len(gen.enumeration)} terms to {out}[/green]")
    typer.echo(f"Blocks: {gen.num_blocks}  first terms: {head}")


# ---------------------------------------------------------------------------
# check command
# ---------------------------------------------------------------------------


@app.command()
def check(
    in_path: Path | None = typer.Option(None, "--in", help="Sequence file to check."),
    formula: str | None = typer.Option(None, "--formula", help="Formula in n, e.g. 'n^2'."),
    length: int = typer.Option(20000, "--length", help="Terms generated from --formula.", min=2),
    mode: CheckMode = typer.Option(CheckMode.C, "--mode", help="Which check to run."),
    gap: float | None = typer.Option(None, "--gap", help="Gap for the C and sigma checks."),
    gaps: str | None = typer.Option(
        None, "--gaps", help="Comma-separated gaps swept by --mode classes."
    ),
    truncation: int | None = typer.Option(
        None, "--truncation", help="Terms examined (defaults to the stored length)."
    ),
    threshold: float | None = typer.Option(
        None, "--threshold", help="Override the growth (C) or scaled sum (sigma) threshold."
    ),
    analytic: bool = typer.Option(
        False, "--analytic", help="Allow a symbolic proof for formula sequences."
    ),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write the report as JSON."),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logging."),
) -> None:
    """Check a sequence for the divergence conditions or the generated-sequence claims."""
    _configure_logging(verbose)
    if (in_path is None) == (formula is None):
        typer.echo("Error: give exactly one of --in and --formula.", err=True)
        raise typer.Exit(_EXIT_USAGE)
    if mode in (CheckMode.C, CheckMode.sigma) and gap is None:
        typer.echo(f"Error: --gap is required for --mode {mode.value}.", err=True)
        raise typer.Exit(_EXIT_USAGE)

    with _handle_errors():
        if in_path is not None:
            seq = artifacts.load_sequence(in_path)
        else:
            assert formula is not None
            seq = sequence_from_formula(formula, length)
        N = len(seq) if truncation is None else truncation

        record: ConditionReport | ILambdaBounds | ClassMembership
        if mode is CheckMode.C:
            assert gap is not None
            limit = 5.0 if threshold is None else threshold
            record = check_condition_C(seq, gap, N, limit, allow_analytic=analytic)
        elif mode is CheckMode.sigma:
            assert gap is not None
            limit = 2.0 if threshold is None else threshold
            record = check_condition_Sigma(seq, gap, N, limit, allow_analytic=analytic)
        elif mode is CheckMode.liminf:
            record = check_liminf_ratio(seq, N)
        elif mode is CheckMode.classes:
            record = classify(seq, _parse_gaps(gaps), N, allow_analytic=analytic)
        elif mode is CheckMode.claims:
            record = verify_claims(regenerate(seq), truncation)
        elif parse_generator_formula(seq.formula) is not None:
            record = i_lambda_bounds(regenerate(seq))
        else:
            record = empirical_i_lambda(seq)
        options = {
            "mode": mode.value,
            "gap": gap,
            "gaps": gaps,
            "truncation": truncation,
            "threshold": threshold,
            "analytic": analytic,
        }
        record = record.model_copy(update={"config_digest": artifacts.check_digest(seq, options)})

    if isinstance(record, ConditionReport):
        typer.echo(formatter.format_condition_report(record))
    elif isinstance(record, ClassMembership):
        typer.echo(formatter.format_membership(record))
    else:
        typer.echo(formatter.format_bounds(record))
    if out is not None:
        artifacts.save_model(out, record)
        _console.print(f"[green]Report written to {out}[/green]")


# ---------------------------------------------------------------------------
# Construction stages
# ---------------------------------------------------------------------------


@app.command()
def partition(
    config: Path = typer.Option(..., "--config", "-c", help="Run configuration (JSON)."),
    m: int | None = typer.Option(None, "--m", help="Partition index (defaults to m0).", min=1),
    full: bool = typer.Option(False, "--full", help="List every partition point."),
    points: int = typer.Option(0, "--points", help="Arc points to include.", min=0),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logging."),
) -> None:
    """Build the partition of the arc and write partition.json."""
    _configure_logging(verbose)
    with _handle_errors():
        cfg, seq = _load(config, m)
        spec = artifacts.target_from_config(cfg)
        with _spinner("Building partition…"):
            stage = verify.build_partition_stage(seq, spec, cfg.construction)

    export = stage.partition.export(full=full)
    path = artifacts.save_model(_output_dir(cfg) / artifacts.PARTITION_FILE, export)
    typer.echo(formatter.format_partition(export))
    _console.print(f"[green]Partition written to {path}[/green]")
    if points:
        records = stage.points.records(points)
        path = artifacts.save_arc_points(_output_dir(cfg) / artifacts.ARC_POINTS_FILE, records)
        _console.print(f"[green]{len(records)} arc points written to {path}[/green]")


@app.command()
def disks(
    config: Path = typer.Option(..., "--config", "-c", help="Run configuration (JSON)."),
    m: int | None = typer.Option(None, "--m", help="Partition index (defaults to m0).", min=1),
    emit_plot_data: bool = typer.Option(
        False, "--emit-plot-data", help="Also write disk centres as CSV."
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logging."),
) -> None:
    """Build the disk family, certify disjointness and write disks.json."""
    _configure_logging(verbose)
    with _handle_errors():
        cfg, seq = _load(config, m)
        spec = artifacts.target_from_config(cfg)
        with _spinner("Building disks…"):
            stage = verify.build_partition_stage(seq, spec, cfg.construction)
            family = verify.build_family(stage)

    assert family.certificate is not None
    out = _output_dir(cfg)
    artifacts.save_model(out / artifacts.CERTIFICATE_FILE, family.certificate)
    if emit_plot_data:
        artifacts.write_centers_csv(out / artifacts.CENTERS_CSV, family)
    typer.echo(formatter.format_certificate(family.certificate))
    if family.certificate.verdict != "pass":
        raise typer.Exit(_EXIT_FAILURE)


@app.command()
def construct(
    config: Path = typer.Option(..., "--config", "-c", help="Run configuration (JSON)."),
    m: int | None = typer.Option(None, "--m", help="Partition index (defaults to m0).", min=1),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logging."),
) -> None:
    """Build the construction through the polynomial fit and write fit.json."""
    _configure_logging(verbose)
    with _handle_errors():
        cfg, seq = _load(config, m)
        spec = artifacts.target_from_config(cfg)
        with _spinner("Constructing and fitting…"):
            ctx = verify.build_context(seq, spec, cfg.construction, cfg.fit)

    assert ctx.fit is not None and ctx.family.certificate is not None
    out = _output_dir(cfg)
    artifacts.save_model(out / artifacts.PARTITION_FILE, ctx.partition.export())
    artifacts.save_model(out / artifacts.CERTIFICATE_FILE, ctx.family.certificate)
    artifacts.save_fit(out / artifacts.FIT_FILE, ctx.fit, artifacts.fit_digest(cfg))
    typer.echo(formatter.format_fit(ctx.fit.export()))
    _console.print(f"[green]Artifacts written to {out}[/green]")


# ---------------------------------------------------------------------------
# verify / pipeline commands
# ---------------------------------------------------------------------------


def _write_report(
    cfg: RunConfig, ctx: verify.ConstructionContext, oracle_mode: bool, emit_plot_data: bool
) -> None:
    """Verify *ctx*, write report.json (and CSVs), print the summary, exit on failure."""
    options = cfg.verification
    with _handle_errors():
        with _spinner(f"Verifying {options.num_samples} samples…"):
            report = verify.verify_context(
                ctx,
                options.num_samples,
                options.seed,
                oracle_mode=oracle_mode,
                adversarial_fraction=options.adversarial_fraction,
                config_digest=artifacts.config_digest(cfg),
            )

    out = _output_dir(cfg)
    artifacts.save_model(out / artifacts.REPORT_FILE, report)
    if emit_plot_data:
        artifacts.write_samples_csv(out / artifacts.SAMPLES_CSV, report)
        artifacts.write_centers_csv(out / artifacts.CENTERS_CSV, ctx.family)
    typer.echo(formatter.format_verification(report))
    _console.print(f"[green]Report written to {out / artifacts.REPORT_FILE}[/green]")
    if report.verdict != "pass":
        raise typer.Exit(_EXIT_FAILURE)


@app.command(name="verify")
def verify_cmd(
    config: Path = typer.Option(..., "--config", "-c", help="Run configuration (JSON)."),
    m: int | None = typer.Option(None, "--m", help="Partition index the fit was built for.", min=1),
    fit: Path | None = typer.Option(
        None, "--fit", help="Fit file (defaults to fit.json in the output directory)."
    ),
    oracle_mode: bool = typer.Option(
        False, "--oracle-mode", help="Use the exact piecewise target instead of a fit."
    ),
    emit_plot_data: bool = typer.Option(
        False, "--emit-plot-data", help="Also write samples and disk centres as CSV."
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logging."),
) -> None:
    """Verify a stored fit on sampled arc points and write report.json."""
    _configure_logging(verbose)
    with _handle_errors():
        cfg, seq = _load(config, m)
        oracle = oracle_mode or cfg.verification.oracle_mode
        spec = artifacts.target_from_config(cfg)
        stored = None
        if not oracle:
            stored = artifacts.load_fit(
                fit or Path(cfg.output.dir) / artifacts.FIT_FILE,
                expected_digest=artifacts.fit_digest(cfg),
            )
        with _spinner("Rebuilding the construction…"):
            ctx = verify.build_context(seq, spec, cfg.construction, with_fit=False)
        ctx = replace(ctx, fit=stored)
    _write_report(cfg, ctx, oracle, emit_plot_data)


@app.command()
def pipeline(
    config: Path = typer.Option(..., "--config", "-c", help="Run configuration (JSON)."),
    oracle_mode: bool = typer.Option(
        False, "--oracle-mode", help="Use the exact piecewise target instead of a fit."
    ),
    emit_plot_data: bool = typer.Option(
        False, "--emit-plot-data", help="Also write samples and disk centres as CSV."
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logging."),
) -> None:
    """Construct, fit and verify in one run; writes every artifact."""
    _configure_logging(verbose)
    with _handle_errors():
        cfg, seq = _load(config)
        oracle = oracle_mode or cfg.verification.oracle_mode
        spec = artifacts.target_from_config(cfg)
        _console.print(f"[cyan]Sequence:[/cyan] {len(seq)} terms ({seq.provenance.value})")
        with _spinner("Constructing…"):
            ctx = verify.build_context(seq, spec, cfg.construction, cfg.fit, with_fit=not oracle)

    out = _output_dir(cfg)
    assert ctx.family.certificate is not None
    artifacts.save_model(out / artifacts.PARTITION_FILE, ctx.partition.export())
    artifacts.save_model(out / artifacts.CERTIFICATE_FILE, ctx.family.certificate)
    _console.print(
        f"[cyan]m={ctx.m} (m0={ctx.m0}), {len(ctx.family) - 1} translated disks, "
        f"min gap {ctx.family.certificate.min_gap:.4g}[/cyan]"
    )
    if ctx.fit is not None:
        artifacts.save_fit(out / artifacts.FIT_FILE, ctx.fit, artifacts.fit_digest(cfg))
        typer.echo(formatter.format_fit(ctx.fit.export()))
    _write_report(cfg, ctx, oracle, emit_plot_data)
