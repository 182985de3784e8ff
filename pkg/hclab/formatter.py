"""Plain-text summaries of hclab reports.

Provides functions to render condition reports, i(Λ) bounds, disjointness
certificates, partitions, fits and verification reports into the short
human-readable blocks the CLI prints.
"""

from __future__ import annotations

from hclab.models import (
    ClassMembership,
    ConditionReport,
    DisjointnessCertificate,
    FitExport,
    ILambdaBounds,
    PartitionExport,
    VerificationReport,
)

# Number of violations / failing samples listed before the rest is summarized.
_MAX_LISTED = 5


# ---------------------------------------------------------------------------
# Internal helpers
# ---------------------------------------------------------------------------


def _heading(title: str) -> list[str]:
    return [f"=== {title} ===", ""]


def _field(label: str, value: object) -> str:
    """Left-aligned ``label: value`` line, values aligned at column 14."""
    return f"{label + ':':<14}{value}"


def _num(x: float) -> str:
    return f"{x:.6g}"


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def format_condition_report(report: ConditionReport) -> str:
    """Summarize a sequence condition check.

    Shows the verdict, thresholds, the last evidence value and, for claim
    checks, the first few violations.
    """
    lines = _heading(f"Condition {report.condition.value}")
    lines.append(_field("Verdict", report.verdict.value))
    if report.gap:
        lines.append(_field("Gap", _num(report.gap)))
    lines.append(_field("Truncation", report.truncation))
    for name, value in report.thresholds.items():
        lines.append(_field(name, _num(value)))
    if report.evidence:
        last = _num(report.evidence[-1])
        lines.append(_field("Evidence", f"{len(report.evidence)} values, last {last}"))
    if report.is_proof:
        lines.append(_field("Proof", "yes"))
    if report.note:
        lines.append("")
        lines.append(report.note)

    if report.violations:
        lines.append("")
        lines.append(f"Violations: {len(report.violations)}")
        for v in report.violations[:_MAX_LISTED]:
            where = f"block {v.block}" if v.block is not None else f"index {v.index}"
            lines.append(f"  - {v.check} at {where}: {_num(v.value)} vs bound {_num(v.bound)}")
        if len(report.violations) > _MAX_LISTED:
            lines.append(f"  ... {len(report.violations) - _MAX_LISTED} more")
    lines.append("")
    return "\n".join(lines)


def format_bounds(bounds: ILambdaBounds) -> str:
    lines = _heading("i(Lambda) bounds")
    lines.append(_field("Lower", _num(bounds.lower)))
    lines.append(_field("Upper", _num(bounds.upper)))
    lines.append(_field("Method", bounds.method))
    lines.append("")
    return "\n".join(lines)


def format_membership(result: ClassMembership) -> str:
    """One line per swept gap, then the two class verdicts."""
    lines = _heading("Class membership")
    for gap, c, sigma in zip(result.gaps, result.c_verdicts, result.sigma_verdicts, strict=True):
        lines.append(f"  gap={_num(gap):<8} C={c.value:<14} Sigma={sigma.value}")
    lines.append("")
    lines.append(_field("Class C", "yes" if result.satisfies_C else "no"))
    lines.append(_field("Class Sigma", "yes" if result.satisfies_sigma else "no"))
    if result.note:
        lines.append("")
        lines.append(result.note)
    lines.append("")
    return "\n".join(lines)


def format_partition(export: PartitionExport) -> str:
    """Summarize a partition: ``m``, ``m1``, ``σ_m`` and its point count."""
    lines = _heading(f"Partition m={export.m}")
    lines.append(_field("m1", export.m1))
    lines.append(_field("sigma", _num(export.sigma)))
    lines.append(_field("nu_m", export.nu_m))
    lines.append(_field("Period", f"{len(export.base) - 1} points"))
    if export.thetas:
        span = f"{_num(export.thetas[0])} .. {_num(export.thetas[-1])}"
        lines.append(_field("theta range", span))
    elif export.truncated:
        lines.append(_field("thetas", "omitted (use --full)"))
    lines.append("")
    return "\n".join(lines)


def format_certificate(cert: DisjointnessCertificate) -> str:
    """Summarize a disjointness certificate and its structural bounds."""
    lines = _heading("Disjointness")
    lines.append(_field("Verdict", cert.verdict))
    lines.append(_field("Disks", cert.num_disks))
    lines.append(_field("Min gap", _num(cert.min_gap)))
    lines.append(_field("Witness", f"{cert.witness[0]}, {cert.witness[1]}"))
    lines.append(_field("Method", f"{cert.method} ({'exact' if cert.exact else 'bounded'})"))

    diag = cert.diagnostics
    if diag.same_mu_min_distance is not None and diag.same_mu_bound is not None:
        lines.append(
            _field("Same mu", f"{_num(diag.same_mu_min_distance)} > {_num(diag.same_mu_bound)}")
        )
    if diag.cross_mu_min_radial_gap is not None and diag.cross_mu_bound is not None:
        lines.append(
            _field(
                "Cross mu",
                f"{_num(diag.cross_mu_min_radial_gap)} >= {_num(diag.cross_mu_bound)}",
            )
        )
    lines.append("")
    return "\n".join(lines)


def format_fit(fit: FitExport) -> str:
    """Summarize a polynomial fit and its degree search."""
    lines = _heading("Polynomial fit")
    lines.append(_field("Status", fit.status.value))
    lines.append(_field("Strategy", fit.strategy.value))
    lines.append(_field("Degree", fit.degree))
    lines.append(_field("Fit error", _num(fit.fit_error)))
    lines.append(_field("Target", _num(fit.target_error)))
    if fit.target_norm is not None:
        note = " (fit no better than f = 0)" if fit.vacuous else ""
        lines.append(_field("sup|h|", _num(fit.target_norm) + note))
    lines.append(
        _field("Disks", f"{fit.densely_sampled_disks} dense / {fit.validated_disks} validated")
    )
    if fit.degree_search:
        lines.append("")
        lines.append("Degree search:")
        for trial in fit.degree_search:
            lines.append(
                f"  d={trial.degree:<3} residual={_num(trial.residual)} "
                f"validation={_num(trial.validation_error)}"
            )
    lines.append("")
    return "\n".join(lines)


def format_verification(report: VerificationReport) -> str:
    """Summarize a verification report, listing the first failing samples."""
    mode = "oracle" if report.oracle_mode else "fitted"
    lines = _heading(f"Verification ({mode})")
    lines.append(_field("Verdict", report.verdict))
    lines.append(_field("m / m0 / m1", f"{report.m} / {report.m0} / {report.m1}"))
    lines.append(_field("nu_m", report.nu_m))
    lines.append(_field("Horizon", report.horizon))
    lines.append(_field("Samples", report.num_samples))
    lines.append(_field("Worst error", _num(report.worst_error)))
    lines.append(_field("Threshold", _num(report.threshold)))
    status = report.fit_status.value + (", vacuous" if report.fit_vacuous else "")
    lines.append(_field("Fit slack", f"{_num(report.fit_slack)} ({status})"))
    lines.append(_field("On C", f"{_num(report.c_error)} ({'pass' if report.c_pass else 'fail'})"))
    lines.append(_field("Digest", report.config_digest[:12] or "-"))

    failing = [s for s in report.samples if not s.passed]
    if failing:
        lines.append("")
        lines.append(f"Failing samples: {len(failing)}")
        for s in failing[:_MAX_LISTED]:
            lines.append(
                f"  - theta={_num(s.theta)} n={s.n} err={_num(s.err)} "
                f"margin={_num(s.margin)} [{s.status}]"
            )
        if len(failing) > _MAX_LISTED:
            lines.append(f"  ... {len(failing) - _MAX_LISTED} more")
    lines.append("")
    return "\n".join(lines)
