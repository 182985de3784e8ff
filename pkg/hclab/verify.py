"""Dense-sample verification of the approximation inequality on the arc.

For a sampled ``a`` with bracket point ``w_0`` the fitted ``f`` must satisfy
``sup_{|z| ≤ k1} |f(z + a μ(w_0)) - p(z)| < 1/s1``. Each sample also records
the two terms of the triangle inequality that bounds this error: the fit
error on ``B_{w_0}`` and the oscillation of ``p`` over the shift
``μ(w_0)(a - w_0)``.
"""

from __future__ import annotations

import logging
import math
import os
from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt

from hclab.approx import (
    FittedPolynomial,
    PiecewiseTarget,
    TargetSpec,
    build_target,
    choose_delta0,
    enumerate_dense_polynomials,
    fit_polynomial,
)
from hclab.disks import DiskFamily, build_disks, check_disjoint
from hclab.errors import (
    DomainError,
    HCLabError,
    ParameterError,
    PreconditionError,
    tag_stage,
)
from hclab.models import (
    ConstructionParams,
    ConstructionSection,
    FitSection,
    FitStatus,
    LocateResult,
    MembershipResult,
    SampleRecord,
    VerificationReport,
    from_pair,
    to_pair,
)
from hclab.partition import (
    ArcPoints,
    Partition,
    arc_points,
    build_partition,
    compute_m0,
    derive_constants,
    locate,
)
from hclab.sequences import ComplexArray, GapSubsequence, Sequence, extract_gap_subsequence

logger = logging.getLogger(__name__)

THREADS_ENV = "HCLAB_THREADS"

# Offset from a bracket's right end, as a fraction of the bracket width.
_RIGHT_END_FRACTION = 1e-3


def worker_count() -> int:
    """Worker threads for per-sample checks, capped by ``HCLAB_THREADS``."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return max(1, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc


def z_grid(k: float, boundary: int = 128) -> ComplexArray:
    """Points of ``{|z| ≤ k}``: circles ``|z| = k`` and ``k/2``, an interior lattice and 0."""
    angles = 2.0 * np.pi * np.arange(boundary) / boundary
    outer = k * np.exp(1j * angles)
    inner = 0.5 * k * np.exp(1j * angles[::2])
    axis = np.linspace(-k, k, 9)
    lattice = (axis[:, None] + 1j * axis[None, :]).ravel()
    lattice = lattice[(np.abs(lattice) < k) & (lattice != 0)]
    return np.concatenate((outer, inner, lattice, [0j]))


# ---------------------------------------------------------------------------
# Construction context
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstructionContext:
    """Everything built for one ``(Λ, m)``: constants, partition, disks, target and fit."""

    seq: Sequence
    spec: TargetSpec
    params: ConstructionParams
    sub: GapSubsequence
    m0: int
    partition: Partition
    points: ArcPoints
    family: DiskFamily
    target: PiecewiseTarget
    fit: FittedPolynomial | None = None

    @property
    def m(self) -> int:
        return self.partition.m

    @property
    def horizon(self) -> int:
        """Largest ``n`` with ``λ_n = μ(w)`` for some arc point ``w``; independent of ``a``."""
        return int(self.points.parent_index.max())

    def threshold(self, oracle: bool) -> float:
        """Pass threshold: ``1/(2 s1)`` for the exact target, else by fit status."""
        s1 = self.params.s1
        if oracle:
            return 1.0 / (2 * s1)
        if self.fit is None:
            raise PreconditionError("no fitted polynomial in the construction context")
        if self.fit.status is FitStatus.met:
            return 1.0 / s1
        return 1.0 / (2 * s1) + 2.0 * self.fit.fit_error


@contextmanager
def _stage(name: str) -> Iterator[None]:
    logger.debug("stage %s", name)
    try:
        yield
    except HCLabError as exc:
        tag_stage(exc, name)
        raise


def resolve_params(spec: TargetSpec, construction: ConstructionSection) -> ConstructionParams:
    """Derive the constants, choosing ``δ0`` from ``p`` when it is ``"auto"``."""
    delta0 = construction.delta0
    if delta0 == "auto":
        delta0 = choose_delta0(spec.p, construction.R1, construction.s1)
    return derive_constants(
        construction.r0, construction.theta0, construction.theta_T, construction.R1,
        float(delta0), construction.s1, construction.k1, construction.eps0,
    )


@dataclass(frozen=True)
class PartitionStage:
    """Constants, gap subsequence, ``m0`` and the partition with its arc points."""

    params: ConstructionParams
    sub: GapSubsequence
    m0: int
    partition: Partition
    points: ArcPoints


def build_partition_stage(
    seq: Sequence, spec: TargetSpec, construction: ConstructionSection
) -> PartitionStage:
    """Run the stages up to the partition; ``m`` defaults to ``m0``.

    Raises:
        PreconditionError: If the configured ``m`` is below ``m0``.
    """
    with _stage("constants"):
        params = resolve_params(spec, construction)
    with _stage("extract"):
        sub = extract_gap_subsequence(seq, params.c1)
    with _stage("m0"):
        m0 = compute_m0(sub, params, construction.truncation, margin=construction.m0_margin)
        params = params.with_m0(m0)
    m = m0 if construction.m is None else construction.m
    with _stage("partition"):
        if m < m0:
            raise PreconditionError(f"m={m} is below m0={m0}")
        partition = build_partition(m, sub, params)
        points = arc_points(partition, sub, params)
    return PartitionStage(params, sub, m0, partition, points)


def build_family(stage: PartitionStage) -> DiskFamily:
    """Build the disks of a partition stage and attach their disjointness certificate."""
    with _stage("disks"):
        family = build_disks(stage.points, stage.params)
        return family.with_certificate(check_disjoint(family))


def build_context(
    seq: Sequence,
    spec: TargetSpec,
    construction: ConstructionSection,
    fit_options: FitSection | None = None,
    *,
    with_fit: bool = True,
) -> ConstructionContext:
    """Run every construction stage for *seq* and return the context.

    ``m`` defaults to the prefix-certified ``m0``. Errors raised by a stage
    carry its name in ``stage``.
    """
    stage = build_partition_stage(seq, spec, construction)
    params = stage.params
    family = build_family(stage)
    with _stage("target"):
        target = build_target(family, spec.g, spec.p)
    fit = None
    if with_fit:
        options = fit_options or FitSection()
        with _stage("fit"):
            fit = fit_polynomial(
                target, params.target_error, options.degree_cap, options.sampling,
                strategy=options.strategy, jet_order=options.jet_order,
            )
    logger.debug(
        "Context ready: m=%d m0=%d nu_m=%d", stage.partition.m, stage.m0, stage.partition.nu_m
    )
    return ConstructionContext(
        seq, spec, params, stage.sub, stage.m0, stage.partition, stage.points, family, target, fit
    )


# ---------------------------------------------------------------------------
# Per-sample checks
# ---------------------------------------------------------------------------


def check_containment(a: complex, loc: LocateResult, params: ConstructionParams) -> float:
    """Margin ``δ0 - |μ(w_0)| |a - w_0|``.

    A positive margin puts ``z + a μ(w_0)`` inside ``B_{w_0}`` for every ``|z| ≤ R1``.
    """
    mu = from_pair(loc.mu_w0)
    return params.delta0 - abs(mu) * abs(complex(a) - from_pair(loc.w0))


def check_sample(
    a: complex,
    f: FittedPolynomial | None,
    ctx: ConstructionContext,
    *,
    oracle: bool = False,
    grid: ComplexArray | None = None,
) -> SampleRecord:
    """Measure ``sup_{|z| ≤ k1} |f(z + a μ(w_0)) - p(z)|`` for one sample.

    With ``oracle`` the exact target ``h`` stands in for ``f``. A non-positive
    containment margin gives a ``construction-failure`` record.
    """
    params = ctx.params
    loc = locate(a, ctx.partition, params)
    margin = check_containment(a, loc, params)
    z = z_grid(params.k1) if grid is None else grid
    mu = from_pair(loc.mu_w0)
    w0 = from_pair(loc.w0)
    p = ctx.spec.p
    shift = complex(a) * mu
    drift = mu * (complex(a) - w0)

    p_z = p(z)
    p_drift = p(z + drift)
    status: Literal["ok", "construction-failure"] = "ok" if margin > 0 else "construction-failure"
    if oracle:
        try:
            approx = ctx.target.evaluate(z + shift)
        except DomainError:
            approx = p_drift
            status = "construction-failure"
    else:
        if f is None:
            raise PreconditionError("check_sample needs a fitted polynomial outside oracle mode")
        approx = f(z + shift)

    err = float(np.max(np.abs(approx - p_z)))
    term1 = float(np.max(np.abs(approx - p_drift)))
    term2 = float(np.max(np.abs(p_drift - p_z)))
    threshold = ctx.threshold(oracle)
    return SampleRecord(
        a=to_pair(a),
        theta=loc.theta,
        rho=loc.rho,
        w0=loc.w0,
        n=loc.parent_index,
        margin=margin,
        err=err,
        term1=term1,
        term2=term2,
        threshold=threshold,
        passed=status == "ok" and err < threshold,
        status=status,
    )


def sample_arc(
    partition: Partition,
    params: ConstructionParams,
    num_samples: int,
    seed: int,
    adversarial_fraction: float = 0.5,
) -> npt.NDArray[np.float64]:
    """Arc parameters to check: uniform draws plus an adversarial set.

    The adversarial share cycles through partition points, bracket midpoints,
    points just left of a bracket's right end and ``θ_T``, spread evenly over
    the partition.
    """
    if num_samples < 1:
        raise ParameterError(f"num_samples must be positive, got {num_samples}")
    adversarial = int(adversarial_fraction * num_samples)
    rng = np.random.default_rng(seed)
    uniform = rng.uniform(params.theta0, params.theta_T, num_samples - adversarial)
    if adversarial == 0:
        return uniform

    kinds = np.arange(adversarial) % 4
    nu = np.linspace(0, partition.nu_m, adversarial).round().astype(np.int64)
    left = partition.thetas[nu]
    right = np.where(
        nu < partition.nu_m,
        partition.thetas[np.minimum(nu + 1, partition.nu_m)],
        params.theta_T,
    )
    width = right - left
    special = np.select(
        [kinds == 0, kinds == 1, kinds == 2],
        [left, left + 0.5 * width, right - _RIGHT_END_FRACTION * width],
        default=params.theta_T,
    )
    return np.concatenate((uniform, special))


def check_equation_on_c(
    f: FittedPolynomial | None, ctx: ConstructionContext, *, oracle: bool = False
) -> float:
    """``sup_{z ∈ C} |f(z) - g(z)|`` over the stored samples of ``C``."""
    samples = ctx.spec.c_samples
    if samples.size == 0:
        return 0.0
    approx = ctx.target.evaluate(samples) if oracle or f is None else f(samples)
    return float(np.max(np.abs(approx - ctx.spec.g(samples))))


def verify_context(
    ctx: ConstructionContext,
    num_samples: int = 1000,
    seed: int = 0,
    *,
    oracle_mode: bool = False,
    adversarial_fraction: float = 0.5,
    config_digest: str = "",
) -> VerificationReport:
    """Check sampled arc points against the context's fit (or ``h`` in oracle mode)."""
    with _stage("verify"):
        return _verify(ctx, num_samples, seed, oracle_mode, adversarial_fraction, config_digest)


def _verify(
    ctx: ConstructionContext,
    num_samples: int,
    seed: int,
    oracle_mode: bool,
    adversarial_fraction: float,
    config_digest: str,
) -> VerificationReport:
    if not oracle_mode and ctx.fit is None:
        raise PreconditionError("verification needs a fitted polynomial unless oracle mode is on")
    params = ctx.params
    thetas = sample_arc(ctx.partition, params, num_samples, seed, adversarial_fraction)
    samples = params.r0 * np.exp(2j * np.pi * thetas)
    grid = z_grid(params.k1)
    # Build the lookup tables once before the workers share them.
    ctx.family.locate_many([0j])

    def one(a: complex) -> SampleRecord:
        return check_sample(a, ctx.fit, ctx, oracle=oracle_mode, grid=grid)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        records = list(pool.map(one, samples.tolist()))

    fit_slack = 0.0 if oracle_mode or ctx.fit is None else ctx.fit.fit_error
    fit_status = FitStatus.met if oracle_mode or ctx.fit is None else ctx.fit.status
    fit_vacuous = not oracle_mode and ctx.fit is not None and ctx.fit.vacuous
    if fit_vacuous:
        logger.warning(
            "The fit does no better than f = 0; any pass rests on the slack threshold %.3g",
            ctx.threshold(oracle_mode),
        )
    c_error = check_equation_on_c(ctx.fit, ctx, oracle=oracle_mode)
    verdict: Literal["pass", "fail"] = "pass" if all(r.passed for r in records) else "fail"
    worst = max(r.err for r in records)
    failures = sum(not r.passed for r in records)
    if failures:
        logger.warning("%d of %d samples failed", failures, len(records))
    return VerificationReport(
        config_digest=config_digest,
        m=ctx.m,
        m0=ctx.m0,
        m1=ctx.partition.m1,
        nu_m=ctx.partition.nu_m,
        horizon=ctx.horizon,
        num_samples=len(records),
        worst_error=worst,
        fit_slack=fit_slack,
        fit_status=fit_status,
        oracle_mode=oracle_mode,
        fit_vacuous=fit_vacuous,
        threshold=ctx.threshold(oracle_mode),
        c_error=c_error,
        c_pass=c_error < params.eps0 + fit_slack,
        verdict=verdict,
        samples=records,
    )


def run_experiment(
    seq: Sequence,
    spec: TargetSpec,
    m: int | None = None,
    num_samples: int = 1000,
    seed: int = 0,
    *,
    construction: ConstructionSection,
    fit_options: FitSection | None = None,
    oracle_mode: bool = False,
    adversarial_fraction: float = 0.5,
    config_digest: str = "",
) -> VerificationReport:
    """Full pipeline: construct for ``m`` (default ``m0``), fit, then verify samples.

    Raises:
        PreconditionError: If ``m`` is below the prefix-certified ``m0``.
    """
    if m is not None:
        construction = construction.model_copy(update={"m": m})
    ctx = build_context(seq, spec, construction, fit_options, with_fit=not oracle_mode)
    return verify_context(
        ctx, num_samples, seed, oracle_mode=oracle_mode,
        adversarial_fraction=adversarial_fraction, config_digest=config_digest,
    )


# ---------------------------------------------------------------------------
# E(m, j, s, k)
# ---------------------------------------------------------------------------


def check_E_membership(
    f: Callable[[ComplexArray], ComplexArray],
    m: int,
    j: int,
    s: int,
    k: int,
    seq: Sequence,
    arc_samples: npt.ArrayLike,
) -> MembershipResult:
    """Whether each sample ``a`` has ``n ≤ m`` with ``sup_{|z|≤k} |f(z + λ_n a) - p_j| < 1/s``.

    For each sample the ``n`` minimizing the sup is searched branch-and-bound:
    ``|f(λ_n a) - p_j(0)|`` is a lower bound for the sup, so candidates are
    visited in increasing order of that bound until it exceeds the best sup.
    """
    if s < 1 or k < 1:
        raise ParameterError(f"s and k must be positive integers, got s={s}, k={k}")
    p_j = enumerate_dense_polynomials(j)
    threshold = 1.0 / s
    samples = np.atleast_1d(np.asarray(arc_samples, dtype=np.complex128))
    limit = min(m, len(seq))
    if limit < 1:
        return MembershipResult(
            member=False, threshold=threshold, witnesses=[None] * samples.size,
            errors=[math.inf] * samples.size,
        )

    lam = seq.terms[:limit]
    grid = z_grid(k)
    p_grid = p_j(grid)
    p_zero = complex(p_j(0j))
    witnesses: list[int | None] = []
    errors: list[float] = []
    for a in samples:
        lower = np.abs(f(lam * a) - p_zero)
        best_err, best_n = math.inf, None
        for idx in np.argsort(lower, kind="stable"):
            if lower[idx] >= best_err:
                break
            err = float(np.max(np.abs(f(grid + lam[idx] * a) - p_grid)))
            if err < best_err:
                best_err, best_n = err, int(idx) + 1
        witnesses.append(best_n)
        errors.append(best_err)
    member = all(e < threshold for e in errors)
    return MembershipResult(member=member, threshold=threshold, witnesses=witnesses, errors=errors)
