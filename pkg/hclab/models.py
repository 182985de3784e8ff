"""Pydantic v2 models for hclab parameters, certificates, reports and run configs.

Array-valued domain objects (sequences, partitions, disk families, fits) are
frozen dataclasses in their own modules; everything that is scalar, serialized
or user-configured lives here.
"""

from __future__ import annotations

import math
from datetime import datetime
from enum import StrEnum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# A complex number as serialized everywhere: [re, im].
Pair = tuple[float, float]

# Length (in turns) of the arc handled by one construction.
ARC_LENGTH = 0.25
_ARC_TOL = 1e-12


def to_pair(z: complex) -> Pair:
    """Serialize a complex number as ``(re, im)``."""
    z = complex(z)
    return (z.real, z.imag)


def from_pair(pair: Pair | list[float]) -> complex:
    """Inverse of :func:`to_pair`."""
    return complex(float(pair[0]), float(pair[1]))


# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------


class Provenance(StrEnum):
    """Where a sequence came from."""

    user = "user-supplied"
    generated = "generated"
    formula = "formula"


class ConditionKind(StrEnum):
    """Which property a :class:`ConditionReport` is about."""

    C = "C"
    sigma = "Sigma"
    liminf = "liminf-ratio"
    claims = "prop51-claims"


class Verdict(StrEnum):
    """Outcome of a condition check on a finite prefix."""

    passes_proxy = "passes-proxy"
    fails_proxy = "fails-proxy"
    provably_fails = "provably-fails"
    analytic_pass = "analytic-pass"


class FitStatus(StrEnum):
    """Whether a fitted polynomial met its target error."""

    met = "met"
    target_missed = "target-missed"


class FitStrategy(StrEnum):
    """How the polynomial surrogate is computed."""

    lstsq = "lstsq"
    hermite_jets = "hermite-jets"


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------


class SequenceFile(BaseModel):
    """On-disk representation of a sequence."""

    model_config = ConfigDict(frozen=True)

    provenance: Provenance
    terms: list[Pair]
    formula: str | None = None


class ClaimViolation(BaseModel):
    """One failed inequality found while verifying a generated sequence."""

    model_config = ConfigDict(frozen=True)

    check: str
    block: int | None = None
    index: int | None = None
    value: float
    bound: float
    detail: str = ""


class ConditionReport(BaseModel):
    """Finite-truncation evidence for condition (C), (Σ), the ratio criterion or the claims.

    Verdicts other than ``analytic-pass`` are proxies computed on a stored
    prefix and never a proof.
    """

    model_config = ConfigDict(frozen=True)

    condition: ConditionKind
    gap: float
    truncation: int = Field(..., ge=1)
    evidence: list[float] = Field(default_factory=list)
    verdict: Verdict
    thresholds: dict[str, float] = Field(default_factory=dict)
    checkpoints: list[float] = Field(default_factory=list)
    diagnostics: dict[str, list[float]] = Field(default_factory=dict)
    violations: list[ClaimViolation] = Field(default_factory=list)
    note: str = ""
    is_proof: bool = False
    config_digest: str = ""

    @model_validator(mode="after")
    def _evidence_fits_truncation(self) -> ConditionReport:
        if len(self.evidence) > self.truncation:
            raise ValueError(
                f"evidence has {len(self.evidence)} entries, more than truncation "
                f"{self.truncation}"
            )
        return self


class ClassMembership(BaseModel):
    """Proxy membership in the classes of sequences satisfying (Σ) and (C).

    Both conditions quantify over every gap; a sequence counts as a member
    when every swept gap passes. Σ-divergence makes every tail sum infinite,
    so a gap that passes (Σ) also counts for (C).
    """

    model_config = ConfigDict(frozen=True)

    gaps: list[float] = Field(..., min_length=1)
    truncation: int = Field(..., ge=1)
    c_verdicts: list[Verdict]
    sigma_verdicts: list[Verdict]
    satisfies_C: bool
    satisfies_sigma: bool
    is_proof: bool = False
    note: str = ""
    config_digest: str = ""

    @model_validator(mode="after")
    def _one_verdict_per_gap(self) -> ClassMembership:
        if not len(self.c_verdicts) == len(self.sigma_verdicts) == len(self.gaps):
            raise ValueError("need one C and one Sigma verdict per gap")
        if self.satisfies_sigma and not self.satisfies_C:
            raise ValueError("a sequence satisfying (Σ) also satisfies (C)")
        return self


class ILambdaBounds(BaseModel):
    """Bounds on i(Λ), the infimum of limsup consecutive ratios over subsequences."""

    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float
    method: Literal["structural", "empirical"]
    config_digest: str = ""

    @model_validator(mode="after")
    def _ordered(self) -> ILambdaBounds:
        if self.lower < 1.0 - 1e-12 or self.upper < 1.0 - 1e-12:
            raise ValueError("i(Λ) bounds must be at least 1")
        if self.lower > self.upper * (1.0 + 1e-12):
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        return self


# ---------------------------------------------------------------------------
# Construction parameters
# ---------------------------------------------------------------------------


class ConstructionParams(BaseModel):
    """Fixed numbers of the construction and the four derived constants.

    ``c4 = R1 + delta0``, ``c2 = delta0 / (2 (2 pi r0 + 1))``,
    ``c3 = c4 / (r0 c2)``, ``c1 = 4 (c3 + 1)``. ``m0`` is unset until a gap
    subsequence has been bound to the parameters.
    """

    model_config = ConfigDict(frozen=True)

    r0: float = Field(..., gt=0)
    theta0: float = Field(..., ge=0)
    theta_T: float = Field(..., le=1)
    R1: float = Field(..., gt=0)
    delta0: float = Field(..., gt=0, lt=1)
    s1: int = Field(..., ge=1)
    k1: int = Field(..., ge=1)
    eps0: float = Field(..., gt=0)
    c1: float
    c2: float
    c3: float
    c4: float
    m0: int | None = Field(None, ge=1)

    @model_validator(mode="after")
    def _consistent(self) -> ConstructionParams:
        if abs(self.theta_T - self.theta0 - ARC_LENGTH) > _ARC_TOL:
            raise ValueError("theta_T - theta0 must equal 1/4")
        if self.k1 > self.R1:
            raise ValueError(f"k1={self.k1} exceeds R1={self.R1}")
        expected = {
            "c4": self.R1 + self.delta0,
            "c2": self.delta0 / (2.0 * (2.0 * self.r0 * math.pi + 1.0)),
        }
        expected["c3"] = expected["c4"] / (self.r0 * expected["c2"])
        expected["c1"] = 4.0 * (expected["c3"] + 1.0)
        for name, value in expected.items():
            if not math.isclose(getattr(self, name), value, rel_tol=1e-12):
                raise ValueError(f"{name}={getattr(self, name)} does not match derived {value}")
        return self

    @property
    def target_error(self) -> float:
        """The approximation target ``min(1/(2 s1), eps0)``."""
        return min(1.0 / (2 * self.s1), self.eps0)

    def with_m0(self, m0: int) -> ConstructionParams:
        """Return a copy bound to the prefix-certified ``m0``."""
        return self.model_copy(update={"m0": m0})


class LocateResult(BaseModel):
    """Bracket of a point ``a`` of the arc inside the partition."""

    model_config = ConfigDict(frozen=True)

    a: Pair
    theta: float
    rho: int
    theta1: float
    theta2: float
    terminal: bool
    w0: Pair
    mu_w0: Pair
    mu_index: int
    parent_index: int


# ---------------------------------------------------------------------------
# Disks
# ---------------------------------------------------------------------------


class DisjointnessDiagnostics(BaseModel):
    """The analytic lower bounds behind disk disjointness, recomputed per instance."""

    model_config = ConfigDict(frozen=True)

    base_bound: float
    min_center_modulus: float | None = None
    same_mu_min_distance: float | None = None
    same_mu_bound: float | None = None
    same_mu_min_theta_gap: float | None = None
    sigma: float | None = None
    cross_mu_min_radial_gap: float | None = None
    cross_mu_bound: float | None = None

    @property
    def base_ok(self) -> bool:
        return self.min_center_modulus is None or self.min_center_modulus > self.base_bound

    @property
    def same_mu_ok(self) -> bool:
        if self.same_mu_min_distance is None or self.same_mu_bound is None:
            return True
        return self.same_mu_min_distance > self.same_mu_bound

    @property
    def cross_mu_ok(self) -> bool:
        if self.cross_mu_min_radial_gap is None or self.cross_mu_bound is None:
            return True
        return self.cross_mu_min_radial_gap >= self.cross_mu_bound


class DisjointnessCertificate(BaseModel):
    """Pairwise disjointness verdict for a disk family.

    ``witness`` indexes disks with 0 for the base disk and ``i >= 1`` for the
    translated disk built from arc point ``i - 1``. When ``exact`` is false,
    ``min_gap`` is a certified lower bound rather than the attained minimum.
    """

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    m: int | None
    num_disks: int
    min_gap: float
    witness: tuple[int, int]
    verdict: Literal["pass", "fail"]
    exact: bool = True
    method: Literal["pairwise", "ring-sweep"] = "pairwise"
    diagnostics: DisjointnessDiagnostics

    @model_validator(mode="after")
    def _verdict_matches_gap(self) -> DisjointnessCertificate:
        if (self.verdict == "pass") != (self.min_gap > 0):
            raise ValueError(f"verdict {self.verdict!r} inconsistent with min_gap {self.min_gap}")
        return self


# ---------------------------------------------------------------------------
# Approximation
# ---------------------------------------------------------------------------


class SamplingPlan(BaseModel):
    """Where the target is sampled for fitting and validation.

    Each densely sampled disk gets ``rings`` concentric circles of
    ``boundary_points`` points (radii c4, (rings-1)/rings c4, ...) plus its
    centre; validation uses ``validation_factor`` times as many points per
    circle at interleaved angles. Families with more than ``max_fit_disks``
    disks are fitted on an evenly spaced subset and every other disk is
    validated on ``coverage_points`` boundary points.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    boundary_points: int = Field(64, ge=4)
    rings: int = Field(3, ge=1)
    include_center: bool = True
    validation_factor: int = Field(4, ge=4)
    max_fit_disks: int = Field(256, ge=1)
    coverage_points: int = Field(4, ge=1)


class DegreeTrial(BaseModel):
    """One step of the degree search."""

    model_config = ConfigDict(frozen=True)

    degree: int
    residual: float
    validation_error: float
    best_error: float


# A fit within this relative distance of sup|h| does no better than f = 0.
VACUOUS_RTOL = 1e-6


class FitExport(BaseModel):
    """Serialized fitted polynomial; ``f(z) = sum_k coefficients[k] (z / scale)^k``."""

    model_config = ConfigDict(frozen=True)

    degree: int
    scale: float
    coefficients: list[Pair]
    fit_error: float
    target_error: float
    status: FitStatus
    strategy: FitStrategy
    validated_disks: int
    densely_sampled_disks: int
    target_norm: float | None = None
    degree_search: list[DegreeTrial] = Field(default_factory=list)
    config_digest: str = ""

    @property
    def vacuous(self) -> bool:
        if self.target_norm is None or self.target_norm <= 0:
            return False
        return self.fit_error >= (1.0 - VACUOUS_RTOL) * self.target_norm


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


class SampleRecord(BaseModel):
    """Certificate data for one sampled point ``a`` of the arc."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, ser_json_inf_nan="constants")

    a: Pair
    theta: float
    rho: int
    w0: Pair
    n: int
    margin: float
    err: float
    term1: float
    term2: float
    threshold: float
    passed: bool = Field(..., alias="pass")
    status: Literal["ok", "construction-failure"] = "ok"


class VerificationReport(BaseModel):
    """Dense-sample certificate of the final inequality on the arc."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    config_digest: str
    created_at: datetime = Field(default_factory=datetime.now)
    m: int
    m0: int
    m1: int
    nu_m: int
    horizon: int
    num_samples: int
    worst_error: float
    fit_slack: float
    fit_status: FitStatus
    oracle_mode: bool
    fit_vacuous: bool = False
    threshold: float
    c_error: float
    c_pass: bool
    verdict: Literal["pass", "fail"]
    samples: list[SampleRecord] = Field(default_factory=list)

    @model_validator(mode="after")
    def _consistent(self) -> VerificationReport:
        for record in self.samples:
            if record.status == "ok" and record.n > self.horizon:
                raise ValueError(f"witness n={record.n} exceeds horizon {self.horizon}")
        all_pass = all(record.passed for record in self.samples)
        if (self.verdict == "pass") != all_pass:
            raise ValueError("verdict inconsistent with per-sample results")
        return self

    def stable_dump(self) -> dict[str, object]:
        """JSON-ready dump without the timestamp, for digests and determinism checks."""
        return self.model_dump(mode="json", by_alias=True, exclude={"created_at"})


class MembershipResult(BaseModel):
    """Empirical E(m, j, s, k) membership over sampled arc points."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    member: bool
    threshold: float
    witnesses: list[int | None]
    errors: list[float]


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


class SequenceSource(BaseModel):
    """Where the pipeline takes Λ from."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["formula", "file", "generator"]
    formula: str | None = None
    length: int = Field(20000, ge=2)
    path: str | None = None
    M: float | None = None
    blocks: int | None = None

    @model_validator(mode="after")
    def _required_for_kind(self) -> SequenceSource:
        required = {"formula": ["formula"], "file": ["path"], "generator": ["M", "blocks"]}
        for name in required[self.kind]:
            if getattr(self, name) is None:
                raise ValueError(f"sequence.{name} is required when kind={self.kind!r}")
        return self


class ConstructionSection(BaseModel):
    """Fixed numbers of the construction; ``delta0`` may be ``"auto"``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    r0: float
    theta0: float
    theta_T: float
    R1: float
    delta0: float | Literal["auto"] = "auto"
    s1: int
    k1: int
    eps0: float
    m: int | None = Field(None, ge=1)
    truncation: int | None = Field(None, ge=10)
    m0_margin: int | None = Field(None, ge=0)


class TargetSection(BaseModel):
    """The functions g (matched on B) and p (matched on every translated disk)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    g: list[Pair] = Field(default_factory=list)
    p: list[Pair] | None = None
    p_index: int | None = Field(None, ge=1)
    c_samples: list[Pair] | None = None

    @model_validator(mode="after")
    def _one_p(self) -> TargetSection:
        if (self.p is None) == (self.p_index is None):
            raise ValueError("exactly one of target.p and target.p_index must be given")
        return self


class FitSection(BaseModel):
    """Options of the polynomial surrogate."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    degree_cap: int = Field(24, ge=1)
    strategy: FitStrategy = FitStrategy.lstsq
    jet_order: int = Field(2, ge=1)
    sampling: SamplingPlan = Field(default_factory=SamplingPlan)


class VerificationSection(BaseModel):
    """Options of the arc sampling."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_samples: int = Field(1000, ge=1)
    seed: int = 0
    oracle_mode: bool = False
    adversarial_fraction: float = Field(0.5, ge=0.0, le=1.0)


class OutputSection(BaseModel):
    """Where artifacts are written."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dir: str = "hclab-out"


class RunConfig(BaseModel):
    """Complete configuration of one construction + verification run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sequence: SequenceSource
    construction: ConstructionSection
    target: TargetSection
    fit: FitSection = Field(default_factory=FitSection)
    verification: VerificationSection = Field(default_factory=VerificationSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @field_validator("construction")
    @classmethod
    def _arc_is_quarter(cls, v: ConstructionSection) -> ConstructionSection:
        if abs(v.theta_T - v.theta0 - ARC_LENGTH) > _ARC_TOL:
            raise ValueError("construction.theta_T - construction.theta0 must equal 1/4")
        return v


class ArcPointRecord(BaseModel):
    """Serialized arc point with its assigned μ(w)."""

    model_config = ConfigDict(frozen=True)

    n: int
    k: int
    j: int
    w: Pair
    mu: Pair


class PartitionExport(BaseModel):
    """Serialized partition Δ_m.

    ``base`` holds ``θ_0 .. θ_B`` of one period; every other point is
    ``base[j] + k·sigma``. ``thetas`` lists all ``θ_0 .. θ_{ν_m}`` on request and
    is empty with ``truncated`` set otherwise.
    """

    model_config = ConfigDict(frozen=True)

    m: int
    m1: int
    sigma: float
    nu_m: int
    base: list[float]
    thetas: list[float] = Field(default_factory=list)
    truncated: bool = False
