"""Tests for Pydantic model validation in hclab.models.

Covers:
1. Complex pairs round-trip through to_pair / from_pair.
2. ConstructionParams rejects inconsistent derived constants and arcs.
3. ConditionReport and ILambdaBounds enforce their invariants.
4. DisjointnessCertificate ties its verdict to min_gap.
5. SampleRecord serializes ``passed`` under the alias ``pass``.
6. VerificationReport checks verdict and horizon consistency.
7. RunConfig and its sections validate user configuration.
"""

from __future__ import annotations

import math

import pytest
from pydantic import ValidationError

from hclab.models import (
    ClassMembership,
    ConditionKind,
    ConditionReport,
    ConstructionParams,
    DisjointnessCertificate,
    DisjointnessDiagnostics,
    FitStatus,
    ILambdaBounds,
    RunConfig,
    SampleRecord,
    SequenceSource,
    TargetSection,
    Verdict,
    VerificationReport,
    from_pair,
    to_pair,
)

# ── helpers ──────────────────────────────────────────────────────────────


def _params_data(**overrides: float) -> dict:
    r0, R1, delta0 = 1.0, 1.0, 0.2475
    c4 = R1 + delta0
    c2 = delta0 / (2.0 * (2.0 * math.pi * r0 + 1.0))
    c3 = c4 / (r0 * c2)
    data = {
        "r0": r0, "theta0": 0.0, "theta_T": 0.25, "R1": R1, "delta0": delta0,
        "s1": 2, "k1": 1, "eps0": 0.05, "c1": 4.0 * (c3 + 1.0), "c2": c2, "c3": c3, "c4": c4,
    }
    data.update(overrides)
    return data


def _sample(n: int = 5, passed: bool = True, status: str = "ok") -> dict:
    return {
        "a": [1.0, 0.0], "theta": 0.0, "rho": 0, "w0": [1.0, 0.0], "n": n, "margin": 0.1,
        "err": 0.01, "term1": 0.0, "term2": 0.01, "threshold": 0.25, "pass": passed,
        "status": status,
    }


def _report_data(**overrides: object) -> dict:
    data: dict = {
        "config_digest": "abc", "m": 3, "m0": 3, "m1": 9, "nu_m": 100, "horizon": 10,
        "num_samples": 1, "worst_error": 0.01, "fit_slack": 0.0, "fit_status": "met",
        "oracle_mode": True, "threshold": 0.25, "c_error": 0.0, "c_pass": True,
        "verdict": "pass", "samples": [_sample()],
    }
    data.update(overrides)
    return data


# =========================================================================
# 1. Complex pairs
# =========================================================================


class TestPairs:
    def test_round_trip(self) -> None:
        assert from_pair(to_pair(1.5 - 2j)) == 1.5 - 2j

    def test_from_list(self) -> None:
        assert from_pair([0.0, 1.0]) == 1j


# =========================================================================
# 2. ConstructionParams
# =========================================================================


class TestConstructionParams:
    def test_valid(self) -> None:
        params = ConstructionParams.model_validate(_params_data())
        assert params.m0 is None
        assert params.target_error == 0.05
        assert params.with_m0(23).m0 == 23

    def test_target_error_from_s1(self) -> None:
        params = ConstructionParams.model_validate(_params_data(s1=20))
        assert params.target_error == pytest.approx(0.025)

    def test_inconsistent_constant(self) -> None:
        with pytest.raises(ValidationError, match="c3"):
            ConstructionParams.model_validate(_params_data(c3=1.0))

    def test_arc_length(self) -> None:
        with pytest.raises(ValidationError, match="1/4"):
            ConstructionParams.model_validate(_params_data(theta_T=0.3))

    def test_k1_above_R1(self) -> None:
        with pytest.raises(ValidationError, match="k1"):
            ConstructionParams.model_validate(_params_data(k1=2))

    def test_delta0_range(self) -> None:
        with pytest.raises(ValidationError):
            ConstructionParams.model_validate(_params_data(delta0=1.0))

    def test_frozen(self) -> None:
        params = ConstructionParams.model_validate(_params_data())
        with pytest.raises(ValidationError):
            params.r0 = 2.0  # type: ignore[misc]


# =========================================================================
# 3. Condition reports and i(Λ) bounds
# =========================================================================


class TestConditionReport:
    def test_evidence_within_truncation(self) -> None:
        report = ConditionReport(
            condition=ConditionKind.C, gap=1.0, truncation=3, evidence=[1.0, 2.0],
            verdict=Verdict.passes_proxy,
        )
        assert not report.is_proof
        assert report.violations == []

    def test_too_much_evidence(self) -> None:
        with pytest.raises(ValidationError, match="truncation"):
            ConditionReport(
                condition=ConditionKind.sigma, gap=1.0, truncation=1, evidence=[1.0, 2.0],
                verdict=Verdict.fails_proxy,
            )

    def test_verdict_values(self) -> None:
        assert Verdict.provably_fails == "provably-fails"
        assert ConditionKind.sigma == "Sigma"


class TestClassMembership:
    def _data(self, **overrides: object) -> dict:
        data: dict = {
            "gaps": [10.0, 50.0],
            "truncation": 1000,
            "c_verdicts": ["passes-proxy", "passes-proxy"],
            "sigma_verdicts": ["fails-proxy", "fails-proxy"],
            "satisfies_C": True,
            "satisfies_sigma": False,
        }
        data.update(overrides)
        return data

    def test_valid(self) -> None:
        result = ClassMembership.model_validate(self._data())
        assert result.sigma_verdicts == [Verdict.fails_proxy, Verdict.fails_proxy]
        assert result.config_digest == ""

    def test_one_verdict_per_gap(self) -> None:
        with pytest.raises(ValidationError, match="one C and one Sigma verdict per gap"):
            ClassMembership.model_validate(self._data(c_verdicts=["passes-proxy"]))

    def test_sigma_implies_C(self) -> None:
        with pytest.raises(ValidationError, match="also satisfies"):
            ClassMembership.model_validate(self._data(satisfies_C=False, satisfies_sigma=True))

    def test_needs_a_gap(self) -> None:
        with pytest.raises(ValidationError):
            ClassMembership.model_validate(
                self._data(gaps=[], c_verdicts=[], sigma_verdicts=[])
            )


class TestILambdaBounds:
    def test_valid(self) -> None:
        bounds = ILambdaBounds(lower=1.0, upper=3.0, method="structural")
        assert bounds.upper == 3.0

    @pytest.mark.parametrize(("lower", "upper"), [(0.5, 2.0), (3.0, 2.0)])
    def test_invalid(self, lower: float, upper: float) -> None:
        with pytest.raises(ValidationError):
            ILambdaBounds(lower=lower, upper=upper, method="empirical")


# =========================================================================
# 4. DisjointnessCertificate
# =========================================================================


class TestDisjointnessCertificate:
    def _cert(self, min_gap: float, verdict: str) -> DisjointnessCertificate:
        return DisjointnessCertificate.model_validate(
            {
                "m": 1, "num_disks": 2, "min_gap": min_gap, "witness": [0, 1],
                "verdict": verdict, "diagnostics": {"base_bound": 2.5},
            }
        )

    def test_pass(self) -> None:
        cert = self._cert(0.5, "pass")
        assert cert.exact
        assert cert.method == "pairwise"

    def test_verdict_must_match_gap(self) -> None:
        with pytest.raises(ValidationError, match="inconsistent"):
            self._cert(-0.5, "pass")
        with pytest.raises(ValidationError, match="inconsistent"):
            self._cert(0.5, "fail")

    def test_infinite_gap_serializes(self) -> None:
        cert = self._cert(math.inf, "pass")
        assert "Infinity" in cert.model_dump_json()

    def test_diagnostics_flags(self) -> None:
        diag = DisjointnessDiagnostics(
            base_bound=2.5, min_center_modulus=2.0, same_mu_min_distance=3.0, same_mu_bound=2.5,
            cross_mu_min_radial_gap=5.0, cross_mu_bound=5.0,
        )
        assert not diag.base_ok
        assert diag.same_mu_ok
        assert diag.cross_mu_ok
        assert DisjointnessDiagnostics(base_bound=1.0).base_ok


# =========================================================================
# 5. SampleRecord
# =========================================================================


class TestSampleRecord:
    def test_alias(self) -> None:
        record = SampleRecord.model_validate(_sample())
        assert record.passed
        dumped = record.model_dump(by_alias=True)
        assert dumped["pass"] is True
        assert "passed" not in dumped

    def test_populate_by_name(self) -> None:
        data = _sample()
        data["passed"] = data.pop("pass")
        assert SampleRecord.model_validate(data).passed


# =========================================================================
# 6. VerificationReport
# =========================================================================


class TestVerificationReport:
    def test_valid(self) -> None:
        report = VerificationReport.model_validate(_report_data())
        assert report.fit_status is FitStatus.met
        dump = report.stable_dump()
        assert "created_at" not in dump
        assert dump["samples"][0]["pass"] is True  # type: ignore[index]

    def test_verdict_mismatch(self) -> None:
        with pytest.raises(ValidationError, match="verdict"):
            VerificationReport.model_validate(_report_data(samples=[_sample(passed=False)]))

    def test_witness_beyond_horizon(self) -> None:
        with pytest.raises(ValidationError, match="horizon"):
            VerificationReport.model_validate(_report_data(samples=[_sample(n=11)]))

    def test_failed_construction_may_exceed_horizon(self) -> None:
        sample = _sample(n=11, passed=False, status="construction-failure")
        report = VerificationReport.model_validate(_report_data(samples=[sample], verdict="fail"))
        assert report.verdict == "fail"


# =========================================================================
# 7. RunConfig
# =========================================================================


class TestRunConfig:
    def test_canonical(self, canonical_data: dict) -> None:
        config = RunConfig.model_validate(canonical_data)
        assert config.sequence.formula == "n^2"
        assert config.construction.delta0 == "auto"
        assert config.fit.sampling.boundary_points == 64
        assert config.output.dir == "hclab-out"

    def test_defaults(self, canonical_data: dict) -> None:
        required = ("sequence", "construction", "target")
        data = {k: v for k, v in canonical_data.items() if k in required}
        config = RunConfig.model_validate(data)
        assert config.verification.num_samples == 1000
        assert not config.verification.oracle_mode

    def test_unknown_key(self, canonical_data: dict) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({**canonical_data, "extra": 1})

    def test_quarter_arc(self, canonical_data: dict) -> None:
        construction = {**canonical_data["construction"], "theta_T": 0.5}
        data = {**canonical_data, "construction": construction}
        with pytest.raises(ValidationError, match="1/4"):
            RunConfig.model_validate(data)

    def test_sequence_source_requirements(self) -> None:
        with pytest.raises(ValidationError, match="sequence.path"):
            SequenceSource(kind="file")
        with pytest.raises(ValidationError, match="sequence.M"):
            SequenceSource(kind="generator", blocks=3)
        assert SequenceSource(kind="generator", M=4, blocks=3).length == 20000

    def test_target_needs_exactly_one_p(self) -> None:
        with pytest.raises(ValidationError, match="exactly one"):
            TargetSection()
        with pytest.raises(ValidationError, match="exactly one"):
            TargetSection(p=[(1.0, 0.0)], p_index=3)
        assert TargetSection(p_index=3).g == []
