"""Tests for hclab.approx: δ0, the dense enumeration, the target h and polynomial fits."""

from __future__ import annotations

import logging

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import Polynomial

from hclab.approx import (
    FittedPolynomial,
    TargetSpec,
    build_target,
    choose_delta0,
    coefficient_error,
    default_c_samples,
    dense_polynomial_coefficients,
    enumerate_dense_polynomials,
    fit_polynomial,
    fit_samples,
    polynomial_from_pairs,
    polynomial_to_pairs,
    sup_error,
    validation_samples,
)
from hclab.disks import DiskFamily, build_disks
from hclab.errors import DomainError, ParameterError, PreconditionError
from hclab.models import ConstructionParams, FitStatus, FitStrategy, SamplingPlan
from tests.conftest import ring_points

_CUBIC = Polynomial([1.0, -2.0, 0.0, 1.0])


# ---------------------------------------------------------------------------
# Polynomials as pairs
# ---------------------------------------------------------------------------


class TestPairs:
    """Tests for the [[re, im], ...] polynomial encoding."""

    def test_empty_is_zero(self) -> None:
        assert polynomial_from_pairs(None)(3.0) == 0
        assert polynomial_from_pairs([])(3.0) == 0

    def test_identity(self) -> None:
        p = polynomial_from_pairs([(0.0, 0.0), (1.0, 0.0)])
        assert p(2 + 1j) == 2 + 1j

    def test_to_pairs(self) -> None:
        assert polynomial_to_pairs(Polynomial([1j, 2.0])) == [(0.0, 1.0), (2.0, 0.0)]


# ---------------------------------------------------------------------------
# δ0
# ---------------------------------------------------------------------------


class TestChooseDelta0:
    """Tests for the uniform-continuity radius δ0."""

    def test_identity(self) -> None:
        assert choose_delta0(Polynomial([0.0, 1.0]), 1.0, 2) == pytest.approx(0.2475)

    def test_constant(self) -> None:
        assert choose_delta0(Polynomial([3.0]), 1.0, 2) == 0.5

    def test_square(self) -> None:
        assert choose_delta0(Polynomial([0.0, 0.0, 1.0]), 1.0, 2) == pytest.approx(0.0619, abs=1e-4)

    def test_invalid(self) -> None:
        with pytest.raises(ParameterError):
            choose_delta0(Polynomial([0.0, 1.0]), 0.0, 2)
        with pytest.raises(ParameterError):
            choose_delta0(Polynomial([0.0, 1.0]), 1.0, 0)

    @given(
        st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=2, max_size=4),
        st.floats(min_value=0.5, max_value=3.0),
        st.integers(min_value=1, max_value=4),
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=0.0, max_value=0.999),
        st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_continuity(
        self,
        coef: list[float],
        R1: float,
        s1: int,
        r: float,
        angle: float,
        step: float,
        direction: float,
    ) -> None:
        p = Polynomial(coef)
        delta0 = choose_delta0(p, R1, s1)
        assert 0 < delta0 < 1
        z = R1 * r * np.exp(2j * np.pi * angle)
        w = z + step * delta0 * np.exp(2j * np.pi * direction)
        assert abs(p(z) - p(w)) < 1.0 / (2 * s1)


# ---------------------------------------------------------------------------
# Dense enumeration
# ---------------------------------------------------------------------------


class TestDenseEnumeration:
    """Tests for enumerate_dense_polynomials."""

    def test_first_polynomials(self) -> None:
        assert enumerate_dense_polynomials(1).coef.tolist() == [0j]
        assert enumerate_dense_polynomials(2).coef.tolist() == [1 + 0j]
        assert enumerate_dense_polynomials(3).coef.tolist() == [1j]
        assert enumerate_dense_polynomials(4).coef.tolist() == [0j, 1 + 0j]

    def test_injective(self) -> None:
        seen = {tuple(dense_polynomial_coefficients(j)) for j in range(1, 10_001)}
        assert len(seen) == 10_000

    def test_leading_coefficient_non_zero(self) -> None:
        for j in range(2, 2000):
            re, im = dense_polynomial_coefficients(j)[-1]
            assert (re, im) != (0, 0)

    def test_exact_rationals(self) -> None:
        ((re, im),) = dense_polynomial_coefficients(33)
        assert isinstance(re, sympy.Rational)
        assert (re, im) == (sympy.Rational(1, 2), 0)
        assert enumerate_dense_polynomials(33).coef.tolist() == [0.5 + 0j]

    def test_invalid_index(self) -> None:
        with pytest.raises(ParameterError):
            enumerate_dense_polynomials(0)


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------


class TestTarget:
    """Tests for TargetSpec and the piecewise target h."""

    def test_default_c_samples(self) -> None:
        samples = default_c_samples(2.0)
        assert samples.size == 129
        assert np.max(np.abs(samples)) == pytest.approx(2.0)
        assert samples[-1] == 0

    def test_samples_outside_R1(self) -> None:
        with pytest.raises(ParameterError, match="R1"):
            TargetSpec(Polynomial([0.0]), Polynomial([1.0]), np.array([3.0 + 0j]), 2.0)

    def test_needs_certificate(self, toy_params: ConstructionParams) -> None:
        family = build_disks(ring_points(3, 100.0, 0.05), toy_params)
        with pytest.raises(PreconditionError):
            build_target(family, Polynomial([0.0]), Polynomial([1.0]))

    def test_piecewise_values(self, two_ring_family: DiskFamily) -> None:
        h = build_target(two_ring_family, Polynomial([7.0]), Polynomial([0.0, 1.0]))
        assert h(0.5 + 0j)[0] == 7.0
        center = two_ring_family.center(3)
        assert h(center + 1j)[0] == pytest.approx(1j)

    def test_outside_L(self, two_ring_family: DiskFamily) -> None:
        h = build_target(two_ring_family, Polynomial([7.0]), Polynomial([0.0, 1.0]))
        with pytest.raises(DomainError, match="not in L"):
            h(50.0 + 0j)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


class TestSampling:
    """Tests for the fitting and validation point sets."""

    def test_points_inside_their_disks(self, two_ring_family: DiskFamily) -> None:
        plan = SamplingPlan(boundary_points=16, rings=2)
        z, owner = fit_samples(two_ring_family, plan)
        centers = np.array([two_ring_family.center(i) for i in owner])
        assert np.all(np.abs(z - centers) <= two_ring_family.radius * (1 + 1e-12))
        assert set(owner.tolist()) == set(range(len(two_ring_family)))

    def test_validation_disjoint_from_fit(self, base_only_family: DiskFamily) -> None:
        plan = SamplingPlan(boundary_points=16)
        z_fit, _ = fit_samples(base_only_family, plan)
        z_val, _ = validation_samples(base_only_family, plan)
        assert z_val.size == 16 * 4 * plan.rings
        assert np.min(np.abs(z_val[:, None] - z_fit[None, :])) > 1e-6

    def test_dense_subset(self, two_ring_family: DiskFamily) -> None:
        plan = SamplingPlan(boundary_points=8, max_fit_disks=5)
        _, owner = fit_samples(two_ring_family, plan)
        disks = np.unique(owner)
        assert 0 in disks
        assert disks.size <= 5


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


class TestFitPolynomial:
    """Tests for fit_polynomial and its error reporting."""

    def test_single_disk_cubic_is_exact(self, base_only_family: DiskFamily) -> None:
        h = build_target(base_only_family, _CUBIC, Polynomial([0.0]))
        fit = fit_polynomial(h, 1e-6, degree_cap=8)
        assert fit.status is FitStatus.met
        assert fit.degree == 3
        assert [t.degree for t in fit.degree_search] == [0, 1, 2, 3]
        assert fit.fit_error < 1e-9
        assert coefficient_error(fit, _CUBIC) < 1e-8

    def test_reported_error_is_measured(self, two_ring_family: DiskFamily) -> None:
        h = build_target(two_ring_family, Polynomial([0.0]), Polynomial([1.0]))
        plan = SamplingPlan(boundary_points=16, rings=1)
        fit = fit_polynomial(h, 1e-3, degree_cap=6, sampling=plan)
        assert fit.fit_error == pytest.approx(sup_error(fit, h, plan))
        assert (fit.status is FitStatus.met) == (fit.fit_error < 1e-3)
        assert fit.validated_disks == len(two_ring_family)

    def test_missed_target_is_reported(
        self, two_ring_family: DiskFamily, caplog: pytest.LogCaptureFixture
    ) -> None:
        h = build_target(two_ring_family, Polynomial([0.0]), Polynomial([1.0]))
        with caplog.at_level(logging.WARNING, logger="hclab.approx"):
            fit = fit_polynomial(h, 1e-12, degree_cap=2, sampling=SamplingPlan(boundary_points=8))
        assert fit.status is FitStatus.target_missed
        assert fit.fit_error >= 1e-12
        assert len(fit.degree_search) == 3
        assert "missed target" in caplog.text

    def test_sparse_disks_are_covered(
        self, two_ring_family: DiskFamily, caplog: pytest.LogCaptureFixture
    ) -> None:
        h = build_target(two_ring_family, Polynomial([0.0]), Polynomial([1.0]))
        plan = SamplingPlan(boundary_points=8, max_fit_disks=5)
        with caplog.at_level(logging.WARNING, logger="hclab.approx"):
            fit = fit_polynomial(h, 1e-3, degree_cap=3, sampling=plan)
        assert fit.densely_sampled_disks <= 5
        assert fit.validated_disks == len(two_ring_family)
        assert "Fitting on" in caplog.text

    def test_hermite_jets_strategy(self, base_only_family: DiskFamily) -> None:
        h = build_target(base_only_family, _CUBIC, Polynomial([0.0]))
        fit = fit_polynomial(h, 1e-6, degree_cap=4, strategy=FitStrategy.hermite_jets)
        assert fit.strategy is FitStrategy.hermite_jets
        # Two jets at the centre fix only the constant and linear terms.
        assert fit.unscaled_coefficients()[:2] == pytest.approx([1.0, -2.0])

    @pytest.mark.parametrize(("target", "cap"), [(0.0, 4), (1e-3, 0)])
    def test_invalid_arguments(self, base_only_family: DiskFamily, target: float, cap: int) -> None:
        h = build_target(base_only_family, _CUBIC, Polynomial([0.0]))
        with pytest.raises(ParameterError):
            fit_polynomial(h, target, degree_cap=cap)

    def test_export_round_trip(self, base_only_family: DiskFamily) -> None:
        h = build_target(base_only_family, _CUBIC, Polynomial([0.0]))
        fit = fit_polynomial(h, 1e-6, degree_cap=5)
        again = FittedPolynomial.from_export(fit.export())
        z = np.array([0.3 + 0.2j, -1.0, 2.0j])
        np.testing.assert_allclose(again(z), fit(z))
        assert again.status is fit.status
        assert again.degree_search == fit.degree_search
        assert again.target_norm == fit.target_norm
        assert not again.vacuous

    def test_degree_search_is_monotone(self, two_ring_family: DiskFamily) -> None:
        h = build_target(two_ring_family, Polynomial([0.0]), Polynomial([0.0, 1.0]))
        plan = SamplingPlan(boundary_points=16, max_fit_disks=5)
        fit = fit_polynomial(h, 1e-12, degree_cap=6, sampling=plan)
        best = [t.best_error for t in fit.degree_search]
        assert len(best) == 7
        assert all(later <= earlier for earlier, later in zip(best, best[1:]))
        assert all(t.best_error <= t.validation_error for t in fit.degree_search)
        assert fit.fit_error >= fit.degree_search[-1].best_error

    def test_vacuous_fit_is_flagged(
        self, base_only_family: DiskFamily, caplog: pytest.LogCaptureFixture
    ) -> None:
        # z^5 is orthogonal to 1 and z on the fitting circles, so the fit is f = 0
        h = build_target(base_only_family, Polynomial([0.0] * 5 + [1.0]), Polynomial([0.0]))
        with caplog.at_level(logging.WARNING, logger="hclab.approx"):
            fit = fit_polynomial(h, 1e-3, degree_cap=1)
        assert fit.target_norm == pytest.approx(2.5**5)
        assert fit.fit_error == pytest.approx(2.5**5)
        assert fit.vacuous
        assert fit.export().vacuous
        assert "does not improve on f = 0" in caplog.text


class TestFittedPolynomial:
    """Tests for evaluation in the scaled basis."""

    def test_scaled_evaluation(self) -> None:
        f = FittedPolynomial(np.array([1.0, 2.0, 4.0]), 2.0, 0.0, 0.1, FitStatus.met)
        # 1 + 2 (z/2) + 4 (z/2)^2 = 1 + z + z^2
        assert f(np.array([3.0]))[0] == pytest.approx(13.0)
        np.testing.assert_allclose(f.unscaled_coefficients(), [1.0, 1.0, 1.0])
        assert f.degree == 2

    @pytest.mark.parametrize(
        ("fit_error", "target_norm", "vacuous"),
        [(1.0, 2.0, False), (2.0, 2.0, True), (3.0, 2.0, True), (5.0, 0.0, False),
         (5.0, float("inf"), False)],
    )
    def test_vacuous(self, fit_error: float, target_norm: float, vacuous: bool) -> None:
        f = FittedPolynomial(
            np.array([0.0]), 1.0, fit_error, 0.1, FitStatus.target_missed, target_norm=target_norm
        )
        assert f.vacuous is vacuous
