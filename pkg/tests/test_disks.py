"""Tests for hclab.disks: disk families, disjointness certificates and point lookup."""

from __future__ import annotations

import numpy as np
import pytest

from hclab.disks import (
    DiskFamily,
    build_disks,
    check_disjoint,
    chord_length,
    jordan_bound_holds,
)
from hclab.errors import ConstructionViolationError
from hclab.models import ConstructionParams
from hclab.partition import ArcPoints, Partition
from tests.conftest import arc_point, ring_points

# ---------------------------------------------------------------------------
# build_disks
# ---------------------------------------------------------------------------


class TestBuildDisks:
    """Tests for building the disk family."""

    def test_from_arc_point_list(self, toy_params: ConstructionParams) -> None:
        family = build_disks([arc_point(0, 0.0, 10.0), arc_point(1, 0.25, 20.0)], toy_params)
        assert len(family) == 3
        assert family.radius == pytest.approx(2.5)
        assert family.center(0) == 0j
        assert family.center(1) == pytest.approx(10.0)
        assert family.center(2) == pytest.approx(20j)
        assert family.m is None
        assert not family.certified

    def test_from_arc_points(
        self, toy_partition: Partition, toy_params: ConstructionParams
    ) -> None:
        points = ArcPoints(toy_partition, toy_params.r0)
        family = build_disks(points, toy_params)
        assert len(family) == len(points) + 1
        assert family.m == 1
        assert family.sigma == toy_partition.sigma
        np.testing.assert_allclose(family.centers, points.w * points.mu)

    def test_duplicate_centres(self, toy_params: ConstructionParams) -> None:
        points = [arc_point(0, 0.1, 50.0), arc_point(1, 0.1, 50.0)]
        with pytest.raises(ConstructionViolationError, match="same disk centre"):
            build_disks(points, toy_params)

    def test_empty_family(self, base_only_family: DiskFamily) -> None:
        assert len(base_only_family) == 1
        assert base_only_family.certified


# ---------------------------------------------------------------------------
# check_disjoint
# ---------------------------------------------------------------------------


class TestCheckDisjoint:
    """Tests for the disjointness certificate."""

    def test_single_disk(self, base_only_family: DiskFamily) -> None:
        cert = base_only_family.certificate
        assert cert is not None
        assert cert.verdict == "pass"
        assert cert.min_gap == float("inf")
        assert cert.num_disks == 1

    def test_gap_of_one_radius(self, toy_params: ConstructionParams) -> None:
        c4 = toy_params.c4
        family = build_disks([arc_point(0, 0.0, 3 * c4)], toy_params)
        cert = check_disjoint(family)
        assert cert.verdict == "pass"
        assert cert.min_gap == pytest.approx(c4)
        assert cert.witness == (0, 1)
        assert cert.method == "pairwise"
        assert cert.exact

    def test_tangent_disks_fail(self, toy_params: ConstructionParams) -> None:
        family = build_disks([arc_point(0, 0.0, 2 * toy_params.c4)], toy_params)
        cert = check_disjoint(family)
        assert cert.verdict == "fail"
        assert cert.min_gap <= 0

    def test_overlapping_translated_disks(self, toy_params: ConstructionParams) -> None:
        points = [arc_point(0, 0.0, 100.0), arc_point(1, 0.001, 100.0)]
        cert = check_disjoint(build_disks(points, toy_params))
        assert cert.verdict == "fail"
        assert cert.witness == (1, 2)

    def test_two_rings_pass(self, two_ring_family: DiskFamily) -> None:
        cert = two_ring_family.certificate
        assert cert is not None
        assert cert.verdict == "pass"
        # Neighbours on the inner ring: 2 * 100 * sin(0.01 pi) - 5.
        assert cert.min_gap == pytest.approx(200 * np.sin(0.01 * np.pi) - 5.0)
        diag = cert.diagnostics
        assert diag.base_ok
        assert diag.same_mu_min_theta_gap == pytest.approx(0.01)
        assert diag.cross_mu_min_radial_gap == pytest.approx(200.0)

    def test_ring_sweep_matches_pairwise(self, two_ring_family: DiskFamily) -> None:
        pairwise = check_disjoint(two_ring_family)
        sweep = check_disjoint(two_ring_family, exhaustive_limit=1)
        assert sweep.method == "ring-sweep"
        assert sweep.exact
        assert sweep.min_gap == pytest.approx(pairwise.min_gap)

    def test_ring_sweep_close_rings(self, toy_params: ConstructionParams) -> None:
        # Radial separation 3 < 2 c4, so ring pairs are measured exactly.
        points = ring_points(10, 100.0, 0.02) + ring_points(10, 103.0, 0.02, 0.01, start=10)
        family = build_disks(points, toy_params)
        pairwise = check_disjoint(family)
        sweep = check_disjoint(family, exhaustive_limit=1)
        assert sweep.min_gap == pytest.approx(pairwise.min_gap)
        assert sweep.verdict == pairwise.verdict

    def test_ring_sweep_radial_bound_is_not_exact(self, toy_params: ConstructionParams) -> None:
        # Two lone disks on distant rings: the minimum is the radial bound.
        points = [arc_point(0, 0.0, 20.0), arc_point(1, 0.2, 30.0)]
        family = build_disks(points, toy_params)
        sweep = check_disjoint(family, exhaustive_limit=1)
        assert sweep.verdict == "pass"
        assert not sweep.exact
        assert sweep.min_gap == pytest.approx(5.0)
        assert sweep.min_gap <= check_disjoint(family).min_gap

    def test_ring_sweep_detects_overlap(self, toy_params: ConstructionParams) -> None:
        points = ring_points(30, 100.0, 0.001)
        family = build_disks(points, toy_params)
        sweep = check_disjoint(family, exhaustive_limit=1)
        assert sweep.verdict == "fail"


# ---------------------------------------------------------------------------
# Point lookup
# ---------------------------------------------------------------------------


class TestLocate:
    """Tests for DiskFamily.locate and locate_many."""

    def test_base_disk(self, two_ring_family: DiskFamily) -> None:
        assert two_ring_family.locate(0j) == 0
        assert two_ring_family.locate(2.5 + 0j) == 0

    def test_translated_disks(self, two_ring_family: DiskFamily) -> None:
        for index in (1, 7, 12, 13, 24):
            center = two_ring_family.center(index)
            assert two_ring_family.locate(center + 1.0 - 1.0j) == index

    def test_outside(self, two_ring_family: DiskFamily) -> None:
        assert two_ring_family.locate(50.0 + 0j) == -1
        assert two_ring_family.locate(-100.0 + 0j) == -1

    def test_many(self, two_ring_family: DiskFamily) -> None:
        centers = two_ring_family.centers
        found = two_ring_family.locate_many(centers + 2.0)
        assert found.tolist() == list(range(1, len(two_ring_family)))


# ---------------------------------------------------------------------------
# Geometry helpers
# ---------------------------------------------------------------------------


class TestGeometry:
    """Tests for chord_length and jordan_bound_holds."""

    def test_chord(self) -> None:
        assert chord_length(0.0, 0.25) == pytest.approx(np.sqrt(2.0))
        assert chord_length(0.1, 0.1) == 0.0

    def test_chord_matches_distance(self) -> None:
        a, b = 0.03, 0.21
        direct = abs(np.exp(2j * np.pi * b) - np.exp(2j * np.pi * a))
        assert chord_length(a, b) == pytest.approx(direct)

    def test_jordan_bound(self) -> None:
        xs = np.linspace(0.001, 0.499, 500)
        assert np.all(jordan_bound_holds(xs))
        assert not jordan_bound_holds(0.5)
