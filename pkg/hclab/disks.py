"""The disk family ``{B} ∪ {B_w}`` and its disjointness certificate.

``B`` is the closed disk of radius ``c4`` at the origin and ``B_w`` the closed
disk of the same radius at ``w μ(w)``. Disks that share ``|μ(w)|`` sit on one
circle of radius ``r0 |μ(w)|``; this ring structure drives both the
disjointness sweep and point lookup.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence as SequenceABC
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist

from hclab.errors import ConstructionViolationError
from hclab.models import ConstructionParams, DisjointnessCertificate, DisjointnessDiagnostics
from hclab.numerics import FloatArray
from hclab.partition import ArcPoint, ArcPoints
from hclab.sequences import ComplexArray, IntArray

logger = logging.getLogger(__name__)

# Families up to this many disks (base included) are checked with a full distance matrix.
EXHAUSTIVE_LIMIT = 2048
# Relative slack on the radius when deciding whether a point lies in a closed disk.
MEMBERSHIP_RTOL = 1e-9


def _xy(z: ComplexArray) -> FloatArray:
    return np.column_stack((z.real, z.imag))


@dataclass(frozen=True)
class _RingIndex:
    ring_id: IntArray
    ring_radius: FloatArray
    order: IntArray
    sorted_keys: FloatArray
    starts: IntArray
    ends: IntArray


@dataclass(frozen=True)
class DiskFamily:
    """Base disk plus one translated disk per arc point, as parallel arrays.

    Disk ``i`` of :attr:`centers` is the translated disk built from arc point
    ``n[i]``; certificates and lookups number the base disk 0 and translated
    disk ``i`` as ``i + 1``.
    """

    radius: float
    m: int | None
    centers: ComplexArray
    mu: ComplexArray
    thetas: FloatArray
    n: IntArray
    j: IntArray
    params: ConstructionParams
    sigma: float | None = None
    certificate: DisjointnessCertificate | None = None

    def __len__(self) -> int:
        """Number of disks including the base disk."""
        return int(self.centers.size) + 1

    @cached_property
    def ring_keys(self) -> FloatArray:
        return np.abs(self.mu)

    @property
    def certified(self) -> bool:
        return self.certificate is not None and self.certificate.verdict == "pass"

    def with_certificate(self, certificate: DisjointnessCertificate) -> DiskFamily:
        return replace(self, certificate=certificate)

    def center(self, index: int) -> complex:
        """Centre of disk *index* (0 is the base disk)."""
        return 0j if index == 0 else complex(self.centers[index - 1])

    @cached_property
    def _rings(self) -> _RingIndex:
        values, ring_id = np.unique(self.ring_keys, return_inverse=True)
        ring_id = ring_id.astype(np.int64).ravel()
        # Angles lie in [0, 2π] < 8, so this key orders by ring, then by angle.
        key = ring_id * 8.0 + (np.angle(self.centers) + math.pi)
        order = np.argsort(key, kind="stable")
        sorted_ids = ring_id[order]
        ids = np.arange(values.size)
        starts = np.searchsorted(sorted_ids, ids, side="left").astype(np.int64)
        ends = np.searchsorted(sorted_ids, ids, side="right").astype(np.int64)
        return _RingIndex(ring_id, self.params.r0 * values, order, key[order], starts, ends)

    def locate_many(self, z: npt.ArrayLike) -> IntArray:
        """Index of the disk containing each point, or -1 for points outside ``L``."""
        pts = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        out = np.full(pts.shape, -1, dtype=np.int64)
        reach = self.radius * (1.0 + MEMBERSHIP_RTOL)
        out[np.abs(pts) <= reach] = 0
        if self.centers.size == 0:
            return out

        rings = self._rings
        r = np.abs(pts)
        upper = np.clip(np.searchsorted(rings.ring_radius, r), 0, rings.ring_radius.size - 1)
        lower = np.clip(upper - 1, 0, rings.ring_radius.size - 1)
        nearer = np.abs(rings.ring_radius[lower] - r) < np.abs(rings.ring_radius[upper] - r)
        ring = np.where(nearer, lower, upper)
        start, end = rings.starts[ring], rings.ends[ring]
        key = ring * 8.0 + (np.angle(pts) + math.pi)
        pos = np.searchsorted(rings.sorted_keys, key)

        for cand in (pos - 2, pos - 1, pos, pos + 1, start, end - 1):
            slot = np.clip(cand, start, end - 1)
            disk = rings.order[slot]
            inside = (out == -1) & (np.abs(pts - self.centers[disk]) <= reach)
            out[inside] = disk[inside] + 1
        return out

    def locate(self, z: complex) -> int:
        """Index of the disk containing *z*, or -1."""
        return int(self.locate_many([z])[0])


def build_disks(
    points: ArcPoints | SequenceABC[ArcPoint], params: ConstructionParams
) -> DiskFamily:
    """Attach a closed disk of radius ``c4`` at ``w μ(w)`` to every arc point.

    Raises:
        ConstructionViolationError: If two arc points produce the same centre.
    """
    if isinstance(points, ArcPoints):
        part = points.partition
        m: int | None = part.m
        sigma: float | None = part.sigma
        centers = points.centers
        mu = points.mu
        thetas = points.theta
        n = points.n
        j = points.j
    else:
        m, sigma = None, None
        w = np.asarray([p.w for p in points], dtype=np.complex128)
        mu = np.asarray([p.mu_w for p in points], dtype=np.complex128)
        centers = w * mu
        thetas = np.mod(np.angle(w) / (2.0 * math.pi), 1.0)
        n = np.asarray([p.n for p in points], dtype=np.int64)
        j = np.asarray([p.j for p in points], dtype=np.int64)

    if centers.size > 1:
        order = np.lexsort((centers.imag, centers.real))
        ordered = centers[order]
        dup = np.flatnonzero(ordered[1:] == ordered[:-1])
        if dup.size:
            a, b = sorted((int(order[dup[0]]), int(order[dup[0] + 1])))
            raise ConstructionViolationError(
                f"arc points n={n[a]} and n={n[b]} produce the same disk centre {ordered[dup[0]]}"
            )
    logger.debug("Built %d translated disks of radius %g", centers.size, params.c4)
    return DiskFamily(params.c4, m, centers, mu, thetas, n, j, params, sigma)


# ---------------------------------------------------------------------------
# Disjointness
# ---------------------------------------------------------------------------


def chord_length(theta1: npt.ArrayLike, theta2: npt.ArrayLike) -> FloatArray:
    """``|e^{2πiθ2} - e^{2πiθ1}| = 2 sin(π|θ2 - θ1|)`` for ``|θ2 - θ1| < 1/2``."""
    diff = np.abs(np.asarray(theta2, dtype=np.float64) - np.asarray(theta1, dtype=np.float64))
    return 2.0 * np.sin(math.pi * diff)


def jordan_bound_holds(x: npt.ArrayLike) -> npt.NDArray[np.bool_]:
    """Whether ``sin(πx) > 2x`` at each sample ``x ∈ (0, 1/2)``."""
    xs = np.asarray(x, dtype=np.float64)
    return np.sin(math.pi * xs) > 2.0 * xs


def _cross_mu_radial_gap(family: DiskFamily) -> float | None:
    keys = np.unique(family.ring_keys)
    if keys.size < 2:
        return None
    return float(family.params.r0 * np.diff(keys).min())


def _pairwise(family: DiskFamily) -> tuple[float, tuple[int, int], DisjointnessDiagnostics]:
    params = family.params
    everything = np.concatenate(([0j], family.centers))
    dist = cdist(_xy(everything), _xy(everything))
    np.fill_diagonal(dist, np.inf)
    flat = int(np.argmin(dist))
    i, k = divmod(flat, dist.shape[1])
    min_gap = float(dist[i, k]) - 2.0 * family.radius
    witness = (min(i, k), max(i, k))

    translated = dist[1:, 1:]
    keys = family.ring_keys
    same = keys[:, None] == keys[None, :]
    np.fill_diagonal(same, False)
    same_dist = float(translated[same].min()) if same.any() else None
    theta_gap = None
    if same.any():
        theta_diff = np.abs(family.thetas[:, None] - family.thetas[None, :])
        theta_gap = float(theta_diff[same].min())

    diagnostics = DisjointnessDiagnostics(
        base_bound=2.0 * family.radius,
        min_center_modulus=float(dist[0, 1:].min()) if family.centers.size else None,
        same_mu_min_distance=same_dist,
        same_mu_bound=4.0 * params.r0 * params.c2 * params.c3,
        same_mu_min_theta_gap=theta_gap,
        sigma=family.sigma,
        cross_mu_min_radial_gap=_cross_mu_radial_gap(family),
        cross_mu_bound=params.r0 * params.c1,
    )
    return min_gap, witness, diagnostics


def _ring_sweep(
    family: DiskFamily,
) -> tuple[float, tuple[int, int], bool, DisjointnessDiagnostics]:
    params = family.params
    two_r = 2.0 * family.radius
    rings = family._rings
    centers = family.centers
    moduli = np.abs(centers)

    candidates: list[tuple[float, tuple[int, int], bool]] = []
    base = int(np.argmin(moduli))
    candidates.append((float(moduli[base]) - two_r, (0, base + 1), True))

    # Same ring: the closest pair on a circle is a pair of angular neighbours.
    order = rings.order
    ids = rings.ring_id[order]
    same = ids[1:] == ids[:-1]
    left, right = order[:-1][same], order[1:][same]
    sizes = rings.ends - rings.starts
    wrap = sizes >= 3
    left = np.concatenate((left, order[rings.starts[wrap]]))
    right = np.concatenate((right, order[rings.ends[wrap] - 1]))
    same_dist: float | None = None
    theta_gap: float | None = None
    if left.size:
        d = np.abs(centers[right] - centers[left])
        at = int(np.argmin(d))
        same_dist = float(d[at])
        pair = sorted((int(left[at]) + 1, int(right[at]) + 1))
        candidates.append((same_dist - two_r, (pair[0], pair[1]), True))
        by_theta = np.lexsort((family.thetas, rings.ring_id))
        tid = rings.ring_id[by_theta]
        t_same = tid[1:] == tid[:-1]
        theta_gap = float(np.diff(family.thetas[by_theta])[t_same].min())

    # Different rings: radial separation, exact distances where it does not certify.
    starts, ends = rings.starts, rings.ends
    r_sorted = moduli[order]
    r_min = np.minimum.reduceat(r_sorted, starts)
    r_max = np.maximum.reduceat(r_sorted, starts)
    for a in range(starts.size):
        for b in range(a + 1, starts.size):
            bound = float(r_min[b] - r_max[a])
            if bound > two_r:
                inner = int(order[starts[a] + np.argmax(r_sorted[starts[a] : ends[a]])])
                outer = int(order[starts[b] + np.argmin(r_sorted[starts[b] : ends[b]])])
                candidates.append((bound - two_r, (inner + 1, outer + 1), False))
                break
            ia, ib = order[starts[a] : ends[a]], order[starts[b] : ends[b]]
            dist = cdist(_xy(centers[ia]), _xy(centers[ib]))
            p, q = divmod(int(np.argmin(dist)), dist.shape[1])
            pair = sorted((int(ia[p]) + 1, int(ib[q]) + 1))
            candidates.append((float(dist[p, q]) - two_r, (pair[0], pair[1]), True))

    min_gap, witness, exact = min(candidates, key=lambda c: c[0])
    diagnostics = DisjointnessDiagnostics(
        base_bound=two_r,
        min_center_modulus=float(moduli[base]),
        same_mu_min_distance=same_dist,
        same_mu_bound=4.0 * params.r0 * params.c2 * params.c3,
        same_mu_min_theta_gap=theta_gap,
        sigma=family.sigma,
        cross_mu_min_radial_gap=_cross_mu_radial_gap(family),
        cross_mu_bound=params.r0 * params.c1,
    )
    return min_gap, witness, exact, diagnostics


def check_disjoint(
    family: DiskFamily, exhaustive_limit: int = EXHAUSTIVE_LIMIT
) -> DisjointnessCertificate:
    """Certify that the closed disks of *family* are pairwise disjoint.

    Small families are checked on the full distance matrix. Larger ones use a
    ring sweep that is exact within each circle and across circles whose
    radial separation does not already exceed ``2 c4``; when the minimum comes
    from such a radial separation, ``min_gap`` is a lower bound and ``exact``
    is false. Tangent disks fail.
    """
    if len(family) == 1:
        diagnostics = DisjointnessDiagnostics(base_bound=2.0 * family.radius)
        return DisjointnessCertificate(
            m=family.m, num_disks=1, min_gap=math.inf, witness=(0, 0), verdict="pass",
            diagnostics=diagnostics,
        )

    if len(family) <= exhaustive_limit:
        min_gap, witness, diagnostics = _pairwise(family)
        exact = True
        method: Literal["pairwise", "ring-sweep"] = "pairwise"
    else:
        min_gap, witness, exact, diagnostics = _ring_sweep(family)
        method = "ring-sweep"

    verdict: Literal["pass", "fail"] = "pass" if min_gap > 0 else "fail"
    if verdict == "fail":
        logger.warning("Disks %s overlap (gap %.6g) for m=%s", witness, min_gap, family.m)
    return DisjointnessCertificate(
        m=family.m, num_disks=len(family), min_gap=min_gap, witness=witness,
        verdict=verdict, exact=exact, method=method, diagnostics=diagnostics,
    )
