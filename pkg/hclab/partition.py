"""Interval partitions of the arc parameter range and the arc points they induce.

For a block start ``m`` the partition ``θ_0 < θ_1 < ... < θ_{ν_m}`` of
``[θ_0, θ_T]`` advances by ``c2 / |μ_{m+j}|`` and repeats with period
``σ_m = θ_B - θ_0``, where ``B = m1(m) - m + 1``. Every partition index
``ν = kB + j`` (``0 ≤ j < B``) carries the subsequence term ``μ_{m+j}``.

Partitions in realistic configurations have millions of points, so they are
stored as the ``B + 1`` base values plus ``σ_m``; the full grid and the arc
points are struct-of-arrays materialized on first access.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from hclab.errors import (
    DomainError,
    InternalInconsistencyError,
    ParameterError,
    PreconditionError,
    TailTooThinError,
)
from hclab.models import (
    ARC_LENGTH,
    ArcPointRecord,
    ConstructionParams,
    LocateResult,
    PartitionExport,
    to_pair,
)
from hclab.numerics import FloatArray, exact_sum, tail_sums
from hclab.sequences import ComplexArray, GapSubsequence, IntArray

logger = logging.getLogger(__name__)

# Relative tolerance for |a| = r0.
RADIUS_RTOL = 1e-9
# Parameter values this close to a partition point are snapped onto it.
THETA_SNAP = 8 * float(np.spacing(1.0))

_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------


def derive_constants(
    r0: float,
    theta0: float,
    theta_T: float,
    R1: float,
    delta0: float,
    s1: int,
    k1: int,
    eps0: float,
) -> ConstructionParams:
    """Validate the fixed numbers and derive ``c1``..``c4``.

    Raises:
        ParameterError: If a value is out of range, ``k1 > R1`` or the arc is
            not a quarter turn.
    """
    if not r0 > 0:
        raise ParameterError(f"r0 must be positive, got {r0}")
    if not 0 <= theta0 < theta_T <= 1:
        raise ParameterError(f"need 0 <= theta0 < theta_T <= 1, got ({theta0}, {theta_T})")
    if abs(theta_T - theta0 - ARC_LENGTH) > 1e-12:
        raise ParameterError(f"arc length theta_T - theta0 must be 1/4, got {theta_T - theta0}")
    if not R1 > 0:
        raise ParameterError(f"R1 must be positive, got {R1}")
    if not 0 < delta0 < 1:
        raise ParameterError(f"delta0 must lie in (0, 1), got {delta0}")
    if s1 < 1 or k1 < 1:
        raise ParameterError(f"s1 and k1 must be positive integers, got s1={s1}, k1={k1}")
    if k1 > R1:
        raise ParameterError(f"k1={k1} must not exceed R1={R1}")
    if not eps0 > 0:
        raise ParameterError(f"eps0 must be positive, got {eps0}")

    c4 = R1 + delta0
    c2 = delta0 / (2.0 * (2.0 * r0 * math.pi + 1.0))
    c3 = c4 / (r0 * c2)
    c1 = 4.0 * (c3 + 1.0)
    logger.debug("Derived constants c1=%.6g c2=%.6g c3=%.6g c4=%.6g", c1, c2, c3, c4)
    return ConstructionParams(
        r0=r0, theta0=theta0, theta_T=theta_T, R1=R1, delta0=delta0, s1=s1, k1=k1,
        eps0=eps0, c1=c1, c2=c2, c3=c3, c4=c4,
    )


def _c3_of(params: ConstructionParams | float) -> float:
    c3 = params.c3 if isinstance(params, ConstructionParams) else float(params)
    if not c3 > 1:
        raise ParameterError(f"c3 must exceed 1, got {c3}")
    return c3


def compute_m0(
    sub: GapSubsequence,
    params: ConstructionParams | float,
    truncation: int | None = None,
    *,
    margin: int | None = None,
) -> int:
    """Smallest ``m`` from which ``Σ_{k=m'}^{N} 1/|μ_k| > c3/|μ_{m'}|`` holds on the prefix.

    *params* may be the construction parameters or a bare ``c3``. The check
    runs over ``m' ∈ [m, N - margin]`` (``margin`` defaults to ``N // 2``)
    because tails close to ``N`` are cut short by the truncation. The result
    is certified on the stored prefix only.

    Raises:
        PreconditionError: If *sub* was extracted with a gap below ``c1``.
        TailTooThinError: If the inequality fails at the end of the checked range.
    """
    c3 = _c3_of(params)
    if isinstance(params, ConstructionParams) and sub.gap < params.c1:
        raise PreconditionError(
            f"subsequence gap {sub.gap:g} is below c1={params.c1:g}; extract with gap c1"
        )
    N = len(sub) if truncation is None else min(truncation, len(sub))
    margin = N // 2 if margin is None else margin
    checked = N - margin
    if checked < 1:
        raise TailTooThinError(f"tail-too-thin: no index to check with N={N}, margin={margin}")

    mod = sub.moduli[:N]
    tails = tail_sums(1.0 / mod)[:checked]
    holds = tails > c3 / mod[:checked]
    failures = np.flatnonzero(~holds)
    m0 = 1 if failures.size == 0 else int(failures[-1]) + 2
    if m0 > checked:
        raise TailTooThinError(
            f"tail-too-thin: reciprocal tails never dominate c3/|mu_m| on m <= {checked} "
            f"(N={N}, c3={c3:g})"
        )
    logger.debug("m0=%d certified on m <= %d (N=%d)", m0, checked, N)
    return m0


def compute_m1(m: int, sub: GapSubsequence, c3: float) -> int:
    """Stopping index: the least ``m1`` with ``Σ_{k=m}^{m1} 1/|μ_k| > c3/|μ_m|``."""
    if not c3 > 1:
        raise ParameterError(f"c3 must exceed 1, got {c3}")
    if not 1 <= m <= len(sub):
        raise ParameterError(f"m={m} outside the stored subsequence (length {len(sub)})")
    mod = sub.moduli
    partial = np.cumsum(1.0 / mod[m - 1 :].astype(np.longdouble))
    threshold = c3 / float(mod[m - 1])
    hit = np.flatnonzero(partial > threshold)
    if hit.size == 0:
        raise TailTooThinError(
            f"tail-too-thin: reciprocal sum from m={m} stays at {float(partial[-1]):.6g} "
            f"<= {threshold:.6g} within the stored prefix"
        )
    return m + int(hit[0])


def stopping_sum_bound(
    sub: GapSubsequence, m: int, m1: int, c3: float
) -> tuple[float, float]:
    """Return ``(Σ_{k=m}^{m1} 1/|μ_k|, (c3 + 1)/|μ_m|)``; the first is below the second."""
    total = exact_sum(1.0 / sub.moduli[m - 1 : m1])
    return total, (c3 + 1.0) / float(sub.moduli[m - 1])


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """The partition ``Δ_m`` stored as its base block and period."""

    m: int
    m1: int
    base: FloatArray
    sigma: float
    nu_m: int
    theta0: float
    theta_T: float
    c2: float
    mus: ComplexArray
    mu_parent_indices: IntArray

    @property
    def block_len(self) -> int:
        return self.m1 - self.m + 1

    def theta(self, nu: int) -> float:
        """``θ_ν`` for any ``ν ≥ 0``, including the virtual ``θ_{ν_m + 1}``."""
        k, j = divmod(nu, self.block_len)
        return float(self.base[j] + k * self.sigma)

    @cached_property
    def thetas(self) -> FloatArray:
        """``θ_0 .. θ_{ν_m}``."""
        nu = np.arange(self.nu_m + 1, dtype=np.int64)
        k, j = np.divmod(nu, self.block_len)
        out = self.base[j] + k * self.sigma
        out.setflags(write=False)
        return out

    @property
    def next_theta(self) -> float:
        return self.theta(self.nu_m + 1)

    def export(self, *, full: bool = False) -> PartitionExport:
        return PartitionExport(
            m=self.m,
            m1=self.m1,
            sigma=self.sigma,
            nu_m=self.nu_m,
            base=self.base.tolist(),
            thetas=self.thetas.tolist() if full else [],
            truncated=not full,
        )


def assemble_partition(
    m: int,
    m1: int,
    sub: GapSubsequence,
    *,
    c2: float,
    theta0: float,
    theta_T: float,
) -> Partition:
    """Build ``Δ_m`` for a known stopping index ``m1``.

    Raises:
        InternalInconsistencyError: If ``σ_m`` is not below 1/4.
    """
    if not 1 <= m < m1 <= len(sub):
        raise ParameterError(f"need 1 <= m < m1 <= {len(sub)}, got m={m}, m1={m1}")
    inv = 1.0 / sub.moduli[m - 1 : m1]
    steps = np.concatenate(([0.0], inv)).astype(np.longdouble)
    base = (np.longdouble(theta0) + np.longdouble(c2) * np.cumsum(steps)).astype(np.float64)
    sigma = c2 * exact_sum(inv)
    if not sigma < ARC_LENGTH:
        raise InternalInconsistencyError(
            f"sigma_m={sigma:.6g} is not below 1/4 for m={m}; constants are inconsistent"
        )
    if np.any(np.diff(base) <= 0):
        raise InternalInconsistencyError(f"base partition for m={m} is not strictly increasing")

    B = m1 - m + 1
    room = theta_T - base[:B]
    k = np.floor(room / sigma).astype(np.int64)
    # The floor may be off by one against the float grid; settle it on the grid itself.
    k -= (base[:B] + k * sigma > theta_T).astype(np.int64)
    k += (base[:B] + (k + 1) * sigma <= theta_T).astype(np.int64)
    nu_m = int(np.max(k * B + np.arange(B)))

    base.setflags(write=False)
    mus = sub.values[m - 1 : m1].copy()
    parents = sub.indices[m - 1 : m1].copy()
    mus.setflags(write=False)
    parents.setflags(write=False)
    logger.debug("Partition m=%d: B=%d sigma=%.6g nu_m=%d", m, B, sigma, nu_m)
    return Partition(m, m1, base, sigma, nu_m, theta0, theta_T, c2, mus, parents)


def build_partition(m: int, sub: GapSubsequence, params: ConstructionParams) -> Partition:
    """Build ``Δ_m`` with ``m1 = m1(m)`` from the construction constants."""
    if params.m0 is not None and m < params.m0:
        raise PreconditionError(f"m={m} is below m0={params.m0}")
    m1 = compute_m1(m, sub, params.c3)
    return assemble_partition(
        m, m1, sub, c2=params.c2, theta0=params.theta0, theta_T=params.theta_T
    )


# ---------------------------------------------------------------------------
# Arc points
# ---------------------------------------------------------------------------


class ArcPoint(NamedTuple):
    """A single arc point ``w = r0 e^{2πiθ_n}`` with ``n = kB + j`` and ``μ(w) = μ_{m+j}``."""

    n: int
    k: int
    j: int
    w: complex
    mu_w: complex


@dataclass(frozen=True)
class ArcPoints:
    """All arc points of a partition as parallel arrays indexed by ``n``."""

    partition: Partition
    r0: float

    def __len__(self) -> int:
        return self.partition.nu_m + 1

    @cached_property
    def n(self) -> IntArray:
        return np.arange(len(self), dtype=np.int64)

    @cached_property
    def k(self) -> IntArray:
        return self.n // self.partition.block_len

    @cached_property
    def j(self) -> IntArray:
        return self.n % self.partition.block_len

    @property
    def theta(self) -> FloatArray:
        return self.partition.thetas

    @cached_property
    def w(self) -> ComplexArray:
        return self.r0 * np.exp(1j * _TWO_PI * self.theta)

    @cached_property
    def mu(self) -> ComplexArray:
        return self.partition.mus[self.j]

    @cached_property
    def centers(self) -> ComplexArray:
        """Disk centres ``w μ(w)``."""
        return self.w * self.mu

    @property
    def mu_index(self) -> IntArray:
        """Subsequence position ``m + j`` of ``μ(w)``."""
        return self.partition.m + self.j

    @property
    def parent_index(self) -> IntArray:
        """Position of ``μ(w)`` in the parent sequence."""
        return self.partition.mu_parent_indices[self.j]

    def point(self, n: int) -> ArcPoint:
        k, j = divmod(n, self.partition.block_len)
        theta = self.partition.theta(n)
        w = self.r0 * complex(np.exp(1j * _TWO_PI * theta))
        return ArcPoint(n, k, j, w, complex(self.partition.mus[j]))

    def records(self, limit: int | None = None) -> list[ArcPointRecord]:
        stop = len(self) if limit is None else min(limit, len(self))
        return [
            ArcPointRecord(n=i, k=int(self.k[i]), j=int(self.j[i]),
                           w=to_pair(self.w[i]), mu=to_pair(self.mu[i]))
            for i in range(stop)
        ]


def arc_points(part: Partition, sub: GapSubsequence, params: ConstructionParams) -> ArcPoints:
    """Map ``Δ_m`` onto the arc ``r0 e^{2πiθ}`` and attach ``μ(w)``."""
    if part.m1 > len(sub) or not np.array_equal(part.mus, sub.values[part.m - 1 : part.m1]):
        raise ParameterError("partition was not built from this subsequence")
    return ArcPoints(part, params.r0)


# ---------------------------------------------------------------------------
# Locating points of the arc
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocatedBatch:
    """Brackets of many arc points at once (see :func:`locate`)."""

    a: ComplexArray
    theta: FloatArray
    rho: IntArray
    theta1: FloatArray
    theta2: FloatArray
    terminal: npt.NDArray[np.bool_]
    w0: ComplexArray
    mu_w0: ComplexArray
    mu_index: IntArray
    parent_index: IntArray

    def __len__(self) -> int:
        return int(self.a.size)

    def result(self, i: int) -> LocateResult:
        return LocateResult(
            a=to_pair(self.a[i]), theta=float(self.theta[i]), rho=int(self.rho[i]),
            theta1=float(self.theta1[i]), theta2=float(self.theta2[i]),
            terminal=bool(self.terminal[i]), w0=to_pair(self.w0[i]),
            mu_w0=to_pair(self.mu_w0[i]), mu_index=int(self.mu_index[i]),
            parent_index=int(self.parent_index[i]),
        )


def arc_parameter(a: npt.ArrayLike, params: ConstructionParams) -> FloatArray:
    """Parameter ``θ ∈ [θ_0, θ_T]`` of points on the arc.

    Raises:
        DomainError: If a point is off the circle ``|a| = r0`` or outside the arc.
    """
    pts = np.atleast_1d(np.asarray(a, dtype=np.complex128))
    radius = np.abs(pts)
    off = np.flatnonzero(np.abs(radius - params.r0) > RADIUS_RTOL * params.r0)
    if off.size:
        bad = complex(pts[off[0]])
        raise DomainError(f"point {bad} is off the circle |a| = {params.r0}")
    turns = np.angle(pts) / _TWO_PI
    theta = params.theta0 + np.mod(turns - params.theta0, 1.0)
    # Points just below θ_0 wrap to θ_0 + 1; points just past θ_T are snapped back.
    theta = np.where(params.theta0 + 1.0 - theta <= THETA_SNAP, params.theta0, theta)
    theta = np.where((theta > params.theta_T) & (theta - params.theta_T <= THETA_SNAP),
                     params.theta_T, theta)
    outside = np.flatnonzero(theta > params.theta_T)
    if outside.size:
        raise DomainError(
            f"point {complex(pts[outside[0]])} has parameter {theta[outside[0]]:.12g} "
            f"outside [{params.theta0}, {params.theta_T}]"
        )
    return theta


def locate_many(a: npt.ArrayLike, part: Partition, params: ConstructionParams) -> LocatedBatch:
    """Vectorized :func:`locate`."""
    pts = np.atleast_1d(np.asarray(a, dtype=np.complex128))
    theta = arc_parameter(pts, params)
    thetas = part.thetas
    rho = np.searchsorted(thetas, theta + THETA_SNAP, side="right").astype(np.int64) - 1
    rho = np.clip(rho, 0, part.nu_m)
    theta1 = thetas[rho]
    theta = np.maximum(theta, theta1)
    terminal = rho == part.nu_m
    theta2 = np.where(terminal, part.theta_T, thetas[np.minimum(rho + 1, part.nu_m)])

    j = rho % part.block_len
    mu = part.mus[j]
    limit = part.c2 / np.abs(mu) + 4 * np.spacing(part.theta_T)
    broken = np.flatnonzero(theta2 - theta1 > limit)
    if broken.size:
        i = int(broken[0])
        raise InternalInconsistencyError(
            f"bracket [{theta1[i]!r}, {theta2[i]!r}] is wider than c2/|mu(w0)| = {limit[i]!r}"
        )
    w0 = params.r0 * np.exp(1j * _TWO_PI * theta1)
    return LocatedBatch(
        a=pts, theta=theta, rho=rho, theta1=theta1, theta2=theta2, terminal=terminal,
        w0=w0, mu_w0=mu, mu_index=part.m + j, parent_index=part.mu_parent_indices[j],
    )


def locate(a: complex, part: Partition, params: ConstructionParams) -> LocateResult:
    """Bracket ``a = r0 e^{2πiθ}`` between consecutive partition values.

    Either ``θ_ρ ≤ θ < θ_{ρ+1}``, or ``ρ = ν_m`` and the bracket is
    ``[θ_{ν_m}, θ_T]``. In both cases ``θ_2 - θ_1 ≤ c2/|μ(w_0)|``.
    """
    return locate_many([a], part, params).result(0)
