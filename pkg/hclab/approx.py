"""Piecewise target on the disk family and its polynomial surrogate.

The target ``h`` equals ``g`` on the base disk and ``p(z - w μ(w))`` on each
translated disk. :func:`fit_polynomial` searches degrees upward, solving a
discrete least-squares problem in the scaled monomial basis ``(z / scale)^k``
with an orthogonal-factorization solver, and reports the sup error it
actually measured on validation points that never enter the fit.

Dense polynomial enumeration
----------------------------
``p_j`` (``j ≥ 1``) is defined by three explicit bijections:

1. ``N = j - 1`` is read as the finite sequence ``e_0, ..., e_r`` of gaps
   between its set bits (``e_0`` is the lowest set bit, ``e_i`` the number of
   zeros between set bits ``i - 1`` and ``i``); ``N = 0`` is the empty sequence.
2. ``e ∈ ℕ`` becomes a Gaussian rational ``q(x) + i q(y)`` with ``(x, y)``
   the inverse Cantor pairing of ``e``, ``q(0) = 0``, ``q(2t - 1) = cw(t)``,
   ``q(2t) = -cw(t)``, and ``cw(t) = fusc(t) / fusc(t + 1)`` the Calkin-Wilf
   enumeration of the positive rationals.
3. Coefficient ``k < r`` is the Gaussian rational of ``e_k``; the leading
   coefficient uses ``e_r + 1`` so it is never zero.

So ``p_1 = 0``, ``p_2 = 1``, ``p_3 = i`` and ``p_4 = z``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cache

import numpy as np
import numpy.typing as npt
import sympy
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P
from scipy import linalg as la
from scipy.special import comb

from hclab.disks import DiskFamily
from hclab.errors import DomainError, ParameterError, PreconditionError
from hclab.models import (
    VACUOUS_RTOL,
    DegreeTrial,
    FitExport,
    FitStatus,
    FitStrategy,
    Pair,
    SamplingPlan,
    to_pair,
)
from hclab.sequences import ComplexArray, IntArray

logger = logging.getLogger(__name__)

# Boundary points used to bound |p'| on the circle of radius R1 + 1.
_DERIVATIVE_SAMPLES = 4096
# Disks per chunk when evaluating coverage points.
_COVERAGE_CHUNK = 200_000

def polynomial_from_pairs(pairs: list[Pair] | None) -> Polynomial:
    """Polynomial with complex coefficients ``[[re, im], ...]`` (constant term first)."""
    if not pairs:
        return Polynomial([0j])
    return Polynomial(np.array([complex(re, im) for re, im in pairs], dtype=np.complex128))


def polynomial_to_pairs(poly: Polynomial) -> list[Pair]:
    return [to_pair(c) for c in np.asarray(poly.coef, dtype=np.complex128)]


# ---------------------------------------------------------------------------
# δ0
# ---------------------------------------------------------------------------


def choose_delta0(p: Polynomial, R1: float, s1: int) -> float:
    """Pick ``δ0`` so that ``|z| ≤ R1`` and ``|z - w| < δ0`` force ``|p(z) - p(w)| < 1/(2 s1)``.

    ``max |p'|`` on ``|z| ≤ R1 + 1`` is bounded by the smaller of the
    coefficient bound ``Σ |c_k| ρ^k`` and 1.01 times the largest sampled
    boundary value.
    """
    if not R1 > 0:
        raise ParameterError(f"R1 must be positive, got {R1}")
    if s1 < 1:
        raise ParameterError(f"s1 must be a positive integer, got {s1}")
    coef = np.trim_zeros(np.asarray(p.coef, dtype=np.complex128), "b")
    if coef.size <= 1:
        return 0.5

    dp = Polynomial(coef).deriv()
    rho = R1 + 1.0
    powers = rho ** np.arange(dp.coef.size)
    coefficient_bound = float(np.sum(np.abs(dp.coef) * powers))
    ring = rho * np.exp(2j * np.pi * np.arange(_DERIVATIVE_SAMPLES) / _DERIVATIVE_SAMPLES)
    sampled_bound = 1.01 * float(np.max(np.abs(dp(ring))))
    lipschitz = min(coefficient_bound, sampled_bound)
    delta0 = min(0.99, 0.99 / (2 * s1 * max(lipschitz, 1.0)))
    logger.debug("delta0=%.6g from max|p'| <= %.6g", delta0, lipschitz)
    return delta0


# ---------------------------------------------------------------------------
# Dense enumeration of Gaussian-rational polynomials
# ---------------------------------------------------------------------------


@cache
def _fusc(n: int) -> int:
    a, b = 1, 0
    while n:
        if n & 1:
            b += a
        else:
            a += b
        n >>= 1
    return b


def _rational(x: int) -> sympy.Rational:
    if x == 0:
        return sympy.Rational(0)
    t = (x + 1) // 2
    value = sympy.Rational(_fusc(t), _fusc(t + 1))
    return value if x % 2 else -value


def _gaussian(e: int) -> tuple[sympy.Rational, sympy.Rational]:
    w = (math.isqrt(8 * e + 1) - 1) // 2
    y = e - w * (w + 1) // 2
    return _rational(w - y), _rational(y)


def dense_polynomial_coefficients(j: int) -> list[tuple[sympy.Rational, sympy.Rational]]:
    """Exact ``(re, im)`` coefficients of ``p_j``, constant term first."""
    if j < 1:
        raise ParameterError(f"j must be at least 1, got {j}")
    N = j - 1
    gaps: list[int] = []
    previous = -1
    bit = 0
    while N:
        if N & 1:
            gaps.append(bit - previous - 1)
            previous = bit
        N >>= 1
        bit += 1
    if not gaps:
        return [(sympy.Rational(0), sympy.Rational(0))]
    coefficients = [_gaussian(e) for e in gaps[:-1]]
    coefficients.append(_gaussian(gaps[-1] + 1))
    return coefficients


def enumerate_dense_polynomials(j: int) -> Polynomial:
    """The ``j``-th polynomial with Gaussian-rational coefficients (see module docs)."""
    coefficients = dense_polynomial_coefficients(j)
    return Polynomial(
        np.array([complex(float(re), float(im)) for re, im in coefficients], dtype=np.complex128)
    )


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TargetSpec:
    """The data fed into the approximation step."""

    g: Polynomial
    p: Polynomial
    c_samples: ComplexArray
    R1: float

    def __post_init__(self) -> None:
        samples = np.atleast_1d(np.asarray(self.c_samples, dtype=np.complex128))
        if samples.size and np.max(np.abs(samples)) > self.R1 * (1.0 + 1e-12):
            raise ParameterError(f"C samples must lie in |z| <= R1 = {self.R1}")
        samples.setflags(write=False)
        object.__setattr__(self, "c_samples", samples)


def default_c_samples(R1: float, points: int = 64) -> ComplexArray:
    """Circle ``|z| = R1``, the circle ``|z| = R1/2`` and the origin."""
    angles = 2.0 * np.pi * np.arange(points) / points
    circle = np.exp(1j * angles)
    return np.concatenate((R1 * circle, 0.5 * R1 * circle, [0j]))


@dataclass(frozen=True)
class PiecewiseTarget:
    """``h = g`` on the base disk, ``h = p(z - w μ(w))`` on each translated disk."""

    family: DiskFamily
    g: Polynomial
    p: Polynomial

    def on_disks(self, z: ComplexArray, disk: IntArray) -> ComplexArray:
        """Evaluate ``h`` at points already known to lie in disk ``disk`` (0 = base)."""
        out = np.empty(z.shape, dtype=np.complex128)
        base = disk == 0
        out[base] = self.g(z[base])
        shifted = ~base
        out[shifted] = self.p(z[shifted] - self.family.centers[disk[shifted] - 1])
        return out

    def evaluate(self, z: npt.ArrayLike) -> ComplexArray:
        """Evaluate ``h`` anywhere on ``L``.

        Raises:
            DomainError: If a point lies outside every disk.
        """
        pts = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        disk = self.family.locate_many(pts)
        outside = np.flatnonzero(disk < 0)
        if outside.size:
            raise DomainError(f"point {complex(pts[outside[0]])} is not in L")
        return self.on_disks(pts, disk)

    __call__ = evaluate


def build_target(family: DiskFamily, g: Polynomial, p: Polynomial) -> PiecewiseTarget:
    """Assemble ``h`` on a family with a passing disjointness certificate."""
    if not family.certified:
        raise PreconditionError("the disk family has no passing disjointness certificate")
    return PiecewiseTarget(family, g, p)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _dense_disks(family: DiskFamily, plan: SamplingPlan) -> IntArray:
    """Disks sampled densely: all of them, or the base plus an even spread."""
    total = len(family)
    if total <= plan.max_fit_disks:
        return np.arange(total, dtype=np.int64)
    spread = np.linspace(1, total - 1, plan.max_fit_disks - 1).round().astype(np.int64)
    return np.unique(np.concatenate(([0], spread)))


def _disk_centers(family: DiskFamily, disks: IntArray) -> ComplexArray:
    out = np.zeros(disks.shape, dtype=np.complex128)
    translated = disks > 0
    out[translated] = family.centers[disks[translated] - 1]
    return out


def _rings(
    family: DiskFamily, disks: IntArray, plan: SamplingPlan, per_circle: int, offset: float
) -> tuple[ComplexArray, IntArray]:
    angles = 2.0 * np.pi * (np.arange(per_circle) + offset) / per_circle
    radii = family.radius * np.arange(plan.rings, 0, -1) / plan.rings
    offsets = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    if plan.include_center and offset == 0.0:
        offsets = np.concatenate((offsets, [0j]))
    centers = _disk_centers(family, disks)
    z = (centers[:, None] + offsets[None, :]).ravel()
    owner = np.repeat(disks, offsets.size)
    return z, owner


def fit_samples(family: DiskFamily, plan: SamplingPlan) -> tuple[ComplexArray, IntArray]:
    """Fitting points: ``rings`` circles of ``boundary_points`` points (and centres)."""
    return _rings(family, _dense_disks(family, plan), plan, plan.boundary_points, 0.0)


def validation_samples(family: DiskFamily, plan: SamplingPlan) -> tuple[ComplexArray, IntArray]:
    """Validation points on the densely sampled disks, at angles no fitting point uses."""
    per_circle = plan.boundary_points * plan.validation_factor
    return _rings(family, _dense_disks(family, plan), plan, per_circle, 0.5)


def _coverage_offsets(family: DiskFamily, plan: SamplingPlan) -> ComplexArray:
    angles = 2.0 * np.pi * (np.arange(plan.coverage_points) + 0.25) / plan.coverage_points
    return family.radius * np.exp(1j * angles)


def _sparse_disks(family: DiskFamily, dense: IntArray) -> IntArray:
    return np.setdiff1d(np.arange(1, len(family), dtype=np.int64), dense, assume_unique=True)


def _coverage_error(
    f: FittedPolynomial, h: PiecewiseTarget, plan: SamplingPlan, dense: IntArray
) -> float:
    """Sup error on ``coverage_points`` boundary points of every sparsely sampled disk."""
    family = h.family
    sparse = _sparse_disks(family, dense)
    if sparse.size == 0:
        return 0.0
    offsets = _coverage_offsets(family, plan)
    expected = h.p(offsets)
    worst = 0.0
    for lo in range(0, sparse.size, _COVERAGE_CHUNK):
        chunk = sparse[lo : lo + _COVERAGE_CHUNK]
        z = family.centers[chunk - 1][:, None] + offsets[None, :]
        worst = max(worst, float(np.max(np.abs(f(z) - expected[None, :]))))
    return worst


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FittedPolynomial:
    """``f(z) = Σ_k coefficients[k] (z / scale)^k`` with its measured error.

    ``target_norm`` is the largest ``|h|`` on the validation points; a fit whose
    error reaches it approximates nothing (see :attr:`vacuous`).
    """

    coefficients: ComplexArray
    scale: float
    fit_error: float
    target_error: float
    status: FitStatus
    strategy: FitStrategy = FitStrategy.lstsq
    degree_search: tuple[DegreeTrial, ...] = field(default_factory=tuple)
    validated_disks: int = 0
    densely_sampled_disks: int = 0
    target_norm: float = math.inf

    @property
    def degree(self) -> int:
        return int(self.coefficients.size) - 1

    def __call__(self, z: npt.ArrayLike) -> ComplexArray:
        return np.asarray(P.polyval(np.asarray(z) / self.scale, self.coefficients))

    @property
    def vacuous(self) -> bool:
        """Whether the measured error is no better than that of ``f = 0``."""
        if not math.isfinite(self.target_norm) or self.target_norm <= 0:
            return False
        return self.fit_error >= (1.0 - VACUOUS_RTOL) * self.target_norm

    def unscaled_coefficients(self) -> ComplexArray:
        """Coefficients in the plain monomial basis ``z^k``."""
        return self.coefficients / self.scale ** np.arange(self.coefficients.size)

    def export(self) -> FitExport:
        return FitExport(
            degree=self.degree,
            scale=self.scale,
            coefficients=[to_pair(c) for c in self.coefficients],
            fit_error=self.fit_error,
            target_error=self.target_error,
            status=self.status,
            strategy=self.strategy,
            validated_disks=self.validated_disks,
            densely_sampled_disks=self.densely_sampled_disks,
            degree_search=list(self.degree_search),
            target_norm=self.target_norm if math.isfinite(self.target_norm) else None,
        )

    @classmethod
    def from_export(cls, data: FitExport) -> FittedPolynomial:
        coefficients = np.array([complex(re, im) for re, im in data.coefficients])
        return cls(
            coefficients=coefficients,
            scale=data.scale,
            fit_error=data.fit_error,
            target_error=data.target_error,
            status=data.status,
            strategy=data.strategy,
            degree_search=tuple(data.degree_search),
            validated_disks=data.validated_disks,
            densely_sampled_disks=data.densely_sampled_disks,
            target_norm=math.inf if data.target_norm is None else data.target_norm,
        )


def _jet_system(
    h: PiecewiseTarget, disks: IntArray, order: int, degree: int, scale: float
) -> tuple[ComplexArray, ComplexArray]:
    """Rows matching ``s^r f^{(r)}(c) / r!`` to the Taylor coefficients of ``h`` at centres."""
    centers = _disk_centers(h.family, disks) / scale
    ell = np.arange(degree + 1)
    rows: list[ComplexArray] = []
    rhs: list[ComplexArray] = []
    g_coef = np.asarray(h.g.coef, dtype=np.complex128)
    p_coef = np.asarray(h.p.coef, dtype=np.complex128)
    for r in range(order):
        weights = comb(ell, r)
        power = np.clip(ell - r, 0, None)
        block = weights[None, :] * centers[:, None] ** power[None, :]
        block[:, ell < r] = 0.0
        rows.append(block)
        taylor = np.where(disks == 0, g_coef[r] if r < g_coef.size else 0j,
                          p_coef[r] if r < p_coef.size else 0j)
        rhs.append(taylor * scale**r)
    return np.vstack(rows), np.concatenate(rhs)


def fit_polynomial(
    h: PiecewiseTarget,
    target_error: float,
    degree_cap: int = 24,
    sampling: SamplingPlan | None = None,
    *,
    strategy: FitStrategy = FitStrategy.lstsq,
    jet_order: int = 2,
) -> FittedPolynomial:
    """Search degrees ``0..degree_cap`` for a polynomial within *target_error* of ``h``.

    Stops at the first degree whose validation sup error is below
    *target_error* and returns the best fit found either way; a missed target
    is reported through ``status``, not raised. The returned ``fit_error``
    is measured on the full validation set, including coverage points on
    every disk that was not densely sampled.
    """
    if not target_error > 0:
        raise ParameterError(f"target_error must be positive, got {target_error}")
    if degree_cap < 1:
        raise ParameterError(f"degree_cap must be at least 1, got {degree_cap}")
    plan = sampling or SamplingPlan()
    family = h.family

    z_fit, owner_fit = fit_samples(family, plan)
    y_fit = h.on_disks(z_fit, owner_fit)
    z_val, owner_val = validation_samples(family, plan)
    y_val = h.on_disks(z_val, owner_val)
    dense = np.unique(owner_fit)
    if dense.size < len(family):
        logger.warning(
            "Fitting on %d of %d disks; the rest are validated on %d points each",
            dense.size, len(family), plan.coverage_points,
        )
    target_norm = float(np.max(np.abs(y_val))) if y_val.size else 0.0
    if _sparse_disks(family, dense).size:
        coverage = np.abs(h.p(_coverage_offsets(family, plan)))
        target_norm = max(target_norm, float(np.max(coverage)))
    scale = float(np.max(np.abs(z_fit))) or 1.0
    u_fit = z_fit / scale

    trials: list[DegreeTrial] = []
    best: ComplexArray | None = None
    best_error = math.inf
    for degree in range(degree_cap + 1):
        if strategy is FitStrategy.hermite_jets:
            A, b = _jet_system(h, dense, jet_order, degree, scale)
        else:
            A, b = np.vander(u_fit, degree + 1, increasing=True), y_fit
        coef, *_ = la.lstsq(A, b, lapack_driver="gelsy")
        coef = np.asarray(coef, dtype=np.complex128)
        residual = float(np.max(np.abs(P.polyval(u_fit, coef) - y_fit)))
        val_error = float(np.max(np.abs(P.polyval(z_val / scale, coef) - y_val)))
        if val_error < best_error:
            best, best_error = coef, val_error
        trials.append(
            DegreeTrial(
                degree=degree, residual=residual, validation_error=val_error,
                best_error=best_error,
            )
        )
        logger.debug("degree %d: residual %.3e validation %.3e", degree, residual, val_error)
        if val_error < target_error:
            break

    assert best is not None
    provisional = FittedPolynomial(best, scale, best_error, target_error, FitStatus.met, strategy)
    fit_error = max(best_error, _coverage_error(provisional, h, plan, dense))
    status = FitStatus.met if fit_error < target_error else FitStatus.target_missed
    if status is FitStatus.target_missed:
        logger.warning(
            "Fit missed target %.3e: best error %.3e at degree %d",
            target_error, fit_error, best.size - 1,
        )
    fit = FittedPolynomial(
        coefficients=best,
        scale=scale,
        fit_error=fit_error,
        target_error=target_error,
        status=status,
        strategy=strategy,
        degree_search=tuple(trials),
        validated_disks=len(family),
        densely_sampled_disks=int(dense.size),
        target_norm=target_norm,
    )
    if fit.vacuous:
        logger.warning(
            "Fit error %.3e does not improve on f = 0 (sup|h| = %.3e)", fit_error, target_norm
        )
    return fit


def sup_error(
    f: FittedPolynomial, h: PiecewiseTarget, validation: SamplingPlan | None = None
) -> float:
    """Discrete sup of ``|f - h|`` over the validation points of *validation*."""
    plan = validation or SamplingPlan()
    z, owner = validation_samples(h.family, plan)
    dense_error = float(np.max(np.abs(f(z) - h.on_disks(z, owner)))) if z.size else 0.0
    return max(dense_error, _coverage_error(f, h, plan, np.unique(owner)))


def coefficient_error(f: FittedPolynomial, reference: Polynomial) -> float:
    """Largest coefficient difference between *f* (unscaled) and *reference*."""
    mine = f.unscaled_coefficients()
    theirs = np.asarray(reference.coef, dtype=np.complex128)
    size = max(mine.size, theirs.size)
    mine = np.pad(mine, (0, size - mine.size))
    theirs = np.pad(theirs, (0, size - theirs.size))
    return float(np.max(np.abs(mine - theirs)))