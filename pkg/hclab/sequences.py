"""Candidate sequences Λ, gap subsequences and the growth conditions on them.

Everything here works on a stored prefix of the sequence. Condition checkers
return *proxy* verdicts computed on that prefix; the only verdict that is a
proof is ``analytic-pass``, which requires formula metadata and is opt-in.

Positions are 1-based throughout (``λ_1`` is ``terms[0]``).
"""

from __future__ import annotations

import logging
import math
import re
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import mpmath
import numpy as np
import numpy.typing as npt
import sympy

from hclab.errors import (
    ConstructionViolationError,
    InsufficientDataError,
    InsufficientGrowthError,
    ParameterError,
)
from hclab.models import (
    ClaimViolation,
    ClassMembership,
    ConditionKind,
    ConditionReport,
    ILambdaBounds,
    Provenance,
    Verdict,
)
from hclab.numerics import FloatArray, exact_sum, prefix_sums, tail_sums

logger = logging.getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]
IntArray = npt.NDArray[np.int64]

# Relative tolerance of the exact block-ratio checks.
RATIO_RTOL = 1e-12
# Additive slack on the in-block ratio bound, which is attained at the first step.
IN_BLOCK_SLACK = 1e-12
# Running maximum of L_n must grow by this factor between the middle and the last
# dyadic checkpoint for condition (C) to pass.
GROWTH_RATIO = 1.5
# Gaps swept by :func:`classify` when none are given.
DEFAULT_CLASS_GAPS = (10.0, 50.0, 100.0, 300.0)

_GENERATOR_RE = re.compile(r"^prop51\(M=(?P<M>[^,]+), blocks=(?P<blocks>\d+)\)$")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sequence:
    """A stored prefix of a sequence of non-zero complex numbers."""

    terms: ComplexArray
    provenance: Provenance = Provenance.user
    formula: str | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.terms, dtype=np.complex128).ravel()
        if arr.size == 0:
            raise ParameterError("a sequence needs at least one term")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("sequence terms must be finite")
        zeros = np.flatnonzero(arr == 0)
        if zeros.size:
            raise ParameterError(f"term {zeros[0] + 1} is zero; sequence terms must be non-zero")
        object.__setattr__(self, "terms", _readonly(arr))

    def __len__(self) -> int:
        return int(self.terms.size)

    @cached_property
    def moduli(self) -> FloatArray:
        return _readonly(np.abs(self.terms))

    def term(self, n: int) -> complex:
        """Return ``λ_n`` (1-based)."""
        return complex(self.terms[n - 1])

    def tends_to_infinity(self) -> bool:
        """Prefix proxy for ``|λ_n| -> ∞``.

        Every index in the first half of the prefix must be followed by a term
        at least one unit larger in modulus.
        """
        mod = self.moduli
        if mod.size < 2:
            return False
        later_max = np.maximum.accumulate(mod[::-1])[::-1][1:]
        half = max(1, mod.size // 2)
        return bool(np.all(later_max[:half] > mod[:half] + 1.0))


def _parse_formula(formula: str) -> tuple[sympy.Expr, sympy.Symbol]:
    n = sympy.Symbol("n", positive=True)
    try:
        expr = sympy.sympify(formula.replace("^", "**"), locals={"n": n})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ParameterError(f"cannot parse formula {formula!r}: {exc}") from exc
    if not isinstance(expr, sympy.Expr):
        raise ParameterError(f"formula {formula!r} is not an expression")
    extra = expr.free_symbols - {n}
    if extra:
        names = ", ".join(sorted(str(s) for s in extra))
        raise ParameterError(f"formula {formula!r} uses unknown symbols: {names}")
    return expr, n


def sequence_from_formula(formula: str, length: int = 20000) -> Sequence:
    """Evaluate *formula* (in the variable ``n``) at ``n = 1..length``.

    ``^`` is read as a power. Terms that overflow end the stored prefix.
    """
    if length < 1:
        raise ParameterError(f"length must be positive, got {length}")
    expr, n = _parse_formula(formula)
    fn = sympy.lambdify(n, expr, modules="numpy")
    grid = np.arange(1, length + 1, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        values = np.broadcast_to(np.asarray(fn(grid), dtype=np.complex128), grid.shape)

    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        if bad[0] == 0:
            raise ParameterError(f"formula {formula!r} is not finite at n=1")
        logger.warning(
            "Formula %r overflows at n=%d; keeping the first %d terms", formula, bad[0] + 1, bad[0]
        )
        values = values[: bad[0]]
    return Sequence(values, provenance=Provenance.formula, formula=formula)


def grows_at_most_linearly(formula: str) -> bool:
    """Prove ``|λ_n| -> ∞`` with ``|λ_n| = O(n)`` and bounded increments.

    For such sequences every gap subsequence grows at most linearly, so the sum
    of reciprocals diverges. Returns ``False`` whenever sympy cannot decide.
    """
    expr, n = _parse_formula(formula)
    modulus = sympy.Abs(expr)
    try:
        if sympy.limit(modulus, n, sympy.oo) != sympy.oo:
            return False
        ratio = sympy.limit(modulus / n, n, sympy.oo)
        slope = sympy.limit(sympy.diff(modulus, n), n, sympy.oo)
    except (NotImplementedError, ValueError, TypeError):
        logger.debug("sympy could not decide growth of %r", formula)
        return False
    return bool(ratio.is_finite) and bool(slope.is_finite)


# ---------------------------------------------------------------------------
# Gap subsequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapSubsequence:
    """Subsequence ``μ_k = λ_{indices[k-1]}`` whose moduli climb by more than *gap*."""

    parent: Sequence
    indices: IntArray
    gap: float
    exhausted: bool = False

    def __post_init__(self) -> None:
        idx = np.array(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", _readonly(idx))
        if idx.size == 0:
            return
        if np.any(np.diff(idx) <= 0) or idx[0] < 1 or idx[-1] > len(self.parent):
            raise ConstructionViolationError("gap subsequence indices must increase inside parent")
        mod = self.parent.moduli[idx - 1]
        if mod[0] <= self.gap or np.any(mod[1:] <= mod[:-1] + self.gap):
            raise ConstructionViolationError(f"gap subsequence violates gap {self.gap}")

    def __len__(self) -> int:
        return int(self.indices.size)

    @cached_property
    def values(self) -> ComplexArray:
        return _readonly(self.parent.terms[self.indices - 1])

    @cached_property
    def moduli(self) -> FloatArray:
        return _readonly(self.parent.moduli[self.indices - 1])

    def mu(self, k: int) -> complex:
        """Return ``μ_k`` (1-based)."""
        return complex(self.values[k - 1])


def extract_gap_subsequence(
    seq: Sequence, gap: float, max_len: int | None = None
) -> GapSubsequence:
    """Greedy extraction: always take the earliest admissible term.

    Every term before the last chosen one has modulus below the next threshold,
    so the next choice is the first position where the running maximum of the
    moduli exceeds it.
    """
    if not gap > 0:
        raise ParameterError(f"gap must be positive, got {gap}")
    if max_len is not None and max_len < 1:
        raise ParameterError(f"max_len must be positive, got {max_len}")

    mod = seq.moduli
    running = np.maximum.accumulate(mod)
    chosen: list[int] = []
    threshold = gap
    exhausted = False
    while max_len is None or len(chosen) < max_len:
        pos = int(np.searchsorted(running, threshold, side="right"))
        if pos >= mod.size:
            exhausted = True
            break
        chosen.append(pos + 1)
        threshold = float(mod[pos]) + gap

    if not chosen:
        raise InsufficientGrowthError(
            f"insufficient-growth: no stored term exceeds the gap {gap} "
            f"(max modulus {float(mod.max()):.6g})"
        )
    logger.debug("Extracted %d terms with gap %g (exhausted=%s)", len(chosen), gap, exhausted)
    return GapSubsequence(seq, np.asarray(chosen, dtype=np.int64), float(gap), exhausted)


def _dyadic_checkpoints(limit: int) -> list[int]:
    """Powers of two up to *limit* (1-based positions)."""
    return [1 << k for k in range(limit.bit_length()) if (1 << k) <= limit]


# ---------------------------------------------------------------------------
# Conditions (C), (Σ) and the ratio criterion
# ---------------------------------------------------------------------------


def check_condition_C(
    seq: Sequence,
    gap: float,
    truncation: int,
    growth_threshold: float = 5.0,
    *,
    allow_analytic: bool = False,
) -> ConditionReport:
    """Evidence for ``limsup |μ_n| Σ_{k≥n} 1/|μ_k| = ∞`` on the greedy gap subsequence.

    ``L_n = |μ_n| Σ_{k=n}^{N} 1/|μ_k|`` is computed for every stored ``n ≤ N``.
    The tail is cut at ``N``, so the verdict only looks at ``n ≤ N/2``: it
    passes when the largest ``L_n`` there exceeds *growth_threshold* and the
    running maximum keeps growing (by :data:`GROWTH_RATIO`) from the middle to
    the last dyadic checkpoint.
    """
    if truncation < 10:
        raise ParameterError(f"truncation must be at least 10, got {truncation}")
    sub = extract_gap_subsequence(seq, gap, max_len=truncation)
    mod = sub.moduli
    L = mod * tail_sums(1.0 / mod)

    window = max(1, L.size // 2)
    running = np.maximum.accumulate(L[:window])
    positions = _dyadic_checkpoints(window)
    if positions[-1] != window:
        positions.append(window)
    checkpoints = [float(running[p - 1]) for p in positions]
    middle = checkpoints[len(checkpoints) // 2]
    peak = float(running[-1])

    thresholds = {"growth_threshold": growth_threshold, "growth_ratio": GROWTH_RATIO}
    passes = peak > growth_threshold and len(checkpoints) >= 3 and peak >= GROWTH_RATIO * middle
    verdict = Verdict.passes_proxy if passes else Verdict.fails_proxy
    note = f"finite-truncation proxy on N={L.size} terms; not a proof"
    is_proof = False

    if allow_analytic and seq.formula and seq.provenance is Provenance.formula:
        if grows_at_most_linearly(seq.formula):
            verdict = Verdict.analytic_pass
            note = "λ_n = O(n) with bounded increments, so condition (Σ) and hence (C) hold"
            is_proof = True

    return ConditionReport(
        condition=ConditionKind.C,
        gap=sub.gap,
        truncation=truncation,
        evidence=L.tolist(),
        verdict=verdict,
        thresholds=thresholds,
        checkpoints=checkpoints,
        diagnostics={"checkpoint_positions": [float(p) for p in positions]},
        note=note,
        is_proof=is_proof,
    )


def check_condition_Sigma(
    seq: Sequence,
    gap: float,
    truncation: int,
    sum_threshold: float = 2.0,
    plateau_ratio: float = 0.75,
    *,
    allow_analytic: bool = False,
) -> ConditionReport:
    """Evidence for ``Σ 1/|μ_n| = ∞`` on the greedy gap subsequence.

    The partial sums are cut at dyadic checkpoints ``2^k``. A divergent
    harmonic-type sum gains roughly the same amount per doubling, a convergent
    one gains geometrically less, so the check passes when the scaled total
    ``|μ_1| Σ 1/|μ_n|`` exceeds *sum_threshold* and, over the upper half of
    the checkpoints, each increment is at least *plateau_ratio* times the
    previous one. Both tests are scale-free, so a large gap does not push a
    divergent sum under the threshold.
    """
    if truncation < 10:
        raise ParameterError(f"truncation must be at least 10, got {truncation}")
    sub = extract_gap_subsequence(seq, gap, max_len=truncation)
    partial = prefix_sums(1.0 / sub.moduli)
    scaled_total = float(partial[-1]) * float(sub.moduli[0])

    positions = _dyadic_checkpoints(partial.size)
    checkpoints = [float(partial[p - 1]) for p in positions]
    increments = np.diff(np.asarray(checkpoints))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = increments[1:] / increments[:-1]
    upper = ratios[ratios.size // 2 :]

    passes = (
        upper.size >= 2
        and scaled_total > sum_threshold
        and bool(np.all(upper >= plateau_ratio))
    )
    verdict = Verdict.passes_proxy if passes else Verdict.fails_proxy
    note = f"finite-truncation proxy on N={partial.size} terms; not a proof"
    is_proof = False

    if allow_analytic and seq.formula and seq.provenance is Provenance.formula:
        if grows_at_most_linearly(seq.formula):
            verdict = Verdict.analytic_pass
            note = "λ_n = O(n) with bounded increments; every gap subsequence is O(n)"
            is_proof = True

    return ConditionReport(
        condition=ConditionKind.sigma,
        gap=sub.gap,
        truncation=truncation,
        evidence=partial.tolist(),
        verdict=verdict,
        thresholds={"sum_threshold": sum_threshold, "plateau_ratio": plateau_ratio},
        checkpoints=checkpoints,
        diagnostics={
            "increment_ratios": np.nan_to_num(ratios, posinf=1e300).tolist(),
            "scaled_total": [scaled_total],
        },
        note=note,
        is_proof=is_proof,
    )


def check_liminf_ratio(seq: Sequence, truncation: int) -> ConditionReport:
    """Flag sequences whose consecutive ratios stay above 2.

    Evidence is the suffix minimum of ``|λ_{n+1}|/|λ_n|`` for each start ``n``.
    The suffix minimum is nondecreasing in ``n``, so "every checked tail stays
    above 2" reduces to the tail starting at the middle of the prefix.

    A ``passes-proxy`` verdict here only means "not ruled out": the ratio
    criterion is a necessary condition, so passing it says nothing about
    conditions (C) or (Σ).
    """
    if truncation < 2:
        raise ParameterError(f"truncation must be at least 2, got {truncation}")
    mod = seq.moduli[: min(truncation, len(seq))]
    if mod.size < 2:
        raise InsufficientDataError("need at least two terms for a ratio")
    ratios = mod[1:] / mod[:-1]
    tail_min = np.minimum.accumulate(ratios[::-1])[::-1]

    start = (tail_min.size - 1) // 2
    flagged = bool(tail_min[start] > 2.0)
    verdict = Verdict.provably_fails if flagged else Verdict.passes_proxy
    note = (
        "consecutive ratios stay above 2 on every checked tail; no common "
        "hypercyclic vector exists on the circle"
        if flagged
        else "ratio criterion does not rule the sequence out; it says nothing about (C) or (Σ)"
    )
    return ConditionReport(
        condition=ConditionKind.liminf,
        gap=0.0,
        truncation=truncation,
        evidence=tail_min.tolist(),
        verdict=verdict,
        thresholds={"ratio_bound": 2.0},
        checkpoints=[float(tail_min[start])],
        note=note,
    )


def classify(
    seq: Sequence,
    gaps: Iterable[float] = DEFAULT_CLASS_GAPS,
    truncation: int | None = None,
    *,
    allow_analytic: bool = False,
) -> ClassMembership:
    """Sweep (C) and (Σ) over *gaps* and report proxy class membership.

    Both conditions ask for a suitable subsequence at every gap, so a finite
    sweep can only support membership, never prove it, unless every verdict
    is ``analytic-pass``.
    """
    swept = [float(g) for g in gaps]
    if not swept:
        raise ParameterError("classify needs at least one gap")
    N = len(seq) if truncation is None else truncation
    passing = (Verdict.passes_proxy, Verdict.analytic_pass)

    c_verdicts: list[Verdict] = []
    sigma_verdicts: list[Verdict] = []
    for gap in swept:
        sigma = check_condition_Sigma(seq, gap, N, allow_analytic=allow_analytic)
        c = check_condition_C(seq, gap, N, allow_analytic=allow_analytic)
        sigma_verdicts.append(sigma.verdict)
        c_verdicts.append(c.verdict)
        logger.debug("gap %g: C %s, Sigma %s", gap, c.verdict.value, sigma.verdict.value)

    satisfies_sigma = all(v in passing for v in sigma_verdicts)
    satisfies_C = all(
        c in passing or s in passing for c, s in zip(c_verdicts, sigma_verdicts, strict=True)
    )
    is_proof = all(v is Verdict.analytic_pass for v in c_verdicts + sigma_verdicts)
    return ClassMembership(
        gaps=swept,
        truncation=N,
        c_verdicts=c_verdicts,
        sigma_verdicts=sigma_verdicts,
        satisfies_C=satisfies_C,
        satisfies_sigma=satisfies_sigma,
        is_proof=is_proof,
        note=f"swept {len(swept)} gaps on N={N} terms"
        + ("" if is_proof else "; finite-truncation proxy, not a proof"),
    )


# ---------------------------------------------------------------------------
# Block-structured family with prescribed i(Λ)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    """One block ``{(a + ν)² : ν = 0..⌊a⌋+1}`` (the first block is ``{1}``)."""

    index: int
    root: float
    values: FloatArray
    start: int

    @property
    def end(self) -> int:
        """1-based position of the last value in the enumeration."""
        return self.start + int(self.values.size) - 1


@dataclass(frozen=True)
class GeneratedSequence:
    """Blocks with ``min 𝔇_{n+1} = M · max 𝔇_n`` and their enumeration."""

    M: float
    blocks: tuple[Block, ...]
    enumeration: Sequence = field(repr=False)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @cached_property
    def values(self) -> FloatArray:
        return _readonly(self.enumeration.terms.real.copy())


def generate_prop51_sequence(M: float, num_blocks: int) -> GeneratedSequence:
    """Build the block sequence with ratio *M* across every block boundary.

    Block roots follow ``a_2 = √M`` and ``a_{n+1} = √M (a_n + ⌊a_n⌋ + 1)`` in
    50-digit arithmetic; block endpoints are rounded from that, interior values
    are squared in extended precision.
    """
    if not M > 1:
        raise ParameterError(f"M must be greater than 1, got {M}")
    if num_blocks < 2:
        raise ParameterError(f"num_blocks must be at least 2, got {num_blocks}")

    blocks: list[Block] = [Block(1, 1.0, _readonly(np.ones(1)), 1)]
    with mpmath.workdps(50):
        sqrt_m = mpmath.sqrt(mpmath.mpf(M))
        a = sqrt_m
        start = 2
        for index in range(2, num_blocks + 1):
            top = int(mpmath.floor(a)) + 1
            hi = np.longdouble(float(a))
            lo = np.longdouble(float(a - mpmath.mpf(float(a))))
            nu = np.arange(top + 1, dtype=np.longdouble)
            vals = ((hi + lo + nu) ** 2).astype(np.float64)
            vals[0] = float(a**2)
            vals[-1] = float((a + top) ** 2)
            blocks.append(Block(index, float(a), _readonly(vals), start))
            start += vals.size
            a = sqrt_m * (a + top)

    enum = np.concatenate([b.values for b in blocks])
    if np.any(np.diff(enum) <= 0):
        raise ConstructionViolationError("generated enumeration is not strictly increasing")
    for prev, nxt in zip(blocks, blocks[1:], strict=False):
        expected = M * float(prev.values[-1])
        if abs(float(nxt.values[0]) - expected) > 4 * float(np.spacing(expected)):
            raise ConstructionViolationError(
                f"block {nxt.index} starts at {nxt.values[0]!r}, expected {expected!r}"
            )
    logger.debug("Generated %d blocks (%d terms) for M=%g", num_blocks, enum.size, M)
    seq = Sequence(
        enum.astype(np.complex128),
        provenance=Provenance.generated,
        formula=f"prop51(M={M!r}, blocks={num_blocks})",
    )
    return GeneratedSequence(float(M), tuple(blocks), seq)


def parse_generator_formula(formula: str | None) -> tuple[float, int] | None:
    """Recover ``(M, num_blocks)`` from the metadata of a generated sequence."""
    if not formula:
        return None
    match = _GENERATOR_RE.match(formula)
    if match is None:
        return None
    return float(match["M"]), int(match["blocks"])


def regenerate(seq: Sequence) -> GeneratedSequence:
    """Rebuild the block structure of a generated sequence loaded from disk."""
    meta = parse_generator_formula(seq.formula)
    if meta is None:
        raise ParameterError("sequence carries no generator metadata")
    gen = generate_prop51_sequence(*meta)
    if len(gen.enumeration) != len(seq) or not np.allclose(
        gen.enumeration.terms, seq.terms, rtol=1e-12, atol=0.0
    ):
        raise ParameterError("stored terms do not match their generator metadata")
    return gen


class BlockStartValue(NamedTuple):
    """``λ_s Σ_{k=s}^{N} 1/λ_k`` at the first position ``s`` of a block."""

    block: int
    value: float
    bound: float


def claim4_block_values(gen: GeneratedSequence, lookahead: int = 3) -> list[BlockStartValue]:
    """Block-start values with the tail cut at the end of block ``m + lookahead``.

    ``bound`` is ``a_{m+1} / (36 M)``. Only blocks ``m ≥ 2`` with a full
    lookahead window are returned.
    """
    if lookahead < 1:
        raise ParameterError(f"lookahead must be positive, got {lookahead}")
    inv = 1.0 / gen.values
    out: list[BlockStartValue] = []
    for m in range(2, gen.num_blocks - lookahead + 1):
        block = gen.blocks[m - 1]
        end = gen.blocks[m + lookahead - 1].end
        value = float(block.values[0]) * exact_sum(inv[block.start - 1 : end])
        bound = gen.blocks[m].root / (36.0 * gen.M)
        out.append(BlockStartValue(m, value, bound))
    return out


def verify_claims(gen: GeneratedSequence, truncation: int | None = None) -> ConditionReport:
    """Check the structural inequalities of the generated family on its prefix.

    (a) ratio across each block boundary equals M; (b) in-block ratios are at
    most ``(1 + 1/a_m)^2``; (c) ``S_m < 1/(a_m - 1)`` for the reciprocal block
    sums; (d) block-start values exceed ``a_{m+1}/(36M)`` and strictly
    increase; plus ``a_m^2 S_m > a_m / 4``. Only blocks that end inside the
    truncation are examined.
    """
    values = gen.values
    N = values.size if truncation is None else min(truncation, values.size)
    if N < 1:
        raise ParameterError(f"truncation must be positive, got {truncation}")
    blocks = [b for b in gen.blocks if b.end <= N]
    inv = 1.0 / values[:N]
    violations: list[ClaimViolation] = []

    cross: list[float] = []
    for prev, nxt in zip(blocks, blocks[1:], strict=False):
        ratio = float(nxt.values[0] / prev.values[-1])
        cross.append(ratio)
        if abs(ratio / gen.M - 1.0) > RATIO_RTOL:
            violations.append(
                ClaimViolation(
                    check="cross-block-ratio", block=nxt.index, index=nxt.start,
                    value=ratio, bound=gen.M,
                )
            )

    sums: list[float] = []
    sum_bounds: list[float] = []
    for block in blocks[1:]:
        a = block.root
        ratios = block.values[1:] / block.values[:-1]
        bound = (1.0 + 1.0 / a) ** 2 + IN_BLOCK_SLACK
        worst = int(np.argmax(ratios))
        if ratios[worst] > bound:
            violations.append(
                ClaimViolation(
                    check="in-block-ratio", block=block.index, index=block.start + worst + 1,
                    value=float(ratios[worst]), bound=bound,
                )
            )
        s_m = exact_sum(1.0 / block.values)
        sums.append(s_m)
        sum_bounds.append(1.0 / (a - 1.0) if a > 1.0 else math.inf)
        if not s_m < sum_bounds[-1]:
            violations.append(
                ClaimViolation(
                    check="block-sum", block=block.index, value=s_m, bound=sum_bounds[-1],
                    detail="S_m < 1/(a_m - 1)",
                )
            )
        if not a * a * s_m > a / 4.0:
            violations.append(
                ClaimViolation(
                    check="block-sum-lower", block=block.index, value=a * a * s_m, bound=a / 4.0,
                )
            )

    starts: list[float] = []
    start_bounds: list[float] = []
    for block, nxt in zip(blocks[1:], blocks[2:], strict=False):
        t = float(block.values[0]) * exact_sum(inv[block.start - 1 : N])
        bound = nxt.root / (36.0 * gen.M)
        if not t > bound:
            violations.append(
                ClaimViolation(
                    check="block-start-value", block=block.index, index=block.start,
                    value=t, bound=bound,
                )
            )
        if starts and not t > starts[-1]:
            violations.append(
                ClaimViolation(
                    check="block-start-growth", block=block.index, index=block.start,
                    value=t, bound=starts[-1],
                )
            )
        starts.append(t)
        start_bounds.append(bound)

    verdict = Verdict.fails_proxy if violations else Verdict.passes_proxy
    if violations:
        logger.warning("%d claim violations for M=%g", len(violations), gen.M)
    return ConditionReport(
        condition=ConditionKind.claims,
        gap=0.0,
        truncation=N,
        evidence=starts,
        verdict=verdict,
        thresholds={"M": gen.M, "ratio_rtol": RATIO_RTOL, "in_block_slack": IN_BLOCK_SLACK},
        diagnostics={
            "cross_ratios": cross,
            "block_sums": sums,
            "block_sum_bounds": sum_bounds,
            "block_start_bounds": start_bounds,
        },
        violations=violations,
        note=f"checked {len(blocks)} blocks on N={N} terms",
    )


# ---------------------------------------------------------------------------
# i(Λ)
# ---------------------------------------------------------------------------


def i_lambda_bounds(gen: GeneratedSequence) -> ILambdaBounds:
    """Structural bounds on i(Λ) for a generated sequence.

    Any subsequence must cross infinitely many block boundaries, where the
    ratio is exactly M, so ``lower`` is the smallest boundary ratio. ``upper``
    is the smallest supremum of consecutive ratios over tails that start at a
    block and still contain a boundary.
    """
    if gen.num_blocks < 3:
        raise InsufficientDataError(
            f"i(Λ) bounds need at least 3 blocks, got {gen.num_blocks}"
        )
    values = gen.values
    ratios = values[1:] / values[:-1]
    boundary = np.array([b.end for b in gen.blocks[:-1]], dtype=np.int64)
    lower = float(ratios[boundary - 1].min())

    tail_max = np.maximum.accumulate(ratios[::-1])[::-1]
    starts = np.array([b.start for b in gen.blocks[1:-1]], dtype=np.int64)
    upper = float(tail_max[starts - 1].min())
    return ILambdaBounds(lower=lower, upper=max(upper, lower), method="structural")


def empirical_i_lambda(seq: Sequence) -> ILambdaBounds:
    """Empirical upper bound of i(Λ) for an arbitrary stored sequence."""
    mod = seq.moduli
    if mod.size < 3:
        raise InsufficientDataError("need at least three terms for an empirical i(Λ) bound")
    ratios = mod[1:] / mod[:-1]
    tail_max = np.maximum.accumulate(ratios[::-1])[::-1]
    starts = np.asarray(_dyadic_checkpoints(max(1, ratios.size // 2)), dtype=np.int64)
    upper = float(tail_max[starts - 1].min())
    return ILambdaBounds(lower=1.0, upper=max(upper, 1.0), method="empirical")
