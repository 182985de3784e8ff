"""Compensated summation helpers shared by the sequence and partition modules.

Single sums go through :func:`math.fsum` (exactly rounded). Running sums are
accumulated in ``numpy.longdouble`` and rounded back to float64 once, which
keeps the drift of long prefix/tail sums far below the margins the checks
compare against.
"""

from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]


def exact_sum(values: Iterable[float] | FloatArray) -> float:
    """Return the correctly rounded sum of *values*."""
    if isinstance(values, np.ndarray):
        return math.fsum(values.tolist())
    return math.fsum(values)


def prefix_sums(values: FloatArray) -> FloatArray:
    """Return ``P`` with ``P[i] = values[0] + ... + values[i]``."""
    acc = np.cumsum(np.asarray(values, dtype=np.longdouble))
    return acc.astype(np.float64)


def tail_sums(values: FloatArray) -> FloatArray:
    """Return ``T`` with ``T[i] = values[i] + ... + values[-1]``."""
    rev = np.asarray(values, dtype=np.longdouble)[::-1]
    return np.cumsum(rev)[::-1].astype(np.float64)

