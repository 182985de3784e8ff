"""Shared test fixtures for the hclab test suite.

Small fixtures (toy subsequences, hand-placed disks) keep most tests fast.
Every legitimate construction has at least ~10^5 disks, so tests that need a
real one share the session-scoped ``canonical_context`` built from
``configs/canonical.json`` and are marked ``slow``.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from hclab.approx import fit_polynomial
from hclab.artifacts import (
    config_digest,
    load_config,
    sequence_from_source,
    target_from_config,
)
from hclab.disks import DiskFamily, build_disks, check_disjoint
from hclab.models import ConstructionParams, RunConfig, VerificationReport
from hclab.partition import ArcPoint, Partition, assemble_partition, derive_constants
from hclab.sequences import GapSubsequence, Sequence, extract_gap_subsequence
from hclab.verify import ConstructionContext, build_context, run_experiment

CANONICAL_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "canonical.json"


# ---------------------------------------------------------------------------
# Constants and toy subsequences
# ---------------------------------------------------------------------------


@pytest.fixture()
def toy_params() -> ConstructionParams:
    """``r0 = 1``, ``R1 = 2``, ``δ0 = 0.5``: ``c4 = 2.5``, ``c3 ≈ 72.83``."""
    return derive_constants(
        r0=1.0, theta0=0.0, theta_T=0.25, R1=2.0, delta0=0.5, s1=1, k1=1, eps0=0.05
    )


@pytest.fixture()
def linear_sub() -> GapSubsequence:
    """``|μ_k| = 10k`` for ``k = 1..200`` (every term clears a gap of 5)."""
    seq = Sequence(10.0 * np.arange(1, 201))
    return extract_gap_subsequence(seq, 5.0)


@pytest.fixture()
def toy_partition(linear_sub: GapSubsequence) -> Partition:
    """``m = 1``, ``m1 = 4``, ``c2 = 0.1`` on ``[0, 1/4]``: period ``σ = 1/48``."""
    return assemble_partition(1, 4, linear_sub, c2=0.1, theta0=0.0, theta_T=0.25)


# ---------------------------------------------------------------------------
# Hand-placed disk families
# ---------------------------------------------------------------------------


def arc_point(n: int, theta: float, mu: complex, j: int = 0) -> ArcPoint:
    """An arc point on the unit circle at parameter *theta*."""
    w = complex(np.exp(2j * np.pi * theta))
    return ArcPoint(n=n, k=0, j=j, w=w, mu_w=complex(mu))


def ring_points(
    count: int, mu: float, step: float, offset: float = 0.0, start: int = 0
) -> list[ArcPoint]:
    """*count* arc points spaced *step* turns apart on the ring ``|μ| = mu``."""
    return [arc_point(start + i, offset + i * step, mu) for i in range(count)]


@pytest.fixture()
def two_ring_family(toy_params: ConstructionParams) -> DiskFamily:
    """Twelve disks on ``|μ| = 100`` and twelve on ``|μ| = 300``, certified."""
    points = ring_points(12, 100.0, 0.01) + ring_points(12, 300.0, 0.01, start=12)
    family = build_disks(points, toy_params)
    return family.with_certificate(check_disjoint(family))


@pytest.fixture()
def base_only_family(toy_params: ConstructionParams) -> DiskFamily:
    """Just the base disk of radius ``c4 = 2.5``, certified."""
    family = build_disks([], toy_params)
    return family.with_certificate(check_disjoint(family))


# ---------------------------------------------------------------------------
# Run configurations
# ---------------------------------------------------------------------------


@pytest.fixture()
def canonical_data() -> dict[str, Any]:
    """The canonical configuration as a plain dict, for tests that edit it."""
    return json.loads(CANONICAL_CONFIG.read_text(encoding="utf-8"))


@pytest.fixture()
def write_config(tmp_path: Path, canonical_data: dict[str, Any]):
    """Write a variant of the canonical config; output goes under *tmp_path*."""

    def _write(**sections: Any) -> Path:
        data = json.loads(json.dumps(canonical_data))
        data["output"] = {"dir": str(tmp_path / "out")}
        for name, value in sections.items():
            if isinstance(value, dict) and isinstance(data.get(name), dict):
                data[name].update(value)
            else:
                data[name] = value
        path = tmp_path / "config.json"
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return path

    return _write


@pytest.fixture(scope="session")
def canonical_config() -> RunConfig:
    return load_config(CANONICAL_CONFIG)


@pytest.fixture(scope="session")
def canonical_context(canonical_config: RunConfig) -> ConstructionContext:
    """The canonical construction (``λ_n = n²``) without a fit; built once."""
    seq = sequence_from_source(canonical_config.sequence, CANONICAL_CONFIG.parent)
    spec = target_from_config(canonical_config)
    return build_context(seq, spec, canonical_config.construction, with_fit=False)


@pytest.fixture(scope="session")
def canonical_fitted_context(
    canonical_config: RunConfig, canonical_context: ConstructionContext
) -> ConstructionContext:
    """The canonical construction with the fit ``build_context`` would attach."""
    options = canonical_config.fit
    fit = fit_polynomial(
        canonical_context.target, canonical_context.params.target_error, options.degree_cap,
        options.sampling, strategy=options.strategy, jet_order=options.jet_order,
    )
    return replace(canonical_context, fit=fit)


@pytest.fixture(scope="session")
def canonical_fitted_report(canonical_config: RunConfig) -> VerificationReport:
    """``run_experiment`` on the canonical configuration, fitted mode."""
    seq = sequence_from_source(canonical_config.sequence, CANONICAL_CONFIG.parent)
    return run_experiment(
        seq,
        target_from_config(canonical_config),
        num_samples=canonical_config.verification.num_samples,
        seed=canonical_config.verification.seed,
        adversarial_fraction=canonical_config.verification.adversarial_fraction,
        construction=canonical_config.construction,
        fit_options=canonical_config.fit,
        config_digest=config_digest(canonical_config),
    )
