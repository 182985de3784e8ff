"""Reads and writes hclab's JSON and CSV artifacts.

Provides functions to load run configurations and sequences, compute the
config digest, and persist reports, fits, partitions and plot data. Every
model is written with ``model_dump(mode="json")`` as indented JSON.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, TypeAdapter

from hclab.approx import (
    FittedPolynomial,
    TargetSpec,
    default_c_samples,
    enumerate_dense_polynomials,
    polynomial_from_pairs,
)
from hclab.disks import DiskFamily
from hclab.errors import ParameterError
from hclab.models import (
    ArcPointRecord,
    FitExport,
    RunConfig,
    SequenceFile,
    SequenceSource,
    VerificationReport,
)
from hclab.sequences import Sequence, generate_prop51_sequence, sequence_from_formula

REPORT_FILE = "report.json"
FIT_FILE = "fit.json"
PARTITION_FILE = "partition.json"
ARC_POINTS_FILE = "arc_points.json"
CERTIFICATE_FILE = "disks.json"
SAMPLES_CSV = "samples.csv"
CENTERS_CSV = "disk_centers.csv"

logger = logging.getLogger(__name__)

_ARC_POINTS = TypeAdapter(list[ArcPointRecord])


def save_model(path: str | Path, model: BaseModel) -> Path:
    """Write *model* as indented JSON to *path*, creating parent directories.

    Args:
        path: Destination file.
        model: Any pydantic model; aliases are used for keys.

    Returns:
        The path written.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    data = model.model_dump(mode="json", by_alias=True)
    target.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return target


def save_arc_points(path: str | Path, records: list[ArcPointRecord]) -> Path:
    """Write arc points as a bare JSON array of ``{n, k, j, w, mu}`` records."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    data = _ARC_POINTS.dump_python(records, mode="json")
    target.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return target


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a run configuration.

    Raises:
        FileNotFoundError: If *path* does not exist.
        json.JSONDecodeError: If the file is not JSON.
        pydantic.ValidationError: If the JSON does not match the schema.
    """
    raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    return RunConfig.model_validate(data)


def config_digest(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON of *config* without its ``output`` section."""
    data = config.model_dump(mode="json", exclude={"output"})
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def fit_digest(config: RunConfig) -> str:
    """Digest of the sections a fit depends on (not ``verification`` or ``output``)."""
    data = config.model_dump(mode="json", exclude={"output", "verification"})
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def check_digest(seq: Sequence, options: dict[str, object]) -> str:
    """SHA-256 over the sequence terms, its metadata and the check options."""
    terms = hashlib.sha256(np.ascontiguousarray(seq.terms).tobytes()).hexdigest()
    data = {
        "terms": terms,
        "provenance": seq.provenance.value,
        "formula": seq.formula,
        "options": options,
    }
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------


def save_sequence(path: str | Path, seq: Sequence) -> Path:
    """Write *seq* as ``{"provenance", "terms": [[re, im], ...], "formula"}``."""
    terms = np.column_stack((seq.terms.real, seq.terms.imag)).tolist()
    record = SequenceFile(provenance=seq.provenance, terms=terms, formula=seq.formula)
    return save_model(path, record)


def load_sequence(path: str | Path) -> Sequence:
    """Read a sequence file written by :func:`save_sequence`."""
    raw = Path(path).read_text(encoding="utf-8")
    record = SequenceFile.model_validate(json.loads(raw))
    terms = np.array([complex(re, im) for re, im in record.terms], dtype=np.complex128)
    return Sequence(terms, provenance=record.provenance, formula=record.formula)


def sequence_from_source(source: SequenceSource, base_dir: str | Path = ".") -> Sequence:
    """Materialize the sequence a run configuration points at.

    Relative file paths are resolved against *base_dir* (the config's folder).
    """
    if source.kind == "formula":
        assert source.formula is not None
        return sequence_from_formula(source.formula, source.length)
    if source.kind == "file":
        assert source.path is not None
        path = Path(source.path)
        return load_sequence(path if path.is_absolute() else Path(base_dir) / path)
    assert source.M is not None and source.blocks is not None
    return generate_prop51_sequence(source.M, source.blocks).enumeration


def target_from_config(config: RunConfig) -> TargetSpec:
    """Build the target data (``g``, ``p``, samples of ``C``) of a run configuration."""
    target = config.target
    R1 = config.construction.R1
    g = polynomial_from_pairs(target.g)
    if target.p_index is not None:
        p = enumerate_dense_polynomials(target.p_index)
    else:
        p = polynomial_from_pairs(target.p)
    if target.c_samples is None:
        samples = default_c_samples(R1)
    else:
        samples = np.array([complex(re, im) for re, im in target.c_samples])
    try:
        return TargetSpec(g=g, p=p, c_samples=samples, R1=R1)
    except ParameterError as exc:
        raise ParameterError(f"target.c_samples: {exc}") from exc


# ---------------------------------------------------------------------------
# Fits and reports
# ---------------------------------------------------------------------------


def save_fit(path: str | Path, fit: FittedPolynomial, digest: str = "") -> Path:
    """Write *fit* tagged with the :func:`fit_digest` of the config that produced it."""
    return save_model(path, fit.export().model_copy(update={"config_digest": digest}))


def load_fit(path: str | Path, expected_digest: str | None = None) -> FittedPolynomial:
    """Read a fit written by :func:`save_fit`.

    Raises:
        ParameterError: If *expected_digest* is given and the fit was produced
            under a different configuration.
    """
    raw = Path(path).read_text(encoding="utf-8")
    export = FitExport.model_validate(json.loads(raw))
    if expected_digest is not None:
        if not export.config_digest:
            logger.warning("%s carries no config digest; it cannot be matched to the config", path)
        elif export.config_digest != expected_digest:
            raise ParameterError(
                f"{path} was fitted under config {export.config_digest[:12]}, "
                f"not the current config {expected_digest[:12]}"
            )
    return FittedPolynomial.from_export(export)


def load_report(path: str | Path) -> VerificationReport:
    raw = Path(path).read_text(encoding="utf-8")
    return VerificationReport.model_validate(json.loads(raw))


def write_samples_csv(path: str | Path, report: VerificationReport) -> Path:
    """Per-sample table ``theta, n, margin, err, term1, term2, pass`` for plotting."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "n", "margin", "err", "term1", "term2", "pass"])
        for s in report.samples:
            writer.writerow(
                [repr(s.theta), s.n, repr(s.margin), repr(s.err), repr(s.term1), repr(s.term2),
                 int(s.passed)]
            )
    return target


def write_centers_csv(path: str | Path, family: DiskFamily) -> Path:
    """Disk centres ``index, n, j, re, im``; index 0 is the base disk."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "n", "j", "re", "im"])
        writer.writerow([0, "", "", 0.0, 0.0])
        for i, (n, j, c) in enumerate(
            zip(family.n.tolist(), family.j.tolist(), family.centers.tolist(), strict=True),
            start=1,
        ):
            writer.writerow([i, n, j, repr(c.real), repr(c.imag)])
    return target
