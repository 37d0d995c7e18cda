# ghp/storage.py
"""The module contains the read and write operations for the files the
command line consumes and produces.

Graphon models are JSON documents, sequence corpora are JSON Lines (one
sequence per line), reports are CSV, and every data file gets a YAML run
manifest next to it. Floats are written in their shortest round-trip form,
so a model read back is bit-identical to the one written.
"""

import hashlib
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, ValidationError

from .errors import SchemaError, StorageError
from .models import EventSequence, GraphonParams
from .schemas import GraphonFile, RunManifest, SequenceRecord

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.yaml"


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write_text(path: Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _describe(error: ValidationError) -> str:
    first = error.errors()[0]
    where = ".".join(str(part) for part in first["loc"]) or "document"
    return f"{where}: {first['msg']}"


# --- Graphon models ---


def load_graphon(path: Path) -> GraphonParams:
    """Read a graphon model file.

    Args:
        path (Path): JSON model file.

    Returns:
        GraphonParams: The parsed parameters.

    Raises:
        StorageError: If the file cannot be read.
        SchemaError: If the document does not match the model schema.

    """
    try:
        document = GraphonFile.model_validate_json(_read_text(path))
    except ValidationError as exc:
        raise SchemaError(f"{path}: {_describe(exc)}") from exc
    order = document.S
    return GraphonParams(
        f1=document.f1,
        f2=document.f2,
        g_coeffs=np.array(document.g_coeffs).reshape(order + 1, order + 1, 4),
        v_max=document.v_max,
        kernel_rate=document.kernel_rate,
    )


def graphon_document(params: GraphonParams) -> GraphonFile:
    return GraphonFile(
        f1=params.f1,
        f2=params.f2,
        S=params.order,
        g_coeffs=params.g_coeffs.ravel().tolist(),
        v_max=params.v_max,
        kernel_rate=params.kernel_rate,
    )


def save_graphon(params: GraphonParams, path: Path) -> None:
    """Write a graphon model file."""
    _write_text(path, graphon_document(params).model_dump_json(indent=2) + "\n")


# --- Sequence corpora ---


def load_sequences(path: Path) -> list[EventSequence]:
    """Read a JSON Lines corpus.

    Blank lines are skipped. Events within a line may appear in any order;
    they are stable-sorted by time. Tied times are kept and logged.

    Args:
        path (Path): JSONL file, one {"T", "events", "num_types"} per line.

    Returns:
        list[EventSequence]: The sequences in file order.

    Raises:
        StorageError: If the file cannot be read.
        SchemaError: If a line is not valid JSON or violates the schema; the
            message names the line number.

    """
    sequences: list[EventSequence] = []
    for number, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = SequenceRecord.model_validate_json(line)
        except ValidationError as exc:
            raise SchemaError(f"{path}, line {number}: {_describe(exc)}") from exc
        sequence = EventSequence.from_events(record.T, record.events, record.num_types)
        ties = int(np.sum(np.diff(sequence.times) == 0))
        if ties:
            logger.warning("%s, line %d: %d tied event time(s)", path, number, ties)
        sequences.append(sequence)
    logger.info("Loaded %d sequences from %s", len(sequences), path)
    return sequences


def sequence_line(sequence: EventSequence) -> str:
    record = SequenceRecord(
        T=sequence.horizon, events=sequence.events(), num_types=sequence.num_types
    )
    return record.model_dump_json()


def save_sequences(sequences: list[EventSequence], path: Path) -> None:
    """Write a JSON Lines corpus, one sequence per line."""
    _write_text(path, "".join(sequence_line(seq) + "\n" for seq in sequences))


# --- Outputs ---


def write_json(payload, path: Path) -> None:
    """Write a JSON document (pydantic models are dumped with their schema)."""
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2)
    _write_text(path, text + "\n")


def write_report_csv(frame: pd.DataFrame, path: Path) -> None:
    """Write a report table; missing values become empty cells."""
    try:
        frame.to_csv(path, index=False)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc.strerror or exc}") from exc


# --- Provenance ---


def file_digest(path: Path) -> str:
    """SHA-256 of a file's bytes, hex encoded."""
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def manifest_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + MANIFEST_SUFFIX)


def write_manifest(manifest: RunManifest, output: Path) -> Path:
    """Write `<output>.manifest.yaml` next to a data file.

    Returns:
        Path: The manifest location.

    """
    target = manifest_path(output)
    text = yaml.safe_dump(manifest.model_dump(mode="json"), sort_keys=False)
    _write_text(target, text)
    return target


def load_manifest(path: Path) -> RunManifest:
    """Read a run manifest.

    Raises:
        StorageError: If the file cannot be read.
        SchemaError: If the document is not a valid manifest.

    """
    try:
        document = yaml.safe_load(_read_text(path))
        return RunManifest.model_validate(document)
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path}: not valid YAML ({exc})") from exc
    except ValidationError as exc:
        raise SchemaError(f"{path}: {_describe(exc)}") from exc
