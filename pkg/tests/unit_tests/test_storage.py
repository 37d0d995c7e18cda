# tests/unit_tests/test_storage.py
"""Unit tests for model, corpus, report and manifest files.

This module checks that files written by the library read back unchanged and
that malformed files are rejected with a message that locates the problem.
"""

import hashlib
import json
import logging

import numpy as np
import pandas as pd
import pytest

from ghp.errors import SchemaError, StorageError
from ghp.models import GraphonParams
from ghp.schemas import RunManifest
from ghp.seeding import generator
from ghp.storage import (
    file_digest,
    load_graphon,
    load_manifest,
    load_sequences,
    manifest_path,
    save_graphon,
    save_sequences,
    write_manifest,
    write_report_csv,
)


def test_graphon_file_reads_back_bit_exact(tmp_path):
    """Verify that a saved model loads with identical parameters.

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    params = GraphonParams.random(order=3, v_max=9, rng=generator(0), kernel_rate=0.7)
    path = tmp_path / "model.json"
    save_graphon(params, path)
    loaded = load_graphon(path)
    assert loaded == params
    assert loaded.g_coeffs.shape == (4, 4, 4)


def test_graphon_file_rejects_wrong_coefficient_count(tmp_path):
    """Verify that a coefficient list of the wrong length is a SchemaError.

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    path = tmp_path / "model.json"
    path.write_text(
        json.dumps({"f1": 0.1, "f2": 0.2, "S": 1, "g_coeffs": [0.0] * 4, "v_max": 3})
    )
    with pytest.raises(SchemaError, match="g_coeffs"):
        load_graphon(path)


def test_graphon_file_rejects_missing_field(tmp_path):
    """Verify that a missing field is named in the error.

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"f1": 0.1, "S": 0, "g_coeffs": [0.0] * 4, "v_max": 3}))
    with pytest.raises(SchemaError, match="f2"):
        load_graphon(path)


def test_missing_file_is_a_storage_error(tmp_path):
    """Verify that an unreadable path raises StorageError (exit code 3).

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    with pytest.raises(StorageError) as info:
        load_graphon(tmp_path / "absent.json")
    assert info.value.exit_code == 3


def test_sequences_read_back(tmp_path, separated_corpus):
    """Verify that a saved corpus loads with the same events.

    Args:
        tmp_path (Path): Per-test temporary directory.
        separated_corpus (list[EventSequence]): Two sequences on [0, 10].

    """
    path = tmp_path / "corpus.jsonl"
    save_sequences(separated_corpus, path)
    loaded = load_sequences(path)
    assert len(loaded) == 2
    for original, copy in zip(separated_corpus, loaded, strict=True):
        np.testing.assert_array_equal(original.times, copy.times)
        np.testing.assert_array_equal(original.types, copy.types)
        assert copy.num_types == original.num_types
        assert copy.horizon == original.horizon


def test_sequences_sort_events_and_skip_blank_lines(tmp_path):
    """Verify that unordered events are sorted and blank lines ignored.

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    path = tmp_path / "corpus.jsonl"
    line = json.dumps({"T": 5.0, "events": [[3.0, 1], [1.0, 0]], "num_types": 2})
    path.write_text(line + "\n\n" + line + "\n")
    loaded = load_sequences(path)
    assert len(loaded) == 2
    np.testing.assert_array_equal(loaded[0].times, [1.0, 3.0])
    np.testing.assert_array_equal(loaded[0].types, [0, 1])


def test_sequences_report_line_number(tmp_path):
    """Verify that a malformed line is located in the error message.

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    path = tmp_path / "corpus.jsonl"
    good = json.dumps({"T": 5.0, "events": [[1.0, 0]], "num_types": 1})
    bad = json.dumps({"T": 5.0, "events": [[1.0, 3]], "num_types": 1})
    path.write_text(good + "\n" + bad + "\n")
    with pytest.raises(SchemaError, match="line 2"):
        load_sequences(path)

    path.write_text(good + "\n{not json\n")
    with pytest.raises(SchemaError, match="line 2"):
        load_sequences(path)


def test_sequences_warn_about_ties(tmp_path, caplog):
    """Verify that tied event times are kept and logged.

    Args:
        tmp_path (Path): Per-test temporary directory.
        caplog (pytest.LogCaptureFixture): Log capture.

    """
    path = tmp_path / "corpus.jsonl"
    line = json.dumps({"T": 5.0, "events": [[1.0, 0], [1.0, 1]], "num_types": 2})
    path.write_text(line + "\n")
    with caplog.at_level(logging.WARNING, logger="ghp.storage"):
        loaded = load_sequences(path)
    assert len(loaded[0]) == 2
    assert "tied" in caplog.text


def test_report_csv_leaves_missing_values_empty(tmp_path):
    """Verify that missing values are written as empty cells.

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    path = tmp_path / "report.csv"
    frame = pd.DataFrame({"epoch": [1, 2], "d_fgw": [None, 0.5]})
    write_report_csv(frame, path)
    lines = path.read_text().splitlines()
    assert lines == ["epoch,d_fgw", "1,", "2,0.5"]


def test_manifest_sits_next_to_output(tmp_path):
    """Verify the manifest location, contents and input digests.

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    data = tmp_path / "out.json"
    data.write_text("{}\n")
    manifest = RunManifest(
        subcommand="simulate",
        config={"count": 3},
        seed=5,
        version="0.1.0",
        inputs={str(data): file_digest(data)},
        started_at="2026-01-01T00:00:00+00:00",
        seconds=0.25,
    )
    target = write_manifest(manifest, data)
    assert target == manifest_path(data)
    assert target.name == "out.json.manifest.yaml"
    assert load_manifest(target) == manifest
    assert file_digest(data) == hashlib.sha256(b"{}\n").hexdigest()


def test_manifest_rejects_invalid_document(tmp_path):
    """Verify that a manifest without required fields is a SchemaError.

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    path = tmp_path / "bad.manifest.yaml"
    path.write_text("subcommand: learn\n")
    with pytest.raises(SchemaError):
        load_manifest(path)


def test_sequence_with_time_outside_window_is_rejected(tmp_path):
    """Verify that an event after T is a SchemaError.

    Args:
        tmp_path (Path): Per-test temporary directory.

    """
    path = tmp_path / "corpus.jsonl"
    path.write_text(json.dumps({"T": 2.0, "events": [[3.0, 0]], "num_types": 1}))
    with pytest.raises(SchemaError, match="line 1"):
        load_sequences(path)
