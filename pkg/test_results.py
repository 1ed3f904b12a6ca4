#!/usr/bin/env python3
"""
Tests for result tables, manifests, sample archives and matrix dumps.
"""

import numpy as np

from src.results import (
    SampleRecord,
    format_cell,
    manifest_path,
    parse_table,
    read_archive,
    read_manifest,
    read_matrix_dump,
    read_table,
    render_table,
    verify_manifest,
    write_archive,
    write_manifest,
    write_matrix_dump,
    write_table,
)


def test_format_cell():
    assert format_cell(3) == "3"
    assert format_cell(np.int64(-7)) == "-7"
    assert format_cell(True) == "1"
    assert format_cell(0.1) == "0.10000000000000001"
    assert format_cell("sine form") == "sine form"


def test_table_text_is_a_fixpoint():
    rows = [[0.1, 2, 1 / 3], [-1e-300, 7, float("nan")], [np.float64(2.5), 0, 1e22]]
    text = render_table("eval-kernel", ["x", "n", "value"], rows, "eval-kernel.manifest")
    table = parse_table(text)
    assert table.command == "eval-kernel"
    assert table.manifest == "eval-kernel.manifest"
    assert table.columns == ["x", "n", "value"]
    assert render_table(table.command, table.columns, table.rows, table.manifest) == text


def test_table_column_access(tmp_path):
    path = write_table(tmp_path / "converge.csv", "converge", ["N", "max_gap"], [[25, 0.5], [50, 0.25]])
    table = read_table(path)
    assert table.manifest == manifest_path(path).name
    assert np.array_equal(table.column("N"), [25, 50])
    assert np.array_equal(table.column("max_gap"), [0.5, 0.25])


def test_manifest_records_hash(tmp_path):
    path = write_table(tmp_path / "painleve.csv", "painleve", ["t", "residual"], [[1.0, 1e-6]])
    manifest = write_manifest(path, "painleve", 0.5 - 0.25j, seed=7, version="1.0.0", N=50,
                              options={"order": "60", "t_list": "[1.0]"})
    assert manifest == tmp_path / "painleve.manifest"
    parsed = read_manifest(manifest)
    assert parsed.command == "painleve"
    assert parsed.s_re == 0.5 and parsed.s_im == -0.25
    assert parsed.N == 50 and parsed.samples is None
    assert parsed.result_file == "painleve.csv"
    assert parsed.options == {"order": "60", "t_list": "[1.0]"}
    assert verify_manifest(manifest)

    path.write_text(path.read_text() + "1,2\n")
    assert not verify_manifest(manifest)


def test_archive_round_trip(tmp_path):
    records = [
        SampleRecord(seed=5, index=i, N=3, s_re=0.5, s_im=0.0,
                     eigenvalues=[2.0 - i, 0.1, -1.5], corners={2: [1.0, -0.5]})
        for i in range(4)
    ]
    path = write_archive(tmp_path / "samples.jsonl", records)
    assert read_archive(path) == records
    assert len(path.read_text().splitlines()) == 4


def test_matrix_dump_layout(tmp_path):
    matrices = [np.array([[1.0, 2 - 1j], [2 + 1j, -3.0]]), np.array([[0.5]])]
    path = write_matrix_dump(tmp_path / "samples.bin", matrices)
    assert path.stat().st_size == (8 + 16 * 4) + (8 + 16 * 1)
    back = read_matrix_dump(path)
    assert len(back) == 2
    assert np.array_equal(back[0], matrices[0])
    assert np.array_equal(back[1], matrices[1])
