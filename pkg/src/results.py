"""
Result files: comma-separated tables, run manifests, sample archives and
binary matrix dumps.

Tables carry `#` header lines naming the command, the manifest and the
columns; numbers are written with %.17g so that reading and re-writing a table
reproduces it byte for byte.
"""

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from .config import MANIFEST_EXTENSION

logger = logging.getLogger(__name__)

Cell = Union[float, int, str]


class RunManifest(BaseModel):
    command: str
    s_re: float
    s_im: float
    N: Optional[int] = None
    seed: int
    samples: Optional[int] = None
    version: str
    result_file: str
    sha256: str
    options: Dict[str, str] = {}


class SampleRecord(BaseModel):
    seed: int
    index: int
    N: int
    s_re: float
    s_im: float
    eigenvalues: List[float]
    corners: Dict[int, List[float]] = {}


@dataclass
class ResultTable:
    command: str
    manifest: str
    columns: List[str]
    rows: List[List[Cell]]

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows], dtype=float)


def format_cell(value: Cell) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _parse_cell(text: str) -> Cell:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def manifest_path(result_path: Path) -> Path:
    return result_path.with_suffix(MANIFEST_EXTENSION)


def render_table(command: str, columns: Sequence[str], rows: Iterable[Sequence[Cell]],
                 manifest_name: str) -> str:
    lines = [f"# command={command}", f"# manifest={manifest_name}", f"# columns={','.join(columns)}"]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")
        lines.append(",".join(format_cell(value) for value in row))
    return "\n".join(lines) + "\n"


def write_table(path: Path, command: str, columns: Sequence[str],
                rows: Iterable[Sequence[Cell]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = render_table(command, columns, rows, manifest_path(path).name)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def parse_table(text: str) -> ResultTable:
    header: Dict[str, str] = {}
    rows: List[List[Cell]] = []
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key] = value
        else:
            rows.append([_parse_cell(cell) for cell in line.split(",")])
    columns = header.get("columns", "").split(",") if header.get("columns") else []
    return ResultTable(header.get("command", ""), header.get("manifest", ""), columns, rows)


def read_table(path: Path) -> ResultTable:
    return parse_table(Path(path).read_text(encoding="utf-8"))


# Manifests


def file_sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def render_manifest(manifest: RunManifest) -> str:
    lines = []
    for key, value in manifest.model_dump(exclude={"options"}).items():
        if value is not None:
            lines.append(f"{key}={format_cell(value)}")
    for key in sorted(manifest.options):
        lines.append(f"option.{key}={manifest.options[key]}")
    return "\n".join(lines) + "\n"


def write_manifest(result_path: Path, command: str, s: complex, seed: int, version: str,
                   N: Optional[int] = None, samples: Optional[int] = None,
                   options: Optional[Dict[str, str]] = None) -> Path:
    result_path = Path(result_path)
    manifest = RunManifest(
        command=command,
        s_re=complex(s).real,
        s_im=complex(s).imag,
        N=N,
        seed=seed,
        samples=samples,
        version=version,
        result_file=result_path.name,
        sha256=file_sha256(result_path),
        options=options or {},
    )
    path = manifest_path(result_path)
    path.write_text(render_manifest(manifest), encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def read_manifest(path: Path) -> RunManifest:
    fields: Dict[str, object] = {}
    options: Dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        if key.startswith("option."):
            options[key[len("option."):]] = value
        else:
            fields[key] = value
    return RunManifest(**fields, options=options)


def verify_manifest(path: Path) -> bool:
    """True when the result file named in the manifest still has the recorded hash."""
    path = Path(path)
    manifest = read_manifest(path)
    result = path.parent / manifest.result_file
    return result.exists() and file_sha256(result) == manifest.sha256


# Sample archives


def write_archive(path: Path, records: Iterable[SampleRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
    logger.info(f"Wrote {path}")
    return path


def read_archive(path: Path) -> List[SampleRecord]:
    records = []
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                records.append(SampleRecord.model_validate_json(line))
    return records


# Binary matrix dumps: int64 dimension, then row-major complex128, little-endian


def write_matrix_dump(path: Path, matrices: Iterable[np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as f:
        for matrix in matrices:
            matrix = np.asarray(matrix, dtype=complex)
            f.write(np.array([matrix.shape[0]], dtype="<i8").tobytes())
            f.write(np.ascontiguousarray(matrix, dtype="<c16").tobytes())
    logger.info(f"Wrote {path}")
    return path


def read_matrix_dump(path: Path) -> List[np.ndarray]:
    data = Path(path).read_bytes()
    matrices = []
    offset = 0
    while offset < len(data):
        dim = int(np.frombuffer(data, dtype="<i8", count=1, offset=offset)[0])
        offset += 8
        entries = np.frombuffer(data, dtype="<c16", count=dim * dim, offset=offset)
        offset += 16 * dim * dim
        matrices.append(entries.reshape(dim, dim).astype(complex))
    return matrices
