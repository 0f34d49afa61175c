"""Reading prediction dumps (NPY v1.0, JSONL, CSV) and writing structured reports.

Only NPY format version 1.0 with little-endian float payloads in C order is
supported; that keeps the parser small and the byte layout fully specified.
Ingested rows are validated against the looser file tolerance (float32 inputs
accumulate rounding) and renormalized; float32 payloads are upcast to float64
immediately. Reports serialize floats with 17 significant digits and carry a
metadata block so a run can be reproduced byte-for-byte.
"""

from __future__ import annotations

import ast
import csv
import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ._version import __version__
from .core import (
    INGEST_TOLERANCE,
    CredalError,
    EmptyInput,
    InputError,
    LabeledBatch,
    PredictionSet,
)


class BadMagic(InputError):
    pass


class UnsupportedVersion(InputError):
    pass


class UnsupportedDtype(InputError):
    pass


class FortranOrderUnsupported(InputError):
    pass


class ShapeRankInvalid(InputError):
    pass


class TruncatedPayload(InputError):
    pass


class MalformedHeader(InputError):
    pass


class MalformedLine(InputError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InconsistentC(InputError):
    pass


class InvalidProbability(InputError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")


class HeaderMismatch(InputError):
    pass


class DuplicateSample(InputError):
    pass


class MissingSample(InputError):
    pass


@dataclass(frozen=True)
class PredictionFile:
    """A parsed prediction dump: the batch plus provenance tags."""

    batch: LabeledBatch
    source_format: str  # npy | jsonl | csv
    dtype: str  # f32 | f64


_NPY_MAGIC = b"\x93NUMPY"
_DTYPES = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}


def read_npy(path: str | Path) -> np.ndarray:
    """Parse an NPY v1.0 file into a float64 (instances, N, C) array.

    Rank-2 payloads are interpreted as a single instance (1, N, C). Raises on
    anything outside the supported subset: wrong magic, version other than
    1.0, dtype other than little-endian f4/f8, Fortran order, rank not in
    {2, 3}, or a payload whose byte count does not match the header shape.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 10 or raw[:6] != _NPY_MAGIC:
        raise BadMagic(f"{path}: not an NPY file")
    if raw[6:8] != b"\x01\x00":
        raise UnsupportedVersion(
            f"{path}: NPY version {raw[6]}.{raw[7]} unsupported, need 1.0"
        )
    (header_len,) = struct.unpack("<H", raw[8:10])
    header_end = 10 + header_len
    if len(raw) < header_end:
        raise TruncatedPayload(f"{path}: header truncated")
    try:
        header = ast.literal_eval(raw[10:header_end].decode("latin1").strip())
    except (ValueError, SyntaxError) as exc:
        raise MalformedHeader(f"{path}: unparseable NPY header") from exc
    if not isinstance(header, dict) or set(header) != {
        "descr",
        "fortran_order",
        "shape",
    }:
        raise MalformedHeader(f"{path}: NPY header keys {sorted(header)!r}")
    descr = header["descr"]
    if descr not in _DTYPES:
        raise UnsupportedDtype(f"{path}: dtype {descr!r} unsupported, need <f4 or <f8")
    if header["fortran_order"] is not False:
        raise FortranOrderUnsupported(f"{path}: fortran_order must be False")
    shape = header["shape"]
    if not (
        isinstance(shape, tuple)
        and all(isinstance(d, int) and d >= 0 for d in shape)
        and len(shape) in (2, 3)
    ):
        raise ShapeRankInvalid(f"{path}: shape {shape!r} must have rank 2 or 3")
    dtype = _DTYPES[descr]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    payload = raw[header_end:]
    if len(payload) != expected:
        raise TruncatedPayload(
            f"{path}: payload has {len(payload)} bytes, header implies {expected}"
        )
    data = np.frombuffer(payload, dtype=dtype).reshape(shape)
    finite = np.isfinite(data)
    if not finite.all():
        flat = int(np.argmin(finite.ravel()))
        offset = header_end + flat * dtype.itemsize
        raise InvalidProbability(
            f"{path} (byte offset {offset})", "payload contains NaN or Inf"
        )
    data = data.astype(np.float64)
    if data.ndim == 2:
        data = data[None, :, :]
    return data


def write_npy(path: str | Path, array: np.ndarray) -> None:
    """Write a float array as NPY v1.0, C order; float64 round-trips bit-exactly."""
    arr = np.ascontiguousarray(array)
    if arr.dtype == np.float32:
        descr = "<f4"
        arr = arr.astype("<f4")
    else:
        descr = "<f8"
        arr = arr.astype("<f8")
    header = f"{{'descr': '{descr}', 'fortran_order': False, 'shape': {arr.shape!r}, }}"
    pad = 64 - (10 + len(header) + 1) % 64
    header = header + " " * pad + "\n"
    with open(path, "wb") as fh:
        fh.write(_NPY_MAGIC)
        fh.write(b"\x01\x00")
        fh.write(struct.pack("<H", len(header)))
        fh.write(header.encode("latin1"))
        fh.write(arr.tobytes(order="C"))


def batch_from_array(
    array: np.ndarray, tolerance: float = INGEST_TOLERANCE
) -> LabeledBatch:
    """Turn an (instances, N, C) array into an unlabeled batch."""
    if array.ndim != 3:
        raise ShapeRankInvalid(f"expected rank-3 array, got shape {array.shape}")
    if array.shape[0] == 0:
        raise EmptyInput("array holds no instances")
    instances = tuple(
        PredictionSet.from_rows(array[i], tolerance=tolerance)
        for i in range(array.shape[0])
    )
    return LabeledBatch(instances=instances)


def read_jsonl(path: str | Path) -> LabeledBatch:
    """One instance per line: {"id": str, "probs": [[..C floats..] x N], "label": int?}.

    Per-instance sample counts may differ; the class count may not. Labels
    must be present on every line or on none.
    """
    instances: list[PredictionSet] = []
    ids: list[str] = []
    labels: list[int] = []
    n_classes: int | None = None
    have_labels: bool | None = None

    def _reject_constant(_: str):
        raise ValueError("non-finite JSON number")

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line, parse_constant=_reject_constant)
            except ValueError as exc:
                if "non-finite" in str(exc):
                    raise InvalidProbability(
                        f"{path} line {lineno}", "NaN or Inf in JSON record"
                    ) from exc
                raise MalformedLine(lineno, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict) or "id" not in obj or "probs" not in obj:
                raise MalformedLine(lineno, 'record must have "id" and "probs"')
            probs = obj["probs"]
            if (
                not isinstance(probs, list)
                or not probs
                or not all(isinstance(row, list) for row in probs)
            ):
                raise MalformedLine(lineno, '"probs" must be a non-empty list of rows')
            try:
                pred = PredictionSet.from_rows(
                    np.asarray(probs, dtype=np.float64), tolerance=INGEST_TOLERANCE
                )
            except CredalError as exc:
                raise InvalidProbability(f"{path} line {lineno}", str(exc)) from exc
            except ValueError as exc:
                raise MalformedLine(lineno, f"ragged probability rows: {exc}") from exc
            if n_classes is None:
                n_classes = pred.n_classes
            elif pred.n_classes != n_classes:
                raise InconsistentC(
                    f"{path} line {lineno}: {pred.n_classes} classes, expected {n_classes}"
                )
            label = obj.get("label")
            if have_labels is None:
                have_labels = label is not None
            elif have_labels != (label is not None):
                raise MalformedLine(lineno, "labels must be present on all lines or none")
            if label is not None:
                if not isinstance(label, int) or isinstance(label, bool):
                    raise MalformedLine(lineno, f'"label" must be an integer, got {label!r}')
                labels.append(label)
            instances.append(pred)
            ids.append(str(obj["id"]))
    if not instances:
        raise EmptyInput(f"{path}: no records")
    return LabeledBatch(
        instances=tuple(instances),
        labels=tuple(labels) if have_labels else None,
        ids=tuple(ids),
    )


def read_csv(path: str | Path) -> LabeledBatch:
    """Long-format CSV: header instance_id,sample_idx,label,p0,...,p{C-1}.

    Rows group by instance_id in file order; each instance must carry sample
    indices 0..N-1 exactly once, and every instance must have the same N.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInput(f"{path}: empty file") from None
        c = len(header) - 3
        expected = ["instance_id", "sample_idx", "label"] + [f"p{k}" for k in range(c)]
        if c < 2 or header != expected:
            raise HeaderMismatch(
                f"{path}: header {header!r} does not match instance_id,sample_idx,label,p0,..."
            )
        order: list[str] = []
        rows: dict[str, dict[int, np.ndarray]] = {}
        inst_labels: dict[str, int | None] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedLine(lineno, f"{len(row)} fields, expected {len(header)}")
            inst, idx_text, label_text = row[0], row[1], row[2]
            try:
                sample_idx = int(idx_text)
            except ValueError:
                raise MalformedLine(lineno, f"bad sample_idx {idx_text!r}") from None
            try:
                probs = np.array([float(x) for x in row[3:]], dtype=np.float64)
            except ValueError:
                raise MalformedLine(lineno, "unparseable probability") from None
            if not np.isfinite(probs).all():
                raise InvalidProbability(f"{path} line {lineno}", "NaN or Inf probability")
            label: int | None
            if label_text == "":
                label = None
            else:
                try:
                    label = int(label_text)
                except ValueError:
                    raise MalformedLine(lineno, f"bad label {label_text!r}") from None
            if inst not in rows:
                order.append(inst)
                rows[inst] = {}
                inst_labels[inst] = label
            elif inst_labels[inst] != label:
                raise MalformedLine(
                    lineno, f"instance {inst!r} changes label {inst_labels[inst]!r} -> {label!r}"
                )
            if sample_idx in rows[inst]:
                raise DuplicateSample(
                    f"{path} line {lineno}: duplicate sample {sample_idx} of {inst!r}"
                )
            rows[inst][sample_idx] = probs
    if not order:
        raise EmptyInput(f"{path}: no data rows")
    n = len(rows[order[0]])
    instances = []
    for inst in order:
        got = rows[inst]
        if len(got) != n or sorted(got) != list(range(len(got))):
            missing = sorted(set(range(max(n, len(got)))) - set(got))
            raise MissingSample(
                f"{path}: instance {inst!r} needs samples 0..{n - 1}, missing {missing}"
            )
        matrix = np.stack([got[i] for i in range(n)])
        try:
            instances.append(PredictionSet.from_rows(matrix, tolerance=INGEST_TOLERANCE))
        except CredalError as exc:
            raise InvalidProbability(f"{path} instance {inst!r}", str(exc)) from exc
    label_values = [inst_labels[inst] for inst in order]
    have_labels = [v is not None for v in label_values]
    if any(have_labels) and not all(have_labels):
        raise MalformedLine(0, "labels must be present for all instances or none")
    return LabeledBatch(
        instances=tuple(instances),
        labels=tuple(label_values) if all(have_labels) else None,
        ids=tuple(order),
    )


def load_predictions(path: str | Path) -> PredictionFile:
    """Dispatch on file extension (.npy, .jsonl, .csv) and tag provenance."""
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix == ".npy":
        raw = p.read_bytes()
        dtype = "f32" if b"'<f4'" in raw[:128] else "f64"
        return PredictionFile(
            batch=batch_from_array(read_npy(p)), source_format="npy", dtype=dtype
        )
    if suffix == ".jsonl":
        return PredictionFile(batch=read_jsonl(p), source_format="jsonl", dtype="f64")
    if suffix == ".csv":
        return PredictionFile(batch=read_csv(p), source_format="csv", dtype="f64")
    raise InputError(f"{path}: unsupported extension {suffix!r} (need .npy/.jsonl/.csv)")


@dataclass(frozen=True)
class Report:
    """A serializable result: ordered metadata, column names, and row dicts."""

    metadata: Mapping[str, Any]
    columns: tuple[str, ...]
    rows: tuple[Mapping[str, Any], ...]


def _format_float(x: float) -> str:
    if not np.isfinite(x):
        raise InputError(f"cannot serialize non-finite value {x!r}")
    return format(float(x), ".17g")


def _json_value(value: Any) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    if isinstance(value, Mapping):
        parts = (f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in value.items())
        return "{" + ", ".join(parts) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    raise InputError(f"cannot serialize {type(value).__name__} in a report")


def _standard_metadata(report: Report) -> dict:
    meta = {
        "tool": "credalkit",
        "version": __version__,
        "entropy_log_base": 2,
        "nll_log_base": "e",
    }
    meta.update(report.metadata)
    return meta


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def render_report(report: Report, fmt: str) -> str:
    """Serialize a report deterministically as JSON or CSV text."""
    meta = _standard_metadata(report)
    if fmt == "json":
        body = {
            "metadata": meta,
            "columns": list(report.columns),
            "rows": [
                {col: row.get(col) for col in report.columns} for row in report.rows
            ],
        }
        return _json_value(body) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        for key, value in meta.items():
            buffer.write(f"# {key}: {_json_value(value)}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_csv_cell(row.get(col)) for col in report.columns])
        return buffer.getvalue()
    raise InputError(f"unsupported report format {fmt!r} (need json or csv)")


def write_report(report: Report, path: str | Path, fmt: str = "json") -> None:
    """Write a report to ``path`` ("-" for stdout) with stable field ordering."""
    text = render_report(report, fmt)
    if str(path) == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
