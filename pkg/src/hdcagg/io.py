"""Flat-file formats: feature files, holistic descriptor files and CSVs.

Feature files come in two flavours with identical content:

* text, line based::

      FEAT v1
      image <id>
      size <w> <h>
      count <n> dim <D>
      x y score d_1 ... d_D        (n rows)

* binary: magic ``HDCFEAT1``, then little-endian u32 version, u32 id length,
  id bytes, f32 w, f32 h, u32 n, u32 D and ``n * (3 + D)`` f32 values.

All numeric payloads are stored at 32-bit precision.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .aggregation import KINDS, Fingerprint, HolisticDescriptor, IncompatibleDescriptors
from .evaluation import GroundTruth, SimilarityMatrix
from .features import FeatureSet

__all__ = [
    "FormatError",
    "read_feature_file",
    "write_feature_file",
    "read_feature_dir",
    "write_holistic",
    "read_holistic",
    "write_ground_truth",
    "read_ground_truth",
    "write_similarity",
    "read_similarity",
    "write_records",
    "read_records",
    "atomic_write",
]

FEAT_MAGIC = b"HDCFEAT1"
HOL_MAGIC = b"HDCHOL01"
HOL_VERSION = 1
FEATURE_SUFFIXES = (".feat", ".featb")


class FormatError(ValueError):
    """Malformed or incompatible input file."""


def atomic_write(path, data: bytes | str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _f32(a) -> np.ndarray:
    return np.asarray(a, dtype=np.float64).astype(np.float32)


# -- feature files ----------------------------------------------------------


def _feature_text(fs: FeatureSet) -> str:
    if any(c.isspace() for c in fs.image_id) or not fs.image_id:
        raise FormatError(f"image id {fs.image_id!r} must be non-empty without whitespace")
    w, h = _f32([fs.width, fs.height])
    lines = ["FEAT v1", f"image {fs.image_id}", f"size {w} {h}", f"count {len(fs)} dim {fs.dim}"]
    rows = np.column_stack([fs.xy, fs.scores, fs.descriptors]).astype(np.float32) if len(fs) else []
    lines.extend(" ".join(str(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _feature_binary(fs: FeatureSet) -> bytes:
    ident = fs.image_id.encode("utf-8")
    head = FEAT_MAGIC + struct.pack("<II", 1, len(ident)) + ident
    head += struct.pack("<ffII", fs.width, fs.height, len(fs), fs.dim)
    body = np.column_stack([fs.xy, fs.scores, fs.descriptors]).astype("<f4") if len(fs) else np.zeros(0, "<f4")
    return head + body.tobytes()


def write_feature_file(path, fs: FeatureSet, binary: bool | None = None) -> None:
    """Write ``fs``; binary when requested or when ``path`` ends in ``.featb``."""
    if binary is None:
        binary = str(path).endswith(".featb")
    atomic_write(path, _feature_binary(fs) if binary else _feature_text(fs))


def _parse_text(text: str, path) -> FeatureSet:
    lines = text.splitlines()

    def fail(lineno: int, msg: str):
        raise FormatError(f"{path}:{lineno}: {msg}")

    if len(lines) < 4:
        fail(len(lines), "truncated header")
    if lines[0].strip() != "FEAT v1":
        fail(1, f"expected 'FEAT v1', got {lines[0]!r}")
    parts = lines[1].split(maxsplit=1)
    if len(parts) != 2 or parts[0] != "image":
        fail(2, "expected 'image <id>'")
    image_id = parts[1].strip()
    parts = lines[2].split()
    if len(parts) != 3 or parts[0] != "size":
        fail(3, "expected 'size <w> <h>'")
    try:
        w, h = (float(np.float32(p)) for p in parts[1:])
    except ValueError:
        fail(3, "image size is not numeric")
    parts = lines[3].split()
    if len(parts) != 4 or parts[0] != "count" or parts[2] != "dim":
        fail(4, "expected 'count <n> dim <D>'")
    try:
        n, dim = int(parts[1]), int(parts[3])
    except ValueError:
        fail(4, "count and dim must be integers")
    if n < 0 or dim < 0:
        fail(4, "count and dim must be non-negative")
    body = [(i + 5, ln) for i, ln in enumerate(lines[4:]) if ln.strip()]
    if len(body) != n:
        fail(len(lines), f"header declares count={n} but file has {len(body)} feature rows")
    rows = np.zeros((n, 3 + dim), dtype=np.float32)
    for r, (lineno, ln) in enumerate(body):
        fields = ln.split()
        if len(fields) != 3 + dim:
            fail(lineno, f"expected {3 + dim} values (x y score + {dim}-D descriptor), got {len(fields)}")
        try:
            rows[r] = np.array(fields, dtype=np.float32)
        except ValueError:
            fail(lineno, "non-numeric value")
        if not np.all(np.isfinite(rows[r])):
            fail(lineno, "non-finite value")
    return _from_rows(image_id, w, h, rows, dim, path)


def _from_rows(image_id, w, h, rows: np.ndarray, dim: int, path) -> FeatureSet:
    rows = rows.astype(np.float64)
    try:
        return FeatureSet(image_id, w, h, rows[:, 3:].reshape(-1, dim), rows[:, :2], rows[:, 2])
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


def _parse_binary(data: bytes, path) -> FeatureSet:
    try:
        version, id_len = struct.unpack_from("<II", data, 8)
        if version != 1:
            raise FormatError(f"{path}: unsupported feature file version {version}")
        off = 16
        image_id = data[off : off + id_len].decode("utf-8")
        off += id_len
        w, h, n, dim = struct.unpack_from("<ffII", data, off)
        off += 16
    except struct.error as e:
        raise FormatError(f"{path}: truncated binary header") from e
    need = n * (3 + dim) * 4
    if len(data) - off != need:
        raise FormatError(f"{path}: header declares count={n} dim={dim} ({need} bytes), payload has {len(data) - off}")
    rows = np.frombuffer(data, dtype="<f4", offset=off).reshape(n, 3 + dim)
    if not np.all(np.isfinite(rows)):
        bad = int(np.flatnonzero(~np.isfinite(rows).all(axis=1))[0])
        raise FormatError(f"{path}: non-finite value in feature row {bad}")
    return _from_rows(image_id, float(w), float(h), rows, dim, path)


def read_feature_file(path) -> FeatureSet:
    data = Path(path).read_bytes()
    if data[:8] == FEAT_MAGIC:
        return _parse_binary(data, path)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise FormatError(f"{path}: neither a binary nor a text feature file") from e
    return _parse_text(text, path)


def feature_paths(inputs: Iterable) -> list[Path]:
    """Expand directories into their feature files, sorted by name."""
    out = []
    for p in map(Path, inputs):
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.suffix in FEATURE_SUFFIXES))
        elif p.exists():
            out.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    return out


def read_feature_dir(*inputs) -> list[FeatureSet]:
    return [read_feature_file(p) for p in feature_paths(inputs)]


# -- holistic descriptors ----------------------------------------------------


def _meta_json(meta: Fingerprint | None) -> str:
    return json.dumps(None if meta is None else meta.to_dict(), sort_keys=True, separators=(",", ":"))


def write_holistic(path, descriptors: Sequence[HolisticDescriptor]) -> None:
    metas = {h.meta for h in descriptors}
    if len(metas) > 1:
        raise IncompatibleDescriptors(f"cannot store descriptors with mixed fingerprints: {metas}")
    meta = metas.pop() if metas else None
    dims = {h.d for h in descriptors}
    if len(dims) > 1:
        raise IncompatibleDescriptors(f"mixed dimensions {sorted(dims)}")
    d = dims.pop() if dims else 0
    mj = _meta_json(meta).encode("utf-8")
    buf = _io.BytesIO()
    buf.write(HOL_MAGIC + struct.pack("<II", HOL_VERSION, len(mj)) + mj)
    buf.write(struct.pack("<II", len(descriptors), d))
    for h in descriptors:
        ident = h.image_id.encode("utf-8")
        buf.write(struct.pack("<I", len(ident)) + ident)
        buf.write(struct.pack("<BB", KINDS.index(h.kind), int(h.degenerate)))
        buf.write(h.vector.astype("<f4").tobytes())
    atomic_write(path, buf.getvalue())


def read_holistic(path, expect: Fingerprint | None = None) -> list[HolisticDescriptor]:
    """Load descriptors; raise ``IncompatibleDescriptors`` if ``expect`` disagrees."""
    data = Path(path).read_bytes()
    if data[:8] != HOL_MAGIC:
        raise FormatError(f"{path}: not a holistic descriptor file")
    try:
        version, mlen = struct.unpack_from("<II", data, 8)
        if version != HOL_VERSION:
            raise FormatError(f"{path}: unsupported version {version} (expected {HOL_VERSION})")
        off = 16
        raw = json.loads(data[off : off + mlen].decode("utf-8"))
        off += mlen
        meta = None if raw is None else Fingerprint.from_dict(raw)
        count, d = struct.unpack_from("<II", data, off)
        off += 8
        if expect is not None and meta != expect:
            raise IncompatibleDescriptors(f"{path}: descriptors built with {meta}, session uses {expect}")
        out = []
        for _ in range(count):
            (id_len,) = struct.unpack_from("<I", data, off)
            off += 4
            ident = data[off : off + id_len].decode("utf-8")
            off += id_len
            kind, degenerate = struct.unpack_from("<BB", data, off)
            off += 2
            if off + 4 * d > len(data):
                raise FormatError(f"{path}: truncated file")
            vec = np.frombuffer(data, dtype="<f4", count=d, offset=off).astype(np.float64)
            off += 4 * d
            out.append(HolisticDescriptor(vec, KINDS[kind], meta, ident, bool(degenerate)))
    except (struct.error, IndexError, UnicodeDecodeError, json.JSONDecodeError, TypeError) as e:
        raise FormatError(f"{path}: truncated or corrupt file") from e
    if off != len(data):
        raise FormatError(f"{path}: {len(data) - off} trailing bytes")
    return out


# -- CSV files -----------------------------------------------------------------


def _strip_comments(text: str) -> tuple[list[str], list[str]]:
    meta, body = [], []
    for ln in text.splitlines():
        (meta if ln.startswith("#") else body).append(ln)
    return meta, body


def _csv_text(header_lines: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = _io.StringIO()
    for ln in header_lines:
        buf.write(f"# {ln}\n")
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def write_ground_truth(path, gt: GroundTruth) -> None:
    rows = [("db_index", "query_index")] + sorted(gt.positives)
    atomic_write(path, _csv_text([f"shape: {gt.shape[0]} {gt.shape[1]}"], rows))


def read_ground_truth(path, shape: tuple[int, int] | None = None) -> GroundTruth:
    meta, body = _strip_comments(Path(path).read_text())
    pairs = set()
    for lineno, row in enumerate(csv.reader(body), start=1):
        if not row or row == ["db_index", "query_index"]:
            continue
        if len(row) != 2:
            raise FormatError(f"{path}: row {lineno}: expected 'db_index,query_index'")
        try:
            pairs.add((int(row[0]), int(row[1])))
        except ValueError as e:
            raise FormatError(f"{path}: row {lineno}: indices must be integers") from e
    if shape is None:
        for ln in meta:
            key, _, val = ln[1:].strip().partition(":")
            if key.strip() == "shape":
                shape = tuple(int(v) for v in val.split())
        if shape is None:
            shape = (max((i for i, _ in pairs), default=-1) + 1, max((j for _, j in pairs), default=-1) + 1)
    try:
        return GroundTruth(pairs, shape)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


def write_similarity(path, m: SimilarityMatrix) -> None:
    header = ["hdcagg similarity v1", f"method: {m.method}", f"meta: {_meta_json(m.meta)}"]
    rows = [["db_id", *m.q_ids]]
    rows += [[db_id, *(repr(float(v)) for v in row)] for db_id, row in zip(m.db_ids, m.values)]
    atomic_write(path, _csv_text(header, rows))


def _parse_meta(meta_lines: Sequence[str]) -> dict[str, str]:
    out = {}
    for ln in meta_lines:
        key, sep, val = ln[1:].strip().partition(":")
        if sep:
            out[key.strip()] = val.strip()
    return out


def read_similarity(path) -> SimilarityMatrix:
    meta_lines, body = _strip_comments(Path(path).read_text())
    meta = _parse_meta(meta_lines)
    rows = list(csv.reader(body))
    if not rows or not rows[0] or rows[0][0] != "db_id":
        raise FormatError(f"{path}: missing 'db_id' header row")
    q_ids = rows[0][1:]
    db_ids, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(q_ids) + 1:
            raise FormatError(f"{path}: row {lineno}: expected {len(q_ids) + 1} fields, got {len(row)}")
        db_ids.append(row[0])
        try:
            values.append([float(v) for v in row[1:]])
        except ValueError as e:
            raise FormatError(f"{path}: row {lineno}: non-numeric similarity") from e
    fp = json.loads(meta.get("meta", "null"))
    try:
        return SimilarityMatrix(
            np.array(values, dtype=np.float64).reshape(len(db_ids), len(q_ids)),
            db_ids,
            q_ids,
            meta.get("method", "unknown"),
            None if fp is None else Fingerprint.from_dict(fp),
        )
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_records(path, records: Sequence[dict], meta: dict | None = None) -> None:
    """CSV of flat records with ``#``-prefixed ``key: json`` metadata lines."""
    header = ["hdcagg records v1"]
    for k, v in (meta or {}).items():
        header.append(f"{k}: {json.dumps(v, sort_keys=True, separators=(',', ':'))}")
    cols = list(records[0]) if records else []
    rows = [cols] + [[_fmt(r[c]) for c in cols] for r in records]
    atomic_write(path, _csv_text(header, rows))


def read_records(path) -> tuple[list[dict], dict]:
    meta_lines, body = _strip_comments(Path(path).read_text())
    meta = {k: json.loads(v) for k, v in _parse_meta(meta_lines).items()}
    reader = csv.DictReader(body)
    out = []
    for row in reader:
        rec = {}
        for k, v in row.items():
            try:
                rec[k] = int(v)
            except ValueError:
                try:
                    rec[k] = float(v)
                except ValueError:
                    rec[k] = v
        out.append(rec)
    return out, meta
