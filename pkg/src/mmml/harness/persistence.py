"""Binary model files.

Layout (all integers little-endian)::

    offset  size  field
    0       8     magic  b"MMMLMODL"
    8       4     format version (uint32), currently 1
    12      8     header length H in bytes (uint64)
    20      H     UTF-8 JSON header
    20+H    ...   array payload

The JSON header holds the scalar fields (``u``, ``model_kinds``,
``kernel_scales``, ``gallery_labels``, ``set_ids``, ``q``, ``alpha``, ``eps``)
and an ``arrays`` list of ``{name, shape, offset, nbytes}`` records. Every
array is stored as little-endian float64 in C order at ``offset`` bytes from
the start of the payload. Array names: ``e_mat``, ``eigenvalues``,
``gallery_embedding``, and when present ``spd_logs`` (N x d x d matrix
logarithms of the gallery covariances) and ``grassmann_bases`` (N x d x q).
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError, UnsupportedVersionError
from ..metric_learning import EmbeddingModel
from ..set_modeling import GrassmannPoint, SpdPoint

MAGIC = b"MMMLMODL"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sIQ")
_DTYPE = np.dtype("<f8")


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


def save_model(model: EmbeddingModel, path) -> None:
    arrays = {
        "e_mat": model.e_mat,
        "eigenvalues": model.eigenvalues,
        "gallery_embedding": model.gallery_embedding,
    }
    if model.spd_anchors is not None:
        arrays["spd_logs"] = np.stack([p.log_c for p in model.spd_anchors])
    if model.grassmann_anchors is not None:
        arrays["grassmann_bases"] = np.stack([p.basis for p in model.grassmann_anchors])

    records, blobs, offset = [], [], 0
    for name, arr in arrays.items():
        data = np.ascontiguousarray(arr, dtype=_DTYPE).tobytes()
        records.append({"name": name, "shape": list(np.shape(arr)), "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)
    header = {
        "u": list(model.u),
        "model_kinds": list(model.model_kinds),
        "kernel_scales": list(model.kernel_scales),
        "gallery_labels": [_jsonable(x) for x in model.gallery_labels],
        "set_ids": [_jsonable(x) for x in model.set_ids],
        "q": model.q,
        "alpha": model.alpha,
        "eps": model.eps,
        "arrays": records,
    }
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(head)))
        fh.write(head)
        for blob in blobs:
            fh.write(blob)


def load_model(path) -> EmbeddingModel:
    """Read a model written by :func:`save_model`.

    Raises
    ------
    FormatError
        Bad magic bytes, malformed header or truncated payload.
    UnsupportedVersionError
        The file declares a format version newer than this reader.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _PREFIX.size:
        raise FormatError(f"{path}: truncated model file ({len(raw)} bytes)")
    magic, version, head_len = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: not a model file (bad magic bytes {magic!r})")
    if version > FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: model format version {version} is newer than supported version {FORMAT_VERSION}"
        )
    if version < 1:
        raise FormatError(f"{path}: invalid model format version {version}")
    start = _PREFIX.size
    if len(raw) < start + head_len:
        raise FormatError(f"{path}: truncated model header")
    try:
        header = json.loads(raw[start:start + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: corrupt model header ({exc})") from None
    payload = raw[start + head_len:]
    try:
        return _build(header, payload, path)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: inconsistent model file ({exc!r})") from None


def _build(header, payload, path) -> EmbeddingModel:
    arrays = {}
    for rec in header["arrays"]:
        end = rec["offset"] + rec["nbytes"]
        if end > len(payload):
            raise FormatError(f"{path}: truncated payload while reading array {rec['name']!r}")
        arr = np.frombuffer(payload[rec["offset"]:end], dtype=_DTYPE).reshape(rec["shape"])
        arr = arr.astype(float)
        arr.setflags(write=False)
        arrays[rec["name"]] = arr

    spd = grass = None
    if "spd_logs" in arrays:
        spd = tuple(SpdPoint.from_log(m) for m in arrays["spd_logs"])
    if "grassmann_bases" in arrays:
        grass = tuple(GrassmannPoint(b) for b in arrays["grassmann_bases"])
    return EmbeddingModel(
        e_mat=arrays["e_mat"],
        u=tuple(header["u"]),
        gallery_labels=tuple(header["gallery_labels"]),
        model_kinds=tuple(header["model_kinds"]),
        kernel_scales=tuple(header["kernel_scales"]),
        eigenvalues=arrays["eigenvalues"],
        gallery_embedding=arrays["gallery_embedding"],
        spd_anchors=spd,
        grassmann_anchors=grass,
        q=header["q"],
        alpha=header["alpha"],
        eps=header["eps"],
        set_ids=tuple(header["set_ids"]),
    )
