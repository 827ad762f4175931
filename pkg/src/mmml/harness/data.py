"""Set files, dataset manifests and ingestion.

Set file
    Plain text, one vectorized image per row (``n`` rows, ``d`` whitespace
    separated columns). Lines starting with ``#`` and blank lines are ignored.
    A directory may stand in for a set file: every image file in it (sorted by
    name) is decoded as grayscale, resized to 20x20 by bilinear interpolation
    and flattened row-major.

Manifest
    CSV with a ``path,label,set_id`` header. Paths are relative to the
    manifest's directory. Comment lines before the header carry metadata::

        # d: 400
        # source: ETH-80, 20x20 grayscale
        path,label,set_id
        sets/apple1.txt,apple,apple1
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..errors import DegenerateSetError, DimensionError, FormatError, ProtocolError
from ..set_modeling import ImageSet

IMAGE_SIZE = (20, 20)
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".pgm", ".tif", ".tiff", ".gif"}
MANIFEST_HEADER = ("path", "label", "set_id")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    set_id: str


@dataclass
class DatasetManifest:
    entries: List[ManifestEntry]
    d: Optional[int] = None
    source_note: str = ""
    root: Path = field(default_factory=Path)

    @property
    def labels(self):
        return sorted({e.label for e in self.entries})


def read_set_file(path, d: Optional[int] = None) -> np.ndarray:
    """Read a set file into an ``n x d`` array (one row per image).

    Parse errors name the file and the 1-based line number; a ``d``
    mismatch names the expected and found widths.
    """
    path = Path(path)
    if path.is_dir():
        rows = _read_image_dir(path)
    else:
        rows = []
        width = None
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                text = line.strip()
                if not text or text.startswith("#"):
                    continue
                try:
                    row = [float(tok) for tok in text.replace(",", " ").split()]
                except ValueError as exc:
                    raise FormatError(f"{path}:{lineno}: cannot parse row ({exc})") from None
                if width is None:
                    width = len(row)
                elif len(row) != width:
                    raise FormatError(
                        f"{path}:{lineno}: row has {len(row)} values, previous rows have {width}"
                    )
                rows.append(row)
        if not rows:
            raise FormatError(f"{path}: no data rows")
        rows = np.array(rows, dtype=float)
    if d is not None and rows.shape[1] != d:
        raise DimensionError(f"{path}: expected d = {d} columns, found {rows.shape[1]}")
    return rows


def _read_image_dir(path: Path) -> np.ndarray:
    from PIL import Image

    files = sorted(p for p in path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise FormatError(f"{path}: directory holds no image files")
    rows = []
    for f in files:
        try:
            with Image.open(f) as img:
                small = img.convert("L").resize(IMAGE_SIZE, Image.BILINEAR)
                rows.append(np.asarray(small, dtype=float).ravel())
        except OSError as exc:
            raise FormatError(f"{f}: cannot decode image ({exc})") from None
    return np.array(rows)


def write_set_file(path, samples) -> None:
    """Write a ``d x n`` sample matrix as ``n`` text rows (round-trip exact)."""
    samples = np.asarray(samples, dtype=float)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, samples.T, fmt="%.17g")


def read_manifest(path) -> DatasetManifest:
    path = Path(path)
    meta = {}
    body = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped.startswith("#"):
                key, sep, value = stripped[1:].partition(":")
                if sep:
                    meta[key.strip().lower()] = value.strip()
            elif stripped:
                body.append(line)
    reader = csv.reader(io.StringIO("".join(body)))
    header = next(reader, None)
    names = tuple(h.strip() for h in header[:3]) if header else ()
    if len(names) < 2 or names != MANIFEST_HEADER[:len(names)]:
        raise FormatError(f"{path}: expected a '{','.join(MANIFEST_HEADER)}' header, got {header}")
    entries = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) < 2:
            raise FormatError(f"{path}: data row {lineno} needs at least path and label")
        set_path, label = row[0].strip(), row[1].strip()
        set_id = row[2].strip() if len(row) > 2 and row[2].strip() else Path(set_path).stem
        entries.append(ManifestEntry(set_path, label, set_id))
    d = meta.get("d")
    try:
        d = int(d) if d is not None else None
    except ValueError:
        raise FormatError(f"{path}: metadata 'd' is not an integer: {d!r}") from None
    return DatasetManifest(entries, d, meta.get("source", ""), path.parent)


def write_manifest(path, entries: Sequence[ManifestEntry], d: Optional[int] = None,
                   source_note: str = "") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if d is not None:
            fh.write(f"# d: {d}\n")
        if source_note:
            fh.write(f"# source: {source_note}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for e in entries:
            writer.writerow([e.path, e.label, e.set_id])


def ingest(manifest: DatasetManifest, root=None, normalize: bool = False) -> List[ImageSet]:
    """Load every set named by ``manifest``.

    Parameters
    ----------
    manifest : DatasetManifest
    root : path, optional
        Directory the entry paths are relative to; defaults to the
        manifest's own directory.
    normalize : bool
        Divide pixel values by 255.

    Raises
    ------
    ProtocolError
        Fewer than two classes.
    FormatError, DimensionError, DegenerateSetError
        From the individual set files; messages name the file.
    """
    root = Path(root) if root is not None else manifest.root
    if len(manifest.labels) < 2:
        raise ProtocolError(f"manifest lists {len(manifest.labels)} class(es); at least 2 are needed")
    d = manifest.d
    sets = []
    for e in manifest.entries:
        full = root / e.path
        if not full.exists():
            raise FormatError(f"{full}: set file does not exist")
        rows = read_set_file(full, d)
        d = rows.shape[1] if d is None else d
        if rows.shape[0] < 2:
            raise DegenerateSetError(f"{full}: set has {rows.shape[0]} image(s); at least 2 are needed")
        samples = rows.T / 255.0 if normalize else rows.T
        sets.append(ImageSet(samples, e.label, e.set_id))
    return sets


def write_dataset(root, sets: Sequence[ImageSet], source_note: str = "",
                  manifest_name: str = "manifest.csv") -> Path:
    """Write ``sets`` as set files under ``root/sets`` plus a manifest.

    Returns the manifest path.
    """
    root = Path(root)
    entries = []
    for s in sets:
        rel = os.path.join("sets", f"{s.set_id}.txt")
        write_set_file(root / rel, s.samples)
        entries.append(ManifestEntry(rel, str(s.label), str(s.set_id)))
    d = sets[0].d if sets else None
    manifest_path = root / manifest_name
    write_manifest(manifest_path, entries, d, source_note)
    return manifest_path
