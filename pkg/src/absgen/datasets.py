"""Dataset ingestion: IDX files, binary PGM trees, and manifest validation.

All loaders normalize pixels into [0, 1] as float64 and produce a
``LabeledDataset`` whose integer labels index patterns 0..K-1. IDX
round-trips losslessly: ``save_idx(load_idx(...))`` reproduces the source
bytes because pixel values stay on the 1/255 grid.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from absgen.errors import ConsistencyError, ContractError, FormatError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class LabeledDataset:
    """Samples of one common shape plus integer pattern labels.

    Image loaders keep the default ``unit_range`` so normalization bugs
    surface immediately; synthetic latent-space datasets opt out because
    their samples are unbounded by construction.
    """

    samples: np.ndarray           # (N, ...) float64, in [0, 1] when unit_range
    labels: np.ndarray            # (N,) int64
    split: str = "train"
    class_names: list = field(default_factory=list)
    unit_range: bool = True

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.samples) != len(self.labels):
            raise ConsistencyError(
                f"{len(self.samples)} samples but {len(self.labels)} labels"
            )
        if self.unit_range and self.samples.size and (
            self.samples.min() < 0.0 or self.samples.max() > 1.0
        ):
            raise ConsistencyError("sample values must lie in [0, 1] after normalization")

    def __len__(self):
        return len(self.samples)

    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes())

    def indices_of(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


# -- IDX -------------------------------------------------------------------


def _read_idx_header(blob: bytes, path, expected_magic: int, rank: int):
    need = 4 * (1 + rank)
    if len(blob) < need:
        raise FormatError(f"{path}: truncated IDX header ({len(blob)} bytes)")
    magic = struct.unpack_from(">I", blob, 0)[0]
    if magic != expected_magic:
        raise FormatError(
            f"{path}: bad IDX magic 0x{magic:08x}, expected 0x{expected_magic:08x}"
        )
    dims = struct.unpack_from(f">{rank}I", blob, 4)
    return dims, need


def load_idx(images_path, labels_path, split: str = "train") -> LabeledDataset:
    """Parse big-endian IDX image/label files; pixel bytes scaled by 1/255."""
    images_path, labels_path = Path(images_path), Path(labels_path)
    img_blob = images_path.read_bytes()
    (n, rows, cols), off = _read_idx_header(img_blob, images_path, IDX_IMAGES_MAGIC, 3)
    if len(img_blob) - off != n * rows * cols:
        raise FormatError(
            f"{images_path}: expected {n * rows * cols} pixel bytes, found {len(img_blob) - off}"
        )
    images = np.frombuffer(img_blob, dtype=np.uint8, offset=off).reshape(n, rows, cols)

    lab_blob = labels_path.read_bytes()
    (n_labels,), off = _read_idx_header(lab_blob, labels_path, IDX_LABELS_MAGIC, 1)
    if len(lab_blob) - off != n_labels:
        raise FormatError(
            f"{labels_path}: expected {n_labels} label bytes, found {len(lab_blob) - off}"
        )
    labels = np.frombuffer(lab_blob, dtype=np.uint8, offset=off)
    if n != n_labels:
        raise ConsistencyError(
            f"image count {n} ({images_path}) != label count {n_labels} ({labels_path})"
        )
    return LabeledDataset(images / 255.0, labels.astype(np.int64), split=split)


def save_idx(ds: LabeledDataset, images_path, labels_path):
    """Inverse of load_idx; values must sit on the 1/255 grid."""
    scaled = ds.samples * 255.0
    rounded = np.rint(scaled)
    if not np.allclose(scaled, rounded, atol=1e-6):
        raise ContractError("save_idx requires pixel values on the 1/255 grid")
    imgs = rounded.astype(np.uint8)
    if imgs.ndim != 3:
        raise ContractError(f"save_idx expects (N, rows, cols) samples, got {ds.samples.shape}")
    n, rows, cols = imgs.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        fh.write(imgs.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, n))
        fh.write(ds.labels.astype(np.uint8).tobytes())


# -- PGM -------------------------------------------------------------------


def load_pgm(path) -> np.ndarray:
    """Binary PGM (P5) to a float64 image in [0, 1]; maxval <= 255."""
    blob = Path(path).read_bytes()
    if blob[:2] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {blob[:2]!r}, expected b'P5')")
    tokens, pos = [], 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated PGM header")
        tokens.append(blob[start:pos])
    pos += 1  # single whitespace byte after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric PGM header field") from exc
    if not 0 < maxval <= 255:
        raise FormatError(f"{path}: PGM maxval {maxval} outside (0, 255]")
    data = blob[pos : pos + width * height]
    if len(data) != width * height:
        raise FormatError(f"{path}: expected {width * height} pixel bytes, found {len(data)}")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width) / maxval


def save_pgm(image: np.ndarray, path, maxval: int = 255):
    if image.ndim != 2:
        raise ContractError(f"save_pgm expects a 2-D image, got shape {image.shape}")
    if not 0 < maxval <= 255:
        raise ContractError(f"maxval {maxval} outside (0, 255]")
    pixels = np.rint(np.clip(image, 0.0, 1.0) * maxval).astype(np.uint8)
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(pixels.tobytes())


def resize_nearest(image: np.ndarray, target_hw) -> np.ndarray:
    th, tw = target_hw
    if th < 1 or tw < 1:
        raise ContractError(f"resize target must be positive, got {target_hw}")
    h, w = image.shape
    rows = (np.arange(th) * h // th).clip(0, h - 1)
    cols = (np.arange(tw) * w // tw).clip(0, w - 1)
    return image[np.ix_(rows, cols)]


def load_pgm_tree(root_dir, target_hw=(100, 100), split: str = "train") -> LabeledDataset:
    """One pattern per leaf directory containing .pgm files, sorted by path.

    Nested layouts work too: a tree root/<alphabet>/<character>/*.pgm yields
    one pattern per character with the relative path as its name.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise FormatError(f"{root}: not a directory")
    leaf_dirs = sorted(
        {p.parent for p in root.rglob("*.pgm")},
        key=lambda p: p.relative_to(root).as_posix(),
    )
    if not leaf_dirs:
        raise ConsistencyError(f"{root}: no .pgm files anywhere under the tree")
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        if not any(sub.rglob("*.pgm")):
            raise ConsistencyError(f"{sub}: class directory contains no .pgm files")
    samples, labels, names = [], [], []
    for label, leaf in enumerate(leaf_dirs):
        names.append(leaf.relative_to(root).as_posix())
        for file in sorted(leaf.glob("*.pgm")):
            samples.append(resize_nearest(load_pgm(file), target_hw))
            labels.append(label)
    return LabeledDataset(np.stack(samples), np.array(labels), split=split, class_names=names)


# -- manifests -------------------------------------------------------------


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_manifest(path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    for key in ("name", "format", "splits", "sha256"):
        if key not in manifest:
            raise FormatError(f"{path}: manifest missing required key {key!r}")
    if manifest["format"] not in ("idx", "pgm"):
        raise FormatError(f"{path}: unknown format {manifest['format']!r}")
    if not isinstance(manifest["splits"], dict):
        raise FormatError(f"{path}: splits must be an object of split -> path list")
    return manifest


def _split_files(manifest: dict, base: Path, split: str):
    """Every concrete file a split refers to (expanding pgm directories)."""
    files = []
    for entry in manifest["splits"].get(split, []):
        target = base / entry
        if target.is_dir():
            files.extend(sorted(target.rglob("*.pgm")))
        else:
            files.append(target)
    return files


def validate_manifest(path) -> dict:
    """Check existence and sha256 of every referenced file; returns a summary."""
    path = Path(path)
    manifest = load_manifest(path)
    base = path.parent
    checked = 0
    for split in manifest["splits"]:
        for file in _split_files(manifest, base, split):
            if not file.exists():
                raise ConsistencyError(f"{path}: missing data file {file}")
            rel = file.relative_to(base).as_posix()
            recorded = manifest["sha256"].get(rel)
            if recorded is None:
                raise ConsistencyError(f"{path}: no sha256 recorded for {rel}")
            actual = sha256_file(file)
            if actual != recorded:
                raise ConsistencyError(
                    f"{path}: sha256 mismatch for {rel}: recorded {recorded}, actual {actual}"
                )
            checked += 1
    if checked == 0:
        raise ConsistencyError(f"{path}: manifest references no files")
    return {"name": manifest["name"], "format": manifest["format"], "files_checked": checked}


def load_from_manifest(path, split: str, target_hw=(100, 100)) -> LabeledDataset:
    path = Path(path)
    manifest = load_manifest(path)
    base = path.parent
    entries = manifest["splits"].get(split)
    if not entries:
        raise ContractError(f"{path}: no split named {split!r}")
    if manifest["format"] == "idx":
        if len(entries) != 2:
            raise FormatError(f"{path}: idx split {split!r} needs [images, labels], got {entries}")
        return load_idx(base / entries[0], base / entries[1], split=split)
    if len(entries) != 1:
        raise FormatError(f"{path}: pgm split {split!r} needs one tree root, got {entries}")
    return load_pgm_tree(base / entries[0], target_hw=target_hw, split=split)
