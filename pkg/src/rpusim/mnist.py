"""Local ingestion of IDX-format datasets (no network access).

The IDX container: two zero bytes, a dtype code, a dimension count, then
big-endian uint32 extents and the raw payload.  Only the ubyte flavor used by
the digit files is needed here, but the header is validated generically.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class IdxError(ValueError):
    pass


class BadMagicError(IdxError):
    pass


class TruncatedPayloadError(IdxError):
    pass


class DimensionOverflowError(IdxError):
    pass


class MissingFilesError(FileNotFoundError):
    pass


_DTYPES = {0x08: np.uint8, 0x09: np.int8, 0x0B: ">i2", 0x0C: ">i4",
           0x0D: ">f4", 0x0E: ">f8"}
_MAX_ELEMENTS = 1 << 33  # 8 G entries: far beyond any sane digits file

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"


def _open(path):
    p = Path(path)
    if p.suffix == ".gz":
        return gzip.open(p, "rb")
    return open(p, "rb")


def parse_idx(path, expect_magic: int | None = None) -> np.ndarray:
    """Read one IDX file into an ndarray, validating the header strictly.

    `expect_magic` pins the full 32-bit magic (dtype and rank), e.g.
    IMAGE_MAGIC for image tensors or LABEL_MAGIC for label vectors.
    """
    with _open(path) as f:
        head = f.read(4)
        if len(head) < 4:
            raise TruncatedPayloadError(f"{path}: file shorter than a header")
        zero, dtype_code, ndim = head[0] << 8 | head[1], head[2], head[3]
        if zero != 0 or dtype_code not in _DTYPES:
            raise BadMagicError(
                f"{path}: bad magic bytes {head.hex()} (unknown dtype or "
                f"non-zero prefix)")
        if expect_magic is not None and int.from_bytes(head, "big") != expect_magic:
            raise BadMagicError(
                f"{path}: magic {int.from_bytes(head, 'big'):#010x} != "
                f"expected {expect_magic:#010x}")
        raw_dims = f.read(4 * ndim)
        if len(raw_dims) != 4 * ndim:
            raise TruncatedPayloadError(f"{path}: header promises {ndim} dims")
        dims = struct.unpack(">" + "I" * ndim, raw_dims)
        count = 1
        for d in dims:
            count *= d
        if count > _MAX_ELEMENTS:
            raise DimensionOverflowError(
                f"{path}: {dims} implies {count} elements")
        dt = np.dtype(_DTYPES[dtype_code])
        payload = f.read(count * dt.itemsize + 1)
        if len(payload) < count * dt.itemsize:
            raise TruncatedPayloadError(
                f"{path}: payload is {len(payload)} bytes, header implies "
                f"{count * dt.itemsize}")
        if len(payload) > count * dt.itemsize:
            raise TruncatedPayloadError(
                f"{path}: trailing bytes beyond the declared extent")
        return np.frombuffer(payload, dtype=dt).reshape(dims)


def write_idx(arr: np.ndarray, path) -> None:
    """Serialize an array back to IDX (ubyte payloads only)."""
    a = np.ascontiguousarray(arr, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack("BBBB", 0, 0, 0x08, a.ndim))
        f.write(struct.pack(">" + "I" * a.ndim, *a.shape))
        f.write(a.tobytes())


@dataclass
class Dataset:
    """Flattened images in [0, 1] plus integer labels."""

    images: np.ndarray  # (N, 784) float32
    labels: np.ndarray  # (N,) int64
    split: str

    def validate(self, expected: int | None = None) -> None:
        if self.images.shape[0] != self.labels.shape[0]:
            raise IdxError("image/label counts differ")
        if expected is not None and self.images.shape[0] != expected:
            raise IdxError(
                f"{self.split}: expected {expected} samples, "
                f"found {self.images.shape[0]}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() > 9):
            raise IdxError(f"{self.split}: labels outside 0-9")


def _load_split(directory: Path, images_name: str, labels_name: str,
                split: str) -> Dataset:
    images = parse_idx(_resolve(directory, images_name), expect_magic=IMAGE_MAGIC)
    labels = parse_idx(_resolve(directory, labels_name), expect_magic=LABEL_MAGIC)
    flat = images.reshape(images.shape[0], -1).astype(np.float32) / 255.0
    ds = Dataset(flat, labels.astype(np.int64), split)
    ds.validate()
    return ds


def _resolve(directory: Path, name: str) -> Path:
    for cand in (directory / name, directory / (name + ".gz")):
        if cand.exists():
            return cand
    raise MissingFilesError(str(directory / name))


def load_dataset(directory, strict_counts: bool = True):
    """Load the canonical four files; returns (train, test) datasets."""
    d = Path(directory)
    missing = [n for n in (TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS)
               if not (d / n).exists() and not (d / (n + ".gz")).exists()]
    if missing:
        raise MissingFilesError(
            f"missing dataset files in {d}: {', '.join(missing)}")
    train = _load_split(d, TRAIN_IMAGES, TRAIN_LABELS, "train")
    test = _load_split(d, TEST_IMAGES, TEST_LABELS, "test")
    if strict_counts:
        train.validate(expected=60000)
        test.validate(expected=10000)
    return train, test
