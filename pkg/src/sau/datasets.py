"""IDX-format ingestion and synthetic tasks for the training harness.

IDX is the big-endian binary container used by the canonical handwritten
digit files: a 4-byte magic word (0x00000803 for ubyte images with 3 dims,
0x00000801 for ubyte labels with 1 dim), one 4-byte big-endian count per
dimension, then the raw payload. Files may be gzip-compressed; that is
auto-detected from the 0x1f 0x8b magic bytes.
"""

import gzip
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DatasetSplit", "BadMagic", "DimMismatch", "TruncatedFile",
    "load_idx", "save_idx", "make_sine_regression", "make_xor",
    "locate_mnist", "DATA_DIR_ENV",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

DATA_DIR_ENV = "SAU_DATA_DIR"

# canonical file base names; each may also appear with a .gz suffix
MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


class BadMagic(ValueError):
    """File does not start with the expected IDX magic word."""


class DimMismatch(ValueError):
    """Dimension counts disagree (e.g. image count != label count)."""


class TruncatedFile(ValueError):
    """File ended before the declared payload was read."""


@dataclass(frozen=True)
class DatasetSplit:
    """An immutable sample set: inputs are samples x features (in [0, 1]
    for pixel data); labels are int64 class ids or float64 targets."""

    inputs: np.ndarray
    labels: np.ndarray
    name: str

    def __post_init__(self):
        if self.inputs.ndim != 2:
            raise ValueError(f"inputs must be 2-D, got {self.inputs.ndim}-D")
        if self.inputs.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.name}: {self.inputs.shape[0]} input rows but "
                f"{self.labels.shape[0]} labels")


def _open_payload(path):
    with open(path, "rb") as probe:
        head = probe.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(f, count, path, offset):
    data = f.read(count)
    if len(data) != count:
        raise TruncatedFile(
            f"{path}: needed {count} bytes at offset {offset}, "
            f"got {len(data)}")
    return data


def _parse_idx(path, expected_magic, ndim):
    """Return (dims, flat uint8 payload) of one IDX file."""
    with _open_payload(path) as f:
        magic = struct.unpack(">I", _read_exact(f, 4, path, 0))[0]
        if magic != expected_magic:
            raise BadMagic(
                f"{path}: magic 0x{magic:08x} at offset 0, "
                f"expected 0x{expected_magic:08x}")
        dims = []
        for i in range(ndim):
            offset = 4 + 4 * i
            dims.append(struct.unpack(">I", _read_exact(f, 4, path, offset))[0])
        payload_offset = 4 + 4 * ndim
        count = 1
        for d in dims:
            count *= d
        payload = _read_exact(f, count, path, payload_offset)
    return dims, np.frombuffer(payload, dtype=np.uint8)


def load_idx(images_path, labels_path) -> DatasetSplit:
    """Load an images/labels IDX pair into a DatasetSplit.

    Pixels are scaled to [0, 1] by dividing by 255 (no centering).
    """
    (count, height, width), pixels = _parse_idx(images_path, IMAGE_MAGIC, 3)
    (label_count,), raw_labels = _parse_idx(labels_path, LABEL_MAGIC, 1)
    if label_count != count:
        raise DimMismatch(
            f"{images_path} declares {count} images but "
            f"{labels_path} declares {label_count} labels")
    inputs = pixels.reshape(count, height * width).astype(np.float64) / 255.0
    return DatasetSplit(inputs, raw_labels.astype(np.int64),
                        Path(images_path).name)


def save_idx(split: DatasetSplit, images_path, labels_path, image_shape=None):
    """Write a DatasetSplit back out as an IDX pair (round-trip inverse of
    load_idx for [0, 1]-valued inputs and byte-range labels).

    ``image_shape`` is the (height, width) factorization of the feature
    count; default (1, features).
    """
    count, features = split.inputs.shape
    if image_shape is None:
        image_shape = (1, features)
    height, width = image_shape
    if height * width != features:
        raise ValueError(f"image_shape {image_shape} does not cover "
                         f"{features} features")
    if split.inputs.min() < 0.0 or split.inputs.max() > 1.0:
        raise ValueError("inputs must lie in [0, 1] to be stored as bytes")
    labels = np.asarray(split.labels)
    if labels.min() < 0 or labels.max() > 255:
        raise ValueError("labels must lie in [0, 255] to be stored as bytes")

    pixels = np.round(split.inputs * 255.0).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGE_MAGIC, count, height, width))
        f.write(pixels.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", LABEL_MAGIC, count))
        f.write(labels.astype(np.uint8).tobytes())


def make_sine_regression(count: int, seed: int) -> DatasetSplit:
    """count points x uniform on [-3, 3] with targets sin(x)."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-3.0, 3.0, size=count)
    return DatasetSplit(x.reshape(-1, 1), np.sin(x), f"sine{count}")


def make_xor() -> DatasetSplit:
    """The four XOR points with binary labels."""
    inputs = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    labels = np.array([0, 1, 1, 0], dtype=np.int64)
    return DatasetSplit(inputs, labels, "xor")


def locate_mnist(data_dir=None):
    """Resolve the four canonical IDX files under ``data_dir`` (default:
    the SAU_DATA_DIR environment variable, then the working directory).

    Returns (paths, missing): ``paths`` maps the MNIST_FILES roles to
    existing Path objects (plain or .gz); ``missing`` lists the expected
    locations of any role that was not found.
    """
    if data_dir is None:
        data_dir = os.environ.get(DATA_DIR_ENV, ".")
    base = Path(data_dir)
    paths = {}
    missing = []
    for role, stem in MNIST_FILES.items():
        plain = base / stem
        compressed = base / (stem + ".gz")
        if plain.exists():
            paths[role] = plain
        elif compressed.exists():
            paths[role] = compressed
        else:
            missing.append(f"{plain} (or {compressed.name})")
    return paths, missing
