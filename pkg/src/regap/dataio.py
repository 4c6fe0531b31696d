"""Synthetic benchmarks and small-file I/O (PGM/PPM, raw RGT1 tensors, manifests)."""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from regap.manifold import sample_tubular, tube_radius
from regap.model import AutoencoderPair, LatentPrior

REAL = "Real"
GENERATED = "Generated"
LABELS = (REAL, GENERATED)


class ImageFormatError(ValueError):
    pass


class TensorFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    n_real: int
    n_generated: int
    offset: tuple = ("uniform", 0.1, 0.3)
    noise_floor: float = 0.0
    split: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.n_real < 1 or self.n_generated < 1:
            raise ValueError("class counts must be >= 1")
        kind = self.offset[0]
        if kind == "fixed":
            if len(self.offset) != 2 or self.offset[1] < 0:
                raise ValueError("fixed offset needs one non-negative magnitude")
        elif kind == "uniform":
            if len(self.offset) != 3 or not 0 <= self.offset[1] <= self.offset[2]:
                raise ValueError("uniform offset needs 0 <= m_lo <= m_hi")
        else:
            raise ValueError(f"unknown offset distribution {kind!r}")
        if not 0.0 <= self.split < 1.0:
            raise ValueError("calibration split must lie in [0, 1)")
        if self.noise_floor < 0:
            raise ValueError("noise floor must be non-negative")

    def draw_offset(self, rng) -> float:
        if self.offset[0] == "fixed":
            return float(self.offset[1])
        return float(rng.uniform(self.offset[1], self.offset[2]))


@dataclass
class Sample:
    image: np.ndarray
    label: str
    eps_norm: float = math.nan
    clamp_norm: float = 0.0
    meta: dict = field(default_factory=dict)


def _class_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream)]))


def gen_benchmark(model: AutoencoderPair, prior: LatentPrior, spec: SyntheticSpec):
    """Build ``(calibration, evaluation)`` sample lists.

    Generated samples are ``D(z)``; real samples are normal offsets of
    manifold points with their unclamped ``||eps||`` recorded.  Both classes
    get the same optional pixel noise and are clamped to ``[0, 1]``; each
    class is split in a fixed order.
    """
    real_rng = _class_rng(spec.seed, 1)
    gen_rng = _class_rng(spec.seed, 2)
    reals, gens = [], []
    for i in range(spec.n_real):
        m = spec.draw_offset(real_rng)
        _, x_off, eps, z = sample_tubular(model, prior, m, real_rng)
        radius = tube_radius(model, z)
        if m > radius:
            raise ValueError(f"offset {m:.4g} exceeds the tube radius {radius:.4g} at real sample {i}")
        reals.append(_finish(x_off, REAL, spec, real_rng, float(np.linalg.norm(eps)), {"z": z, "index": i}))
    for i in range(spec.n_generated):
        z = prior.sample(gen_rng)
        gens.append(_finish(model.decode(z), GENERATED, spec, gen_rng, 0.0, {"z": z, "index": i}))

    def split(items):
        k = int(round(spec.split * len(items)))
        return items[:k], items[k:]

    rc, re = split(reals)
    gc, ge = split(gens)
    return rc + gc, re + ge


def _finish(x, label, spec, rng, eps_norm, meta) -> Sample:
    if spec.noise_floor > 0:
        x = x + spec.noise_floor * rng.standard_normal(x.shape)
    clamped = np.clip(x, 0.0, 1.0)
    return Sample(clamped, label, eps_norm, float(np.linalg.norm(clamped - x)), meta)


def toy_manifold_dataset(image_shape, latent_dim: int, n: int, seed: int, amplitude: float = 0.25):
    """Images on a smooth nonlinear manifold ``0.5 + a*tanh(G z)``, ``z`` uniform in the unit box."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 99]))
    size = int(np.prod(image_shape))
    G = rng.standard_normal((size, latent_dim))
    Z = rng.uniform(-1.0, 1.0, (n, latent_dim))
    X = 0.5 + amplitude * np.tanh(Z @ G.T)
    return [x.reshape(image_shape) for x in X]


# ---------------------------------------------------------------- PGM / PPM

_WS = b" \t\r\n\x0b\x0c"


def _header_fields(data: bytes, count: int):
    pos = 2
    fields = []
    while len(fields) < count:
        while pos < len(data) and (data[pos] in _WS or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < len(data) and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and data[pos] not in _WS and data[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise ImageFormatError(f"malformed header: missing field at byte offset {start}")
        token = data[start:pos]
        if not token.isdigit():
            raise ImageFormatError(f"malformed header field {token!r} at byte offset {start}")
        fields.append(int(token))
    if pos >= len(data) or data[pos] not in _WS:
        raise ImageFormatError(f"malformed header: expected whitespace at byte offset {pos}")
    return fields, pos + 1


def decode_netpbm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise ImageFormatError(f"unsupported magic {magic!r} (expected P5 or P6)")
    (width, height, maxval), start = _header_fields(data, 3)
    if maxval != 255:
        raise ImageFormatError(f"unsupported maxval {maxval} (only 255)")
    if width < 1 or height < 1:
        raise ImageFormatError("image dimensions must be positive")
    need = width * height * channels
    payload = data[start:start + need]
    if len(payload) < need:
        raise ImageFormatError(
            f"truncated payload at byte offset {start + len(payload)}: expected {need} bytes, got {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return arr.astype(np.float64) / 255.0


def encode_netpbm(x) -> bytes:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, :, None]
    h, w, c = x.shape
    if c not in (1, 3):
        raise ImageFormatError(f"cannot store {c} channels as PGM/PPM")
    magic = b"P5" if c == 1 else b"P6"
    q = np.clip(np.round(x * 255.0), 0, 255).astype(np.uint8)
    return magic + f"\n{w} {h}\n255\n".encode() + q.tobytes()


def load_image(path) -> np.ndarray:
    """Load a PGM (P5), PPM (P6) or RGT1 tensor image as ``(H, W, C)`` floats."""
    data = Path(path).read_bytes()
    if data[:4] == _TENSOR_MAGIC:
        t = tensor_from_bytes(data)
        return t[:, :, None] if t.ndim == 2 else t
    return decode_netpbm(data)


def save_image(path, x) -> None:
    Path(path).write_bytes(encode_netpbm(x))


# ---------------------------------------------------------------- RGT1 tensors

_TENSOR_MAGIC = b"RGT1"


def tensor_to_bytes(a) -> bytes:
    a = np.asarray(a, dtype=np.float64)
    header = _TENSOR_MAGIC + struct.pack("<I", a.ndim) + struct.pack(f"<{a.ndim}Q", *a.shape)
    return header + np.ascontiguousarray(a, dtype="<f8").tobytes()


def tensor_from_bytes(data: bytes) -> np.ndarray:
    if data[:4] != _TENSOR_MAGIC:
        raise TensorFormatError("bad tensor magic (expected RGT1)")
    if len(data) < 8:
        raise TensorFormatError("truncated tensor header")
    (ndim,) = struct.unpack("<I", data[4:8])
    end = 8 + 8 * ndim
    if len(data) < end:
        raise TensorFormatError("truncated tensor shape header")
    shape = struct.unpack(f"<{ndim}Q", data[8:end])
    count = int(np.prod(shape)) if ndim else 1
    if len(data) - end != 8 * count:
        raise TensorFormatError(
            f"shape {tuple(shape)} needs {8 * count} payload bytes, file has {len(data) - end}"
        )
    return np.frombuffer(data[end:], dtype="<f8").astype(np.float64).reshape(shape)


def save_tensor(path, a) -> None:
    Path(path).write_bytes(tensor_to_bytes(a))


def load_tensor(path) -> np.ndarray:
    return tensor_from_bytes(Path(path).read_bytes())


# ---------------------------------------------------------------- dataset directories

MANIFEST_COLUMNS = ["path", "label", "eps_norm"]
SPLITS = ("calibration", "evaluation")


def save_dataset(root, calibration: Sequence[Sample], evaluation: Sequence[Sample]) -> None:
    """Write one RGT1 file per image plus ``<split>.csv`` manifests under ``root``."""
    root = Path(root)
    for name, items in zip(SPLITS, (calibration, evaluation)):
        (root / name).mkdir(parents=True, exist_ok=True)
        with open(root / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(MANIFEST_COLUMNS)
            for i, s in enumerate(items):
                rel = f"{name}/{i:05d}.rgt"
                save_tensor(root / rel, s.image)
                eps = "" if s.label == GENERATED else repr(float(s.eps_norm))
                w.writerow([rel, s.label, eps])


def load_manifest(path) -> list[Sample]:
    path = Path(path)
    items = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames[:3]) != MANIFEST_COLUMNS:
            raise ValueError(f"{path}: manifest must start with columns {MANIFEST_COLUMNS}")
        for row in reader:
            if row["label"] not in LABELS:
                raise ValueError(f"{path}: unknown label {row['label']!r}")
            eps = float(row["eps_norm"]) if row["eps_norm"] else math.nan
            img_path = path.parent / row["path"]
            items.append(Sample(load_image(img_path), row["label"], eps, 0.0, {"path": row["path"]}))
    return items


def load_dataset(root):
    root = Path(root)
    missing = [str(root / f"{s}.csv") for s in SPLITS if not (root / f"{s}.csv").exists()]
    if missing:
        raise FileNotFoundError(f"dataset manifest not found: {missing[0]}")
    return tuple(load_manifest(root / f"{s}.csv") for s in SPLITS)
