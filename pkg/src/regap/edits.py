"""Structured edits driven by the autoencoder itself.

* ``Add`` composites a patch of a freshly decoded prior sample onto the image.
* ``Fix`` regenerates a masked patch from the reconstruction ``D(E(x))``.
* ``Sem`` steps the latent code along a model-defined direction and adds the
  decoded difference back in pixel space.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from regap.linalg import svd
from regap.model import AutoencoderPair, LatentPrior


class EditKind(str, enum.Enum):
    ADD = "Add"
    FIX = "Fix"
    SEM = "Sem"


PLACEMENTS = ("center", "random", "max-error-region")
SEM_DIRECTIONS = ("top-singular", "random-unit")


@dataclass(frozen=True)
class EditConfig:
    patch_size: int | None = None  # None -> H // 4
    placement: str = "max-error-region"
    sem_step: float = 0.5
    sem_direction: str = "top-singular"
    blend_alpha: float = 1.0

    def __post_init__(self):
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}, got {self.placement!r}")
        if self.sem_direction not in SEM_DIRECTIONS:
            raise ValueError(f"sem_direction must be one of {SEM_DIRECTIONS}")
        if self.sem_step < 0:
            raise ValueError("sem_step must be non-negative")
        if not 0.0 <= self.blend_alpha <= 1.0:
            raise ValueError("blend_alpha must lie in [0, 1]")
        if self.patch_size is not None and self.patch_size < 1:
            raise ValueError("patch_size must be positive")

    def resolved_patch(self, image_shape) -> int:
        h, w = image_shape[0], image_shape[1]
        p = self.patch_size if self.patch_size is not None else max(1, h // 4)
        if p > min(h, w):
            raise ValueError(f"patch size {p} does not fit a {h}x{w} image")
        return p


EditSet = Sequence[tuple[EditKind, EditConfig]]


def parse_edit_set(kinds: Sequence[str], cfg: EditConfig | None = None) -> list[tuple[EditKind, EditConfig]]:
    if not kinds:
        raise ValueError("edit set must not be empty")
    cfg = cfg or EditConfig()
    return [(EditKind(k), cfg) for k in kinds]


def _patch_origin(x: np.ndarray, size: int, placement: str, rng, error_map=None) -> tuple[int, int]:
    h, w = x.shape[:2]
    if placement == "center":
        return (h - size) // 2, (w - size) // 2
    if placement == "random":
        return int(rng.integers(0, h - size + 1)), int(rng.integers(0, w - size + 1))
    # max-error-region: window with the largest summed squared error; first in raster order on ties
    e = error_map.sum(axis=2)
    s = np.pad(e.cumsum(0).cumsum(1), ((1, 0), (1, 0)))
    sums = s[size:, size:] - s[:-size, size:] - s[size:, :-size] + s[:-size, :-size]
    i, j = np.unravel_index(int(np.argmax(sums)), sums.shape)
    return int(i), int(j)


def patch_mask(image_shape, origin: tuple[int, int], size: int) -> np.ndarray:
    m = np.zeros(image_shape, dtype=bool)
    i, j = origin
    m[i:i + size, j:j + size, :] = True
    return m


def _placement(model, x, cfg: EditConfig, rng):
    size = cfg.resolved_patch(x.shape)
    err = None
    if cfg.placement == "max-error-region":
        err = (x - model.reconstruct(x)) ** 2
    return _patch_origin(x, size, cfg.placement, rng, err), size


def edit_add(model: AutoencoderPair, x, cfg: EditConfig, rng: np.random.Generator,
             prior: LatentPrior | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    origin, size = _placement(model, x, cfg, rng)
    prior = prior or LatentPrior("standard-normal", model.latent_dim)
    source = model.decode(prior.sample(rng))
    m = patch_mask(x.shape, origin, size)
    out = x.copy()
    a = cfg.blend_alpha
    out[m] = np.clip((1.0 - a) * x[m] + a * source[m], 0.0, 1.0)
    return out


def edit_fix(model: AutoencoderPair, x, cfg: EditConfig, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    origin, size = _placement(model, x, cfg, rng)
    m = patch_mask(x.shape, origin, size)
    out = x.copy()
    out[m] = np.clip(model.reconstruct(x)[m], 0.0, 1.0)
    return out


def sem_direction(model: AutoencoderPair, z, cfg: EditConfig, rng) -> np.ndarray:
    if cfg.sem_direction == "random-unit":
        v = rng.standard_normal(model.latent_dim)
        return v / np.linalg.norm(v)
    _, _, V = svd(model.decoder_jacobian(z))
    v = V[:, 0]
    # sign convention: largest-magnitude component positive
    k = int(np.argmax(np.abs(v)))
    return v if v[k] >= 0 else -v


def sem_delta(model: AutoencoderPair, x, cfg: EditConfig, rng) -> np.ndarray:
    """Unclamped pixel change ``D(z + delta v) - D(z)`` with ``z = E(x)``."""
    z = model.encode(x)
    if cfg.sem_step == 0:
        return np.zeros(model.image_shape)
    v = sem_direction(model, z, cfg, rng)
    return model.decode(z + cfg.sem_step * v) - model.decode(z)


def edit_sem(model: AutoencoderPair, x, cfg: EditConfig, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if cfg.sem_step == 0:
        return x.copy()
    return np.clip(x + sem_delta(model, x, cfg, rng), 0.0, 1.0)


def apply_edit(kind: EditKind | str, model: AutoencoderPair, x, cfg: EditConfig,
               rng: np.random.Generator, prior: LatentPrior | None = None) -> np.ndarray:
    kind = EditKind(kind)
    if kind is EditKind.ADD:
        return edit_add(model, x, cfg, rng, prior)
    if kind is EditKind.FIX:
        return edit_fix(model, x, cfg, rng)
    return edit_sem(model, x, cfg, rng)
