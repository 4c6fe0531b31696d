"""Reconstruction distances, all oriented so that larger means more different.

SSIM uses a Gaussian window with valid-region semantics (no padding).  SC is
SSIM without its luminance factor, i.e. the mean over windows of the
contrast-structure term ``(2 sigma_ab + C2) / (sigma_a^2 + sigma_b^2 + C2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class MetricKind(str, enum.Enum):
    MSE = "MSE"
    PSNR = "PSNR"
    SSIM = "SSIM"
    SC = "SC"
    MS_SSIM = "MS-SSIM"


MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)


@dataclass(frozen=True)
class MetricConfig:
    dynamic_range: float = 1.0
    window: int = 7
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    mse_floor: float = 1e-12

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError("window must be a positive odd integer")
        if self.dynamic_range <= 0 or self.mse_floor <= 0:
            raise ValueError("dynamic range and MSE floor must be positive")

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a, b = a[:, :, None], b[:, :, None]
    if a.ndim != 3:
        raise ValueError(f"images must be (H, W) or (H, W, C), got {a.shape}")
    return a, b


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size) - size // 2
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    win = sliding_window_view(img, kernel.shape)
    return np.einsum("ijkl,kl->ij", win, kernel)


def _ssim_terms(cfg: MetricConfig, a: np.ndarray, b: np.ndarray):
    """Per-window luminance and contrast-structure terms for one channel."""
    h, w = a.shape
    if cfg.window > min(h, w):
        raise ValueError(f"window {cfg.window} larger than image {h}x{w}")
    k = gaussian_window(cfg.window, cfg.sigma)
    mu_a = _filter_valid(a, k)
    mu_b = _filter_valid(b, k)
    saa = _filter_valid(a * a, k) - mu_a * mu_a
    sbb = _filter_valid(b * b, k) - mu_b * mu_b
    sab = _filter_valid(a * b, k) - mu_a * mu_b
    lum = (2 * mu_a * mu_b + cfg.c1) / (mu_a**2 + mu_b**2 + cfg.c1)
    cs = (2 * sab + cfg.c2) / (saa + sbb + cfg.c2)
    return lum, cs


def ssim_map(cfg: MetricConfig, a, b) -> np.ndarray:
    """Local SSIM over the valid region, shape ``(H-w+1, W-w+1, C)``."""
    a, b = _pair(a, b)
    maps = []
    for ch in range(a.shape[2]):
        lum, cs = _ssim_terms(cfg, a[:, :, ch], b[:, :, ch])
        maps.append(lum * cs)
    return np.stack(maps, axis=-1)


def ssim(cfg: MetricConfig, a, b) -> float:
    return float(np.mean(ssim_map(cfg, a, b)))


def sc_map(cfg: MetricConfig, a, b) -> np.ndarray:
    a, b = _pair(a, b)
    return np.stack([_ssim_terms(cfg, a[:, :, ch], b[:, :, ch])[1] for ch in range(a.shape[2])], axis=-1)


def contrast_structure(cfg: MetricConfig, a, b) -> float:
    return float(np.mean(sc_map(cfg, a, b)))


def ms_ssim_levels(height: int, width: int, window: int) -> int:
    m = min(height, width)
    if m < window:
        raise ValueError(f"image {height}x{width} smaller than window {window}")
    return min(5, int(math.floor(math.log2(m / window))) + 1)


def _mean_pool(img: np.ndarray) -> np.ndarray:
    h, w = (img.shape[0] // 2) * 2, (img.shape[1] // 2) * 2
    x = img[:h, :w]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def ms_ssim(cfg: MetricConfig, a, b) -> float:
    """Multi-scale SSIM, mean over channels.

    Contrast-structure is used at every level but the coarsest, where the
    full SSIM is used; the standard five exponents are truncated to the
    levels that fit and renormalised.  Negative per-level values are clipped
    at zero before exponentiation.
    """
    a, b = _pair(a, b)
    levels = ms_ssim_levels(a.shape[0], a.shape[1], cfg.window)
    weights = np.array(MS_SSIM_WEIGHTS[:levels])
    weights = weights / weights.sum()
    per_channel = []
    for ch in range(a.shape[2]):
        x, y = a[:, :, ch], b[:, :, ch]
        value = 1.0
        for lvl in range(levels):
            lum, cs = _ssim_terms(cfg, x, y)
            term = np.mean(lum * cs) if lvl == levels - 1 else np.mean(cs)
            value *= max(float(term), 0.0) ** weights[lvl]
            if lvl < levels - 1:
                x, y = _mean_pool(x), _mean_pool(y)
        per_channel.append(value)
    return float(np.mean(per_channel))


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(cfg: MetricConfig, a, b) -> float:
    m = max(mse(a, b), cfg.mse_floor)
    return 10.0 * math.log10(cfg.dynamic_range**2 / m)


def distance(kind: MetricKind | str, cfg: MetricConfig, a, b) -> float:
    """Distance of the given kind; ``d(a, a)`` is each kind's minimum."""
    kind = MetricKind(kind)
    if kind is MetricKind.MSE:
        return mse(a, b)
    if kind is MetricKind.PSNR:
        return -psnr(cfg, a, b)
    if kind is MetricKind.SSIM:
        return 1.0 - ssim(cfg, a, b)
    if kind is MetricKind.SC:
        return 1.0 - contrast_structure(cfg, a, b)
    return 1.0 - ms_ssim(cfg, a, b)
