"""Degradations for robustness sweeps: JPEG-style quantisation and crop+resize.

The JPEG path is the lossy core of baseline JPEG only: level shift, 8x8
orthonormal DCT-II, quantisation with the quality-scaled luminance table,
dequantisation and inverse DCT.  There is no entropy coding and no chroma
subsampling; every channel uses the luminance table.
"""

from __future__ import annotations

import numpy as np

STD_LUMINANCE_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)

BLOCK = 8


def _dct_matrix(n: int = BLOCK) -> np.ndarray:
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    c = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    c[0, :] = np.sqrt(1.0 / n)
    return c


DCT8 = _dct_matrix()


def quality_to_scale(q: int, base: np.ndarray = STD_LUMINANCE_TABLE) -> tuple[int, np.ndarray]:
    """libjpeg quality scaling; returns ``(scale, scaled_table)``."""
    if isinstance(q, bool) or int(q) != q or not 1 <= q <= 100:
        raise ValueError(f"JPEG quality must be an integer in [1, 100], got {q!r}")
    q = int(q)
    scale = 5000 // q if q < 50 else 200 - 2 * q
    table = np.clip((base * scale + 50) // 100, 1, 255)
    return scale, table


def blockwise_dct(plane: np.ndarray) -> np.ndarray:
    """Type-II orthonormal DCT of every 8x8 block (dimensions multiple of 8)."""
    h, w = plane.shape
    b = plane.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).transpose(0, 2, 1, 3)
    c = DCT8 @ b @ DCT8.T
    return c.transpose(0, 2, 1, 3).reshape(h, w)


def blockwise_idct(coeffs: np.ndarray) -> np.ndarray:
    h, w = coeffs.shape
    c = coeffs.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).transpose(0, 2, 1, 3)
    b = DCT8.T @ c @ DCT8
    return b.transpose(0, 2, 1, 3).reshape(h, w)


def _pad_to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    ph = (-h) % BLOCK
    pw = (-w) % BLOCK
    return np.pad(plane, ((0, ph), (0, pw)), mode="edge")


def jpeg_roundtrip(x, q: int) -> np.ndarray:
    """Quantise every channel in the 8x8 DCT domain at quality ``q``."""
    _, table = quality_to_scale(q)
    steps = None
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 2
    img = x[:, :, None] if squeeze else x
    h, w, ch = img.shape
    out = np.empty_like(img)
    for k in range(ch):
        plane = _pad_to_blocks(img[:, :, k] * 255.0 - 128.0)
        if steps is None:
            reps = (plane.shape[0] // BLOCK, plane.shape[1] // BLOCK)
            steps = np.tile(table, reps).astype(np.float64)
        coeffs = blockwise_dct(plane)
        coeffs = np.round(coeffs / steps) * steps
        rec = blockwise_idct(coeffs)[:h, :w]
        out[:, :, k] = (rec + 128.0) / 255.0
    out = np.clip(out, 0.0, 1.0)
    return out[:, :, 0] if squeeze else out


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resampling with half-pixel centres and border clamping."""
    h, w = img.shape[:2]
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]
    a = img[y0][:, x0]
    b = img[y0][:, x1]
    c = img[y1][:, x0]
    d = img[y1][:, x1]
    return (1 - wy) * ((1 - wx) * a + wx * b) + wy * ((1 - wx) * c + wx * d)


def center_crop_resize(x, f: float) -> np.ndarray:
    """Crop the central ``round(f*H) x round(f*W)`` window and resize back."""
    if not 0.0 < f <= 1.0:
        raise ValueError(f"crop ratio must lie in (0, 1], got {f}")
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 2
    img = x[:, :, None] if squeeze else x
    h, w = img.shape[:2]
    ch, cw = int(round(f * h)), int(round(f * w))
    if ch < 1 or cw < 1:
        raise ValueError(f"crop ratio {f} leaves an empty window for a {h}x{w} image")
    if (ch, cw) == (h, w):
        out = img.copy()
    else:
        top, left = (h - ch) // 2, (w - cw) // 2
        out = bilinear_resize(img[top:top + ch, left:left + cw], h, w)
    return out[:, :, 0] if squeeze else out
