"""One-sided Jacobi (Hestenes) singular value decomposition.

Decoder Jacobians here are tall and thin (ambient dimension in the hundreds,
latent dimension at most a few dozen), which is the regime where plain
column-pair rotations are both accurate and cheap.
"""

from __future__ import annotations

import numpy as np

_ROTATION_TOL = 1e-15
_MAX_SWEEPS = 80


def _complete_columns(u: np.ndarray, ok: np.ndarray) -> np.ndarray:
    """Replace columns flagged as not ``ok`` by unit vectors orthogonal to the rest."""
    m, k = u.shape
    out = u.copy()
    basis = [out[:, j] for j in range(k) if ok[j]]
    candidates = iter(np.eye(m))
    for j in range(k):
        if ok[j]:
            continue
        for e in candidates:
            v = e.copy()
            for _ in range(2):
                for q in basis:
                    v -= (q @ v) * q
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                v /= nv
                out[:, j] = v
                basis.append(v)
                break
    return out


def _jacobi_tall(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m, n = a.shape
    u = a.copy()
    v = np.eye(n)
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                ui = u[:, i]
                uj = u[:, j]
                alpha = ui @ ui
                beta = uj @ uj
                gamma = ui @ uj
                if alpha == 0.0 or beta == 0.0:
                    continue
                if abs(gamma) <= _ROTATION_TOL * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_i = c * ui - s * uj
                new_j = s * ui + c * uj
                u[:, i] = new_i
                u[:, j] = new_j
                vi = v[:, i].copy()
                vj = v[:, j]
                v[:, i] = c * vi - s * vj
                v[:, j] = s * vi + c * vj
        if not rotated:
            break

    sigma = np.linalg.norm(u, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    u = u[:, order]
    v = v[:, order]
    scale = sigma.max() if sigma.size else 0.0
    ok = sigma > scale * 1e-13 if scale > 0 else np.zeros(n, dtype=bool)
    u = u / np.where(ok, sigma, 1.0)
    if not ok.all():
        u = _complete_columns(u, ok)
    return u, sigma, v


def svd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``m = U @ diag(S) @ V.T`` by one-sided Jacobi rotations.

    Returns ``(U, S, V)`` with ``k = min(rows, cols)`` columns each and ``S``
    non-negative and descending.  Rank-deficient inputs are fine: the left
    singular vectors belonging to (numerically) zero singular values are
    completed to an orthonormal set.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"svd expects a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("svd input contains non-finite entries")
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        k = min(rows, cols)
        return np.zeros((rows, k)), np.zeros(k), np.zeros((cols, k))
    if rows >= cols:
        return _jacobi_tall(a)
    u, s, v = _jacobi_tall(a.T)
    return v, s, u
