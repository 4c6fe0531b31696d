"""Decoder Jacobian spectra and numerical checks of the error lower bound.

Two bounds are tracked side by side and never merged:

* the *stated* bound ``sqrt(1 + kappa^-2) * ||eps||`` with ``kappa`` the
  condition number of ``J_D`` at the projected latent, and
* the *simple* bound ``||eps||``, which follows from the orthogonal split
  ``x = x_tilde + eps`` alone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from regap.linalg import svd
from regap.manifold import ProjectionConfig, project, sample_tubular
from regap.model import AutoencoderPair, LatentPrior

__all__ = [
    "svd",
    "SpectralReport",
    "BoundCheck",
    "condition_number",
    "spectral_lower_bound",
    "verify_bound",
    "first_order_reconstruction",
    "bound_sweep",
    "SweepRow",
    "write_bound_csv",
    "loglog_slope",
]

KAPPA_INF_SIGMA = 1e-14
# float slack for >= comparisons between equal-in-exact-arithmetic norms
FLOAT_ATOL = 1e-12


@dataclass(frozen=True)
class SpectralReport:
    sigma_max: float
    sigma_min: float
    kappa: float
    at_latent: np.ndarray


def condition_number(model: AutoencoderPair, z) -> SpectralReport:
    _, S, _ = svd(model.decoder_jacobian(z))
    smax, smin = float(S[0]), float(S[-1])
    kappa = math.inf if smin <= KAPPA_INF_SIGMA else smax / smin
    return SpectralReport(smax, smin, kappa, np.asarray(z, dtype=np.float64).copy())


def spectral_lower_bound(kappa: float, eps_norm: float) -> float:
    """First-order term of the stated bound, ``sqrt(1 + kappa^-2) * eps_norm``."""
    if kappa < 1:
        raise ValueError(f"condition number must be >= 1, got {kappa}")
    if eps_norm < 0:
        raise ValueError("eps_norm must be non-negative")
    inv = 0.0 if math.isinf(kappa) else 1.0 / kappa
    return math.sqrt(1.0 + inv * inv) * eps_norm


@dataclass
class BoundCheck:
    recon_error: float
    eps_norm: float
    kappa: float
    stated_bound: float
    simple_bound: float
    second_order_allowance: float
    holds_stated: bool
    holds_simple: bool
    ratio: float
    tangent_response: float
    converged: bool

    @property
    def verifiable(self) -> bool:
        return self.converged


def verify_bound(
    model: AutoencoderPair,
    x,
    cfg: ProjectionConfig | None = None,
    allowance_constant: float = 0.0,
) -> BoundCheck:
    """Compare ``||x - D(E(x))||`` with both bounds at the projection of ``x``.

    ``tangent_response`` is ``||J_D(z*) J_E(x_tilde) eps||``, the tangent
    part of the first-order reconstruction; the stated bound holds to first
    order exactly when it is at least ``||eps|| / kappa``.
    """
    xf = model._check_image(x)
    recon = float(np.linalg.norm(xf - model.decode_flat(model.encode_flat(xf))))
    proj = project(model, xf, cfg)
    eps_norm = proj.residual_norm
    spec = condition_number(model, proj.z_star)
    stated = spectral_lower_bound(spec.kappa, eps_norm)
    allowance = allowance_constant * eps_norm**2
    jd = model.decoder_jacobian(proj.z_star)
    je = model.encoder_jacobian(proj.x_tilde)
    tangent = float(np.linalg.norm(jd @ (je @ proj.epsilon_perp)))
    return BoundCheck(
        recon_error=recon,
        eps_norm=eps_norm,
        kappa=spec.kappa,
        stated_bound=stated,
        simple_bound=eps_norm,
        second_order_allowance=allowance,
        holds_stated=recon >= stated - allowance - FLOAT_ATOL,
        holds_simple=recon >= eps_norm - allowance - FLOAT_ATOL,
        ratio=recon / eps_norm if eps_norm > FLOAT_ATOL else math.nan,
        tangent_response=tangent,
        converged=proj.converged,
    )


def first_order_reconstruction(model: AutoencoderPair, x_tilde, eps_perp) -> np.ndarray:
    """Linearised ``D(E(x_tilde + eps))`` around the on-manifold point.

    Expands about ``z* = E(x_tilde)``: ``D(z*) + J_D(z*) J_E(x_tilde) eps``.
    """
    xt = model._check_image(x_tilde)
    eps = np.asarray(eps_perp, dtype=np.float64).reshape(-1)
    z = model.encode_flat(xt)
    pred = model.decode_flat(z)
    if np.any(eps):
        pred = pred + model.decoder_jacobian(z) @ (model.encoder_jacobian(xt) @ eps)
    return pred.reshape(model.image_shape)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    if lx.size < 2:
        return math.nan
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass
class SweepRow:
    magnitude: float
    mean_error: float
    min_ratio: float
    frac_simple: float
    frac_stated: float
    slope: float
    checks: list


def bound_sweep(
    model: AutoencoderPair,
    prior: LatentPrior,
    magnitudes,
    trials: int,
    rng: np.random.Generator,
    cfg: ProjectionConfig | None = None,
    allowance_constant: float = 0.0,
) -> list[SweepRow]:
    mags = [float(m) for m in magnitudes]
    if any(b < a for a, b in zip(mags, mags[1:])):
        raise ValueError("magnitudes must be sorted ascending")
    rows = []
    for m in mags:
        checks = []
        for _ in range(trials):
            _, x_off, _, _ = sample_tubular(model, prior, m, rng)
            checks.append(verify_bound(model, x_off, cfg, allowance_constant))
        ratios = [c.ratio for c in checks if not math.isnan(c.ratio)]
        rows.append(
            SweepRow(
                magnitude=m,
                mean_error=float(np.mean([c.recon_error for c in checks])),
                min_ratio=float(min(ratios)) if ratios else math.nan,
                frac_simple=float(np.mean([c.holds_simple for c in checks])),
                frac_stated=float(np.mean([c.holds_stated for c in checks])),
                slope=math.nan,
                checks=checks,
            )
        )
    off = [r for r in rows if r.magnitude > 0]
    slope = loglog_slope([r.magnitude for r in off], [r.mean_error for r in off]) if len(off) >= 2 else math.nan
    for r in rows:
        r.slope = slope
    return rows


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.6f}"


def write_bound_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["magnitude", "mean_error", "min_ratio", "frac_simple", "frac_stated", "slope"])
        for r in rows:
            w.writerow([_fmt(r.magnitude), _fmt(r.mean_error), _fmt(r.min_ratio),
                        _fmt(r.frac_simple), _fmt(r.frac_stated), _fmt(r.slope)])
