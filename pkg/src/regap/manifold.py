"""Nearest-point projection onto the decoder manifold and normal-space sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from regap.linalg import svd
from regap.model import AutoencoderPair, LatentPrior, LinearPair


class ProjectionError(RuntimeError):
    """Normal equations stayed singular even under maximal damping."""


class RankDeficiencyError(ValueError):
    pass


@dataclass(frozen=True)
class ProjectionConfig:
    max_iterations: int = 200
    gradient_tolerance: float = 1e-10
    initial_damping: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 0.1
    max_damping: float = 1e12

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gradient_tolerance <= 0 or self.initial_damping <= 0:
            raise ValueError("tolerances and damping must be positive")


@dataclass
class ProjectionResult:
    z_star: np.ndarray
    x_tilde: np.ndarray
    epsilon_perp: np.ndarray
    residual_norm: float
    gradient_norm: float
    iterations: int
    converged: bool
    objective_trace: list


def project(model: AutoencoderPair, x, cfg: ProjectionConfig | None = None) -> ProjectionResult:
    """Levenberg-Marquardt minimisation of ``||x - D(z)||^2`` started at ``E(x)``.

    ``iterations`` counts Jacobian evaluations.  Only objective-decreasing
    steps are accepted, so ``objective_trace`` is non-increasing.  Running
    out of iterations is reported through ``converged=False``.
    """
    cfg = cfg or ProjectionConfig()
    xf = model._check_image(x)
    z = model.encode_flat(xf)
    r = xf - model.decode_flat(z)
    obj = float(r @ r)
    mu = cfg.initial_damping
    d = model.latent_dim
    trace = [obj]
    iterations = 0
    converged = False
    grad_norm = float("inf")

    while iterations < cfg.max_iterations:
        J = model.decoder_jacobian(z)
        iterations += 1
        g = J.T @ r
        grad_norm = float(np.linalg.norm(g))
        if grad_norm <= cfg.gradient_tolerance:
            converged = True
            break
        JtJ = J.T @ J
        accepted = False
        while mu <= cfg.max_damping:
            try:
                step = np.linalg.solve(JtJ + mu * np.eye(d), g)
            except np.linalg.LinAlgError:
                mu *= cfg.damping_up
                if mu > cfg.max_damping:
                    raise ProjectionError("singular normal equations beyond maximal damping")
                continue
            z_new = z + step
            r_new = xf - model.decode_flat(z_new)
            obj_new = float(r_new @ r_new)
            if obj_new < obj:
                z, r, obj = z_new, r_new, obj_new
                mu = max(mu * cfg.damping_down, 1e-15)
                accepted = True
                break
            mu *= cfg.damping_up
        if not accepted:
            # no descent possible at float resolution; stop with current iterate
            break
        trace.append(obj)

    if not converged:
        J = model.decoder_jacobian(z)
        grad_norm = float(np.linalg.norm(J.T @ r))
        converged = grad_norm <= cfg.gradient_tolerance
    x_tilde = model.decode_flat(z)
    eps = xf - x_tilde
    return ProjectionResult(
        z_star=z,
        x_tilde=x_tilde.reshape(model.image_shape),
        epsilon_perp=eps,
        residual_norm=float(np.linalg.norm(eps)),
        gradient_norm=grad_norm,
        iterations=iterations,
        converged=converged,
        objective_trace=trace,
    )


def tangent_basis(model: AutoencoderPair, z_star, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of ``Im J_D(z*)`` (left singular vectors)."""
    U, S, _ = svd(model.decoder_jacobian(z_star))
    if S.size == 0 or S[-1] <= rank_tol * max(S[0], 1.0):
        raise RankDeficiencyError(f"decoder Jacobian is rank deficient (sigma_min = {S[-1]:.3g})")
    return U


def orthogonality_defect(eps_perp, basis: np.ndarray) -> float:
    """``||B^T eps|| / ||eps||``; zero for a zero residual."""
    e = np.asarray(eps_perp, dtype=np.float64).reshape(-1)
    n = np.linalg.norm(e)
    if n == 0.0:
        return 0.0
    return float(np.linalg.norm(basis.T @ e) / n)


def tube_radius(model: AutoencoderPair, z) -> float:
    """Operational radius inside which projections are treated as unique.

    Affine manifolds have unique projections everywhere; otherwise a
    conservative ``0.1 * sigma_min(J_D(z))`` is used.
    """
    if isinstance(model, LinearPair):
        return float("inf")
    return 0.1 * float(svd(model.decoder_jacobian(z))[1][-1])


def random_normal_direction(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = basis.shape[0]
    for _ in range(100):
        g = rng.standard_normal(n)
        g -= basis @ (basis.T @ g)
        g -= basis @ (basis.T @ g)
        norm = np.linalg.norm(g)
        if norm > 1e-8:
            return g / norm
    raise RuntimeError("could not draw a normal direction")


def sample_tubular(model: AutoencoderPair, prior: LatentPrior, magnitude: float, rng: np.random.Generator):
    """Draw ``x_on = D(z)`` and ``x_off = x_on + eps`` with ``eps`` normal to M.

    Returns ``(x_on, x_off, eps, z)``; ``eps`` is a flat vector of norm
    ``magnitude``.
    """
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    if model.ambient_dim <= model.latent_dim:
        raise ValueError("ambient dimension must exceed latent dimension (no normal directions)")
    z = prior.sample(rng)
    x_on = model.decode(z)
    basis = tangent_basis(model, z)
    eps = magnitude * random_normal_direction(basis, rng)
    x_off = x_on + eps.reshape(model.image_shape)
    return x_on, x_off, eps, z
