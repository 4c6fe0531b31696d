"""Encoder/decoder pairs, their Jacobians, training and assumption checks.

Images are float64 arrays of shape ``(H, W, C)``; latents are 1-D arrays of
length ``d``.  Internally every map works on the flattened image (row-major,
channel last), so a decoder Jacobian has shape ``(H*W*C, d)``.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from regap.linalg import svd

logger = logging.getLogger(__name__)

ACTIVATIONS = ("tanh", "softplus", "identity")


class ShapeError(ValueError):
    """Input does not match the model's latent or image shape."""


class TrainingError(RuntimeError):
    """Training diverged (non-finite loss)."""


class ModelFormatError(ValueError):
    """A model file is malformed."""


def as_image(x: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.size != shape[0] * shape[1] * shape[2]:
        raise ShapeError(f"expected {shape} ({np.prod(shape)} values), got {a.shape}")
    return a.reshape(shape)


def validate_image_shape(shape: Sequence[int]) -> tuple[int, int, int]:
    h, w, c = (int(v) for v in shape)
    if h < 1 or w < 1:
        raise ValueError(f"image height/width must be positive, got {shape}")
    if c not in (1, 3):
        raise ValueError(f"channels must be 1 or 3, got {c}")
    return h, w, c


@dataclass(frozen=True)
class LatentPrior:
    """Latent prior: ``standard-normal`` or ``uniform-box`` on ``[lo, hi]^d``."""

    kind: str
    dim: int
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if self.kind not in ("standard-normal", "uniform-box"):
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("prior dimension must be positive")
        if self.kind == "uniform-box" and not self.lo < self.hi:
            raise ValueError(f"uniform-box needs lo < hi, got {self.lo}, {self.hi}")

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.dim,) if size is None else (size, self.dim)
        if self.kind == "standard-normal":
            return rng.standard_normal(shape)
        return rng.uniform(self.lo, self.hi, shape)


class _PairBase:
    image_shape: tuple[int, int, int]
    latent_dim: int

    @property
    def ambient_dim(self) -> int:
        h, w, c = self.image_shape
        return h * w * c

    def _check_latent(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.latent_dim,):
            raise ShapeError(f"latent must have shape ({self.latent_dim},), got {z.shape}")
        return z

    def _check_image(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.image_shape and x.shape != (self.ambient_dim,):
            raise ShapeError(f"image must have shape {self.image_shape}, got {x.shape}")
        return x.reshape(-1)

    def decode(self, z) -> np.ndarray:
        """``D(z)`` as an image of shape ``image_shape``."""
        return self.decode_flat(self._check_latent(z)).reshape(self.image_shape)

    def encode(self, x) -> np.ndarray:
        """``E(x)`` as a latent vector."""
        return self.encode_flat(self._check_image(x))

    def reconstruct(self, x) -> np.ndarray:
        return self.decode(self.encode(x))


class LinearPair(_PairBase):
    """Affine pair ``D(z) = A z + b``, ``E(x) = M x + c``.

    With ``check_inverse`` the constructor insists on ``M A = I`` (to 1e-10),
    and ``M b + c = 0``, which together are assumption A1 for affine maps.
    """

    kind = "linear"

    def __init__(self, A, b, M, c, image_shape=None, check_inverse: bool = True):
        A = np.array(A, dtype=np.float64)
        if A.ndim != 2:
            raise ShapeError("decoder matrix must be 2-D")
        n, d = A.shape
        b = np.array(b, dtype=np.float64).reshape(-1)
        M = np.array(M, dtype=np.float64)
        c = np.array(c, dtype=np.float64).reshape(-1)
        if b.shape != (n,) or M.shape != (d, n) or c.shape != (d,):
            raise ShapeError(
                f"inconsistent linear pair shapes A{A.shape} b{b.shape} M{M.shape} c{c.shape}"
            )
        if image_shape is None:
            image_shape = (n, 1, 1)
        self.image_shape = validate_image_shape(image_shape)
        if self.ambient_dim != n:
            raise ShapeError(f"image shape {image_shape} does not hold {n} values")
        if check_inverse:
            defect = np.abs(M @ A - np.eye(d)).max()
            if defect > 1e-10:
                raise ValueError(f"encoder is not a left inverse of the decoder (|MA - I| = {defect:.3g})")
            shift = np.abs(M @ b + c).max()
            if shift > 1e-10 * max(1.0, np.abs(b).max()):
                raise ValueError(f"encoder offset does not cancel the decoder bias (|Mb + c| = {shift:.3g})")
        self.A, self.b, self.M, self.c = A, b, M, c
        self.latent_dim = d
        for arr in (self.A, self.b, self.M, self.c):
            arr.setflags(write=False)

    @classmethod
    def exact(cls, A, b=None, image_shape=None) -> "LinearPair":
        """Pair whose encoder is the pseudo-inverse of the decoder."""
        A = np.asarray(A, dtype=np.float64)
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=np.float64).reshape(-1)
        M = np.linalg.solve(A.T @ A, A.T)
        return cls(A, b, M, -M @ b, image_shape)

    @classmethod
    def normal_sensitive(cls, A, b=None, C=None, image_shape=None) -> "LinearPair":
        """Exact pair whose encoder also responds to normal directions.

        ``E = (A + N C)^T`` with ``N`` an orthonormal basis of the complement
        of ``Im A`` (``A`` must have orthonormal columns).  By default ``C``
        makes ``C^T`` an isometry of the normal space, which needs
        ``n - d <= d``.
        """
        A = np.asarray(A, dtype=np.float64)
        n, d = A.shape
        if np.abs(A.T @ A - np.eye(d)).max() > 1e-10:
            raise ValueError("normal-sensitive fixture needs orthonormal decoder columns")
        b = np.zeros(n) if b is None else np.asarray(b, dtype=np.float64).reshape(-1)
        q, _ = np.linalg.qr(np.hstack([A, np.eye(n)]))
        N = q[:, d:n]
        N = N - A @ (A.T @ N)
        N, _ = np.linalg.qr(N)
        if C is None:
            if n - d > d:
                raise ValueError("default isometric C needs ambient - latent <= latent")
            C = np.eye(n - d, d)
        C = np.asarray(C, dtype=np.float64)
        M = (A + N @ C).T
        return cls(A, b, M, -M @ b, image_shape)

    def decode_flat(self, z: np.ndarray) -> np.ndarray:
        return z @ self.A.T + self.b

    def encode_flat(self, x: np.ndarray) -> np.ndarray:
        return x @ self.M.T + self.c

    def decoder_jacobian(self, z) -> np.ndarray:
        self._check_latent(z)
        return np.array(self.A)

    def encoder_jacobian(self, x) -> np.ndarray:
        self._check_image(x)
        return np.array(self.M)


def dct_basis_pair(image_shape, latent_dim: int, scale: float = 0.03, offset: float = 0.5) -> LinearPair:
    """Exact linear pair spanned by the lowest non-constant 2-D cosine modes.

    Columns are orthonormal, scaled by ``scale``; the bias is the constant
    image ``offset``.  Smooth columns keep generated images band-limited.
    """
    h, w, ch = validate_image_shape(image_shape)

    def mode(n, k):
        v = np.cos(np.pi * (2 * np.arange(n) + 1) * k / (2 * n))
        return v / np.linalg.norm(v)

    freqs = sorted(((u, v) for u in range(h) for v in range(w) if (u, v) != (0, 0)),
                   key=lambda t: (t[0] + t[1], t))
    cols = []
    for u, v in freqs:
        img = np.outer(mode(h, u), mode(w, v))
        for k in range(ch):
            full = np.zeros((h, w, ch))
            full[:, :, k] = img
            cols.append(full.reshape(-1))
            if len(cols) == latent_dim:
                break
        if len(cols) == latent_dim:
            break
    if len(cols) < latent_dim:
        raise ValueError(f"latent dim {latent_dim} too large for image {image_shape}")
    A = scale * np.array(cols).T
    b = np.full(h * w * ch, offset)
    return LinearPair.exact(A, b, (h, w, ch))


def pca_pair(dataset, latent_dim: int) -> LinearPair:
    """Exact linear pair on the top principal subspace of ``dataset``."""
    X = np.array([np.asarray(x, dtype=np.float64) for x in dataset])
    if X.ndim != 4:
        raise ShapeError("PCA needs a stack of (H, W, C) images")
    shape = validate_image_shape(X.shape[1:])
    flat = X.reshape(len(X), -1)
    if latent_dim > min(flat.shape):
        raise ValueError(f"latent dim {latent_dim} exceeds the data rank bound {min(flat.shape)}")
    mean = flat.mean(axis=0)
    _, S, V = svd(flat - mean)
    if S[latent_dim - 1] <= 1e-12 * max(S[0], 1.0):
        raise ValueError("training data spans fewer than latent_dim directions")
    return LinearPair.exact(V[:, :latent_dim], mean, shape)


# ---------------------------------------------------------------- MLP pair


def _act(name: str, x: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(x)
    if name == "softplus":
        return np.logaddexp(0.0, x)
    return x


def _act_grad(name: str, x: np.ndarray) -> np.ndarray:
    if name == "tanh":
        t = np.tanh(x)
        return 1.0 - t * t
    if name == "softplus":
        return 0.5 * (1.0 + np.tanh(0.5 * x))
    return np.ones_like(x)


@dataclass
class Layer:
    weight: np.ndarray
    bias: np.ndarray
    activation: str = "tanh"

    def __post_init__(self):
        self.weight = np.array(self.weight, dtype=np.float64)
        self.bias = np.array(self.bias, dtype=np.float64).reshape(-1)
        if self.activation not in ACTIVATIONS:
            raise ValueError(
                f"activation {self.activation!r} is not C1-smooth or unknown; use one of {ACTIVATIONS}"
            )
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(f"layer weight {self.weight.shape} and bias {self.bias.shape} disagree")

    @property
    def n_in(self) -> int:
        return self.weight.shape[1]

    @property
    def n_out(self) -> int:
        return self.weight.shape[0]


def _forward(layers: Sequence[Layer], h: np.ndarray) -> np.ndarray:
    for layer in layers:
        h = _act(layer.activation, h @ layer.weight.T + layer.bias)
    return h


def _forward_cached(layers, h):
    cache = []
    for layer in layers:
        pre = h @ layer.weight.T + layer.bias
        cache.append((h, pre))
        h = _act(layer.activation, pre)
    return h, cache


def _backward(layers, cache, grad_out):
    grads = [None] * len(layers)
    g = grad_out
    for k in range(len(layers) - 1, -1, -1):
        layer = layers[k]
        h_in, pre = cache[k]
        g = g * _act_grad(layer.activation, pre)
        grads[k] = (g.T @ h_in, g.sum(axis=0))
        g = g @ layer.weight
    return grads, g


def _jacobian(layers: Sequence[Layer], v: np.ndarray) -> np.ndarray:
    # forward accumulation: J <- diag(act'(pre)) W J
    h = v
    jac = None
    for layer in layers:
        pre = layer.weight @ h + layer.bias
        local = _act_grad(layer.activation, pre)[:, None] * layer.weight
        jac = local if jac is None else local @ jac
        h = _act(layer.activation, pre)
    return jac


class MlpPair(_PairBase):
    """Fully connected encoder/decoder stacks with C1 activations."""

    kind = "mlp"

    def __init__(self, encoder_layers: Sequence[Layer], decoder_layers: Sequence[Layer], image_shape):
        self.image_shape = validate_image_shape(image_shape)
        self.encoder_layers = [Layer(l.weight, l.bias, l.activation) for l in encoder_layers]
        self.decoder_layers = [Layer(l.weight, l.bias, l.activation) for l in decoder_layers]
        if not self.encoder_layers or not self.decoder_layers:
            raise ShapeError("encoder and decoder need at least one layer each")
        n = self.ambient_dim
        d = self.decoder_layers[0].n_in
        self.latent_dim = d
        for name, layers, n_in, n_out in (
            ("encoder", self.encoder_layers, n, d),
            ("decoder", self.decoder_layers, d, n),
        ):
            prev = n_in
            for i, layer in enumerate(layers):
                if layer.n_in != prev:
                    raise ShapeError(f"{name} layer {i} expects {layer.n_in} inputs, previous gives {prev}")
                prev = layer.n_out
            if prev != n_out:
                raise ShapeError(f"{name} outputs {prev} values, expected {n_out}")
        for layer in self.encoder_layers + self.decoder_layers:
            layer.weight.setflags(write=False)
            layer.bias.setflags(write=False)

    def decode_flat(self, z: np.ndarray) -> np.ndarray:
        return _forward(self.decoder_layers, z)

    def encode_flat(self, x: np.ndarray) -> np.ndarray:
        return _forward(self.encoder_layers, x)

    def decoder_jacobian(self, z) -> np.ndarray:
        return _jacobian(self.decoder_layers, self._check_latent(z))

    def encoder_jacobian(self, x) -> np.ndarray:
        return _jacobian(self.encoder_layers, self._check_image(x))


AutoencoderPair = Union[LinearPair, MlpPair]


# ---------------------------------------------------------------- training


@dataclass
class TrainConfig:
    latent_dim: int
    hidden: Sequence[int] = (32,)
    activation: str = "tanh"
    epochs: int = 2000
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    latent_weight: float = 0.1
    batch_size: int | None = None
    seed: int = 0


@dataclass
class TrainReport:
    recon_mse: float
    latent_mse: float
    loss: float
    epochs: int
    history: list = field(default_factory=list, repr=False)


def _init_stack(rng, sizes, activation):
    layers = []
    for i in range(len(sizes) - 1):
        n_in, n_out = sizes[i], sizes[i + 1]
        w = rng.standard_normal((n_out, n_in)) * np.sqrt(1.0 / n_in)
        act = activation if i < len(sizes) - 2 else "identity"
        layers.append(Layer(w, np.zeros(n_out), act))
    return layers


def train_autoencoder(dataset, prior: LatentPrior, config: TrainConfig) -> tuple[MlpPair, TrainReport]:
    """Fit an MLP pair with Adam on reconstruction plus latent consistency.

    The objective is ``mean ||x - D(E(x))||^2 + latent_weight * mean
    ||E(D(z)) - z||^2`` with fresh prior draws each step; the second term is
    what pushes ``E o D`` towards the identity on the manifold itself.
    """
    data = [np.asarray(x, dtype=np.float64) for x in dataset]
    if not data:
        raise ValueError("training dataset is empty")
    shape = data[0].shape
    if len(shape) != 3 or any(x.shape != shape for x in data):
        raise ShapeError("training images must share one (H, W, C) shape")
    if prior.dim != config.latent_dim:
        raise ShapeError(f"prior dim {prior.dim} != latent dim {config.latent_dim}")
    image_shape = validate_image_shape(shape)
    X = np.stack([x.reshape(-1) for x in data])
    n_samples, n = X.shape
    d = config.latent_dim
    rng = np.random.default_rng(config.seed)

    hidden = list(config.hidden)
    enc = _init_stack(rng, [n, *hidden, d], config.activation)
    dec = _init_stack(rng, [d, *reversed(hidden), n], config.activation)
    params = [p for layer in enc + dec for p in (layer.weight, layer.bias)]
    m1 = [np.zeros_like(p) for p in params]
    m2 = [np.zeros_like(p) for p in params]
    batch = config.batch_size or n_samples
    lam = config.latent_weight
    history = []
    recon = latent = loss = float("nan")

    for epoch in range(1, config.epochs + 1):
        if batch < n_samples:
            idx = rng.choice(n_samples, size=batch, replace=False)
            xb = X[idx]
        else:
            xb = X
        nb = xb.shape[0]

        z_hat, enc_cache = _forward_cached(enc, xb)
        x_hat, dec_cache = _forward_cached(dec, z_hat)
        r = x_hat - xb
        recon_loss = float(np.sum(r * r) / nb)
        g_dec, g_z = _backward(dec, dec_cache, 2.0 * r / nb)
        g_enc, _ = _backward(enc, enc_cache, g_z)
        grads = [list(g) for g in g_enc + g_dec]

        latent_loss = 0.0
        if lam > 0:
            zp = prior.sample(rng, nb)
            xp, dec_cache2 = _forward_cached(dec, zp)
            zr, enc_cache2 = _forward_cached(enc, xp)
            q = zr - zp
            latent_loss = float(np.sum(q * q) / nb)
            g_enc2, g_x = _backward(enc, enc_cache2, 2.0 * lam * q / nb)
            g_dec2, _ = _backward(dec, dec_cache2, g_x)
            for k, (gw, gb) in enumerate(g_enc2 + g_dec2):
                grads[k][0] = grads[k][0] + gw
                grads[k][1] = grads[k][1] + gb

        loss = recon_loss + lam * latent_loss
        if not np.isfinite(loss):
            raise TrainingError(
                f"non-finite loss at epoch {epoch}: reconstruction={recon_loss}, latent={latent_loss}"
            )
        recon, latent = recon_loss / n, latent_loss / d
        if epoch % 100 == 0 or epoch == config.epochs:
            history.append((epoch, loss))
            logger.debug("epoch %d loss %.3e", epoch, loss)

        flat = [g for pair in grads for g in pair]
        b1, b2 = config.beta1, config.beta2
        lr_t = config.learning_rate * np.sqrt(1 - b2**epoch) / (1 - b1**epoch)
        for p, g, a, v in zip(params, flat, m1, m2):
            a *= b1
            a += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= lr_t * a / (np.sqrt(v) + config.adam_eps)

    # final losses on the full data set
    x_hat = _forward(dec, _forward(enc, X))
    recon = float(np.mean((x_hat - X) ** 2))
    pair = MlpPair(enc, dec, image_shape)
    report = TrainReport(recon_mse=recon, latent_mse=latent, loss=float(loss), epochs=config.epochs, history=history)
    logger.info("trained MLP pair: recon MSE %.3e, latent MSE %.3e", recon, latent)
    return pair, report


# ---------------------------------------------------------------- assumptions


@dataclass
class AssumptionReport:
    a1_residual: float
    a2_sigma_min: float
    a3_collision_gap: float
    pass_a1: bool
    pass_a2: bool
    pass_a3: bool
    a3_heuristic: bool = True
    tolerances: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return self.pass_a1 and self.pass_a2 and self.pass_a3

    def lines(self) -> list[str]:
        flag = lambda ok: "pass" if ok else "FAIL"  # noqa: E731
        return [
            f"A1 max ||E(D(z)) - z||      = {self.a1_residual:.3e}  [{flag(self.pass_a1)}]",
            f"A2 min sigma_min(J_D(z))     = {self.a2_sigma_min:.3e}  [{flag(self.pass_a2)}]",
            f"A3 min collision gap (heuristic) = {self.a3_collision_gap:.3e}  [{flag(self.pass_a3)}]",
        ]


def check_assumptions(
    model: AutoencoderPair,
    prior: LatentPrior,
    n_samples: int = 256,
    seed: int = 0,
    a1_tol: float = 1e-3,
    a2_tol: float = 1e-8,
    a3_tol: float = 1e-8,
) -> AssumptionReport:
    """Sample the prior and measure A1 (left inverse), A2 (rank) and A3.

    A3 is only probed: the smallest ratio ``||D(z1) - D(z2)|| / ||z1 - z2||``
    over consecutive sample pairs and over tiny local displacements.
    """
    if n_samples < 2:
        raise ValueError("check_assumptions needs at least two samples")
    rng = np.random.default_rng(seed)
    Z = prior.sample(rng, n_samples)
    X = model.decode_flat(Z)
    a1 = float(np.max(np.linalg.norm(model.encode_flat(X) - Z, axis=1)))
    a2 = min(float(svd(model.decoder_jacobian(z))[1][-1]) for z in Z)
    ratios = []
    dz = np.linalg.norm(Z[1:] - Z[:-1], axis=1)
    dx = np.linalg.norm(X[1:] - X[:-1], axis=1)
    ratios.extend(dx[dz > 0] / dz[dz > 0])
    step = 1e-4
    local = rng.standard_normal(Z.shape)
    local *= step / np.linalg.norm(local, axis=1, keepdims=True)
    dxl = np.linalg.norm(model.decode_flat(Z + local) - X, axis=1)
    ratios.extend(dxl / step)
    a3 = float(np.min(ratios))
    return AssumptionReport(
        a1_residual=a1,
        a2_sigma_min=a2,
        a3_collision_gap=a3,
        pass_a1=a1 <= a1_tol,
        pass_a2=a2 > a2_tol,
        pass_a3=a3 > a3_tol,
        tolerances={"a1": a1_tol, "a2": a2_tol, "a3": a3_tol},
    )


# ---------------------------------------------------------------- serialization

_MAGIC = b"RGAE"
_VERSION = 1
_KIND_CODES = {"linear": 0, "mlp": 1}
_ACT_CODES = {name: i for i, name in enumerate(ACTIVATIONS)}


def _pack_array(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def model_to_bytes(model: AutoencoderPair) -> bytes:
    h, w, c = model.image_shape
    out = [_MAGIC, struct.pack("<HB", _VERSION, _KIND_CODES[model.kind]),
           struct.pack("<IIII", h, w, c, model.latent_dim)]
    if isinstance(model, LinearPair):
        for a in (model.A, model.b, model.M, model.c):
            out.append(_pack_array(a))
    else:
        out.append(struct.pack("<II", len(model.encoder_layers), len(model.decoder_layers)))
        for layer in model.encoder_layers + model.decoder_layers:
            out.append(struct.pack("<IIB", layer.n_out, layer.n_in, _ACT_CODES[layer.activation]))
            out.append(_pack_array(layer.weight))
            out.append(_pack_array(layer.bias))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError(f"truncated model file at byte {self.pos} (needed {n} more bytes)")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, *shape: int) -> np.ndarray:
        count = int(np.prod(shape))
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64).reshape(shape)


def model_from_bytes(data: bytes) -> AutoencoderPair:
    r = _Reader(data)
    if r.take(4) != _MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version, kind = r.unpack("<HB")
    if version != _VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    h, w, c, d = r.unpack("<IIII")
    n = h * w * c
    if kind == _KIND_CODES["linear"]:
        A = r.array(n, d)
        b = r.array(n)
        M = r.array(d, n)
        cc = r.array(d)
        model = LinearPair(A, b, M, cc, (h, w, c), check_inverse=False)
    elif kind == _KIND_CODES["mlp"]:
        n_enc, n_dec = r.unpack("<II")
        layers = []
        acts = {v: k for k, v in _ACT_CODES.items()}
        for _ in range(n_enc + n_dec):
            rows, cols, act = r.unpack("<IIB")
            if act not in acts:
                raise ModelFormatError(f"unknown activation code {act}")
            layers.append(Layer(r.array(rows, cols), r.array(rows), acts[act]))
        model = MlpPair(layers[:n_enc], layers[n_enc:], (h, w, c))
    else:
        raise ModelFormatError(f"unknown model kind code {kind}")
    if r.pos != len(data):
        raise ModelFormatError(f"{len(data) - r.pos} trailing bytes after model payload")
    return model


def save_model(model: AutoencoderPair, path) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path) -> AutoencoderPair:
    return model_from_bytes(Path(path).read_bytes())
