"""Linear Gaussian beta-VAE with hand-derived reparameterization gradients.

Encoder ``q(z | x) = N(W_mu x + b_mu, diag exp(W_lv x + b_lv))``; decoder
``p(x | z) = N(W_dec z + b_dec, I)``; prior ``N(0, I)``. The objective per
observation is ``E_q[log p(x | z)] - beta * KL(q || prior)`` with the
expectation replaced by ``n_samples`` reparameterized draws.

Flat parameter order: ``W_mu, b_mu, W_lv, b_lv, W_dec, b_dec`` (row-major).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import OutOfRange, ShapeMismatch
from ..rng import as_generator

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True, eq=False)
class GaussianVae:
    w_mu: np.ndarray
    b_mu: np.ndarray
    w_lv: np.ndarray
    b_lv: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        latent, obs = np.shape(self.w_mu)
        shapes = {
            "w_mu": (latent, obs), "b_mu": (latent,), "w_lv": (latent, obs),
            "b_lv": (latent,), "w_dec": (obs, latent), "b_dec": (obs,),
        }
        for name, shape in shapes.items():
            arr = np.array(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise ShapeMismatch(f"{name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, arr)
        if latent < 1:
            raise OutOfRange("latent dimension must be at least 1")
        if self.beta < 1.0:
            raise OutOfRange(f"beta {self.beta} < 1")

    @property
    def latent_dim(self) -> int:
        return self.w_mu.shape[0]

    @property
    def obs_dim(self) -> int:
        return self.w_mu.shape[1]

    @classmethod
    def init(cls, obs_dim: int, latent_dim: int, beta: float = 1.0, seed=0, scale: float = 0.1):
        if latent_dim < 1 or obs_dim < 1:
            raise OutOfRange("dimensions must be at least 1")
        rng = as_generator(seed)
        n = 2 * latent_dim * obs_dim + obs_dim * latent_dim
        w = scale * rng.standard_normal(n)
        a, b = latent_dim * obs_dim, 2 * latent_dim * obs_dim
        return cls(
            w[:a].reshape(latent_dim, obs_dim), np.zeros(latent_dim),
            w[a:b].reshape(latent_dim, obs_dim), np.zeros(latent_dim),
            w[b:].reshape(obs_dim, latent_dim), np.zeros(obs_dim), beta,
        )

    def params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in
                               (self.w_mu, self.b_mu, self.w_lv, self.b_lv, self.w_dec, self.b_dec)])

    def with_params(self, flat) -> "GaussianVae":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.n_params,):
            raise ShapeMismatch(f"expected {self.n_params} parameters, got {flat.shape}")
        out, pos = [], 0
        for p in (self.w_mu, self.b_mu, self.w_lv, self.b_lv, self.w_dec, self.b_dec):
            out.append(flat[pos:pos + p.size].reshape(p.shape))
            pos += p.size
        return replace(self, w_mu=out[0], b_mu=out[1], w_lv=out[2], b_lv=out[3],
                       w_dec=out[4], b_dec=out[5])

    @property
    def n_params(self) -> int:
        return 2 * self.latent_dim * self.obs_dim + 2 * self.latent_dim + \
            self.obs_dim * self.latent_dim + self.obs_dim

    def encode(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Posterior means and log-variances; ``x`` is ``(obs_dim,)`` or ``(n, obs_dim)``."""
        x = np.asarray(x, dtype=np.float64)
        return x @ self.w_mu.T + self.b_mu, x @ self.w_lv.T + self.b_lv

    def to_dict(self) -> dict:
        return {"beta": self.beta, "latent_dim": self.latent_dim, "obs_dim": self.obs_dim,
                "params": self.params().tolist()}

    @classmethod
    def from_dict(cls, d) -> "GaussianVae":
        shell = cls.init(int(d["obs_dim"]), int(d["latent_dim"]), float(d["beta"]))
        return shell.with_params(d["params"])


def _batch(vae: GaussianVae, batch) -> np.ndarray:
    x = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    if x.shape[0] == 0:
        raise ShapeMismatch("empty batch")
    if x.shape[1] != vae.obs_dim:
        raise ShapeMismatch(f"observation length {x.shape[1]}, model expects {vae.obs_dim}")
    return x


def _noise(vae, n_obs, n_samples, seed) -> np.ndarray:
    if n_samples < 1:
        raise OutOfRange("n_samples must be at least 1")
    rng = as_generator(seed)
    return rng.standard_normal(n_obs * n_samples * vae.latent_dim).reshape(
        n_obs, n_samples, vae.latent_dim)


def kl_term(mu, logvar) -> np.ndarray:
    """``KL(N(mu, exp(logvar)) || N(0, I))`` summed over the last axis."""
    return 0.5 * np.sum(mu**2 + np.exp(logvar) - logvar - 1.0, axis=-1)


def elbo_terms(vae: GaussianVae, batch, seed, n_samples: int = 1) -> tuple[float, float]:
    """Batch means of the reconstruction log-likelihood and of the KL term."""
    x = _batch(vae, batch)
    eps = _noise(vae, len(x), n_samples, seed)
    mu, lv = vae.encode(x)
    z = mu[:, None, :] + np.exp(0.5 * lv)[:, None, :] * eps
    resid = x[:, None, :] - (z @ vae.w_dec.T + vae.b_dec)
    loglik = -0.5 * np.sum(resid**2, axis=-1) - 0.5 * vae.obs_dim * LOG_2PI
    return float(loglik.mean()), float(kl_term(mu, lv).mean())


def mean_elbo(vae: GaussianVae, batch, seed, n_samples: int = 1) -> float:
    recon, kl = elbo_terms(vae, batch, seed, n_samples)
    return recon - vae.beta * kl


def elbo(vae: GaussianVae, x, n_samples: int, seed) -> float:
    """Monte-Carlo ELBO of a single observation."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeMismatch("elbo takes a single observation vector")
    return mean_elbo(vae, x[None, :], seed, n_samples)


def vae_gradient(vae: GaussianVae, batch, seed, n_samples: int = 1) -> np.ndarray:
    """Gradient of :func:`mean_elbo` (same seed, same draws) in flat order."""
    x = _batch(vae, batch)
    n, k = len(x), n_samples
    eps = _noise(vae, n, k, seed)
    mu, lv = vae.encode(x)
    sigma = np.exp(0.5 * lv)
    z = mu[:, None, :] + sigma[:, None, :] * eps                  # (n, k, L)
    resid = x[:, None, :] - (z @ vae.w_dec.T + vae.b_dec)         # (n, k, D)
    scale = 1.0 / (n * k)
    g_wdec = scale * np.einsum("nkd,nkl->dl", resid, z)
    g_bdec = scale * resid.sum(axis=(0, 1))
    dz = resid @ vae.w_dec                                        # (n, k, L)
    d_mu = dz.sum(1) / k - vae.beta * mu                          # (n, L)
    d_lv = (dz * eps).sum(1) / k * 0.5 * sigma - vae.beta * 0.5 * (sigma**2 - 1.0)
    g_wmu, g_bmu = d_mu.T @ x / n, d_mu.mean(0)
    g_wlv, g_blv = d_lv.T @ x / n, d_lv.mean(0)
    return np.concatenate([g.ravel() for g in (g_wmu, g_bmu, g_wlv, g_blv, g_wdec, g_bdec)])


@dataclass(frozen=True)
class VaeConfig:
    latent_dim: int = 4
    beta: float = 4.0
    steps: int = 2000
    step_size: float = 0.001
    n_samples: int = 1
    seed: int = 0
    eval_samples: int = 64


def train_encoder(dataset, config: VaeConfig = VaeConfig()) -> tuple[GaussianVae, float]:
    """Full-batch gradient ascent on the mean ELBO; returns the model and a
    final ``eval_samples``-draw ELBO estimate."""
    x = np.atleast_2d(np.asarray(dataset, dtype=np.float64))
    if x.size == 0:
        raise ShapeMismatch("empty dataset")
    if config.latent_dim < 1:
        raise OutOfRange("latent dimension must be at least 1")
    rng = as_generator(config.seed)
    vae = GaussianVae.init(x.shape[1], config.latent_dim, config.beta, rng.spawn())
    theta = vae.params()
    for _ in range(config.steps):
        theta = theta + config.step_size * vae_gradient(vae, x, rng, config.n_samples)
        vae = vae.with_params(theta)
    return vae, mean_elbo(vae, x, rng, config.eval_samples)
