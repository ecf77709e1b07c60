"""Small dense denoising autoencoders, trained with Adam on reconstruction error.

One network per prototype acts as a local simulator of plausible feature
vectors near that prototype: d -> h (tanh) -> d, trained full-batch to map
noise-corrupted standardized inputs back to their clean versions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, TrainingError


@dataclass(frozen=True)
class AutoencoderConfig:
    hidden: int = 16
    noise_sigma: float = 0.1
    epochs: int = 500
    learning_rate: float = 0.01

    def __post_init__(self):
        if self.hidden < 1:
            raise TrainingError("autoencoder hidden width must be at least 1")
        if self.noise_sigma < 0:
            raise TrainingError("noise sigma must be nonnegative")
        if self.epochs < 1 or self.learning_rate <= 0:
            raise TrainingError("autoencoder epochs/learning rate must be positive")


@dataclass(frozen=True)
class DenoisingAutoencoder:
    """Fitted weights plus the hyperparameters they were trained under."""

    W1: np.ndarray  # (h, d)
    b1: np.ndarray  # (h,)
    W2: np.ndarray  # (d, h)
    b2: np.ndarray  # (d,)
    hidden: int
    noise_sigma: float
    epochs: int
    learning_rate: float
    seed: int

    def __post_init__(self):
        for name in ("W1", "b1", "W2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.isfinite(arr).all():
                raise TrainingError(f"autoencoder weight {name} contains non-finite values")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        d = self.W1.shape[1]
        if self.W1.shape != (self.hidden, d) or self.b1.shape != (self.hidden,) \
                or self.W2.shape != (d, self.hidden) or self.b2.shape != (d,):
            raise DimensionMismatchError("autoencoder weight shapes are inconsistent")

    @property
    def dim(self) -> int:
        return self.W1.shape[1]

    def encode(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        return np.tanh(z @ self.W1.T + self.b1)

    def decode(self, h: np.ndarray) -> np.ndarray:
        return np.asarray(h, dtype=np.float64) @ self.W2.T + self.b2

    def reconstruct(self, z: np.ndarray) -> np.ndarray:
        """decode(encode(z)); standardized space in, standardized space out."""
        return self.decode(self.encode(z))


def fit_autoencoder(X: np.ndarray, config: AutoencoderConfig = AutoencoderConfig(),
                    seed: int = 0) -> DenoisingAutoencoder:
    """Full-batch Adam on MSE between reconstructions of noisy inputs and clean inputs.

    Deterministic given (X, config, seed).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise TrainingError("autoencoder training set must be a non-empty 2-D matrix")
    n, d = X.shape
    h = config.hidden
    rng = np.random.default_rng(seed)

    def glorot(fan_out, fan_in):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_out, fan_in))

    params = [glorot(h, d), np.zeros(h), glorot(d, h), np.zeros(d)]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    for epoch in range(config.epochs):
        W1, b1, W2, b2 = params
        Xn = X + config.noise_sigma * rng.normal(size=X.shape) if config.noise_sigma > 0 else X
        A = Xn @ W1.T + b1
        H = np.tanh(A)
        Y = H @ W2.T + b2
        dY = 2.0 * (Y - X) / (n * d)
        gW2 = dY.T @ H
        gb2 = dY.sum(axis=0)
        dH = dY @ W2
        dA = dH * (1.0 - H * H)
        gW1 = dA.T @ Xn
        gb1 = dA.sum(axis=0)
        grads = [gW1, gb1, gW2, gb2]
        t = epoch + 1
        for i, g in enumerate(grads):
            m[i] = beta1 * m[i] + (1 - beta1) * g
            v[i] = beta2 * v[i] + (1 - beta2) * (g * g)
            m_hat = m[i] / (1 - beta1 ** t)
            v_hat = v[i] / (1 - beta2 ** t)
            params[i] = params[i] - config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)

    return DenoisingAutoencoder(W1=params[0], b1=params[1], W2=params[2], b2=params[3],
                                hidden=h, noise_sigma=config.noise_sigma,
                                epochs=config.epochs, learning_rate=config.learning_rate,
                                seed=seed)
