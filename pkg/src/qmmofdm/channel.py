"""Frequency-domain Rayleigh fading with AWGN, y = sqrt(Es) * s * h + n.

Randomness comes from numpy ``Generator`` objects on the PCG64 bit
generator. :func:`substream` derives independent, reproducible streams from
a master seed plus integer tags (SNR index, batch index, purpose), so a
Monte Carlo run does not depend on how batches are spread over workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, LengthMismatch

# purpose tags for substream()
BITS, CHANNEL, NOISE = 0, 1, 2


def substream(seed: int, *tags: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *tags])))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian samples with E|x|^2 = variance."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    z = rng.standard_normal((*shape, 2))
    return np.sqrt(variance / 2) * (z[..., 0] + 1j * z[..., 1])


@dataclass(frozen=True)
class NoiseParams:
    es: float
    n0: float

    def __post_init__(self):
        if not (self.es > 0 and self.n0 > 0):
            raise ConfigurationError("Es and N0 must both be positive")

    @classmethod
    def from_snr_db(cls, snr_db: float, es: float = 1.0) -> NoiseParams:
        return cls(es, es * 10 ** (-snr_db / 10))

    @property
    def es_over_n0(self) -> float:
        return self.es / self.n0

    @property
    def snr_db(self) -> float:
        return 10 * np.log10(self.es_over_n0)


def draw_channel(n_subcarriers, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. CN(0, 1) coefficients; ``n_subcarriers`` may be an int or a shape."""
    shape = (n_subcarriers,) if np.isscalar(n_subcarriers) else tuple(n_subcarriers)
    if any(int(s) < 1 for s in shape):
        raise ConfigurationError("need at least one subcarrier")
    return complex_normal(rng, shape)


def apply_channel(s, h, noise: NoiseParams, rng: np.random.Generator) -> np.ndarray:
    s = np.asarray(s)
    h = np.asarray(h)
    if s.shape != h.shape:
        raise LengthMismatch(f"symbol shape {s.shape} != channel shape {h.shape}")
    n = complex_normal(rng, s.shape, noise.n0)
    return np.sqrt(noise.es) * s * h + n
