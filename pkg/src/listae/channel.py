"""AWGN channel simulation and SNR / energy-per-bit bookkeeping.

SNR convention: snr_db = 10*log10(1/sigma^2) for unit-power code symbols,
so sigma = 10^(-snr_db/20). Rate-fair comparisons use
eb_db = snr_db - 10*log10(R).
"""

import math
from dataclasses import dataclass

import numpy as np


def snr_to_sigma(snr_db: float) -> float:
    """Noise standard deviation for a given SNR in dB (inf -> 0, noiseless)."""
    return float(10.0 ** (-snr_db / 20.0))


def ebsigma_from_snr(snr_db: float, rate: float) -> float:
    """Energy-per-information-bit SNR: snr_db - 10*log10(rate)."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    return float(snr_db - 10.0 * math.log10(rate))


@dataclass(frozen=True)
class ChannelSpec:
    """Memoryless AWGN channel at a fixed SNR."""

    snr_db: float
    kind: str = "awgn"

    def __post_init__(self):
        if self.kind != "awgn":
            raise ValueError(f"unsupported channel kind {self.kind!r}")

    @property
    def sigma(self) -> float:
        return snr_to_sigma(self.snr_db)


@dataclass(frozen=True)
class SNRRange:
    """Closed SNR interval in dB used for per-example training draws."""

    low_db: float
    high_db: float

    def __post_init__(self):
        if not self.low_db <= self.high_db:
            raise ValueError(f"need low_db <= high_db, got [{self.low_db}, {self.high_db}]")


def sample_training_snr(snr_range: SNRRange, rng: np.random.Generator) -> float:
    """One uniform SNR draw from the range (degenerate range returns its value)."""
    if snr_range.low_db == snr_range.high_db:
        return float(snr_range.low_db)
    return float(rng.uniform(snr_range.low_db, snr_range.high_db))


def sample_training_snrs(snr_range: SNRRange, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vector of n independent uniform SNR draws (one per noise vector)."""
    if snr_range.low_db == snr_range.high_db:
        return np.full(n, snr_range.low_db)
    return rng.uniform(snr_range.low_db, snr_range.high_db, size=n)


def awgn_noise(shape, sigma, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean Gaussian noise; sigma is a scalar or per-example (B,) vector."""
    noise = rng.standard_normal(size=shape)
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim == 0:
        return noise * float(sigma)
    if sigma.shape[0] != shape[0]:
        raise ValueError(f"per-example sigma length {sigma.shape[0]} != batch {shape[0]}")
    return noise * sigma.reshape((-1,) + (1,) * (len(shape) - 1))


def transmit(codeword: np.ndarray, spec: ChannelSpec, rng: np.random.Generator) -> np.ndarray:
    """Noisy channel output y = x + w, w iid Gaussian with std spec.sigma."""
    x = np.asarray(codeword, dtype=np.float64)
    if not np.isfinite(x).all():
        raise ValueError("codeword contains non-finite entries")
    return x + awgn_noise(x.shape, spec.sigma, rng)
