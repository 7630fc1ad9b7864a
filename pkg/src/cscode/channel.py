"""OOK modulation, AWGN noise, SNR bookkeeping, and soft/hard detection.

Bits map to signal levels {0, 1}.  Balanced codewords carry an average symbol
energy of 0.5, which fixes the SNR-to-sigma conversions below.  The dB axis
can be read as Eb/N0 (default, includes the code rate) or Es/N0; both are
exposed because decoder-to-decoder gaps, not absolute positions, are the
quantity of interest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_positive_float, ensure_rng

__all__ = [
    "SNR_CONVENTIONS",
    "OOK_MEAN_SYMBOL_ENERGY",
    "ChannelModel",
    "snr_to_sigma",
    "modulate_ook",
    "add_noise",
    "llr",
    "hard_decision",
]

SNR_CONVENTIONS = ("ebn0", "esn0")

# Levels {0, 1} with equiprobable bits: E[s^2] = 0.5.
OOK_MEAN_SYMBOL_ENERGY = 0.5


def snr_to_sigma(snr_db: float, convention: str = "ebn0", rate: float = 2.0 / 3.0) -> float:
    """Noise standard deviation per real sample for the given SNR in dB.

    ebn0:  sigma^2 = (Es/rate) / (2 * 10^(snr/10))
    esn0:  sigma^2 = Es / (2 * 10^(snr/10))
    """
    snr_db = float(snr_db)
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    if convention not in SNR_CONVENTIONS:
        raise ValueError(f"unknown SNR convention {convention!r}; choose from {SNR_CONVENTIONS}")
    ratio = 10.0 ** (snr_db / 10.0)
    energy = OOK_MEAN_SYMBOL_ENERGY
    if convention == "ebn0":
        check_positive_float(rate, "rate")
        energy = energy / rate
    return float(np.sqrt(energy / (2.0 * ratio)))


def modulate_ook(bits) -> np.ndarray:
    """Bit 1 -> level 1.0, bit 0 -> level 0.0."""
    arr = np.asarray(bits)
    return arr.astype(np.float64)


def add_noise(samples, sigma: float, rng) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise; deterministic given the generator state."""
    check_positive_float(sigma, "sigma")
    samples = np.asarray(samples, dtype=np.float64)
    return samples + ensure_rng(rng).normal(0.0, sigma, size=samples.shape)


def llr(samples, sigma: float) -> np.ndarray:
    """Per-sample log-likelihood ratio ln p(r|1)/p(r|0) = (2r - 1) / (2 sigma^2)."""
    check_positive_float(sigma, "sigma")
    samples = np.asarray(samples, dtype=np.float64)
    return (2.0 * samples - 1.0) / (2.0 * sigma * sigma)


def hard_decision(samples) -> np.ndarray:
    """Threshold at the midpoint of the two levels; ties go to 1."""
    samples = np.asarray(samples, dtype=np.float64)
    return (samples >= 0.5).astype(np.uint8)


@dataclass(frozen=True)
class ChannelModel:
    """SNR configuration bundled with the derived noise level.

    ``rate`` only enters the Eb/N0 conversion (it is the overall code rate,
    2/3 for any concatenation of 4B6B frames).
    """

    snr_db: float
    convention: str = "ebn0"
    rate: float = 2.0 / 3.0

    def __post_init__(self):
        # computing sigma validates every field
        self.sigma  # noqa: B018

    @property
    def sigma(self) -> float:
        return snr_to_sigma(self.snr_db, self.convention, self.rate)

    @property
    def sigma2(self) -> float:
        return self.sigma**2

    def transmit(self, bits, rng) -> np.ndarray:
        """Modulate and corrupt a bit array in one step."""
        return add_noise(modulate_ook(bits), self.sigma, rng)

    def llr(self, samples) -> np.ndarray:
        return llr(samples, self.sigma)
