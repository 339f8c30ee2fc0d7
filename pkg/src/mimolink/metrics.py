"""Radio-link and classification performance measures.

The transmit-side SNR and Eb/N0 are dimensionless ratios in dB under the
unit-power normalization (per-symbol transmit power 1/N_t): logs are base
10 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RadioMeasures:
    """Per-trial radio measures for one channel realization."""

    error_vector: np.ndarray
    estimation_mse: float
    tx_snr_db: float
    tx_ebn0_db: float
    bler: float
    ser: float
    ber: float


def error_vector(H: np.ndarray, H_hat: np.ndarray) -> np.ndarray:
    """e = vec(H) - vec(H_hat), column-major vectorization."""
    H = np.asarray(H)
    H_hat = np.asarray(H_hat)
    if H.shape != H_hat.shape:
        raise ValueError(f"shape mismatch: {H.shape} vs {H_hat.shape}")
    return H.flatten(order="F") - H_hat.flatten(order="F")


def estimation_mse(e: np.ndarray, n_rx: int, n_tx: int) -> float:
    """Squared Euclidean norm of e divided by the element count N_r * N_t."""
    e = np.asarray(e).ravel()
    if e.size != n_rx * n_tx:
        raise ValueError(f"error vector has {e.size} entries, expected {n_rx * n_tx}")
    return float(np.sum(np.abs(e) ** 2) / (n_rx * n_tx))


def tx_snr_db(sigma2: float, n_tx: int) -> float:
    """Transmit-side SNR: -10 log10(sigma2 * N_t)."""
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    return -10.0 * np.log10(sigma2 * n_tx)


def tx_ebn0_db(sigma2: float, n_tx: int, k: int) -> float:
    """Transmit-side Eb/N0: -10 log10(k * sigma2 * N_t)."""
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return -10.0 * np.log10(k * sigma2 * n_tx)


def bler(crc_ok_flags) -> float:
    """Fraction of blocks whose CRC check failed."""
    flags = np.asarray(crc_ok_flags, dtype=bool).ravel()
    if flags.size == 0:
        raise ValueError("BLER is undefined over zero blocks")
    return float(np.count_nonzero(~flags) / flags.size)


def _mismatch_rate(a, b) -> float:
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("rate is undefined over empty sequences")
    return float(np.count_nonzero(a != b) / a.size)


def ser(tx_indices, rx_indices) -> float:
    """Symbol error rate: fraction of detected indices that differ."""
    return _mismatch_rate(tx_indices, rx_indices)


def ber(tx_bits, rx_bits) -> float:
    """Bit error rate over aligned bit sequences."""
    return _mismatch_rate(tx_bits, rx_bits)


def classification_error(y_true, y_pred) -> float:
    """Mean of the indicator [y_true != y_pred]; accuracy is its complement."""
    return _mismatch_rate(y_true, y_pred)
