"""Rayleigh block-fading MIMO channel with log-distance large-scale gain.

The received vector is y = sqrt(G) H x + n where H is Frobenius-normalized
per realization (||H||_F^2 = N_r * N_t exactly) and n has i.i.d. zero-mean
complex normal entries of total variance sigma2 each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 2.99792458e8  # m/s
REFERENCE_DISTANCE_M = 1.0


@dataclass(frozen=True)
class LinkGeometry:
    """Large-scale link parameters: carrier, distance, loss exponent, bandwidth."""

    f_c: float          # carrier frequency [Hz]
    d: float            # BS-UE distance [m]
    eta: float          # path loss exponent
    B: float            # channel bandwidth [Hz]
    N0: float = 0.0     # noise power density [W/Hz]

    def __post_init__(self):
        if self.f_c <= 0:
            raise ValueError(f"f_c must be positive, got {self.f_c}")
        if self.d < REFERENCE_DISTANCE_M:
            raise ValueError(f"d must be at least {REFERENCE_DISTANCE_M} m, got {self.d}")
        if self.eta < 2:
            raise ValueError(f"eta must be at least 2, got {self.eta}")
        if self.B <= 0:
            raise ValueError(f"B must be positive, got {self.B}")
        if self.N0 < 0:
            raise ValueError(f"N0 must be nonnegative, got {self.N0}")


@dataclass(frozen=True)
class ChannelRealization:
    """One trial's channel: small-scale H, large-scale gain G, noise power."""

    H: np.ndarray
    G: float
    sigma2: float
    N_r: int
    N_t: int

    def __post_init__(self):
        if self.H.shape != (self.N_r, self.N_t):
            raise ValueError(f"H has shape {self.H.shape}, expected ({self.N_r}, {self.N_t})")
        if self.G <= 0:
            raise ValueError(f"G must be positive, got {self.G}")
        if self.sigma2 < 0:
            raise ValueError(f"sigma2 must be nonnegative, got {self.sigma2}")

    @classmethod
    def from_matrix(cls, H: np.ndarray, G: float, sigma2: float) -> "ChannelRealization":
        n_rx, n_tx = H.shape
        return cls(H=H, G=G, sigma2=sigma2, N_r=n_rx, N_t=n_tx)


def large_scale_gain(geometry: LinkGeometry) -> float:
    """Linear power gain: free-space loss at 1 m, then a d^-eta roll-off.

    G = (c / (4 pi f_c d_ref))^2 * (d_ref / d)^eta with d_ref = 1 m;
    reduces to plain free-space path loss for eta = 2.
    """
    if geometry.d < REFERENCE_DISTANCE_M:
        raise ValueError(f"d must be at least {REFERENCE_DISTANCE_M} m, got {geometry.d}")
    fspl_ref = (SPEED_OF_LIGHT / (4.0 * math.pi * geometry.f_c * REFERENCE_DISTANCE_M)) ** 2
    return fspl_ref * (REFERENCE_DISTANCE_M / geometry.d) ** geometry.eta


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. draws from the zero-mean unit-variance complex normal law."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_channel(n_rx: int, n_tx: int, rng: np.random.Generator) -> np.ndarray:
    """Rayleigh fading matrix rescaled so that ||H||_F^2 = n_rx * n_tx exactly."""
    if n_rx < 1 or n_tx < 1:
        raise ValueError(f"antenna counts must be >= 1, got ({n_rx}, {n_tx})")
    raw = complex_gaussian(rng, (n_rx, n_tx))
    return raw * (np.sqrt(n_rx * n_tx) / np.linalg.norm(raw))


def sample_noise(n_rx: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Length-n_rx complex noise vector, per-entry variance sigma2."""
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be nonnegative, got {sigma2}")
    if sigma2 == 0:
        return np.zeros(n_rx, dtype=complex)
    return np.sqrt(sigma2) * complex_gaussian(rng, n_rx)


def apply_channel(realization: ChannelRealization, x, rng: np.random.Generator) -> np.ndarray:
    """y = sqrt(G) H x + n with a fresh noise draw per channel use.

    ``x`` is one column vector of length N_t or a batch of channel uses as
    an (N_t, n_uses) matrix; the output matches. Callers apply the
    1/sqrt(N_t) transmit power scaling before calling.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim not in (1, 2) or x.shape[0] != realization.N_t:
        raise ValueError(f"x has shape {x.shape}, expected ({realization.N_t},) or ({realization.N_t}, n)")
    noise_shape = (realization.N_r,) if x.ndim == 1 else (realization.N_r, x.shape[1])
    if realization.sigma2 == 0:
        noise = np.zeros(noise_shape, dtype=complex)
    else:
        noise = np.sqrt(realization.sigma2) * complex_gaussian(rng, noise_shape)
    return np.sqrt(realization.G) * (realization.H @ x) + noise
