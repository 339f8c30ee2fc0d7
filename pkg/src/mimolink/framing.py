"""CRC framing: payload bit streams cut into CRC-protected transport blocks.

Block layout is [payload | zero padding | CRC]: the CRC covers the payload
only and always sits at the very end of the block. Block length is the
smallest multiple of k * N_t that fits payload plus CRC, so every block
fills whole channel uses at the configured transmission rank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class FramingError(ValueError):
    """Received bits cannot be reconciled with the transport-block layout."""


@dataclass(frozen=True)
class CrcSpec:
    """Full CRC generator polynomial as a bit string, MSB first.

    ``"111"`` is x^2 + x + 1 and yields a 2-bit CRC. The leading and
    trailing coefficients must both be 1.
    """

    generator: str

    def __post_init__(self):
        if len(self.generator) < 2 or set(self.generator) - {"0", "1"}:
            raise ValueError(
                f"CRC generator must be a bit string of length >= 2, got {self.generator!r}"
            )
        if self.generator[0] != "1" or self.generator[-1] != "1":
            raise ValueError(
                f"CRC generator must have leading and trailing 1 bits, got {self.generator!r}"
            )

    @property
    def crc_length(self) -> int:
        return len(self.generator) - 1


@dataclass(frozen=True)
class TransportBlock:
    """One CRC-protected unit of payload bits sized for the symbol grid."""

    payload_bits: np.ndarray
    pad_bits: np.ndarray
    crc_bits: np.ndarray
    block_index: int
    total_bits: int
    symbols_per_block: int

    def bits(self) -> np.ndarray:
        """Assembled on-air bits: [payload | padding | CRC]."""
        return np.concatenate([self.payload_bits, self.pad_bits, self.crc_bits])


def load_payload_bits(path) -> np.ndarray:
    """Read a file as a bit stream, MSB first within each byte."""
    data = Path(path).read_bytes()
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def crc_compute(bits, spec: CrcSpec) -> np.ndarray:
    """Remainder of bits * x^r modulo the generator over GF(2).

    MSB-first long division with a zero-initialized register, no
    reflection and no final XOR. An empty message yields the all-zero CRC.
    """
    r = spec.crc_length
    poly = int(spec.generator, 2)
    top = 1 << r
    reg = 0
    for b in np.asarray(bits, dtype=np.uint8).ravel():
        reg = (reg << 1) | int(b)
        if reg & top:
            reg ^= poly
    for _ in range(r):
        reg <<= 1
        if reg & top:
            reg ^= poly
    return np.array([(reg >> i) & 1 for i in range(r - 1, -1, -1)], dtype=np.uint8)


def crc_verify(payload_bits, crc_bits, spec: CrcSpec) -> bool:
    """True iff the received CRC matches a fresh CRC over the payload."""
    crc_bits = np.asarray(crc_bits, dtype=np.uint8).ravel()
    if crc_bits.size != spec.crc_length:
        raise FramingError(f"expected {spec.crc_length} CRC bits, got {crc_bits.size}")
    return bool(np.array_equal(crc_compute(payload_bits, spec), crc_bits))


def block_total_bits(codeword_size: int, spec: CrcSpec, k: int, n_tx: int) -> int:
    """Smallest multiple of k * n_tx that fits the payload plus its CRC."""
    grid = k * n_tx
    return math.ceil((codeword_size + spec.crc_length) / grid) * grid


def build_transport_blocks(bits, codeword_size: int, spec: CrcSpec, k: int, n_tx: int) -> list[TransportBlock]:
    """Segment a bit stream into uniform CRC-protected transport blocks.

    The final partial codeword is zero-padded to ``codeword_size`` before
    its CRC is computed, so every block has the same on-air length.
    """
    if codeword_size < 1:
        raise ValueError(f"codeword_size must be >= 1, got {codeword_size}")
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size == 0:
        return []
    total = block_total_bits(codeword_size, spec, k, n_tx)
    n_pad = total - codeword_size - spec.crc_length
    blocks = []
    for index in range(math.ceil(bits.size / codeword_size)):
        chunk = bits[index * codeword_size:(index + 1) * codeword_size]
        if chunk.size < codeword_size:
            chunk = np.concatenate([chunk, np.zeros(codeword_size - chunk.size, dtype=np.uint8)])
        blocks.append(
            TransportBlock(
                payload_bits=chunk,
                pad_bits=np.zeros(n_pad, dtype=np.uint8),
                crc_bits=crc_compute(chunk, spec),
                block_index=index,
                total_bits=total,
                symbols_per_block=total // k,
            )
        )
    return blocks


def extract_and_check(received_bits, codeword_size: int, spec: CrcSpec, k: int, n_tx: int):
    """Invert the block layout and check the CRC.

    Returns ``(payload_bits, crc_ok)``. Padding is receiver-known filler
    and excluded from the check, so a corrupted pad bit alone still
    verifies.
    """
    received = np.asarray(received_bits, dtype=np.uint8).ravel()
    total = block_total_bits(codeword_size, spec, k, n_tx)
    if received.size != total:
        raise FramingError(f"expected {total} bits per block, got {received.size}")
    payload = received[:codeword_size]
    crc = received[total - spec.crc_length:]
    return payload, crc_verify(payload, crc, spec)
