"""Square-QAM bit mapping with per-axis Gray labels.

Levels on each axis are the odd integers -(sqrt(M)-1) .. +(sqrt(M)-1).
The first half of each bit group selects the real level, the second half the
imaginary level. The all-zeros group maps to the most positive level, e.g.
4-QAM: 00 -> 1+1j, and 16-QAM: 0000 -> 3+3j.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_SUPPORTED = (4, 16, 64)


def _gray(i: np.ndarray | int):
    return i ^ (i >> 1)


@lru_cache(maxsize=None)
def _axis_tables(levels_per_axis: int):
    """(bits->level, level_rank->bits) lookup tables for one axis."""
    pos = np.arange(levels_per_axis)
    level_of_pos = (levels_per_axis - 1) - 2 * pos  # descending: +L-1 .. -L+1
    bits_of_pos = _gray(pos)
    level_by_bits = np.empty(levels_per_axis, dtype=np.int64)
    level_by_bits[bits_of_pos] = level_of_pos
    # rank r = (L-1-level)/2 indexes levels from the top
    bits_by_rank = bits_of_pos.copy()
    return level_by_bits, bits_by_rank


@dataclass(frozen=True)
class Constellation:
    order: int

    def __post_init__(self):
        if self.order not in _SUPPORTED:
            raise ValueError(f"unsupported QAM order {self.order}; pick one of {_SUPPORTED}")

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    @property
    def levels_per_axis(self) -> int:
        return int(np.sqrt(self.order))

    @property
    def axis_levels(self) -> np.ndarray:
        L = self.levels_per_axis
        return np.arange(-(L - 1), L, 2)

    def points(self) -> np.ndarray:
        """All order constellation points, indexed by their bit label."""
        n = self.bits_per_symbol
        labels = np.arange(self.order)
        half = n // 2
        re_bits = labels >> half
        im_bits = labels & ((1 << half) - 1)
        level_by_bits, _ = _axis_tables(self.levels_per_axis)
        return level_by_bits[re_bits] + 1j * level_by_bits[im_bits]


def energy(c: Constellation) -> float:
    """Mean symbol energy 2(M-1)/3 of the unit-spaced square constellation."""
    if c.bits_per_symbol % 2 != 0:
        raise ValueError("square QAM requires an even number of bits per symbol")
    return 2.0 * (c.order - 1) / 3.0


def map_bits(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Map a flat 0/1 array to complex symbols, log2(order) bits per symbol."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    n = c.bits_per_symbol
    if bits.size % n != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {n}")
    groups = bits.reshape(-1, n)
    weights = 1 << np.arange(n - 1, -1, -1)
    labels = groups @ weights
    half = n // 2
    level_by_bits, _ = _axis_tables(c.levels_per_axis)
    re = level_by_bits[labels >> half]
    im = level_by_bits[labels & ((1 << half) - 1)]
    return re + 1j * im


def _axis_demap(values: np.ndarray, c: Constellation) -> np.ndarray:
    """Nearest axis level -> per-axis bit integers (saturating at the edges)."""
    L = c.levels_per_axis
    rank = np.round(((L - 1) - values) / 2.0).astype(np.int64)
    np.clip(rank, 0, L - 1, out=rank)
    _, bits_by_rank = _axis_tables(L)
    return bits_by_rank[rank]


def demap(symbols: np.ndarray, c: Constellation) -> np.ndarray:
    """Hard decision: per-axis nearest level, then the Gray bit label."""
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    n = c.bits_per_symbol
    half = n // 2
    re_bits = _axis_demap(symbols.real, c)
    im_bits = _axis_demap(symbols.imag, c)
    labels = (re_bits << half) | im_bits
    out = ((labels[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int8)
    return out.ravel()
