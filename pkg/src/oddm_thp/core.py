"""Frame geometry, vectorization conventions, and seeded RNG streams.

Grids are M x N (delay-major): element (m, k) of a delay-Doppler frame sits
at vector index m + k*M. All indices are 0-based.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridConfig:
    """Frame geometry: M delay bins x N Doppler bins at subcarrier spacing delta_f."""

    m_delay: int
    n_doppler: int
    delta_f: float = 15e3
    cp_len: int = 0
    fc: float = 6e9
    t_sym: float = field(default=0.0)

    def __post_init__(self):
        if self.m_delay < 2 or self.n_doppler < 2:
            raise ValueError("grid needs m_delay >= 2 and n_doppler >= 2")
        if self.delta_f <= 0:
            raise ValueError("delta_f must be positive")
        if self.cp_len < 0:
            raise ValueError("cp_len must be non-negative")
        if self.t_sym == 0.0:
            object.__setattr__(self, "t_sym", 1.0 / self.delta_f)
        elif abs(self.t_sym * self.delta_f - 1.0) > 1e-12:
            raise ValueError("t_sym * delta_f must equal 1")

    @property
    def nm(self) -> int:
        return self.m_delay * self.n_doppler

    @property
    def sample_period(self) -> float:
        """Delay-bin duration T/M in seconds."""
        return self.t_sym / self.m_delay

    @property
    def doppler_resolution(self) -> float:
        """Doppler-bin width 1/(N*T) in Hz."""
        return 1.0 / (self.n_doppler * self.t_sym)


PREFIX_NONE = "plain"
PREFIX_CYCLIC = "cyclic-prefixed"
PREFIX_ZERO = "zero-prefixed"


@dataclass
class TimeSequence:
    """Length-NM complex sequence, optionally carrying a prefix of cp_len samples.

    ``samples`` holds prefix + body; ``body`` strips the prefix. Prefix samples
    correspond to time indices -cp_len .. -1.
    """

    samples: np.ndarray
    kind: str = PREFIX_NONE
    prefix_len: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1:
            raise ValueError("time sequence must be 1-D")
        if self.kind == PREFIX_NONE and self.prefix_len != 0:
            raise ValueError("plain sequence cannot carry a prefix")
        if self.kind != PREFIX_NONE and self.prefix_len <= 0:
            raise ValueError("prefixed sequence needs prefix_len > 0")

    @property
    def body(self) -> np.ndarray:
        return self.samples[self.prefix_len:]

    def __len__(self) -> int:
        return self.samples.size


def vectorize(frame: np.ndarray) -> np.ndarray:
    """Flatten an M x N DD frame so that out[m + k*M] = frame[m, k]."""
    frame = np.asarray(frame)
    if frame.ndim != 2:
        raise ValueError("DD frame must be 2-D (delay x Doppler)")
    return frame.flatten(order="F")


def devectorize(vec: np.ndarray, m_delay: int, n_doppler: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    vec = np.asarray(vec)
    if vec.size != m_delay * n_doppler:
        raise ValueError("vector length does not match grid")
    return vec.reshape((m_delay, n_doppler), order="F")


def _purpose_word(purpose: str) -> int:
    # stable across processes and interpreter runs (never the builtin hash)
    digest = hashlib.blake2s(purpose.encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class SeedPlan:
    """Counter-based stream derivation: one independent RNG per (frame, purpose).

    The same (master_seed, frame_index, purpose) always yields the same stream,
    no matter in which order or in which process streams are created.
    """

    master_seed: int

    def stream(self, frame_index: int, purpose: str) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.master_seed,
            spawn_key=(frame_index, _purpose_word(purpose)),
        )
        return np.random.default_rng(seq)
