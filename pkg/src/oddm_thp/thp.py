"""Time-domain Tomlinson-Harashima precoding and its receiver.

The precoder cancels all echo taps sample by sample and wraps the result
with modulus K = 2*alpha*sqrt(order); the receiver undoes the wraps with
modulus K_r = |h_1| K after derotating the direct tap, leaving a channel
that a per-symbol division by |h_1| equalizes.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import GridConfig, TimeSequence, PREFIX_NONE, PREFIX_ZERO, devectorize, vectorize
from .channel import ChannelRealization, H1_MAGNITUDE_FLOOR, apply_channel
from .kernels import precode_kernel
from .modem import oddm_demodulate, oddm_modulate
from .qam import Constellation, demap, map_bits


@dataclass(frozen=True)
class ThpConfig:
    order: int
    alpha: float
    collect_diagnostics: bool = False

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @property
    def modulus(self) -> float:
        return 2.0 * self.alpha * np.sqrt(self.order)

    @property
    def precoded_power(self) -> float:
        """K^2/6, the mean power under the uniform-wrap approximation."""
        return self.modulus**2 / 6.0


@dataclass
class WrapRecord:
    """Per-sample wrap counts, plus interference sequences when diagnostics are on."""

    p: np.ndarray
    q: np.ndarray
    i_t: Optional[np.ndarray] = None
    i_dd: Optional[np.ndarray] = None
    cancel_macs: int = 0

    @property
    def wrap_count(self) -> int:
        return int(np.count_nonzero((self.p != 0) | (self.q != 0)))

    @property
    def wrap_rate(self) -> float:
        return self.wrap_count / self.p.size


def mod_k(x, k_mod: float):
    """Complex modulo: wrap both components into [-K/2, K/2).

    Returns (wrapped, p, q) with x == wrapped + p*K + 1j*q*K exactly; the
    boundary +K/2 maps to -K/2 (floor convention).
    """
    if k_mod <= 0:
        raise ValueError("modulus must be positive")
    x = np.asarray(x, dtype=np.complex128)
    p = np.floor(x.real / k_mod + 0.5)
    q = np.floor(x.imag / k_mod + 0.5)
    wrapped = (x.real - p * k_mod) + 1j * (x.imag - q * k_mod)
    return wrapped, p.astype(np.int64), q.astype(np.int64)


def shifted_tap_gains(ch: ChannelRealization, grid: GridConfig) -> np.ndarray:
    """h_shift[p, m] = h_p e^{j 2 pi nu_p (m - l_p) T / M} for m = 0..NM-1.

    Row p is tap p's time-varying gain evaluated when its echo arriving at
    sample m left the transmitter; row 0 is the direct tap's gain at m.
    """
    m = np.arange(grid.nm)
    rows = [
        tap.gain * np.exp(2j * np.pi * tap.doppler_idx * (m - tap.delay_idx) / grid.nm)
        for tap in ch.taps
    ]
    return np.asarray(rows, dtype=np.complex128)


def precode(x: TimeSequence, ch: ChannelRealization, cfg: ThpConfig,
            grid: GridConfig) -> tuple[TimeSequence, WrapRecord]:
    """Successive ISI pre-cancellation followed by the modulo wrap.

    Runs the feedback recursion over the whole frame; the zero prefix of the
    returned sequence feeds the channel's memory at the frame start.
    """
    if x.kind != PREFIX_NONE or len(x) != grid.nm:
        raise ValueError("precode expects a plain NM-sample sequence")
    if grid.cp_len < ch.max_delay_idx:
        raise ValueError("cp_len shorter than the channel's maximum delay")
    h1 = ch.taps[0].gain
    if abs(h1) < H1_MAGNITUDE_FLOOR:
        raise ValueError("first tap below the magnitude floor; redraw the channel")
    delays = np.asarray([t.delay_idx for t in ch.taps], dtype=np.int64)
    if np.any(np.diff(delays) <= 0) and len(delays) > 1:
        raise ValueError("taps must have strictly increasing delays")
    h_shift = shifted_tap_gains(ch, grid)
    x_thp, p, q, macs = precode_kernel(
        np.ascontiguousarray(x.samples), h_shift, delays, grid.cp_len, cfg.modulus
    )
    seq = TimeSequence(x_thp, kind=PREFIX_ZERO, prefix_len=grid.cp_len)
    return seq, WrapRecord(p=p, q=q, cancel_macs=macs)


def thp_decode(y: TimeSequence, h1_gain: complex, h1_doppler_idx: int,
               cfg: ThpConfig, grid: GridConfig,
               tx_record: Optional[WrapRecord] = None) -> tuple[TimeSequence, WrapRecord]:
    """Receiver modulo: derotate by the direct tap's phase, wrap with K_r = |h_1| K.

    The returned record holds this stage's own wrap counts. When the
    transmitter's record is supplied and diagnostics are on, the interference
    sequences combine both stages: transmitter wraps reach the receiver
    scaled by the direct gain, so the total per-sample offset sits on the
    K_r lattice and satisfies output = |h_1| x_T + I_T + noise/|h_1|-rotated.
    """
    if y.kind != PREFIX_NONE or len(y) != grid.nm:
        raise ValueError("thp_decode expects a plain NM-sample sequence")
    h1_mag = abs(h1_gain)
    if h1_mag == 0.0:
        raise ValueError("decode undefined for |h_1| = 0")
    m = np.arange(grid.nm)
    h1_t = h1_gain * np.exp(2j * np.pi * h1_doppler_idx * m / grid.nm)
    z = np.conj(h1_t) * y.samples / h1_mag
    k_r = h1_mag * cfg.modulus
    wrapped, p, q = mod_k(z, k_r)
    record = WrapRecord(p=p, q=q)
    if cfg.collect_diagnostics:
        p_tot = p + (tx_record.p if tx_record is not None else 0)
        q_tot = q + (tx_record.q if tx_record is not None else 0)
        record.i_t = -(p_tot * k_r + 1j * q_tot * k_r)
        record.i_dd = oddm_demodulate(TimeSequence(record.i_t), grid)
    return TimeSequence(wrapped), record


def single_tap_equalize(y_dd: np.ndarray, h1_mag: float) -> np.ndarray:
    if h1_mag <= 0:
        raise ValueError("|h_1| must be positive")
    return np.asarray(y_dd) / h1_mag


def run_thp_frame(bits: np.ndarray, ch: ChannelRealization, cfg: ThpConfig,
                  grid: GridConfig, noise_var: float,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, dict]:
    """Full precoded frame: map, modulate, precode, channel, decode, demap.

    Returns (tx_bits, rx_bits, diagnostics). Diagnostics always report the
    transmitter wrap stats and mean precoded power; the receiver-side
    interference sequences are included when cfg.collect_diagnostics is set.
    """
    const = Constellation(cfg.order)
    tx_bits = np.asarray(bits, dtype=np.int8).ravel()
    symbols = map_bits(tx_bits, const)
    if symbols.size != grid.nm:
        raise ValueError("bit count does not fill the frame")
    frame = devectorize(symbols, grid.m_delay, grid.n_doppler)

    x_t = oddm_modulate(frame, grid)
    x_thp, tx_record = precode(x_t, ch, cfg, grid)
    y_t = apply_channel(x_thp, ch, grid, noise_var, rng)
    h1 = ch.taps[0]
    y_thp, rx_record = thp_decode(y_t, h1.gain, h1.doppler_idx, cfg, grid,
                                  tx_record=tx_record)
    y_dd = oddm_demodulate(y_thp, grid)
    y_eq = single_tap_equalize(y_dd, abs(h1.gain))
    rx_bits = demap(vectorize(y_eq), const)

    diagnostics = {
        "tx_record": tx_record,
        "rx_record": rx_record,
        "tx_wrap_rate": tx_record.wrap_rate,
        "precoded_power": float(np.mean(np.abs(x_thp.body) ** 2)),
        "cancel_macs": tx_record.cancel_macs,
    }
    return tx_bits, rx_bits, diagnostics
