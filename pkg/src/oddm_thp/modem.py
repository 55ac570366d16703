"""Delay-Doppler modulation and demodulation.

Two fidelity modes share the transforms in this module. Discrete mode applies
the tapped-delay-line channel directly to the symbol-rate sequence; waveform
mode expands to an oversampled SRRC-shaped waveform, runs the channel at the
oversampled rate, and matched-filters back down.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import GridConfig, TimeSequence, PREFIX_NONE, PREFIX_CYCLIC, PREFIX_ZERO
from .channel import ChannelRealization, complex_awgn


@dataclass(frozen=True)
class PulseConfig:
    """Square-root raised cosine shaping: roll-off, half-span in delay bins, oversampling."""

    rolloff: float = 0.1
    span: int = 20
    oversample: int = 8

    def __post_init__(self):
        if not 0.0 < self.rolloff <= 1.0:
            raise ValueError("rolloff must lie in (0, 1]")
        if self.span < 1:
            raise ValueError("span must be at least 1")
        if self.oversample < 2:
            raise ValueError("oversample must be at least 2")

    def validate_against(self, grid: GridConfig):
        # the receiver treats the Doppler phase as constant across one pulse
        if 2 * self.span >= grid.m_delay:
            raise ValueError("pulse span too long for the grid: need 2*span < m_delay")


def oddm_modulate(frame: np.ndarray, grid: GridConfig) -> TimeSequence:
    """Unitary IDFT along the Doppler axis, then delay-major serialization."""
    frame = np.asarray(frame, dtype=np.complex128)
    if frame.shape != (grid.m_delay, grid.n_doppler):
        raise ValueError("frame shape does not match grid")
    x_td = np.fft.ifft(frame, axis=1) * np.sqrt(grid.n_doppler)
    return TimeSequence(x_td.flatten(order="F"), kind=PREFIX_NONE)


def oddm_demodulate(y: TimeSequence, grid: GridConfig) -> np.ndarray:
    """Inverse of :func:`oddm_modulate`: deserialize, unitary DFT along Doppler."""
    if y.kind != PREFIX_NONE:
        raise ValueError("demodulate expects a plain sequence")
    if len(y) != grid.nm:
        raise ValueError("sequence must have NM samples")
    y_td = y.samples.reshape((grid.m_delay, grid.n_doppler), order="F")
    return np.fft.fft(y_td, axis=1) / np.sqrt(grid.n_doppler)


def add_prefix(x: TimeSequence, kind: str, grid: GridConfig) -> TimeSequence:
    if x.kind != PREFIX_NONE:
        raise ValueError("sequence already prefixed")
    if grid.cp_len <= 0:
        raise ValueError("grid has no prefix length configured")
    if kind == PREFIX_CYCLIC:
        prefix = x.samples[-grid.cp_len:]
    elif kind == PREFIX_ZERO:
        prefix = np.zeros(grid.cp_len, dtype=np.complex128)
    else:
        raise ValueError(f"unknown prefix kind {kind!r}")
    return TimeSequence(np.concatenate([prefix, x.samples]), kind=kind,
                        prefix_len=grid.cp_len)


def remove_prefix(x: TimeSequence) -> TimeSequence:
    if x.kind == PREFIX_NONE:
        raise ValueError("sequence has no prefix")
    return TimeSequence(x.body.copy(), kind=PREFIX_NONE)


def srrc_taps(pulse: PulseConfig) -> np.ndarray:
    """Unit-energy SRRC taps sampled at oversample points per delay bin,
    truncated hard at +-span bins."""
    beta = pulse.rolloff
    n = pulse.span * pulse.oversample
    t = np.arange(-n, n + 1) / pulse.oversample  # in delay-bin units
    taps = np.empty(t.size)
    for i, ti in enumerate(t):
        if ti == 0.0:
            taps[i] = 1.0 - beta + 4.0 * beta / np.pi
        elif beta > 0.0 and abs(abs(ti) - 1.0 / (4.0 * beta)) < 1e-12:
            taps[i] = (beta / np.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
                + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
            )
        else:
            num = np.sin(np.pi * ti * (1.0 - beta)) + 4.0 * beta * ti * np.cos(np.pi * ti * (1.0 + beta))
            den = np.pi * ti * (1.0 - (4.0 * beta * ti) ** 2)
            taps[i] = num / den
    return taps / np.linalg.norm(taps)


def pulse_shape(x: TimeSequence, pulse: PulseConfig) -> np.ndarray:
    """Oversampled waveform sum_m x[m] a(t - m T/M).

    Output sample i sits at subsample time i - span*oversample - prefix_len*oversample
    (in units of T/(M*oversample)); see :func:`waveform_time_offset`.
    """
    taps = srrc_taps(pulse)
    up = np.zeros(len(x) * pulse.oversample, dtype=np.complex128)
    up[:: pulse.oversample] = x.samples
    support = (len(x) - 1) * pulse.oversample + taps.size
    return np.convolve(up, taps)[:support]


def waveform_time_offset(x_len: int, prefix_len: int, pulse: PulseConfig) -> int:
    """Subsample index of time zero inside a pulse_shape output."""
    return pulse.span * pulse.oversample + prefix_len * pulse.oversample


def matched_filter_sample(r: np.ndarray, pulse: PulseConfig, n_out: int,
                          prefix_len: int = 0) -> TimeSequence:
    """Correlate with the pulse and sample every oversample-th point.

    Keeps the n_out samples starting at time zero, i.e. the prefix region of
    the shaped sequence is discarded.
    """
    taps = srrc_taps(pulse)
    y = np.convolve(r, taps)  # taps are symmetric: convolution == correlation
    o = pulse.oversample
    start = 2 * pulse.span * o + prefix_len * o
    idx = start + o * np.arange(n_out)
    if idx[-1] >= y.size:
        raise ValueError("waveform too short for the requested output length")
    return TimeSequence(y[idx], kind=PREFIX_NONE)


def waveform_channel(x: TimeSequence, ch: ChannelRealization, grid: GridConfig,
                     pulse: PulseConfig, noise_var: float,
                     rng: np.random.Generator) -> TimeSequence:
    """Waveform-fidelity propagation of a prefixed sequence.

    Pulse shape, apply the LTV channel exactly at the oversampled rate (delay
    shift plus continuous Doppler phase per path), add white noise, matched
    filter, and sample at the symbol instants.
    """
    if x.kind == PREFIX_NONE:
        raise ValueError("waveform_channel expects a prefixed sequence")
    pulse.validate_against(grid)
    o = pulse.oversample
    wave = pulse_shape(x, pulse)
    t0 = waveform_time_offset(len(x), x.prefix_len, pulse)
    pad = ch.max_delay_idx * o
    padded = np.concatenate([np.zeros(pad, dtype=np.complex128), wave])
    t_sub = np.arange(wave.size) - t0  # subsample time of each output sample
    r = np.zeros(wave.size, dtype=np.complex128)
    for tap in ch.taps:
        seg = padded[pad - tap.delay_idx * o: pad - tap.delay_idx * o + wave.size]
        phase = np.exp(2j * np.pi * tap.doppler_idx * (t_sub / o - tap.delay_idx) / grid.nm)
        r += tap.gain * phase * seg
    r += complex_awgn(r.size, noise_var, rng)
    return matched_filter_sample(r, pulse, grid.nm, prefix_len=x.prefix_len)


def build_h_dd(ch: ChannelRealization, grid: GridConfig) -> sp.csr_matrix:
    """Sparse NM x NM delay-Doppler channel matrix of the CP-prefixed system.

    Row m' + k'M couples to column [m'-l_p]_M + [k'-k_p]_N M with gain
    h_p e^{j 2 pi nu_p (m' T/M - tau_p)}, picking up an extra phase
    e^{-j 2 pi [k'-k_p]_N / N} on rows with m' < l_p.
    """
    m, n = grid.m_delay, grid.n_doppler
    nm = grid.nm
    mp = np.arange(m)
    kp = np.arange(n)
    mg, kg = np.meshgrid(mp, kp, indexing="ij")
    rows_base = (mg + kg * m).ravel()

    rows, cols, vals = [], [], []
    for tap in ch.taps:
        col_m = np.mod(mg - tap.delay_idx, m)
        col_k = np.mod(kg - tap.doppler_idx, n)
        val = tap.gain * np.exp(
            2j * np.pi * tap.doppler_idx * (mg - tap.delay_idx) / nm
        ).astype(np.complex128)
        wrap = mg < tap.delay_idx
        val = np.where(wrap, val * np.exp(-2j * np.pi * col_k / n), val)
        rows.append(rows_base)
        cols.append((col_m + col_k * m).ravel())
        vals.append(val.ravel())

    h = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nm, nm),
    )
    return h.tocsr()
