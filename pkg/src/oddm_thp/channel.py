"""Stationary on-grid linear time-varying channels.

A realization is a list of taps (gain, delay bin, Doppler bin) that stays
constant over a frame. Physical profiles (delays in seconds, powers in dB)
are quantized to the grid when drawn; taps whose quantized delays collide
are merged by complex gain addition.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import GridConfig, TimeSequence, PREFIX_NONE

# realizations with a weaker first tap are redrawn (the precoder divides by h_1)
H1_MAGNITUDE_FLOOR = 1e-6


@dataclass(frozen=True)
class PathTap:
    gain: complex
    delay_idx: int
    doppler_idx: int
    doppler_hz: float

    def __post_init__(self):
        if self.delay_idx < 0:
            raise ValueError("delay index must be non-negative")


@dataclass(frozen=True)
class ChannelRealization:
    taps: tuple
    model_tag: str = "custom"
    redraws: int = 0

    def __post_init__(self):
        if len(self.taps) < 1:
            raise ValueError("channel needs at least one tap")
        if self.taps[0].delay_idx != 0:
            raise ValueError("first tap must sit at zero delay")
        delays = [t.delay_idx for t in self.taps]
        if delays != sorted(delays):
            raise ValueError("taps must be ordered by delay")

    @property
    def n_paths(self) -> int:
        return len(self.taps)

    @property
    def max_delay_idx(self) -> int:
        return self.taps[-1].delay_idx


@dataclass(frozen=True)
class ProfileSpec:
    """Power-delay profile plus fading law; linear powers are normalized to 1."""

    tap_delays_s: tuple
    tap_powers_db: tuple
    fading: str = "rayleigh"
    rician_k_db: float = 5.0
    fmax_hz: float = 0.0
    doppler_law: str = "jakes"
    name: str = "custom"

    def __post_init__(self):
        if len(self.tap_delays_s) != len(self.tap_powers_db):
            raise ValueError("delay and power lists must have equal length")
        if len(self.tap_delays_s) < 1:
            raise ValueError("profile needs at least one tap")
        if self.tap_delays_s[0] != 0.0:
            raise ValueError("first tap delay must be 0")
        if any(d < 0 for d in self.tap_delays_s):
            raise ValueError("delays must be non-negative")
        if self.fading not in ("rayleigh", "rician"):
            raise ValueError("fading must be 'rayleigh' or 'rician'")
        if self.doppler_law not in ("jakes", "extreme"):
            raise ValueError("doppler_law must be 'jakes' or 'extreme'")

    def linear_powers(self) -> np.ndarray:
        p = 10.0 ** (np.asarray(self.tap_powers_db, dtype=float) / 10.0)
        return p / p.sum()


def eva_profile(fmax_hz: float = 1000.0) -> ProfileSpec:
    """3GPP extended vehicular A: nine Rayleigh taps."""
    return ProfileSpec(
        tap_delays_s=(0.0, 30e-9, 150e-9, 310e-9, 370e-9, 710e-9, 1090e-9, 1730e-9, 2510e-9),
        tap_powers_db=(0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9),
        fading="rayleigh",
        fmax_hz=fmax_hz,
        name="eva",
    )


def hsr_profile(fmax_hz: float = 2000.0, rician_k_db: float = 5.0) -> ProfileSpec:
    """High-speed-railway style: four taps, Rician line of sight on the first."""
    return ProfileSpec(
        tap_delays_s=(0.0, 0.3e-6, 1.2e-6, 2.4e-6),
        tap_powers_db=(0.0, -6.0, -9.0, -12.0),
        fading="rician",
        rician_k_db=rician_k_db,
        fmax_hz=fmax_hz,
        name="hsr",
    )


def single_path_profile() -> ProfileSpec:
    return ProfileSpec(tap_delays_s=(0.0,), tap_powers_db=(0.0,), fading="rayleigh",
                       fmax_hz=0.0, name="single-path")


_PRESETS = {
    "eva": eva_profile,
    "hsr": hsr_profile,
    "single-path": single_path_profile,
}


def preset(name: str) -> ProfileSpec:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown channel preset {name!r}; choose from {sorted(_PRESETS)}") from None


def quantized_delay_indices(spec: ProfileSpec, grid: GridConfig) -> np.ndarray:
    """Per-profile-tap delay bin indices before merging."""
    return np.round(np.asarray(spec.tap_delays_s) / grid.sample_period).astype(int)


def first_tap_power(spec: ProfileSpec, grid: GridConfig) -> float:
    """Average linear power of the merged zero-delay tap on this grid."""
    idx = quantized_delay_indices(spec, grid)
    return float(spec.linear_powers()[idx == 0].sum())


def _draw_gains(spec: ProfileSpec, rng: np.random.Generator) -> np.ndarray:
    powers = spec.linear_powers()
    n = len(powers)
    gains = np.sqrt(powers / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    if spec.fading == "rician":
        # line-of-sight component on the first tap only, random stationary phase
        k = 10.0 ** (spec.rician_k_db / 10.0)
        los = np.sqrt(powers[0] * k / (k + 1.0)) * np.exp(2j * np.pi * rng.random())
        gains[0] = los + gains[0] * np.sqrt(1.0 / (k + 1.0))
    return gains


def _draw_dopplers_hz(spec: ProfileSpec, rng: np.random.Generator) -> np.ndarray:
    n = len(spec.tap_delays_s)
    if spec.fmax_hz == 0.0:
        return np.zeros(n)
    if spec.doppler_law == "jakes":
        return spec.fmax_hz * np.cos(rng.uniform(0.0, 2.0 * np.pi, n))
    return spec.fmax_hz * rng.choice((-1.0, 1.0), n)


def draw_channel(spec: ProfileSpec, grid: GridConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw one stationary realization, quantized and merged onto the grid."""
    delay_idx = quantized_delay_indices(spec, grid)
    if delay_idx.max() > grid.cp_len:
        raise ValueError(
            f"max quantized delay {delay_idx.max()} exceeds cp_len {grid.cp_len}"
        )
    powers = spec.linear_powers()
    nt = grid.n_doppler * grid.t_sym
    h1_floor = H1_MAGNITUDE_FLOOR * np.sqrt(powers[delay_idx == 0].sum())

    redraws = 0
    while True:
        gains = _draw_gains(spec, rng)
        dopplers = _draw_dopplers_hz(spec, rng)
        doppler_idx = np.round(dopplers * nt).astype(int)

        taps = []
        for bin_idx in np.unique(delay_idx):
            members = np.flatnonzero(delay_idx == bin_idx)
            gain = gains[members].sum()
            # merged tap keeps the Doppler of its strongest component
            lead = members[np.argmax(powers[members])]
            k = int(doppler_idx[lead])
            taps.append(PathTap(gain=complex(gain), delay_idx=int(bin_idx),
                                doppler_idx=k, doppler_hz=k / nt))
        if abs(taps[0].gain) >= h1_floor:
            return ChannelRealization(taps=tuple(taps), model_tag=spec.name, redraws=redraws)
        redraws += 1


def ltv_filter(x_padded: np.ndarray, ch: ChannelRealization, grid: GridConfig,
               pad_len: int, n_out: int, t0: int = 0) -> np.ndarray:
    """Tapped-delay-line LTV response at the grid's sample rate.

    Output sample i (absolute time index t0+i) is
    sum_p h_p exp(j 2 pi nu_p ((t0+i) T/M - tau_p)) x_padded[pad_len + i - l_p].
    """
    nm = grid.nm
    out = np.zeros(n_out, dtype=np.complex128)
    t = t0 + np.arange(n_out)
    for tap in ch.taps:
        if tap.delay_idx > pad_len:
            raise ValueError("padding shorter than the maximum path delay")
        seg = x_padded[pad_len - tap.delay_idx: pad_len - tap.delay_idx + n_out]
        phase = np.exp(2j * np.pi * tap.doppler_idx * (t - tap.delay_idx) / nm)
        out += tap.gain * phase * seg
    return out


def complex_awgn(shape, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian noise with per-sample variance noise_var."""
    if noise_var == 0.0:
        return np.zeros(shape, dtype=np.complex128)
    scale = np.sqrt(noise_var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def apply_channel(x: TimeSequence, ch: ChannelRealization, grid: GridConfig,
                  noise_var: float, rng: np.random.Generator) -> TimeSequence:
    """Propagate a prefixed sequence; returns the NM body samples plus noise."""
    if x.kind == PREFIX_NONE:
        raise ValueError("apply_channel expects a prefixed sequence")
    if x.prefix_len < ch.max_delay_idx:
        raise ValueError(
            f"prefix length {x.prefix_len} shorter than max path delay {ch.max_delay_idx}"
        )
    if len(x.body) != grid.nm:
        raise ValueError("sequence body must have NM samples")
    y = ltv_filter(x.samples, ch, grid, pad_len=x.prefix_len, n_out=grid.nm)
    y += complex_awgn(grid.nm, noise_var, rng)
    return TimeSequence(y, kind=PREFIX_NONE)
