"""Monte-Carlo BER engine: schemes, per-point loops, sweeps, CSV emission.

Frames are independent and draw their randomness from counter-based streams
keyed by (master seed, frame index, purpose), so results are bit-identical
for any worker count. Early stopping happens on fixed-size frame batches to
keep the stop decision schedule-independent.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import constellation_energy, evaluate_bounds, noise_var_from_snr
from .channel import (
    ChannelRealization,
    ProfileSpec,
    complex_awgn,
    draw_channel,
    first_tap_power,
    ltv_filter,
    preset,
)
from .core import GridConfig, SeedPlan, devectorize, vectorize
from .modem import PulseConfig, oddm_demodulate, oddm_modulate, waveform_channel
from .qam import Constellation, demap, map_bits
from .thp import ThpConfig, run_thp_frame

SCHEMES = ("oddm-thp", "oddm-single-path-ref", "ofdm-single-tap")
FIDELITIES = ("discrete", "waveform")

RESULTS_HEADER = (
    "scheme,channel,mod_order,alpha,snr_db,frames,bits,bit_errors,ber,"
    "wrap_rate_tx,bound_pl,bound_mnl,bound_msl,bound_max,redraws"
)
BOUNDS_HEADER = "mod_order,alpha,snr_db,sigma_h1_sq,bound_pl,bound_mnl,bound_msl,bound_max"

BATCH_FRAMES = 32  # stop decisions happen on batch edges, independent of workers


class ConfigError(ValueError):
    """Raised for malformed or inconsistent simulator configuration."""


@dataclass(frozen=True)
class SimConfig:
    scheme: str
    grid: GridConfig
    channel: ProfileSpec
    snr_db_list: tuple
    alpha_list: tuple
    thp_order: int = 4
    collect_diagnostics: bool = False
    fidelity: str = "discrete"
    pulse: PulseConfig = field(default_factory=PulseConfig)
    max_frames: int = 10000
    target_errors: int = 200
    seed: SeedPlan = field(default_factory=lambda: SeedPlan(0))

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.fidelity not in FIDELITIES:
            raise ConfigError(f"unknown fidelity {self.fidelity!r}")
        if not self.snr_db_list or not self.alpha_list:
            raise ConfigError("snr_db_list and alpha_list must be non-empty")
        if self.target_errors < 100:
            raise ConfigError("target_errors below 100 gives statistically useless points")
        if self.max_frames < 1:
            raise ConfigError("max_frames must be positive")


@dataclass
class BerRecord:
    scheme: str
    channel: str
    mod_order: int
    alpha: float
    snr_db: float
    frames: int
    bits: int
    bit_errors: int
    ber: float
    wrap_rate_tx: float
    bound_pl: float
    bound_mnl: float
    bound_msl: float
    bound_max: float
    redraws: int
    # standard error of ber under per-frame channel draws (not in the CSV):
    # fading clusters errors within frames, so the naive binomial SE is
    # optimistic whenever the channel is redrawn per frame
    ber_se: float = math.nan

    def csv_row(self) -> list:
        def fmt(v):
            if isinstance(v, float):
                return f"{v:.10g}"
            return str(v)

        return [fmt(getattr(self, name)) for name in RESULTS_HEADER.split(",")]


def _stream_tag(base: str, alpha: float, snr_db: float) -> str:
    """Purpose tag for a frame's RNG stream.

    Channel, bit, and noise streams depend only on the frame index, so sweep
    points share realizations (common random numbers); the per-point noise
    variance scales the shared normal draws.
    """
    del alpha, snr_db
    return base


# ---------------------------------------------------------------------------
# per-frame scheme chains


def _thp_frame(cfg: SimConfig, alpha: float, snr_db: float, noise_var: float,
               frame_idx: int):
    rng_ch = cfg.seed.stream(frame_idx, _stream_tag("channel", alpha, snr_db))
    rng_bits = cfg.seed.stream(frame_idx, _stream_tag("bits", alpha, snr_db))
    rng_noise = cfg.seed.stream(frame_idx, _stream_tag("noise", alpha, snr_db))
    ch = draw_channel(cfg.channel, cfg.grid, rng_ch)
    thp_cfg = ThpConfig(order=cfg.thp_order, alpha=alpha,
                        collect_diagnostics=cfg.collect_diagnostics)
    const = Constellation(cfg.thp_order)
    bits = rng_bits.integers(0, 2, cfg.grid.nm * const.bits_per_symbol)
    if cfg.fidelity == "discrete":
        tx, rx, diag = run_thp_frame(bits, ch, thp_cfg, cfg.grid, noise_var, rng_noise)
        wrapped = diag["tx_record"].wrap_count
    else:
        tx, rx, wrapped = _thp_frame_waveform(bits, ch, thp_cfg, cfg, noise_var, rng_noise)
    errors = int(np.count_nonzero(tx != rx))
    return errors, tx.size, wrapped, cfg.grid.nm, ch.redraws


def _thp_frame_waveform(bits, ch, thp_cfg, cfg: SimConfig, noise_var, rng_noise):
    from .thp import precode, single_tap_equalize, thp_decode

    grid = cfg.grid
    const = Constellation(thp_cfg.order)
    frame = devectorize(map_bits(bits, const), grid.m_delay, grid.n_doppler)
    x_t = oddm_modulate(frame, grid)
    x_thp, tx_record = precode(x_t, ch, thp_cfg, grid)
    y_t = waveform_channel(x_thp, ch, grid, cfg.pulse, noise_var, rng_noise)
    h1 = ch.taps[0]
    y_thp, _ = thp_decode(y_t, h1.gain, h1.doppler_idx, thp_cfg, grid)
    y_eq = single_tap_equalize(oddm_demodulate(y_thp, grid), abs(h1.gain))
    rx = demap(vectorize(y_eq), const)
    tx = np.asarray(bits, dtype=np.int8).ravel()
    return tx, rx, tx_record.wrap_count


def _single_path_ref_frame(cfg: SimConfig, alpha: float, snr_db: float,
                           noise_var: float, frame_idx: int):
    """ISI-free single-tap reference: each DD symbol sees its own fade.

    This is the idealized parallel channel Y = h X + w equalized by h, the
    system whose exact BER the power-loss bound quotes. Fades are drawn
    i.i.d. per symbol from the profile's first-tap law, so bit errors are
    i.i.d. and binomial error bars apply directly.
    """
    from .channel import H1_MAGNITUDE_FLOOR

    rng_ch = cfg.seed.stream(frame_idx, _stream_tag("channel", alpha, snr_db))
    rng_bits = cfg.seed.stream(frame_idx, _stream_tag("bits", alpha, snr_db))
    rng_noise = cfg.seed.stream(frame_idx, _stream_tag("noise", alpha, snr_db))
    grid = cfg.grid
    sigma_h1_sq = first_tap_power(cfg.channel, grid)

    h = np.sqrt(sigma_h1_sq / 2.0) * (rng_ch.standard_normal(grid.nm)
                                      + 1j * rng_ch.standard_normal(grid.nm))
    floor = H1_MAGNITUDE_FLOOR * np.sqrt(sigma_h1_sq)
    redraws = 0
    weak = np.abs(h) < floor
    while np.any(weak):
        redraws += int(weak.sum())
        h[weak] = np.sqrt(sigma_h1_sq / 2.0) * (rng_ch.standard_normal(int(weak.sum()))
                                                + 1j * rng_ch.standard_normal(int(weak.sum())))
        weak = np.abs(h) < floor

    const = Constellation(cfg.thp_order)
    bits = rng_bits.integers(0, 2, grid.nm * const.bits_per_symbol)
    x_dd = map_bits(bits, const)
    w = complex_awgn(grid.nm, noise_var, rng_noise)
    y_eq = x_dd + w / h
    rx = demap(y_eq, const)
    errors = int(np.count_nonzero(bits != rx))
    return errors, bits.size, 0, 0, redraws


def _ofdm_cp_len(grid: GridConfig, ch: ChannelRealization) -> int:
    """Per-symbol CP: the frame prefix budget split across N symbols, but
    never shorter than the channel memory."""
    return max(math.ceil(grid.cp_len / grid.n_doppler), ch.max_delay_idx)


def run_ofdm_baseline_frame(bits, ch: ChannelRealization, grid: GridConfig,
                            noise_var: float, rng: np.random.Generator,
                            order: int = 4):
    """OFDM over the same bandwidth/duration with a one-tap frequency equalizer.

    N symbols of M subcarriers; the equalizer divides by the channel transfer
    function frozen at each symbol's temporal midpoint.
    """
    m, n = grid.m_delay, grid.n_doppler
    const = Constellation(order)
    tx_bits = np.asarray(bits, dtype=np.int8).ravel()
    symbols = map_bits(tx_bits, const).reshape((m, n), order="F")

    cp = _ofdm_cp_len(grid, ch)
    sym_len = m + cp
    stream = np.empty(n * sym_len, dtype=np.complex128)
    for s in range(n):
        body = np.fft.ifft(symbols[:, s]) * np.sqrt(m)
        stream[s * sym_len: s * sym_len + cp] = body[m - cp:]
        stream[s * sym_len + cp: (s + 1) * sym_len] = body

    pad = ch.max_delay_idx
    padded = np.concatenate([np.zeros(pad, dtype=np.complex128), stream])
    y = ltv_filter(padded, ch, grid, pad_len=pad, n_out=stream.size)
    y += complex_awgn(y.size, noise_var, rng)

    q = np.arange(m)
    rx_syms = np.empty_like(symbols)
    for s in range(n):
        seg = y[s * sym_len + cp: (s + 1) * sym_len]
        z = np.fft.fft(seg) / np.sqrt(m)
        t_mid = s * sym_len + cp + m / 2.0
        ctf = np.zeros(m, dtype=np.complex128)
        for tap in ch.taps:
            ctf += tap.gain * np.exp(2j * np.pi * tap.doppler_idx * t_mid / grid.nm) \
                * np.exp(-2j * np.pi * q * tap.delay_idx / m)
        rx_syms[:, s] = z / ctf
    rx_bits = demap(rx_syms.flatten(order="F"), const)
    return tx_bits, rx_bits


def _ofdm_frame(cfg: SimConfig, alpha: float, snr_db: float, noise_var: float,
                frame_idx: int):
    rng_ch = cfg.seed.stream(frame_idx, _stream_tag("channel", alpha, snr_db))
    rng_bits = cfg.seed.stream(frame_idx, _stream_tag("bits", alpha, snr_db))
    rng_noise = cfg.seed.stream(frame_idx, _stream_tag("noise", alpha, snr_db))
    ch = draw_channel(cfg.channel, cfg.grid, rng_ch)
    const = Constellation(cfg.thp_order)
    bits = rng_bits.integers(0, 2, cfg.grid.nm * const.bits_per_symbol)
    tx, rx = run_ofdm_baseline_frame(bits, ch, cfg.grid, noise_var, rng_noise,
                                     order=cfg.thp_order)
    errors = int(np.count_nonzero(tx != rx))
    return errors, tx.size, 0, 0, ch.redraws


_FRAME_FNS = {
    "oddm-thp": _thp_frame,
    "oddm-single-path-ref": _single_path_ref_frame,
    "ofdm-single-tap": _ofdm_frame,
}


def _run_frame(args):
    cfg, alpha, snr_db, noise_var, frame_idx = args
    return _FRAME_FNS[cfg.scheme](cfg, alpha, snr_db, noise_var, frame_idx)


# ---------------------------------------------------------------------------
# points and sweeps


def _noise_var(cfg: SimConfig, alpha: float, snr: float) -> float:
    if cfg.scheme == "oddm-thp":
        return noise_var_from_snr(cfg.thp_order, alpha, snr)
    # unprecoded schemes reference their own mean transmit power
    return constellation_energy(cfg.thp_order) / snr


def run_point(cfg: SimConfig, alpha: float, snr_db: float,
              executor: ProcessPoolExecutor | None = None) -> BerRecord:
    """Monte-Carlo one (alpha, SNR) point until target_errors or max_frames."""
    if cfg.grid.cp_len < _max_profile_delay(cfg.channel, cfg.grid):
        raise ConfigError("grid cp_len is shorter than the channel's maximum delay")
    snr = 10.0 ** (snr_db / 10.0)
    noise_var = _noise_var(cfg, alpha, snr)

    frames = bits = errors = wrapped = samples = redraws = 0
    err_sq_sum = 0  # per-frame squared error counts, for the clustered SE
    next_frame = 0
    while frames < cfg.max_frames and errors < cfg.target_errors:
        batch = min(BATCH_FRAMES, cfg.max_frames - frames)
        args = [(cfg, alpha, snr_db, noise_var, next_frame + i) for i in range(batch)]
        if executor is None:
            results = [_run_frame(a) for a in args]
        else:
            results = list(executor.map(_run_frame, args))
        for err, nbits, nwrap, nsamp, nredraw in results:
            errors += err
            err_sq_sum += err * err
            bits += nbits
            wrapped += nwrap
            samples += nsamp
            redraws += nredraw
        frames += batch
        next_frame += batch

    bounds = {"bound_pl": math.nan, "bound_mnl": math.nan,
              "bound_msl": math.nan, "bound_max": math.nan}
    if cfg.scheme == "oddm-thp" and cfg.thp_order in (4, 16):
        sigma_h1_sq = first_tap_power(cfg.channel, cfg.grid)
        bounds = evaluate_bounds(cfg.thp_order, alpha, sigma_h1_sq, snr)

    ber_se = math.nan
    if frames > 1 and bits:
        mean_err = errors / frames
        frame_var = (err_sq_sum - frames * mean_err**2) / (frames - 1)
        ber_se = math.sqrt(max(frame_var, 0.0) / frames) / (bits / frames)

    return BerRecord(
        ber_se=ber_se,
        scheme=cfg.scheme,
        channel=cfg.channel.name,
        mod_order=cfg.thp_order,
        alpha=alpha,
        snr_db=snr_db,
        frames=frames,
        bits=bits,
        bit_errors=errors,
        ber=errors / bits if bits else math.nan,
        wrap_rate_tx=wrapped / samples if samples else math.nan,
        redraws=redraws,
        **bounds,
    )


def _max_profile_delay(spec: ProfileSpec, grid: GridConfig) -> int:
    from .channel import quantized_delay_indices

    return int(quantized_delay_indices(spec, grid).max())


def sweep(cfg: SimConfig, workers: int = 1) -> list[BerRecord]:
    """All (alpha, snr) cross-product points, sorted by (alpha, snr_db)."""
    records = []
    executor = None
    try:
        if workers > 1:
            executor = ProcessPoolExecutor(max_workers=workers)
        for alpha in cfg.alpha_list:
            for snr_db in cfg.snr_db_list:
                records.append(run_point(cfg, alpha, snr_db, executor))
    finally:
        if executor is not None:
            executor.shutdown()
    records.sort(key=lambda r: (r.alpha, r.snr_db))
    return records


def best_alpha_records(records: list[BerRecord]) -> list[BerRecord]:
    """Minimum-BER record per SNR point (ties broken by smaller alpha)."""
    by_snr: dict = {}
    for rec in records:
        cur = by_snr.get(rec.snr_db)
        if cur is None or (rec.ber, rec.alpha) < (cur.ber, cur.alpha):
            by_snr[rec.snr_db] = rec
    return [by_snr[s] for s in sorted(by_snr)]


def write_records_csv(records: list[BerRecord], path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER.split(","))
        for rec in records:
            writer.writerow(rec.csv_row())


def write_bounds_csv(rows: list[dict], path: str):
    names = BOUNDS_HEADER.split(",")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in rows:
            writer.writerow([
                str(row["mod_order"]) if k == "mod_order" else f"{row[k]:.10g}"
                for k in names
            ])


# ---------------------------------------------------------------------------
# config file handling


def _reject_unknown(obj: dict, allowed: set, where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _parse_grid(obj: dict) -> GridConfig:
    _reject_unknown(obj, {"m_delay", "n_doppler", "delta_f", "cp_len", "fc", "t_sym"}, "grid")
    try:
        return GridConfig(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid config: {exc}") from exc


def _parse_channel(obj) -> ProfileSpec:
    if isinstance(obj, str):
        try:
            return preset(obj)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    _reject_unknown(
        set(obj),
        {"tap_delays_s", "tap_powers_db", "fading", "rician_k_db", "fmax_hz",
         "doppler_law", "name"},
        "channel",
    )
    try:
        obj = dict(obj)
        obj["tap_delays_s"] = tuple(obj["tap_delays_s"])
        obj["tap_powers_db"] = tuple(obj["tap_powers_db"])
        return ProfileSpec(**obj)
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad channel config: {exc}") from exc


def load_config(path: str) -> SimConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> SimConfig:
    allowed = {"scheme", "grid", "pulse", "fidelity", "thp", "channel",
               "snr_db_list", "alpha_list", "max_frames", "target_errors", "seed"}
    _reject_unknown(raw, allowed, "config")
    for key in ("scheme", "grid", "channel", "snr_db_list", "alpha_list", "seed"):
        if key not in raw:
            raise ConfigError(f"config is missing required key {key!r}")

    grid = _parse_grid(dict(raw["grid"]))
    channel = _parse_channel(raw["channel"])

    thp_raw = dict(raw.get("thp", {}))
    _reject_unknown(thp_raw, {"order", "collect_diagnostics"}, "thp")

    pulse_raw = dict(raw.get("pulse", {}))
    _reject_unknown(pulse_raw, {"rolloff", "span", "oversample"}, "pulse")
    try:
        pulse = PulseConfig(**pulse_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad pulse config: {exc}") from exc

    try:
        return SimConfig(
            scheme=raw["scheme"],
            grid=grid,
            channel=channel,
            snr_db_list=tuple(float(s) for s in raw["snr_db_list"]),
            alpha_list=tuple(float(a) for a in raw["alpha_list"]),
            thp_order=int(thp_raw.get("order", 4)),
            collect_diagnostics=bool(thp_raw.get("collect_diagnostics", False)),
            fidelity=raw.get("fidelity", "discrete"),
            pulse=pulse,
            max_frames=int(raw.get("max_frames", 10000)),
            target_errors=int(raw.get("target_errors", 200)),
            seed=SeedPlan(int(raw["seed"])),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc
