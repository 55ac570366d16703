"""Cross-module oracle suite behind the `validate` CLI command.

Each check compares an implementation path against an independent reference:
brute-force sums, numerical quadrature, or algebraic identities that must
hold exactly. The suite runs on small grids and finishes in seconds.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import analysis, thp
from .channel import ChannelRealization, PathTap, apply_channel
from .core import GridConfig, TimeSequence, devectorize, vectorize
from .modem import PREFIX_CYCLIC, add_prefix, build_h_dd, oddm_demodulate, oddm_modulate
from .qam import Constellation, map_bits
from .thp import ThpConfig, mod_k, precode, shifted_tap_gains


@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: max_err={self.max_error:.3e} tol={self.tolerance:.0e}"


def random_channel(rng: np.random.Generator, grid: GridConfig, n_paths: int,
                   max_doppler_idx: int = 2) -> ChannelRealization:
    """Random on-grid channel with distinct delays starting at zero."""
    delays = np.concatenate([[0], np.sort(rng.choice(
        np.arange(1, grid.cp_len + 1), size=n_paths - 1, replace=False))]) \
        if n_paths > 1 else np.array([0])
    nt = grid.n_doppler * grid.t_sym
    taps = []
    for l in delays:
        gain = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2 * n_paths)
        if l == 0 and abs(gain) < 0.1:
            gain += 0.2  # keep the direct tap comfortably above the floor
        k = int(rng.integers(-max_doppler_idx, max_doppler_idx + 1))
        taps.append(PathTap(gain=complex(gain), delay_idx=int(l),
                            doppler_idx=k, doppler_hz=k / nt))
    return ChannelRealization(taps=tuple(taps))


def check_mod_decomposition(rng: np.random.Generator, n: int = 2000) -> CheckResult:
    k_mod = 3.7
    x = 40.0 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    wrapped, p, q = mod_k(x, k_mod)
    recon = wrapped + p * k_mod + 1j * q * k_mod
    err = np.abs(x - recon).max()
    in_range = (wrapped.real >= -k_mod / 2).all() and (wrapped.real < k_mod / 2).all() \
        and (wrapped.imag >= -k_mod / 2).all() and (wrapped.imag < k_mod / 2).all()
    if not in_range:
        err = max(err, 1.0)
    return CheckResult("mod-wrap decomposition", float(err), 1e-12)


def check_precode_identity(rng: np.random.Generator, n_channels: int = 20,
                           grid: GridConfig | None = None) -> CheckResult:
    """Noiseless receive must equal h_1[m] x_T[m] minus the recorded wraps."""
    grid = grid or GridConfig(m_delay=8, n_doppler=4, cp_len=3)
    cfg = ThpConfig(order=4, alpha=1.2)
    const = Constellation(4)
    worst = 0.0
    for _ in range(n_channels):
        ch = random_channel(rng, grid, n_paths=int(rng.integers(2, 4)))
        bits = rng.integers(0, 2, grid.nm * 2)
        frame = devectorize(map_bits(bits, const), grid.m_delay, grid.n_doppler)
        x_t = oddm_modulate(frame, grid)
        x_thp, rec = precode(x_t, ch, cfg, grid)
        y = apply_channel(x_thp, ch, grid, 0.0, rng)
        h1_t = shifted_tap_gains(ch, grid)[0]
        k_mod = cfg.modulus
        resid = y.samples - h1_t * x_t.samples + h1_t * (rec.p * k_mod + 1j * rec.q * k_mod)
        worst = max(worst, float(np.abs(resid).max()))
    return CheckResult("precode/receive identity", worst, 1e-9)


def check_h_dd_equivalence(rng: np.random.Generator, n_channels: int = 20) -> CheckResult:
    """CP-prefixed chain output must match the sparse DD matrix product."""
    grid = GridConfig(m_delay=8, n_doppler=4, cp_len=3)
    worst = 0.0
    for _ in range(n_channels):
        ch = random_channel(rng, grid, n_paths=2)
        x_dd = rng.standard_normal(grid.nm) + 1j * rng.standard_normal(grid.nm)
        frame = devectorize(x_dd, grid.m_delay, grid.n_doppler)
        x_cp = add_prefix(oddm_modulate(frame, grid), PREFIX_CYCLIC, grid)
        y = apply_channel(x_cp, ch, grid, 0.0, rng)
        chain = vectorize(oddm_demodulate(y, grid))
        matrix = build_h_dd(ch, grid) @ x_dd
        worst = max(worst, float(np.abs(chain - matrix).max()))
    return CheckResult("DD-matrix vs chain equivalence", worst, 1e-9)


def check_rayleigh_pairwise_quadrature() -> CheckResult:
    """Closed form vs direct integration over the Rayleigh magnitude density."""
    worst = 0.0
    for s in (0.25, 1.0, 2.5, 4.0):
        for a in (0.3, 1.0, 2.0, 5.0, 9.0):
            sw = 0.8
            closed = analysis.rayleigh_pairwise(a, s, sw)

            def integrand(r, a=a, s=s, sw=sw):
                return analysis.q_func(r * a / np.sqrt(sw / 2.0)) * (2 * r / s) * np.exp(-r * r / s)

            numeric, _ = quad(integrand, 0.0, np.inf)
            worst = max(worst, abs(closed - numeric))
    return CheckResult("rayleigh pairwise vs quadrature", float(worst), 1e-6)


def check_mnl_large_alpha() -> CheckResult:
    """For huge alpha the modulo-noise bound collapses onto the power-loss form."""
    worst = 0.0
    for s in (0.5, 1.0, 2.0):
        for sw in (0.01, 0.1, 1.0):
            params = analysis.BoundParams(order=4, alpha=1e6, sigma_h1_sq=s, sigma_w_sq=sw)
            limit = analysis.mnl_4qam(params)
            pl_closed = analysis.rayleigh_pairwise(1.0, s, sw)
            worst = max(worst, abs(limit - pl_closed))
    return CheckResult("large-alpha MNL vs power-loss closed form", float(worst), 1e-10)


def check_msl16_simplification() -> CheckResult:
    """Corollary-3 printed form equals (3/4) Q(sqrt(2/Var))."""
    worst = 0.0
    for alpha in (0.7, 1.0, 1.5, 2.0):
        var = analysis.msl_variance(16, alpha)
        direct = analysis.msl_16qam(alpha)
        simplified = 0.75 * analysis.q_func(np.sqrt(2.0 / var))
        worst = max(worst, abs(direct - simplified))
    return CheckResult("16-QAM MSL simplification", float(worst), 1e-12)


def check_transform_roundtrip(rng: np.random.Generator) -> CheckResult:
    grid = GridConfig(m_delay=8, n_doppler=4, cp_len=2)
    frame = rng.standard_normal((8, 4)) + 1j * rng.standard_normal((8, 4))
    back = oddm_demodulate(oddm_modulate(frame, grid), grid)
    err = float(np.abs(back - frame).max())
    parseval = abs(np.linalg.norm(oddm_modulate(frame, grid).samples) - np.linalg.norm(frame))
    return CheckResult("modulate/demodulate round-trip", max(err, float(parseval)), 1e-12)


def run_validation(preset: str = "small", seed: int = 2024) -> list[CheckResult]:
    if preset != "small":
        raise ValueError(f"unknown validation preset {preset!r}")
    rng = np.random.default_rng(seed)
    return [
        check_mod_decomposition(rng),
        check_transform_roundtrip(rng),
        check_precode_identity(rng),
        check_h_dd_equivalence(rng),
        check_rayleigh_pairwise_quadrature(),
        check_mnl_large_alpha(),
        check_msl16_simplification(),
    ]
