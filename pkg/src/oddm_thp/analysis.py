"""Closed-form BER lower bounds for the precoded system.

Three loss mechanisms are bounded separately and combined by a pointwise
maximum: the power loss (precoded symbols carry K^2/6 mean power instead of
the constellation energy), the modulo noise loss (noise pushes boundary
values across a wrap), and the modulo signal loss (transmitter wraps of the
Gaussian-like time samples reappear as delay-Doppler interference). SNR is
defined against the precoded transmit power.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .qam import Constellation, energy

DEFAULT_TRUNC = 10
_TAIL_TOL = 1e-15


def q_func(x):
    """Standard normal tail probability."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def constellation_energy(order: int) -> float:
    return energy(Constellation(order))


def noise_var_from_snr(order: int, alpha: float, snr: float) -> float:
    """Per-sample complex noise variance when SNR references the precoded power."""
    e_xdd = constellation_energy(order)
    return (alpha**2 * e_xdd + (2.0 / 3.0) * alpha**2) / snr


@dataclass(frozen=True)
class BoundParams:
    order: int
    alpha: float
    sigma_h1_sq: float
    snr: float = 0.0
    sigma_w_sq: float = field(default=0.0)
    trunc: int = DEFAULT_TRUNC

    def __post_init__(self):
        if self.sigma_h1_sq <= 0:
            raise ValueError("sigma_h1_sq must be positive")
        if self.trunc < 2:
            raise ValueError("series truncation must be at least 2")
        if self.snr <= 0 and self.sigma_w_sq <= 0:
            raise ValueError("provide snr or sigma_w_sq")
        if self.snr > 0:
            derived = noise_var_from_snr(self.order, self.alpha, self.snr)
            if self.sigma_w_sq > 0:
                if abs(self.sigma_w_sq - derived) > 1e-12 * derived:
                    raise ValueError("sigma_w_sq inconsistent with snr")
            else:
                object.__setattr__(self, "sigma_w_sq", derived)
        else:
            e_thp = (self.alpha**2) * (constellation_energy(self.order) + 2.0 / 3.0)
            object.__setattr__(self, "snr", e_thp / self.sigma_w_sq)


def rayleigh_pairwise(a: float, sigma_h1_sq: float, sigma_w_sq: float) -> float:
    """E over Rayleigh |h_1| of Q(|h_1| a / sqrt(sigma_w^2 / 2)).

    Closed form (1 - sqrt(s a^2 / (s_w + s a^2))) / 2 for a >= 0; odd
    symmetry of the Q argument gives 1 - value(|a|) for a < 0.
    """
    if sigma_h1_sq <= 0 or sigma_w_sq <= 0:
        raise ValueError("variances must be positive")
    if a == 0.0:
        return 0.5
    if a < 0.0:
        return 1.0 - rayleigh_pairwise(-a, sigma_h1_sq, sigma_w_sq)
    sa2 = sigma_h1_sq * a * a
    return 0.5 * (1.0 - np.sqrt(sa2 / (sigma_w_sq + sa2)))


def power_loss_4qam(params: BoundParams) -> float:
    """Proposition-1 lower bound: the ISI-free single-tap system at the
    precoded power budget."""
    r = 3.0 * params.sigma_h1_sq * params.snr / (4.0 * params.alpha**2)
    return 0.5 * (1.0 - np.sqrt(r / (2.0 + r)))


def power_loss_taylor_4qam(params: BoundParams) -> float:
    """First-order expansion of the power-loss bound, valid for large SNR."""
    return 2.0 * params.alpha**2 / (3.0 * params.sigma_h1_sq * params.snr)


def _sqrt_ratio(c: float, sigma_h1_sq: float, sigma_w_sq: float) -> float:
    sc2 = sigma_h1_sq * c * c
    return np.sqrt(sc2 / (sigma_w_sq + sc2))


def mnl_4qam(params: BoundParams) -> float:
    """Proposition-2 lower bound from the two dominant wrap intervals."""
    if params.alpha <= 0.5:
        raise ValueError("the closed form needs alpha > 1/2")
    a, s, sw = params.alpha, params.sigma_h1_sq, params.sigma_w_sq
    return 0.5 * (
        _sqrt_ratio(4 * a - 1, s, sw)
        - _sqrt_ratio(2 * a - 1, s, sw)
        + _sqrt_ratio(2 * a + 1, s, sw)
        - _sqrt_ratio(1.0, s, sw)
    )


def mnl_4qam_series(params: BoundParams) -> float:
    """Full wrap-interval series; each term is one error strip of width K/2."""
    k_mod = 2.0 * params.alpha * 2.0
    s, sw = params.sigma_h1_sq, params.sigma_w_sq
    total = 0.0
    for eta in range(-params.trunc, params.trunc + 1):
        lo = rayleigh_pairwise((eta - 0.5) * k_mod - 1.0, s, sw)
        hi = rayleigh_pairwise(eta * k_mod - 1.0, s, sw)
        total += abs(lo - hi)
    return total


def msl_variance(order: int, alpha: float, trunc: int = DEFAULT_TRUNC) -> float:
    """Variance of the wrap interference per equalized DD symbol.

    Treats the pre-modulo time samples as complex Gaussians at the
    constellation energy and sums the wrap-probability series over the wrap
    index; the truncated tail must be negligible.
    """
    if trunc < 2:
        raise ValueError("series truncation must be at least 2")
    m_ord = Constellation(order).order
    c = np.sqrt(3.0 * m_ord / (m_ord - 1.0))

    def term(eta: int) -> float:
        return (
            8.0 * eta**2 * alpha**2 * m_ord
            * (q_func(c * (2 * eta - 1) * alpha) - q_func(c * (2 * eta + 1) * alpha))
        )

    tail = abs(term(trunc + 1))
    if tail >= _TAIL_TOL:
        raise ValueError(
            f"variance series tail {tail:.3e} above {_TAIL_TOL}; increase trunc"
        )
    return float(sum(term(eta) for eta in range(-trunc, trunc + 1)))


def msl_4qam(alpha: float, trunc: int = DEFAULT_TRUNC) -> float:
    """Proposition-3 bound; channel-independent, set by alpha alone."""
    var = msl_variance(4, alpha, trunc)
    if var == 0.0:
        return 0.0
    return float(q_func(np.sqrt(2.0 / var)))


def theorem1_4qam(params: BoundParams) -> float:
    return max(power_loss_4qam(params), mnl_4qam(params), msl_4qam(params.alpha, params.trunc))


def power_loss_16qam(params: BoundParams) -> float:
    """Corollary-1 bound in its SNR form."""
    s_omega = params.sigma_h1_sq * params.snr
    a2 = params.alpha**2
    return (
        0.5
        - (3.0 / 8.0) * np.sqrt(3.0 * s_omega / (32.0 * a2 + 3.0 * s_omega))
        - (1.0 / 4.0) * np.sqrt(27.0 * s_omega / (32.0 * a2 + 27.0 * s_omega))
        + (1.0 / 8.0) * np.sqrt(75.0 * s_omega / (32.0 * a2 + 75.0 * s_omega))
    )


def power_loss_16qam_energy_form(params: BoundParams) -> float:
    """Corollary-1 bound written against the constellation-energy SNR."""
    x = params.sigma_h1_sq * constellation_energy(16) / params.sigma_w_sq
    return (
        0.5
        - (3.0 / 8.0) * np.sqrt(x / (10.0 + x))
        - (1.0 / 4.0) * np.sqrt(9.0 * x / (10.0 + 9.0 * x))
        + (1.0 / 8.0) * np.sqrt(5.0 * x / (2.0 + 5.0 * x))
    )


def mnl_16qam(params: BoundParams) -> float:
    """Corollary-2 bound: four 4-PAM error-strip families per axis."""
    k_mod = 2.0 * params.alpha * 4.0
    s, sw = params.sigma_h1_sq, params.sigma_w_sq

    def rp(a: float) -> float:
        return rayleigh_pairwise(a, s, sw)

    total = 0.0
    for beta in range(-params.trunc, params.trunc + 1):
        case_a = abs(rp((beta - 1) * k_mod + 3) - rp((beta - 0.5) * k_mod + 3))
        case_b = abs(rp((beta - 1) * k_mod + 1) - rp((beta - 0.5) * k_mod + 1))
        case_c = abs(rp((beta - 1) * k_mod + 1) - rp((beta - 1) * k_mod + 5))
        case_d = abs(rp((beta - 1) * k_mod + 3) - rp(beta * k_mod - 1))
        total += case_a + case_b + case_c + case_d
    return 2.0 * total / 8.0


def msl_16qam(alpha: float, trunc: int = DEFAULT_TRUNC) -> float:
    """Corollary-3 bound; equals (3/4) Q(sqrt(2/Var)) since the 16-QAM
    constellation energy is 10."""
    var = msl_variance(16, alpha, trunc)
    if var == 0.0:
        return 0.0
    return float(0.75 * q_func(np.sqrt(constellation_energy(16) / (5.0 * var))))


def theorem1_16qam(params: BoundParams) -> float:
    return max(power_loss_16qam(params), mnl_16qam(params), msl_16qam(params.alpha, params.trunc))


def evaluate_bounds(order: int, alpha: float, sigma_h1_sq: float, snr: float,
                    trunc: int = DEFAULT_TRUNC) -> dict:
    """All bound components plus their maximum, keyed for the results CSV."""
    params = BoundParams(order=order, alpha=alpha, sigma_h1_sq=sigma_h1_sq,
                         snr=snr, trunc=trunc)
    if order == 4:
        pl, mnl, msl = (power_loss_4qam(params), mnl_4qam(params),
                        msl_4qam(alpha, trunc))
    elif order == 16:
        pl, mnl, msl = (power_loss_16qam(params), mnl_16qam(params),
                        msl_16qam(alpha, trunc))
    else:
        raise ValueError("bounds are available for 4-QAM and 16-QAM only")
    return {
        "bound_pl": float(pl),
        "bound_mnl": float(mnl),
        "bound_msl": float(msl),
        "bound_max": float(max(pl, mnl, msl)),
    }
