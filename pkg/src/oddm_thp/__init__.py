"""Delay-Doppler multicarrier simulator with time-domain Tomlinson-Harashima
precoding, Monte-Carlo BER measurement, and closed-form BER lower bounds."""

from .core import GridConfig, SeedPlan, TimeSequence, devectorize, vectorize
from .channel import (
    ChannelRealization,
    PathTap,
    ProfileSpec,
    apply_channel,
    draw_channel,
    eva_profile,
    first_tap_power,
    hsr_profile,
    preset,
    single_path_profile,
)
from .modem import (
    PulseConfig,
    add_prefix,
    build_h_dd,
    matched_filter_sample,
    oddm_demodulate,
    oddm_modulate,
    pulse_shape,
    remove_prefix,
    srrc_taps,
)
from .qam import Constellation, demap, energy, map_bits
from .thp import ThpConfig, WrapRecord, mod_k, precode, run_thp_frame, single_tap_equalize, thp_decode
from .analysis import BoundParams, evaluate_bounds, q_func, rayleigh_pairwise
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
