"""Pure-Python precoding kernel, the fallback when the compiled extension
is unavailable. Semantics match oddm_thp._precode_c exactly."""

import math

import numpy as np


def precode_kernel(x_t, h_shift, delays, cp_len, k_mod):
    """Successive ISI pre-cancellation with per-sample modulo wrapping.

    x_t      : complex128[nm] time sequence before precoding
    h_shift  : complex128[n_taps, nm]; h_shift[p, m] is tap p's gain at the
               time its echo of sample m was emitted (row 0 is the direct tap)
    delays   : int64[n_taps] delay bins, delays[0] == 0, strictly increasing
    cp_len   : zero-prefix length, >= delays[-1]
    k_mod    : modulo size K

    Returns (x_thp[cp_len+nm] with leading zeros, p[nm], q[nm], mac_count).
    """
    nm = x_t.shape[0]
    n_taps = h_shift.shape[0]
    x_thp = np.zeros(cp_len + nm, dtype=np.complex128)
    p_out = np.zeros(nm, dtype=np.int64)
    q_out = np.zeros(nm, dtype=np.int64)
    macs = 0
    for m in range(nm):
        acc = 0.0 + 0.0j
        for p in range(1, n_taps):
            acc += h_shift[p, m] * x_thp[cp_len + m - delays[p]]
            macs += 1
        ic = x_t[m] - acc / h_shift[0, m]
        pm = math.floor(ic.real / k_mod + 0.5)
        qm = math.floor(ic.imag / k_mod + 0.5)
        x_thp[cp_len + m] = complex(ic.real - pm * k_mod, ic.imag - qm * k_mod)
        p_out[m] = pm
        q_out[m] = qm
    return x_thp, p_out, q_out, macs
