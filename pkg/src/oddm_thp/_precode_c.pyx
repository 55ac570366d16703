# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled precoding kernel. Same contract as oddm_thp._precode_py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def precode_kernel(cnp.ndarray[cnp.complex128_t, ndim=1] x_t,
                   cnp.ndarray[cnp.complex128_t, ndim=2] h_shift,
                   cnp.ndarray[cnp.int64_t, ndim=1] delays,
                   int cp_len,
                   double k_mod):
    cdef Py_ssize_t nm = x_t.shape[0]
    cdef Py_ssize_t n_taps = h_shift.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] x_thp = np.zeros(cp_len + nm, dtype=np.complex128)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] p_out = np.zeros(nm, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] q_out = np.zeros(nm, dtype=np.int64)

    cdef Py_ssize_t m, p
    cdef double complex acc, ic, h1
    cdef double pm, qm
    cdef long long macs = 0

    for m in range(nm):
        acc = 0
        for p in range(1, n_taps):
            acc = acc + h_shift[p, m] * x_thp[cp_len + m - delays[p]]
            macs += 1
        h1 = h_shift[0, m]
        ic = x_t[m] - acc / h1
        pm = floor(ic.real / k_mod + 0.5)
        qm = floor(ic.imag / k_mod + 0.5)
        x_thp[cp_len + m] = (ic.real - pm * k_mod) + 1j * (ic.imag - qm * k_mod)
        p_out[m] = <long long>pm
        q_out[m] = <long long>qm
    return x_thp, p_out, q_out, int(macs)
