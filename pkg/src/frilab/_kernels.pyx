# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled exponential-sum kernels.

Mirrors :mod:`frilab._kernels_py` function for function; the two are
checked against each other in the test suite.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, cos, sin

cnp.import_array()

# phase recurrence is re-seeded from libm this often to bound drift
cdef enum:
    RESEED = 32


def pulse_stream_coeffs(const long long[::1] indices,
                        const double complex[::1] pulse,
                        const double[:, ::1] amplitudes,
                        const double[::1] delays,
                        double signal_period,
                        long long n_periods):
    """Fourier coefficients of a (semi-)periodic pulse stream."""
    cdef Py_ssize_t n_idx = indices.shape[0]
    cdef Py_ssize_t n_pulses = amplitudes.shape[0]
    cdef Py_ssize_t n_per = amplitudes.shape[1]
    cdef Py_ssize_t i, l, m
    cdef long long r, qmod
    cdef double q, ph, re_s, im_s, re_acc, im_acc, c, s
    cdef double two_pi = 2.0 * M_PI
    # per-period phases exp(-2j pi q m / M) only depend on (q m) mod M
    table = np.exp(-2j * np.pi * np.arange(n_periods) / n_periods)
    cdef double[::1] cos_tab = np.ascontiguousarray(table.real)
    cdef double[::1] sin_tab = np.ascontiguousarray(table.imag)
    out = np.empty(n_idx, dtype=np.complex128)
    cdef double complex[::1] view = out
    for i in range(n_idx):
        q = <double> indices[i]
        qmod = indices[i] % n_periods
        if qmod < 0:
            qmod = qmod + n_periods
        re_acc = 0.0
        im_acc = 0.0
        for l in range(n_pulses):
            re_s = 0.0
            im_s = 0.0
            r = 0
            for m in range(n_per):
                re_s = re_s + amplitudes[l, m] * cos_tab[r]
                im_s = im_s + amplitudes[l, m] * sin_tab[r]
                r = r + qmod
                if r >= n_periods:
                    r = r - n_periods
            ph = -two_pi * q * delays[l] / signal_period
            c = cos(ph)
            s = sin(ph)
            re_acc = re_acc + c * re_s - s * im_s
            im_acc = im_acc + c * im_s + s * re_s
        view[i] = pulse[i] * (re_acc + 1j * im_acc)
    return out


def fourier_series_eval(const long long[::1] indices,
                        const double complex[::1] coeffs,
                        const double[::1] grid,
                        double period):
    """Partial Fourier sum sum_k coeffs[k] exp(j 2 pi k t / period) on a grid."""
    cdef Py_ssize_t n_idx = indices.shape[0]
    cdef Py_ssize_t n_grid = grid.shape[0]
    cdef Py_ssize_t g, i
    cdef double w, ph, re_r, im_r, re_step, im_step, tmp
    cdef double re_acc, im_acc
    cdef long long gap
    out = np.empty(n_grid, dtype=np.complex128)
    cdef double complex[::1] view = out
    for g in range(n_grid):
        w = 2.0 * M_PI * grid[g] / period
        re_step = cos(w)
        im_step = sin(w)
        re_acc = 0.0
        im_acc = 0.0
        re_r = 0.0
        im_r = 0.0
        for i in range(n_idx):
            if i == 0 or i % RESEED == 0:
                ph = w * indices[i]
                re_r = cos(ph)
                im_r = sin(ph)
            else:
                gap = indices[i] - indices[i - 1]
                if gap == 1:
                    tmp = re_r * re_step - im_r * im_step
                    im_r = re_r * im_step + im_r * re_step
                    re_r = tmp
                else:
                    ph = w * indices[i]
                    re_r = cos(ph)
                    im_r = sin(ph)
            re_acc = re_acc + coeffs[i].real * re_r - coeffs[i].imag * im_r
            im_acc = im_acc + coeffs[i].real * im_r + coeffs[i].imag * re_r
        view[g] = re_acc + 1j * im_acc
    return out
