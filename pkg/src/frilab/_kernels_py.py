"""Pure numpy implementations of the exponential-sum kernels.

Used when the compiled extension is unavailable or when
``FRI_LAB_PURE_PYTHON`` is set.
"""

import numpy as np


def pulse_stream_coeffs(indices, pulse, amplitudes, delays, signal_period, n_periods):
    """Fourier coefficients of a (semi-)periodic pulse stream.

    ``x[q] = pulse[q] * sum_l exp(-2j pi q t_l / T0) sum_m a[l, m] exp(-2j pi q m / M)``
    """
    q = np.asarray(indices, dtype=float)[:, None]
    amplitudes = np.asarray(amplitudes, dtype=float)
    m = np.arange(amplitudes.shape[1])
    per_period = np.exp(-2j * np.pi * q * m[None, :] / n_periods) @ amplitudes.T
    delay_phase = np.exp(-2j * np.pi * q * np.asarray(delays)[None, :] / signal_period)
    return np.asarray(pulse) * np.sum(delay_phase * per_period, axis=1)


def fourier_series_eval(indices, coeffs, grid, period):
    """Partial Fourier sum ``sum_k coeffs[k] exp(2j pi k t / period)`` on a grid."""
    phase = 2j * np.pi * np.outer(np.asarray(grid, dtype=float), indices) / period
    return np.exp(phase) @ np.asarray(coeffs, dtype=complex)
