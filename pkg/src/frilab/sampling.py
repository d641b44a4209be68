"""Sampling kernels, their Gramians, and the continuous/digital noise model.

A kernel set is stored in *analysis form*: row ``n`` of ``mixing`` holds
``B[n, f]`` such that the sample of a signal ``x`` is
``<x, s_n> = T sum_f B[n, f] x[f]``. The kernel itself is therefore
``s_n(t) = sum_f conj(B[n, f]) exp(2j pi f t / T)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, DegenerateSchemeError

RANK_TOL = 1e-12


def make_rng(seed, trial=0):
    """Counter-based generator for trial ``trial`` of run ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed) + int(trial)))


@dataclass(frozen=True)
class NoiseSpec:
    """Continuous-time noise level ``sigma_c`` and digital noise level ``sigma_d``."""

    sigma_c: float = 0.0
    sigma_d: float = 0.0

    def __post_init__(self):
        if self.sigma_c < 0 or self.sigma_d < 0:
            raise ConfigError("noise standard deviations must be non-negative")

    @classmethod
    def from_dict(cls, spec):
        return cls(float(spec.get("sigma_c", 0.0)), float(spec.get("sigma_d", 0.0)))


@dataclass(frozen=True)
class SamplingScheme:
    """A finite set of kernels spanned by complex exponentials.

    Parameters
    ----------
    base_period : float
        Period ``T`` of the exponentials ``exp(2j pi f t / T)``.
    freqs : array_like of int
        Sorted, distinct frequency indices ``F``.
    mixing : ndarray, shape (N, len(F))
        Analysis-form mixing matrix (see module docstring).
    kind : {"exponential", "trig", "custom"}
    """

    base_period: float
    freqs: np.ndarray
    mixing: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        if not self.base_period > 0:
            raise ConfigError("scheme period must be positive")
        freqs = np.asarray(self.freqs, dtype=np.int64).ravel()
        mix = np.atleast_2d(np.asarray(self.mixing, dtype=complex))
        if len(np.unique(freqs)) != len(freqs):
            raise ConfigError("scheme frequencies must be distinct")
        if mix.shape[1] != len(freqs):
            raise ConfigError(f"mixing has {mix.shape[1]} columns for {len(freqs)} frequencies")
        order = np.argsort(freqs)
        freqs, mix = freqs[order], mix[:, order]
        freqs.setflags(write=False)
        mix.setflags(write=False)
        object.__setattr__(self, "base_period", float(self.base_period))
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "mixing", mix)
        self.gram()  # raises on linearly dependent kernels

    # -- constructors ------------------------------------------------------

    @classmethod
    def exponential(cls, freqs, period=1.0):
        """Pure exponentials ``s_n(t) = exp(2j pi f_n t / T)``."""
        freqs = np.sort(np.asarray(freqs, dtype=np.int64))
        return cls(period, freqs, np.eye(len(freqs)), "exponential")

    @classmethod
    def contiguous(cls, n_samples, period=1.0):
        """Exponentials at ``{-floor(N/2), ..., floor(N/2)}``."""
        half = int(n_samples) // 2
        return cls.exponential(np.arange(-half, half + 1), period)

    @classmethod
    def trig(cls, positive_freqs, period=1.0, include_dc=True):
        """Real kernels ``1, cos(2 pi p t / T), sin(2 pi p t / T)``.

        Rows are ordered DC, all cosines, all sines.
        """
        pos = np.sort(np.asarray(positive_freqs, dtype=np.int64))
        if np.any(pos <= 0):
            raise ConfigError("trig frequencies must be positive (DC is added separately)")
        freqs = np.concatenate([-pos[::-1], [0] if include_dc else [], pos]).astype(np.int64)
        col = {int(f): i for i, f in enumerate(freqs)}
        rows = []
        if include_dc:
            r = np.zeros(len(freqs), dtype=complex)
            r[col[0]] = 1.0
            rows.append(r)
        for p in pos:
            r = np.zeros(len(freqs), dtype=complex)
            r[col[p]] = r[col[-p]] = 0.5
            rows.append(r)
        for p in pos:
            r = np.zeros(len(freqs), dtype=complex)
            r[col[p]] = 0.5j
            r[col[-p]] = -0.5j
            rows.append(r)
        return cls(period, freqs, np.array(rows), "trig")

    @classmethod
    def custom(cls, freqs, mixing, period=1.0):
        return cls(period, freqs, mixing, "custom")

    @classmethod
    def from_dict(cls, spec, period=1.0):
        """Build from ``{"type": "exponential"|"trig"|"custom", "freqs": [...], "mixing": ...}``.

        For ``custom`` schemes ``mixing`` is a list of rows, each entry a
        number or a ``[re, im]`` pair.
        """
        kind = spec.get("type", "exponential")
        period = float(spec.get("period", period))
        if "freqs" not in spec:
            raise ConfigError("scheme config needs 'freqs'")
        freqs = spec["freqs"]
        if kind == "exponential":
            return cls.exponential(freqs, period)
        if kind == "trig":
            pos = [f for f in freqs if f > 0]
            return cls.trig(pos, period, include_dc=0 in freqs)
        if kind == "custom":
            if "mixing" not in spec:
                raise ConfigError("custom scheme needs a 'mixing' matrix")
            return cls.custom(freqs, _parse_complex_matrix(spec["mixing"]), period)
        raise ConfigError(f"unknown scheme type {kind!r}")

    def to_dict(self):
        out = {"type": self.kind, "period": self.base_period, "freqs": self.freqs.tolist()}
        if self.kind == "custom":
            out["mixing"] = [[[float(v.real), float(v.imag)] for v in row] for row in self.mixing]
        elif self.kind == "trig":
            out["freqs"] = [int(f) for f in self.freqs if f >= 0]
        return out

    # -- properties --------------------------------------------------------

    @property
    def N(self):
        return self.mixing.shape[0]

    @property
    def is_contiguous(self):
        return bool(np.all(np.diff(self.freqs) == 1))

    def with_mixing(self, transform):
        """Kernels ``B' = transform @ B`` on the same frequencies."""
        return SamplingScheme(self.base_period, self.freqs, np.asarray(transform) @ self.mixing, "custom")

    def _closed_embedding(self):
        closed = np.union1d(self.freqs, -self.freqs)
        B = np.zeros((self.N, len(closed)), dtype=complex)
        B[:, np.searchsorted(closed, self.freqs)] = self.mixing
        return closed, B, np.searchsorted(closed, -closed)

    @cached_property
    def real_rows_mask(self):
        """Per kernel: True when the kernel is a real-valued function."""
        _, B, rev = self._closed_embedding()
        tol = 1e-14 * np.max(np.abs(B), axis=1)
        return np.all(np.abs(B[:, rev] - np.conj(B)) <= tol[:, None], axis=1)

    @property
    def is_real(self):
        return bool(np.all(self.real_rows_mask))

    def gram(self):
        """``S*S`` with entries ``<s_j, s_i> = T (B B^H)[i, j]``.

        Raises
        ------
        DegenerateSchemeError
            If the kernels are linearly dependent.
        """
        g = self.base_period * (self.mixing @ self.mixing.conj().T)
        s = np.linalg.svd(self.mixing, compute_uv=False)
        if len(s) < self.N or s[-1] <= RANK_TOL * s[0]:
            raise DegenerateSchemeError(f"kernels are linearly dependent (rank < {self.N})")
        return g

    def real_form(self, pair_to_trig=True):
        """Real-valued equivalent of the scheme for real signals.

        Returns
        -------
        rows : ndarray, shape (R, len(freqs_closed))
            Analysis rows producing real samples of real signals.
        freqs_closed : ndarray
            ``F`` united with ``-F``.
        digital_var : ndarray, shape (R,)
            Digital noise variance of each real sample in units of
            ``sigma_d^2``.

        With ``pair_to_trig``, exponential schemes on a conjugate-closed
        frequency set map onto the equivalent trig kernels; this is exact
        without digital noise. Otherwise complex kernels split into the
        real and imaginary parts of their samples, each carrying half of
        the (circular) digital noise.
        """
        closed, B, rev = self._closed_embedding()
        if pair_to_trig and self.kind == "exponential" and len(closed) == len(self.freqs):
            trig = SamplingScheme.trig(self.freqs[self.freqs > 0], self.base_period, include_dc=0 in self.freqs)
            return trig.real_form()
        re_rows = 0.5 * (B + np.conj(B[:, rev]))
        im_rows = -0.5j * (B - np.conj(B[:, rev]))
        real_kernel = self.real_rows_mask
        rows, var = [], []
        for n in range(self.N):
            if real_kernel[n]:
                rows.append(re_rows[n])
                var.append(1.0)
            else:
                rows.extend([re_rows[n], im_rows[n]])
                var.extend([0.5, 0.5])
        return np.array(rows), closed, np.array(var)


def _parse_complex_matrix(rows):
    out = []
    for row in rows:
        vals = []
        for v in row:
            if isinstance(v, (list, tuple)):
                vals.append(complex(v[0], v[1]))
            else:
                vals.append(complex(v))
        out.append(vals)
    return np.array(out, dtype=complex)


def _check_period(x, scheme):
    if abs(x.period - scheme.base_period) > 1e-12 * scheme.base_period:
        raise ConfigError(f"signal period {x.period} differs from scheme period {scheme.base_period}")


def measurement_mean(x, scheme):
    """Noise-free samples ``mu_n = <x, s_n>``."""
    _check_period(x, scheme)
    return scheme.base_period * (scheme.mixing @ x.restrict(scheme.freqs))


def noise_batch(scheme, noise, rng, size=1):
    """``size`` independent noise vectors, shape ``(size, N)``.

    The continuous part is drawn as exact Fourier coefficients
    ``<w, exp(2j pi k t / T)>`` of real white noise on the conjugate-closed
    frequency set and mapped through the mixing matrix, which gives the
    covariance ``sigma_c^2 S*S`` without factorizing it.
    """
    T = scheme.base_period
    n = np.zeros((size, scheme.N), dtype=complex)
    if noise.sigma_c > 0:
        pos = np.unique(np.abs(scheme.freqs))
        draws = rng.standard_normal((size, len(pos), 2))
        scale = noise.sigma_c * np.sqrt(T)
        omega = np.where(pos == 0, scale * draws[..., 0], scale * (draws[..., 0] + 1j * draws[..., 1]) / np.sqrt(2.0))
        col = np.searchsorted(pos, np.abs(scheme.freqs))
        w = omega[:, col]
        w = np.where(scheme.freqs < 0, np.conj(w), w)
        n += w @ scheme.mixing.T
    if noise.sigma_d > 0:
        draws = rng.standard_normal((size, scheme.N, 2))
        cplx = (draws[..., 0] + 1j * draws[..., 1]) / np.sqrt(2.0)
        n += noise.sigma_d * np.where(scheme.real_rows_mask, draws[..., 0], cplx)
    return n


def sample_noisy(x, scheme, noise, seed, trial=0):
    """Noisy samples ``c = mu + n`` for trial ``trial`` of run ``seed``.

    The continuous-noise part is the projection of real white noise onto
    the kernels, so its covariance is ``sigma_c^2 S*S``; digital noise is
    white with variance ``sigma_d^2`` (real for real kernels, circular
    complex otherwise). Real schemes acting on real signals return real
    arrays.
    """
    mu = measurement_mean(x, scheme)
    c = mu + noise_batch(scheme, noise, make_rng(seed, trial))[0]
    if scheme.is_real and x.is_conjugate_symmetric():
        return c.real
    return c
