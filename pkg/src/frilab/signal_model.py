"""Fourier-domain representation of periodic, semi-periodic and subspace FRI signals.

Every continuous-time object lives on a period ``T`` and is stored by its
Fourier series coefficients ``f(t) = sum_k f[k] exp(2j pi k t / T)``. Inner
products are Parseval sums ``<f, g> = T sum_k f[k] conj(g[k])``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .errors import ConfigError

_PERIOD_RTOL = 1e-12


def _readonly(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


class Model(enum.Enum):
    PERIODIC = "periodic"
    SEMIPERIODIC = "semiperiodic"
    SUBSPACE = "subspace"


@dataclass(frozen=True)
class FourierPulse:
    """A periodized pulse given by its nonzero Fourier coefficients.

    Parameters
    ----------
    period : float
        Period ``T`` on which the coefficients are defined.
    indices : array_like of int
        Frequency indices ``k``.
    values : array_like of complex
        Coefficients ``h[k]``. Exact zeros are dropped, so ``indices``
        always equals the support.
    """

    period: float
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if not self.period > 0:
            raise ConfigError(f"pulse period must be positive, got {self.period}")
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        val = np.asarray(self.values, dtype=complex).ravel()
        if idx.shape != val.shape:
            raise ConfigError("pulse indices and values differ in length")
        if len(np.unique(idx)) != len(idx):
            raise ConfigError("duplicate pulse frequency index")
        order = np.argsort(idx)
        idx, val = idx[order], val[order]
        keep = val != 0
        if not np.any(keep):
            raise ConfigError("pulse has an empty Fourier support")
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "indices", _readonly(idx[keep]))
        object.__setattr__(self, "values", _readonly(val[keep]))

    @property
    def support(self):
        return self.indices

    def coeff(self, k):
        """Coefficient at index ``k`` (0 outside the support)."""
        pos = np.searchsorted(self.indices, k)
        if pos < len(self.indices) and self.indices[pos] == k:
            return complex(self.values[pos])
        return 0j

    def restrict(self, indices):
        """Coefficients at arbitrary indices, zero where the pulse vanishes."""
        return _lookup(self.indices, self.values, indices)

    def is_real(self, rtol=1e-12):
        """True when ``h[-k] = conj(h[k])`` for every index pair."""
        mirrored = self.restrict(-self.indices)
        scale = max(np.max(np.abs(self.values)), 1e-300)
        return bool(np.all(np.abs(mirrored - np.conj(self.values)) <= rtol * scale))

    # -- built-in shapes ---------------------------------------------------

    @classmethod
    def flat(cls, bandwidth=200, period=1.0):
        """Low-pass filtered Dirac: ``h[k] = 1`` for ``|k| <= bandwidth``."""
        k = np.arange(-bandwidth, bandwidth + 1)
        return cls(period, k, np.ones(len(k)))

    @classmethod
    def lorentzian(cls, bandwidth=200, period=1.0, decay=0.01):
        """``h[k] = 1 / (1 + decay k^2)`` for ``|k| <= bandwidth``."""
        k = np.arange(-bandwidth, bandwidth + 1)
        return cls(period, k, 1.0 / (1.0 + decay * k.astype(float) ** 2))

    @classmethod
    def rect(cls, bandwidth=200, period=1.0, width=0.04):
        """Low-pass filtered rectangle of duration ``width``: ``P sinc(k P / T)``."""
        k = np.arange(-bandwidth, bandwidth + 1)
        return cls(period, k, width * np.sinc(k * width / period))

    @classmethod
    def from_dict(cls, spec):
        """Build from ``{"period", "coeffs": [[k, re, im], ...]}`` or a generator spec.

        Generator specs look like ``{"generator": "rect", "bandwidth": 200,
        "width": 0.04, "period": 1.0}``.
        """
        if "coeffs" in spec:
            rows = np.asarray(spec["coeffs"], dtype=float)
            if rows.ndim != 2 or rows.shape[1] != 3:
                raise ConfigError("pulse coeffs must be a list of [k, re, im] triples")
            if np.any(rows[:, 0] != np.round(rows[:, 0])):
                raise ConfigError("pulse frequency indices must be integers")
            return cls(spec.get("period", 1.0), rows[:, 0].astype(np.int64), rows[:, 1] + 1j * rows[:, 2])
        name = spec.get("generator")
        builders = {"flat": cls.flat, "lorentzian": cls.lorentzian, "rect": cls.rect}
        if name not in builders:
            raise ConfigError(f"unknown pulse generator {name!r}; expected one of {sorted(builders)}")
        kwargs = {k: v for k, v in spec.items() if k != "generator"}
        try:
            return builders[name](**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for pulse {name!r}: {exc}") from None

    def to_dict(self):
        return {
            "period": self.period,
            "coeffs": [[int(k), float(v.real), float(v.imag)] for k, v in zip(self.indices, self.values)],
        }

    def time_support(self, rel_tol=1e-3, grid_size=8192):
        """Interval ``(t_a, t_b)`` around 0 outside which ``|h(t)| < rel_tol * max|h|``.

        The pulse is assumed centered at ``t = 0``; the returned bounds are
        signed offsets within ``(-T/2, T/2]``.
        """
        t = (np.arange(grid_size) / grid_size - 0.5) * self.period
        vals = np.abs(_core.fourier_series_eval(self.indices, self.values, t, self.period))
        above = np.nonzero(vals >= rel_tol * vals.max())[0]
        return float(t[above[0]]), float(t[above[-1]])


@dataclass(frozen=True)
class SubspaceBasis:
    """Generators ``g_1..g_K`` of a finite-dimensional signal space.

    ``generators[i, j]`` is the Fourier coefficient of ``g_j`` at ``indices[i]``.
    """

    period: float
    indices: np.ndarray
    generators: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        gen = np.asarray(self.generators, dtype=complex)
        if gen.ndim != 2 or gen.shape[0] != len(idx):
            raise ConfigError("generator matrix must have one row per frequency index")
        order = np.argsort(idx)
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "indices", _readonly(idx[order]))
        object.__setattr__(self, "generators", _readonly(gen[order]))

    @property
    def K(self):
        return self.generators.shape[1]

    def gram(self):
        """``G*G`` with entries ``<g_j, g_i>``."""
        g = self.generators
        return self.period * (g.conj().T @ g)


@dataclass(frozen=True)
class PulseStreamTheta:
    """Parameter vector of a pulse-stream or subspace signal.

    For ``PERIODIC`` signals ``amplitudes`` has shape ``(L,)``; for
    ``SEMIPERIODIC`` it has shape ``(L, M)`` with ``a[l, m]`` the amplitude
    of path ``l`` in probing period ``m``; for ``SUBSPACE`` it is the
    coefficient vector. Delays are stored modulo the short period ``T``.
    """

    model: Model
    amplitudes: np.ndarray
    delays: np.ndarray | None = None
    period: float | None = None
    n_periods: int = 1
    no_overlap: bool | None = field(default=None, compare=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        if self.model is Model.SUBSPACE:
            object.__setattr__(self, "amplitudes", _readonly(amps.ravel()))
            return
        if self.period is None or not self.period > 0:
            raise ConfigError("pulse-stream period must be positive")
        if self.n_periods < 1:
            raise ConfigError("number of periods must be at least 1")
        delays = np.asarray(self.delays, dtype=float).ravel()
        if self.model is Model.PERIODIC:
            if self.n_periods != 1:
                raise ConfigError("periodic model has a single period")
            amps = amps.reshape(-1)
        else:
            amps = np.atleast_2d(amps)
            if amps.shape[1] != self.n_periods:
                raise ConfigError(f"amplitude matrix must be L x M with M={self.n_periods}")
        if amps.shape[0] != len(delays) or len(delays) == 0:
            raise ConfigError("need one delay per pulse")
        if not np.all(np.isfinite(delays)):
            raise ConfigError("delays must be finite")
        delays = np.mod(delays, self.period)
        delays[delays >= self.period] = 0.0
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "amplitudes", _readonly(amps))
        object.__setattr__(self, "delays", _readonly(delays))

    # -- constructors ------------------------------------------------------

    @classmethod
    def periodic(cls, amplitudes, delays, period=1.0):
        return cls(Model.PERIODIC, amplitudes, delays, period, 1)

    @classmethod
    def semiperiodic(cls, amplitudes, delays, period, support=None):
        """Semi-periodic stream on ``M = amplitudes.shape[1]`` periods of length ``period``.

        ``support`` is the pulse's ``(t_a, t_b)``; when given, the
        no-overlap condition (every shifted pulse ``[t_l + t_a, t_l + t_b]``
        lies inside ``[0, T]``) is evaluated and stored in ``no_overlap``.
        """
        amps = np.atleast_2d(np.asarray(amplitudes, dtype=float))
        flag = None
        if support is not None:
            t_a, t_b = support
            d = np.mod(np.asarray(delays, dtype=float), period)
            flag = bool(np.min(d) + t_a >= 0 and np.max(d) + t_b <= period)
        return cls(Model.SEMIPERIODIC, amps, delays, period, amps.shape[1], flag)

    @classmethod
    def subspace(cls, coefficients):
        return cls(Model.SUBSPACE, coefficients)

    # -- shape -------------------------------------------------------------

    @property
    def L(self):
        if self.model is Model.SUBSPACE:
            return 0
        return len(self.delays)

    @property
    def M(self):
        return self.n_periods

    @property
    def K(self):
        if self.model is Model.SUBSPACE:
            return len(self.amplitudes)
        return self.amplitudes.size + self.L

    @property
    def signal_period(self):
        """Period of the Fourier representation: ``T`` or ``T0 = M T``."""
        if self.model is Model.SUBSPACE:
            return None
        return self.period * self.n_periods

    def amplitude_matrix(self):
        """Amplitudes as an ``(L, M)`` array."""
        return self.amplitudes.reshape(self.L, self.n_periods)

    def as_vector(self):
        """Flat parameter vector: amplitudes (path-major) then delays."""
        if self.model is Model.SUBSPACE:
            return np.array(self.amplitudes)
        return np.concatenate([self.amplitudes.ravel(), self.delays])

    def with_vector(self, vec):
        """A copy with parameters replaced by the flat vector ``vec``."""
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.K,):
            raise ConfigError(f"expected a parameter vector of length {self.K}")
        if self.model is Model.SUBSPACE:
            return PulseStreamTheta.subspace(vec)
        n_amp = self.amplitudes.size
        return PulseStreamTheta(
            self.model, vec[:n_amp].reshape(self.amplitudes.shape), vec[n_amp:], self.period, self.n_periods, self.no_overlap
        )

    def sorted(self):
        """Pulses reordered by ascending delay."""
        if self.model is Model.SUBSPACE:
            return self
        order = np.argsort(self.delays, kind="stable")
        return PulseStreamTheta(
            self.model, self.amplitudes[order], self.delays[order], self.period, self.n_periods, self.no_overlap
        )

    def to_dict(self):
        out = {"model": self.model.value, "amplitudes": self.amplitudes.tolist()}
        if self.model is not Model.SUBSPACE:
            out.update(delays=self.delays.tolist(), period=self.period)
            if self.model is Model.SEMIPERIODIC:
                out.update(n_periods=self.n_periods, no_overlap=self.no_overlap)
        return out

    @classmethod
    def from_dict(cls, spec):
        try:
            model = Model(spec.get("model", "periodic"))
        except ValueError:
            raise ConfigError(f"unknown signal model {spec.get('model')!r}") from None
        if model is Model.SUBSPACE:
            return cls.subspace(spec["amplitudes"])
        try:
            if model is Model.PERIODIC:
                return cls.periodic(spec["amplitudes"], spec["delays"], spec.get("period", 1.0))
            return cls.semiperiodic(spec["amplitudes"], spec["delays"], spec["period"])
        except KeyError as exc:
            raise ConfigError(f"theta is missing field {exc}") from None


@dataclass(frozen=True)
class FourierCoeffVector:
    """Fourier coefficients ``x[k]`` of a signal on ``[0, period)``."""

    period: float
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        val = np.asarray(self.values, dtype=complex).ravel()
        if idx.shape != val.shape:
            raise ConfigError("coefficient indices and values differ in length")
        order = np.argsort(idx)
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "indices", _readonly(idx[order]))
        object.__setattr__(self, "values", _readonly(val[order]))

    def restrict(self, indices):
        return _lookup(self.indices, self.values, indices)

    def energy(self):
        """``||x||^2 = T sum |x[k]|^2``."""
        return self.period * float(np.sum(np.abs(self.values) ** 2))

    def is_conjugate_symmetric(self, rtol=1e-10):
        mirrored = self.restrict(-self.indices)
        scale = max(np.max(np.abs(self.values), initial=0.0), 1e-300)
        return bool(np.all(np.abs(mirrored - np.conj(self.values)) <= rtol * scale))


@dataclass(frozen=True)
class JacobianMatrix:
    """Fourier coordinates of the derivative of the signal map.

    ``matrix[i, j]`` is the coefficient at ``indices[i]`` of the derivative
    of the signal with respect to parameter ``j``.
    """

    period: float
    indices: np.ndarray
    matrix: np.ndarray
    names: tuple = ()

    @property
    def K(self):
        return self.matrix.shape[1]

    def restrict(self, indices):
        """Rows at arbitrary indices (zero rows where the signal has no content)."""
        indices = np.asarray(indices, dtype=np.int64)
        out = np.zeros((len(indices), self.K), dtype=complex)
        pos = np.searchsorted(self.indices, indices)
        pos_c = np.minimum(pos, len(self.indices) - 1)
        hit = self.indices[pos_c] == indices
        out[hit] = self.matrix[pos_c[hit]]
        return out

    def zero_columns(self, atol=0.0):
        return np.nonzero(np.all(np.abs(self.matrix) <= atol, axis=0))[0]


def _lookup(src_idx, src_val, indices):
    indices = np.asarray(indices, dtype=np.int64)
    out = np.zeros(indices.shape, dtype=complex)
    if len(src_idx) == 0:
        return out
    pos = np.searchsorted(src_idx, indices)
    pos_c = np.minimum(pos, len(src_idx) - 1)
    hit = src_idx[pos_c] == indices
    out[hit] = src_val[pos_c[hit]]
    return out


def _check_period(theta, pulse):
    expected = theta.signal_period
    if abs(pulse.period - expected) > _PERIOD_RTOL * expected:
        raise ConfigError(
            f"pulse is defined on period {pulse.period} but the {theta.model.value} "
            f"signal needs period {expected}"
        )


def synthesize_fourier(theta, pulse):
    """Fourier coefficients of the signal described by ``theta``.

    Parameters
    ----------
    theta : PulseStreamTheta
    pulse : FourierPulse or SubspaceBasis
        The known pulse on the signal period (``T`` for periodic, ``M T``
        for semi-periodic streams), or the generators of a subspace model.

    Returns
    -------
    FourierCoeffVector
    """
    if theta.model is Model.SUBSPACE:
        if not isinstance(pulse, SubspaceBasis):
            raise ConfigError("subspace model needs a SubspaceBasis")
        if pulse.K != theta.K:
            raise ConfigError(f"basis has {pulse.K} generators but theta has {theta.K} coefficients")
        return FourierCoeffVector(pulse.period, pulse.indices, pulse.generators @ theta.amplitudes)
    if not isinstance(pulse, FourierPulse):
        raise ConfigError("pulse-stream models need a FourierPulse")
    _check_period(theta, pulse)
    vals = _core.pulse_stream_coeffs(
        np.ascontiguousarray(pulse.indices, dtype=np.int64),
        np.ascontiguousarray(pulse.values, dtype=complex),
        np.ascontiguousarray(theta.amplitude_matrix(), dtype=float),
        np.ascontiguousarray(theta.delays, dtype=float),
        theta.signal_period,
        theta.n_periods,
    )
    return FourierCoeffVector(pulse.period, pulse.indices, vals)


def evaluate_time(coeffs, grid):
    """Evaluate the Fourier series at the time points ``grid``.

    Returns real values when the coefficients are conjugate-symmetric.
    """
    grid = np.ascontiguousarray(np.atleast_1d(np.asarray(grid, dtype=float)))
    vals = _core.fourier_series_eval(
        np.ascontiguousarray(coeffs.indices, dtype=np.int64),
        np.ascontiguousarray(coeffs.values, dtype=complex),
        grid,
        coeffs.period,
    )
    if coeffs.is_conjugate_symmetric():
        scale = max(1.0, float(np.sum(np.abs(coeffs.values))))
        residue = float(np.max(np.abs(vals.imag), initial=0.0))
        assert residue < 1e-10 * scale, f"imaginary residue {residue} on a real signal"
        return vals.real
    return vals


def jacobian_fourier(theta, pulse):
    """Derivative of the Fourier coefficients with respect to ``theta``.

    Column order matches :meth:`PulseStreamTheta.as_vector`.
    """
    if theta.model is Model.SUBSPACE:
        if not isinstance(pulse, SubspaceBasis) or pulse.K != theta.K:
            raise ConfigError("subspace model needs a matching SubspaceBasis")
        names = tuple(f"c{i}" for i in range(theta.K))
        return JacobianMatrix(pulse.period, pulse.indices, np.array(pulse.generators), names)
    _check_period(theta, pulse)
    T0 = theta.signal_period
    M = theta.n_periods
    q = pulse.indices.astype(float)
    h = pulse.values
    delay_phase = np.exp(-2j * np.pi * np.outer(q, theta.delays) / T0)
    period_phase = np.exp(-2j * np.pi * np.outer(q, np.arange(M)) / M)
    amps = theta.amplitude_matrix()

    base = h[:, None, None] * delay_phase[:, :, None] * period_phase[:, None, :]
    amp_cols = base.reshape(len(q), -1)
    weights = period_phase @ amps.T
    delay_cols = (h * (-2j * np.pi * q / T0))[:, None] * delay_phase * weights
    if M == 1:
        names = tuple(f"a{l}" for l in range(theta.L))
    else:
        names = tuple(f"a{l}[{m}]" for l in range(theta.L) for m in range(M))
    names += tuple(f"t{l}" for l in range(theta.L))
    return JacobianMatrix(pulse.period, pulse.indices, np.hstack([amp_cols, delay_cols]), names)


def rate_of_innovation(model_class, **params):
    """Local rate of innovation (parameters per second) of a signal class.

    Parameters
    ----------
    model_class : {"shift_invariant", "single_burst", "periodic", "semiperiodic"}
    **params
        ``shift_invariant``: ``period``, ``n_periods`` (M), ``support_width``
        (``t_b - t_a``). ``single_burst``/``periodic``: ``L``, ``window``
        (T0). ``semiperiodic``: ``L``, ``period``, ``n_periods``,
        ``support_width``.
    """

    def need(name):
        if name not in params:
            raise ConfigError(f"rate of innovation for {model_class!r} needs {name!r}")
        return params[name]

    if model_class in ("single_burst", "periodic"):
        L, window = need("L"), need("window")
        if window <= 0:
            raise ConfigError("window length must be positive")
        return 2.0 * L / window
    if model_class in ("shift_invariant", "semiperiodic"):
        T, M, width = need("period"), need("n_periods"), need("support_width")
        if T <= 0 or M <= 0:
            raise ConfigError("period and number of periods must be positive")
        overlap = math.ceil(width / T)
        if model_class == "shift_invariant":
            return (1.0 / T) * (1.0 + overlap / M)
        return (need("L") / T) * (1.0 + (1 + overlap) / M)
    raise ConfigError(f"unknown signal class {model_class!r}")
