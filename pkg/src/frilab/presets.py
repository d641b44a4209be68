"""Named experiment configurations.

The ``*401`` presets use 401 Fourier coefficients on ``T = 1``; the ``*41``
variants use 41 coefficients and run in seconds. Random parameters of the
ten-pulse periodic stream and the semi-periodic stream are drawn once from
``PRESET_SEED`` and stored in the config, so the config hash covers them.
"""

from __future__ import annotations

import copy

import numpy as np

from .errors import ConfigError
from .signal_model import FourierPulse

DEFAULT_AMPLITUDES = [0.3204, 0.6063]
DEFAULT_DELAYS = [0.6678, 0.9863]
PRESET_SEED = 2011
RECT_WIDTH = 0.04


def _theta():
    return {"model": "periodic", "amplitudes": list(DEFAULT_AMPLITUDES), "delays": list(DEFAULT_DELAYS), "period": 1.0}


def _crb_vs_n(generator, bandwidth, grid, sigma_c, trials, extra=None):
    pulse = {"generator": generator, "bandwidth": bandwidth, "period": 1.0}
    pulse.update(extra or {})
    return {
        "schema": "v1",
        "experiment": "crb_vs_n",
        "pulse": pulse,
        "theta": _theta(),
        "noise": {"sigma_c": sigma_c, "sigma_d": 0.0},
        "N_grid": grid,
        "trials": trials,
        "seed": 1,
        "estimator": "pencil",
    }


GRID_401 = [5, 9, 21, 41, 81, 161, 241, 321, 401]
GRID_41 = [5, 7, 9, 13, 17, 21, 25, 29, 33, 37, 41]


def _spacing(bandwidth, trials):
    coarse = np.round(np.linspace(0.3, 0.7, 81), 6)
    close = 0.5 + np.array([-1e-3, -1e-4, -1e-5, -1e-6, 1e-6, 1e-5, 1e-4, 1e-3])
    grid = sorted({float(t) for t in np.concatenate([coarse, close]) if t != 0.5})
    return {
        "schema": "v1",
        "experiment": "pulse_spacing",
        "pulse": {"generator": "lorentzian", "bandwidth": bandwidth, "period": 1.0},
        "amplitudes": list(DEFAULT_AMPLITUDES),
        "t1": 0.5,
        "t2_grid": grid,
        "N": 9,
        "noise": {"sigma_c": 1e-3, "sigma_d": 0.0},
        "trials": trials,
        "seed": 1,
        "estimator": "pencil",
    }


def _pvs(bandwidth):
    rng = np.random.default_rng(PRESET_SEED)
    pulse = FourierPulse.lorentzian(bandwidth, 1.0)
    t_a, t_b = pulse.time_support()
    # ten pulses inside (t_a, T - t_b) so that no pulse wraps around the period;
    # short pulses whose ringing fills the period fall back to [0.05, 0.95]
    lo, hi = round(-t_a, 3), round(1.0 - t_b, 3)
    if hi - lo < 0.5:
        lo, hi = 0.05, 0.95
    delays_p = np.sort(rng.uniform(lo, hi, 10))
    amps_p = rng.uniform(0.2, 1.0, 10)
    T, M = 1.0 / 9.0, 9
    delays_s = np.sort(rng.uniform(0.2 * T, 0.8 * T, 2))
    amps_s = rng.uniform(0.2, 1.0, (2, M))
    return {
        "schema": "v1",
        "experiment": "periodic_vs_semiperiodic",
        "pulse": {"generator": "lorentzian", "bandwidth": bandwidth, "period": 1.0},
        "periodic": {"amplitudes": amps_p.tolist(), "delays": delays_p.tolist()},
        "semiperiodic": {"period": T, "amplitudes": amps_s.tolist(), "delays": delays_s.tolist()},
        "noise": {"sigma_c": 1e-5, "sigma_d": 0.0},
        "N_grid": [21, 23, 25, 31, 41, 61, 81, 121, 161, 201, 281, 401] if bandwidth == 200 else [21, 25, 29, 33, 37, 41],
        "trials": 1,
        "seed": PRESET_SEED,
        "estimator": "none",
    }


_BUILDERS = {
    "flat401": ("flat pulse, 401 coefficients, sigma_c=1e-5", lambda: _crb_vs_n("flat", 200, GRID_401, 1e-5, 200)),
    "lorentzian401": (
        "lorentzian pulse 1/(1+0.01k^2), 401 coefficients, sigma_c=1e-5",
        lambda: _crb_vs_n("lorentzian", 200, GRID_401, 1e-5, 200),
    ),
    "rect401": (
        "low-passed rectangle of width 0.04, 401 coefficients, sigma_c=1e-5",
        lambda: _crb_vs_n("rect", 200, GRID_401, 1e-5, 200, {"width": RECT_WIDTH}),
    ),
    "flat41": ("flat pulse, 41 coefficients, sigma_c=1e-5", lambda: _crb_vs_n("flat", 20, GRID_41, 1e-5, 200)),
    "lorentzian41": ("lorentzian pulse, 41 coefficients, sigma_c=1e-5", lambda: _crb_vs_n("lorentzian", 20, GRID_41, 1e-5, 200)),
    "rect41": (
        "low-passed rectangle of width 0.04, 41 coefficients, sigma_c=1e-5",
        lambda: _crb_vs_n("rect", 20, GRID_41, 1e-5, 200, {"width": RECT_WIDTH}),
    ),
    "spacing": ("two lorentzian pulses, t1=0.5, t2 swept over [0.3, 0.7], N=9, sigma_c=1e-3", lambda: _spacing(200, 200)),
    "spacing41": ("spacing sweep on the 41-coefficient lorentzian pulse", lambda: _spacing(20, 100)),
    "periodic_vs_semiperiodic": (
        "20-parameter periodic (L=10, T=1) vs semi-periodic (L=2, T=1/9, M=9) streams",
        lambda: _pvs(200),
    ),
    "periodic_vs_semiperiodic41": ("the same comparison on the 41-coefficient pulse", lambda: _pvs(20)),
}

_CACHE = {}


def preset_names():
    return list(_BUILDERS)


def describe_presets():
    return {name: desc for name, (desc, _) in _BUILDERS.items()}


def get_preset(name):
    """A fresh copy of the preset config called ``name``."""
    if name not in _BUILDERS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(_BUILDERS)}")
    if name not in _CACHE:
        _CACHE[name] = _BUILDERS[name][1]()
    return copy.deepcopy(_CACHE[name])
