"""Monte Carlo engine and the three sweep experiments.

Trial ``i`` of a run with seed ``s`` always draws its noise from the stream
keyed by ``s + i``, and per-trial results are reduced in trial order, so a
run gives bit-identical numbers for any number of worker threads.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .errors import ConfigError, DiagnosticError, NumericalError, SpectralNullError, UnidentifiableError
from .estimators import check_pencil_inputs, matrix_pencil, signal_mse, subspace_consistent
from .fisher import crb_continuous, sampled_crb
from .sampling import NoiseSpec, SamplingScheme, sample_noisy
from .signal_model import (
    FourierCoeffVector,
    FourierPulse,
    PulseStreamTheta,
    SubspaceBasis,
    synthesize_fourier,
)

SCHEMA_VERSION = "v1"
THREADS_ENV = "FRI_LAB_THREADS"
EXPERIMENTS = ("crb_vs_n", "pulse_spacing", "periodic_vs_semiperiodic")
MAX_FAILURE_RATE = 0.5


def worker_count(threads=None):
    """Thread count: explicit argument, else ``FRI_LAB_THREADS``, else the CPU count (max 8)."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            threads = min(8, os.cpu_count() or 1)
    return max(1, int(threads))


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    stderr: float
    trials: int
    failures: int
    values: np.ndarray = field(repr=False)


def _make_estimator(estimator, theta, pulse, scheme):
    if callable(estimator):
        return estimator
    if estimator == "pencil":
        L = theta.L

        def run(c):
            return matrix_pencil(c, scheme, pulse, L).x_hat

        return run
    if estimator == "subspace":
        if not isinstance(pulse, SubspaceBasis):
            raise ConfigError("subspace estimator needs a SubspaceBasis")
        S_cross = scheme.base_period * (scheme.mixing @ _basis_rows(pulse, scheme.freqs))

        def run(c):
            coef = subspace_consistent(c, pulse.gram(), S_cross)
            return FourierCoeffVector(pulse.period, pulse.indices, pulse.generators @ coef)

        return run
    raise ConfigError(f"unknown estimator {estimator!r}")


def _basis_rows(basis, freqs):
    out = np.zeros((len(freqs), basis.K), dtype=complex)
    pos = np.searchsorted(basis.indices, freqs)
    pos_c = np.minimum(pos, len(basis.indices) - 1)
    hit = basis.indices[pos_c] == freqs
    out[hit] = basis.generators[pos_c[hit]]
    return out


def monte_carlo_mse(estimator, theta, pulse, scheme, noise, trials, seed, threads=None):
    """Mean and standard error of the signal MSE over seeded trials.

    Parameters
    ----------
    estimator : {"pencil", "subspace"} or callable
        A callable maps the sample vector to a :class:`FourierCoeffVector`.
    theta : PulseStreamTheta
    pulse : FourierPulse or SubspaceBasis
    scheme : SamplingScheme
    noise : NoiseSpec
    trials : int
    seed : int
    threads : int, optional
        Worker threads; defaults to :func:`worker_count`.

    Trials where the estimator raises a numerical error are counted as
    failures and left out of the mean.

    Raises
    ------
    DiagnosticError
        If more than half of the trials fail.
    """
    if trials < 1:
        raise ConfigError("need at least one trial")
    x = synthesize_fourier(theta, pulse)
    run = _make_estimator(estimator, theta, pulse, scheme)

    def one(i):
        c = sample_noisy(x, scheme, noise, seed, i)
        try:
            return signal_mse(run(c), x)
        except (NumericalError, np.linalg.LinAlgError):
            return np.nan

    n_workers = min(worker_count(threads), trials)
    if n_workers == 1:
        values = np.array([one(i) for i in range(trials)])
    else:
        blocks = np.array_split(np.arange(trials), n_workers)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(lambda b: [one(int(i)) for i in b], blocks))
        values = np.array([v for part in parts for v in part])
    ok = np.isfinite(values)
    failures = int(trials - np.sum(ok))
    if failures > MAX_FAILURE_RATE * trials:
        raise DiagnosticError(f"{failures} of {trials} Monte Carlo trials failed")
    good = values[ok]
    stderr = float(np.std(good, ddof=1) / np.sqrt(len(good))) if len(good) > 1 else 0.0
    return MonteCarloResult(float(np.mean(good)), stderr, trials, failures, values)


# -- configuration ---------------------------------------------------------


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(cfg):
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def _need(cfg, key):
    if key not in cfg:
        raise ConfigError(f"experiment config is missing {key!r}")
    return cfg[key]


def _sorted_grid(values, name):
    grid = list(values)
    if not grid:
        raise ConfigError(f"{name} must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"{name} must be strictly increasing")
    return grid


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment configuration (schema ``v1``).

    ``raw`` keeps the JSON document; the hash of its canonical form
    identifies the run.
    """

    experiment: str
    raw: dict
    pulse: FourierPulse
    noise: NoiseSpec
    trials: int
    seed: int
    estimator: str

    @classmethod
    def from_dict(cls, cfg):
        if not isinstance(cfg, dict):
            raise ConfigError("experiment config must be a JSON object")
        version = cfg.get("schema", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {version!r} (expected {SCHEMA_VERSION!r})")
        experiment = _need(cfg, "experiment")
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}; expected one of {list(EXPERIMENTS)}")
        trials = int(cfg.get("trials", 200))
        if trials < 1:
            raise ConfigError("trials must be at least 1")
        estimator = cfg.get("estimator", "pencil")
        if estimator not in ("pencil", "none"):
            raise ConfigError(f"unknown estimator {estimator!r}")
        pulse = FourierPulse.from_dict(_need(cfg, "pulse"))
        noise = NoiseSpec.from_dict(_need(cfg, "noise"))
        if experiment == "crb_vs_n":
            _sorted_grid(_need(cfg, "N_grid"), "N_grid")
            PulseStreamTheta.from_dict(_need(cfg, "theta"))
        elif experiment == "pulse_spacing":
            grid = _sorted_grid(_need(cfg, "t2_grid"), "t2_grid")
            if float(_need(cfg, "t1")) in [float(t) for t in grid]:
                raise ConfigError("t2_grid must not contain t1 itself")
            _need(cfg, "amplitudes"), _need(cfg, "N")
        else:
            _sorted_grid(_need(cfg, "N_grid"), "N_grid")
            _need(cfg, "periodic"), _need(cfg, "semiperiodic")
        return cls(experiment, cfg, pulse, noise, trials, int(cfg.get("seed", 0)), estimator)

    def with_overrides(self, seed=None, trials=None):
        raw = dict(self.raw)
        if seed is not None:
            raw["seed"] = int(seed)
        if trials is not None:
            raw["trials"] = int(trials)
        return ExperimentConfig.from_dict(raw)

    @property
    def hash(self):
        return config_hash(self.raw)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return ExperimentConfig.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None


# -- results -----------------------------------------------------------------


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class ExperimentResult:
    experiment: str
    columns: list
    rows: list
    config_hash: str
    seed: int
    runtime: float = 0.0
    notes: list = field(default_factory=list)
    x_column: str = "N"
    curves: tuple = ()

    def column(self, name):
        return np.array([row[name] for row in self.rows], dtype=float)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(row[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self):
        rows = [{c: (None if isinstance(row[c], float) and not np.isfinite(row[c]) else row[c]) for c in self.columns} for row in self.rows]
        return json.dumps({"experiment": self.experiment, "config_hash": self.config_hash, "seed": self.seed,
                           "notes": self.notes, "rows": rows}, indent=2, default=_json_default)

    def manifest(self):
        import scipy

        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "experiment": self.experiment,
            "versions": {
                "frilab": _version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
                "backend": _core.BACKEND,
            },
            "runtime": self.runtime,
            "notes": self.notes,
        }

    def write(self, out_dir, fmt="csv", svg=False):
        """Write ``results.csv`` (or ``results.json``), ``manifest.json`` and optionally ``plot.svg``."""
        os.makedirs(out_dir, exist_ok=True)
        paths = {}
        if fmt == "json":
            paths["results"] = os.path.join(out_dir, "results.json")
            with open(paths["results"], "w", encoding="utf-8") as fh:
                fh.write(self.to_json() + "\n")
        else:
            paths["results"] = os.path.join(out_dir, "results.csv")
            with open(paths["results"], "w", encoding="utf-8", newline="") as fh:
                fh.write(self.to_csv())
        paths["manifest"] = os.path.join(out_dir, "manifest.json")
        with open(paths["manifest"], "w", encoding="utf-8") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        if svg:
            paths["svg"] = os.path.join(out_dir, "plot.svg")
            self.plot_svg(paths["svg"])
        return paths

    def plot_svg(self, path):
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        plt.rcParams["svg.hashsalt"] = "frilab"
        fig, ax = plt.subplots(figsize=(6, 4))
        x = self.column(self.x_column)
        for name in self.curves:
            y = self.column(name)
            ok = np.isfinite(y) & (y > 0)
            if np.any(ok):
                ax.plot(x[ok], y[ok], marker="o", markersize=3, label=name)
        ax.set_yscale("log")
        ax.set_xlabel(self.x_column)
        ax.set_ylabel("MSE")
        ax.set_title(self.experiment)
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _version():
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:  # not installed as a distribution
        return "0+unknown"


# -- experiments -----------------------------------------------------------


def _crb_or_inf(theta, pulse, scheme, noise):
    """``(bound, condition, ill_conditioned, note)``; singular FIMs give ``inf``."""
    try:
        c = sampled_crb(theta, pulse, scheme, noise)
        return c.mse_bound, c.condition_number, c.ill_conditioned, ""
    except UnidentifiableError as exc:
        return np.inf, np.inf, True, f"unidentifiable (rank {exc.rank})"


def _continuous(K, noise):
    return crb_continuous(K, noise.sigma_c).mse_bound if noise.sigma_c > 0 else np.nan


def _pencil_mc(cfg, theta, pulse, scheme, threads):
    """``(mean, stderr, failures, note)`` for the pencil on one sweep point."""
    if cfg.estimator == "none":
        return np.nan, np.nan, 0, ""
    try:
        check_pencil_inputs(scheme, pulse, theta.L)
    except SpectralNullError as exc:
        return np.nan, np.nan, cfg.trials, f"pencil skipped: spectral null at index {exc.index}"
    except ConfigError as exc:
        return np.nan, np.nan, cfg.trials, f"pencil skipped: {exc}"
    try:
        mc = monte_carlo_mse("pencil", theta, pulse, scheme, cfg.noise, cfg.trials, cfg.seed, threads)
    except DiagnosticError as exc:
        return np.nan, np.nan, cfg.trials, str(exc)
    note = f"{mc.failures} failed trials" if mc.failures else ""
    return mc.mean, mc.stderr, mc.failures, note


def _join(*notes):
    return "; ".join(n for n in notes if n)


def run_crb_vs_n(cfg, threads=None):
    """Sampled CRB, continuous CRB and pencil MSE for contiguous schemes of growing size."""
    if cfg.experiment != "crb_vs_n":
        raise ConfigError("run_crb_vs_n needs a crb_vs_n config")
    start = time.perf_counter()
    pulse, noise = cfg.pulse, cfg.noise
    theta = PulseStreamTheta.from_dict(cfg.raw["theta"])
    support = len(pulse.support)
    rows = []
    for N in cfg.raw["N_grid"]:
        N = int(N)
        if N > support:
            raise ConfigError(f"N={N} exceeds the pulse support size {support}")
        scheme = SamplingScheme.contiguous(N, pulse.period)
        crb, cond, ill, note = _crb_or_inf(theta, pulse, scheme, noise)
        mean, se, fails, mc_note = _pencil_mc(cfg, theta, pulse, scheme, threads)
        rows.append({
            "N": N,
            "crb_sampled": crb,
            "crb_continuous": _continuous(theta.K, noise),
            "condition_number": cond,
            "ill_conditioned": ill,
            "mc_mse": mean,
            "mc_stderr": se,
            "failures": fails,
            "note": _join(note, mc_note),
        })
    columns = ["N", "crb_sampled", "crb_continuous", "condition_number", "ill_conditioned",
               "mc_mse", "mc_stderr", "failures", "note"]
    return ExperimentResult("crb_vs_n", columns, rows, cfg.hash, cfg.seed, time.perf_counter() - start,
                            [], "N", ("crb_sampled", "crb_continuous", "mc_mse"))


def run_pulse_spacing(cfg, threads=None):
    """CRB and pencil MSE as the second of two pulses moves past the first."""
    if cfg.experiment != "pulse_spacing":
        raise ConfigError("run_pulse_spacing needs a pulse_spacing config")
    start = time.perf_counter()
    pulse, noise, raw = cfg.pulse, cfg.noise, cfg.raw
    T = pulse.period
    t1 = float(raw["t1"])
    scheme = SamplingScheme.contiguous(int(raw["N"]), T)
    rows = []
    for t2 in raw["t2_grid"]:
        t2 = float(t2)
        theta = PulseStreamTheta.periodic(raw["amplitudes"], [t1, t2], T)
        gap = abs(t2 - t1) % T
        crb, cond, ill, note = _crb_or_inf(theta, pulse, scheme, noise)
        mean, se, fails, mc_note = _pencil_mc(cfg, theta, pulse, scheme, threads)
        rows.append({
            "t2": t2,
            "spacing": min(gap, T - gap),
            "crb_sampled": crb,
            "crb_continuous": _continuous(theta.K, noise),
            "condition_number": cond,
            "ill_conditioned": ill,
            "mc_mse": mean,
            "mc_stderr": se,
            "failures": fails,
            "note": _join(note, mc_note),
        })
    columns = ["t2", "spacing", "crb_sampled", "crb_continuous", "condition_number", "ill_conditioned",
               "mc_mse", "mc_stderr", "failures", "note"]
    return ExperimentResult("pulse_spacing", columns, rows, cfg.hash, cfg.seed, time.perf_counter() - start,
                            [], "t2", ("crb_sampled", "crb_continuous", "mc_mse"))


def build_pvs_thetas(cfg):
    """Periodic and semi-periodic parameter sets of a comparison config."""
    raw, pulse = cfg.raw, cfg.pulse
    per, semi = raw["periodic"], raw["semiperiodic"]
    theta_p = PulseStreamTheta.periodic(_need(per, "amplitudes"), _need(per, "delays"), pulse.period)
    amps = np.atleast_2d(np.asarray(_need(semi, "amplitudes"), dtype=float))
    T = float(_need(semi, "period"))
    if abs(T * amps.shape[1] - pulse.period) > 1e-12 * pulse.period:
        raise ConfigError(f"semi-periodic period {T} times M={amps.shape[1]} must equal the pulse period {pulse.period}")
    support = pulse.time_support()
    theta_s = PulseStreamTheta.semiperiodic(amps, _need(semi, "delays"), T, support=support)
    if theta_p.K != theta_s.K:
        raise ConfigError(f"models must have equal parameter counts (periodic K={theta_p.K}, semi-periodic K={theta_s.K})")
    return theta_p, theta_s


def run_periodic_vs_semiperiodic(cfg, threads=None):
    """Sampled CRB of a periodic and a semi-periodic stream with the same parameter count."""
    if cfg.experiment != "periodic_vs_semiperiodic":
        raise ConfigError("run_periodic_vs_semiperiodic needs a periodic_vs_semiperiodic config")
    start = time.perf_counter()
    pulse, noise = cfg.pulse, cfg.noise
    theta_p, theta_s = build_pvs_thetas(cfg)
    notes = []
    if not theta_s.no_overlap:
        t_a, t_b = pulse.time_support()
        notes.append(
            f"semi-periodic pulses overlap neighbouring periods (pulse support [{t_a:.4g}, {t_b:.4g}] "
            f"vs period {theta_s.period:.4g}); bound computed for the overlapping model"
        )
    rows = []
    for N in cfg.raw["N_grid"]:
        scheme = SamplingScheme.contiguous(int(N), pulse.period)
        crb_p, cond_p, ill_p, note_p = _crb_or_inf(theta_p, pulse, scheme, noise)
        crb_s, cond_s, ill_s, note_s = _crb_or_inf(theta_s, pulse, scheme, noise)
        rows.append({
            "N": int(N),
            "crb_periodic": crb_p,
            "crb_semiperiodic": crb_s,
            "crb_continuous": _continuous(theta_p.K, noise),
            "condition_periodic": cond_p,
            "condition_semiperiodic": cond_s,
            "ill_conditioned_periodic": ill_p,
            "ill_conditioned_semiperiodic": ill_s,
            "note": _join(note_p and f"periodic {note_p}", note_s and f"semi-periodic {note_s}"),
        })
    columns = ["N", "crb_periodic", "crb_semiperiodic", "crb_continuous", "condition_periodic",
               "condition_semiperiodic", "ill_conditioned_periodic", "ill_conditioned_semiperiodic", "note"]
    return ExperimentResult("periodic_vs_semiperiodic", columns, rows, cfg.hash, cfg.seed,
                            time.perf_counter() - start, notes, "N",
                            ("crb_periodic", "crb_semiperiodic", "crb_continuous"))


RUNNERS = {
    "crb_vs_n": run_crb_vs_n,
    "pulse_spacing": run_pulse_spacing,
    "periodic_vs_semiperiodic": run_periodic_vs_semiperiodic,
}


def run_experiment(cfg, threads=None):
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    return RUNNERS[cfg.experiment](cfg, threads)
