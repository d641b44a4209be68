"""``fri-lab`` command-line interface.

Exit codes: 0 on success, 2 for configuration problems (bad flags, missing
or malformed files), 3 for numerical failures such as an unidentifiable
model. Failures print a one-line JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .design import periodic_spectrum, top_n_kernels
from .errors import ConfigError, FriError, NumericalError
from .estimators import matrix_pencil, signal_mse
from .fisher import crb_continuous, sampled_crb
from .presets import describe_presets, get_preset
from .sampling import NoiseSpec, SamplingScheme, sample_noisy
from .signal_model import FourierPulse, PulseStreamTheta, synthesize_fourier
from .simlab import ExperimentConfig, format_value, run_experiment, run_periodic_vs_semiperiodic

CRB_COLUMNS = ["N", "crb_sampled", "crb_continuous", "condition_number", "ill_conditioned"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", message)
        raise SystemExit(2)


def _emit_error(kind, message, **extra):
    payload = {"error": kind, "message": str(message)}
    payload.update(extra)
    print(json.dumps(payload, default=_jsonable), file=sys.stderr)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(type(obj).__name__)


def _load_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def _source(args):
    if bool(args.config) == bool(args.preset):
        raise ConfigError("give exactly one of --config or --preset")
    return _load_json(args.config) if args.config else get_preset(args.preset)


def _write_text(text, args, filename):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, filename)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _rows_to_text(columns, rows, fmt):
    if fmt == "json":
        clean = [{c: (None if isinstance(r[c], float) and not np.isfinite(r[c]) else r[c]) for c in columns} for r in rows]
        return json.dumps(clean, indent=2, default=_jsonable) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([format_value(r[c]) for c in columns])
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------


def crb_rows(cfg, N_values=None):
    """CRB table for a ``crb_vs_n`` experiment config or a plain bound config.

    A plain config holds ``pulse``, ``theta``, ``noise`` and one of
    ``N``, ``N_grid`` or ``scheme``.
    """
    if cfg.get("experiment") == "periodic_vs_semiperiodic":
        if N_values:
            cfg = dict(cfg, N_grid=sorted(N_values))
        result = run_periodic_vs_semiperiodic(ExperimentConfig.from_dict(cfg))
        return result.columns, result.rows
    if cfg.get("experiment") not in (None, "crb_vs_n"):
        raise ConfigError(f"crb needs a crb_vs_n or bound config, not {cfg['experiment']!r}")
    for key in ("pulse", "theta", "noise"):
        if key not in cfg:
            raise ConfigError(f"bound config is missing {key!r}")
    pulse = FourierPulse.from_dict(cfg["pulse"])
    theta = PulseStreamTheta.from_dict(cfg["theta"])
    noise = NoiseSpec.from_dict(cfg["noise"])
    if N_values:
        schemes = [SamplingScheme.contiguous(n, pulse.period) for n in N_values]
    elif "scheme" in cfg:
        schemes = [SamplingScheme.from_dict(cfg["scheme"], pulse.period)]
    elif "N" in cfg or "N_grid" in cfg:
        grid = [cfg["N"]] if "N" in cfg else cfg["N_grid"]
        schemes = [SamplingScheme.contiguous(int(n), pulse.period) for n in grid]
    else:
        raise ConfigError("bound config needs 'N', 'N_grid' or 'scheme'")
    cont = crb_continuous(theta.K, noise.sigma_c).mse_bound if noise.sigma_c > 0 else float("nan")
    rows = []
    for scheme in schemes:
        c = sampled_crb(theta, pulse, scheme, noise)
        rows.append({
            "N": scheme.N,
            "crb_sampled": c.mse_bound,
            "crb_continuous": cont,
            "condition_number": c.condition_number,
            "ill_conditioned": c.ill_conditioned,
        })
    return CRB_COLUMNS, rows


def cmd_crb(args):
    columns, rows = crb_rows(_source(args), args.N)
    _write_text(_rows_to_text(columns, rows, args.format), args, f"crb.{args.format}")
    return 0


def cmd_design(args):
    if args.pulse and args.preset:
        raise ConfigError("give either --pulse or --preset")
    sigma_c = args.sigma_c
    if args.pulse:
        pulse = FourierPulse.from_dict(_load_json(args.pulse))
    elif args.preset:
        cfg = get_preset(args.preset)
        pulse = FourierPulse.from_dict(cfg["pulse"])
        if sigma_c is None:
            sigma_c = float(cfg.get("noise", {}).get("sigma_c", 0.0))
    else:
        raise ConfigError("design needs --pulse or --preset")
    spec = periodic_spectrum(pulse, args.L, args.sigma_a)
    plan = top_n_kernels(spec, args.budget, sigma_c or 0.0)
    _write_text(plan.to_json(indent=2) + "\n", args, "plan.json")
    return 0


def cmd_estimate(args):
    cfg = _source(args)
    pulse = FourierPulse.from_dict(cfg["pulse"]) if "pulse" in cfg else None
    if pulse is None:
        raise ConfigError("estimate config needs 'pulse'")
    N = args.N[0] if args.N else cfg.get("N")
    theta = PulseStreamTheta.from_dict(cfg["theta"]) if "theta" in cfg else None
    if "scheme" in cfg:
        scheme = SamplingScheme.from_dict(cfg["scheme"], pulse.period)
    elif N is not None:
        scheme = SamplingScheme.contiguous(int(N), pulse.period)
    else:
        raise ConfigError("estimate needs --N, 'N' or 'scheme'")
    L = int(cfg.get("L", theta.L if theta is not None else 0))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    if "samples" in cfg:
        c = np.array([complex(*v) if isinstance(v, list) else complex(v) for v in cfg["samples"]])
    elif theta is not None:
        noise = NoiseSpec.from_dict(cfg.get("noise", {}))
        c = sample_noisy(synthesize_fourier(theta, pulse), scheme, noise, seed)
    else:
        raise ConfigError("estimate config needs 'samples' or 'theta'")
    report = matrix_pencil(c, scheme, pulse, L)
    out = report.to_dict()
    out["N"] = scheme.N
    out["seed"] = seed
    if theta is not None:
        out["signal_mse"] = signal_mse(report.x_hat, synthesize_fourier(theta, pulse))
    if args.format == "csv":
        rows = [{"delay": float(t), "amplitude": float(a)} for t, a in zip(report.theta_hat.delays, report.theta_hat.amplitudes)]
        text = _rows_to_text(["delay", "amplitude"], rows, "csv")
    else:
        text = json.dumps(out, indent=2, default=_jsonable) + "\n"
    _write_text(text, args, f"estimate.{args.format}")
    return 0


def cmd_experiment(args):
    raw = _source(args)
    cfg = ExperimentConfig.from_dict(raw).with_overrides(seed=args.seed, trials=args.trials)
    result = run_experiment(cfg, threads=args.threads)
    paths = result.write(args.out or ".", fmt=args.format, svg=args.svg)
    print(json.dumps({"experiment": result.experiment, "config_hash": result.config_hash, **paths}))
    return 0


def cmd_presets(args):
    presets = describe_presets()
    if args.format == "json":
        print(json.dumps(presets, indent=2))
    else:
        for name, desc in presets.items():
            print(f"{name}\t{desc}")
    return 0


def build_parser():
    parser = _Parser(prog="fri-lab", description="Cramer-Rao bounds, kernel design and estimator benchmarks for FRI signals")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt_default="csv"):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--preset", help="named preset (see 'presets list')")
        p.add_argument("--out", help="directory for output files")
        p.add_argument("--format", choices=["csv", "json"], default=fmt_default)

    p = sub.add_parser("crb", help="sampled and continuous CRB")
    common(p)
    p.add_argument("--N", type=int, nargs="+", help="contiguous scheme size(s)")
    p.set_defaults(func=cmd_crb)

    p = sub.add_parser("design", help="optimal exponential kernels for a budget")
    p.add_argument("--pulse", help="pulse JSON file")
    p.add_argument("--preset", help="take the pulse from a preset")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--L", type=int, default=2, help="pulses per period in the prior")
    p.add_argument("--sigma-a", dest="sigma_a", type=float, default=1.0, help="amplitude prior std")
    p.add_argument("--sigma-c", dest="sigma_c", type=float, default=None, help="continuous noise std")
    p.add_argument("--out")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("estimate", help="matrix-pencil estimate from one noisy draw or given samples")
    common(p, "json")
    p.add_argument("--N", type=int, nargs=1)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run a sweep experiment")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--svg", action="store_true", help="also write plot.svg")
    p.add_argument("--threads", type=int, help="worker threads (default: FRI_LAB_THREADS or CPU count)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("presets", help="list presets")
    p.add_argument("action", choices=["list"])
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        _emit_error(type(exc).__name__, exc)
        return 2
    except NumericalError as exc:
        extra = {}
        for attr in ("rank", "index", "null_basis"):
            if getattr(exc, attr, None) is not None:
                extra[attr] = getattr(exc, attr)
        _emit_error(type(exc).__name__, exc, **extra)
        return 3
    except FriError as exc:  # pragma: no cover - every FriError is one of the above
        _emit_error(type(exc).__name__, exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
