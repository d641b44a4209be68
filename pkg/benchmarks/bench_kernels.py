"""Compare the compiled and numpy kernel backends.

Run with ``python benchmarks/bench_kernels.py``. Each case reports the best
of several repeats in microseconds per call and the largest absolute
difference between the two backends' outputs.
"""

import argparse
import timeit

import numpy as np

from frilab import _core
from frilab.signal_model import FourierPulse, PulseStreamTheta


def cases():
    rng = np.random.default_rng(0)
    pulse = FourierPulse.lorentzian(200, 1.0)
    idx = np.ascontiguousarray(pulse.indices)
    vals = np.ascontiguousarray(pulse.values)
    per = PulseStreamTheta.periodic(rng.uniform(0.2, 1, 10), rng.uniform(0, 1, 10))
    semi = PulseStreamTheta.semiperiodic(rng.uniform(0.2, 1, (2, 9)), rng.uniform(0, 1 / 9, 2), 1 / 9)
    grid = np.ascontiguousarray(np.arange(8192) / 8192)
    coeffs = np.ascontiguousarray(rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx)))
    yield "synthesize periodic L=10, 401 coeffs", "pulse_stream_coeffs", (
        idx, vals, np.ascontiguousarray(per.amplitude_matrix()), np.ascontiguousarray(per.delays), 1.0, 1)
    yield "synthesize semi-periodic L=2 M=9, 401 coeffs", "pulse_stream_coeffs", (
        idx, vals, np.ascontiguousarray(semi.amplitude_matrix()), np.ascontiguousarray(semi.delays), 1.0, 9)
    yield "evaluate 401 coeffs on 8192 points", "fourier_series_eval", (idx, coeffs, grid, 1.0)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = _core.backends()
    if "cython" not in backends:
        print("compiled backend not built; only the numpy fallback is available")
    print(f"{'case':48s} " + " ".join(f"{name:>12s}" for name in backends) + "   speedup   max|diff|")
    for label, fname, call_args in cases():
        times, outputs = {}, {}
        for name, mod in backends.items():
            fn = getattr(mod, fname)
            timer = timeit.Timer(lambda: fn(*call_args))
            number, _ = timer.autorange()
            times[name] = min(timer.repeat(args.repeat, number)) / number * 1e6
            outputs[name] = np.asarray(fn(*call_args))
        diff = max(np.max(np.abs(outputs[n] - outputs["python"])) for n in outputs)
        speed = times["python"] / times["cython"] if "cython" in times else 1.0
        cols = " ".join(f"{times[n]:10.1f}us" for n in backends)
        print(f"{label:48s} {cols}   {speed:6.2f}x   {diff:.2e}")


if __name__ == "__main__":
    main()
