import os
import subprocess
import sys

import numpy as np
import pytest

from frilab import _core

cython = _core.backends().get("cython")
python = _core.backends()["python"]


@pytest.mark.skipif(cython is None, reason="compiled extension not built")
class TestCompiledMatchesFallback:
    def _stream_args(self, M):
        rng = np.random.default_rng(M)
        idx = np.arange(-60, 61, dtype=np.int64)
        pulse = (1.0 / (1.0 + 0.01 * idx**2)).astype(complex)
        amps = np.ascontiguousarray(rng.standard_normal((3, M)))
        delays = rng.uniform(0, 1.0 / M, 3)
        return idx, pulse, amps, delays, 1.0, M

    @pytest.mark.parametrize("M", [1, 4, 9])
    def test_pulse_stream_coeffs(self, M):
        args = self._stream_args(M)
        assert np.allclose(cython.pulse_stream_coeffs(*args), python.pulse_stream_coeffs(*args), rtol=0, atol=1e-11)

    def test_fourier_series_eval(self):
        rng = np.random.default_rng(0)
        idx = np.array([-40, -3, 0, 1, 2, 17, 39], dtype=np.int64)
        coeffs = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        grid = rng.uniform(-2, 3, 500)
        a = cython.fourier_series_eval(idx, coeffs, grid, 1.5)
        b = python.fourier_series_eval(idx, coeffs, grid, 1.5)
        assert np.allclose(a, b, rtol=0, atol=1e-11)

    def test_long_contiguous_sum(self):
        idx = np.arange(-200, 201, dtype=np.int64)
        coeffs = np.ones(401, dtype=complex)
        grid = np.linspace(0, 1, 2049)
        a = cython.fourier_series_eval(idx, coeffs, grid, 1.0)
        b = python.fourier_series_eval(idx, coeffs, grid, 1.0)
        assert np.max(np.abs(a - b)) < 1e-9


class TestSelection:
    def test_backend_name(self):
        assert _core.BACKEND in ("cython", "python")
        if os.environ.get("FRI_LAB_PURE_PYTHON"):
            assert _core.BACKEND == "python"
        else:
            assert _core.BACKEND == ("cython" if cython is not None else "python")

    def test_env_forces_fallback(self):
        env = dict(os.environ, FRI_LAB_PURE_PYTHON="1")
        out = subprocess.run(
            [sys.executable, "-c", "import frilab._core as c; print(c.BACKEND)"],
            env=env, capture_output=True, text=True, check=True,
        )
        assert out.stdout.strip() == "python"
