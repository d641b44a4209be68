import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frilab.errors import ConfigError
from frilab.signal_model import (
    FourierCoeffVector,
    FourierPulse,
    Model,
    PulseStreamTheta,
    SubspaceBasis,
    evaluate_time,
    jacobian_fourier,
    rate_of_innovation,
    synthesize_fourier,
)


class TestFourierPulse:
    def test_drops_zeros_and_sorts(self):
        p = FourierPulse(1.0, [2, -1, 0], [1.0, 0.0, 3.0])
        assert p.support.tolist() == [0, 2]
        assert p.coeff(0) == 3.0
        assert p.coeff(-1) == 0

    def test_rejects_bad_input(self):
        with pytest.raises(ConfigError):
            FourierPulse(0.0, [0], [1.0])
        with pytest.raises(ConfigError):
            FourierPulse(1.0, [0, 0], [1.0, 2.0])
        with pytest.raises(ConfigError):
            FourierPulse(1.0, [0, 1], [0.0, 0.0])

    def test_builtin_shapes(self):
        lor = FourierPulse.lorentzian(200)
        assert lor.coeff(10) == pytest.approx(0.5)
        assert FourierPulse.flat(200).support.size == 401
        rect = FourierPulse.rect(200, width=0.04)
        assert rect.coeff(0) == pytest.approx(0.04)
        assert abs(rect.coeff(25)) < 1e-15
        for p in (lor, rect):
            assert p.is_real()

    def test_complex_pulse_not_real(self):
        assert not FourierPulse(1.0, [-1, 1], [1.0, 1j]).is_real()

    def test_from_dict(self):
        p = FourierPulse.from_dict({"period": 2.0, "coeffs": [[-1, 0.5, 0.0], [1, 0.5, 0.0]]})
        assert p.period == 2.0 and p.coeff(1) == 0.5
        g = FourierPulse.from_dict({"generator": "rect", "bandwidth": 5, "width": 0.1})
        assert len(g.support) == 11
        with pytest.raises(ConfigError):
            FourierPulse.from_dict({"generator": "gauss"})
        with pytest.raises(ConfigError):
            FourierPulse.from_dict({"generator": "flat", "bogus": 1})
        back = FourierPulse.from_dict(p.to_dict())
        assert np.array_equal(back.indices, p.indices)
        assert np.array_equal(back.values, p.values)

    def test_time_support_centered(self):
        t_a, t_b = FourierPulse.lorentzian(200).time_support()
        assert t_a == pytest.approx(-t_b, abs=1e-3)
        assert 0.05 < t_b < 0.2


class TestTheta:
    def test_periodic_shape(self):
        th = PulseStreamTheta.periodic([1.0, 2.0], [0.1, 1.3])
        assert th.K == 4 and th.L == 2
        assert th.delays[1] == pytest.approx(0.3)
        assert th.as_vector().tolist() == pytest.approx([1.0, 2.0, 0.1, 0.3])

    def test_semiperiodic_shape_and_flag(self):
        th = PulseStreamTheta.semiperiodic(np.ones((2, 9)), [0.02, 0.05], 1 / 9, support=(-0.01, 0.01))
        assert th.K == 20 and th.M == 9
        assert th.signal_period == pytest.approx(1.0)
        assert th.no_overlap is True
        wide = PulseStreamTheta.semiperiodic(np.ones((2, 9)), [0.02, 0.05], 1 / 9, support=(-0.05, 0.05))
        assert wide.no_overlap is False

    def test_validation(self):
        with pytest.raises(ConfigError):
            PulseStreamTheta.periodic([1.0], [0.1, 0.2])
        with pytest.raises(ConfigError):
            PulseStreamTheta.periodic([1.0], [np.nan])
        with pytest.raises(ConfigError):
            PulseStreamTheta(Model.SEMIPERIODIC, np.ones((2, 3)), [0.1, 0.2], 1.0, 4)
        with pytest.raises(ConfigError):
            PulseStreamTheta.from_dict({"model": "chirp"})

    def test_roundtrip(self):
        th = PulseStreamTheta.semiperiodic(np.arange(6.0).reshape(2, 3), [0.1, 0.2], 0.5)
        back = PulseStreamTheta.from_dict(th.to_dict())
        assert np.array_equal(back.amplitudes, th.amplitudes)
        assert np.array_equal(th.with_vector(th.as_vector()).delays, th.delays)

    def test_sorted(self):
        th = PulseStreamTheta.periodic([1.0, 2.0], [0.8, 0.2]).sorted()
        assert th.delays.tolist() == [0.2, 0.8]
        assert th.amplitudes.tolist() == [2.0, 1.0]


class TestSynthesize:
    def test_unit_pulse_at_zero(self):
        x = synthesize_fourier(PulseStreamTheta.periodic([1.0], [0.0]), FourierPulse.flat(2))
        assert np.allclose(x.values, 1.0)

    def test_two_pulse_dc(self, two_pulse_theta, flat401):
        x = synthesize_fourier(two_pulse_theta, flat401)
        assert x.restrict([0])[0] == pytest.approx(0.9267, abs=1e-12)

    def test_single_term(self):
        x = synthesize_fourier(PulseStreamTheta.periodic([2.0], [0.25]), FourierPulse(1.0, [1], [1.0]))
        assert x.restrict([1])[0] == pytest.approx(-2j)

    def test_period_mismatch(self, two_pulse_theta):
        with pytest.raises(ConfigError):
            synthesize_fourier(two_pulse_theta, FourierPulse.flat(5, period=2.0))

    def test_semiperiodic_matches_direct_sum(self):
        rng = np.random.default_rng(0)
        M, T = 4, 0.25
        pulse = FourierPulse.lorentzian(30, period=M * T)
        th = PulseStreamTheta.semiperiodic(rng.standard_normal((2, M)), [0.05, 0.1], T)
        x = synthesize_fourier(th, pulse)
        q = pulse.indices
        direct = np.zeros(len(q), complex)
        for l in range(2):
            for m in range(M):
                direct += th.amplitudes[l, m] * np.exp(-2j * np.pi * q * (th.delays[l] + m * T) / (M * T))
        assert np.allclose(x.values, pulse.values * direct)

    def test_semiperiodic_with_m1_is_periodic(self, two_pulse_theta, flat41):
        semi = PulseStreamTheta.semiperiodic(np.array(two_pulse_theta.amplitudes)[:, None], two_pulse_theta.delays, 1.0)
        assert np.allclose(synthesize_fourier(semi, flat41).values, synthesize_fourier(two_pulse_theta, flat41).values)

    def test_subspace(self):
        basis = SubspaceBasis(1.0, [-1, 0, 1], np.eye(3))
        x = synthesize_fourier(PulseStreamTheta.subspace([1.0, 2.0, 3.0]), basis)
        assert x.values.tolist() == [1, 2, 3]
        with pytest.raises(ConfigError):
            synthesize_fourier(PulseStreamTheta.subspace([1.0]), basis)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=4), st.data())
    def test_conjugate_symmetry(self, amps, data):
        delays = data.draw(st.lists(st.floats(0, 0.999), min_size=len(amps), max_size=len(amps)))
        x = synthesize_fourier(PulseStreamTheta.periodic(amps, delays), FourierPulse.lorentzian(15))
        assert np.allclose(x.restrict(-x.indices), np.conj(x.values), atol=1e-12)


class TestEvaluateTime:
    def test_dc(self):
        assert evaluate_time(FourierCoeffVector(1.0, [0], [1.0]), [0.3])[0] == pytest.approx(1.0)

    def test_cosine_peak(self):
        assert evaluate_time(FourierCoeffVector(1.0, [-1, 1], [0.5, 0.5]), [0.0])[0] == pytest.approx(1.0)

    def test_dirichlet_peak(self, flat401):
        x = synthesize_fourier(PulseStreamTheta.periodic([1.0], [0.5]), flat401)
        val = evaluate_time(x, [0.5])
        assert np.isrealobj(val)
        assert val[0] == pytest.approx(401.0, rel=1e-12)

    def test_complex_input_stays_complex(self):
        v = evaluate_time(FourierCoeffVector(1.0, [1], [1.0]), [0.25])
        assert v[0] == pytest.approx(1j)

    def test_parseval(self, two_pulse_theta):
        x = synthesize_fourier(two_pulse_theta, FourierPulse.lorentzian(50))
        grid = np.arange(4096) / 4096
        vals = evaluate_time(x, grid)
        assert np.sum(vals**2) / 4096 == pytest.approx(x.energy(), rel=1e-6)


class TestJacobian:
    def test_zero_delay_example(self):
        D = jacobian_fourier(PulseStreamTheta.periodic([1.0], [0.0]), FourierPulse.flat(1))
        assert np.allclose(D.matrix[:, 0], 1.0)
        assert np.allclose(D.matrix[:, 1], [2j * np.pi, 0, -2j * np.pi])

    def test_amplitude_modulus_and_dc(self, two_pulse_theta, lorentzian41):
        D = jacobian_fourier(two_pulse_theta, lorentzian41)
        assert np.allclose(np.abs(D.matrix[:, :2]), np.abs(lorentzian41.values)[:, None])
        assert np.all(D.restrict([0])[0, 2:] == 0)
        assert D.names == ("a0", "a1", "t0", "t1")

    @pytest.mark.parametrize("model", ["periodic", "semiperiodic"])
    def test_finite_differences(self, model):
        rng = np.random.default_rng(3)
        if model == "periodic":
            pulse = FourierPulse.lorentzian(25)
            th = PulseStreamTheta.periodic([0.7, -0.4], [0.2, 0.7])
        else:
            pulse = FourierPulse.lorentzian(25, period=1.0)
            th = PulseStreamTheta.semiperiodic(rng.standard_normal((2, 3)), [0.05, 0.2], 1 / 3)
        D = jacobian_fourier(th, pulse).matrix
        base = synthesize_fourier(th, pulse).values
        eps = 1e-6
        for i in range(th.K):
            v = th.as_vector()
            v[i] += eps
            fd = (synthesize_fourier(th.with_vector(v), pulse).values - base) / eps
            assert np.linalg.norm(fd - D[:, i]) <= 1e-4 * np.linalg.norm(D[:, i])


class TestRateOfInnovation:
    def test_single_burst(self):
        assert rate_of_innovation("single_burst", L=2, window=1.0) == 4.0

    def test_shift_invariant_limit(self):
        assert rate_of_innovation("shift_invariant", period=1.0, n_periods=10**6, support_width=1.0) == pytest.approx(1.0, rel=1e-5)

    def test_semiperiodic(self):
        rho = rate_of_innovation("semiperiodic", L=2, period=1 / 9, n_periods=9, support_width=0.05)
        assert rho == pytest.approx(22.0)

    def test_periodic_counts_parameters(self):
        assert rate_of_innovation("periodic", L=5, window=3.0) * 3.0 == 10

    def test_errors(self):
        with pytest.raises(ConfigError):
            rate_of_innovation("shift_invariant", period=0.0, n_periods=1, support_width=1.0)
        with pytest.raises(ConfigError):
            rate_of_innovation("semiperiodic", L=1, period=1.0, n_periods=0, support_width=1.0)
        with pytest.raises(ConfigError):
            rate_of_innovation("multiband")
        with pytest.raises(ConfigError):
            rate_of_innovation("periodic", L=1)
