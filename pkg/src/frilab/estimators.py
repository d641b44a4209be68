"""Reconstruction algorithms: matrix pencil, consistent subspace recovery, Bayesian shrinkage."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError, SpectralNullError, UnidentifiableError
from .fisher import subspace_crb
from .sampling import RANK_TOL
from .signal_model import FourierCoeffVector, PulseStreamTheta, synthesize_fourier

EPS_H = 1e-8
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class EstimateReport:
    theta_hat: PulseStreamTheta
    x_hat: FourierCoeffVector
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        diag = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.diagnostics.items()}
        return {"theta_hat": self.theta_hat.to_dict(), "diagnostics": diag}


def _exponential_samples(c, scheme):
    """Samples ``T x[f]`` on the contiguous frequency set behind ``scheme``."""
    if not scheme.is_contiguous:
        raise ConfigError("matrix pencil needs a contiguous frequency set")
    c = np.asarray(c, dtype=complex).ravel()
    if len(c) != scheme.N:
        raise ConfigError(f"got {len(c)} samples for a scheme with {scheme.N} kernels")
    if scheme.kind == "exponential":
        return c
    if scheme.mixing.shape[0] != scheme.mixing.shape[1]:
        raise ConfigError("cannot unmix a scheme with fewer kernels than frequencies")
    return np.linalg.solve(scheme.mixing, c)


def check_pencil_inputs(scheme, pulse, L, eps_h=EPS_H):
    """Raise if the pencil cannot run on this scheme and pulse."""
    if L < 1:
        raise ConfigError("need at least one pulse")
    if abs(scheme.base_period - pulse.period) > 1e-12 * pulse.period:
        raise ConfigError("scheme and pulse periods differ")
    if not scheme.is_contiguous:
        raise ConfigError("matrix pencil needs a contiguous frequency set")
    if len(scheme.freqs) < 2 * L + 1:
        raise ConfigError(f"matrix pencil needs at least {2 * L + 1} frequencies for L={L}")
    h = pulse.restrict(scheme.freqs)
    floor = eps_h * float(np.max(np.abs(pulse.values)))
    weak = np.nonzero(np.abs(h) < floor)[0]
    if len(weak):
        k = int(scheme.freqs[weak[0]])
        raise SpectralNullError(f"pulse coefficient at index {k} is below {floor:.3g}", k)
    return h


def _merge_close(delays, T, tol):
    """Collapse delays closer than ``tol * T`` (circularly) into their mean."""
    delays = np.sort(np.mod(delays, T))
    groups = [[delays[0]]]
    for d in delays[1:]:
        if d - groups[-1][-1] <= tol * T:
            groups[-1].append(d)
        else:
            groups.append([d])
    if len(groups) > 1 and groups[0][0] + T - groups[-1][-1] <= tol * T:
        groups[0] = [d - T for d in groups.pop()] + groups[0]
    return np.mod([np.mean(g) for g in groups], T), len(delays) - len(groups)


def matrix_pencil(c, scheme, pulse, L, eps_h=EPS_H):
    """Delays and amplitudes of a periodic pulse stream from Fourier samples.

    Parameters
    ----------
    c : array_like, shape (N,)
        Samples from ``scheme`` (exponential, or an invertible mixing of a
        contiguous exponential set such as the trig kernels).
    scheme : SamplingScheme
    pulse : FourierPulse
        Known pulse on the same period.
    L : int
        Number of pulses.
    eps_h : float
        Relative floor on ``|h[k]|`` inside the band.

    Returns
    -------
    EstimateReport
        Delays sorted ascending. Delays that coincide within ``1e-9 T`` are
        merged into one pulse.
    """
    h = check_pencil_inputs(scheme, pulse, L, eps_h)
    T = scheme.base_period
    k = scheme.freqs
    z = _exponential_samples(c, scheme) / (T * h)

    N = len(z)
    P = N // 2
    H = np.lib.stride_tricks.sliding_window_view(z, P + 1)  # H[i, j] = z[i + j]
    U, sv, _ = np.linalg.svd(H, full_matrices=False)
    Us = U[:, :L]
    u = np.linalg.eigvals(np.linalg.pinv(Us[:-1]) @ Us[1:])
    delays = np.mod(-T * np.angle(u) / (2 * np.pi), T)
    delays, merged = _merge_close(delays, T, MERGE_TOL)

    V = np.exp(-2j * np.pi * np.outer(k, delays) / T)
    amps, *_ = np.linalg.lstsq(V, z, rcond=None)
    residual = float(np.linalg.norm(V @ amps - z))
    theta = PulseStreamTheta.periodic(amps.real, delays, T).sorted()  # amplitudes are real by model
    x_hat = synthesize_fourier(theta, pulse)
    diagnostics = {
        "singular_values": sv,
        "pencil_parameter": P,
        "merged_pulses": merged,
        "residual_norm": residual,
        "skipped_indices": [],
    }
    return EstimateReport(theta, x_hat, diagnostics)


def _square_cross(S_cross):
    S_cross = np.atleast_2d(np.asarray(S_cross))
    N, K = S_cross.shape
    if N != K:
        raise ConfigError(f"consistent estimator needs as many samples as coefficients ({N} != {K})")
    s = np.linalg.svd(S_cross, compute_uv=False)
    if s[0] == 0 or s[-1] <= RANK_TOL * s[0]:
        rank = int(np.sum(s > RANK_TOL * s[0])) if s[0] > 0 else 0
        _, _, Vh = np.linalg.svd(S_cross)
        raise UnidentifiableError("S*G is singular", Vh[rank:].conj().T, rank)
    return S_cross


def subspace_consistent(c, G_gram, S_cross):
    """Coefficients ``theta_hat = (S^*G)^{-1} c`` of the consistent estimator ``x_hat = G theta_hat``."""
    S_cross = _square_cross(S_cross)
    c = np.asarray(c)
    if c.shape[-1] != S_cross.shape[0]:
        raise ConfigError("sample vector length does not match S*G")
    theta = np.linalg.solve(S_cross, c.T).T
    if np.isrealobj(S_cross) and np.isrealobj(c):
        return theta.real
    return theta


def subspace_consistent_mse(G_gram, S_cross, S_gram, sigma_c):
    """Analytic MSE ``sigma_c^2 Tr(G^*G (S^*G)^{-1} S^*S (G^*S)^{-1})`` of :func:`subspace_consistent`."""
    S_cross = _square_cross(S_cross)
    # with S^*S = C C^H and G^*G = Lg Lg^H the trace is ||Lg^H (S^*G)^{-1} C||_F^2
    C = np.linalg.cholesky(np.asarray(S_gram, dtype=complex))
    Lg = np.linalg.cholesky(np.asarray(G_gram, dtype=complex))
    Y = np.linalg.solve(S_cross, C)
    return float(np.sum(np.abs(Lg.conj().T @ Y) ** 2)) * sigma_c**2


def subspace_bound_pair(G_gram, S_cross, S_gram, sigma_c):
    """``(analytic_mse, crb)``; the two agree because the estimator is efficient."""
    return subspace_consistent_mse(G_gram, S_cross, S_gram, sigma_c), subspace_crb(G_gram, S_cross, S_gram, sigma_c).mse_bound


def bayes_linear_reconstruct(c, plan):
    """Shrinkage reconstruction ``x_hat[p_n] = alpha_n c_n / T``.

    ``c`` must come from the plan's kernels (see
    :meth:`KernelBudgetPlan.scheme`), in plan order.
    """
    c = np.asarray(c, dtype=complex).ravel()
    if len(c) != len(plan.chosen):
        raise ConfigError(f"got {len(c)} samples for a plan with {len(plan.chosen)} kernels")
    return FourierCoeffVector(plan.T, plan.chosen, plan.shrinkage * c / plan.T)


def signal_mse(x_hat, x):
    """Squared L2 distance over one period (Parseval over the union of supports)."""
    if abs(x_hat.period - x.period) > 1e-12 * x.period:
        raise ConfigError(f"period mismatch: {x_hat.period} vs {x.period}")
    idx = np.union1d(x_hat.indices, x.indices)
    diff = x_hat.restrict(idx) - x.restrict(idx)
    return float(x.period * np.sum(np.abs(diff) ** 2))


def match_pulses(theta_hat, theta):
    """Pair estimated and true pulses by minimal circular delay distance.

    Returns index arrays ``(est, true)`` and the matched circular distances.
    """
    T = theta.period
    d = np.abs(theta_hat.delays[:, None] - theta.delays[None, :])
    d = np.minimum(d, T - d)
    rows, cols = linear_sum_assignment(d)
    return rows, cols, d[rows, cols]
