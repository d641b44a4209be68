"""Fisher information and Cramer-Rao bounds for continuous-time and sampled FRI measurements.

Parameters are always real. A Fisher matrix is carried together with a
factor ``W`` such that ``J = W^T W``; bounds are computed from an SVD of the
column-equilibrated factor so that badly scaled or nearly redundant
parameterizations (closely spaced pulses) are handled without forming
``J^{-1}`` explicitly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigError, NoiseModelError, UnidentifiableError
from .sampling import RANK_TOL
from .signal_model import JacobianMatrix, jacobian_fourier

ILL_CONDITIONED = 1e12
_REAL_RTOL = 1e-10


class Provenance(enum.Enum):
    CONTINUOUS = "continuous"
    SAMPLED = "sampled"


def _equilibrate(W):
    """Split ``W`` into unit-norm columns and their norms."""
    norms = np.linalg.norm(W, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return W / safe, norms


def _null_basis(norms, V, s):
    """Orthonormal basis (columns) of the null space of ``W`` in original coordinates.

    ``V``, ``s`` come from the SVD of the equilibrated factor; zero columns of
    ``W`` appear there as null directions too.
    """
    small = s <= RANK_TOL * s[0] if s[0] > 0 else np.ones(len(s), bool)
    if not np.any(small):
        return np.zeros((len(norms), 0))
    safe = np.where(norms > 0, norms, 1.0)
    q, _ = np.linalg.qr(V[:, small] / safe[:, None])
    return q


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric PSD Fisher information ``J = W^T W`` with its provenance.

    Parameters
    ----------
    mat : ndarray, shape (K, K)
    factor : ndarray, shape (R, K)
        Real factor ``W`` with ``mat = W.T @ W``.
    provenance : Provenance
    sigma_c, sigma_d : float
        Noise levels the matrix was computed for.
    scheme : str, optional
        Short description of the sampling scheme (sampled provenance only).
    """

    mat: np.ndarray
    factor: np.ndarray
    provenance: Provenance
    sigma_c: float
    sigma_d: float = 0.0
    scheme: str | None = None
    names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        J = np.asarray(self.mat, dtype=float)
        scale = max(float(np.max(np.abs(J), initial=0.0)), 1e-300)
        if np.max(np.abs(J - J.T), initial=0.0) > 1e-12 * scale:
            raise ValueError("Fisher matrix is not symmetric")
        J = 0.5 * (J + J.T)
        J.setflags(write=False)
        object.__setattr__(self, "mat", J)

    @property
    def K(self):
        return self.mat.shape[0]

    @cached_property
    def _svd(self):
        Ws, norms = _equilibrate(self.factor)
        s = np.linalg.svd(Ws, compute_uv=False) if Ws.size else np.zeros(0)
        return s, norms

    @property
    def condition_number(self):
        """Condition number of the diagonally rescaled FIM (inf when singular)."""
        s, norms = self._svd
        if np.any(norms == 0) or len(s) < self.K or s[-1] == 0:
            return np.inf
        return float((s[0] / s[-1]) ** 2)

    def min_eigenvalue_ratio(self):
        w = np.linalg.eigvalsh(self.mat)
        return float(w[0] / w[-1]) if w[-1] > 0 else 0.0


@dataclass(frozen=True)
class CrbValue:
    """Lower bound on the signal MSE of any unbiased estimator."""

    mse_bound: float
    K: int
    per_parameter: np.ndarray | None = None
    condition_number: float = 1.0
    ill_conditioned: bool = False
    normalized: float | None = None


def _dense(D):
    if isinstance(D, JacobianMatrix):
        return D.matrix, D.period
    return np.atleast_2d(np.asarray(D, dtype=complex)), None


def _is_real_model(D):
    """True when the Jacobian rows are conjugate-symmetric (a real signal model)."""
    if not isinstance(D, JacobianMatrix):
        return True
    mirrored = D.restrict(-D.indices)
    scale = max(float(np.max(np.abs(D.matrix), initial=0.0)), 1e-300)
    return bool(np.all(np.abs(mirrored - np.conj(D.matrix)) <= _REAL_RTOL * scale))


def _require_real(D):
    if not _is_real_model(D):
        raise ConfigError("Fisher information is only defined here for real-valued signal models")


def m_matrix(D, period=None):
    """Gramian ``M = Re(T D^H D)`` of the Jacobian columns.

    Parameters
    ----------
    D : JacobianMatrix or ndarray
    period : float, optional
        Needed only when ``D`` is a plain array.
    """
    mat, T = _dense(D)
    T = period if period is not None else T
    if T is None:
        raise ConfigError("m_matrix needs the period of the Fourier representation")
    full = T * (mat.conj().T @ mat)
    if _is_real_model(D):
        scale = max(float(np.max(np.abs(full), initial=0.0)), 1e-300)
        assert np.max(np.abs(full.imag), initial=0.0) <= _REAL_RTOL * scale, "M is not real for a real model"
    return np.ascontiguousarray(full.real)


def fim_continuous(D, sigma_c, period=None):
    """Fisher information ``M / sigma_c^2`` for observing the whole signal in white noise."""
    if not sigma_c > 0:
        raise NoiseModelError("continuous-time FIM needs sigma_c > 0")
    _require_real(D)
    mat, T = _dense(D)
    T = period if period is not None else T
    M = m_matrix(D, T)
    W = np.sqrt(T) * np.vstack([mat.real, mat.imag]) / sigma_c
    names = D.names if isinstance(D, JacobianMatrix) else ()
    return FisherMatrix(M / sigma_c**2, W, Provenance.CONTINUOUS, float(sigma_c), names=names)


def _whitened_cross(D, scheme, noise):
    """Real whitened cross-matrix ``W`` with ``J_samp = W^T W``."""
    if not isinstance(D, JacobianMatrix):
        raise ConfigError("fim_sampled needs a JacobianMatrix")
    if abs(D.period - scheme.base_period) > 1e-12 * scheme.base_period:
        raise ConfigError(f"Jacobian period {D.period} differs from scheme period {scheme.base_period}")
    if noise.sigma_c == 0 and noise.sigma_d == 0:
        raise NoiseModelError("sampled FIM needs sigma_c > 0 or sigma_d > 0")
    _require_real(D)
    T = scheme.base_period
    # independent digital noise on conjugate samples carries extra information
    rows, closed, var = scheme.real_form(pair_to_trig=noise.sigma_d == 0)
    A = T * (rows @ D.restrict(closed))
    G = T * (rows @ rows.conj().T)
    assert np.max(np.abs(A.imag), initial=0.0) <= _REAL_RTOL * max(np.max(np.abs(A)), 1e-300)
    gamma = noise.sigma_c**2 * G.real + noise.sigma_d**2 * np.diag(var)
    w, U = np.linalg.eigh(0.5 * (gamma + gamma.T))
    keep = w > RANK_TOL * w[-1]
    return (U[:, keep].T @ A.real) / np.sqrt(w[keep])[:, None]


def fim_sampled(D, scheme, noise, period=None):
    """Fisher information of the samples ``c = S^* y + n``.

    Real signals are handled in the real form of the scheme (see
    :meth:`SamplingScheme.real_form`), so the FIM is the real sandwich
    ``A^T Gamma^+ A`` with ``A = S^* dh/dtheta`` and
    ``Gamma = sigma_c^2 S^*S + sigma_d^2 I``.
    """
    if period is not None and isinstance(D, JacobianMatrix) and abs(period - D.period) > 1e-12 * period:
        raise ConfigError("period argument disagrees with the Jacobian")
    W = _whitened_cross(D, scheme, noise)
    desc = f"{scheme.kind}:N={scheme.N}"
    return FisherMatrix(W.T @ W, W, Provenance.SAMPLED, noise.sigma_c, noise.sigma_d, desc, D.names)


def _factor_of(J):
    if isinstance(J, FisherMatrix):
        return J.factor
    J = np.asarray(J, dtype=float)
    w, U = np.linalg.eigh(0.5 * (J + J.T))
    return (U * np.sqrt(np.clip(w, 0.0, None))).T


def crb_trace(M, J):
    """``Tr(M J^{-1})`` from the factor of ``J``.

    Parameters
    ----------
    M : ndarray, shape (K, K)
        Jacobian Gramian from :func:`m_matrix`.
    J : FisherMatrix or ndarray

    Raises
    ------
    UnidentifiableError
        When a parameter carries no information or the equilibrated factor
        has a singular value below ``RANK_TOL`` times the largest.
    """
    W = _factor_of(J)
    M = np.asarray(M, dtype=float)
    K = W.shape[1]
    Ws, norms = _equilibrate(W)
    _, s, Vt = np.linalg.svd(Ws, full_matrices=True)
    s = np.concatenate([s, np.zeros(K - len(s))]) if len(s) < K else s
    V = Vt.T
    if np.any(norms == 0) or s[0] == 0 or s[-1] <= RANK_TOL * s[0]:
        rank = int(np.sum(s > RANK_TOL * s[0])) if s[0] > 0 else 0
        null = _null_basis(norms, V, s)
        raise UnidentifiableError(f"Fisher matrix is singular (rank {rank} < {K})", null, rank)
    Ms = M / np.outer(norms, norms)
    inv_s2 = 1.0 / s**2
    # J^{-1} = D^{-1} V S^{-2} V^T D^{-1}; only its action on M is needed
    Jinv_s = (V * inv_s2) @ V.T
    per = np.einsum("ij,ji->i", Ms, Jinv_s)
    bound = float(np.sum(per))
    cond = float((s[0] / s[-1]) ** 2)
    if not bound > 0:
        raise UnidentifiableError("trace bound is not positive", np.zeros((K, 0)), K)
    return CrbValue(bound, K, per, cond, cond > ILL_CONDITIONED)


def crb_continuous(K, sigma_c, window=None):
    """Continuous-time bound ``K sigma_c^2``.

    With ``window`` (the observation length ``T0``) the bound on
    ``MSE / T0`` is also reported as ``(K / T0) sigma_c^2``.
    """
    if K < 1:
        raise ConfigError("parameter count must be at least 1")
    if not sigma_c > 0:
        raise NoiseModelError("continuous bound needs sigma_c > 0")
    normalized = None
    if window is not None:
        if not window > 0:
            raise ConfigError("window length must be positive")
        normalized = K / window * sigma_c**2
    return CrbValue(K * sigma_c**2, int(K), None, 1.0, False, normalized)


def _cross_factor(S_cross, S_gram):
    """``X = C^{-1} S_cross`` with ``S_gram = C C^H``, so ``X^H X = S_cross^H S_gram^{-1} S_cross``."""
    C = np.linalg.cholesky(np.asarray(S_gram, dtype=complex))
    return solve_triangular(C, np.asarray(S_cross, dtype=complex), lower=True), C


def _check_rank(X, what):
    s = np.linalg.svd(X, compute_uv=False)
    K = X.shape[1]
    if len(s) < K or s[0] == 0 or s[-1] <= RANK_TOL * s[0]:
        rank = int(np.sum(s > RANK_TOL * s[0])) if len(s) and s[0] > 0 else 0
        _, _, Vh = np.linalg.svd(X)
        null = Vh[rank:].conj().T
        raise UnidentifiableError(f"{what} is rank deficient ({rank} < {K})", null, rank)


def subspace_crb(G_gram, S_cross, S_gram, sigma_c):
    """Bound ``sigma_c^2 Tr(G^*G (G^*S (S^*S)^{-1} S^*G)^{-1})`` for a subspace model.

    Parameters
    ----------
    G_gram : ndarray, shape (K, K)
        ``G^*G``.
    S_cross : ndarray, shape (N, K)
        ``S^*G`` with entries ``<g_k, s_n>``.
    S_gram : ndarray, shape (N, N)
        ``S^*S``.
    """
    X, _ = _cross_factor(S_cross, S_gram)
    _check_rank(X, "S*G")
    s = np.linalg.svd(X, compute_uv=False)
    # (X^H X)^{-1} = R^{-1} R^{-H}; the trace against G^*G = Lg Lg^H is ||R^{-H} Lg||_F^2
    R = np.linalg.qr(X, mode="r")
    Lg = np.linalg.cholesky(np.asarray(G_gram, dtype=complex))
    Z = solve_triangular(R, Lg, trans="C", lower=False)
    bound = float(np.sum(np.abs(Z) ** 2)) * sigma_c**2
    return CrbValue(bound, X.shape[1], None, float((s[0] / s[-1]) ** 2), False)


def identifiability(D, scheme):
    """Rank report for ``S^* dh/dtheta`` (real parameters).

    Returns
    -------
    dict
        ``identifiable`` (bool), ``rank`` (int) and ``null_basis``
        (ndarray whose columns span the unidentifiable directions).
    """
    T = scheme.base_period
    A = T * (scheme.mixing @ D.restrict(scheme.freqs))
    W = np.vstack([A.real, A.imag])
    K = W.shape[1]
    Ws, norms = _equilibrate(W)
    _, s, Vt = np.linalg.svd(Ws, full_matrices=True)
    s = np.concatenate([s, np.zeros(K - len(s))]) if len(s) < K else s
    if s[0] == 0:
        return {"identifiable": False, "rank": 0, "null_basis": np.eye(K)}
    rank = int(np.sum(s > RANK_TOL * s[0]))
    return {"identifiable": rank == K, "rank": rank, "null_basis": _null_basis(norms, Vt.T, s)}


def sampled_crb(theta, pulse, scheme, noise):
    """Convenience wrapper: Jacobian, ``M``, sampled FIM and trace bound in one call."""
    D = jacobian_fourier(theta, pulse)
    return crb_trace(m_matrix(D), fim_sampled(D, scheme, noise))


def continuous_fim(theta, pulse, sigma_c):
    D = jacobian_fourier(theta, pulse)
    return fim_continuous(D, sigma_c)


__all__ = [
    "ILL_CONDITIONED",
    "Provenance",
    "FisherMatrix",
    "CrbValue",
    "m_matrix",
    "fim_continuous",
    "fim_sampled",
    "crb_trace",
    "crb_continuous",
    "subspace_crb",
    "identifiability",
    "sampled_crb",
    "continuous_fim",
]
