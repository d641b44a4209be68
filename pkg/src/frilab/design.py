"""MSE-optimal linear sampling kernels under a random pulse-stream prior.

For the periodic model with delays uniform on ``[0, T)`` and uncorrelated
zero-mean amplitudes of variance ``sigma_a^2``, the signal autocorrelation is
diagonalized by the exponentials ``exp(2j pi k t / T)`` with eigenvalues
``lambda_k = L sigma_a^2 T |h[k]|^2``. The best ``N`` kernels are the
exponentials with the ``N`` largest eigenvalues, and each sample is shrunk
by ``lambda / (lambda + sigma_c^2)`` before reconstruction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import subspace_angles
from scipy.stats import unitary_group

from .errors import ConfigError, ConstraintViolationError, DegenerateSchemeError
from .sampling import RANK_TOL, SamplingScheme

ORTHONORMAL_TOL = 1e-10
KERNEL_NORMALIZATION = "unit-modulus exponentials exp(2j pi p t / T)"


def _tie_key(lam):
    """Eigenvalue rounded to 12 significant digits so float noise does not break ties."""
    return float(f"{lam:.11e}")


@dataclass(frozen=True)
class SpectrumDesign:
    """Eigenvalues of the prior autocorrelation with their frequency indices.

    ``eigenvalues`` is sorted descending; ``kernel_indices[n]`` is the index
    ``p_n`` of the exponential eigenfunction belonging to ``eigenvalues[n]``.
    """

    eigenvalues: np.ndarray
    kernel_indices: np.ndarray
    sigma_a: float
    L: int
    T: float

    @property
    def total_energy(self):
        return float(np.sum(self.eigenvalues))


@dataclass(frozen=True)
class KernelBudgetPlan:
    """The ``N`` chosen exponential kernels and their shrinkage weights."""

    N: int
    chosen: np.ndarray
    eigenvalues: np.ndarray
    shrinkage: np.ndarray
    sigma_c: float
    T: float
    saturated: bool = False
    tie_break_note: str = ""
    normalization: str = field(default=KERNEL_NORMALIZATION)

    def scheme(self):
        """Sampling scheme with one exponential per chosen index, in plan order."""
        return SamplingScheme.custom(self.chosen, np.eye(len(self.chosen)), self.T)

    def to_dict(self):
        return {
            "indices": [int(k) for k in self.chosen],
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "shrinkage": [float(v) for v in self.shrinkage],
            "budget": int(self.N),
            "sigma_c": float(self.sigma_c),
            "period": float(self.T),
            "saturated": bool(self.saturated),
            "tie_break_note": self.tie_break_note,
            "normalization": self.normalization,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def periodic_spectrum(pulse, L, sigma_a):
    """Eigen-decomposition of the periodic-model prior autocorrelation.

    Indices with a zero coefficient are left out. Ordering is by decreasing
    eigenvalue, then by increasing ``|k|``, then positive before negative.
    """
    if L < 1:
        raise ConfigError("need at least one pulse")
    if not sigma_a > 0:
        raise ConfigError("amplitude prior std must be positive")
    k = np.asarray(pulse.indices)
    lam = L * sigma_a**2 * pulse.period * np.abs(pulse.values) ** 2
    keep = lam > 0
    k, lam = k[keep], lam[keep]
    order = sorted(range(len(k)), key=lambda i: (-_tie_key(lam[i]), abs(int(k[i])), int(k[i]) < 0))
    eig, idx = lam[order], k[order]
    eig.setflags(write=False)
    idx.setflags(write=False)
    return SpectrumDesign(eig, idx, float(sigma_a), int(L), pulse.period)


def top_n_kernels(spec, N, sigma_c):
    """Plan of the ``N`` best exponential kernels.

    If ``N`` exceeds the number of nonzero eigenvalues, only those are
    used and the plan is marked ``saturated``: further kernels would
    measure pure noise.
    """
    if N <= 0:
        raise ConfigError("kernel budget must be positive")
    if sigma_c < 0:
        raise ConfigError("sigma_c must be non-negative")
    n_avail = len(spec.eigenvalues)
    take = min(N, n_avail)
    lam = np.array(spec.eigenvalues[:take])
    chosen = np.array(spec.kernel_indices[:take])
    shrink = lam / (lam + sigma_c**2)
    note = ""
    if take < n_avail and _tie_key(spec.eigenvalues[take - 1]) == _tie_key(spec.eigenvalues[take]):
        tied = sum(_tie_key(v) == _tie_key(lam[-1]) for v in spec.eigenvalues)
        note = (
            f"{tied} indices share eigenvalue {lam[-1]:.6g}; "
            "picked smallest |k| first, positive before negative"
        )
    return KernelBudgetPlan(int(N), chosen, lam, shrink, float(sigma_c), spec.T, N > n_avail, note)


def bayes_linear_mse(spec, N, sigma_c):
    """MSE of the optimal linear estimator from the top-``N`` kernels."""
    plan = top_n_kernels(spec, N, sigma_c)
    captured = np.sum(plan.eigenvalues**2 / (plan.eigenvalues + sigma_c**2)) if sigma_c > 0 else np.sum(plan.eigenvalues)
    return float(spec.total_energy - captured)


def projection_mse(spec, N, sigma_c):
    """MSE of the unshrunk estimator ``x_hat[p] = c_p / T`` from the same kernels."""
    plan = top_n_kernels(spec, N, sigma_c)
    return float(spec.total_energy - np.sum(plan.eigenvalues) + len(plan.chosen) * sigma_c**2)


def klt_subspace(G_gram, R_theta):
    """Eigenfunctions of ``G R G^*`` in the generator basis.

    Parameters
    ----------
    G_gram : ndarray, shape (K, K)
        Gramian ``G^*G`` of the generators (positive definite).
    R_theta : ndarray, shape (K, K)
        Covariance of the generator coefficients.

    Returns
    -------
    dict
        ``Psi_coords`` (columns are eigenfunctions expressed in the
        generators, orthonormal in the signal inner product) and
        ``eigenvalues`` (descending).
    """
    G_gram = np.asarray(G_gram)
    R_theta = np.asarray(R_theta)
    w, U = np.linalg.eigh(0.5 * (G_gram + G_gram.conj().T))
    if w[-1] <= 0 or w[0] <= RANK_TOL * w[-1]:
        raise DegenerateSchemeError("generator Gramian is singular")
    half = (U * np.sqrt(w)) @ U.conj().T
    inv_half = (U / np.sqrt(w)) @ U.conj().T
    C = half @ R_theta @ half
    d, V = np.linalg.eigh(0.5 * (C + C.conj().T))
    d, V = d[::-1], V[:, ::-1]
    psi = inv_half @ V
    check = psi.conj().T @ G_gram @ psi
    assert np.allclose(check, np.eye(len(d)), atol=1e-8), "KLT eigenfunctions are not orthonormal"
    d = np.where(np.abs(d) <= 1e-14 * max(np.max(np.abs(d)), 1e-300), 0.0, d)
    return {"Psi_coords": psi, "eigenvalues": d}


def brute_force_design_objective(A, lambdas, sigma_c):
    """Captured energy ``sum_n sum_k |A[n, k]|^2 lambda_k^2 / (lambda_k + sigma_c^2)``.

    Rows of ``A`` are the sampling directions expressed in the KLT basis
    and must be orthonormal.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    lam = np.asarray(lambdas, dtype=float)
    if A.shape[1] != len(lam):
        raise ConfigError("design matrix width must match the number of eigenvalues")
    err = np.max(np.abs(A @ A.conj().T - np.eye(A.shape[0])))
    if err > ORTHONORMAL_TOL:
        raise ConstraintViolationError(f"design rows are not orthonormal (deviation {err:.3g})")
    weights = lam**2 / (lam + sigma_c**2) if sigma_c > 0 else lam
    return float(np.sum(np.abs(A) ** 2 @ weights))


def eigen_choice_objective(lambdas, N, sigma_c):
    """Objective attained by the top-``N`` eigen-directions."""
    lam = np.sort(np.asarray(lambdas, dtype=float))[::-1][:N]
    return float(np.sum(lam**2 / (lam + sigma_c**2)))


def random_orthonormal_designs(K, N, count, seed):
    """``count`` Haar-random ``N x K`` matrices with orthonormal rows."""
    rng = np.random.default_rng(seed)
    return [unitary_group.rvs(K, random_state=rng)[:N] for _ in range(count)]


def top_subspace_angle(A, N):
    """Largest principal angle between the row space of ``A`` and the top-``N`` eigen-directions."""
    A = np.atleast_2d(A)
    top = np.eye(A.shape[1])[:, :N]
    return float(np.max(subspace_angles(A.conj().T, top)))
