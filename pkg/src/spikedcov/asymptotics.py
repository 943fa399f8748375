"""Limiting-law machinery for the weak-identifiability regimes.

When the spike r_n v shrinks at or below the 1/√n contiguity rate, the
Anderson statistic no longer converges to chi-square(p−1); its limit is
the random-matrix functional

    Q_A  →  Σ_{j=2}^p (ℓ₁(v) − ℓ_j(v))² (w_{j1}(v))²,

built from the spectrum and eigenvector frame of a GOE-type matrix with a
rank-one shift v.  This module samples that law (Gaussian and elliptical),
estimates the resulting type-I risks, evaluates the joint eigenvalue
density, and provides the noncentrality parameters and power curves of the
local analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .distributions import (
    Rng,
    chi2_quantile,
    min_kappa,
    noncentral_chi2_cdf,
    sample_goe,
    sample_z_elliptical,
    _elliptical_vech_factor,
    _vech_indices,
)
from .statistics import SampleSummary

__all__ = [
    "EigenvectorFrame",
    "LocalAlternative",
    "LocalExperiment",
    "RiskEstimate",
    "qa_limit_sample",
    "type1_risk_iii",
    "type1_risk_iv",
    "eigen_limit_sample",
    "joint_eigenvalue_density",
    "ncp_regime12",
    "ncp_hpv_iii",
    "ncp_oracle_iii",
    "asymptotic_power",
    "local_alternative",
    "local_experiment",
]

REGIMES = ("i", "ii", "iii", "iv")

# Replicates per block in the vectorized risk estimators.  Part of the
# random-stream layout: changing it reshuffles draws for a given seed.
_BLOCK = 32768


@dataclass(frozen=True)
class EigenvectorFrame:
    """Spectrum and eigenvector frame of a limit matrix.

    ``values`` are the eigenvalues in descending order; row j of ``frame``
    is the eigenvector w_j, sign-fixed so that every first entry w_{j1}
    is positive.
    """

    values: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        E = np.asarray(self.frame, dtype=float)
        if np.any(np.diff(values) > 0):
            raise ValueError("frame eigenvalues must be in descending order")
        if float(np.max(np.abs(E @ E.T - np.eye(E.shape[0])))) > 1e-10:
            raise ValueError("frame rows must be orthonormal (tol 1e-10)")
        if np.any(E[:, 0] <= 0):
            raise ValueError("frame sign convention violated: w_{j1} must be positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "frame", E)


@dataclass(frozen=True)
class LocalAlternative:
    """Admissible local perturbation: θ₁ = θ₁⁰ + ν τ stays on the sphere,
    which forces θ₁⁰ᵀτ = −(ν/2)‖τ‖²."""

    tau: np.ndarray
    nu: float
    residual: float


def local_alternative(theta0: np.ndarray, tau: np.ndarray, nu: float) -> LocalAlternative:
    """Validate and package a local alternative direction.

    Raises ValueError when the unit-sphere admissibility constraint
    θ₁⁰ᵀτ = −(ν/2)‖τ‖² is violated beyond 1e-10.
    """
    theta0 = np.asarray(theta0, dtype=float)
    tau = np.asarray(tau, dtype=float)
    residual = abs(float(theta0 @ tau) + 0.5 * nu * float(tau @ tau))
    if residual > 1e-10:
        raise ValueError(
            f"inadmissible perturbation: constraint residual {residual:.3e} exceeds 1e-10"
        )
    return LocalAlternative(tau=tau, nu=float(nu), residual=residual)


@dataclass(frozen=True)
class LocalExperiment:
    """Central sequence and Fisher information of the local experiment."""

    delta: int
    central: np.ndarray
    info: np.ndarray


def _qa_from_spectrum(lam_desc: np.ndarray, first_components: np.ndarray) -> float:
    l1 = lam_desc[0]
    return float(np.sum((l1 - lam_desc[1:]) ** 2 * first_components[1:] ** 2))


def qa_limit_sample(p: int, v: float, kappa: float = 0.0, rng: Optional[Rng] = None) -> float:
    """One draw from the limiting null law of the Anderson statistic.

    Eigendecomposes Z_f + diag(v, 0, ..., 0) and returns
    Σ_{j≥2} (ℓ₁−ℓ_j)² w_{j1}², divided by (1+κ) so that the elliptical
    version matches the limit of the kurtosis-corrected statistic.
    v = 0 gives the strict-contiguity (vanishing spike) law.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    if v < 0:
        raise ValueError("v must be nonnegative")
    if rng is None:
        raise ValueError("an explicit rng is required")
    Z = sample_z_elliptical(p, kappa, rng)
    Z[0, 0] += v
    lam, V = np.linalg.eigh(Z)
    lam_desc = lam[::-1]
    first = V[0, ::-1]
    return _qa_from_spectrum(lam_desc, first) / (1.0 + kappa)


def _goe_block(p: int, m: int, rng: Rng) -> np.ndarray:
    G = rng.standard_normal((m, p, p))
    return (G + np.transpose(G, (0, 2, 1))) / math.sqrt(2.0)


def _elliptical_block(p: int, kappa: float, m: int, rng: Rng) -> np.ndarray:
    if kappa == 0.0:
        return _goe_block(p, m, rng)
    if kappa > 0.0:
        Z = math.sqrt(1.0 + kappa) * _goe_block(p, m, rng)
        g = rng.standard_normal(m)
        Z += math.sqrt(kappa) * g[:, None, None] * np.eye(p)
        return Z
    F = _elliptical_vech_factor(p, kappa)
    y = rng.standard_normal((m, F.shape[1])) @ F.T
    Z = np.zeros((m, p, p))
    for a, (i, j) in enumerate(_vech_indices(p)):
        Z[:, i, j] = y[:, a]
        Z[:, j, i] = y[:, a]
    return Z


def _qa_limit_block(p: int, v: float, kappa: float, m: int, rng: Rng) -> np.ndarray:
    Z = _elliptical_block(p, kappa, m, rng)
    Z[:, 0, 0] += v
    lam, V = np.linalg.eigh(Z)  # ascending along the last axis
    l1 = lam[:, -1]
    gaps2 = (l1[:, None] - lam[:, :-1]) ** 2
    w2 = V[:, 0, :-1] ** 2
    return (gaps2 * w2).sum(axis=1) / (1.0 + kappa)


class RiskEstimate(NamedTuple):
    """Monte Carlo estimate of a rejection probability."""

    risk: float
    se: float
    M: int


def type1_risk_iii(
    p: int, v: float, alpha: float, M: int, rng: Rng, *, kappa: float = 0.0
) -> RiskEstimate:
    """Approximate asymptotic type-I risk of the Anderson test on the
    contiguity boundary (r_n = 1/√n, spike strength v), with binomial SE.

    The optional ``kappa`` switches to the elliptical limit law of the
    kurtosis-corrected statistic.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    crit = chi2_quantile(1.0 - alpha, p - 1)
    hits = 0
    done = 0
    while done < M:
        m = min(_BLOCK, M - done)
        draws = _qa_limit_block(p, v, kappa, m, rng)
        hits += int(np.count_nonzero(draws > crit))
        done += m
    risk = hits / M
    return RiskEstimate(risk=risk, se=math.sqrt(risk * (1.0 - risk) / M), M=M)


def type1_risk_iv(p: int, alpha: float, M: int, rng: Rng) -> RiskEstimate:
    """Approximate asymptotic type-I risk below the contiguity rate
    (vanishing spike); equals :func:`type1_risk_iii` at v = 0."""
    return type1_risk_iii(p, 0.0, alpha, M, rng)


def eigen_limit_sample(
    p: int,
    v: float,
    regime: str,
    kappa: float = 0.0,
    rng: Optional[Rng] = None,
) -> tuple[np.ndarray, Optional[EigenvectorFrame]]:
    """One draw of the limiting eigenvalue vector (and, on the boundary
    and below, the eigenvector frame) of √n r_n-scale spectral fluctuations.

    Regimes: "i" (constant spike), "ii" (shrinking, above 1/√n), "iii"
    (boundary r_n = 1/√n), "iv" (below; v is ignored).  In regimes i/ii
    the first eigenvalue limit is a normal scalar and no frame exists.
    """
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}")
    if p < 2:
        raise ValueError("p must be at least 2")
    if v < 0:
        raise ValueError("v must be nonnegative")
    if rng is None:
        raise ValueError("an explicit rng is required")
    Zf = sample_z_elliptical(p, kappa, rng)
    if regime in ("i", "ii"):
        scale = (1.0 + v) if regime == "i" else 1.0
        l1 = scale * Zf[0, 0]
        trailing = np.sort(np.linalg.eigvalsh(Zf[1:, 1:]))[::-1]
        return np.concatenate(([l1], trailing)), None
    A = Zf.copy()
    A[0, 0] += v
    lam, V = np.linalg.eigh(A)
    lam_desc = lam[::-1]
    V = V[:, ::-1]
    signs = np.where(V[0, :] < 0, -1.0, 1.0)
    frame = EigenvectorFrame(values=lam_desc, frame=(V * signs).T)
    if regime == "iii":
        # First eigenvalue limit comes from the complementary shift
        # Z_f − diag(0, v, ..., v) = A − v·I, so it is ℓ₁(A) − v.
        values = lam_desc.copy()
        values[0] -= v
        return values, frame
    return lam_desc, frame


def joint_eigenvalue_density(ell: np.ndarray, kappa: float = 0.0) -> float:
    """Unnormalized joint density of the limiting eigenvalues (regime iv).

    κ = 0:  exp(−¼ Σℓ²) · Π_{k<j} (ℓ_k − ℓ_j);
    κ ≠ 0:  the exponent gains the correction
            −(1/(4(1+κ))) [Σℓ² − (κ/((p+2)κ+2)) (Σℓ)²].
    Normalizing constants are intentionally omitted.
    """
    ell = np.asarray(ell, dtype=float)
    if ell.ndim != 1 or ell.shape[0] < 1:
        raise ValueError("ell must be a nonempty vector")
    if np.any(np.diff(ell) > 0):
        raise ValueError("eigenvalues must be sorted in descending order")
    p = ell.shape[0]
    if kappa < min_kappa(p) - 1e-12:
        raise ValueError("kappa below the elliptical lower bound -2/(p+2)")
    vandermonde = 1.0
    for k in range(p - 1):
        vandermonde *= float(np.prod(ell[k] - ell[k + 1 :]))
    s2 = float(np.sum(ell**2))
    if kappa == 0.0:
        expo = -0.25 * s2
    else:
        s1 = float(np.sum(ell))
        expo = -(s2 - kappa / ((p + 2) * kappa + 2.0) * s1**2) / (4.0 * (1.0 + kappa))
    return float(np.exp(expo) * vandermonde)


def ncp_regime12(v: float, delta: int, tau_norm: float) -> float:
    """Noncentrality parameter of the optimal tests above the boundary:
    (v²/(1+δv)) ‖τ‖²."""
    if delta not in (0, 1):
        raise ValueError("delta must be 0 or 1")
    if tau_norm < 0:
        raise ValueError("tau_norm must be nonnegative")
    return v**2 / (1.0 + delta * v) * tau_norm**2


def _tau_squared(tau_norm: float) -> float:
    if not 0.0 <= tau_norm <= math.sqrt(2.0) + 1e-12:
        raise ValueError("tau_norm must lie in [0, sqrt(2)] (hemisphere restriction)")
    # min() keeps t exactly 2 at the hemisphere boundary, where squaring
    # the float sqrt(2) would overshoot and leak a spurious residual.
    return min(tau_norm**2, 2.0)


def ncp_hpv_iii(v: float, tau_norm: float) -> float:
    """Boundary-regime noncentrality of the Gram-Schmidt test:
    (v²/16) t (4−t) (2−t)² with t = ‖τ‖².  Vanishes at t = 2
    (orthogonal alternatives are asymptotically invisible)."""
    t = _tau_squared(tau_norm)
    return v**2 / 16.0 * t * (4.0 - t) * (2.0 - t) ** 2


def ncp_oracle_iii(v: float, tau_norm: float) -> float:
    """Boundary-regime noncentrality of the oracle test:
    (v²/16) t (4−t) (4 − 2t + t²/2) with t = ‖τ‖²."""
    t = _tau_squared(tau_norm)
    return v**2 / 16.0 * t * (4.0 - t) * (4.0 - 2.0 * t + 0.5 * t**2)


def asymptotic_power(df: int, ncp: float, alpha: float) -> float:
    """Power of a chi-square(df) test at level alpha under noncentrality ncp."""
    crit = chi2_quantile(1.0 - alpha, df)
    return 1.0 - noncentral_chi2_cdf(crit, df, ncp)


def local_experiment(
    s: SampleSummary,
    theta0: np.ndarray,
    v: float,
    delta: int,
    sigma_n: np.ndarray,
) -> LocalExperiment:
    """Central sequence and information matrix of the local experiment.

    Δ_{n,δ} = (√n v/(1+δv)) (I − θ₀θ₀ᵀ)(S − Σ_n)θ₀ and
    Γ_δ = (v²/(1+δv)) (I − θ₀θ₀ᵀ).  The quadratic form ΔᵀΓ⁻Δ (pseudo-
    inverse on the orthocomplement) reproduces the q_delta statistic.
    """
    theta0 = np.asarray(theta0, dtype=float)
    if delta not in (0, 1):
        raise ValueError("delta must be 0 or 1")
    sigma_n = np.asarray(sigma_n, dtype=float)
    P_comp = np.eye(s.p) - np.outer(theta0, theta0)
    central = (math.sqrt(s.n) * v / (1.0 + delta * v)) * (P_comp @ ((s.cov - sigma_n) @ theta0))
    info = v**2 / (1.0 + delta * v) * P_comp
    return LocalExperiment(delta=delta, central=central, info=info)
