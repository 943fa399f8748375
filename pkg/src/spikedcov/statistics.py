"""Finite-sample test statistics and decisions.

Given a hypothesized direction theta0 for the j-th principal component,
two tests of H0: θ_j = theta0 are provided, both asymptotically
chi-square with p−1 degrees of freedom under suitable conditions:

* ``anderson_statistic`` — the likelihood-ratio-type statistic
  n (λ̂_j θ₀ᵀS⁻¹θ₀ + λ̂_j⁻¹ θ₀ᵀSθ₀ − 2); valid only when the spike is
  strongly identified.
* ``hpv_statistic`` — the Le Cam-style statistic built from Gram-Schmidt
  complements of theta0; retains its chi-square null law across all spike
  regimes, including vanishing spikes.

Pseudo-Gaussian (kurtosis-corrected) versions extend validity to
elliptical distributions with finite fourth moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import chi2_cdf, chi2_quantile
from .linalg import DegeneracyError, EigenSystem, gram_schmidt_complement, sym_eigen

__all__ = [
    "SampleSummary",
    "TestOutcome",
    "summarize",
    "summary_from_covariance",
    "anderson_statistic",
    "hpv_statistic",
    "kurtosis_estimate",
    "kurtosis_from_summary",
    "pseudo_gaussian",
    "q_delta",
    "oracle_statistic",
    "decide",
]


@dataclass(frozen=True)
class SampleSummary:
    """Sufficient statistics of a sample: size, mean, covariance (divisor n),
    and the eigendecomposition of the covariance."""

    n: int
    mean: np.ndarray
    cov: np.ndarray
    eigen: EigenSystem

    @property
    def p(self) -> int:
        return self.cov.shape[0]


@dataclass(frozen=True)
class TestOutcome:
    """Decision record: statistic, degrees of freedom, p-value, level, flag.

    ``reject`` is equivalent to ``statistic > chi2_quantile(1-alpha, df)``
    and to ``pvalue < alpha`` (boundary cases consistent to 1e-12).
    """

    statistic: float
    df: int
    pvalue: float
    alpha: float
    reject: bool


def summarize(X: np.ndarray) -> SampleSummary:
    """Mean, covariance (divisor n) and eigensystem of an n×p data matrix.

    Raises
    ------
    ValueError
        If entries are not finite or n < p+1.
    DegeneracyError
        If the covariance is numerically rank-deficient
        (smallest eigenvalue < 1e-12 · largest).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d data matrix")
    n, p = X.shape
    if not np.all(np.isfinite(X)):
        raise ValueError("data matrix contains non-finite entries")
    if n < p + 1:
        raise ValueError(f"need n >= p+1 observations, got n={n}, p={p}")
    mean = X.mean(axis=0)
    Xc = X - mean
    S = (Xc.T @ Xc) / n
    S = (S + S.T) / 2.0  # clear rounding asymmetry before validation
    eigen = sym_eigen(S)
    if eigen.values[-1] < 1e-12 * eigen.values[0]:
        raise DegeneracyError(
            "sample covariance is numerically singular "
            f"(smallest eigenvalue {eigen.values[-1]:.3e})"
        )
    return SampleSummary(n=n, mean=mean, cov=S, eigen=eigen)


def summary_from_covariance(S: np.ndarray, n: int) -> SampleSummary:
    """Build a SampleSummary directly from a covariance matrix.

    Useful when only the covariance is available (published matrices,
    precomputed summaries).  The mean is set to zero; it plays no role in
    any statistic here.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    eigen = sym_eigen(S)
    if eigen.values[-1] < 1e-12 * eigen.values[0]:
        raise DegeneracyError("covariance matrix is numerically singular")
    S = np.asarray(S, dtype=float)
    return SampleSummary(n=n, mean=np.zeros(S.shape[0]), cov=S, eigen=eigen)


def _check_theta0(s: SampleSummary, theta0: np.ndarray) -> np.ndarray:
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (s.p,):
        raise ValueError(f"theta0 must have length p={s.p}")
    if abs(np.linalg.norm(theta0) - 1.0) > 1e-10:
        raise ValueError("theta0 must be a unit vector (within 1e-10)")
    return theta0


def _check_j(s: SampleSummary, j: int) -> int:
    if not 1 <= j <= s.p:
        raise ValueError(f"eigenvector index j must be in 1..{s.p}")
    lam = s.eigen.values
    k = j - 1
    if (k > 0 and lam[k] == lam[k - 1]) or (k < s.p - 1 and lam[k] == lam[k + 1]):
        raise DegeneracyError(
            f"eigenvalue {j} is exactly tied with a neighbour; "
            "the targeted eigenvector is not identified"
        )
    return j


def anderson_statistic(s: SampleSummary, theta0: np.ndarray, j: int = 1) -> float:
    """Likelihood-ratio-type statistic for H0: θ_j = theta0.

    Q = n (λ̂_j θ₀ᵀS⁻¹θ₀ + λ̂_j⁻¹ θ₀ᵀSθ₀ − 2), chi-square(p−1) under H0
    when the spike does not vanish asymptotically.
    """
    theta0 = _check_theta0(s, theta0)
    j = _check_j(s, j)
    lam_j = s.eigen.values[j - 1]
    quad_inv = float(theta0 @ s.eigen.inverse_apply(theta0))
    quad = float(theta0 @ s.cov @ theta0)
    return s.n * (lam_j * quad_inv + quad / lam_j - 2.0)


def hpv_statistic(s: SampleSummary, theta0: np.ndarray, j: int = 1) -> float:
    """Gram-Schmidt-based statistic for H0: θ_j = theta0.

    The frame is obtained by replacing the j-th sample eigenvector with
    theta0 and orthogonalizing the remaining eigenvectors against it (in
    their eigenvalue order); with θ̃_k the member built from the k-th
    eigenvector,

        Q = (n / λ̂_j) · Σ_{k≠j} λ̂_k⁻¹ (θ̃_kᵀ S theta0)².

    Chi-square(p−1) under H0 in every spike regime.
    """
    theta0 = _check_theta0(s, theta0)
    j = _check_j(s, j)
    lam = s.eigen.values
    V = s.eigen.vectors
    others = [k for k in range(s.p) if k != j - 1]
    frame = gram_schmidt_complement(theta0, [V[:, k] for k in others])
    St0 = s.cov @ theta0
    acc = 0.0
    for k, tilde in zip(others, frame):
        acc += (tilde @ St0) ** 2 / lam[k]
    return s.n / lam[j - 1] * acc


def kurtosis_estimate(X: np.ndarray) -> float:
    """Sample elliptical kurtosis κ̂ = (1/(n p (p+2))) Σ d_i⁴ − 1,
    d_i² the squared Mahalanobis distance w.r.t. (X̄, S)."""
    return kurtosis_from_summary(summarize(X), X)


def kurtosis_from_summary(s: SampleSummary, X: np.ndarray) -> float:
    """κ̂ computed against an existing summary (avoids re-decomposing S)."""
    X = np.asarray(X, dtype=float)
    Xc = X - s.mean
    # d_i² via the spectral inverse of S.
    W = Xc @ s.eigen.vectors
    d2 = (W * W / s.eigen.values).sum(axis=1)
    return float(np.mean(d2**2) / (s.p * (s.p + 2)) - 1.0)


def pseudo_gaussian(statistic: float, kappa_hat: float) -> float:
    """Kurtosis-corrected statistic: statistic / (1 + κ̂)."""
    if 1.0 + kappa_hat <= 0.0:
        raise ValueError("pseudo-Gaussian correction requires 1 + kappa_hat > 0")
    return statistic / (1.0 + kappa_hat)


def q_delta(s: SampleSummary, theta0: np.ndarray, v: float, delta: int) -> float:
    """Locally optimal statistic (n/(1+δv)) θ₀ᵀS(I − θ₀θ₀ᵀ)Sθ₀.

    delta is 1 when the spike is constant (r_n ≡ 1) and 0 whenever it
    vanishes (r_n → 0); requires the spike strength v to be known.
    """
    theta0 = _check_theta0(s, theta0)
    if delta not in (0, 1):
        raise ValueError("delta must be 0 or 1")
    if v < 0:
        raise ValueError("v must be nonnegative")
    St0 = s.cov @ theta0
    return s.n / (1.0 + delta * v) * float(St0 @ St0 - (theta0 @ St0) ** 2)


def oracle_statistic(s: SampleSummary, theta0: np.ndarray, sigma_n: np.ndarray) -> float:
    """Oracle statistic n θ₀ᵀ(S−Σ_n)(I − ½θ₀θ₀ᵀ)(S−Σ_n)θ₀.

    Requires the true null covariance Σ_n; compare against chi-square
    with p (not p−1) degrees of freedom.
    """
    theta0 = _check_theta0(s, theta0)
    sigma_n = np.asarray(sigma_n, dtype=float)
    if sigma_n.shape != s.cov.shape:
        raise ValueError("sigma_n must match the sample covariance shape")
    u = (s.cov - sigma_n) @ theta0
    return s.n * float(u @ u - 0.5 * (theta0 @ u) ** 2)


def decide(statistic: float, df: int, alpha: float) -> TestOutcome:
    """P-value and rejection decision against the chi-square(df) law."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    # Statistics are nonnegative in exact arithmetic; tolerate tiny
    # negative rounding from collapsed test cases.
    stat = max(float(statistic), 0.0)
    pvalue = 1.0 - chi2_cdf(stat, df)
    reject = stat > chi2_quantile(1.0 - alpha, df)
    return TestOutcome(statistic=stat, df=df, pvalue=pvalue, alpha=alpha, reject=reject)
