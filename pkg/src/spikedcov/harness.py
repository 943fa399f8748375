"""Seeded, parallel Monte Carlo experiment grids.

Every replicate draws its generator from
``SeedSequence((master_seed, cell_index, replicate_index))``, so results
are independent of worker count and chunking; aggregation only ever sums
rejection counts.  CSV output is therefore byte-identical for a given
(config, seed) no matter how the work is scheduled.

Degenerate replicates (numerically singular sample covariance) are
counted per cell and excluded from the denominator explicitly: the CSV
``M`` column always holds the number of valid replicates behind the
frequency, and degenerate counts appear in the text report.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .asymptotics import type1_risk_iii
from .distributions import chi2_quantile, make_rng
from .linalg import DegeneracyError
from .model import RadialFamily, SpikedModel, SpikeRate, sample
from .statistics import (
    anderson_statistic,
    decide,
    hpv_statistic,
    kurtosis_from_summary,
    oracle_statistic,
    pseudo_gaussian,
    summarize,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "CellRow",
    "run_null_grid",
    "run_power_grid",
    "run_regime3_size",
    "run_leave_one_out",
    "run_highdim",
    "run_experiment",
]

logger = logging.getLogger(__name__)

EXPERIMENTS = ("null", "power", "regime3", "highdim")

FULL_SCALE_N = 500_000


@dataclass(frozen=True)
class ExperimentConfig:
    """Description of one Monte Carlo grid.

    Only the fields relevant to ``experiment`` are consulted: the spike
    exponent grid ``ells`` and ``families`` drive the null grid, ``ks``
    the power grid, ``vgrid`` the boundary-size curve, ``cgrid`` the
    high-dimensional table.
    """

    experiment: str
    p: int = 10
    n: int = 200
    M: int = 1000
    v: float = 1.0
    ells: tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    families: tuple[RadialFamily, ...] = (RadialFamily.gaussian(),)
    alphas: tuple[float, ...] = (0.05,)
    ks: tuple[int, ...] = tuple(range(0, 21, 5))
    vgrid: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0)
    cgrid: tuple[float, ...] = (0.5, 0.75, 1.0, 1.5, 2.0)
    limit_M: int = 100_000
    seed: int = 20260815
    workers: int = 1
    pseudo: bool = False
    full_scale: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.M < 1 or self.limit_M < 1:
            raise ValueError("replicate counts must be at least 1")
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        for a in self.alphas:
            if not 0.0 < a < 1.0:
                raise ValueError("alpha levels must lie strictly in (0, 1)")
        if not self.alphas:
            raise ValueError("alpha grid must be non-empty")
        grid = {
            "null": self.ells if self.families else (),
            "power": self.ks,
            "regime3": self.vgrid,
            "highdim": self.cgrid,
        }[self.experiment]
        if len(grid) == 0:
            raise ValueError("experiment grid must be non-empty")

    @property
    def effective_n(self) -> int:
        return FULL_SCALE_N if (self.experiment == "null" and self.full_scale) else self.n


@dataclass(frozen=True)
class CellRow:
    """One output row: a rejection frequency (or analytic prediction)."""

    experiment: str
    cell: tuple[tuple[str, str], ...]  # ordered (name, formatted value)
    test: str
    alpha: float
    freq: float
    se: float
    M: int
    seed: int


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated grid results plus the configuration that produced them."""

    config: ExperimentConfig
    rows: tuple[CellRow, ...]
    degenerate: tuple[tuple[str, int], ...] = ()
    wall_time: float = 0.0

    def to_csv(self) -> str:
        if not self.rows:
            return ""
        names = [name for name, _ in self.rows[0].cell]
        header = ["experiment", *names, "test", "alpha", "freq", "se", "M", "seed"]
        lines = [",".join(header)]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        r.experiment,
                        *[value for _, value in r.cell],
                        r.test,
                        _fmt(r.alpha),
                        _fmt(r.freq),
                        _fmt(r.se),
                        str(r.M),
                        str(r.seed),
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        c = self.config
        lines = [
            f"experiment: {c.experiment}",
            f"p: {c.p}",
            f"n: {c.effective_n}",
            f"M: {c.M}",
            f"v: {_fmt(c.v)}",
            f"alphas: {','.join(_fmt(a) for a in c.alphas)}",
            f"families: {','.join(f.label for f in c.families)}",
            f"seed: {c.seed}",
            f"workers: {c.workers}",
        ]
        if c.experiment == "null":
            lines.append(f"ells: {','.join(str(e) for e in c.ells)}")
        elif c.experiment == "power":
            lines.append(f"ks: {','.join(str(k) for k in c.ks)}")
        elif c.experiment == "regime3":
            lines.append(f"vgrid: {','.join(_fmt(x) for x in c.vgrid)}")
        elif c.experiment == "highdim":
            lines.append(f"cgrid: {','.join(_fmt(x) for x in c.cgrid)}")
        if self.degenerate:
            lines.append("degenerate replicates:")
            for label, count in self.degenerate:
                lines.append(f"  {label}: {count}")
        else:
            lines.append("degenerate replicates: none")
        lines.append(f"rows: {len(self.rows)}")
        lines.append(f"wall_time_s: {self.wall_time:.3f}")
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{float(x):.10g}"


# ---------------------------------------------------------------------------
# Cell enumeration and per-replicate statistics.  Everything here is
# deterministic in (config, cell_index, replicate_index) so that any
# scheduling of chunks reproduces the same counts.
# ---------------------------------------------------------------------------


def _cells_for(config: ExperimentConfig) -> list[dict]:
    if config.experiment == "null":
        return [{"family": f, "ell": e} for f in config.families for e in config.ells]
    if config.experiment == "power":
        return [{"k": k} for k in config.ks]
    if config.experiment == "regime3":
        return [{"v": v} for v in config.vgrid]
    return [{"c": c} for c in config.cgrid]


def _cell_label(config: ExperimentConfig, cell: dict) -> str:
    if config.experiment == "null":
        return f"family={cell['family'].label} ell={cell['ell']}"
    if config.experiment == "power":
        return f"k={cell['k']}"
    if config.experiment == "regime3":
        return f"v={_fmt(cell['v'])}"
    return f"c={_fmt(cell['c'])}"


def _cell_columns(config: ExperimentConfig, cell: dict) -> tuple[tuple[str, str], ...]:
    if config.experiment == "null":
        return (("family", cell["family"].label), ("ell", str(cell["ell"])))
    if config.experiment == "power":
        k = cell["k"]
        return (("k", str(k)), ("tau_norm", _fmt(_tau_norm(k))))
    if config.experiment == "regime3":
        return (("v", _fmt(cell["v"])),)
    c = cell["c"]
    return (("c", _fmt(c)), ("p", str(_highdim_p(config, c))))


def _tau_norm(k: int) -> float:
    # ‖θ₁(k) − e₁‖ for θ₁(k) = (cos(kπ/40), sin(kπ/40), 0, ...).
    return 2.0 * math.sin(k * math.pi / 80.0)


def _highdim_p(config: ExperimentConfig, c: float) -> int:
    return max(2, int(round(c * config.n)))


def _tests_for_cell(config: ExperimentConfig, cell: dict) -> list[tuple[str, int]]:
    """(test name, degrees of freedom) pairs computed in this cell."""
    p = config.p
    if config.experiment == "null":
        tests = [("anderson", p - 1), ("hpv", p - 1)]
        if config.pseudo or cell["family"].kind != "gaussian":
            tests += [("anderson_pseudo", p - 1), ("hpv_pseudo", p - 1)]
        return tests
    if config.experiment == "power":
        return [("hpv", p - 1), ("oracle", p)]
    if config.experiment == "regime3":
        return [("anderson", p - 1)]
    pc = _highdim_p(config, cell["c"])
    tests = [("hpv", pc - 1)]
    if pc < config.n:
        tests.insert(0, ("anderson", pc - 1))
    return tests


def _e1(p: int) -> np.ndarray:
    theta = np.zeros(p)
    theta[0] = 1.0
    return theta


def _replicate_stats(config: ExperimentConfig, cell: dict, rng) -> dict[str, float]:
    if config.experiment == "null":
        n = config.effective_n
        family = cell["family"]
        theta = _e1(config.p)
        model = SpikedModel(
            p=config.p, sigma=1.0, v=config.v, rate=SpikeRate.exponent(cell["ell"]), theta1=theta
        )
        X = sample(model, n, family, rng)
        s = summarize(X)
        out = {
            "anderson": anderson_statistic(s, theta, 1),
            "hpv": hpv_statistic(s, theta, 1),
        }
        if config.pseudo or family.kind != "gaussian":
            kappa_hat = kurtosis_from_summary(s, X)
            out["anderson_pseudo"] = pseudo_gaussian(out["anderson"], kappa_hat)
            out["hpv_pseudo"] = pseudo_gaussian(out["hpv"], kappa_hat)
        return out
    if config.experiment == "power":
        angle = cell["k"] * math.pi / 40.0
        theta0 = _e1(config.p)
        theta1 = np.zeros(config.p)
        theta1[0] = math.cos(angle)
        theta1[1] = math.sin(angle)
        model = SpikedModel(
            p=config.p, sigma=1.0, v=config.v, rate=SpikeRate.exponent(3), theta1=theta1
        )
        X = sample(model, config.n, RadialFamily.gaussian(), rng)
        s = summarize(X)
        r_n = config.n ** (-0.5)
        sigma_null = np.eye(config.p) + r_n * config.v * np.outer(theta0, theta0)
        return {
            "hpv": hpv_statistic(s, theta0, 1),
            "oracle": oracle_statistic(s, theta0, sigma_null),
        }
    if config.experiment == "regime3":
        v = cell["v"]
        theta = _e1(config.p)
        if v == 0.0:
            X = rng.standard_normal((config.n, config.p))
        else:
            model = SpikedModel(
                p=config.p, sigma=1.0, v=v, rate=SpikeRate.exponent(3), theta1=theta
            )
            X = sample(model, config.n, RadialFamily.gaussian(), rng)
        s = summarize(X)
        return {"anderson": anderson_statistic(s, theta, 1)}
    # highdim: Σ = I_p + θ₀θ₀ᵀ, fixed unit spike, p scales with n.
    pc = _highdim_p(config, cell["c"])
    n = config.n
    theta = _e1(pc)
    G = rng.standard_normal((n, pc))
    X = G + np.outer(G[:, 0], (math.sqrt(2.0) - 1.0) * theta)
    if pc < n:
        s = summarize(X)
        return {
            "anderson": anderson_statistic(s, theta, 1),
            "hpv": hpv_statistic(s, theta, 1),
        }
    # p ≥ n: the sample covariance is singular and the invertibility gate
    # of summarize would reject every replicate.  The statistic is fed the
    # raw spectrum verbatim, which is exactly what the experiment studies:
    # how the test behaves when its eigenvalue assumptions collapse.
    Xc = X - X.mean(axis=0)
    S = (Xc.T @ Xc) / n
    lam, V = np.linalg.eigh(S)
    return {"hpv": _hpv_from_spectrum(S, lam[::-1], V[:, ::-1], theta, n)}


def _hpv_from_spectrum(
    S: np.ndarray, lam: np.ndarray, V: np.ndarray, theta0: np.ndarray, n: int
) -> float:
    """HPV statistic (j = 1) from a precomputed eigendecomposition.

    Uses the closed-form Gram-Schmidt complement available when the
    non-anchor inputs are mutually orthonormal: with a_k = θ₀ᵀv_k,
    s_i = 1 − Σ_{m≤i} a_m² and r_i the running residual of θ₀, the i-th
    frame member is (v_i − (a_i/s_{i−1}) r_{i−1}) √(s_{i−1}/s_i).  Agrees
    with gram_schmidt_complement to rounding; O(p²) per call.
    """
    w = S @ theta0
    Vo = V[:, 1:]
    a = Vo.T @ theta0
    q = Vo.T @ w
    s = np.empty(a.shape[0] + 1)
    s[0] = 1.0
    s[1:] = 1.0 - np.cumsum(a * a)
    rho = np.empty_like(s)
    rho[0] = float(theta0 @ w)
    rho[1:] = rho[0] - np.cumsum(a * q)
    ratios = s[1:] / s[:-1]
    if np.any(ratios < 1e-24):
        raise DegeneracyError("Gram-Schmidt degenerate in spectral HPV evaluation")
    cross = (q - a * rho[:-1] / s[:-1]) * np.sqrt(s[:-1] / s[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = cross**2 / lam[1:]
        value = n / lam[0] * float(np.sum(terms))
    return value


# ---------------------------------------------------------------------------
# Chunked execution
# ---------------------------------------------------------------------------


def _chunk_counts(config: ExperimentConfig, cell_index: int, lo: int, hi: int):
    """Rejection counts over replicates [lo, hi) of one cell."""
    cell = _cells_for(config)[cell_index]
    tests = _tests_for_cell(config, cell)
    crits = np.array(
        [[chi2_quantile(1.0 - a, df) for a in config.alphas] for _, df in tests]
    )
    counts = np.zeros((len(tests), len(config.alphas)), dtype=np.int64)
    degenerate = 0
    for rep in range(lo, hi):
        rng = make_rng(np.random.SeedSequence((config.seed, cell_index, rep)))
        try:
            stats = _replicate_stats(config, cell, rng)
        except DegeneracyError:
            degenerate += 1
            continue
        for ti, (name, _) in enumerate(tests):
            counts[ti] += stats[name] > crits[ti]
    return counts, degenerate


def _run_cells(config: ExperimentConfig):
    """Execute all cells, return (per-cell counts, per-cell degenerates)."""
    cells = _cells_for(config)
    jobs = []  # (cell_index, lo, hi)
    chunk = config.M if config.workers == 1 else max(1, math.ceil(config.M / (config.workers * 4)))
    for ci in range(len(cells)):
        lo = 0
        while lo < config.M:
            hi = min(lo + chunk, config.M)
            jobs.append((ci, lo, hi))
            lo = hi
    results: dict[int, tuple[np.ndarray, int]] = {}

    def _absorb(ci: int, counts: np.ndarray, degen: int):
        if ci in results:
            prev_counts, prev_degen = results[ci]
            results[ci] = (prev_counts + counts, prev_degen + degen)
        else:
            results[ci] = (counts, degen)

    if config.workers == 1:
        for ci, lo, hi in jobs:
            counts, degen = _chunk_counts(config, ci, lo, hi)
            _absorb(ci, counts, degen)
    else:
        try:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                futures = [
                    (ci, pool.submit(_chunk_counts, config, ci, lo, hi)) for ci, lo, hi in jobs
                ]
                for ci, fut in futures:
                    counts, degen = fut.result()
                    _absorb(ci, counts, degen)
        except (OSError, PermissionError) as exc:  # stripped-down environments
            logger.warning("process pool unavailable (%s); running inline", exc)
            results.clear()
            for ci, lo, hi in jobs:
                counts, degen = _chunk_counts(config, ci, lo, hi)
                _absorb(ci, counts, degen)
    return cells, results


def _freq_rows(config: ExperimentConfig, cells, results) -> tuple[list[CellRow], list]:
    rows: list[CellRow] = []
    degenerate = []
    for ci, cell in enumerate(cells):
        counts, degen = results[ci]
        valid = config.M - degen
        if degen:
            degenerate.append((_cell_label(config, cell), degen))
        tests = _tests_for_cell(config, cell)
        columns = _cell_columns(config, cell)
        for ti, (name, _) in enumerate(tests):
            for ai, alpha in enumerate(config.alphas):
                freq = counts[ti, ai] / valid if valid else float("nan")
                se = math.sqrt(freq * (1.0 - freq) / valid) if valid else float("nan")
                rows.append(
                    CellRow(
                        experiment=config.experiment,
                        cell=columns,
                        test=name,
                        alpha=alpha,
                        freq=freq,
                        se=se,
                        M=valid,
                        seed=config.seed,
                    )
                )
    return rows, degenerate


def run_null_grid(config: ExperimentConfig) -> ExperimentResult:
    """Rejection frequencies of both tests (plus pseudo-Gaussian versions
    for elliptical families) under the null across the spike-rate grid."""
    config = replace(config, experiment="null") if config.experiment != "null" else config
    start = time.perf_counter()
    cells, results = _run_cells(config)
    rows, degenerate = _freq_rows(config, cells, results)
    return ExperimentResult(
        config=config,
        rows=tuple(rows),
        degenerate=tuple(degenerate),
        wall_time=time.perf_counter() - start,
    )


def run_power_grid(config: ExperimentConfig) -> ExperimentResult:
    """Empirical power of the Gram-Schmidt and oracle tests against local
    alternatives on the contiguity boundary, with the corresponding
    noncentral-chi-square predictions emitted side by side (rows
    ``hpv_asymptotic``/``oracle_asymptotic``, SE 0, M 0)."""
    from .asymptotics import asymptotic_power, ncp_hpv_iii, ncp_oracle_iii

    config = replace(config, experiment="power") if config.experiment != "power" else config
    start = time.perf_counter()
    cells, results = _run_cells(config)
    rows, degenerate = _freq_rows(config, cells, results)
    for cell in cells:
        tau = _tau_norm(cell["k"])
        columns = _cell_columns(config, cell)
        for name, df, ncp in (
            ("hpv_asymptotic", config.p - 1, ncp_hpv_iii(config.v, tau)),
            ("oracle_asymptotic", config.p, ncp_oracle_iii(config.v, tau)),
        ):
            for alpha in config.alphas:
                rows.append(
                    CellRow(
                        experiment=config.experiment,
                        cell=columns,
                        test=name,
                        alpha=alpha,
                        freq=asymptotic_power(df, ncp, alpha),
                        se=0.0,
                        M=0,
                        seed=config.seed,
                    )
                )
    return ExperimentResult(
        config=config,
        rows=tuple(rows),
        degenerate=tuple(degenerate),
        wall_time=time.perf_counter() - start,
    )


def run_regime3_size(config: ExperimentConfig) -> ExperimentResult:
    """Anderson rejection frequency along a spike-strength grid on the
    contiguity boundary, with the limit-law risk estimate
    (rows ``anderson_limit``) for comparison."""
    config = replace(config, experiment="regime3") if config.experiment != "regime3" else config
    start = time.perf_counter()
    cells, results = _run_cells(config)
    rows, degenerate = _freq_rows(config, cells, results)
    for ci, cell in enumerate(cells):
        columns = _cell_columns(config, cell)
        for alpha in config.alphas:
            rng = make_rng(np.random.SeedSequence((config.seed, ci, 2**32)))
            est = type1_risk_iii(config.p, cell["v"], alpha, config.limit_M, rng)
            rows.append(
                CellRow(
                    experiment=config.experiment,
                    cell=columns,
                    test="anderson_limit",
                    alpha=alpha,
                    freq=est.risk,
                    se=est.se,
                    M=est.M,
                    seed=config.seed,
                )
            )
    return ExperimentResult(
        config=config,
        rows=tuple(rows),
        degenerate=tuple(degenerate),
        wall_time=time.perf_counter() - start,
    )


def run_highdim(config: ExperimentConfig) -> ExperimentResult:
    """Null rejection frequencies when the dimension grows with n
    (p = c·n); the Anderson test is skipped once p ≥ n."""
    config = replace(config, experiment="highdim") if config.experiment != "highdim" else config
    start = time.perf_counter()
    cells, results = _run_cells(config)
    rows, degenerate = _freq_rows(config, cells, results)
    return ExperimentResult(
        config=config,
        rows=tuple(rows),
        degenerate=tuple(degenerate),
        wall_time=time.perf_counter() - start,
    )


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Dispatch on ``config.experiment``."""
    runner = {
        "null": run_null_grid,
        "power": run_power_grid,
        "regime3": run_regime3_size,
        "highdim": run_highdim,
    }[config.experiment]
    return runner(config)


def run_leave_one_out(X: np.ndarray, theta0: np.ndarray, j: int = 1) -> list[tuple[float, float]]:
    """Leave-one-out stability check: for each observation i, recompute
    both tests on the sample without row i.  Returns n (Anderson p-value,
    HPV p-value) pairs."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d data matrix")
    n, p = X.shape
    out = []
    for i in range(n):
        Xi = np.delete(X, i, axis=0)
        s = summarize(Xi)
        qa = anderson_statistic(s, theta0, j)
        qh = hpv_statistic(s, theta0, j)
        out.append(
            (decide(qa, p - 1, 0.05).pvalue, decide(qh, p - 1, 0.05).pvalue)
        )
    return out
