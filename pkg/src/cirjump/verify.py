"""Statistical verification harness tying the samplers back to the analytic
transforms.

Comparisons live in transform space: for a batch of draws X_1..X_N the
empirical transform mean of exp(-lam X) is set against the analytic value
with a per-point z-score. A comparison passes when no |z| exceeds
``Z_HARD`` and at most one point per eight exceeds ``Z_SOFT``.

Monte Carlo batches are split into fixed-size chunks; chunk j always uses
the substream ``(seed, stream_base + j)`` and partial sums are reduced in
chunk order, so reports are byte-identical across runs and worker counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateIntermediate, InsufficientSamples
from .kernels import get_kernels
from .numerics import RngStream
from .samplers import DEFAULT_CELLS, get_sampler

__all__ = [
    "Z_HARD",
    "Z_SOFT",
    "SOFT_ALLOWANCE_PER",
    "CHUNK_SIZE",
    "LaplaceComparison",
    "MomentCheck",
    "empirical_laplace",
    "transform_comparison",
    "compare_transition",
    "compare_component",
    "chapman_kolmogorov",
    "psi_semigroup_check",
    "moment_check",
    "mc_statistics",
    "DEFAULT_LAMBDA_GRID",
]

Z_HARD = 4.0               # no point may exceed this |z|
Z_SOFT = 3.0               # soft threshold with a family-wise allowance
SOFT_ALLOWANCE_PER = 8     # one soft exceedance allowed per 8 grid points
CHUNK_SIZE = 1 << 16       # draws per substream chunk

# spans tail and bulk sensitivity for kernels with p of order one
DEFAULT_LAMBDA_GRID = (0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0)


def _zscores(diff, se):
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0),
                     np.where(diff == 0.0, 0.0, math.inf))
    return z


@dataclass(frozen=True)
class LaplaceComparison:
    """Empirical vs analytic transform values on a lambda grid."""

    lambda_grid: np.ndarray
    empirical: np.ndarray
    std_err: np.ndarray
    analytic: np.ndarray
    z_scores: np.ndarray
    n_samples: int
    seed: Optional[int] = None
    label: str = ""

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z_scores)))

    @property
    def soft_exceedances(self) -> int:
        return int(np.sum(np.abs(self.z_scores) > Z_SOFT))

    @property
    def passed(self) -> bool:
        allowance = max(1, len(self.lambda_grid) // SOFT_ALLOWANCE_PER)
        return (np.all(np.abs(self.z_scores) <= Z_HARD)
                and self.soft_exceedances <= allowance)

    def as_dict(self):
        return {
            "label": self.label,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "lambda_grid": [float(x) for x in self.lambda_grid],
            "empirical": [float(x) for x in self.empirical],
            "std_err": [float(x) for x in self.std_err],
            "analytic": [float(x) for x in self.analytic],
            "z_scores": [float(x) for x in self.z_scores],
            "max_abs_z": self.max_abs_z,
            "passed": bool(self.passed),
        }

    def __str__(self):
        rows = [f"{'lambda':>10s} {'empirical':>14s} {'analytic':>14s} "
                f"{'std_err':>10s} {'z':>8s}"]
        for lam, e, a, se, z in zip(self.lambda_grid, self.empirical,
                                    self.analytic, self.std_err, self.z_scores):
            rows.append(f"{lam:10.4g} {e:14.8f} {a:14.8f} {se:10.2e} {z:8.2f}")
        verdict = "pass" if self.passed else "FAIL"
        rows.append(f"[{verdict}] {self.label}  max|z| = {self.max_abs_z:.2f}")
        return "\n".join(rows)


@dataclass(frozen=True)
class MomentCheck:
    sample_mean: float
    sample_var: float
    expected_mean: float
    expected_var: float
    z_mean: float
    z_var: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return abs(self.z_mean) <= Z_HARD and abs(self.z_var) <= Z_HARD


def empirical_laplace(samples, lambda_grid):
    """Per-lambda mean and standard error of exp(-lam X)."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise InsufficientSamples("need at least two samples")
    grid = np.asarray(lambda_grid, dtype=float)
    e = np.exp(-np.multiply.outer(grid, x))
    mean = e.mean(axis=1)
    se = e.std(axis=1, ddof=1) / math.sqrt(x.size)
    return mean, se


def _chunk_plan(n, chunk_size):
    sizes = [chunk_size] * (n // chunk_size)
    if n % chunk_size:
        sizes.append(n % chunk_size)
    return sizes


def mc_statistics(draw: Callable[[np.random.Generator, int], np.ndarray],
                  n_samples: int, lambda_grid, seed: int,
                  stream_base: int = 0, workers: int = 1,
                  chunk_size: int = CHUNK_SIZE):
    """Chunked, worker-count-independent transform and moment statistics.

    ``draw(rng, m)`` must return m draws using only the supplied generator.
    Returns per-lambda transform means/standard errors plus raw moment sums
    (count of zeros and the first four power sums).
    """
    if n_samples < 2:
        raise InsufficientSamples("need at least two samples")
    grid = np.asarray(lambda_grid, dtype=float)
    sizes = _chunk_plan(n_samples, chunk_size)
    tsums = np.zeros((len(sizes), 2, grid.size))
    msums = np.zeros((len(sizes), 5))

    def run(j):
        rng = RngStream(seed, stream_base + j).generator()
        x = np.asarray(draw(rng, sizes[j]), dtype=float)
        e = np.exp(-np.multiply.outer(grid, x))
        tsums[j, 0] = e.sum(axis=1)
        tsums[j, 1] = np.square(e).sum(axis=1)
        msums[j] = (np.count_nonzero(x == 0.0), x.sum(), np.square(x).sum(),
                    np.power(x, 3).sum(), np.power(x, 4).sum())

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(len(sizes))))
    else:
        for j in range(len(sizes)):
            run(j)

    s1 = tsums[:, 0].sum(axis=0)
    s2 = tsums[:, 1].sum(axis=0)
    n = float(n_samples)
    mean = s1 / n
    var = np.maximum(s2 - n * mean ** 2, 0.0) / (n - 1.0)
    se = np.sqrt(var / n)
    m = msums.sum(axis=0)
    return {"mean": mean, "std_err": se,
            "zeros": m[0], "sum1": m[1], "sum2": m[2], "sum3": m[3],
            "sum4": m[4], "n": n_samples}


def transform_comparison(draw, analytic, lambda_grid, n_samples, seed,
                         stream_base=0, workers=1, label="",
                         chunk_size=CHUNK_SIZE) -> LaplaceComparison:
    """Compare a sampler against analytic transform values on a grid."""
    grid = np.asarray(lambda_grid, dtype=float)
    stats = mc_statistics(draw, n_samples, grid, seed,
                          stream_base=stream_base, workers=workers,
                          chunk_size=chunk_size)
    analytic = np.asarray(analytic, dtype=float)
    z = _zscores(stats["mean"] - analytic, stats["std_err"])
    return LaplaceComparison(grid, stats["mean"], stats["std_err"], analytic,
                             z, n_samples, seed=seed, label=label)


def compare_component(coeffs, nu, s, t, y, component, n_samples, lambda_grid,
                      seed, n_cells=DEFAULT_CELLS, delta=None, workers=1,
                      stream_base=0, label=None) -> LaplaceComparison:
    """Empirical transform of one transition-law component vs its formula."""
    sampler = get_sampler(coeffs, nu, n_cells=n_cells, delta=delta)
    nu_eff = nu.truncated(sampler.delta) \
        if (nu is not None and sampler.delta > 0) else nu
    eng = get_kernels(coeffs, nu_eff)
    grid = np.asarray(lambda_grid, dtype=float)
    if component == "H":
        analytic = eng.laplace_H(s, t, y, grid)[0]
        draw = lambda g, m: sampler.sample_h(g, s, t, y, size=m)
    elif component == "I":
        analytic = eng.laplace_I(s, t, grid)[0]
        draw = lambda g, m: sampler.sample_i(g, s, t, size=m)
    elif component == "Itilde":
        analytic = eng.laplace_Itilde(s, t, grid)[0]
        draw = lambda g, m: sampler.sample_itilde(g, s, t, size=m)
    elif component == "K":
        analytic = eng.laplace_K(s, t, y, grid)[0]
        draw = lambda g, m: sampler.sample_k(g, s, t, y, size=m)
    else:
        raise ValueError(f"unknown component {component!r}")
    return transform_comparison(
        draw, analytic, grid, n_samples, seed, stream_base=stream_base,
        workers=workers, label=label or f"{component}[{s},{t}] y={y}")


def compare_transition(coeffs, nu, s, t, y, n_samples, lambda_grid, seed,
                       n_cells=DEFAULT_CELLS, delta=None, workers=1,
                       stream_base=0) -> LaplaceComparison:
    """One-step transition sampler vs the analytic transition transform."""
    return compare_component(coeffs, nu, s, t, y, "K", n_samples, lambda_grid,
                             seed, n_cells=n_cells, delta=delta,
                             workers=workers, stream_base=stream_base,
                             label=f"K[{s},{t}] y={y}")


def chapman_kolmogorov(coeffs, nu, s, u, t, y, n_samples, lambda_grid, seed,
                       n_cells=DEFAULT_CELLS, delta=None, workers=1,
                       stream_base=0) -> LaplaceComparison:
    """Two-step sampling through an intermediate time vs the one-step formula."""
    if not (s < u < t):
        raise DegenerateIntermediate("need s < u < t")
    sampler = get_sampler(coeffs, nu, n_cells=n_cells, delta=delta)
    nu_eff = nu.truncated(sampler.delta) \
        if (nu is not None and sampler.delta > 0) else nu
    eng = get_kernels(coeffs, nu_eff)
    grid = np.asarray(lambda_grid, dtype=float)
    analytic = eng.laplace_K(s, t, y, grid)[0]

    def draw(g, m):
        x1 = sampler.sample_k(g, s, u, y, size=m)
        return sampler.sample_k(g, u, t, x1)

    return transform_comparison(
        draw, analytic, grid, n_samples, seed, stream_base=stream_base,
        workers=workers, label=f"CK[{s}->{u}->{t}] y={y}")


def psi_semigroup_check(coeffs, triples: Sequence, lambda_grid) -> float:
    """Max defect of the functional-iteration identity over time triples."""
    eng = get_kernels(coeffs)
    grid = np.asarray(lambda_grid, dtype=float)
    worst = 0.0
    for t1, t2, t3 in triples:
        if not (t1 < t2 < t3):
            continue
        inner = eng.psi(t2, t3, grid)
        lhs = eng.psi(t1, t2, inner)
        rhs = eng.psi(t1, t3, grid)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def moment_check(samples, expected_mean, expected_var) -> MomentCheck:
    """z-scores of the sample mean and variance against target moments."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise InsufficientSamples("need at least two samples")
    n = x.size
    m = x.mean()
    c = x - m
    s2 = np.square(c).sum() / (n - 1)
    m4 = np.power(c, 4).mean()
    se_mean = math.sqrt(s2 / n)
    se_var = math.sqrt(max(m4 - s2 ** 2, 0.0) / n)
    z_mean = float(_zscores(np.asarray(m - expected_mean),
                            np.asarray(se_mean)))
    z_var = float(_zscores(np.asarray(s2 - expected_var), np.asarray(se_var)))
    return MomentCheck(float(m), float(s2), float(expected_mean),
                       float(expected_var), z_mean, z_var, n)


def moment_check_from_sums(stats, expected_mean, expected_var) -> MomentCheck:
    """Moment z-scores from the power sums of :func:`mc_statistics`."""
    n = stats["n"]
    m = stats["sum1"] / n
    # central moments from raw power sums
    m2 = stats["sum2"] / n - m ** 2
    m3 = stats["sum3"] / n - 3 * m * stats["sum2"] / n + 2 * m ** 3
    m4 = (stats["sum4"] / n - 4 * m * stats["sum3"] / n
          + 6 * m ** 2 * stats["sum2"] / n - 3 * m ** 4)
    s2 = m2 * n / (n - 1)
    se_mean = math.sqrt(max(m2, 0.0) / n)
    se_var = math.sqrt(max(m4 - m2 ** 2, 0.0) / n)
    z_mean = float(_zscores(np.asarray(m - expected_mean), np.asarray(se_mean)))
    z_var = float(_zscores(np.asarray(s2 - expected_var), np.asarray(se_var)))
    return MomentCheck(float(m), float(s2), float(expected_mean),
                       float(expected_var), z_mean, z_var, int(n))


def zero_fraction_z(n_zeros, n, p0) -> float:
    """Binomial z-score of the observed zero fraction against probability p0."""
    se = math.sqrt(p0 * (1.0 - p0) / n)
    phat = n_zeros / n
    if se == 0.0:
        return 0.0 if phat == p0 else math.inf
    return (phat - p0) / se
