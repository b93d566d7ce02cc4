"""Exact (discretization-free) sampling from the transition-law components.

The one-step transition law of the full equation factorizes as

    K_{s,t}(y, .) = H_{s,t}(y, .) * I_{s,t} * ITilde_{s,t}

with three independent ingredients:

``H`` -- the started-mass component. It is a Poisson mixture of Gamma laws:
draw M ~ Poisson(y gamma(s,t)); M = 0 gives an exact zero (the atom at 0),
otherwise the value is Gamma(shape M, rate p(s,t)).

``I`` -- the continuous-input component. On a grid s = r_0 < ... < r_n = t,
draw U_j ~ Gamma(alpha_j, p(r_{j-1}, r_j)) with alpha_j = 2 a / sigma^2
evaluated inside the cell, and propagate each U_j from r_j to t through H.
When ``alpha`` is constant on every cell (piecewise-constant coefficients on
an aligned grid) each cell factor is exact and the sum has exactly the law
of I; otherwise the law converges weakly as the grid refines.

``ITilde`` -- the jump-input component. Realize the driving Poisson random
measure on (s, t] x (delta, inf) (times by thinning with rate
a~(v) nu((delta, inf)), marks i.i.d. from the normalized restriction of nu)
and propagate every point (T_i, Y_i) to t through H. Truncation at delta is
only needed for infinite-activity measures; the discarded sqrt-mass
diagnostic controls the bias.

All samplers are pure given a generator; batch draws use the same
construction vectorized across draws, so a fixed stream reproduces bit-equal
output.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .coefficients import CoefficientSet
from .errors import InvalidDelta
from .jumps import JumpMeasure, delta_for_budget
from .kernels import TransitionKernels, get_kernels
from .numerics import _as_generator

__all__ = [
    "PrmRealization",
    "TransitionLaw",
    "TransitionSampler",
    "get_sampler",
    "sample_H",
    "sample_I",
    "sample_Itilde",
    "sample_K",
    "sample_prm",
    "DELTA_BUDGET",
]

DELTA_BUDGET = 4.0 ** -8   # default sqrt-tail budget for the truncation level
DEFAULT_CELLS = 64         # default refinement of the I-grid


@dataclass(frozen=True, eq=False)
class PrmRealization:
    """Points (T_i, Y_i) of the driving random measure, ordered by time."""

    times: np.ndarray
    sizes: np.ndarray
    delta: float = 0.0

    def __post_init__(self):
        if self.times.shape != self.sizes.shape:
            raise ValueError("times and sizes must align")

    def __len__(self):
        return self.times.size


class TransitionSampler:
    """Sampling engine bound to one coefficient set and jump measure.

    ``delta`` is the truncation level for the jump measure; by default it is
    0 for finite-activity measures and the largest level whose sqrt-tail
    diagnostic stays under ``DELTA_BUDGET`` otherwise. ``n_cells`` controls
    the I-grid refinement (cells never wider than (t-s)/n_cells, knots of the
    input and volatility functions always included).
    """

    def __init__(self, coeffs: CoefficientSet, nu: Optional[JumpMeasure] = None,
                 n_cells: int = DEFAULT_CELLS, delta: Optional[float] = None,
                 kernels: Optional[TransitionKernels] = None):
        self.coeffs = coeffs
        self.nu = nu
        self.n_cells = int(n_cells)
        if self.n_cells < 1:
            raise ValueError("n_cells must be at least 1")
        self.kernels = kernels if kernels is not None else get_kernels(coeffs, nu)
        if nu is None:
            self.delta = 0.0
        elif delta is None:
            self.delta = delta_for_budget(nu, DELTA_BUDGET) \
                if nu.infinite_activity else 0.0
        else:
            if delta < 0:
                raise InvalidDelta("truncation level must be nonnegative")
            self.delta = float(delta)
        self._marks = None

    # -- plumbing ----------------------------------------------------------

    def _mark_sampler(self):
        if self._marks is None:
            self.nu.require_sampling(self.delta)
            self._marks = self.nu.mark_sampler(self.delta)
        return self._marks

    def i_grid(self, s, t, n=None):
        """Cell boundaries of the continuous-input grid on [s, t]: knots of
        the input and volatility functions plus a uniform refinement."""
        n = self.n_cells if n is None else int(n)
        knots = self.coeffs.breakpoints(s, t, which=("a", "sigma"))
        edges = np.concatenate(([s], knots, [t]))
        width = (t - s) / max(n, 1)
        pieces = [np.linspace(lo, hi, max(1, int(np.ceil((hi - lo) / width))) + 1)[:-1]
                  for lo, hi in zip(edges[:-1], edges[1:])]
        return np.concatenate(pieces + [[t]])

    def prm_points_batch(self, rng, s, t, size):
        """Flattened driving-measure realizations for ``size`` independent
        draws: (draw_index, times, sizes) with times thinned against the
        jump-time intensity and sizes from the truncated mark law."""
        g = _as_generator(rng)
        empty = (np.empty(0, dtype=int), np.empty(0), np.empty(0))
        if self.nu is None or self.coeffs.a_tilde.max_on(s, t) == 0.0:
            return empty
        marks = self._mark_sampler()
        if marks.mass == 0.0:
            return empty
        amax = self.coeffs.a_tilde.max_on(s, t)
        counts = g.poisson(amax * marks.mass * (t - s), size)
        tot = int(counts.sum())
        if not tot:
            return empty
        props = s + (t - s) * g.random(tot)
        keep = g.random(tot) * amax < self.coeffs.a_tilde(props)
        times = props[keep]
        idx = np.repeat(np.arange(size), counts)[keep]
        sizes = marks.sample(g, times.size)
        return idx, times, sizes

    @staticmethod
    def _shape(y, size):
        if np.ndim(y) > 0:
            return np.asarray(y, dtype=float), np.shape(y)[0], False
        n = 1 if size is None else int(size)
        return np.full(n, float(y)), n, size is None

    # -- component samplers --------------------------------------------------

    def sample_h(self, rng, s, t, y, size=None):
        """Draw from the started-mass component H_{s,t}(y, .)."""
        g = _as_generator(rng)
        yv, n, scalar = self._shape(y, size)
        if np.any(yv < 0):
            raise ValueError("y must be nonnegative")
        B, D = self.kernels.bd(s, t)
        m = g.poisson(yv * (B / D), n)
        x = g.gamma(m, D)
        return float(x[0]) if scalar else x

    def sample_i(self, rng, s, t, n=None, size=None):
        """Draw from the continuous-input component I_{s,t}."""
        g = _as_generator(rng)
        m = 1 if size is None else int(size)
        acc = np.zeros(m)
        if self.coeffs.a.max_on(s, t) > 0.0:
            grid = self.i_grid(s, t, n)
            for r0, r1 in zip(grid[:-1], grid[1:]):
                alpha = float(self.coeffs.alpha(0.5 * (r0 + r1)))
                if alpha <= 0.0:
                    continue
                _, d_cell = self.kernels.bd(r0, r1)
                u = g.gamma(alpha, d_cell, m)
                if r1 < t:
                    bt, dt = self.kernels.bd(r1, t)
                    k = g.poisson(u * (bt / dt))
                    acc += g.gamma(k, dt)
                else:
                    acc += u
        return float(acc[0]) if size is None else acc

    def sample_itilde(self, rng, s, t, size=None):
        """Draw from the jump-input component ITilde_{s,t} (at truncation delta)."""
        g = _as_generator(rng)
        m = 1 if size is None else int(size)
        idx, times, sizes = self.prm_points_batch(g, s, t, m)
        if times.size:
            bv, dv = self.kernels.bd_vec(times, t)
            k = g.poisson(sizes * bv / dv)
            x = g.gamma(k, dv)
            acc = np.bincount(idx, weights=x, minlength=m)
        else:
            acc = np.zeros(m)
        return float(acc[0]) if size is None else acc

    def sample_k(self, rng, s, t, y, size=None):
        """Draw from the one-step transition law K_{s,t}(y, .).

        The three components are drawn independently from the same stream
        (H, then I, then ITilde) and summed.
        """
        g = _as_generator(rng)
        h = self.sample_h(g, s, t, y, size=size)
        n = h.shape[0] if np.ndim(h) else None
        return h + self.sample_i(g, s, t, size=n) \
                 + self.sample_itilde(g, s, t, size=n)

    def sample_prm(self, rng, s, t) -> PrmRealization:
        """One realization of the driving measure on (s, t] x (delta, inf)."""
        g = _as_generator(rng)
        _, times, sizes = self.prm_points_batch(g, s, t, 1)
        order = np.argsort(times)
        return PrmRealization(times[order], sizes[order], self.delta)


@dataclass(frozen=True)
class TransitionLaw:
    """Descriptor of one transition-law component that can emit both samples
    and Laplace-transform evaluations.

    ``y`` is ignored for the input components I and ITilde, which start at
    zero. ``n`` refines the I-grid; ``delta`` truncates the jump measure.
    """

    coeffs: CoefficientSet
    nu: Optional[JumpMeasure]
    s: float
    t: float
    y: float = 0.0
    component: str = "K"
    n: Optional[int] = None
    delta: Optional[float] = None

    def __post_init__(self):
        if self.component not in ("H", "I", "Itilde", "K"):
            raise ValueError(f"unknown component {self.component!r}")
        if not self.s < self.t:
            raise ValueError("need s < t")
        if self.y < 0:
            raise ValueError("y must be nonnegative")
        if self.component in ("Itilde", "K") and self.nu is not None \
                and self.nu.infinite_activity and self.delta is not None \
                and self.delta <= 0:
            raise InvalidDelta(
                "infinite-activity measures need a positive truncation level")

    def _sampler(self):
        return get_sampler(self.coeffs, self.nu,
                           n_cells=self.n or DEFAULT_CELLS, delta=self.delta)

    def sample(self, rng, size=None):
        s = self._sampler()
        fn = {"H": lambda g, n: s.sample_h(g, self.s, self.t, self.y, size=n),
              "I": lambda g, n: s.sample_i(g, self.s, self.t, size=n),
              "Itilde": lambda g, n: s.sample_itilde(g, self.s, self.t, size=n),
              "K": lambda g, n: s.sample_k(g, self.s, self.t, self.y, size=n),
              }[self.component]
        return fn(rng, size)

    def laplace(self, lam):
        nu_eff = self.nu
        if nu_eff is not None and self._sampler().delta > 0:
            nu_eff = nu_eff.truncated(self._sampler().delta)
        eng = get_kernels(self.coeffs, nu_eff)
        if self.component == "H":
            return eng.laplace_H(self.s, self.t, self.y, lam)[0]
        if self.component == "I":
            return eng.laplace_I(self.s, self.t, lam)[0]
        if self.component == "Itilde":
            return eng.laplace_Itilde(self.s, self.t, lam)[0]
        return eng.laplace_K(self.s, self.t, self.y, lam)[0]


@lru_cache(maxsize=64)
def _cached_sampler(coeffs, nu, n_cells, delta):
    return TransitionSampler(coeffs, nu, n_cells=n_cells, delta=delta)


def get_sampler(coeffs, nu=None, n_cells: int = DEFAULT_CELLS,
                delta: Optional[float] = None) -> TransitionSampler:
    """Shared sampling engine (memoized per configuration)."""
    return _cached_sampler(coeffs, nu, int(n_cells), delta)


def sample_H(rng, coeffs, s, t, y, size=None):
    return get_sampler(coeffs).sample_h(rng, s, t, y, size=size)


def sample_I(rng, coeffs, s, t, n=None, size=None):
    return get_sampler(coeffs).sample_i(rng, s, t, n=n, size=size)


def sample_Itilde(rng, coeffs, nu, s, t, delta=None, size=None):
    return get_sampler(coeffs, nu, delta=delta).sample_itilde(rng, s, t, size=size)


def sample_K(rng, coeffs, nu, s, t, y, n_cells=DEFAULT_CELLS, delta=None, size=None):
    return get_sampler(coeffs, nu, n_cells=n_cells, delta=delta).sample_k(
        rng, s, t, y, size=size)


def sample_prm(rng, coeffs, nu, s, t, delta=None) -> PrmRealization:
    return get_sampler(coeffs, nu, delta=delta).sample_prm(rng, s, t)
