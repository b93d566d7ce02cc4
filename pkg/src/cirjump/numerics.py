"""Shared deterministic numerics: adaptive quadrature and reproducible
random-variate streams.

Quadrature wraps the adaptive Gauss-Kronrod integrator from scipy, adding
forced breakpoints (knots of piecewise coefficient functions must be
subdivision boundaries) and a power substitution that removes declared
algebraic endpoint singularities.

Random streams are built on the counter-based Philox generator keyed by
``(seed, stream_id)`` through ``numpy.random.SeedSequence``, so a worker
substream reproduces the same variates regardless of scheduling or worker
count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import BoundViolated, NonIntegrable

__all__ = [
    "QuadratureResult",
    "RngStream",
    "integrate",
    "gamma_sample",
    "poisson_sample",
    "inhomogeneous_poisson_times",
]


@dataclass(frozen=True)
class QuadratureResult:
    """Value of a definite integral with an honest error estimate.

    ``converged`` is False when the requested tolerance was not certified;
    the value and estimate are still the best available.
    """

    value: float
    error_estimate: float
    evaluations: int
    converged: bool = True

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be nonnegative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be at least 1")


def _quad_piece(f, lo, hi, tol, points=None):
    out = quad(f, lo, hi, epsabs=tol, epsrel=tol, limit=500,
               points=points, full_output=1)
    value, err, info = out[0], out[1], out[2]
    ok = len(out) == 3
    return value, err, info["neval"], ok


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    breakpoints: Sequence[float] = (),
    singular_exponent: Optional[float] = None,
) -> QuadratureResult:
    """Adaptive integration of ``f`` over ``[lo, hi]``.

    Parameters
    ----------
    f : callable
        Scalar integrand, finite on (lo, hi).
    lo, hi : float
        Integration bounds, ``lo <= hi``; ``hi`` may be ``np.inf``.
    tol : float
        Absolute tolerance target. The returned estimate may exceed it, in
        which case the result is flagged as not converged.
    breakpoints : sequence of float
        Forced subdivision points (knots of piecewise integrands). Points
        outside (lo, hi) are ignored.
    singular_exponent : float, optional
        When given, the integrand behaves like ``(y - lo)**e`` as ``y``
        decreases to ``lo``. The substitution ``y = lo + w**(1/(1+e))``
        makes the transformed integrand bounded. Requires ``e > -1``.
    """
    if hi < lo:
        raise ValueError("integrate needs lo <= hi")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if hi == lo:
        return QuadratureResult(0.0, 0.0, 1)

    pts = sorted(p for p in breakpoints if lo < p < hi and np.isfinite(p))

    total, err_total, nev = 0.0, 0.0, 0
    ok = True

    a = lo
    if singular_exponent is not None:
        e = float(singular_exponent)
        if e <= -1.0:
            raise NonIntegrable(
                f"endpoint exponent {e} <= -1 gives a divergent integral")
        q = 1.0 / (1.0 + e)
        split = pts[0] if pts else (min(lo + 1.0, hi) if np.isinf(hi) else hi)

        def g(w):
            y = lo + w ** q
            return f(y) * q * w ** (q - 1.0)

        v, er, ne, k = _quad_piece(g, 0.0, (split - lo) ** (1.0 / q), tol)
        total += v
        err_total += er
        nev += ne
        ok = ok and k
        a = split
        pts = [p for p in pts if p > split]

    if np.isinf(hi):
        cap = max([a + 1.0] + pts)
        if cap > a:
            v, er, ne, k = _quad_piece(f, a, cap, tol, points=pts or None)
            total += v
            err_total += er
            nev += ne
            ok = ok and k
        v, er, ne, k = _quad_piece(f, cap, np.inf, tol)
        total += v
        err_total += er
        nev += ne
        ok = ok and k
    elif hi > a:
        v, er, ne, k = _quad_piece(f, a, hi, tol, points=pts or None)
        total += v
        err_total += er
        nev += ne
        ok = ok and k

    return QuadratureResult(total, err_total, max(nev, 1),
                            converged=ok and err_total <= tol)


@dataclass(frozen=True)
class RngStream:
    """Identifier of a reproducible random stream.

    Identical ``(seed, stream_id)`` pairs reproduce identical variate
    sequences across runs, platforms and worker counts. Substreams for
    parallel work are obtained with :meth:`shifted`; callers are responsible
    for keeping the ids they hand out disjoint.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed,
                                    spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))

    def shifted(self, offset: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + offset)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    raise TypeError("rng must be a numpy Generator or an RngStream")


def gamma_sample(rng, shape, rate, size=None):
    """Gamma variate(s) with the given shape and *rate* (mean shape/rate).

    Shape zero is the degenerate law at 0 and is returned as exact zeros,
    which is what the Poisson-mixture sampler relies on.
    """
    g = _as_generator(rng)
    shape = np.asarray(shape, dtype=float)
    if np.any(shape < 0):
        raise ValueError("gamma shape must be nonnegative")
    if np.any(np.asarray(rate) <= 0):
        raise ValueError("gamma rate must be positive")
    return g.gamma(shape, 1.0 / np.asarray(rate, dtype=float), size)


def poisson_sample(rng, mean, size=None):
    """Poisson variate(s); a zero mean yields exact zeros."""
    g = _as_generator(rng)
    mean = np.asarray(mean, dtype=float)
    if np.any(mean < 0):
        raise ValueError("poisson mean must be nonnegative")
    return g.poisson(mean, size)


def inhomogeneous_poisson_times(
    rng,
    rate: Callable[[np.ndarray], np.ndarray],
    s: float,
    t: float,
    rate_bound: float,
) -> np.ndarray:
    """Event times of an inhomogeneous Poisson process on ``(s, t]``.

    Thinning of a homogeneous Poisson stream with intensity ``rate_bound``:
    proposals are uniform on the interval and kept with probability
    ``rate(v) / rate_bound``. Raises :class:`BoundViolated` when the rate
    exceeds its declared bound at a proposal.
    """
    g = _as_generator(rng)
    if t < s:
        raise ValueError("need s <= t")
    if rate_bound < 0 or not np.isfinite(rate_bound):
        raise ValueError("rate_bound must be finite and nonnegative")
    if rate_bound == 0 or t == s:
        return np.empty(0)
    n = g.poisson(rate_bound * (t - s))
    times = s + (t - s) * g.random(n)
    u = g.random(n)
    r = np.asarray(rate(times), dtype=float)
    if np.any(r > rate_bound * (1.0 + 1e-12)):
        raise BoundViolated(
            f"rate exceeded declared bound {rate_bound} during thinning")
    return np.sort(times[u * rate_bound < r])


def gauss_legendre_panels(panel_edges: np.ndarray, order: int = 16):
    """Gauss-Legendre nodes and weights for a sequence of panels.

    Returns flat ``(nodes, weights)`` arrays covering all panels; exact for
    polynomials of degree ``2*order - 1`` on each panel.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    lo = panel_edges[:-1][:, None]
    hi = panel_edges[1:][:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights
