"""Analytic transition-law machinery for the jump CIR equation.

For a time pair ``0 <= s < t`` the four kernel quantities are

    C(s,t) = int_s^t sigma^2(v)/2 * exp(int_0^v beta) dv
    B(s,t) = exp(-int_s^t beta)
    p(s,t) = 1 / (B(0,t) C(s,t))        gamma(s,t) = 1 / (B(0,s) C(s,t))

and the transform kernels

    Psi_{s,t}(lam)    = gamma lam / (p + lam)
    PsiTilde_{s,t}    = int (1 - exp(-y Psi_{s,t}(lam))) nu(dy).

The one-step transition transform of the full equation is

    E[exp(-lam xi_t) | xi_s = y]
        = exp(-y Psi_{s,t}(lam)
              - int_s^t [a(v) Psi_{v,t}(lam) + a~(v) PsiTilde_{v,t}(lam)] dv)

which factorizes into the three component transforms handled below
(``laplace_H`` for the started mass, ``laplace_I`` for the continuous input,
``laplace_Itilde`` for the jump input).

Internally everything is computed from two primitives cached on a shared
grid: ``Lam(v) = int_0^v beta`` and ``E(v) = int_0^v sigma^2/2 exp(Lam)``,
so that

    B(s,t) = exp(Lam(s) - Lam(t)),   D(s,t) := B(0,t) C(s,t)
           = exp(-Lam(t)) (E(t) - E(s)),
    p = 1/D,   gamma = B/D,   Psi(lam) = B lam / (1 + lam D),

the last form staying finite for t -> s. When both beta and sigma are
piecewise constant the primitives are exact closed forms per segment;
otherwise they are tabulated by per-panel Gauss-Legendre quadrature with
cubic-Hermite evaluation between panel ends (derivatives of both primitives
are known exactly).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad_vec

from .coefficients import CoefficientSet
from .errors import BetaNotStrictlyPositiveWarning, DegenerateInterval
from .jumps import JumpMeasure

__all__ = [
    "KernelValue",
    "LaplaceEval",
    "TransitionKernels",
    "get_kernels",
    "kernel_value",
    "psi",
    "psi_tilde",
    "laplace_H",
    "laplace_I",
    "laplace_Itilde",
    "laplace_K",
]

DEFAULT_TOL = 1e-9       # absolute tolerance of kernel time-integrals
DEFAULT_NU_TOL = 1e-8    # absolute tolerance of jump-measure integrals
LAMBDA_MAX = 1e6         # beyond this the analytic limit Psi -> gamma is used


@dataclass(frozen=True)
class KernelValue:
    """The quadruple (C, B, p, gamma) for one time pair."""

    s: float
    t: float
    C: float
    B: float
    p: float
    gamma: float
    quadrature_error: float


@dataclass(frozen=True)
class LaplaceEval:
    """One point of a transition-law Laplace transform."""

    lam: float
    value: float
    error_estimate: float


def _hermite(v, x0, x1, y0, y1, d0, d1):
    h = x1 - x0
    u = (v - x0) / h
    u2 = u * u
    u3 = u2 * u
    return ((2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0
            + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1)


class _PrimitiveTable:
    """Primitives Lam(v) and E(v) on [0, t_max], vectorized in v."""

    def __init__(self, coeffs: CoefficientSet):
        beta, sigma, t_max = coeffs.beta, coeffs.sigma, coeffs.t_max
        self.t_max = t_max
        base = np.unique(np.concatenate((
            [0.0, t_max],
            beta.breakpoints(0.0, t_max),
            sigma.breakpoints(0.0, t_max))))
        self.exact = beta.is_piecewise_constant and sigma.is_piecewise_constant
        if self.exact:
            edges = base
            mids = 0.5 * (edges[:-1] + edges[1:])
            b = np.asarray(beta(mids), dtype=float)
            s2 = np.square(np.asarray(sigma(mids), dtype=float))
            dx = np.diff(edges)
            lam = np.concatenate(([0.0], np.cumsum(b * dx)))
            expl = np.exp(lam)
            inc = np.where(b != 0.0,
                           0.5 * s2 * (expl[1:] - expl[:-1]) / np.where(b != 0.0, b, 1.0),
                           0.5 * s2 * expl[:-1] * dx)
            E = np.concatenate(([0.0], np.cumsum(inc)))
            self.edges, self._b, self._s2 = edges, b, s2
            self._lam, self._E = lam, E
            self.error_scale = 1e-15
        else:
            scale = coeffs.smoothness_scale()
            hmax = t_max / 512.0
            if math.isfinite(scale):
                hmax = min(hmax, scale / 32.0)
            pieces = []
            for lo, hi in zip(base[:-1], base[1:]):
                n = max(1, min(int(math.ceil((hi - lo) / hmax)), 4096))
                pieces.append(np.linspace(lo, hi, n + 1)[:-1])
            edges = np.concatenate(pieces + [[t_max]])
            gx, gw = np.polynomial.legendre.leggauss(16)
            lo = edges[:-1][:, None]
            hi = edges[1:][:, None]
            half = 0.5 * (hi - lo)
            nodes = 0.5 * (hi + lo) + half * gx[None, :]
            bw = np.asarray(beta(nodes.ravel()), float).reshape(nodes.shape)
            lam_inc = np.sum(bw * half * gw[None, :], axis=1)
            lam = np.concatenate(([0.0], np.cumsum(lam_inc)))
            dlam = np.asarray(beta(edges), dtype=float)
            # exp(Lam) at panel-interior quadrature nodes via Hermite on Lam
            lam_nodes = _hermite(nodes, lo, hi, lam[:-1][:, None],
                                 lam[1:][:, None], dlam[:-1][:, None],
                                 dlam[1:][:, None])
            s2n = np.square(np.asarray(sigma(nodes.ravel()), float)).reshape(nodes.shape)
            e_inc = np.sum(0.5 * s2n * np.exp(lam_nodes) * half * gw[None, :], axis=1)
            E = np.concatenate(([0.0], np.cumsum(e_inc)))
            # coarse re-integration gives an honest resolution estimate
            gx8, gw8 = np.polynomial.legendre.leggauss(8)
            nodes8 = 0.5 * (hi + lo) + half * gx8[None, :]
            lam8 = _hermite(nodes8, lo, hi, lam[:-1][:, None], lam[1:][:, None],
                            dlam[:-1][:, None], dlam[1:][:, None])
            s28 = np.square(np.asarray(sigma(nodes8.ravel()), float)).reshape(nodes8.shape)
            e_inc8 = np.sum(0.5 * s28 * np.exp(lam8) * half * gw8[None, :], axis=1)
            err = float(np.sum(np.abs(e_inc - e_inc8)))
            self.edges = edges
            self._lam, self._E = lam, E
            self._dlam = dlam
            self._dE = 0.5 * np.square(np.asarray(sigma(edges), float)) * np.exp(lam)
            self.error_scale = max(err / max(E[-1], 1.0), 1e-15)

    def _idx(self, v):
        return np.clip(np.searchsorted(self.edges, v, side="right") - 1,
                       0, len(self.edges) - 2)

    def lam(self, v):
        v = np.asarray(v, dtype=float)
        k = self._idx(v)
        if self.exact:
            out = self._lam[k] + self._b[k] * (v - self.edges[k])
        else:
            out = _hermite(v, self.edges[k], self.edges[k + 1],
                           self._lam[k], self._lam[k + 1],
                           self._dlam[k], self._dlam[k + 1])
        return out if v.ndim else float(out)

    def growth(self, v):
        v = np.asarray(v, dtype=float)
        k = self._idx(v)
        if self.exact:
            b = self._b[k]
            lam_v = self._lam[k] + b * (v - self.edges[k])
            safe = np.where(b != 0.0, b, 1.0)
            out = self._E[k] + np.where(
                b != 0.0,
                0.5 * self._s2[k] * (np.exp(lam_v) - np.exp(self._lam[k])) / safe,
                0.5 * self._s2[k] * np.exp(self._lam[k]) * (v - self.edges[k]))
        else:
            out = _hermite(v, self.edges[k], self.edges[k + 1],
                           self._E[k], self._E[k + 1],
                           self._dE[k], self._dE[k + 1])
        return out if v.ndim else float(out)


class TransitionKernels:
    """Evaluator of kernel quantities and transition-law transforms.

    Pure functions over an immutable coefficient set (plus an optional jump
    measure); instances cache the shared primitive grid and can be used
    concurrently.
    """

    def __init__(self, coeffs: CoefficientSet, nu: Optional[JumpMeasure] = None,
                 tol: float = DEFAULT_TOL, nu_tol: float = DEFAULT_NU_TOL):
        self.coeffs = coeffs
        self.nu = nu
        self.tol = tol
        self.nu_tol = nu_tol
        self.table = _PrimitiveTable(coeffs)
        self._beta_warned = False

    # -- kernel quantities -------------------------------------------------

    def _check(self, s, t):
        if not (0.0 <= s < t <= self.coeffs.t_max + 1e-12):
            raise DegenerateInterval(
                f"need 0 <= s < t <= t_max, got s={s}, t={t}")

    def bd(self, s, t):
        """(B(s,t), D(s,t)) with D = B(0,t) C(s,t); the stable pair."""
        self._check(s, t)
        lam_s, lam_t = self.table.lam(s), self.table.lam(t)
        D = math.exp(-lam_t) * (self.table.growth(t) - self.table.growth(s))
        return math.exp(lam_s - lam_t), D

    def bd_vec(self, v, t):
        """Vectorized (B(v,t), D(v,t)) for an array of start times v <= t."""
        lam_v = self.table.lam(v)
        lam_t = self.table.lam(t)
        D = np.exp(-lam_t) * (self.table.growth(t) - self.table.growth(v))
        return np.exp(lam_v - lam_t), np.maximum(D, 0.0)

    def kernel_value(self, s, t) -> KernelValue:
        B, D = self.bd(s, t)
        C = self.table.growth(t) - self.table.growth(s)
        p = 1.0 / D
        gamma = B / D
        err = self.table.error_scale * max(abs(C), abs(p), abs(gamma))
        return KernelValue(s=s, t=t, C=C, B=B, p=p, gamma=gamma,
                           quadrature_error=err)

    @staticmethod
    def _check_lam(lam):
        if np.any(np.asarray(lam) < 0):
            raise ValueError("transform arguments must be nonnegative")

    @staticmethod
    def _psi_from_bd(B, D, lam):
        lam = np.asarray(lam, dtype=float)
        core = B * lam / (1.0 + lam * D)
        with np.errstate(divide="ignore", invalid="ignore"):
            limit = np.where(np.asarray(D) > 0.0, B / np.where(D > 0, D, 1.0),
                             lam)
        out = np.where(lam > LAMBDA_MAX, limit, core)
        return out if lam.ndim else float(out)

    def psi(self, s, t, lam):
        """Psi_{s,t}(lam); increasing, concave, Psi(0)=0, Psi(inf)=gamma."""
        self._check_lam(lam)
        B, D = self.bd(s, t)
        return self._psi_from_bd(B, D, lam)

    def psi_tilde(self, s, t, lam):
        """Jump-side kernel; finite under the summability condition."""
        if self.nu is None:
            raise ValueError("psi_tilde needs a jump measure")
        psi_vals = self.psi(s, t, lam)
        return self.nu.one_minus_exp_integral(psi_vals, tol=self.nu_tol)

    # -- transforms --------------------------------------------------------

    def _outer_points(self, s, t):
        pts = self.coeffs.breakpoints(s, t)
        return [float(p) for p in pts]

    def _exponent_integral(self, s, t, lam, use_a, use_atilde):
        """int_s^t [a Psi_{v,t} + a~ PsiTilde_{v,t}](lam) dv, vectorized in lam."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        a, at = self.coeffs.a, self.coeffs.a_tilde
        if use_atilde and self.nu is None:
            raise ValueError("transform with jump input needs a jump measure")

        def integrand(v):
            B, D = self.bd_vec(np.asarray(v), t)
            psi_v = B * lam / (1.0 + lam * D)
            out = np.zeros_like(lam)
            if use_a:
                out = out + a(v) * psi_v
            if use_atilde:
                out = out + at(v) * self.nu.one_minus_exp_integral(
                    psi_v, tol=self.nu_tol)
            return out

        val, err = quad_vec(integrand, s, t, epsabs=self.tol, epsrel=1e-12,
                            points=self._outer_points(s, t) or None)
        return val, err

    def laplace_H(self, s, t, y, lam):
        """Transform of the component started from mass y (no input)."""
        if y < 0:
            raise ValueError("y must be nonnegative")
        self._check_lam(lam)
        B, D = self.bd(s, t)
        lam_arr = np.asarray(lam, dtype=float)
        val = np.exp(-y * self._psi_from_bd(B, D, lam_arr))
        err = np.abs(val) * y * self.table.error_scale
        return (val, err) if lam_arr.ndim else (float(val), float(err))

    def laplace_I(self, s, t, lam):
        """Transform of the continuous-input component."""
        self._check(s, t)
        self._check_lam(lam)
        ex, err = self._exponent_integral(s, t, lam, use_a=True, use_atilde=False)
        val = np.exp(-ex)
        scalar = np.ndim(lam) == 0
        e = np.abs(val) * (err + self.table.error_scale)
        return (float(val[0]), float(e[0])) if scalar else (val, e)

    def laplace_Itilde(self, s, t, lam):
        """Transform of the jump-input component."""
        self._check(s, t)
        self._check_lam(lam)
        ex, err = self._exponent_integral(s, t, lam, use_a=False, use_atilde=True)
        val = np.exp(-ex)
        scalar = np.ndim(lam) == 0
        e = np.abs(val) * (err + self.table.error_scale)
        return (float(val[0]), float(e[0])) if scalar else (val, e)

    def laplace_K(self, s, t, y, lam):
        """One-step transition transform of the full equation."""
        self._check(s, t)
        self._check_lam(lam)
        if y < 0:
            raise ValueError("y must be nonnegative")
        if not self.coeffs.beta_strictly_positive and not self._beta_warned:
            warnings.warn(
                "mean reversion is not strictly positive; the transform "
                "formula is applied outside its proved hypothesis",
                BetaNotStrictlyPositiveWarning, stacklevel=2)
            self._beta_warned = True
        use_atilde = self.coeffs.a_tilde.max_on(s, t) > 0.0
        use_a = self.coeffs.a.max_on(s, t) > 0.0
        if use_a or use_atilde:
            ex, err = self._exponent_integral(s, t, lam, use_a=use_a,
                                              use_atilde=use_atilde)
        else:
            ex, err = np.zeros_like(np.atleast_1d(np.asarray(lam, float))), 0.0
        B, D = self.bd(s, t)
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        total = y * self._psi_from_bd(B, D, lam_arr) + ex
        val = np.exp(-total)
        e = np.abs(val) * (err + (1.0 + y) * self.table.error_scale)
        scalar = np.ndim(lam) == 0
        return (float(val[0]), float(e[0])) if scalar else (val, e)


@lru_cache(maxsize=64)
def _cached_engine(coeffs, nu, tol, nu_tol):
    return TransitionKernels(coeffs, nu, tol=tol, nu_tol=nu_tol)


def get_kernels(coeffs: CoefficientSet, nu: Optional[JumpMeasure] = None,
                tol: float = DEFAULT_TOL,
                nu_tol: float = DEFAULT_NU_TOL) -> TransitionKernels:
    """Shared evaluator for a coefficient set (engines are memoized)."""
    return _cached_engine(coeffs, nu, tol, nu_tol)


def kernel_value(coeffs, s, t, tol: float = DEFAULT_TOL) -> KernelValue:
    return get_kernels(coeffs, tol=tol).kernel_value(s, t)


def psi(coeffs, s, t, lam):
    return get_kernels(coeffs).psi(s, t, lam)


def psi_tilde(coeffs, nu, s, t, lam, tol: float = DEFAULT_NU_TOL):
    return get_kernels(coeffs, nu, nu_tol=tol).psi_tilde(s, t, lam)


def _wrap(lam, pair):
    val, err = pair
    if np.ndim(lam) == 0:
        return LaplaceEval(float(lam), float(val), float(err))
    return [LaplaceEval(float(l), float(v), float(e))
            for l, v, e in zip(np.asarray(lam, float), val, np.broadcast_to(err, np.shape(val)))]


def laplace_H(coeffs, s, t, y, lam):
    return _wrap(lam, get_kernels(coeffs).laplace_H(s, t, y, lam))


def laplace_I(coeffs, s, t, lam, tol: float = DEFAULT_TOL):
    return _wrap(lam, get_kernels(coeffs, tol=tol).laplace_I(s, t, lam))


def laplace_Itilde(coeffs, nu, s, t, lam, tol: float = DEFAULT_NU_TOL):
    return _wrap(lam, get_kernels(coeffs, nu, nu_tol=tol).laplace_Itilde(s, t, lam))


def laplace_K(coeffs, nu, s, t, y, lam, tol: float = DEFAULT_TOL):
    return _wrap(lam, get_kernels(coeffs, nu, tol=tol).laplace_K(s, t, y, lam))
