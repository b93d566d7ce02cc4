import math

import numpy as np
import pytest

import cirjump as cj
from cirjump.errors import InvalidDelta, RestrictiveConditionViolated
from cirjump.kernels import get_kernels
from cirjump.numerics import RngStream
from cirjump.samplers import get_sampler
from cirjump.verify import (mc_statistics, moment_check_from_sums,
                            transform_comparison, zero_fraction_z)

N = 150_000


def _grid():
    return np.array([0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0])


class TestSampleH:
    def test_zero_start_stays_zero(self, pc_coeffs):
        g = RngStream(40).generator()
        x = cj.sample_H(g, pc_coeffs, 0.2, 1.2, 0.0, size=1000)
        assert np.all(x == 0.0)

    def test_moments_zeros_transform(self, pc_coeffs):
        s, t, y = 0.2, 1.2, 0.8
        eng = get_kernels(pc_coeffs)
        kv = eng.kernel_value(s, t)
        sampler = get_sampler(pc_coeffs)
        stats = mc_statistics(lambda g, m: sampler.sample_h(g, s, t, y, size=m),
                              N, _grid(), seed=41)
        mc = moment_check_from_sums(stats, y * kv.B, 2 * y * kv.B / kv.p)
        assert mc.passed
        zf = zero_fraction_z(stats["zeros"], N, math.exp(-y * kv.gamma))
        assert abs(zf) <= 4.0
        analytic, _ = eng.laplace_H(s, t, y, _grid())
        z = (stats["mean"] - analytic) / stats["std_err"]
        assert np.max(np.abs(z)) <= 4.0

    def test_branching_property(self, pc_coeffs):
        # H(y1) + independent H(y2) has the law of H(y1 + y2)
        s, t, y1, y2 = 0.3, 1.5, 0.4, 0.9
        eng = get_kernels(pc_coeffs)
        sampler = get_sampler(pc_coeffs)
        analytic, _ = eng.laplace_H(s, t, y1 + y2, _grid())
        cmp = transform_comparison(
            lambda g, m: sampler.sample_h(g, s, t, y1, size=m)
            + sampler.sample_h(g, s, t, y2, size=m),
            analytic, _grid(), N, seed=42, label="branching")
        assert cmp.passed

    def test_vector_start(self, pc_coeffs):
        g = RngStream(43).generator()
        y = np.array([0.0, 0.5, 2.0])
        x = cj.sample_H(g, pc_coeffs, 0.2, 1.2, y)
        assert x.shape == (3,)
        assert x[0] == 0.0

    def test_scalar_draw_deterministic(self, pc_coeffs):
        a = cj.sample_H(RngStream(44).generator(), pc_coeffs, 0.2, 1.2, 0.7)
        b = cj.sample_H(RngStream(44).generator(), pc_coeffs, 0.2, 1.2, 0.7)
        assert a == b


class TestSampleI:
    def test_no_input_is_zero(self, two_atoms):
        c = cj.CoefficientSet(a=cj.constant(0.0), a_tilde=cj.constant(0.2),
                              beta=cj.constant(1.0), sigma=cj.constant(1.0),
                              t_max=2.0)
        g = RngStream(45).generator()
        assert np.all(cj.sample_I(g, c, 0.1, 1.4, size=500) == 0.0)

    def test_transform_piecewise(self, pc_coeffs):
        s, t = 0.2, 1.4
        eng = get_kernels(pc_coeffs)
        sampler = get_sampler(pc_coeffs)
        analytic, _ = eng.laplace_I(s, t, _grid())
        cmp = transform_comparison(
            lambda g, m: sampler.sample_i(g, s, t, size=m),
            analytic, _grid(), N, seed=46, label="I")
        assert cmp.passed

    def test_gamma_law_moments(self):
        # constant alpha: the law is Gamma(alpha, p(s, t))
        alpha = 1.8
        c = cj.CoefficientSet(a=cj.constant(alpha * 0.5),
                              a_tilde=cj.constant(0.0),
                              beta=cj.constant(1.0), sigma=cj.constant(1.0),
                              t_max=2.0)
        s, t = 0.2, 1.4
        kv = get_kernels(c).kernel_value(s, t)
        sampler = get_sampler(c)
        stats = mc_statistics(lambda g, m: sampler.sample_i(g, s, t, size=m),
                              N, _grid(), seed=47)
        mc = moment_check_from_sums(stats, alpha / kv.p, alpha / kv.p ** 2)
        assert mc.passed

    def test_refinement_ladder(self):
        # piecewise-linear input rate: the cell law is only exact in the
        # limit, and the transform discrepancy shrinks as the grid refines
        c = cj.CoefficientSet(a=cj.piecewise_linear([0.0, 2.0], [0.2, 2.0]),
                              a_tilde=cj.constant(0.0),
                              beta=cj.constant(1.0), sigma=cj.constant(1.0),
                              t_max=2.0)
        s, t = 0.2, 1.8
        eng = get_kernels(c)
        analytic, _ = eng.laplace_I(s, t, _grid())
        disc = []
        for n in (1, 4, 16):
            sampler = cj.TransitionSampler(c, n_cells=n)
            stats = mc_statistics(
                lambda g, m: sampler.sample_i(g, s, t, size=m),
                N, _grid(), seed=48)
            disc.append(float(np.max(np.abs(stats["mean"] - analytic))))
        noise = 4.0 * 1.0 / math.sqrt(N)
        assert disc[1] <= disc[0] + noise
        assert disc[2] <= disc[1] + noise
        assert disc[2] < disc[0]

    def test_skew_convolution(self, pc_coeffs):
        # I_{t1,t2} propagated through H(t2, t3) plus fresh I_{t2,t3}
        # has the law of I_{t1,t3}
        t1, t2, t3 = 0.2, 0.9, 1.6
        eng = get_kernels(pc_coeffs)
        sampler = get_sampler(pc_coeffs)
        analytic, _ = eng.laplace_I(t1, t3, _grid())

        def draw(g, m):
            v = sampler.sample_i(g, t1, t2, size=m)
            w = sampler.sample_h(g, t2, t3, v)
            return w + sampler.sample_i(g, t2, t3, size=m)

        cmp = transform_comparison(draw, analytic, _grid(), N, seed=49,
                                   label="skew-I")
        assert cmp.passed


class TestSampleItilde:
    def test_no_jump_input_is_zero(self, pc_coeffs, two_atoms):
        c = cj.CoefficientSet(a=pc_coeffs.a, a_tilde=cj.constant(0.0),
                              beta=pc_coeffs.beta, sigma=pc_coeffs.sigma,
                              t_max=2.0)
        g = RngStream(50).generator()
        assert np.all(cj.sample_Itilde(g, c, two_atoms, 0.2, 1.2, size=400)
                      == 0.0)

    def test_transform_unit_atom(self, pc_coeffs):
        nu = cj.atoms([(0.9, 1.3)])
        s, t = 0.2, 1.6
        eng = get_kernels(pc_coeffs, nu)
        sampler = get_sampler(pc_coeffs, nu)
        analytic, _ = eng.laplace_Itilde(s, t, _grid())
        cmp = transform_comparison(
            lambda g, m: sampler.sample_itilde(g, s, t, size=m),
            analytic, _grid(), N, seed=51, label="Itilde")
        assert cmp.passed

    def test_transform_truncated_infinite_activity(self, pc_coeffs, rho04):
        # sampler at truncation delta is exact for the restricted measure
        delta = 0.05
        s, t = 0.2, 1.2
        sampler = cj.TransitionSampler(pc_coeffs, rho04, delta=delta)
        eng = cj.TransitionKernels(pc_coeffs, rho04.truncated(delta))
        analytic, _ = eng.laplace_Itilde(s, t, _grid())
        cmp = transform_comparison(
            lambda g, m: sampler.sample_itilde(g, s, t, size=m),
            analytic, _grid(), N, seed=52, label="Itilde-rho04")
        assert cmp.passed

    def test_jump_count_mean(self, pc_coeffs, two_atoms):
        s, t = 0.2, 1.6
        sampler = get_sampler(pc_coeffs, two_atoms)
        g = RngStream(53).generator()
        reps = 3000
        counts = np.array([len(sampler.sample_prm(g, s, t))
                           for _ in range(reps)], dtype=float)
        expected = two_atoms.mass_above(0.0) \
            * pc_coeffs.a_tilde.integral(s, t)
        se = counts.std(ddof=1) / math.sqrt(reps)
        assert abs(counts.mean() - expected) <= 3 * se

    def test_truncated_atoms_consistency(self, pc_coeffs, two_atoms):
        # delta = 1.0 drops the small atom; the sampler then has exactly
        # the law of the restricted measure
        s, t = 0.2, 1.4
        sampler = cj.TransitionSampler(pc_coeffs, two_atoms, delta=1.0)
        eng = cj.TransitionKernels(pc_coeffs, two_atoms.truncated(1.0))
        analytic, _ = eng.laplace_Itilde(s, t, _grid())
        cmp = transform_comparison(
            lambda g, m: sampler.sample_itilde(g, s, t, size=m),
            analytic, _grid(), 60_000, seed=64, label="Itilde-cut-atoms")
        assert cmp.passed

    def test_skew_convolution(self, pc_coeffs, two_atoms):
        t1, t2, t3 = 0.2, 0.9, 1.6
        eng = get_kernels(pc_coeffs, two_atoms)
        sampler = get_sampler(pc_coeffs, two_atoms)
        analytic, _ = eng.laplace_Itilde(t1, t3, _grid())

        def draw(g, m):
            v = sampler.sample_itilde(g, t1, t2, size=m)
            w = sampler.sample_h(g, t2, t3, v)
            return w + sampler.sample_itilde(g, t2, t3, size=m)

        cmp = transform_comparison(draw, analytic, _grid(), N, seed=54,
                                   label="skew-Itilde")
        assert cmp.passed


class TestSampleK:
    def test_reduces_to_H(self, two_atoms):
        c = cj.CoefficientSet(a=cj.constant(0.0), a_tilde=cj.constant(0.0),
                              beta=cj.constant(1.0), sigma=cj.constant(1.0),
                              t_max=2.0)
        s, t, y = 0.2, 1.2, 0.9
        eng = get_kernels(c, two_atoms)
        kv = eng.kernel_value(s, t)
        sampler = get_sampler(c, two_atoms)
        stats = mc_statistics(lambda g, m: sampler.sample_k(g, s, t, y, size=m),
                              N, _grid(), seed=55)
        mc = moment_check_from_sums(stats, y * kv.B, 2 * y * kv.B / kv.p)
        assert mc.passed
        zf = zero_fraction_z(stats["zeros"], N, math.exp(-y * kv.gamma))
        assert abs(zf) <= 4.0

    def test_full_model_transform(self, pc_coeffs, two_atoms):
        from cirjump.verify import compare_transition
        cmp = compare_transition(pc_coeffs, two_atoms, 0.2, 1.2, 0.8,
                                 N, _grid(), seed=56)
        assert cmp.passed

    def test_two_step_consistency(self, pc_coeffs, two_atoms):
        from cirjump.verify import chapman_kolmogorov
        cmp = chapman_kolmogorov(pc_coeffs, two_atoms, 0.2, 0.7, 1.2, 0.8,
                                 N, _grid(), seed=57)
        assert cmp.passed


class TestPrmAndGates:
    def test_prm_ordered_and_above_delta(self, pc_coeffs, rho04):
        sampler = cj.TransitionSampler(pc_coeffs, rho04, delta=0.05)
        g = RngStream(58).generator()
        prm = sampler.sample_prm(g, 0.0, 2.0)
        assert np.all(np.diff(prm.times) > 0)
        assert np.all(prm.sizes > 0.05 * (1 - 1e-12))
        assert prm.delta == 0.05

    def test_infinite_activity_delta_zero_rejected(self, pc_coeffs, rho04):
        sampler = cj.TransitionSampler(pc_coeffs, rho04, delta=0.0)
        g = RngStream(59).generator()
        with pytest.raises(InvalidDelta):
            sampler.sample_itilde(g, 0.2, 1.2, size=4)

    def test_restrictive_gate_blocks_sampling(self, pc_coeffs, rho07):
        sampler = cj.TransitionSampler(pc_coeffs, rho07, delta=0.05)
        g = RngStream(60).generator()
        with pytest.raises(RestrictiveConditionViolated):
            sampler.sample_itilde(g, 0.2, 1.2, size=4)

    def test_all_outputs_nonnegative(self, pc_coeffs, two_atoms):
        g = RngStream(61).generator()
        sampler = get_sampler(pc_coeffs, two_atoms)
        x = sampler.sample_k(g, 0.2, 1.2, 0.8, size=5000)
        assert np.all(x >= 0.0)


class TestNumericKernelBranch:
    def test_sampling_with_nonpiecewise_coefficients(self):
        # clipped-sine mean reversion (with genuine clipping kinks) and
        # sine volatility exercise the tabulated primitive branch end to
        # end: H and the jump component stay exact samplers, so any
        # interpolation bias in the kernel tables would show up as z-drift
        c = cj.CoefficientSet(a=cj.constant(0.0),
                              a_tilde=cj.constant(0.4),
                              beta=cj.clipped_sine(0.3, 0.6, 2.0, 0.5),
                              sigma=cj.clipped_sine(1.2, 0.3, 2.0, 0.0),
                              x0=0.5, t_max=2.0)
        nu = cj.atoms([(0.9, 1.0)])
        from cirjump.errors import BetaNotStrictlyPositiveWarning
        from cirjump.verify import compare_transition
        # the clipped mean reversion touches zero, so the transform warns
        # that it is applied outside its proved hypothesis; this comparison
        # is the Monte Carlo verification of exactly that case
        with pytest.warns(BetaNotStrictlyPositiveWarning):
            cmp = compare_transition(c, nu, 0.2, 1.6, 0.7, N, _grid(),
                                     seed=63)
        assert cmp.passed


class TestTransitionLaw:
    def test_descriptor_sample_and_laplace(self, pc_coeffs, two_atoms):
        law = cj.TransitionLaw(pc_coeffs, two_atoms, s=0.2, t=1.2, y=0.8,
                               component="K")
        g = RngStream(62).generator()
        x = law.sample(g, size=50_000)
        emp, se = cj.empirical_laplace(x, [1.0])
        analytic = law.laplace(1.0)
        assert abs(emp[0] - analytic) <= 4 * se[0]

    def test_invalid_component(self, pc_coeffs, two_atoms):
        with pytest.raises(ValueError):
            cj.TransitionLaw(pc_coeffs, two_atoms, s=0.2, t=1.2,
                             component="X")

    def test_degenerate_times(self, pc_coeffs, two_atoms):
        with pytest.raises(ValueError):
            cj.TransitionLaw(pc_coeffs, two_atoms, s=1.2, t=1.2)
