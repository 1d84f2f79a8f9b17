import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from ksk.errors import ConfigurationError, DomainError, UnsupportedError
from ksk.geometry import PhasePoint
from ksk.kernel import GridSpec, density_grid
from ksk.levy import GaussianSurrogate, LevyKernel, char_exponent, iso_constant
from ksk.simulate import (Cube, SimConfig, conditional_moment, empirical_char_function,
                          empirical_density, large_jump_cube_probability,
                          sample_kinetic_path, sample_stable_increment, simulate_endpoints,
                          small_jump_tail_check)

K15 = LevyKernel(1, 1.5)
CAUCHY = LevyKernel(1, 1.0)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(seed=-1), dict(n_paths=0), dict(small_jump_cutoff=0.0),
                                    dict(small_jump_cutoff=2.0), dict(t=0.0),
                                    dict(small_jump_scheme="exact")])
    def test_rejects(self, kw):
        with pytest.raises(ConfigurationError):
            SimConfig(**kw)

    def test_scheme_parsing(self):
        assert SimConfig(small_jump_scheme="euler_mesh(25)").scheme == ("euler_mesh", 25)
        assert SimConfig(small_jump_scheme="truncate").scheme == ("truncate", None)


class TestIncrements:
    @pytest.mark.parametrize("alpha, dt", [(0.7, 1.0), (1.0, 0.3), (1.5, 2.0)])
    def test_characteristic_function(self, alpha, dt, rng):
        k = LevyKernel(1, alpha)
        L = sample_stable_increment(k, dt, rng, size=1_000_000)
        xi = np.linspace(0.05, 2.0, 20)[:, None] / dt ** (1 / alpha)
        ecf, se_re, se_im = empirical_char_function(L, xi)
        model = np.exp(-dt * char_exponent(k, xi).real)
        assert np.all(np.abs(ecf.real - model) <= 4 * se_re)
        assert np.all(np.abs(ecf.imag) <= 4 * se_im)

    def test_higher_dimension_law(self, rng):
        k = LevyKernel(2, 1.2)
        L = sample_stable_increment(k, 0.5, rng, size=400_000)
        xi = np.array([[0.3, 0.1], [0.0, 1.0], [-0.7, 0.7]])
        ecf, se_re, _ = empirical_char_function(L, xi)
        assert np.all(np.abs(ecf.real - np.exp(-0.5 * char_exponent(k, xi).real)) <= 4 * se_re)

    def test_symmetry(self, rng):
        L = sample_stable_increment(K15, 1.0, rng, size=200_000)[:, 0]
        sgn = np.sign(L)
        assert abs(sgn.mean()) <= 4 / math.sqrt(len(L))

    def test_near_gaussian_scale(self, rng):
        # the variance is infinite for alpha < 2, so compare interquartile ranges
        alpha = 1.99
        k = LevyKernel(1, alpha)
        c = iso_constant(1, alpha)
        L = sample_stable_increment(k, 1.0, rng, size=1_000_000)[:, 0]
        iqr = np.subtract(*np.percentile(L, [75, 25]))
        gauss = 2 * stats.norm.ppf(0.75) * math.sqrt(2 * c)
        exact = 2 * stats.levy_stable.ppf(0.75, alpha, 0, scale=c ** (1 / alpha))
        assert iqr == pytest.approx(gauss, rel=0.1)
        assert iqr == pytest.approx(exact, rel=0.02)

    def test_surrogate_variance(self, rng):
        L = sample_stable_increment(GaussianSurrogate(1), 0.5, rng, size=200_000)
        assert L.var() == pytest.approx(1.0, rel=0.02)

    def test_shape_and_errors(self, rng):
        assert sample_stable_increment(K15, 1.0, rng).shape == (1,)
        with pytest.raises(DomainError):
            sample_stable_increment(K15, 0.0, rng)
        with pytest.raises(UnsupportedError):
            sample_stable_increment(LevyKernel.named("non-symmetric", 2, 1.0), 1.0, rng)


class TestPaths:
    def _path_with_jumps(self, n_jumps, scheme="truncate", mesh=0):
        cfg = SimConfig(small_jump_cutoff=1.0, small_jump_scheme=scheme)
        for seed in range(200):
            p = sample_kinetic_path(K15, cfg, np.random.default_rng(seed), mesh=mesh)
            if p.n_jumps == n_jumps:
                return p
        raise AssertionError("no path with the requested jump count")

    def test_no_jumps_truncated(self):
        p = self._path_with_jumps(0)
        np.testing.assert_array_equal(p.X, [0.0])
        np.testing.assert_array_equal(p.V, [0.0])

    def test_single_jump(self):
        p = self._path_with_jumps(1)
        y, tau = p.jump_sizes[0], p.jump_times[0]
        np.testing.assert_allclose(p.X, y * (1 - tau), rtol=1e-15)
        np.testing.assert_allclose(p.V, y, rtol=1e-15)

    def test_exact_position_integration(self):
        p = self._path_with_jumps(4, mesh=2000)
        times, X, V = p.trajectory
        # X is the integral of the step function V; the trapezoid rule on a
        # mesh misses at most one step per jump
        riemann = np.concatenate([[0.0], np.cumsum(0.5 * (V[1:, 0] + V[:-1, 0]) * np.diff(times))])
        bound = np.abs(p.jump_sizes).sum() * (times[1] - times[0])
        assert np.max(np.abs(riemann - X[:, 0])) <= bound
        np.testing.assert_allclose([X[-1, 0], V[-1, 0]], [p.X[0], p.V[0]], rtol=1e-12)

    def test_small_part_recorded(self):
        cfg = SimConfig(small_jump_cutoff=0.1, small_jump_scheme="gaussian_compensate")
        p = sample_kinetic_path(K15, cfg, np.random.default_rng(3))
        jx, jv = p.jump_part()
        np.testing.assert_allclose(jx + p.small_jump_contribution[0], p.X)
        np.testing.assert_allclose(jv + p.small_jump_contribution[1], p.V)

    @pytest.mark.parametrize("scheme", ["truncate", "gaussian_compensate", "euler_mesh(10)"])
    def test_endpoint_schemes(self, scheme):
        cfg = SimConfig(seed=5, n_paths=2000, small_jump_cutoff=0.1, small_jump_scheme=scheme)
        X, V = simulate_endpoints(K15, cfg)
        assert X.shape == V.shape == (2000, 1) and np.all(np.isfinite(X))

    def test_reproducible_across_workers(self):
        cfg = SimConfig(seed=11, n_paths=150_000, small_jump_cutoff=0.05)
        a = simulate_endpoints(K15, cfg, n_jobs=1)
        b = simulate_endpoints(K15, cfg, n_jobs=2)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])
        c = simulate_endpoints(K15, SimConfig(seed=12, n_paths=150_000, small_jump_cutoff=0.05))
        assert not np.array_equal(a[0], c[0])

    def test_velocity_law(self):
        cfg = SimConfig(seed=1, n_paths=400_000, small_jump_cutoff=0.1)
        _, V = simulate_endpoints(K15, cfg)
        xi = np.linspace(0.1, 3.0, 10)[:, None]
        ecf, se, _ = empirical_char_function(V, xi)
        assert np.all(np.abs(ecf.real - np.exp(-char_exponent(K15, xi).real)) <= 4 * se)

    def test_box_probabilities_match_grid(self):
        cfg = SimConfig(seed=2, n_paths=200_000, small_jump_cutoff=0.1)
        X, V = simulate_endpoints(K15, cfg)
        grid = density_grid(K15, 1.0, GridSpec.phase(1, 10, 6, 0.05, 0.05), pad=4)
        xe, ve = np.array([-4.0, -1.0, 0.0, 1.0, 4.0]), np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
        model = grid.box_probabilities((xe, ve))
        emp = empirical_density(np.hstack([X, V]), [xe, ve])
        assert np.max(np.abs(emp.z_scores(model))) <= 3
        assert emp.probability.sum() + emp.outside / emp.n == pytest.approx(1.0)


class TestLargeJumps:
    def test_first_term_vanishes_outside_cone(self, rng):
        for method in ("conditional", "indicator"):
            est = large_jump_cube_probability(CAUCHY, Cube(PhasePoint([12.0], [-8.5])), 1, 5000,
                                              rng, method=method)
            assert est.estimate == 0.0

    def test_probability_at_origin(self, rng):
        est = large_jump_cube_probability(CAUCHY, Cube(PhasePoint([0.0], [0.0])), 8, 20_000, rng)
        assert 0 < est.estimate < 1
        assert est.truncation_bound == pytest.approx(stats.poisson.sf(8, 2.0))

    def test_stderr_rate(self):
        cube = Cube(PhasePoint([0.0], [0.0]))
        se = [large_jump_cube_probability(CAUCHY, cube, 4, m, np.random.default_rng(0),
                                          method="indicator").stderr for m in (4000, 64000)]
        assert se[0] / se[1] == pytest.approx(4.0, rel=0.2)

    @pytest.mark.parametrize("z", [[0.0, 0.0], [3.0, 4.0], [-6.0, 2.0]])
    def test_conditional_matches_indicator(self, z, rng):
        cube = Cube(PhasePoint([z[0]], [z[1]]))
        a = large_jump_cube_probability(CAUCHY, cube, 6, 40_000, rng, method="conditional")
        b = large_jump_cube_probability(CAUCHY, cube, 6, 400_000, rng, method="indicator")
        assert abs(a.estimate - b.estimate) <= 4 * math.hypot(a.stderr, b.stderr)
        assert a.stderr < b.stderr

    def test_adaptive_allocation(self, rng):
        cube = Cube(PhasePoint([20.0], [-3.0]))
        est = large_jump_cube_probability(CAUCHY, cube, 8, 5000, rng, target_rel_stderr=0.05,
                                          max_samples=2_000_000)
        assert est.stderr <= 0.05 * est.estimate

    def test_general_kernel_uses_indicator(self, rng):
        k = LevyKernel.named("non-symmetric", 2, 1.0)
        est = large_jump_cube_probability(k, Cube(PhasePoint([0, 0], [0, 0])), 3, 2000, rng)
        assert 0 < est.estimate < 1
        with pytest.raises(UnsupportedError):
            large_jump_cube_probability(k, Cube(PhasePoint([0, 0], [0, 0])), 3, 2000, rng,
                                        method="conditional")

    def test_domain(self, rng):
        with pytest.raises(DomainError):
            large_jump_cube_probability(CAUCHY, Cube(PhasePoint([0], [0])), 0, 100, rng)
        with pytest.raises(DomainError):
            Cube(PhasePoint([0], [0]), r=0)


class TestSmallJumpTail:
    def test_tail(self):
        cfg = SimConfig(seed=4, n_paths=200_000, small_jump_cutoff=0.05)
        rep = small_jump_tail_check(K15, cfg, [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0])
        assert rep.probability[0] == 1.0
        assert rep.monotone
        assert rep.slope < 0
        assert np.all(rep.ci_low <= rep.probability) and np.all(rep.probability <= rep.ci_high)

    def test_only_constant_kappa(self):
        with pytest.raises(DomainError):
            small_jump_tail_check(LevyKernel.named("anisotropic-even", 1, 1.0), SimConfig(), [1.0])


class TestEstimators:
    def test_single_box(self):
        emp = empirical_density(np.array([[0.5, 0.5]] * 10), [[0.0, 2.0], [0.0, 0.5, 1.0]])
        assert emp.density[0, 1] == pytest.approx(1.0)
        assert emp.outside == 0

    def test_remainder(self, rng):
        s = rng.standard_normal((1000, 2)) * 3
        emp = empirical_density(s, [np.linspace(-1, 1, 5), np.linspace(-1, 1, 5)])
        assert emp.probability.sum() + emp.outside / emp.n == pytest.approx(1.0)
        assert emp.probability.sum() <= 1

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=40))
    def test_probabilities_bounded(self, xs):
        s = np.column_stack([xs, xs])
        emp = empirical_density(s, [np.linspace(-2, 2, 3), np.linspace(-2, 2, 3)])
        assert 0 <= emp.probability.sum() <= 1 + 1e-12
        assert np.all(emp.ci_low <= emp.probability + 1e-12)
        assert np.all(emp.probability <= emp.ci_high + 1e-12)

    def test_errors(self):
        with pytest.raises(DomainError):
            empirical_density(np.zeros((0, 2)), [[0, 1], [0, 1]])
        with pytest.raises(DomainError):
            empirical_density(np.zeros((3, 2)), [[0, 1]])

    def test_phase_point_samples(self):
        emp = empirical_density([PhasePoint([0.1], [0.1])], [[0, 1], [0, 1]])
        assert emp.counts[0, 0] == 1

    def test_conditional_moment(self):
        X = np.array([1.0, 2.0, 3.0, 10.0])
        V = np.array([0.0, 0.1, -0.1, 5.0])
        mean, se, m = conditional_moment(X, V, 0.0, 0.5, 1.0)
        assert m == 3 and mean == pytest.approx(2.0) and se == pytest.approx(1 / math.sqrt(3))
        assert math.isnan(conditional_moment(X, V, 100.0, 0.5, 1.0)[0])
