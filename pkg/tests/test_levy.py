import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from ksk.errors import DomainError
from ksk.levy import (GaussianSurrogate, LevyKernel, char_exponent, decompose_vector,
                      decompose_vectors, iso_constant, iso_constant_closed, jump_rate,
                      kinetic_exponent, small_jump_covariance, split_measure)


class TestKernel:
    def test_validation(self):
        with pytest.raises(DomainError):
            LevyKernel(1, 2.0)
        with pytest.raises(DomainError):
            LevyKernel(1, 1.0, kappa=0.0)
        with pytest.raises(DomainError):
            LevyKernel.general(1, 1.0, lambda y: np.ones(y.shape[:-1]), 2.0, 1.0, True)
        with pytest.raises(DomainError):
            LevyKernel.named("bogus", 1, 1.0)

    def test_bounds_checked(self):
        with pytest.raises(DomainError):
            LevyKernel.general(2, 1.0, lambda y: np.full(y.shape[:-1], 3.0), 0.5, 1.5, True)

    def test_odd_moment_checked(self):
        # kappa = 1 + 0.5 w_1 has a nonzero first spherical moment
        fn = lambda y: 1 + 0.5 * y[..., 0] / np.linalg.norm(y, axis=-1)
        with pytest.raises(DomainError):
            LevyKernel.general(2, 1.0, fn, 0.5, 1.5, False)

    def test_non_symmetric_needs_d2(self):
        with pytest.raises(DomainError):
            LevyKernel.named("non-symmetric", 1, 1.0)
        assert not LevyKernel.named("non-symmetric", 2, 1.0).even

    def test_scaled(self):
        assert LevyKernel(1, 1.0, kappa=2.0).scaled(3.0).kappa == 6.0


class TestCharExponent:
    @pytest.mark.parametrize("d, alpha", [(1, 0.5), (1, 1.0), (1, 1.7), (2, 1.2), (3, 0.8)])
    def test_iso_constant_closed_form(self, d, alpha):
        assert iso_constant(d, alpha) == pytest.approx(iso_constant_closed(d, alpha), rel=1e-10)

    def test_iso_constant_by_independent_quadrature(self):
        f = lambda u: (1 - math.cos(u)) / u ** 1.5
        ref = 2 * sum(integrate.quad(f, a, b, limit=400)[0] for a, b in [(0, 1), (1, 200)])
        ref += 2 * integrate.quad(lambda u: u ** -1.5, 200, np.inf)[0]
        ref -= 2 * integrate.quad(lambda u: u ** -1.5, 200, np.inf, weight="cos", wvar=1.0)[0]
        assert iso_constant(1, 0.5) == pytest.approx(ref, rel=1e-7)

    def test_zero(self):
        assert char_exponent(LevyKernel(2, 1.3), np.zeros(2)) == 0
        k = LevyKernel.named("anisotropic-even", 1, 1.1)
        assert abs(char_exponent(k, np.zeros(1))) < 1e-12

    def test_cauchy_value(self):
        k = LevyKernel(1, 1.0)
        xi = np.array([[-2.5], [0.3], [7.0]])
        np.testing.assert_allclose(char_exponent(k, xi).real, math.pi * np.abs(xi[:, 0]), rtol=1e-10)

    @given(st.floats(0.2, 1.9), st.floats(-50, 50).filter(lambda x: abs(x) > 1e-6),
           st.floats(0.01, 100))
    def test_homogeneity(self, alpha, xi, lam):
        k = LevyKernel(1, alpha, kappa=1.3)
        a = char_exponent(k, np.array([lam * xi]))
        b = lam ** alpha * char_exponent(k, np.array([xi]))
        assert a == pytest.approx(b, rel=1e-10)

    def test_even_kernel_is_real(self):
        k = LevyKernel.named("anisotropic-even", 1, 1.3)
        xi = np.linspace(-20, 20, 41)[:, None]
        psi = char_exponent(k, xi)
        assert np.max(np.abs(psi.imag)) <= 1e-9 * np.max(np.abs(psi))
        assert np.all(psi.real >= 0)

    def test_general_matches_direct_quadrature(self):
        k = LevyKernel.named("anisotropic-even", 1, 1.3)
        xi = 2.0
        kap = lambda y: float(k.kappa_at(np.array([y])))
        near = integrate.quad(lambda y: (1 - math.cos(xi * y)) * kap(y) * y ** -2.3, 0, 1,
                              limit=400, epsrel=1e-11)[0]
        far = integrate.quad(lambda y: kap(y) * y ** -2.3, 1, np.inf, limit=400, epsrel=1e-11)[0]
        osc = integrate.quad(lambda y: kap(y) * y ** -2.3, 1, np.inf, weight="cos", wvar=xi,
                             limlst=200)[0]
        ref = 2 * (near + far - osc)
        assert char_exponent(k, np.array([xi])).real == pytest.approx(ref, rel=1e-6)

    def test_small_part_lower_bound(self):
        # Re psi >= int_{|x|<=1} (1 - cos) |x|^{-1-alpha} for kappa >= 1
        alpha = 1.2
        k = LevyKernel(1, alpha, kappa=1.0)
        for xi in (0.5, 3.0, 12.0):
            lower = 2 * integrate.quad(lambda y: (1 - math.cos(xi * y)) * y ** (-1 - alpha),
                                       0, 1, limit=500)[0]
            assert char_exponent(k, np.array([xi])).real >= lower


class TestKineticExponent:
    def test_surrogate_polynomial(self, rng):
        g = GaussianSurrogate(d=2)
        xi, eta, t = rng.standard_normal(2), rng.standard_normal(2), 1.7
        expect = xi @ xi * t ** 3 / 3 + xi @ eta * t ** 2 + eta @ eta * t
        assert g.kinetic_exponent(xi, eta, t) == pytest.approx(expect)
        num = kinetic_exponent(g, xi, eta, t, psi=g.psi)
        assert num.real == pytest.approx(expect, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_homogeneous_without_eta(self, alpha):
        k = LevyKernel(2, alpha)
        xi, t = np.array([0.7, -1.1]), 2.3
        expect = char_exponent(k, xi) * t ** (alpha + 1) / (alpha + 1)
        assert kinetic_exponent(k, xi, np.zeros(2), t) == pytest.approx(expect, rel=1e-10)

    def test_refinement_oracle(self, rng):
        k = LevyKernel(1, 1.3)
        xi = rng.standard_normal((20, 1)) * 5
        eta = rng.standard_normal((20, 1)) * 5
        a = kinetic_exponent(k, xi, eta, 1.5)
        b = kinetic_exponent(k, xi, eta, 1.5, rtol=1e-13, max_nodes=65536)
        np.testing.assert_allclose(a, b, rtol=1e-8)

    def test_time_rescaling(self, rng):
        # lam int_0^t psi(s xi + eta) ds = int_0^{lam t} psi(s xi / lam + eta) ds
        k = LevyKernel(1, 0.9)
        xi, eta, t, lam = rng.standard_normal(1), rng.standard_normal(1), 0.8, 2.5
        a = lam * kinetic_exponent(k, xi, eta, t)
        b = kinetic_exponent(k, xi / lam, eta, lam * t)
        assert a == pytest.approx(b, rel=1e-9)

    def test_real_part_nonnegative(self, rng):
        k = LevyKernel.named("anisotropic-even", 1, 1.5)
        phi = kinetic_exponent(k, rng.standard_normal((30, 1)) * 3, rng.standard_normal((30, 1)), 1.0)
        assert np.all(phi.real >= 0)

    def test_bad_time(self):
        with pytest.raises(DomainError):
            kinetic_exponent(LevyKernel(1, 1.0), [1.0], [0.0], 0.0)


class TestSplit:
    def test_cauchy_rate(self):
        s = split_measure(LevyKernel(1, 1.0))
        assert s.lam == pytest.approx(2.0)

    @pytest.mark.parametrize("d, alpha", [(1, 0.7), (2, 1.4)])
    def test_rate_closed_form(self, d, alpha):
        area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
        assert jump_rate(LevyKernel(d, alpha, kappa=2.0)) == pytest.approx(2 * area / alpha)

    @pytest.mark.parametrize("name, d", [("anisotropic-even", 1), ("anisotropic-even", 2),
                                         ("non-symmetric", 2)])
    def test_rate_between_bounds(self, name, d):
        k = LevyKernel.named(name, d, 1.2)
        c0 = jump_rate(LevyKernel(d, 1.2))
        lam = split_measure(k).lam
        assert k.kappa0 * c0 <= lam <= k.kappa1 * c0

    def test_partition_of_mass(self):
        k = LevyKernel(2, 1.1)
        s = split_measure(k)
        for r1, r2 in [(0.2, 0.9), (0.5, 3.0), (1.0, 8.0)]:
            whole = jump_rate(k, r1) - jump_rate(k, r2)
            assert s.small_mass(r1, r2) + s.large_mass(r1, r2) == pytest.approx(whole, rel=1e-10)

    def test_large_law_tail(self, rng):
        s = split_measure(LevyKernel(1, 1.0))
        y = s.mu.sample(rng, 200_000)[:, 0]
        assert np.all(np.abs(y) > 1)
        # P(|Y| > 4) = 1/4
        assert np.mean(np.abs(y) > 4) == pytest.approx(0.25, abs=5 * math.sqrt(0.25 * 0.75 / 2e5))

    def test_small_covariance(self):
        k = LevyKernel(1, 1.5)
        ref = 2 * integrate.quad(lambda y: y ** (2 - 2.5), 0, 0.1)[0]
        assert small_jump_covariance(k, 0.1)[0, 0] == pytest.approx(ref)
        kg = LevyKernel.named("anisotropic-even", 1, 1.5)
        ref_g = 2 * integrate.quad(lambda y: float(kg.kappa_at(np.array([y]))) * y ** -0.5,
                                   0, 0.1, limit=400)[0]
        assert small_jump_covariance(kg, 0.1)[0, 0] == pytest.approx(ref_g, rel=1e-7)


class TestDecompose:
    def test_zero(self):
        out = decompose_vector(np.zeros(2), 2)
        np.testing.assert_allclose(out, [[-1 / 3, 0], [1 / 3, 0]])

    def test_unit(self):
        u = np.array([0.6, 0.8])
        out = decompose_vector(u, 2)
        np.testing.assert_allclose(out, [u / 2, u / 2])

    def test_domain(self):
        with pytest.raises(DomainError):
            decompose_vector([3.0], 2)
        with pytest.raises(DomainError):
            decompose_vector([0.5], 1)

    @given(st.integers(2, 20), st.integers(1, 3), st.data())
    def test_properties(self, n, d, data):
        raw = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=d, max_size=d)))
        scale = data.draw(st.floats(0, 1))
        nr = np.linalg.norm(raw)
        u = raw / nr * scale * n if nr > 0 else raw
        out = np.array(decompose_vector(u, n))
        norms = np.linalg.norm(out, axis=1)
        assert out.shape == (n, d)
        assert np.all(norms >= 1 / 3 - 1e-15) and np.all(norms <= 1 + 1e-15)
        assert np.max(np.abs(out.sum(axis=0) - u)) <= 1e-12

    def test_batch_bulk(self, rng):
        for n in (2, 5, 20):
            U = rng.standard_normal((20_000, 3))
            U *= (rng.random((20_000, 1)) * n) / np.linalg.norm(U, axis=1, keepdims=True)
            out = decompose_vectors(U, n)
            norms = np.linalg.norm(out, axis=2)
            assert norms.min() >= 1 / 3 - 1e-15 and norms.max() <= 1 + 1e-15
            assert np.max(np.abs(out.sum(axis=1) - U)) <= 1e-12
