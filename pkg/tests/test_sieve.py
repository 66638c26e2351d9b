import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squeezesieve import (
    GridSpec,
    LindbladParams,
    PhysicalConstants,
    ShapeDecomposition,
    SievePoint,
    compose,
    cross_check,
    evolve_many,
    objective_surface,
    optimal_shape_from_kernels,
    optimal_shape_numeric,
    optimal_squeezing_closed_form,
    sieve_kernels,
    sieve_objective,
    sieve_time_independence_check,
    stationary_covariance,
)
from squeezesieve.lindblad_model import stationary_scaled

import randomized

REFERENCE = LindbladParams(lam=0.5, d_qq=1.0, d_pp=0.25, d_pq=0.0)


def unstabilized_aleph(lp):
    """Upper-sign branch of the closed form, typed straight from the formula."""
    mw = lp.pc.m_omega
    x = math.sqrt((mw * lp.d_qq - lp.d_pp / mw) ** 2 + 4 * lp.d_pq**2)
    g = math.sqrt(1 + lp.pc.omega**2 / lp.lam**2) * (mw * lp.d_qq + lp.d_pp / mw)
    return ((-x + g) / (x + g)) ** 0.25


def grid_min(point, n_theta=360, n_aleph=200, lo=1e-2, hi=1e2):
    thetas = np.pi * np.arange(n_theta) / n_theta
    alephs = np.geomspace(lo, hi, n_aleph)
    surface = objective_surface(thetas[:, None], alephs[None, :], 1.0, point)
    i, j = np.unravel_index(np.argmin(surface), surface.shape)
    return surface[i, j], thetas[i], alephs[j]


def angle_gap(a, b, period=math.pi):
    d = abs(a - b) % period
    return min(d, period - d)


points = st.builds(
    lambda a, b, r, h: SievePoint(t_pp=a, t_qq=b, t_pq=r * math.sqrt(a * b), hbar=h),
    st.floats(0.05, 20.0), st.floats(0.05, 20.0), st.floats(-0.95, 0.95), st.floats(0.1, 3.0),
)


class TestKernels:
    def test_zero_time(self):
        lp = LindbladParams(lam=0.4, d_qq=2.0, d_pp=0.5, d_pq=0.3,
                            pc=PhysicalConstants(m=1.5, omega=0.8))
        s = stationary_covariance(lp)
        mw = lp.pc.m_omega
        p = sieve_kernels(0.0, lp)
        assert p.t_pp == pytest.approx(s.sigma_pp / mw, rel=1e-14)
        assert p.t_qq == pytest.approx(mw * s.sigma_qq, rel=1e-14)
        assert p.t_pq == pytest.approx(s.sigma_pq, rel=1e-14)

    def test_isotropic(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            lp = randomized.isotropic_params(rng)
            for t in rng.uniform(0, 10, size=5):
                p = sieve_kernels(t, lp)
                assert p.t_pp == pytest.approx(p.t_qq, rel=1e-13)
                assert abs(p.t_pq) <= 1e-13 * p.t_pp

    def test_rotation_invariants(self):
        rng = np.random.default_rng(32)
        for _ in range(300):
            lp = randomized.params(rng)
            t1, t2 = rng.uniform(0, 50, size=2) / lp.pc.omega
            p1, p2 = sieve_kernels(t1, lp), sieve_kernels(t2, lp)
            m = stationary_scaled(lp)
            assert p1.trace == pytest.approx(m[0, 0] + m[1, 1], rel=1e-12)
            assert p1.trace == pytest.approx(p2.trace, rel=1e-12)
            assert p1.anisotropy**2 == pytest.approx(p2.anisotropy**2, rel=1e-12, abs=1e-12 * p1.trace**2)


class TestObjective:
    def test_unsqueezed_is_theta_independent(self):
        p = SievePoint(2.0, 0.5, 0.3, hbar=0.8)
        for theta in np.linspace(0, math.pi, 7):
            got = sieve_objective(ShapeDecomposition(1.7, theta, 1.0), p)
            assert got == pytest.approx(0.8 * 1.7 / 2 * 2.5, rel=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(point=points, theta=st.floats(-4, 4), aleph=st.floats(0.1, 10), area=st.floats(1, 20))
    def test_linear_in_area(self, point, theta, aleph, area):
        one = sieve_objective(ShapeDecomposition(1.0, theta, aleph), point)
        assert sieve_objective(ShapeDecomposition(area, theta, aleph), point) == pytest.approx(
            area * one, rel=1e-13)

    @settings(max_examples=200, deadline=None)
    @given(point=points, theta=st.floats(-4, 4), aleph=st.floats(0.1, 10), n=st.integers(-2, 2))
    def test_gauge_invariant(self, point, theta, aleph, n):
        base = sieve_objective(ShapeDecomposition(1.0, theta, aleph), point)
        flipped = sieve_objective(ShapeDecomposition(1.0, theta + math.pi / 2, 1 / aleph), point)
        shifted = sieve_objective(ShapeDecomposition(1.0, theta + n * math.pi, aleph), point)
        assert flipped == pytest.approx(base, rel=1e-12)
        assert shifted == pytest.approx(base, rel=1e-12)

    def test_equals_cross_term_of_expansion(self):
        # initial-state part of the decay-weighted term, assembled from the matrix directly
        rng = np.random.default_rng(33)
        for _ in range(100):
            lp = randomized.params(rng)
            shape = randomized.shape(rng)
            t = rng.uniform(0, 5)
            p = sieve_kernels(t, lp)
            m0 = compose(shape, lp.pc).scaled(lp.pc)
            want = m0[0, 0] * p.t_pp + m0[1, 1] * p.t_qq - 2 * m0[0, 1] * p.t_pq
            assert sieve_objective(shape, p) == pytest.approx(want, rel=1e-12)


class TestClosedFormFromKernels:
    def test_isotropic_point_is_degenerate(self):
        r = optimal_shape_from_kernels(SievePoint(1.3, 1.3, 0.0))
        assert (r.aleph_star, r.theta_star, r.degenerate) == (1.0, 0.0, True)

    def test_diagonal_point(self):
        # minimize a^2 T_pp + a^-2 T_qq at theta = 0 by calculus: a^4 = T_qq/T_pp
        p = SievePoint(t_pp=3.0, t_qq=0.75, t_pq=0.0)
        r = optimal_shape_from_kernels(p)
        assert r.aleph_star**4 == pytest.approx(0.25, rel=1e-14)
        assert r.theta_star == 0.0
        assert r.aleph_canonical == pytest.approx(0.25**-0.25, rel=1e-14)
        assert r.theta_canonical == pytest.approx(math.pi / 2)
        value, theta, aleph = grid_min(p, n_theta=360, n_aleph=2001)
        assert abs(aleph - r.aleph_star) < 0.01 or abs(1 / aleph - r.aleph_star) < 0.01
        assert r.objective_value <= value + 1e-12

    def test_tan_two_theta(self):
        p = SievePoint(t_pp=1.0, t_qq=2.0, t_pq=0.4)
        r = optimal_shape_from_kernels(p)
        assert math.tan(2 * r.theta_star) == pytest.approx(2 * 0.4 / (1.0 - 2.0), rel=1e-12)

    def test_beats_dense_grid(self):
        rng = np.random.default_rng(34)
        for _ in range(200):
            p = randomized.sieve_point(rng)
            r = optimal_shape_from_kernels(p)
            value, _, _ = grid_min(p)
            assert r.objective_value <= value + 1e-9 * abs(value)

    def test_minimum_value(self):
        # at the optimum the bracket equals 2 sqrt(T_pp T_qq - T_pq^2)
        p = SievePoint(t_pp=2.0, t_qq=0.7, t_pq=-0.5, hbar=1.0)
        r = optimal_shape_from_kernels(p)
        assert r.objective_value == pytest.approx(math.sqrt(2.0 * 0.7 - 0.25), rel=1e-13)


class TestClosedFormFromParameters:
    def test_reference_value(self):
        got = optimal_squeezing_closed_form(REFERENCE)
        assert got == pytest.approx(unstabilized_aleph(REFERENCE), rel=1e-14)
        assert round(got, 4) == 0.8715
        num = optimal_shape_numeric(sieve_kernels(20.0, REFERENCE))
        assert num.aleph_star == pytest.approx(got, abs=1e-6)

    def test_isotropic_exact(self):
        lp = LindbladParams(lam=3.0, d_qq=2.0, d_pp=2.0)
        assert optimal_squeezing_closed_form(lp) == 1.0

    def test_weak_friction_limit(self):
        alephs = [optimal_squeezing_closed_form(REFERENCE.__class__(
            lam=lam, d_qq=1.0, d_pp=0.25)) for lam in (1e-1, 1e-2, 1e-3, 1e-4)]
        gaps = [1 - a for a in alephs]
        assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-4

    def test_within_unit_interval(self):
        rng = np.random.default_rng(35)
        for _ in range(500):
            a = optimal_squeezing_closed_form(randomized.params(rng))
            assert 0 < a <= 1

    def test_matches_unstabilized_form(self):
        rng = np.random.default_rng(36)
        for _ in range(500):
            lp = randomized.params(rng, friction_ratio=(-2, 1))
            assert optimal_squeezing_closed_form(lp) == pytest.approx(unstabilized_aleph(lp), rel=1e-10)


class TestNumeric:
    def test_isotropic(self):
        r = optimal_shape_numeric(SievePoint(0.9, 0.9, 0.0))
        assert abs(r.aleph_star - 1) <= 1e-6
        assert r.degenerate and r.theta_star == 0.0

    def test_agrees_with_closed_form(self):
        rng = np.random.default_rng(37)
        for _ in range(200):
            r = cross_check(randomized.sieve_point(rng))
            assert r.cross_residual <= 1e-6

    def test_theta_agrees(self):
        rng = np.random.default_rng(38)
        for _ in range(100):
            p = randomized.sieve_point(rng)
            if p.anisotropy < 1e-3 * p.trace:
                continue
            assert angle_gap(optimal_shape_numeric(p).theta_star,
                             optimal_shape_from_kernels(p).theta_star) < 1e-5

    def test_surface_pi_periodic(self):
        p = SievePoint(2.0, 0.5, 0.4)
        thetas = np.linspace(0, math.pi, 50)
        alephs = np.geomspace(0.1, 10, 40)
        a = objective_surface(thetas[:, None], alephs[None, :], 1.0, p)
        b = objective_surface(thetas[:, None] + math.pi, alephs[None, :], 1.0, p)
        np.testing.assert_allclose(a, b, rtol=1e-13)

    def test_unrefined_grid_is_coarse_but_close(self):
        p = SievePoint(2.0, 0.5, 0.4)
        coarse = optimal_shape_numeric(p, GridSpec(n_theta=64, n_aleph=64, refine=False))
        exact = optimal_shape_from_kernels(p)
        assert abs(coarse.aleph_star - exact.aleph_star) < 0.1

    def test_grid_spec_validation(self):
        with pytest.raises(ValueError):
            GridSpec(n_theta=10)
        with pytest.raises(ValueError):
            GridSpec(aleph_min=2.0)


class TestTimeIndependence:
    def test_spread(self):
        rng = np.random.default_rng(39)
        for _ in range(100):
            lp = randomized.params(rng)
            w = lp.pc.omega
            report = sieve_time_independence_check(lp, [0, 0.1 / w, 1 / w, 10 / w])
            assert report.ok, report.spread

    def test_theta_period(self):
        rng = np.random.default_rng(40)
        for _ in range(100):
            lp = randomized.params(rng, friction_ratio=(-2, 1))
            w = lp.pc.omega
            t = rng.uniform(0, 10) / w
            r = sieve_time_independence_check(lp, [t, t + math.pi / w])
            assert angle_gap(*r.theta_stars) < 1e-9

    def test_isotropic(self):
        lp = randomized.isotropic_params(np.random.default_rng(41))
        r = sieve_time_independence_check(lp, [0, 1, 10])
        assert all(abs(a - 1) < 1e-15 for a in r.aleph_stars)

    def test_empty(self):
        with pytest.raises(ValueError):
            sieve_time_independence_check(REFERENCE, [])


class TestSieveProperties:
    def test_consistency_chain(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            lp = randomized.params(rng)
            via_kernels = optimal_shape_from_kernels(sieve_kernels(rng.uniform(0, 5), lp))
            assert via_kernels.aleph_star == pytest.approx(optimal_squeezing_closed_form(lp), rel=1e-12)

    def test_area_independence(self):
        rng = np.random.default_rng(43)
        thetas = np.pi * np.arange(90) / 90
        alephs = np.geomspace(0.05, 0.99, 61)  # one gauge branch, so no exact ties
        for _ in range(50):
            p = randomized.sieve_point(rng)
            picks = {np.argmin(objective_surface(thetas[:, None], alephs[None, :], area, p))
                     for area in (1.0, 2.0, 10.0)}
            assert len(picks) == 1

    def test_long_time_dominance(self):
        rng = np.random.default_rng(44)
        thetas = np.pi * np.arange(36) / 36
        alephs = np.geomspace(0.3, 0.98, 21)
        for _ in range(10):
            lp = randomized.params(rng, friction_ratio=(-1, 1))
            t = 10.0 / lp.lam
            p = sieve_kernels(t, lp)
            m_inf = stationary_scaled(lp)
            full, kern = np.empty((36, 21)), np.empty((36, 21))
            for i, th in enumerate(thetas):
                for j, al in enumerate(alephs):
                    s0 = compose(ShapeDecomposition(1.0, th, al), lp.pc)
                    full[i, j] = np.linalg.det(evolve_many(s0, [t], lp)[0])
                    kern[i, j] = sieve_objective(ShapeDecomposition(1.0, th, al), p)
                    diff = s0.scaled(lp.pc) - m_inf
                    dropped = math.exp(-4 * lp.lam * t) * abs(np.linalg.det(diff))
                    assert dropped <= math.exp(-20) * abs(np.linalg.det(diff)) + 1e-300
            i_full = np.unravel_index(np.argmin(full), full.shape)
            i_kern = np.unravel_index(np.argmin(kern), kern.shape)
            assert i_full == i_kern
