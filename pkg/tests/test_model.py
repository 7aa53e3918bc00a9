import math

import mpmath
import numpy as np
import pytest

from coulombcert.errors import DomainError, SymmetryError
from coulombcert.intervals import Interval, IntervalArray
from coulombcert.model import (
    Configuration,
    ReducedSpace,
    critical_mu,
    critical_mu_interval,
    cyclic_rotation_operator,
    cyclic_symmetry_defect,
    dgrad_dmu,
    grad_V,
    grad_V_interval,
    hess_V,
    hess_V_interval,
    linearization,
    linearization_interval,
    min_pair_distance,
    normal_mode_expansion,
    orbit_direction,
    polygon,
    polygon_interval,
    vertical_mode,
)

mpmath.mp.dps = 50


def critical_mu_hp(n, k):
    """Extended-precision oracle for the critical charge values."""
    pi = mpmath.pi
    return mpmath.fsum(
        mpmath.sin(k * j * pi / n) ** 2 / mpmath.sin(j * pi / n) ** 3
        for j in range(1, n)
    ) / 4


class TestCriticalValues:
    def test_k_zero_is_zero(self):
        for n in (3, 5, 8):
            enc = critical_mu_interval(n, 0)
            assert enc.contains(0.0)
            assert enc.hi < 1e-27

    def test_n2_k1_is_quarter(self):
        enc = critical_mu_interval(2, 1)
        assert enc.contains(0.25)
        assert enc.width() < 1e-14

    def test_n4_k2_is_sqrt2(self):
        enc = critical_mu_interval(4, 2)
        sqrt2 = mpmath.sqrt(2)
        assert mpmath.mpf(enc.lo) <= sqrt2 <= mpmath.mpf(enc.hi)
        assert enc.width() < 1e-13

    @pytest.mark.parametrize("n", [3, 5, 8, 12, 47])
    def test_against_extended_precision(self, n):
        for k in range(n):
            enc = critical_mu_interval(n, k)
            hp = critical_mu_hp(n, k)
            assert mpmath.mpf(enc.lo) <= hp <= mpmath.mpf(enc.hi)
            assert enc.width() <= 1e-12 * max(1.0, enc.mag())

    def test_symmetry_under_k_reflection(self):
        for n in range(3, 14):
            for k in range(1, n):
                a = critical_mu_interval(n, k)
                b = critical_mu_interval(n, n - k)
                assert a.intersects(b)

    def test_float_mode(self):
        assert critical_mu(8, 4, mode="float") == pytest.approx(
            float(critical_mu_hp(8, 4)), rel=1e-12
        )


class TestPolygon:
    def test_square_positions(self):
        p = polygon(4)
        expected = np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], dtype=float)
        assert np.abs(p - expected).max() < 1e-15

    def test_unit_radius(self):
        for n in (3, 7, 12):
            p = polygon(n)
            assert np.abs(np.linalg.norm(p, axis=1) - 1.0).max() < 1e-15

    def test_interval_polygon_contains_exact(self):
        for n in (3, 5, 8):
            enc = polygon_interval(n)
            for j in range(n):
                c = mpmath.cos(2 * mpmath.pi * j / n)
                s = mpmath.sin(2 * mpmath.pi * j / n)
                assert mpmath.mpf(enc.lo[j, 0]) <= c <= mpmath.mpf(enc.hi[j, 0])
                assert mpmath.mpf(enc.lo[j, 1]) <= s <= mpmath.mpf(enc.hi[j, 1])

    def test_ring_symmetry_fixes_polygon(self):
        for n in (5, 8):
            u = polygon(n).reshape(-1)
            op = cyclic_rotation_operator(n, 1)
            assert np.abs(op @ u - u).max() < 1e-14


class TestGradient:
    @pytest.mark.parametrize("n", range(3, 13))
    def test_polygon_is_critical_interval(self, n):
        enc = polygon_interval(n).reshape(-1)
        for mu in (0.5, 1.0, float(n), 2.5 * n):
            g = grad_V_interval(enc, mu, n)
            assert g.contains(np.zeros(3 * n))

    def test_finite_difference_oracle(self):
        n = 3
        u = polygon(n).reshape(-1).copy()
        u[0] = 2.0  # push one charge out along x
        mu = 2.0

        def V(uu):
            pos = uu.reshape(n, 3)
            c1 = critical_mu(n, 1, mode="float")
            om = mu - c1
            val = 0.5 * om * np.sum(pos[:, 0] ** 2 + pos[:, 1] ** 2)
            val += np.sum(mu / np.linalg.norm(pos, axis=1))
            for i in range(n):
                for j in range(i + 1, n):
                    val -= 1.0 / np.linalg.norm(pos[j] - pos[i])
            return val

        g = grad_V(u, mu, n)
        assert np.abs(g).max() > 1e-3
        h = 1e-6
        for idx in range(3 * n):
            e = np.zeros(3 * n)
            e[idx] = h
            fd = (V(u + e) - V(u - e)) / (2 * h)
            assert abs(fd - g[idx]) < 1e-7 * max(1.0, abs(g[idx]))

    def test_equivariance_under_ring_shift(self):
        rng = np.random.default_rng(1)
        n = 6
        u = polygon(n).reshape(-1) + 0.05 * rng.normal(size=3 * n)
        op = cyclic_rotation_operator(n, 1)
        lhs = grad_V(op @ u, 3.0, n)
        rhs = op @ grad_V(u, 3.0, n)
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_collision_raises(self):
        n = 3
        u = polygon(n).reshape(-1)
        u[3:6] = u[0:3]
        with pytest.raises(DomainError):
            grad_V(u, 2.0, n)
        box = IntervalArray.box(polygon(n).reshape(-1), 1.5)
        with pytest.raises(DomainError):
            grad_V_interval(box, 2.0, n)


class TestHessian:
    @pytest.mark.parametrize("n", range(3, 13))
    def test_vertical_mode_eigenvectors(self, n):
        mu = 1.5 * n
        h = hess_V(polygon(n).reshape(-1), mu, n)
        for k in range(n):
            v = vertical_mode(n, k)
            lam = -mu + critical_mu(n, k, mode="float")
            assert np.abs(h @ v - lam * v).max() <= 1e-10

    @pytest.mark.parametrize("n", range(3, 13))
    def test_orbit_generator_in_kernel(self, n):
        u = polygon(n).reshape(-1)
        h = hess_V(u, 2.0 * n, n)
        w = -orbit_direction(u)
        assert np.abs(h @ w).max() <= 1e-10

    def test_symmetric(self):
        rng = np.random.default_rng(3)
        n = 5
        u = polygon(n).reshape(-1) + 0.1 * rng.normal(size=3 * n)
        h = hess_V(u, 4.0, n)
        assert np.abs(h - h.T).max() < 1e-12

    def test_directional_second_difference(self):
        # Richardson-style consistency between grad_V and hess_V
        rng = np.random.default_rng(5)
        n = 4
        mu = 3.0
        for _ in range(5):
            u = polygon(n).reshape(-1) + 0.05 * rng.normal(size=3 * n)
            d = rng.normal(size=3 * n)
            d /= np.linalg.norm(d)
            h = hess_V(u, mu, n)
            step = 1e-4
            fd = (grad_V(u + step * d, mu, n) - grad_V(u - step * d, mu, n)) / (2 * step)
            assert np.abs(fd - h @ d).max() < 1e-6 * max(1.0, np.abs(h @ d).max())

    def test_interval_hessian_contains_point(self):
        n = 5
        u = polygon(n).reshape(-1)
        mu = 4.0
        hp = hess_V(u, mu, n)
        hi = hess_V_interval(IntervalArray.box(u, 1e-9), mu, n)
        mid_err = np.abs(hi.mid() - hp).max()
        assert mid_err < 1e-6
        assert (hi.lo <= hp + 1e-12).all() and (hp - 1e-12 <= hi.hi).all()


class TestReducedSpace:
    def test_dimensions(self):
        assert ReducedSpace(5, 1).dim == 8
        assert ReducedSpace(8, 1).dim == 13
        assert ReducedSpace(5, 2).dim == 7
        assert ReducedSpace(8, 2).dim == 11

    @pytest.mark.parametrize("n", [5, 8])
    @pytest.mark.parametrize("family", [1, 2])
    def test_lift_project_roundtrip_polygon(self, n, family):
        sp = ReducedSpace(n, family)
        u = polygon(n).reshape(-1)
        x = sp.project(u)
        assert np.abs(sp.lift(x) - u).max() < 1e-15

    @pytest.mark.parametrize("n", [5, 6, 8, 9])
    @pytest.mark.parametrize("family", [1, 2])
    def test_reduction_consistency(self, n, family):
        # explicit sums agree with project(grad(lift)) on random symmetric points
        sp = ReducedSpace(n, family)
        rng = np.random.default_rng(n * 10 + family)
        base = sp.project(polygon(n).reshape(-1))
        for _ in range(25):
            x = base + 0.1 * rng.normal(size=sp.dim)
            mu = float(rng.uniform(1.0, 3.0 * n))
            a = sp.reduced_map(x, mu)
            b = sp.reduced_map_direct(x, mu)
            assert np.abs(a - b).max() < 1e-12 * max(1.0, np.abs(a).max())

    def test_reduced_map_zero_at_polygon(self):
        for family in (1, 2):
            sp = ReducedSpace(8, family)
            x_box = sp.project(polygon(8).reshape(-1))
            enc = sp.reduced_map_interval(
                IntervalArray(polygon_interval(8).reshape(-1).lo[sp.select],
                              polygon_interval(8).reshape(-1).hi[sp.select]),
                5.0,
            )
            assert enc.contains(np.zeros(sp.dim))
            assert x_box.shape == (sp.dim,)

    def test_project_rejects_asymmetric(self):
        sp = ReducedSpace(6, 2)
        u = polygon(6).reshape(-1).copy()
        u[2] = 0.3  # z-component on the axis charge breaks family 2
        with pytest.raises(SymmetryError):
            sp.project(u)

    def test_family2_kernel_direction(self):
        sp = ReducedSpace(8, 2)
        d = sp.kernel_direction(3)
        assert abs(np.linalg.norm(d) - 1.0) < 1e-12
        with pytest.raises(SymmetryError):
            sp.kernel_direction(4)  # identically-zero vertical mode

    def test_reduced_jacobian_matches_fd(self):
        sp = ReducedSpace(7, 1)
        rng = np.random.default_rng(2)
        x = sp.project(polygon(7).reshape(-1)) + 0.05 * rng.normal(size=sp.dim)
        mu = 5.0
        j = sp.reduced_jacobian(x, mu)
        step = 1e-6
        for c in range(sp.dim):
            e = np.zeros(sp.dim)
            e[c] = step
            fd = (sp.reduced_map(x + e, mu) - sp.reduced_map(x - e, mu)) / (2 * step)
            assert np.abs(fd - j[:, c]).max() < 1e-5 * max(1.0, np.abs(j[:, c]).max())
        dmu = sp.reduced_dmu(x)
        fd = (sp.reduced_map(x, mu + step) - sp.reduced_map(x, mu - step)) / (2 * step)
        assert np.abs(fd - dmu).max() < 1e-6 * max(1.0, np.abs(dmu).max())


class TestLinearization:
    def test_block_structure(self):
        n = 4
        u = polygon(n).reshape(-1)
        m = linearization(u, 5.0, n)
        assert np.abs(m[: 3 * n, : 3 * n]).max() == 0.0
        assert np.abs(m[: 3 * n, 3 * n :] - np.eye(3 * n)).max() == 0.0

    def test_kernel_vector(self):
        n = 5
        u = polygon(n).reshape(-1)
        m = linearization(u, 6.0, n)
        w = np.concatenate([orbit_direction(u), np.zeros(3 * n)])
        assert np.abs(m @ w).max() < 1e-10

    def test_spectrum_closed_under_negation_conjugation(self):
        n = 4
        u = polygon(n).reshape(-1)
        m = linearization(u, 6.0, n)
        ev = np.linalg.eigvals(m)
        for lam in ev:
            assert np.abs(ev - (-lam)).min() < 1e-8
            assert np.abs(ev - np.conj(lam)).min() < 1e-8

    def test_trace_zero(self):
        n = 4
        m = linearization(polygon(n).reshape(-1), 6.0, n)
        ev = np.linalg.eigvals(m)
        assert abs(np.trace(m)) < 1e-12
        assert abs(ev.sum()) < 1e-8

    def test_mu_below_first_critical_raises(self):
        n = 4
        with pytest.raises(DomainError):
            linearization(polygon(n).reshape(-1), 0.1, n)
        with pytest.raises(DomainError):
            linearization_interval(
                IntervalArray.box(polygon(n).reshape(-1), 1e-10), 0.1, n
            )

    def test_interval_linearization_contains_point(self):
        n = 3
        u = polygon(n).reshape(-1)
        mp_ = linearization(u, 4.0, n)
        enc = linearization_interval(IntervalArray.box(u, 1e-10), 4.0, n)
        assert (enc.lo <= mp_ + 1e-12).all() and (mp_ - 1e-12 <= enc.hi).all()


class TestNormalModes:
    def test_eps_zero_constant(self):
        n = 4
        u0 = polygon(n).reshape(-1)
        v = np.ones(3 * n) + 1j * np.ones(3 * n)
        traj = normal_mode_expansion(u0, 1.7, v, 0.0, 16)
        assert np.abs(traj - u0.reshape(1, n, 3)).max() == 0.0

    def test_t0_sample(self):
        n = 3
        u0 = polygon(n).reshape(-1)
        rng = np.random.default_rng(0)
        v = rng.normal(size=3 * n) + 1j * rng.normal(size=3 * n)
        eps = 0.1
        traj = normal_mode_expansion(u0, 2.0, v, eps, 8)
        expected = (u0 + eps * np.real(v)).reshape(n, 3)
        assert np.abs(traj[0] - expected).max() < 1e-15

    def test_periodicity(self):
        n = 3
        u0 = polygon(n).reshape(-1)
        rng = np.random.default_rng(1)
        v = rng.normal(size=3 * n) + 1j * rng.normal(size=3 * n)
        traj = normal_mode_expansion(u0, 1.234, v, 0.3, 33)
        assert np.abs(traj[0] - traj[-1]).max() < 1e-12


class TestSymmetryHelpers:
    def test_defect_at_polygon(self):
        u = polygon(8).reshape(-1)
        assert cyclic_symmetry_defect(u, 8, 4) < 1e-14

    def test_min_pair_distance(self):
        p = polygon(4)
        assert min_pair_distance(p) == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_configuration_accessors(self):
        c = Configuration(u=polygon(5).reshape(-1), mu=2.0)
        assert c.n == 5
        assert c.positions.shape == (5, 3)

    def test_dgrad_dmu_at_polygon_vanishes(self):
        u = polygon(6).reshape(-1)
        assert np.abs(dgrad_dmu(u, 6)).max() < 1e-14
