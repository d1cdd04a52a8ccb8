import math

import numpy as np
import pytest

from ssprk import (ButcherTableau, ImexSspQuery, butcher_to_canonical_shu_osher,
                   imex_is_feasible, imex_ssp_radius, is_absolutely_monotonic,
                   load_bundled, shu_osher_ssp_coefficient,
                   shu_osher_to_butcher, ssp_radius)
from ssprk.ssp import stacked_matrix

from conftest import random_dirk


class TestAbsoluteMonotonicity:
    def test_forward_euler_boundary(self, forward_euler):
        assert is_absolutely_monotonic(forward_euler, 1.0).feasible
        assert not is_absolutely_monotonic(forward_euler, 1.0 + 1e-6).feasible

    def test_implicit_midpoint_boundary(self, implicit_midpoint):
        assert is_absolutely_monotonic(implicit_midpoint, 2.0).feasible
        assert not is_absolutely_monotonic(implicit_midpoint, 2.001).feasible

    def test_ssprk33_at_one(self, ssprk33):
        assert is_absolutely_monotonic(ssprk33, 1.0).feasible

    def test_singular_reported(self):
        t = ButcherTableau([[-1.0]], [1.0])
        cert = is_absolutely_monotonic(t, 1.0)
        assert not cert.feasible
        assert cert.reason == "singular"

    def test_certificate_witness_shapes(self, ssprk33):
        cert = is_absolutely_monotonic(ssprk33, 0.5)
        assert cert.witness["P"].shape == (4, 4)
        assert cert.feasible
        text = cert.to_json()
        assert '"feasible": true' in text

    def test_stacked_matrix_layout(self, ssprk33):
        S = stacked_matrix(ssprk33)
        assert S.shape == (4, 4)
        assert np.array_equal(S[:3, :3], ssprk33.A)
        assert np.array_equal(S[3, :3], ssprk33.b)
        assert np.array_equal(S[:, 3], np.zeros(4))


class TestSspRadius:
    def test_closed_forms(self, forward_euler, implicit_midpoint, ssprk33):
        assert ssp_radius(forward_euler) == pytest.approx(1.0, abs=1e-10)
        assert ssp_radius(implicit_midpoint) == pytest.approx(2.0, abs=1e-9)
        assert ssp_radius(ssprk33) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("name,expected", [
        ("dirk-s6-p4-plin6", 5.138),
        ("dirk-s8-p4-plin9", 4.735),
        ("dirk-s10-p2-plin11", 5.2306),
    ])
    def test_appendix_methods(self, name, expected):
        t = shu_osher_to_butcher(load_bundled(name))
        assert ssp_radius(t) == pytest.approx(expected, abs=1e-2)

    def test_infeasible_method_is_zero(self):
        t = ButcherTableau([[0.0, 0.0], [1.0, 0.0]], [1.5, -0.5])
        assert ssp_radius(t) == 0.0

    def test_explicit_radius_bounded_by_stage_count(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            s = int(rng.integers(1, 7))
            A = np.tril(rng.uniform(0.0, 2.0 / s, size=(s, s)), k=-1)
            b = rng.uniform(0.0, 2.0 / s, size=s)
            b = b / b.sum()
            r = ssp_radius(ButcherTableau(A, b))
            assert r <= s + 1e-9

    def test_radius_dominates_any_admissible_form(self, dirk646):
        # any admissible rewriting certifies at most the true radius
        from ssprk.tableau import admissibility_violations
        t = shu_osher_to_butcher(dirk646)
        radius = ssp_radius(t)
        for r in (1.0, 3.0, 5.0):
            so = butcher_to_canonical_shu_osher(t, r)
            if not admissibility_violations(so):
                assert shu_osher_ssp_coefficient(so) <= radius + 1e-9


class TestImexFeasibility:
    def test_r_zero_always_feasible(self):
        pair = load_bundled("imex-s10-p4-plin6")
        cert = imex_is_feasible(ImexSspQuery(pair, 0.01), 0.0)
        assert cert.feasible
        assert np.allclose(cert.witness["Re"], np.ones(11))
        assert np.allclose(cert.witness["P"], 0.0)

    def test_k_inf_reduces_to_explicit_part(self):
        pair = load_bundled("imex-ssprk104-sdirk")
        q = ImexSspQuery(pair, math.inf)
        assert imex_is_feasible(q, 6.0).feasible
        assert not imex_is_feasible(q, 6.01).feasible
        assert imex_ssp_radius(q) == pytest.approx(
            ssp_radius(pair.explicit_part), abs=1e-8)

    def test_k_inf_grid_pair_matches_table(self):
        # a pair whose explicit member is the classic three-stage method
        from ssprk import construct_shu_osher_pair_family
        pair = construct_shu_osher_pair_family(2.0 / 3.0)
        q = ImexSspQuery(pair, math.inf)
        assert imex_is_feasible(q, 1.0).feasible
        assert not imex_is_feasible(q, 1.001).feasible

    def test_bundled_small_k_pair_bracket(self):
        pair = load_bundled("imex-k10-s5-p3-plin5")
        q = ImexSspQuery(pair, pair.k_designed)
        assert imex_is_feasible(q, 0.152).feasible
        assert not imex_is_feasible(q, 0.160).feasible

    def test_negative_coefficients_infeasible_at_finite_k(self):
        pair = load_bundled("imex-s10-p4-plin6")
        assert imex_ssp_radius(ImexSspQuery(pair, 0.01)) == 0.0
        assert imex_ssp_radius(ImexSspQuery(pair, 100.0)) == 0.0

    def test_k_must_be_positive(self):
        pair = load_bundled("imex-k10-s5-p3-plin5")
        with pytest.raises(ValueError):
            ImexSspQuery(pair, 0.0)


class TestImexRadius:
    @pytest.mark.parametrize("name,k,expected,tol", [
        ("imex-k10-s5-p3-plin5", 0.1, 0.1520, 1e-3),
        ("imex-k100-s5-p3-plin5", 0.01, 1.58e-2, 1e-4),
    ])
    def test_bundled_values(self, name, k, expected, tol):
        pair = load_bundled(name)
        assert imex_ssp_radius(ImexSspQuery(pair, k)) == pytest.approx(
            expected, abs=tol)

    def test_nonincreasing_in_inverse_k(self):
        pair = load_bundled("imex-k100-s5-p3-plin5")
        ks = [math.inf, 10.0, 1.0, 0.1, 0.01]
        radii = [imex_ssp_radius(ImexSspQuery(pair, k)) for k in ks]
        assert all(r1 >= r2 - 1e-12 for r1, r2 in zip(radii, radii[1:]))


class TestMonotonicityGuard:
    def test_random_methods_bisect_cleanly(self):
        rng = np.random.default_rng(123)
        for _ in range(10):
            s = int(rng.integers(1, 5))
            A = np.tril(rng.uniform(0.0, 0.5, size=(s, s)))
            b = rng.uniform(0.0, 1.0, size=s)
            b = b / b.sum()
            # must not raise the monotonicity diagnostic
            ssp_radius(ButcherTableau(A, b))
