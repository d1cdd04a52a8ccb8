import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from ssprk import (construct_shu_osher_pair_family, evaluate,
                   imaginary_axis_extent, imex_linear_conditions,
                   imex_nonlinear_conditions, is_a_stable_sampled,
                   load_bundled, real_axis_crossing, region_boundary,
                   stability_function)
from ssprk.stability import (StabilityGrid, StabilityQuery, boundary_csv,
                             read_boundary_csv)


class TestStabilityFunction:
    def test_forward_euler(self, forward_euler):
        for z in (0.3 + 0.1j, -2.0, 1j):
            assert stability_function(forward_euler, z) == pytest.approx(
                1 + z)

    def test_implicit_midpoint_unit_modulus_on_axis(self, implicit_midpoint):
        for y in (0.1, 1.0, 17.3):
            val = stability_function(implicit_midpoint, 1j * y)
            expected = (1 + 0.5j * y) / (1 - 0.5j * y)
            assert val == pytest.approx(expected, abs=1e-14)
            assert abs(val) == pytest.approx(1.0, abs=1e-14)

    def test_ssprk33_cubic(self, ssprk33):
        for z in (-0.3, 0.2 + 0.7j, -1.5j):
            expected = 1 + z + z ** 2 / 2 + z ** 3 / 6
            assert stability_function(ssprk33, z) == pytest.approx(expected)

    def test_consistency_at_origin(self, dirk646_butcher):
        assert stability_function(dirk646_butcher, 0.0) == 1.0 + 0.0j

    def test_pole_reported_as_infinite(self, implicit_midpoint):
        val = stability_function(implicit_midpoint, 2.0)
        assert not np.isfinite(val.real) or abs(val) > 1e12

    def test_linear_order_taylor_match(self):
        # R(z) agrees with exp(z) through the attained linear order
        t = load_bundled("dirk-s6-p4-plin6")
        from ssprk import shu_osher_to_butcher
        tab = shu_osher_to_butcher(t)
        # probe sizes large enough that the O(z^7) defect clears roundoff
        zs = 0.5 * 2.0 ** -np.arange(6)
        q = 6
        trunc = lambda z: sum(z ** k / math.factorial(k)
                              for k in range(q + 1))
        errs = np.array([abs(stability_function(tab, z) - trunc(z))
                         for z in zs])
        keep = errs > 100 * np.finfo(float).eps  # roundoff floor
        slope = np.polyfit(np.log(zs[keep]), np.log(errs[keep]), 1)[0]
        assert slope >= q + 0.7


class TestRealAxisCrossing:
    def test_forward_euler(self, forward_euler):
        assert real_axis_crossing(forward_euler, tol=1e-9) == pytest.approx(
            -2.0, abs=1e-8)

    def test_ssprk33(self, ssprk33):
        # dense-sampling oracle for the |R(x)| = 1 root
        xs = np.linspace(-3.0, 0.0, 300001)
        vals = np.abs([1 + x + x ** 2 / 2 + x ** 3 / 6 for x in xs])
        first_bad = xs[np.where(vals > 1.0)[0].max()]
        found = real_axis_crossing(ssprk33, tol=1e-6)
        assert found == pytest.approx(-2.5127, abs=1e-3)
        assert found == pytest.approx(first_bad, abs=1e-4)

    def test_region_excluding_origin_neighborhood(self):
        # an inconsistent tableau with |R| > 1 immediately left of 0
        from ssprk import ButcherTableau
        t = ButcherTableau([[0.0]], [-1.0])  # R(z) = 1 - z
        assert real_axis_crossing(t) == 0.0

    def test_a_stable_method_reports_unbounded(self, implicit_midpoint):
        assert real_axis_crossing(implicit_midpoint) == -math.inf


class TestImaginaryAxisExtent:
    def test_implicit_midpoint_whole_axis(self, implicit_midpoint):
        assert imaginary_axis_extent(implicit_midpoint) == math.inf

    def test_forward_euler_zero(self, forward_euler):
        assert imaginary_axis_extent(forward_euler) == 0.0

    def test_proximity_probes_left_of_axis(self, forward_euler):
        # even slightly left of the axis the disk only covers a sliver
        extent = imaginary_axis_extent(forward_euler, proximity=0.1)
        assert 0.4 < extent < 0.5  # |1 + (-0.1 + iy)| = 1 at y = sqrt(0.19)


class TestAStability:
    def test_classic_verdicts(self, implicit_midpoint, forward_euler,
                              ssprk33):
        assert is_a_stable_sampled(implicit_midpoint)
        assert not is_a_stable_sampled(forward_euler)
        assert not is_a_stable_sampled(ssprk33)

    def test_family_member_a_stable(self):
        pair = construct_shu_osher_pair_family(Fraction(2, 3))
        assert is_a_stable_sampled(pair.implicit_part)


class TestRegionBoundary:
    def test_forward_euler_circle(self, forward_euler):
        grid = StabilityGrid(-3.0, 1.0, -2.0, 2.0, 161, 161)
        pts = region_boundary(forward_euler, grid)
        assert len(pts) > 50
        radii = np.abs(np.array(pts) - (-1.0))
        assert np.max(np.abs(radii - 1.0)) < grid.cell

    def test_midpoint_boundary_is_the_axis(self, implicit_midpoint):
        grid = StabilityGrid(-2.0, 2.0, -1.0, 1.0, 101, 101)
        pts = region_boundary(implicit_midpoint, grid)
        assert len(pts) > 10
        assert np.max(np.abs(np.real(pts))) < 2.0 * grid.cell

    def test_ssprk33_crosses_near_known_point(self, ssprk33):
        grid = StabilityGrid(-3.0, 0.5, -3.0, 3.0, 201, 201)
        pts = np.array(region_boundary(ssprk33, grid))
        near_axis = pts[np.abs(pts.imag) < 0.05]
        assert np.min(np.abs(near_axis.real - (-2.5127))) < 0.05

    def test_empty_region(self):
        grid = StabilityGrid(5.0, 6.0, 5.0, 6.0, 21, 21)
        pts = region_boundary(load_bundled("forward-euler"), grid)
        assert pts == []

    def test_csv_roundtrip(self, forward_euler, tmp_path):
        pts = region_boundary(forward_euler,
                              StabilityGrid(-3, 1, -2, 2, 41, 41))
        path = tmp_path / "boundary.csv"
        boundary_csv(pts, path)
        back = read_boundary_csv(path)
        assert back == pts

    def test_query_metrics_bundle(self, implicit_midpoint):
        q = StabilityQuery(implicit_midpoint, StabilityGrid())
        metrics = q.metrics()
        assert metrics["a_stable_sampled"] is True
        assert metrics["imag_extent"] == math.inf
        assert metrics["real_crossing"] == -math.inf


class TestPairFamily:
    def test_printed_member_exact(self):
        pair = construct_shu_osher_pair_family(Fraction(2, 3))
        expected = np.array([[0.0, 0.0, 0.0],
                             [0.0, 1.0, 0.0],
                             [1 / 6, -1 / 3, 2 / 3]])
        assert np.array_equal(pair.At, expected)
        assert np.array_equal(pair.bt, np.array([1 / 6, 1 / 6, 2 / 3]))

    def test_explicit_part_is_ssprk33(self, ssprk33):
        pair = construct_shu_osher_pair_family(0.8)
        assert np.array_equal(pair.A, ssprk33.A)
        assert np.array_equal(pair.b, ssprk33.b)

    def test_sdirk_member(self):
        beta = math.sqrt(3.0) / 6.0 + 0.5
        pair = construct_shu_osher_pair_family(beta)
        d = np.diag(pair.At)
        assert d[0] == 0.0
        assert d[1] == pytest.approx(d[2], abs=1e-12)

    def test_abscissas_match_for_any_beta(self):
        for beta in (0.55, 0.6, 0.9, 1.4):
            pair = construct_shu_osher_pair_family(beta)
            assert np.allclose(pair.ct, [0.0, 1.0, 0.5], atol=1e-12)
            assert np.allclose(pair.ct, pair.c, atol=1e-12)

    def test_third_order_and_a_stability_for_beta_range(self):
        for beta in (0.6, Fraction(2, 3), 0.8):
            pair = construct_shu_osher_pair_family(beta)
            lin = evaluate(imex_linear_conditions(3), pair)
            assert lin.max_abs_residual() < 1e-12
            nl = evaluate(imex_nonlinear_conditions(3, 3), pair)
            assert nl.max_abs_residual() < 1e-12
            assert is_a_stable_sampled(pair.implicit_part)

    def test_singular_parameter_rejected(self):
        with pytest.raises(ValueError, match="1/2"):
            construct_shu_osher_pair_family(0.5)


class TestVerifiedPartnerMetrics:
    """Frozen regression values for the ten-stage partner tableaux.

    Cross-checked against 50-digit arithmetic; the second pair also matches
    its published metrics (-1350, +/-600) to well under a percent.
    """

    def test_sdirk_partner_of_ten_stage_pair(self):
        impl = load_bundled("imex-s10-p4-plin6").implicit_part
        assert real_axis_crossing(impl, tol=1e-2) == pytest.approx(
            -1357.77, rel=1e-3)
        assert imaginary_axis_extent(impl, tol=1e-2) == pytest.approx(
            600.06, rel=1e-3)

    def test_ketcheson_partner_actual_metrics(self):
        impl = load_bundled("imex-ssprk104-sdirk").implicit_part
        assert real_axis_crossing(impl, tol=1.0) == pytest.approx(
            -126541.0, rel=1e-3)
        # the strict axis is excluded from tiny heights on: the profile
        # re-enters near y ~ 0.9 and leaves again near y ~ 8.85e4
        assert imaginary_axis_extent(impl, tol=1e-3) < 0.1
        assert abs(stability_function(impl, 1j * 0.5)) > 1.0 + 1e-5
        assert abs(stability_function(impl, 1j * 50000.0)) < 1.0
