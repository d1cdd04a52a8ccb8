import math
from fractions import Fraction

import numpy as np
import pytest

from ssprk import (ButcherTableau, ConditionError, evaluate,
                   imex_linear_conditions, imex_nonlinear_conditions,
                   load_bundled, rk_linear_conditions,
                   rk_nonlinear_conditions, shu_osher_to_butcher)
from ssprk.order_conditions import read_residual_csv

from conftest import random_dirk
from oracle_jets import (PolyField, elementary_differentials,
                         exact_flow_series, rk_step_series)


class TestNonlinearConditionCounts:
    def test_cumulative_counts(self):
        expected = {1: 1, 2: 2, 3: 4, 4: 8, 5: 17, 6: 37}
        for p, count in expected.items():
            assert len(rk_nonlinear_conditions(p)) == count

    def test_order_out_of_range(self):
        with pytest.raises(ConditionError):
            rk_nonlinear_conditions(7)
        with pytest.raises(ConditionError):
            rk_nonlinear_conditions(0)

    def test_order4_targets(self):
        targets = sorted(c.target for c in rk_nonlinear_conditions(4))
        expected = sorted([1, 1 / 2, 1 / 6, 1 / 3, 1 / 24, 1 / 12, 1 / 8,
                           1 / 4])
        assert np.allclose(targets, expected)

    def test_ids_unique(self):
        ids = [c.id for c in rk_nonlinear_conditions(6)]
        assert len(ids) == len(set(ids))


class TestLinearConditions:
    def test_count_and_targets(self):
        cs = rk_linear_conditions(5)
        assert len(cs) == 5
        assert [c.target for c in cs] == [1 / math.factorial(q)
                                          for q in range(1, 6)]

    def test_ssprk33_q3_zero(self, ssprk33):
        cond = rk_linear_conditions(3).conditions[2]
        assert cond.residual(ssprk33) == pytest.approx(0.0, abs=1e-15)

    def test_ssprk33_q4_is_minus_one_24th(self, ssprk33):
        cond = rk_linear_conditions(4).conditions[3]
        assert cond.residual(ssprk33) == pytest.approx(-1.0 / 24.0,
                                                       abs=1e-15)

    def test_q1_consistency(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            t = random_dirk(rng, 4)
            b = t.b / t.b.sum()
            t = ButcherTableau(t.A, b)
            cond = rk_linear_conditions(1).conditions[0]
            assert abs(cond.residual(t)) < 1e-14


class TestEvaluate:
    def test_ssprk33_order3_attained(self, ssprk33):
        report = evaluate(rk_nonlinear_conditions(4), ssprk33, tol=1e-12)
        assert report.p_attained == 3
        by_order = report.max_abs_by_order()
        assert by_order[1] == by_order[2] == by_order[3] == 0.0
        # the failing fourth-order condition is b' A c^2 with residual 1/12
        res = {cond.id: abs(r) for cond, r in report.rows}
        assert res["b'*A(c*c)"] == pytest.approx(1.0 / 12.0, abs=1e-15)

    def test_ketcheson104_order4_machine_precision(self, ketcheson104):
        report = evaluate(rk_nonlinear_conditions(4), ketcheson104)
        assert report.max_abs_residual() < 1e-15

    def test_appendix_pair_linear_order4(self):
        pair = load_bundled("imex-ssprk104-sdirk")
        report = evaluate(imex_linear_conditions(4), pair)
        assert report.max_abs_residual() < 1e-9

    def test_scope_mismatch_raises(self, ssprk33):
        pair = load_bundled("imex-k10-s5-p3-plin5")
        with pytest.raises(ConditionError, match="additive pair"):
            evaluate(imex_linear_conditions(2), ssprk33)
        with pytest.raises(ConditionError, match="single"):
            evaluate(rk_nonlinear_conditions(2), pair)

    def test_attained_monotone_in_tolerance(self, dirk646_butcher):
        cset = rk_nonlinear_conditions(6)
        loose = evaluate(cset, dirk646_butcher, tol=1e-6)
        tight = evaluate(cset, dirk646_butcher, tol=1e-14)
        assert loose.p_attained >= tight.p_attained

    def test_csv_roundtrip(self, ssprk33, tmp_path):
        report = evaluate(rk_nonlinear_conditions(3), ssprk33)
        path = tmp_path / "report.csv"
        report.to_csv(path)
        rows = read_residual_csv(path)
        assert len(rows) == len(report.rows)
        for row, (cond, res) in zip(rows, report.rows):
            assert row["id"] == cond.id
            assert row["order"] == cond.order
            assert row["residual"] == res

    def test_deterministic_and_order_invariant(self, dirk646_butcher):
        cset = rk_nonlinear_conditions(4)
        r1 = evaluate(cset, dirk646_butcher).residuals
        shuffled = type(cset)(list(reversed(cset.conditions)))
        r2 = evaluate(shuffled, dirk646_butcher).residuals
        assert np.array_equal(r1, r2[::-1])


class TestTaylorOracle:
    """Order-<=4 residuals must reproduce the one-step series mismatch."""

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_mismatch_matches_weighted_residuals(self, seed):
        rng = np.random.default_rng(seed)
        field = PolyField(rng)
        u0 = rng.uniform(-0.5, 0.5, size=2)
        cset = rk_nonlinear_conditions(4)
        diffs = elementary_differentials(field, u0)
        for trial in range(3):
            s = int(rng.integers(2, 5))
            A = np.tril(rng.uniform(-1.0, 1.0, size=(s, s)))
            if trial % 2 == 0:
                np.fill_diagonal(A, 0.0)
            b = rng.uniform(-1.0, 1.0, size=s)
            t = ButcherTableau(A, b)
            step = rk_step_series(A, b, field, u0)
            flow = exact_flow_series(field, u0)
            mismatch = step.coeffs - flow.coeffs
            residuals = {c.id: c.residual(t) for c in cset}
            for order in range(1, 5):
                predicted = np.zeros(2)
                for cond in cset:
                    if cond.order != order:
                        continue
                    F, sigma = diffs[cond.id]
                    predicted += residuals[cond.id] * F / sigma
                assert np.allclose(mismatch[order], predicted, atol=1e-9), \
                    f"order {order} mismatch"


class TestImexLinearConditions:
    def test_counts_are_powers_of_two(self):
        cs = imex_linear_conditions(7)
        counts = cs.counts_by_order()
        assert counts == {q: 2 ** q for q in range(1, 8)}

    def test_cumulative_through_q4(self):
        assert len(imex_linear_conditions(4)) == 2 + 4 + 8 + 16

    def test_q2_targets_and_ids(self):
        conds = [c for c in imex_linear_conditions(2) if c.order == 2]
        assert {c.id for c in conds} == {"b.A.e", "b.At.e", "bt.A.e",
                                         "bt.At.e"}
        assert all(c.target == 0.5 for c in conds)

    def test_q3_covers_all_products(self):
        conds = [c for c in imex_linear_conditions(3) if c.order == 3]
        assert len(conds) == 8
        assert all(c.target == pytest.approx(1 / 6) for c in conds)
        leads = {c.id.split(".")[0] for c in conds}
        assert leads == {"b", "bt"}

    def test_duplicates_retained(self):
        # identical explicit and implicit parts make every functional of a
        # given order numerically equal, yet all 2^q conditions remain
        cs = imex_linear_conditions(3)
        assert len({c.id for c in cs}) == len(cs)


class TestImexNonlinearConditions:
    def test_p3_full_set(self):
        cs = imex_nonlinear_conditions(3, 3)
        kinds = {}
        for c in cs:
            kinds[c.kind] = kinds.get(c.kind, 0) + 1
        assert kinds["nonlinear"] == 2
        assert kinds["imex-coupled-explicit-weight"] == 2
        assert kinds["imex-coupled-implicit-weight"] == 2

    def test_p3_linear_implicit_reduction(self):
        cs = imex_nonlinear_conditions(3, 2, implicit_linear=True)
        ids = {c.id for c in cs}
        assert ids == {"b.C.c", "b.C.ct", "b.Ct.ct"}

    def test_p4_full_counts(self):
        cs = imex_nonlinear_conditions(4, 4)
        assert len(cs) == 6 + 3 + 3 + 12 + 18

    def test_p4_linear_implicit_reduction_counts(self):
        cs = imex_nonlinear_conditions(4, 2, implicit_linear=True)
        assert len(cs) == 1 + 2 + 3 + 12

    def test_unsupported_combinations(self):
        with pytest.raises(ConditionError, match="implicit_linear"):
            imex_nonlinear_conditions(3, 2)
        with pytest.raises(ConditionError, match="p_e=4, p_i=3"):
            imex_nonlinear_conditions(4, 3)
        with pytest.raises(ConditionError, match="implicit nonlinear"):
            imex_nonlinear_conditions(3, 3, implicit_linear=True)

    def test_symmetric_pair_coupled_equals_pure(self):
        # with shared weights and abscissas every coupled residual
        # coincides with its same-shape pure residual
        pair = load_bundled("imex-k100-s5-p3-plin5")
        assert np.allclose(pair.b, pair.bt)
        assert np.allclose(pair.c, pair.ct, atol=1e-14)
        cs = imex_nonlinear_conditions(3, 3)
        res = {c.id: c.residual(pair) for c in cs}
        assert res["b.C.ct"] == pytest.approx(res["b.C.c"], abs=1e-13)
        assert res["bt.Ct.c"] == pytest.approx(res["bt.Ct.ct"], abs=1e-13)

    def test_bundled_pairs_pass_their_orders(self):
        for name, pe, pi in [("imex-k10-s5-p3-plin5", 3, 3),
                             ("imex-k100-s5-p3-plin5", 3, 3),
                             ("imex-k10-s7-p4-plin6", 4, 4)]:
            pair = load_bundled(name)
            report = evaluate(imex_nonlinear_conditions(pe, pi), pair)
            assert report.max_abs_residual() < 1e-13, name
            lin = evaluate(imex_linear_conditions(pair.p_lin), pair)
            assert lin.max_abs_residual() < 1e-13, name
