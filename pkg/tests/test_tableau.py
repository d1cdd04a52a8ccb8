import math

import numpy as np
import pytest

from ssprk import (ButcherTableau, ImexTableau, ShuOsherForm, TableauError,
                   butcher_to_canonical_shu_osher, load_bundled,
                   shu_osher_ssp_coefficient, shu_osher_to_butcher)
from ssprk.methodfile import MethodFileError, dumps, loads
from ssprk.tableau import admissibility_violations

from conftest import random_dirk


class TestButcherTableau:
    def test_c_is_derived(self, ssprk33):
        assert np.allclose(ssprk33.c, [0.0, 1.0, 0.5])

    def test_structure_inference(self):
        t = ButcherTableau([[0.5, 0], [0.3, 0.5]], [0.5, 0.5])
        assert t.structure == "sdirk"
        t = ButcherTableau([[0.5, 0], [0.3, 0.25]], [0.5, 0.5])
        assert t.structure == "dirk"
        t = ButcherTableau([[0, 0], [1, 0]], [0.5, 0.5])
        assert t.structure == "explicit"
        t = ButcherTableau([[0.5, 0.1], [0.3, 0.25]], [0.5, 0.5])
        assert t.structure == "full"

    def test_bad_structure_claim(self):
        with pytest.raises(TableauError):
            ButcherTableau([[0.5]], [1.0], "explicit")

    def test_dimension_mismatch(self):
        with pytest.raises(TableauError):
            ButcherTableau([[0, 0], [1, 0]], [1.0])


class TestCanonicalConversion:
    def test_r_zero_is_identity_stack(self, ssprk33):
        so = butcher_to_canonical_shu_osher(ssprk33, 0.0)
        assert np.array_equal(so.alpha, np.zeros((4, 3)))
        assert np.allclose(so.beta[:3], ssprk33.A)
        assert np.allclose(so.beta[3], ssprk33.b)
        assert np.array_equal(so.v, np.ones(4))

    def test_ssprk33_at_unit_radius(self, ssprk33):
        so = butcher_to_canonical_shu_osher(ssprk33, 1.0)
        assert np.allclose(so.v, [1.0, 0.0, 0.75, 1.0 / 3.0])
        expected_alpha = np.zeros((4, 3))
        expected_alpha[1, 0] = 1.0
        expected_alpha[2, 1] = 0.25
        expected_alpha[3, 2] = 2.0 / 3.0
        assert np.allclose(so.alpha, expected_alpha)
        assert np.allclose(so.alpha, so.beta)  # r = 1

    def test_negative_radius_rejected(self, ssprk33):
        with pytest.raises(TableauError):
            butcher_to_canonical_shu_osher(ssprk33, -0.5)

    def test_singular_scaling_rejected(self):
        t = ButcherTableau([[-1.0]], [1.0])
        with pytest.raises(TableauError, match="non-invertible"):
            butcher_to_canonical_shu_osher(t, 1.0)

    def test_consistency_rows(self, dirk646_butcher):
        so = butcher_to_canonical_shu_osher(dirk646_butcher, 3.0)
        defect = np.abs(so.v + so.alpha.sum(axis=1) - 1.0)
        assert np.max(defect) < 1e-13


class TestShuOsherToButcher:
    def test_plain_stack_roundtrip(self, ssprk33):
        so = butcher_to_canonical_shu_osher(ssprk33, 0.0)
        back = shu_osher_to_butcher(so)
        assert np.array_equal(back.A, ssprk33.A)
        assert np.array_equal(back.b, ssprk33.b)

    def test_hand_eliminated_ssprk33(self, ssprk33):
        so = butcher_to_canonical_shu_osher(ssprk33, 1.0)
        back = shu_osher_to_butcher(so)
        assert np.allclose(back.A, ssprk33.A, atol=1e-14)
        assert np.allclose(back.b, ssprk33.b, atol=1e-14)

    def test_appendix_s10_linear_order(self):
        so = load_bundled("dirk-s10-p2-plin11")
        t = shu_osher_to_butcher(so)
        from ssprk import evaluate, rk_linear_conditions
        report = evaluate(rk_linear_conditions(11), t)
        assert report.max_abs_residual() < 1e-9

    def test_roundtrip_property_200_random(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 200:
            s = int(rng.integers(1, 9))
            t = random_dirk(rng, s)
            r = float(rng.uniform(0.0, 2.0))
            if np.linalg.cond(np.eye(s) + r * t.A) > 1e4:
                continue
            so = butcher_to_canonical_shu_osher(t, r)
            back = shu_osher_to_butcher(so)
            assert np.allclose(back.A, t.A, atol=1e-12)
            assert np.allclose(back.b, t.b, atol=1e-12)
            checked += 1


class TestAppendixCanonicalForms:
    @pytest.mark.parametrize("name,claimed", [
        ("dirk-s6-p4-plin6", 5.138),
        ("dirk-s8-p4-plin9", 4.735),
        ("dirk-s10-p2-plin11", 5.2306),
    ])
    def test_recovered_scaling_matches_claim(self, name, claimed):
        so = load_bundled(name)
        assert abs(so.r - claimed) < 1e-3

    def test_roundtrip_at_recovered_scaling(self):
        # reconversion at the form's own r reproduces the published alpha, v
        so = load_bundled("dirk-s6-p4-plin6")
        t = shu_osher_to_butcher(so)
        again = butcher_to_canonical_shu_osher(t, so.r)
        assert np.allclose(again.alpha, so.alpha, atol=1e-9)
        assert np.allclose(again.v, so.v, atol=1e-9)


class TestSspCoefficient:
    def test_canonical_gives_back_r(self, ssprk33):
        so = butcher_to_canonical_shu_osher(ssprk33, 1.0)
        assert shu_osher_ssp_coefficient(so) == pytest.approx(1.0,
                                                              rel=1e-14)

    def test_canonical_r_various(self, dirk646_butcher):
        for r in (0.5, 2.0, 5.0):
            so = butcher_to_canonical_shu_osher(dirk646_butcher, r)
            if admissibility_violations(so):
                continue
            assert shu_osher_ssp_coefficient(so) == pytest.approx(r,
                                                                  rel=1e-13)

    def test_no_forward_euler_content_is_infinite(self):
        alpha = np.zeros((2, 1))
        alpha[1, 0] = 1.0
        v = np.array([1.0, 0.0])
        so = ShuOsherForm(alpha, np.zeros((2, 1)), v)
        assert shu_osher_ssp_coefficient(so) == math.inf

    def test_negative_v_gives_zero(self):
        alpha = np.array([[0.0], [1.5]])
        beta = np.array([[0.5], [0.5]])
        v = np.array([1.0, -0.5])
        so = ShuOsherForm(alpha, beta, v)
        assert shu_osher_ssp_coefficient(so) == 0.0
        assert any("v[1]" in msg for msg in admissibility_violations(so))

    def test_beta_without_alpha_gives_zero(self):
        alpha = np.array([[0.0], [1.0]])
        beta = np.array([[0.5], [0.5]])
        v = np.array([1.0, 0.0])
        so = ShuOsherForm(alpha, beta, v)
        assert shu_osher_ssp_coefficient(so) == 0.0


class TestConsistencyValidation:
    def test_inconsistent_rows_rejected(self):
        alpha = np.array([[0.5], [0.2]])
        beta = np.zeros((2, 1))
        v = np.array([0.2, 0.8])  # first row sums to 0.7
        with pytest.raises(TableauError, match="consistency"):
            ShuOsherForm(alpha, beta, v)


class TestMethodFiles:
    def test_save_load_bit_exact(self, tmp_path, ssprk33):
        from ssprk import load_method, save_method
        path = tmp_path / "m.rk"
        save_method(ssprk33, path)
        back = load_method(path)
        assert np.array_equal(back.A, ssprk33.A)
        assert np.array_equal(back.b, ssprk33.b)
        assert back.structure == ssprk33.structure
        assert back.name == ssprk33.name
        # a second trip through text is byte-identical
        assert dumps(back) == dumps(ssprk33)

    def test_imex_roundtrip(self, tmp_path):
        pair = load_bundled("imex-k10-s5-p3-plin5")
        text = dumps(pair)
        back = loads(text)
        assert back == pair
        assert back.k_designed == 0.1
        assert back.pe == 3 and back.pi == 3 and back.p_lin == 5

    def test_shu_osher_roundtrip(self):
        so = load_bundled("dirk-s6-p4-plin6")
        back = loads(dumps(so))
        assert np.array_equal(back.alpha, so.alpha)
        assert np.array_equal(back.beta, so.beta)
        assert np.array_equal(back.v, so.v)
        assert back.r == so.r

    def test_ketcheson_bundle_values(self, ketcheson104):
        assert ketcheson104.s == 10
        assert np.array_equal(ketcheson104.b, np.full(10, 1.0 / 10.0))
        assert ketcheson104.A[5, 0] == 1.0 / 15.0
        assert ketcheson104.A[4, 3] == 1.0 / 6.0

    def test_short_weight_row_rejected(self):
        text = ("class=explicit\ns=2\nA:\n0 0\n1 0\nb:\n1.0\n")
        with pytest.raises(MethodFileError, match="length 1"):
            loads(text)

    def test_trailing_garbage_rejected(self):
        text = ("class=explicit\ns=1\nA:\n0\nb:\n1.0\nwat is this\n")
        with pytest.raises(MethodFileError, match="line 7"):
            loads(text)

    def test_unknown_header_rejected(self):
        with pytest.raises(MethodFileError, match="unknown header"):
            loads("class=explicit\ns=1\nbogus=3\nA:\n0\nb:\n1\n")

    def test_missing_block_rejected(self):
        with pytest.raises(MethodFileError, match="missing block"):
            loads("class=explicit\ns=1\nA:\n0\n")

    def test_imex_structure_enforced(self):
        text = ("class=imex\ns=2\nA:\n0.1 0\n1 0\nb:\n0.5 0.5\n"
                "At:\n0.5 0\n0 0.5\nbt:\n0.5 0.5\n")
        with pytest.raises(MethodFileError, match="strictly lower"):
            loads(text)


class TestImexTableau:
    def test_parts(self):
        pair = load_bundled("imex-ssprk104-sdirk")
        assert pair.explicit_part.structure == "explicit"
        assert pair.implicit_part.structure in ("dirk", "sdirk")
        assert np.array_equal(pair.explicit_part.b, pair.implicit_part.b)

    def test_shared_stage_count_enforced(self):
        with pytest.raises(TableauError):
            ImexTableau(np.zeros((2, 2)), np.ones(2) / 2,
                        np.zeros((3, 3)), np.ones(3) / 3)
