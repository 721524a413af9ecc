import numpy as np
import pytest

from circlebops.bops import (
    build_system,
    det_rep_oracle,
    eval_poly,
    monomial_orthogonality,
    orthonormality_matrix,
    orthonormality_quadrature,
    verify_scalar_identities,
)
from circlebops.errors import ExistenceError, WindowError
from circlebops.moments import table_from_moments
from circlebops.numerics import circle_samples

from conftest import laurent_callable


def sample_pairs(seed=3, count=20):
    rng = np.random.default_rng(seed)
    return list(zip(circle_samples(rng, count, 0.45), circle_samples(rng, count, 2.3)))


class TestLebesgue:
    def test_monomials(self, lebesgue):
        sys = lebesgue["sys"]
        for n in range(9):
            lev = sys.level(n)
            expect = np.zeros(n + 1, dtype=complex)
            expect[n] = 1.0
            assert np.max(np.abs(lev.c - expect)) < 1e-13
            assert abs(lev.kappa - 1.0) < 1e-13
            if n >= 1:
                assert abs(lev.r) < 1e-13
                assert abs(lev.rbar) < 1e-13

    def test_eval(self, lebesgue):
        assert abs(eval_poly(lebesgue["sys"], 3, 0.5) - 0.125) < 1e-14

    def test_identity_web_exact(self, lebesgue):
        rep = verify_scalar_identities(lebesgue["sys"], sample_pairs(), tol=1e-12)
        assert rep.passed


class TestLaurent:
    def test_reflection_data(self, laurent):
        sys = laurent["sys"]
        for n in range(9):
            lev = sys.level(n)
            assert abs(lev.r - (-1.0) ** n / (n + 1)) < 1e-12
            assert abs(lev.rbar - (-1.0) ** n / (n + 1)) < 1e-12
            assert abs(lev.kappa**2 - (n + 1) / (n + 2)) < 1e-12

    def test_level_one_polynomial(self, laurent):
        lev = laurent["sys"].level(1)
        assert abs(lev.kappa - np.sqrt(2.0 / 3.0)) < 1e-13
        assert abs(lev.r + 0.5) < 1e-13
        # phi_1(z) = kappa_1 (z + r_1)
        z = 0.37 - 0.6j
        assert abs(eval_poly(laurent["sys"], 1, z) - lev.kappa * (z - 0.5)) < 1e-13

    def test_kappa_identity_numbers(self, laurent):
        # kappa_2^2 - kappa_1^2 = 3/4 - 2/3 = 1/12 = kappa_2^2 r_2 rbar_2
        sys = laurent["sys"]
        l1, l2 = sys.level(1), sys.level(2)
        assert abs(l2.kappa**2 - l1.kappa**2 - 1.0 / 12.0) < 1e-12
        assert abs(l2.phi0 * l2.phibar0 - 1.0 / 12.0) < 1e-12
        assert abs(1 - l2.r * l2.rbar - 8.0 / 9.0) < 1e-12

    def test_phistar_at_origin_is_kappa(self, laurent):
        sys = laurent["sys"]
        for n in range(9):
            assert abs(eval_poly(sys, n, 0.0, "phistar") - sys.kappa(n)) < 1e-13

    def test_construction_routes_agree(self, laurent):
        assert laurent["sys"].cross_check_deviation < 1e-8

    def test_identity_web(self, laurent):
        rep = verify_scalar_identities(laurent["sys"], sample_pairs(), tol=1e-10)
        assert rep.passed, rep.failures()

    def test_orthonormality_exact_and_by_quadrature(self, laurent):
        gram = orthonormality_matrix(laurent["sys"])
        assert np.max(np.abs(gram - np.eye(len(gram)))) < 1e-9
        quad = orthonormality_quadrature(laurent["sys"], laurent_callable)
        assert np.max(np.abs(quad - np.eye(len(quad)))) < 1e-9

    def test_monomial_orthogonality_variants(self, laurent):
        for n in range(9):
            res_phi, res_star = monomial_orthogonality(laurent["sys"], n)
            assert res_phi < 1e-9
            assert res_star < 1e-9


class TestStrictWeight:
    def test_identity_web(self, strict):
        rep = verify_scalar_identities(strict["sys"], sample_pairs(), tol=1e-9)
        assert rep.passed, [(e.name, e.residual) for e in rep.failures()]

    def test_routes_agree(self, strict):
        assert strict["sys"].cross_check_deviation < 1e-8

    def test_kappa_squared_matches_determinant_ratio(self, strict):
        sys = strict["sys"]
        for n in range(8):
            assert abs(sys.kappa(n) ** 2 - sys.i0[n] / sys.i0[n + 1]) < 1e-12


class TestDetRepOracle:
    def test_lebesgue_point(self, lebesgue):
        vals = det_rep_oracle(lebesgue["table"], 2, 0.7)
        assert abs(vals.phi - 0.49) < 1e-12
        assert abs(vals.phistar - 1.0) < 1e-12
        assert vals.max_mismatch < 1e-12

    def test_routes_match_eval(self, laurent):
        for n, z in ((2, 1.0), (3, 2.0), (4, 0.3 + 0.4j)):
            vals = det_rep_oracle(laurent["table"], n, z)
            assert vals.max_mismatch < 1e-10
            assert abs(vals.phi - eval_poly(laurent["sys"], n, z)) < 1e-10
            assert abs(vals.phistar - eval_poly(laurent["sys"], n, z, "phistar")) < 1e-10

    def test_strict_weight_routes(self, strict):
        vals = det_rep_oracle(strict["table"], 3, 0.8 + 0.3j)
        assert vals.max_mismatch < 1e-9
        assert abs(vals.phi - eval_poly(strict["sys"], 3, 0.8 + 0.3j)) < 1e-9


class TestExistence:
    def test_degenerate_table_raises(self):
        # all-ones moments: I^0_n = 0 for n >= 2 (a point mass at z = 1)
        tbl = table_from_moments([(k, 1.0) for k in range(-6, 7)], window=6)
        with pytest.raises(ExistenceError) as err:
            build_system(tbl, 4)
        assert err.value.n == 2

    def test_window_too_small(self):
        tbl = table_from_moments([(0, 1.0)], window=3)
        with pytest.raises(WindowError):
            build_system(tbl, 4)
