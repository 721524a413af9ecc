import numpy as np
import pytest

from circlebops.errors import SingularResidueError
from circlebops.lax import (
    assemble_residues,
    k_matrix,
    normalized_solution,
    residues_bilinear_form,
    rhp_jump_check,
    verify_matrix_system,
    y_matrix,
)

from conftest import laurent_callable

SAMPLES = [0.4 + 0.2j, -0.3 + 0.35j, 0.5 - 0.1j]


def lebesgue_wfun(z):
    return np.ones_like(np.asarray(z, dtype=complex))


class TestYMatrix:
    def test_lebesgue_inside_form(self, lebesgue):
        z = 0.4 + 0.1j
        for n in range(4):
            y = y_matrix(lebesgue["sys"], lebesgue["asys"], lebesgue_wfun, n, z)
            want = np.array([[z**n, 2 * z**n], [1, 0]], dtype=complex)
            assert np.max(np.abs(y - want)) < 1e-13
            assert abs(np.linalg.det(y) + 2 * z**n) < 1e-13

    def test_determinant_contract(self, strict):
        for n in (1, 2, 3):
            for z in (0.5 + 0.1j, 2.3 - 0.8j):
                y = y_matrix(strict["sys"], strict["asys"], strict["wfun"], n, z)
                w = complex(strict["wfun"](z))
                assert abs(np.linalg.det(y) * w + 2 * z**n) < 1e-10

    def test_transfer_recurrence(self, strict):
        # Y_{n+1} = K_n Y_n and det K_n = z
        z = 0.45 - 0.2j
        for n in (1, 2):
            lhs = y_matrix(strict["sys"], strict["asys"], strict["wfun"], n + 1, z)
            rhs = k_matrix(strict["sys"], n, z) @ y_matrix(
                strict["sys"], strict["asys"], strict["wfun"], n, z
            )
            assert np.max(np.abs(lhs - rhs)) < 1e-11
            assert abs(np.linalg.det(k_matrix(strict["sys"], n, z)) - z) < 1e-12


class TestResidues:
    def test_traces(self, strict):
        for n in range(4):
            res = assemble_residues(
                strict["quads"][n], strict["vw"], strict["sys"], n, strict["weight"]
            )
            # Tr A_1 = n - rho_1 = n + 1, Tr A_j = -rho_j otherwise
            assert abs(np.trace(res.a[0]) - (n + 1)) < 1e-8
            assert abs(np.trace(res.a[1]) + 0.5) < 1e-8
            assert abs(np.trace(res.a[2]) + 1.0 / 3.0) < 1e-8

    def test_rank_one(self, strict):
        for n in range(5):
            res = assemble_residues(
                strict["quads"][n], strict["vw"], strict["sys"], n, strict["weight"]
            )
            for mat in res.a:
                assert abs(np.linalg.det(mat)) < 1e-8

    def test_infinity_closed_form(self, strict):
        sum_rho = complex(strict["weight"].exponents.sum())
        for n in range(4):
            res = assemble_residues(
                strict["quads"][n], strict["vw"], strict["sys"], n, strict["weight"]
            )
            lev = strict["sys"].level(n)
            want = np.array(
                [[-n, 0.0], [-(n + sum_rho) * lev.rbar, sum_rho]], dtype=complex
            )
            assert np.max(np.abs(res.a_inf - want)) < 1e-7
            assert np.max(np.abs(res.a_inf_closed - want)) < 1e-14
            assert abs(np.trace(res.a_inf) - (-n + sum_rho)) < 1e-7
            assert abs(np.linalg.det(res.a_inf) - (-n * sum_rho)) < 1e-6

    def test_bilinear_form_agrees(self, strict):
        n = 2
        res = assemble_residues(
            strict["quads"][n], strict["vw"], strict["sys"], n, strict["weight"]
        )
        bil = residues_bilinear_form(
            strict["sys"], strict["asys"], strict["weight"], n
        )
        for j, mat in bil.items():
            assert np.max(np.abs(res.a[j] - mat)) < 1e-8


class TestMatrixSystems:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_full_web(self, strict, n):
        rep = verify_matrix_system(
            strict["sys"],
            strict["asys"],
            strict["quads"],
            strict["vw"],
            strict["weight"],
            n,
            SAMPLES,
        )
        assert rep.passed, [(e.name, e.where, e.residual) for e in rep.failures()]

    def test_summation_identity_values(self, strict):
        rep = verify_matrix_system(
            strict["sys"],
            strict["asys"],
            strict["quads"],
            strict["vw"],
            strict["weight"],
            2,
            SAMPLES[:1],
        )
        by_name = {e.name: e for e in rep.entries}
        assert by_name["summation_phistar_eps"].residual < 1e-7  # equals -n
        assert by_name["summation_phi_epsstar"].residual < 1e-7  # equals sum rho


class TestRHP:
    def test_lebesgue_jump_exact(self, lebesgue):
        thetas = np.linspace(0.05, 2 * np.pi, 24)
        for n in (1, 2, 3):
            rep = rhp_jump_check(lebesgue["sys"], lebesgue["asys"], lebesgue_wfun, n, thetas)
            assert rep.passed, [(e.name, e.where, e.residual) for e in rep.failures()]
            jump = [e for e in rep.entries if e.name == "rhp_jump"]
            assert max(e.residual for e in jump) < 1e-12

    def test_laurent_and_strict(self, laurent, strict):
        thetas = np.linspace(0.05, 2 * np.pi, 24)
        for fix, wf in ((laurent, laurent_callable), (strict, strict["wfun"])):
            for n in (1, 2, 3):
                rep = rhp_jump_check(
                    fix["sys"], fix["asys"], wf, n, thetas,
                    weight=fix.get("weight"),
                )
                assert rep.passed, [
                    (e.name, e.where, e.residual) for e in rep.failures()
                ]

    def test_normalized_determinant_value(self, strict):
        for n in (1, 2, 3):
            det = np.linalg.det(normalized_solution(strict["sys"], strict["asys"], n, 0.5))
            assert abs(det + 0.5 ** (n - 1)) < 1e-9

    def test_order_fit_slope_close_to_n(self, strict):
        thetas = np.linspace(0.05, 2 * np.pi, 8)
        rep = rhp_jump_check(
            strict["sys"], strict["asys"], strict["wfun"], 2, thetas, weight=strict["weight"]
        )
        entry = {e.name: e for e in rep.entries}["rhp_order_11_at_infinity"]
        assert entry.residual < 0.01

    def test_rejects_n_zero(self, strict):
        with pytest.raises(ValueError):
            rhp_jump_check(strict["sys"], strict["asys"], strict["wfun"], 0, [0.3])

    def test_zero_weight_point_rejected(self, laurent):
        with pytest.raises(SingularResidueError):
            y_matrix(laurent["sys"], laurent["asys"], laurent_callable, 1, -1.0 + 0j)
