"""2x2 matrix structure: the solution matrix built from the bi-orthogonal
system and its associated functions, the one-step transfer matrix, the
rational coefficient matrix of the z-derivative, its residue matrices at the
finite singularities and at infinity, and the Riemann-Hilbert normalization.

Matrix conventions (ascending row-major):

    Y_n = [[phi_n,  eps_n / w], [phi*_n, -eps*_n / w]],    det Y_n = -2 z^n / w
    K_n = (1/kappa_n) [[kappa_{n+1} z,    phi_{n+1}(0)],
                       [phibar_{n+1}(0) z, kappa_{n+1}]],  Y_{n+1} = K_n Y_n
    W(z) A_n(z) = [[-(Omega_n + V) + (kappa_{n+1}/kappa_n) z Theta_n,
                    (phi_{n+1}(0)/kappa_n) Theta_n],
                   [-(phibar_{n+1}(0)/kappa_n) z Theta*_n,
                    Omega*_n - V - (kappa_{n+1}/kappa_n) Theta*_n]]

The derivative checks in `verify_matrix_system` use finite differences on the
assembled matrices rather than the analytic derivatives of the fits, so they
cross-validate the coefficient-function construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .assoc import AssocSystem
from .bops import BopsSystem, eval_poly
from .coeffs import CoeffQuad
from .config import DEFAULT_TOL, Tolerances
from .errors import SingularResidueError
from .numerics import rel_residual, slope_fit
from .report import IdentityReport
from .weight import PolyPair, SemiClassicalWeight


def y_matrix(
    sys: BopsSystem, asys: AssocSystem, wfun: Callable, n: int, z: complex,
    side: str | None = None,
) -> np.ndarray:
    w = complex(np.asarray(wfun(z), dtype=complex))
    if w == 0:
        raise SingularResidueError(f"w(z) = 0 at z = {z}")
    return np.array(
        [
            [complex(eval_poly(sys, n, z)), complex(asys.eps(n, z, side)) / w],
            [
                complex(eval_poly(sys, n, z, "phistar")),
                -complex(asys.epsstar(n, z, side)) / w,
            ],
        ],
        dtype=complex,
    )


def k_matrix(sys: BopsSystem, n: int, z: complex) -> np.ndarray:
    ln, lp = sys.level(n), sys.level(n + 1)
    return (
        np.array(
            [[lp.kappa * z, lp.phi0], [lp.phibar0 * z, lp.kappa]], dtype=complex
        )
        / ln.kappa
    )


def a_matrix(
    quad: CoeffQuad, vw: PolyPair, sys: BopsSystem, n: int, z: complex
) -> np.ndarray:
    """A_n(z) = (W A)/W with the coefficient-function parameterisation."""
    ln, lp = sys.level(n), sys.level(n + 1)
    v = vw.v_eval(z)
    w = vw.w_eval(z)
    ratio = lp.kappa / ln.kappa
    mat = np.array(
        [
            [-(quad.om(z) + v) + ratio * z * quad.th(z), lp.phi0 / ln.kappa * quad.th(z)],
            [-lp.phibar0 / ln.kappa * z * quad.ths(z), quad.oms(z) - v - ratio * quad.ths(z)],
        ],
        dtype=complex,
    )
    return mat / w


@dataclass(frozen=True)
class ResidueSet:
    """Residue matrices of A_n(z) at the finite singularities and infinity."""

    n: int
    a: np.ndarray  # shape (m, 2, 2), ordered like the weight's singularities
    a_inf: np.ndarray
    a_inf_closed: np.ndarray
    consistency: float  # entrywise gap between -sum A_j and the closed form

    def matrix_at(self, locations: Sequence[complex], z: complex) -> np.ndarray:
        out = np.zeros((2, 2), dtype=complex)
        for aj, zj in zip(self.a, locations):
            out += aj / (z - zj)
        return out


def assemble_residues(
    quad: CoeffQuad,
    vw: PolyPair,
    sys: BopsSystem,
    n: int,
    weight: SemiClassicalWeight,
    tol: float = 1e-7,
) -> ResidueSet:
    """A_{nj} = rho_j / (2 V(z_j)) * [W A_n](z_j) for j >= 2, the special
    upper-triangular form at the origin, and the residue at infinity both as
    -sum_j A_{nj} and in its closed form [[-n, 0], [-(n+sum rho) rbar_n,
    sum rho]]; the two must agree entrywise."""
    ln, lp = sys.level(n), sys.level(n + 1)
    ratio = lp.kappa / ln.kappa
    mats = []
    for j, s in enumerate(weight.singularities):
        zj, rho = s.location, s.exponent
        vj = vw.v_eval(zj)
        if abs(vj) < 1e-12:
            raise SingularResidueError(f"V(z_{j + 1}) = 0 at z = {zj}")
        if j == 0:
            if zj != 0:
                raise SingularResidueError("first singularity must be the origin")
            w1 = vw.w_deriv(0.0)
            v0 = vw.v_eval(0.0)
            top = n * w1 - 2.0 * v0
            mats.append(
                rho
                / (2.0 * v0)
                * np.array([[top, -top * ln.r], [0.0, 0.0]], dtype=complex)
            )
        else:
            v = vj
            mats.append(
                rho
                / (2.0 * v)
                * np.array(
                    [
                        [
                            -(quad.om(zj) + v) + ratio * zj * quad.th(zj),
                            lp.phi0 / ln.kappa * quad.th(zj),
                        ],
                        [
                            -lp.phibar0 / ln.kappa * zj * quad.ths(zj),
                            quad.oms(zj) - v - ratio * quad.ths(zj),
                        ],
                    ],
                    dtype=complex,
                )
            )
    a = np.array(mats)
    a_inf = -a.sum(axis=0)
    sum_rho = weight.exponent_sum
    a_inf_closed = np.array(
        [[-n, 0.0], [-(n + sum_rho) * ln.rbar, sum_rho]], dtype=complex
    )
    consistency = float(np.max(np.abs(a_inf - a_inf_closed))) / max(1.0, n)
    if consistency > tol:
        raise SingularResidueError(
            f"residue sum -sum A_j deviates from the closed form at infinity "
            f"by {consistency:.3e}"
        )
    return ResidueSet(n=n, a=a, a_inf=a_inf, a_inf_closed=a_inf_closed, consistency=consistency)


def residues_bilinear_form(
    sys: BopsSystem, asys: AssocSystem, weight: SemiClassicalWeight, n: int
) -> dict[int, np.ndarray]:
    """Alternative rank-one expression for the residues at the non-origin
    singularities, built from phi/eps products."""
    out = {}
    for j, s in enumerate(weight.singularities):
        if s.location == 0:
            continue
        zj, rho = s.location, s.exponent
        phi = complex(eval_poly(sys, n, zj))
        star = complex(eval_poly(sys, n, zj, "phistar"))
        eps = complex(asys.eps(n, zj))
        eps_s = complex(asys.epsstar(n, zj))
        out[j] = (
            -0.5
            * rho
            * zj ** (-n)
            * np.array(
                [[star * eps, -phi * eps], [-star * eps_s, phi * eps_s]],
                dtype=complex,
            )
        )
    return out


def _fd_matrix(fn: Callable[[complex], np.ndarray], z: complex, step: float) -> np.ndarray:
    h = step * (1.0 + abs(z))
    return (fn(z + h) - fn(z - h)) / (2.0 * h)


def verify_matrix_system(
    sys: BopsSystem,
    asys: AssocSystem,
    quads: Mapping[int, CoeffQuad],
    vw: PolyPair,
    weight: SemiClassicalWeight,
    n: int,
    samples: Sequence[complex],
    wfun: Callable | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> IdentityReport:
    """Matrix-level identity web at level n:

    * Y'_n = A_n Y_n (finite-difference Y', so FD-limited tolerance);
    * K'_n = A_{n+1} K_n - K_n A_n and det K_n = z via the kappa identity;
    * Tr A_n = n/z - w'/w;
    * the X / X* / Z / Z* variant derivative systems;
    * the rank-one bilinear form of the residues against the
      coefficient-function form;
    * the four summation identities over the singular points.
    """
    rep = IdentityReport(f"matrix system at n={n}")
    if wfun is None:
        wfun = lambda z: weight(z)
    quad = quads[n]
    zs = [
        z
        for z in samples
        if abs(z) > 1e-6 and all(abs(z - s.location) > 0.05 for s in weight.singularities)
    ]

    for z in zs:
        ymat = lambda x: y_matrix(sys, asys, wfun, n, x)
        lhs = _fd_matrix(ymat, z, tol.fd_step)
        rhs = a_matrix(quad, vw, sys, n, z) @ ymat(z)
        rep.add(
            "y_derivative_system",
            "equivalent to the matrix differential equation",
            rel_residual(lhs - rhs, lhs, rhs),
            tol.fd_identity,
            n=n,
            where=f"z={z:.3g}",
        )
        det_y = complex(np.linalg.det(ymat(z)))
        want = -2.0 * z**n / complex(np.asarray(wfun(z), dtype=complex))
        rep.add(
            "y_determinant",
            "note that det Y_n = -2 z^n / w(z)",
            rel_residual(det_y - want, det_y, want),
            tol.identity,
            n=n,
            where=f"z={z:.3g}",
        )
        tr = complex(np.trace(a_matrix(quad, vw, sys, n, z)))
        want = n / z - 2.0 * vw.v_eval(z) / vw.w_eval(z)
        rep.add(
            "trace_of_a",
            "we note that Tr A_n = n/z - w'/w",
            rel_residual(tr - want, tr, want),
            tol.identity,
            n=n,
            where=f"z={z:.3g}",
        )

    if n + 1 in quads:
        quad_p = quads[n + 1]
        for z in zs:
            kd = _fd_matrix(lambda x: k_matrix(sys, n, x), z, tol.fd_step)
            rhs = (
                a_matrix(quad_p, vw, sys, n + 1, z) @ k_matrix(sys, n, z)
                - k_matrix(sys, n, z) @ a_matrix(quad, vw, sys, n, z)
            )
            rep.add(
                "transfer_compatibility",
                "compatibility of the relations",
                rel_residual(kd - rhs, kd, rhs),
                tol.fd_identity,
                n=n,
                where=f"z={z:.3g}",
            )
        ln, lp = sys.level(n), sys.level(n + 1)
        det_k_identity = lp.kappa**2 - lp.phi0 * lp.phibar0 - ln.kappa**2
        rep.add(
            "transfer_determinant",
            "the matrix K_n has the property det K_n = z",
            rel_residual(det_k_identity, lp.kappa**2, ln.kappa**2),
            tol.identity,
            n=n,
        )

        # X / X* / Z / Z* variants
        ln, lp, lpp = sys.level(n), sys.level(n + 1), sys.level(n + 2)

        def xmat(x):
            w = complex(np.asarray(wfun(x), dtype=complex))
            return np.array(
                [
                    [complex(eval_poly(sys, n + 1, x)), complex(asys.eps(n + 1, x)) / w],
                    [complex(eval_poly(sys, n, x)), complex(asys.eps(n, x)) / w],
                ],
                dtype=complex,
            )

        def xsmat(x):
            w = complex(np.asarray(wfun(x), dtype=complex))
            return np.array(
                [
                    [
                        complex(eval_poly(sys, n + 1, x, "phistar")),
                        complex(asys.epsstar(n + 1, x)) / w,
                    ],
                    [
                        complex(eval_poly(sys, n, x, "phistar")),
                        complex(asys.epsstar(n, x)) / w,
                    ],
                ],
                dtype=complex,
            )

        def zmat(x):
            w = complex(np.asarray(wfun(x), dtype=complex))
            return np.array(
                [
                    [complex(eval_poly(sys, n + 1, x)), complex(asys.eps(n + 1, x)) / w],
                    [
                        complex(eval_poly(sys, n, x, "phistar")),
                        -complex(asys.epsstar(n, x)) / w,
                    ],
                ],
                dtype=complex,
            )

        def zsmat(x):
            w = complex(np.asarray(wfun(x), dtype=complex))
            return np.array(
                [
                    [
                        complex(eval_poly(sys, n + 1, x, "phistar")),
                        -complex(asys.epsstar(n + 1, x)) / w,
                    ],
                    [complex(eval_poly(sys, n, x)), complex(asys.eps(n, x)) / w],
                ],
                dtype=complex,
            )

        for z in zs:
            w_z = vw.w_eval(z)
            v_z = vw.v_eval(z)
            mx = np.array(
                [
                    [
                        quad.om(z) - v_z + n * w_z / z,
                        -ln.kappa * lpp.phi0 / (lp.kappa * lp.phi0) * z * quad_p.th(z),
                    ],
                    [quad.th(z), -quad.om(z) - v_z],
                ],
                dtype=complex,
            )
            lhs = w_z * _fd_matrix(xmat, z, tol.fd_step)
            rhs = mx @ xmat(z)
            rep.add(
                "x_derivative_system",
                "other forms of the matrix variables",
                rel_residual(lhs - rhs, lhs, rhs),
                tol.fd_identity,
                n=n,
                where=f"z={z:.3g}",
            )

            mxs = np.array(
                [
                    [
                        -quad.oms(z) - v_z + (n + 1) * w_z / z,
                        ln.kappa * lpp.phibar0 / (lp.kappa * lp.phibar0) * z * quad_p.ths(z),
                    ],
                    [-quad.ths(z), quad.oms(z) - v_z],
                ],
                dtype=complex,
            )
            lhs = w_z * _fd_matrix(xsmat, z, tol.fd_step)
            rhs = mxs @ xsmat(z)
            rep.add(
                "xstar_derivative_system",
                "other forms of the matrix variables",
                rel_residual(lhs - rhs, lhs, rhs),
                tol.fd_identity,
                n=n,
                where=f"z={z:.3g}",
            )

            mz = np.array(
                [
                    [
                        -quad.oms(z) - v_z + ln.kappa / lp.kappa * quad.ths(z) + (n + 1) * w_z / z,
                        ln.kappa * lpp.phi0 / lp.kappa**2 * quad_p.th(z),
                    ],
                    [
                        -lp.phibar0 / lp.kappa * quad.ths(z),
                        quad.oms(z) - v_z - ln.kappa / lp.kappa * quad.ths(z),
                    ],
                ],
                dtype=complex,
            )
            lhs = w_z * _fd_matrix(zmat, z, tol.fd_step)
            rhs = mz @ zmat(z)
            rep.add(
                "z_derivative_system",
                "other forms of the matrix variables",
                rel_residual(lhs - rhs, lhs, rhs),
                tol.fd_identity,
                n=n,
                where=f"z={z:.3g}",
            )

            # the (1,1) entry carries n W / z, as the trace must equal
            # W (log det Z*)' = n W / z - 2 V (det Z* = 2 kappa_{n+1} z^n /
            # (kappa_n w), from the mixed Casoratian)
            mzs = np.array(
                [
                    [
                        quad.om(z) - v_z - ln.kappa / lp.kappa * z * quad.th(z) + n * w_z / z,
                        -ln.kappa * lpp.phibar0 / lp.kappa**2 * z**2 * quad_p.ths(z),
                    ],
                    [
                        lp.phi0 / lp.kappa * quad.th(z),
                        -quad.om(z) - v_z + ln.kappa / lp.kappa * z * quad.th(z),
                    ],
                ],
                dtype=complex,
            )
            lhs = w_z * _fd_matrix(zsmat, z, tol.fd_step)
            rhs = mzs @ zsmat(z)
            rep.add(
                "zstar_derivative_system",
                "other forms of the matrix variables",
                rel_residual(lhs - rhs, lhs, rhs),
                tol.fd_identity,
                n=n,
                where=f"z={z:.3g}",
            )

    # residues: coefficient-function form vs rank-one bilinear form
    res = assemble_residues(quad, vw, sys, n, weight)
    bil = residues_bilinear_form(sys, asys, weight, n)
    for j, mat in bil.items():
        gap = rel_residual(res.a[j] - mat, res.a[j], mat)
        rep.add(
            "residue_bilinear_form",
            "an alternative expression for the residue matrices",
            gap,
            1e-7,
            n=n,
            where=f"z_{j + 1}",
        )
        rep.add(
            "residue_rank_one",
            "we find that det A_nj = 0",
            abs(np.linalg.det(res.a[j])) / max(1.0, float(np.max(np.abs(res.a[j]))) ** 2),
            1e-8,
            n=n,
            where=f"z_{j + 1}",
        )
    for j, s in enumerate(weight.singularities):
        want = s.exponent if j > 0 else s.exponent - n
        rep.add(
            "residue_trace",
            "using the identity we note the traces of the residue matrices",
            abs(np.trace(res.a[j]) + want) / max(1.0, abs(want)),
            1e-7,
            n=n,
            where=f"z_{j + 1}",
        )
    rep.add(
        "residue_at_infinity",
        "the regular singularity at infinity",
        res.consistency,
        1e-7,
        n=n,
    )

    # four summation identities
    sum_rho = weight.exponent_sum
    ln = sys.level(n)
    sums = [0j, 0j, 0j, 0j]
    for s in weight.singularities:
        zj, rho = s.location, s.exponent
        if zj == 0:
            continue
        phi = complex(eval_poly(sys, n, zj))
        star = complex(eval_poly(sys, n, zj, "phistar"))
        eps = complex(asys.eps(n, zj))
        eps_s = complex(asys.epsstar(n, zj))
        base = 0.5 * rho * zj ** (-n)
        sums[0] += base * phi * eps
        sums[1] += base * star * eps
        sums[2] += base * phi * eps_s
        sums[3] += base * star * eps_s
    # the sums run over the non-zero singularities; the origin enters through
    # its (upper-triangular) residue matrix, whose first row contributes to
    # the first two identities
    res0 = res.a[0]
    targets = [
        ("summation_phi_eps", sums[0] + res0[0, 1], 0.0),
        ("summation_phistar_eps", sums[1] - res0[0, 0], -float(n)),
        ("summation_phi_epsstar", sums[2], sum_rho),
        ("summation_phistar_epsstar", sums[3], (n + sum_rho) * ln.rbar),
    ]
    for name, got, want in targets:
        rep.add(
            name,
            "imply the summation identities",
            rel_residual(got - want, got, want, n),
            1e-7,
            n=n,
        )
    return rep


# ---------------------------------------------------------------------------
# Riemann-Hilbert normalization checks
# ---------------------------------------------------------------------------

def normalized_solution(
    sys: BopsSystem, asys: AssocSystem, n: int, z: complex, side: str | None = None
) -> np.ndarray:
    """The RHP-normalized matrix [[phi_n/kappa_n, eps_n/(2 kappa_n z)],
    [kappa_n phi*_n, -kappa_n eps*_n/(2z)]] (no weight division)."""
    kappa = sys.kappa(n)
    return np.array(
        [
            [
                complex(eval_poly(sys, n, z)) / kappa,
                complex(asys.eps(n, z, side)) / (2.0 * kappa * z),
            ],
            [
                kappa * complex(eval_poly(sys, n, z, "phistar")),
                -kappa * complex(asys.epsstar(n, z, side)) / (2.0 * z),
            ],
        ],
        dtype=complex,
    )


def rhp_jump_check(
    sys: BopsSystem,
    asys: AssocSystem,
    wfun: Callable,
    n: int,
    thetas: Sequence[float],
    weight: SemiClassicalWeight | None = None,
    offset: float = 1e-4,
    tol: float = 1e-5,
) -> IdentityReport:
    """Jump, determinant and asymptotic order conditions of the normalized
    problem.  The inside and outside analytic elements are evaluated at the
    same points just off the circle (both extend into the weight's annulus),
    so the jump Y_+ = Y_- [[1, w/z], [0, 1]] is exact up to series
    truncation."""
    rep = IdentityReport(f"Riemann-Hilbert checks at n={n}")
    if n < 1:
        raise ValueError("the normalized problem is stated for n >= 1")

    def near_cut(theta: float) -> bool:
        if weight is None:
            return False
        for s in weight.singularities:
            zj = s.location
            if zj == 0:
                continue
            if abs(abs(zj) - 1.0) < 4 * offset:
                if abs(np.exp(1j * theta) - zj / abs(zj)) < 0.05:
                    return True
        return False

    kept = [t for t in thetas if not near_cut(float(t))]
    for radius in (1.0 - offset, 1.0 + offset):
        for theta in kept:
            z = radius * np.exp(1j * float(theta))
            w = complex(np.asarray(wfun(z), dtype=complex))
            inside = normalized_solution(sys, asys, n, z, side="inside")
            outside = normalized_solution(sys, asys, n, z, side="outside")
            jump = np.array([[1.0, w / z], [0.0, 1.0]], dtype=complex)
            lhs = inside
            rhs = outside @ jump
            rep.add(
                "rhp_jump",
                "consider the following Riemann-Hilbert problem",
                rel_residual(lhs - rhs, lhs, rhs),
                tol,
                n=n,
                where=f"theta={float(theta):.3f}, r={radius}",
            )

    for z in (0.5 + 0.21j, -1.7 + 1.1j, 2.0 - 0.6j):
        det = complex(np.linalg.det(normalized_solution(sys, asys, n, z)))
        want = -(z ** (n - 1))
        rep.add(
            "rhp_determinant",
            "we also point out det Y(z) = -z^{n-1}",
            rel_residual(det - want, det, want),
            1e-9,
            n=n,
            where=f"z={z:.3g}",
        )

    # asymptotic orders: two-radius mean-log slope fits
    def entry(i: int, j: int, side: str) -> Callable[[complex], complex]:
        return lambda z: complex(normalized_solution(sys, asys, n, z, side)[i, j])

    def magnitude(f: Callable, r: float) -> float:
        vals = [abs(f(r * np.exp(1j * t))) for t in np.linspace(0.1, 2 * np.pi, 8)]
        return max(vals)

    slope_tol = 0.01
    checks_inf = [
        ("rhp_order_11_at_infinity", entry(0, 0, "outside"), n, "two-sided"),
        ("rhp_order_22_at_infinity", entry(1, 1, "outside"), -1, "two-sided"),
        ("rhp_order_12_at_infinity", entry(0, 1, "outside"), -2, "upper"),
        ("rhp_order_21_at_infinity", entry(1, 0, "outside"), n, "upper"),
    ]
    for name, f, order, kind in checks_inf:
        if magnitude(f, 20.0) < 1e-13:
            rep.add(name, "as z tends to infinity", 0.0, slope_tol, n=n, where="vanishes")
            continue
        slope = slope_fit(f, 20.0, 80.0)
        gap = abs(slope - order) if kind == "two-sided" else max(0.0, slope - order)
        rep.add(name, "as z tends to infinity", gap, slope_tol, n=n, where=f"slope={slope:.4f}")

    checks_zero = [
        ("rhp_order_11_at_zero", entry(0, 0, "inside"), 0, "lower"),
        ("rhp_order_12_at_zero", entry(0, 1, "inside"), n - 1, "lower"),
        ("rhp_order_21_at_zero", entry(1, 0, "inside"), 0, "lower"),
        ("rhp_order_22_at_zero", entry(1, 1, "inside"), n, "lower"),
    ]
    for name, f, order, kind in checks_zero:
        if magnitude(f, 0.1) < 1e-13:
            rep.add(name, "as z tends to zero", 0.0, slope_tol, n=n, where="vanishes")
            continue
        slope = slope_fit(f, 0.025, 0.1)
        gap = max(0.0, order - slope)
        rep.add(name, "as z tends to zero", gap, slope_tol, n=n, where=f"slope={slope:.4f}")
    return rep
