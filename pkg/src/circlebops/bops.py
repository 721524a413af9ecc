"""Bi-orthogonal polynomial systems {phi_n, phi*_n} on the unit circle.

Construction routes:

* ``gram_lu``: per level n, solve the moment linear system
  sum_j x_j w_{m-j} = delta_{m,n} (and its transpose for the barred family);
  then kappa_n^2 = x_n, c_{n,j} = x_j / kappa_n.
* ``szego_recursion``: reflection coefficients from determinant ratios
  r_n = (-1)^n I^1_n / I^0_n, rbar_n = (-1)^n I^-1_n / I^0_n, polynomials
  bootstrapped through the coupled recurrences
  kappa_n phi_{n+1} = kappa_{n+1} z phi_n + phi_{n+1}(0) phi*_n  (+ partner).

kappa_n is fixed to the principal square root of I^0_n / I^0_{n+1}
(Re > 0, tie towards Im > 0); only this sign gauge distinguishes the two
routes, so ``both`` cross-checks them coefficientwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import ConsistencyError, ExistenceError, WindowError
from .moments import MomentTable, hadamard_scale, toeplitz_det
from .numerics import principal_sqrt, polyval, rel_residual
from .report import IdentityReport

Method = Literal["gram_lu", "szego_recursion", "both"]


@dataclass(frozen=True)
class BopsLevel:
    """Degree-n record: kappa_n, coefficients of phi_n and of the reversed
    reciprocal polynomial (phi*_n(z) = sum_j cbar[j] z^{n-j})."""

    n: int
    kappa: complex
    c: np.ndarray  # ascending coefficients of phi_n, c[j] = c_{n,j}
    cbar: np.ndarray  # cbar[j] = cbar_{n,j}; phi*_n has ascending coeffs cbar[::-1]

    @property
    def phi0(self) -> complex:
        return complex(self.c[0])

    @property
    def phibar0(self) -> complex:
        return complex(self.cbar[0])

    @property
    def r(self) -> complex:
        return complex(self.phi0 / self.kappa)

    @property
    def rbar(self) -> complex:
        return complex(self.phibar0 / self.kappa)

    @property
    def l(self) -> complex:
        """Sub-leading coefficient l_n (0 at n = 0 where the symbol is empty)."""
        return complex(self.c[self.n - 1]) if self.n >= 1 else 0.0 + 0j

    @property
    def lbar(self) -> complex:
        return complex(self.cbar[self.n - 1]) if self.n >= 1 else 0.0 + 0j

    @property
    def m2(self) -> complex | None:
        """Second sub-leading coefficient m_n; undefined below n = 2."""
        return complex(self.c[self.n - 2]) if self.n >= 2 else None

    @property
    def m2bar(self) -> complex | None:
        return complex(self.cbar[self.n - 2]) if self.n >= 2 else None


@dataclass
class BopsSystem:
    table: MomentTable
    levels: list[BopsLevel]
    i0: np.ndarray  # I^0_n for n = 0 .. N+1
    i1: np.ndarray  # I^1_n for n = 0 .. N
    im1: np.ndarray  # I^-1_n for n = 0 .. N
    method: str
    existence_log: list[int] = field(default_factory=list)
    cross_check_deviation: float | None = None
    kappa_sign_rule: str = "principal sqrt of I0_n/I0_{n+1}; Re>0, tie Im>0"

    @property
    def nmax(self) -> int:
        return len(self.levels) - 1

    def level(self, n: int) -> BopsLevel:
        if n < 0 or n > self.nmax:
            raise IndexError(f"level {n} not built (nmax = {self.nmax})")
        return self.levels[n]

    def kappa(self, n: int) -> complex:
        return self.level(n).kappa

    def phi0(self, n: int) -> complex:
        return self.level(n).phi0

    def phibar0(self, n: int) -> complex:
        return self.level(n).phibar0


def eval_poly(
    sys: BopsSystem,
    n: int,
    z,
    which: Literal["phi", "phistar", "phibar", "phibarstar"] = "phi",
):
    """Horner evaluation of phi_n, phi*_n, phibar_n or the reversed-bar
    polynomial phibar*_n(z) = z^n phi_n(1/z)."""
    lev = sys.level(n)
    coeffs = {
        "phi": lev.c,
        "phibar": lev.cbar,
        "phistar": lev.cbar[::-1],
        "phibarstar": lev.c[::-1],
    }[which]
    return polyval(coeffs, z)


def _existence_check(tbl: MomentTable, nmax: int, tol: Tolerances):
    i0 = np.empty(nmax + 1, dtype=complex)
    log: list[int] = []
    for n in range(nmax + 1):
        i0[n] = toeplitz_det(tbl, 0, n).value
        scale = hadamard_scale(tbl, n)
        if abs(i0[n]) < tol.existence_floor * scale:
            raise ExistenceError(n, i0[n], tol.existence_floor * scale)
        if abs(i0[n]) < 1e6 * tol.existence_floor * scale:
            log.append(n)
    return i0, log


def _gram_levels(tbl: MomentTable, nmax: int) -> list[BopsLevel]:
    levels = []
    for n in range(nmax + 1):
        j = np.arange(n + 1)
        mat = tbl.values[(j[:, None] - j[None, :]) + tbl.window]  # w_{m-j}
        rhs = np.zeros(n + 1, dtype=complex)
        rhs[n] = 1.0
        x = np.linalg.solve(mat, rhs)
        y = np.linalg.solve(mat.T, rhs)
        kappa = principal_sqrt(x[n])
        levels.append(BopsLevel(n=n, kappa=kappa, c=x / kappa, cbar=y / kappa))
    return levels


def _szego_levels(
    tbl: MomentTable, nmax: int, i0: np.ndarray, i1: np.ndarray, im1: np.ndarray
) -> list[BopsLevel]:
    kappas = np.array(
        [principal_sqrt(i0[n] / i0[n + 1]) for n in range(nmax + 1)], dtype=complex
    )
    rs = np.array([(-1) ** n * i1[n] / i0[n] for n in range(nmax + 1)], dtype=complex)
    rbars = np.array(
        [(-1) ** n * im1[n] / i0[n] for n in range(nmax + 1)], dtype=complex
    )
    levels = [BopsLevel(n=0, kappa=kappas[0], c=np.array([kappas[0]]), cbar=np.array([kappas[0]]))]
    for n in range(1, nmax + 1):
        prev = levels[-1]
        ratio = kappas[n] / kappas[n - 1]
        z_phi = np.concatenate(([0.0 + 0j], prev.c))
        phistar_prev = prev.cbar[::-1]
        phi_asc = ratio * (z_phi + rs[n] * np.concatenate((phistar_prev, [0.0 + 0j])))
        phistar_asc = ratio * (
            np.concatenate((phistar_prev, [0.0 + 0j])) + rbars[n] * z_phi
        )
        levels.append(
            BopsLevel(n=n, kappa=kappas[n], c=phi_asc, cbar=phistar_asc[::-1])
        )
    return levels


def build_system(
    tbl: MomentTable,
    nmax: int,
    method: Method = "gram_lu",
    tol: Tolerances = DEFAULT_TOL,
) -> BopsSystem:
    """Build levels n = 0..nmax; requires window K >= nmax + 1 and
    |I^0_n| bounded away from zero for n <= nmax + 1 (ExistenceError
    otherwise: the system genuinely fails to exist at such a level, which is
    an expected runtime signal under deformation, not a bug)."""
    if tbl.window < nmax + 1:
        raise WindowError(nmax + 1, tbl.window, f"build_system(N={nmax})")
    i0, log = _existence_check(tbl, nmax + 1, tol)
    i1 = np.array([toeplitz_det(tbl, 1, n).value for n in range(nmax + 1)])
    im1 = np.array([toeplitz_det(tbl, -1, n).value for n in range(nmax + 1)])

    if method == "gram_lu":
        levels = _gram_levels(tbl, nmax)
        deviation = None
    elif method == "szego_recursion":
        levels = _szego_levels(tbl, nmax, i0, i1, im1)
        deviation = None
    elif method == "both":
        levels = _gram_levels(tbl, nmax)
        alt = _szego_levels(tbl, nmax, i0, i1, im1)
        deviation = 0.0
        for a, b in zip(levels, alt):
            scale = max(1.0, float(np.max(np.abs(a.c))), float(np.max(np.abs(a.cbar))))
            deviation = max(
                deviation,
                float(np.max(np.abs(a.c - b.c))) / scale,
                float(np.max(np.abs(a.cbar - b.cbar))) / scale,
            )
        if deviation > 1e-8:
            raise ConsistencyError(
                "gram_lu and szego_recursion disagree", deviation, 1e-8
            )
    else:
        raise ValueError(f"unknown method {method!r}")

    return BopsSystem(
        table=tbl,
        levels=levels,
        i0=i0,
        i1=i1,
        im1=im1,
        method=method,
        existence_log=log,
        cross_check_deviation=deviation,
    )


# ---------------------------------------------------------------------------
# Orthogonality checks (exact moment sums; quadrature variant when a weight
# callable is available)
# ---------------------------------------------------------------------------

def orthonormality_matrix(sys: BopsSystem) -> np.ndarray:
    """G[m, n] = <phi_m, phibar_n> computed as an exact moment convolution."""
    nmax = sys.nmax
    sys.table.require(nmax, "orthonormality")
    j = np.arange(nmax + 1)
    wmat = sys.table.values[(j[None, :] - j[:, None]) + sys.table.window]  # w_{k-j}
    cmat = np.zeros((nmax + 1, nmax + 1), dtype=complex)
    cbarmat = np.zeros_like(cmat)
    for n, lev in enumerate(sys.levels):
        cmat[n, : n + 1] = lev.c
        cbarmat[n, : n + 1] = lev.cbar
    return cmat @ wmat @ cbarmat.T


def orthonormality_quadrature(sys: BopsSystem, wfun, points: int = 4096) -> np.ndarray:
    """Same Gram matrix by direct trapezoidal quadrature against w."""
    theta = 2.0 * np.pi * np.arange(points) / points
    zeta = np.exp(1j * theta)
    wv = np.asarray(wfun(zeta), dtype=complex)
    nmax = sys.nmax
    phis = np.array([eval_poly(sys, n, zeta, "phi") for n in range(nmax + 1)])
    phibars = np.array(
        [eval_poly(sys, n, 1.0 / zeta, "phibar") for n in range(nmax + 1)]
    )
    return (phis * wv[None, :]) @ phibars.T / points


def monomial_orthogonality(sys: BopsSystem, n: int) -> tuple[float, float]:
    """Max residuals of <phi_n, zetabar^j> = 0 (0 <= j < n) and
    <phi*_n, zetabar^j> = 0 (1 <= j <= n)."""
    lev = sys.level(n)
    res_phi = 0.0
    for j in range(n):
        val = sum(lev.c[k] * sys.table.moment(j - k) for k in range(n + 1))
        res_phi = max(res_phi, abs(val))
    res_star = 0.0
    star = lev.cbar[::-1]  # ascending coefficients of phi*_n
    for j in range(1, n + 1):
        val = sum(star[k] * sys.table.moment(j - k) for k in range(n + 1))
        res_star = max(res_star, abs(val))
    return res_phi, res_star


# ---------------------------------------------------------------------------
# Scalar identity web
# ---------------------------------------------------------------------------

def verify_scalar_identities(
    sys: BopsSystem,
    samples: Sequence[tuple[complex, complex]],
    tol: float | None = None,
) -> IdentityReport:
    """Residuals of the coupled recurrences, both three-term recurrences,
    both Christoffel-Darboux forms, and the kappa / l / m coefficient
    recursions across all built levels."""
    tol = DEFAULT_TOL.identity if tol is None else tol
    rep = IdentityReport("scalar identity web")
    nmax = sys.nmax
    zs = np.array([z for z, _ in samples], dtype=complex)
    zetabars = np.array([zb for _, zb in samples], dtype=complex)

    for n in range(nmax):
        ln, lnp = sys.level(n), sys.level(n + 1)
        phi_n, phi_np = eval_poly(sys, n, zs), eval_poly(sys, n + 1, zs)
        star_n, star_np = eval_poly(sys, n, zs, "phistar"), eval_poly(sys, n + 1, zs, "phistar")
        lhs = ln.kappa * phi_np
        rhs = lnp.kappa * zs * phi_n + lnp.phi0 * star_n
        rep.add(
            "coupled_recurrence",
            "coupled linear recurrence relations",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )
        lhs = ln.kappa * star_np
        rhs = lnp.kappa * star_n + lnp.phibar0 * zs * phi_n
        rep.add(
            "coupled_recurrence_star",
            "coupled linear recurrence relations",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )

    for n in range(1, nmax):
        lm, ln, lp = sys.level(n - 1), sys.level(n), sys.level(n + 1)
        phi_m, phi_n, phi_p = (
            eval_poly(sys, n - 1, zs),
            eval_poly(sys, n, zs),
            eval_poly(sys, n + 1, zs),
        )
        lhs = ln.kappa * ln.phi0 * phi_p + lm.kappa * lp.phi0 * zs * phi_m
        rhs = (ln.kappa * lp.phi0 + lp.kappa * ln.phi0 * zs) * phi_n
        rep.add(
            "three_term_recurrence",
            "three-term recurrence relations",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )
        star_m, star_n, star_p = (
            eval_poly(sys, n - 1, zs, "phistar"),
            eval_poly(sys, n, zs, "phistar"),
            eval_poly(sys, n + 1, zs, "phistar"),
        )
        lhs = ln.kappa * ln.phibar0 * star_p + lm.kappa * lp.phibar0 * zs * star_m
        rhs = (ln.kappa * lp.phibar0 * zs + lp.kappa * ln.phibar0) * star_n
        rep.add(
            "three_term_recurrence_star",
            "three-term recurrence relations",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )

    # Christoffel-Darboux: both closed forms against the direct sum
    mask = np.abs(1.0 - zs * zetabars) > 1e-6
    zcd, zbcd = zs[mask], zetabars[mask]
    for n in range(nmax):
        direct = np.zeros_like(zcd)
        for j in range(n + 1):
            direct = direct + eval_poly(sys, j, zcd) * eval_poly(sys, j, zbcd, "phibar")
        denom = 1.0 - zcd * zbcd
        form_n = (
            eval_poly(sys, n, zcd, "phistar") * eval_poly(sys, n, zbcd, "phibarstar")
            - zcd * zbcd * eval_poly(sys, n, zcd) * eval_poly(sys, n, zbcd, "phibar")
        ) / denom
        form_np = (
            eval_poly(sys, n + 1, zcd, "phistar")
            * eval_poly(sys, n + 1, zbcd, "phibarstar")
            - eval_poly(sys, n + 1, zcd) * eval_poly(sys, n + 1, zbcd, "phibar")
        ) / denom
        rep.add(
            "christoffel_darboux_n_form",
            "analogue of the Christoffel-Darboux summation formula",
            rel_residual(form_n - direct, direct, form_n),
            tol,
            n=n,
        )
        rep.add(
            "christoffel_darboux_shifted_form",
            "analogue of the Christoffel-Darboux summation formula",
            rel_residual(form_np - direct, direct, form_np),
            tol,
            n=n,
        )

    for n in range(1, nmax + 1):
        lm, ln = sys.level(n - 1), sys.level(n)
        lhs = ln.kappa**2
        rhs = lm.kappa**2 + ln.phi0 * ln.phibar0
        rep.add(
            "kappa_identity",
            "relate the leading coefficients back to the reflection coefficients",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )
        lhs = ln.l / ln.kappa
        rhs = lm.l / lm.kappa + ln.r * lm.rbar
        rep.add(
            "l_recursion",
            "relate the leading coefficients back to the reflection coefficients",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )

    for n in range(2, nmax + 1):
        l2, l1, l0 = sys.level(n), sys.level(n - 1), sys.level(n - 2)
        m_n = l2.m2 or 0.0
        m_prev = (l1.m2 or 0.0) if n - 1 >= 2 else 0.0
        lhs = m_n / l2.kappa
        rhs = m_prev / l1.kappa + l2.r * (l0.rbar + l1.rbar * l0.l / l0.kappa)
        rep.add(
            "m_recursion",
            "relate the leading coefficients back to the reflection coefficients",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )

    for n in range(1, nmax + 1):
        lhs = sys.i0[n + 1] * sys.i0[n - 1] / sys.i0[n] ** 2
        rhs = 1.0 - sys.level(n).r * sys.level(n).rbar
        rep.add(
            "toeplitz_ratio_recursion",
            "with the convention I0_0 = 1 the sequence satisfies",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )

    gram = orthonormality_matrix(sys)
    off = gram - np.eye(len(gram))
    rep.add(
        "orthonormality",
        "this system is taken to be orthonormal",
        float(np.max(np.abs(off))),
        tol,
    )
    for n in range(nmax + 1):
        res_phi, res_star = monomial_orthogonality(sys, n)
        rep.add(
            "monomial_orthogonality",
            "can be defined up to an overall factor",
            max(res_phi, res_star),
            tol,
            n=n,
        )
    return rep


# ---------------------------------------------------------------------------
# Determinantal / integral representations (independent evaluation oracle)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DetRepValues:
    n: int
    z: complex
    phi: complex
    phistar: complex
    phi_integral: complex
    phistar_integral: complex

    @property
    def max_mismatch(self) -> float:
        scale = max(1.0, abs(self.phi), abs(self.phistar))
        return (
            max(
                abs(self.phi - self.phi_integral),
                abs(self.phistar - self.phistar_integral),
            )
            / scale
        )


def det_rep_oracle(tbl: MomentTable, n: int, z: complex) -> DetRepValues:
    """phi_n(z) and phi*_n(z) by bordered determinants and, independently, by
    Toeplitz determinants of the shifted weights w(zeta)(zeta - z) and
    w(zeta)(1 - z/zeta)."""
    z = complex(z)
    i0n = toeplitz_det(tbl, 0, n).value
    i0np = toeplitz_det(tbl, 0, n + 1).value
    kappa = principal_sqrt(i0n / i0np)

    # bordered determinant for phi_n: rows 0..n-1 of moments, last row 1..z^n
    mat = np.zeros((n + 1, n + 1), dtype=complex)
    for i in range(n):
        for j in range(n + 1):
            mat[i, j] = tbl.moment(i - j)
    mat[n, :] = z ** np.arange(n + 1)
    phi = kappa / i0n * complex(np.linalg.det(mat))

    # bordered determinant for phi*_n: row i has moments w_{i-k} and z^{n-i}
    mat = np.zeros((n + 1, n + 1), dtype=complex)
    for i in range(n + 1):
        for k in range(n):
            mat[i, k] = tbl.moment(i - k)
        mat[i, n] = z ** (n - i)
    phistar = kappa / i0n * complex(np.linalg.det(mat))

    # integral representations via shifted moment tables
    ks = np.arange(-(tbl.window - 1), tbl.window)
    shifted = MomentTable(
        tbl.window - 1,
        np.array([tbl.moment(k - 1) - z * tbl.moment(k) for k in ks]),
        {"kind": "shifted (zeta - z)"},
    )
    hat = MomentTable(
        tbl.window - 1,
        np.array([tbl.moment(k) - z * tbl.moment(k + 1) for k in ks]),
        {"kind": "shifted (1 - z/zeta)"},
    )
    phi_int = (-1) ** n * kappa * toeplitz_det(shifted, 0, n).value / i0n
    phistar_int = kappa * toeplitz_det(hat, 0, n).value / i0n
    return DetRepValues(n, z, phi, phistar, phi_int, phistar_int)
