"""Associated polynomials psi_n, psi*_n and associated functions
eps_n = psi_n + F phi_n, eps*_n = psi*_n - F phi*_n.

psi_n is obtained as an exact moment convolution: expanding
(zeta + z)/(zeta - z) * [phi_n(zeta) - phi_n(z)] in powers of z with Laurent
polynomial coefficients in zeta and integrating term by term against the
weight gives

    psi_n(z)  = sum_{j>=1} c_{n,j}    sum_{a=0}^{j-1} (w_{-a-1} z^{j-1-a} + w_{-a} z^{j-a}),
    psi*_n(z) = sum_{j>=1} cbar_{n,j} sum_{a=0}^{j-1} (w_{j-a-1} z^{n-a-1} + w_{j-a} z^{n-a}),

with psi_0 = psi*_0 = 1/kappa_0.  The singular kernel never has to be
quadratured, which keeps psi_n a certified polynomial.

The eps evaluators use the two-sided moment series for F and refuse the
near-circle band unless a side is forced; both analytic elements extend into
the annulus of the weight, which the Plemelj jump check exploits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULT_QUAD, DEFAULT_TOL, QuadratureConfig, Tolerances
from .bops import BopsSystem, eval_poly
from .errors import WindowError
from .moments import (
    CaratheodoryEvaluator,
    MomentTable,
    compute_moments,
    toeplitz_det,
)
from .numerics import laurent_coefficients, polyval, rel_residual
from .report import IdentityReport


@dataclass(frozen=True)
class AssocLevel:
    n: int
    psi: np.ndarray
    psistar: np.ndarray
    eps_eval: Callable
    epsstar_eval: Callable


class AssocSystem:
    """Associated polynomials and function evaluators for every built level."""

    def __init__(
        self,
        sys: BopsSystem,
        tbl: MomentTable | None = None,
        tol: Tolerances = DEFAULT_TOL,
    ):
        self.sys = sys
        self.table = tbl if tbl is not None else sys.table
        self.F = CaratheodoryEvaluator(self.table, tol)
        self._psi: dict[int, np.ndarray] = {}
        self._psistar: dict[int, np.ndarray] = {}

    def psi(self, n: int) -> np.ndarray:
        if n not in self._psi:
            self._psi[n] = _psi_coeffs(self.sys, self.table, n)
        return self._psi[n]

    def psistar(self, n: int) -> np.ndarray:
        if n not in self._psistar:
            self._psistar[n] = _psistar_coeffs(self.sys, self.table, n)
        return self._psistar[n]

    def eps(self, n: int, z, side: str | None = None):
        return polyval(self.psi(n), z) + self.F(z, side=side) * eval_poly(
            self.sys, n, z, "phi"
        )

    def epsstar(self, n: int, z, side: str | None = None):
        return polyval(self.psistar(n), z) - self.F(z, side=side) * eval_poly(
            self.sys, n, z, "phistar"
        )

    def level(self, n: int) -> AssocLevel:
        return AssocLevel(
            n=n,
            psi=self.psi(n),
            psistar=self.psistar(n),
            eps_eval=lambda z, side=None, n=n: self.eps(n, z, side),
            epsstar_eval=lambda z, side=None, n=n: self.epsstar(n, z, side),
        )


def _psi_coeffs(sys: BopsSystem, tbl: MomentTable, n: int) -> np.ndarray:
    if tbl.window < n + 1:
        raise WindowError(n + 1, tbl.window, f"psi_{n}")
    if n == 0:
        return np.array([1.0 / sys.kappa(0)], dtype=complex)
    c = sys.level(n).c
    out = np.zeros(n + 1, dtype=complex)
    for j in range(1, n + 1):
        for a in range(j):
            out[j - 1 - a] += c[j] * tbl.moment(-a - 1)
            out[j - a] += c[j] * tbl.moment(-a)
    return out


def _psistar_coeffs(sys: BopsSystem, tbl: MomentTable, n: int) -> np.ndarray:
    if tbl.window < n + 1:
        raise WindowError(n + 1, tbl.window, f"psistar_{n}")
    if n == 0:
        return np.array([1.0 / sys.kappa(0)], dtype=complex)
    cbar = sys.level(n).cbar
    out = np.zeros(n + 1, dtype=complex)
    for j in range(1, n + 1):
        for a in range(j):
            out[n - a - 1] += cbar[j] * tbl.moment(j - a - 1)
            out[n - a] += cbar[j] * tbl.moment(j - a)
    return out


def build_assoc(sys: BopsSystem, tbl: MomentTable, n: int) -> AssocLevel:
    """Single-level construction; AssocSystem amortizes F across levels."""
    return AssocSystem(sys, tbl).level(n)


# ---------------------------------------------------------------------------
# Independent integral routes (verification oracles)
# ---------------------------------------------------------------------------

def eps_quadrature(wfun, sys: BopsSystem, n: int, z: complex, points: int = 4096):
    """Defining contour integral of eps_n (and the two displayed forms of
    eps*_n) by trapezoidal quadrature; returns (eps, epsstar_a, epsstar_b)."""
    theta = 2.0 * np.pi * np.arange(points) / points
    zeta = np.exp(1j * theta)
    wv = np.asarray(wfun(zeta), dtype=complex)
    kernel = (zeta + z) / (zeta - z)
    eps = np.mean(kernel * wv * eval_poly(sys, n, zeta, "phi"))
    star_a = -(z**n) * np.mean(kernel * wv * eval_poly(sys, n, 1.0 / zeta, "phibar"))
    star_b = 1.0 / sys.kappa(n) - np.mean(
        kernel * wv * eval_poly(sys, n, zeta, "phistar")
    )
    return complex(eps), complex(star_a), complex(star_b)


def eps_intrep(
    wfun,
    tbl: MomentTable,
    sys: BopsSystem,
    n: int,
    z: complex,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> tuple[complex, complex]:
    """(eps_n, eps*_n) via Toeplitz determinants of the Cauchy-modified
    weight w(zeta)/(zeta - z):

        (kappa_n/2) eps_n  =  z^n    I^1_{n+1}[w/(zeta-z)] / I^0_{n+1}[w],
        (kappa_n/2) eps*_n = (-z)^{n+1} I^0_{n+1}[w/(zeta-z)] / I^0_{n+1}[w].
    """
    mod = compute_moments(lambda zeta: wfun(zeta) / (zeta - z), n + 2, quad)
    i0 = toeplitz_det(tbl, 0, n + 1).value
    kappa = sys.kappa(n)
    eps = 2.0 / kappa * z**n * toeplitz_det(mod, 1, n + 1).value / i0
    epsstar = 2.0 / kappa * (-z) ** (n + 1) * toeplitz_det(mod, 0, n + 1).value / i0
    return complex(eps), complex(epsstar)


# ---------------------------------------------------------------------------
# Identity web: recurrences, Casoratians, Plemelj jump
# ---------------------------------------------------------------------------

def verify_assoc_identities(
    asys: AssocSystem,
    ns: Sequence[int],
    samples: Sequence[complex],
    tol: float | None = None,
) -> IdentityReport:
    """Residuals of the eps recurrences, the psi three-term recurrences and
    all three Casoratian identities (in both the psi and eps forms) at the
    sampled points (taken off the unit circle)."""
    tol = DEFAULT_TOL.identity if tol is None else tol
    rep = IdentityReport("associated-function identity web")
    sys = asys.sys
    zs = np.asarray(samples, dtype=complex)

    for n in ns:
        ln, lp = sys.level(n), sys.level(n + 1)
        eps_n, eps_p = asys.eps(n, zs), asys.eps(n + 1, zs)
        star_n, star_p = asys.epsstar(n, zs), asys.epsstar(n + 1, zs)
        lhs = ln.kappa * eps_p
        rhs = lp.kappa * zs * eps_n - lp.phi0 * star_n
        rep.add(
            "eps_recurrence",
            "satisfy a variant of the coupled recurrences",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )
        lhs = ln.kappa * star_p
        rhs = lp.kappa * star_n - lp.phibar0 * zs * eps_n
        rep.add(
            "eps_recurrence_star",
            "satisfy a variant of the coupled recurrences",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )

        # Casoratians, eps form and psi form
        phi_n, phi_p = eval_poly(sys, n, zs), eval_poly(sys, n + 1, zs)
        ps_n, ps_p = eval_poly(sys, n, zs, "phistar"), eval_poly(sys, n + 1, zs, "phistar")
        psi_n, psi_p = polyval(asys.psi(n), zs), polyval(asys.psi(n + 1), zs)
        psis_n, psis_p = polyval(asys.psistar(n), zs), polyval(asys.psistar(n + 1), zs)

        cas_a_rhs = 2.0 * lp.phi0 / ln.kappa * zs**n
        for label, lhs in (
            ("casoratian_a_eps", phi_p * eps_n - eps_p * phi_n),
            ("casoratian_a_psi", phi_p * psi_n - psi_p * phi_n),
        ):
            rep.add(
                label,
                "the Casoratians of the polynomial solutions",
                rel_residual(lhs - cas_a_rhs, lhs, cas_a_rhs, phi_p * eps_n),
                tol,
                n=n,
            )
        cas_b_rhs = 2.0 * lp.phibar0 / ln.kappa * zs ** (n + 1)
        for label, lhs in (
            ("casoratian_b_eps", ps_p * star_n - star_p * ps_n),
            ("casoratian_b_psi", ps_p * psis_n - psis_p * ps_n),
        ):
            rep.add(
                label,
                "the Casoratians of the polynomial solutions",
                rel_residual(lhs - cas_b_rhs, lhs, cas_b_rhs, ps_p * star_n),
                tol,
                n=n,
            )
        cas_c_rhs = 2.0 * zs**n
        for label, lhs in (
            ("casoratian_c_eps", phi_n * star_n + eps_n * ps_n),
            ("casoratian_c_psi", phi_n * psis_n + psi_n * ps_n),
        ):
            rep.add(
                label,
                "the Casoratians of the polynomial solutions",
                rel_residual(lhs - cas_c_rhs, lhs, cas_c_rhs, phi_n * star_n),
                tol,
                n=n,
            )

    # psi three-term recurrences need three consecutive levels
    for n in ns:
        if n < 1 or n + 1 > sys.nmax:
            continue
        lm, ln, lp = sys.level(n - 1), sys.level(n), sys.level(n + 1)
        psi_m, psi_n, psi_p = (
            polyval(asys.psi(n - 1), zs),
            polyval(asys.psi(n), zs),
            polyval(asys.psi(n + 1), zs),
        )
        lhs = ln.kappa * ln.phi0 * psi_p + lm.kappa * lp.phi0 * zs * psi_m
        rhs = (ln.kappa * lp.phi0 + lp.kappa * ln.phi0 * zs) * psi_n
        rep.add(
            "psi_three_term",
            "polynomials of the second kind satisfy the three-term recurrences",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )
        psis_m, psis_n, psis_p = (
            polyval(asys.psistar(n - 1), zs),
            polyval(asys.psistar(n), zs),
            polyval(asys.psistar(n + 1), zs),
        )
        lhs = ln.kappa * ln.phibar0 * psis_p + lm.kappa * lp.phibar0 * zs * psis_m
        rhs = (ln.kappa * lp.phibar0 * zs + lp.kappa * ln.phibar0) * psis_n
        rep.add(
            "psistar_three_term",
            "polynomials of the second kind satisfy the three-term recurrences",
            rel_residual(lhs - rhs, lhs, rhs),
            tol,
            n=n,
        )
    return rep


def plemelj_jump_residual(
    asys: AssocSystem,
    wfun,
    n: int,
    thetas: Sequence[float],
    offset: float = 1e-4,
) -> float:
    """max over theta of | eps_+ - eps_- - 2 w phi_n | using the inside and
    outside analytic elements evaluated at the same points (1 -+ offset) e^{i
    theta}; both elements extend across the circle into the annulus of the
    weight, so the identity holds pointwise there."""
    worst = 0.0
    for radius in (1.0 - offset, 1.0 + offset):
        zs = radius * np.exp(1j * np.asarray(thetas, dtype=float))
        inside = asys.eps(n, zs, side="inside")
        outside = asys.eps(n, zs, side="outside")
        jump = 2.0 * np.asarray(wfun(zs), dtype=complex) * eval_poly(asys.sys, n, zs)
        worst = max(worst, rel_residual(inside - outside - jump, jump, inside))
    return worst


# ---------------------------------------------------------------------------
# Two-sided expansions (FFT Laurent extraction vs closed forms)
# ---------------------------------------------------------------------------

def verify_expansions(
    asys: AssocSystem,
    n: int,
    radii: tuple[float, float] = (0.5, 2.0),
    tol: float = 1e-8,
) -> IdentityReport:
    """Leading Laurent coefficients of (kappa_n/2) eps_n and
    (kappa_n/2) eps*_n on circles inside and outside the unit circle against
    their closed forms in the kappa / l / m / phi(0) data (levels n+1, n+2
    must be built)."""
    sys = asys.sys
    if n + 2 > sys.nmax:
        raise IndexError(f"expansion check at n={n} needs levels up to {n + 2}")
    rep = IdentityReport(f"associated-function expansions at n={n}")
    r_in, r_out = radii
    ln, lp, lpp = sys.level(n), sys.level(n + 1), sys.level(n + 2)
    half_kappa = ln.kappa / 2.0

    inner = laurent_coefficients(
        lambda z: half_kappa * asys.eps(n, z, side="inside"), r_in, range(0, n + 3)
    )
    expected = {n: 1.0 + 0j, n + 1: -lp.lbar / lp.kappa}
    for order, want in expected.items():
        rep.add(
            f"eps_inside_order_{order - n}",
            "have the following expansions",
            abs(inner[order] - want) / max(1.0, abs(want)),
            tol,
            n=n,
            where=f"z^{order} inside",
        )
    low = max(abs(inner[k]) for k in range(0, n)) if n > 0 else 0.0
    rep.add(
        "eps_inside_low_orders_vanish",
        "have the following expansions",
        low,
        tol,
        n=n,
    )

    outer = laurent_coefficients(
        lambda z: half_kappa * asys.eps(n, z, side="outside"), r_out, range(-3, 1)
    )
    want_m1 = lp.phi0 / lp.kappa
    want_m2 = (
        ln.kappa**2 / lp.kappa**2 * lpp.phi0 / lpp.kappa
        - lp.phi0 / lp.kappa * lp.l / lp.kappa
    )
    for order, want in ((-1, want_m1), (-2, want_m2)):
        rep.add(
            f"eps_outside_order_{order}",
            "have the following expansions",
            abs(outer[order] - want) / max(1.0, abs(want)),
            tol,
            n=n,
            where=f"z^{order} outside",
        )
    rep.add(
        "eps_outside_order_0_vanishes",
        "have the following expansions",
        abs(outer[0]),
        tol,
        n=n,
    )

    inner_s = laurent_coefficients(
        lambda z: half_kappa * asys.epsstar(n, z, side="inside"),
        r_in,
        range(0, n + 4),
    )
    want_p1 = lp.phibar0 / lp.kappa
    want_p2 = (
        ln.kappa**2 / lp.kappa**2 * lpp.phibar0 / lpp.kappa
        - lp.phibar0 / lp.kappa * lp.lbar / lp.kappa
    )
    for order, want in ((n + 1, want_p1), (n + 2, want_p2)):
        rep.add(
            f"epsstar_inside_order_{order - n}",
            "have the following expansions",
            abs(inner_s[order] - want) / max(1.0, abs(want)),
            tol,
            n=n,
            where=f"z^{order} inside",
        )
    low = max(abs(inner_s[k]) for k in range(0, n + 1))
    rep.add(
        "epsstar_inside_low_orders_vanish",
        "have the following expansions",
        low,
        tol,
        n=n,
    )

    outer_s = laurent_coefficients(
        lambda z: half_kappa * asys.epsstar(n, z, side="outside"),
        r_out,
        range(-3, 1),
    )
    m_npp = lpp.m2 or 0.0
    want_0 = 1.0 + 0j
    want_m1 = -lp.l / lp.kappa
    want_m2 = lpp.l * lp.l / (lpp.kappa * lp.kappa) - m_npp / lpp.kappa
    for order, want in ((0, want_0), (-1, want_m1), (-2, want_m2)):
        rep.add(
            f"epsstar_outside_order_{order}",
            "have the following expansions",
            abs(outer_s[order] - want) / max(1.0, abs(want)),
            tol,
            n=n,
            where=f"z^{order} outside",
        )
    return rep
