"""Coefficient functions (Theta_n, Theta*_n, Omega_n, Omega*_n) of a regular
semi-classical weight.

For such weights the spectral derivatives of the bi-orthogonal system are

    W phi'_n   =  Theta_n  phi_{n+1} - (Omega_n  + V) phi_n,
    W phi*'_n  = -Theta*_n phi*_{n+1} + (Omega*_n - V) phi*_n,
    W eps'_n   =  Theta_n  eps_{n+1} - (Omega_n  - V) eps_n,
    W eps*'_n  = -Theta*_n eps*_{n+1} + (Omega*_n + V) eps*_n,

with the four coefficient functions polynomials of degree m-2, m-2, m-1, m-1.
They are computed here from their defining bilinear combinations, e.g.

    2 (phi_{n+1}(0)/kappa_n) z^n Theta_n(z)
        = W (-phi_n eps'_n + eps_n phi'_n) + 2 V phi_n eps_n,

sampled off the unit circle (eps' by central differences, phi' analytically)
and fitted by least squares to the known degree.  The rest of the module
verifies the difference / functional / bilinear relation web these functions
satisfy, including the discrete-Painleve ratio recurrence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .assoc import AssocSystem
from .bops import BopsSystem, eval_poly
from .config import DEFAULT_TOL, Tolerances
from .errors import (
    DegenerateLevelError,
    NotSemiClassicalError,
    SingularResidueError,
)
from .numerics import (
    central_diff,
    circle_samples,
    polyadd,
    polyder,
    polymul,
    polyval,
    rel_residual,
    vandermonde_fit,
)
from .report import IdentityReport
from .weight import PolyPair, SemiClassicalWeight, is_strict_semiclassical


@dataclass(frozen=True)
class CoeffQuad:
    n: int
    theta: np.ndarray
    thetastar: np.ndarray
    omega: np.ndarray
    omegastar: np.ndarray
    fit_residuals: dict = field(default_factory=dict)
    degree_excess: float = 0.0
    seed: int | None = None

    def th(self, z):
        return polyval(self.theta, z)

    def ths(self, z):
        return polyval(self.thetastar, z)

    def om(self, z):
        return polyval(self.omega, z)

    def oms(self, z):
        return polyval(self.omegastar, z)


def _require_strict(vw: PolyPair, weight: SemiClassicalWeight | None):
    if weight is not None:
        if not is_strict_semiclassical(weight):
            raise NotSemiClassicalError(
                "coefficient functions are defined for strict regular "
                "semi-classical weights only"
            )
        return
    # fall back to checking the residues of 2V/W at the roots of W
    roots = np.polynomial.polynomial.polyroots(vw.W)
    for zj in roots:
        rho = 2.0 * vw.v_eval(zj) / vw.w_deriv(zj)
        if abs(rho.imag) < 1e-9 and rho.real > -1e-9 and abs(rho.real - round(rho.real)) < 1e-9:
            raise NotSemiClassicalError(
                f"residue {rho} at W-root {zj} is a non-negative integer"
            )


def compute_coeff_quad(
    sys: BopsSystem,
    asys: AssocSystem,
    vw: PolyPair,
    n: int,
    weight: SemiClassicalWeight | None = None,
    seed: int = 11,
    radius_inside: float = 0.5,
    radius_outside: float = 2.5,
    tol: Tolerances = DEFAULT_TOL,
) -> CoeffQuad:
    """Fit the quadruple at level n from the defining combinations sampled at
    m+3 points per circle (excluding neighbourhoods of 0 and the
    singularities).  Theta_n / Omega_n are sampled inside, where eps_n shares
    the z^n smallness of its defining sum; Theta*_n / Omega*_n are sampled
    outside, where eps*_n is O(1).  Sampling a starred combination inside
    would subtract two O(1) quantities to produce an O(z^{n+1} rbar) result
    and lose all accuracy to cancellation once the reflection coefficients
    are small.  Raises DegenerateLevelError when a reflection-coefficient
    prefactor vanishes and NotSemiClassicalError when a fit residual shows
    the combination is not a polynomial of the stated degree."""
    _require_strict(vw, weight)
    m = vw.degree
    lev_n, lev_p = sys.level(n), sys.level(n + 1)
    if abs(lev_p.phi0) < 1e-13 * max(1.0, abs(lev_p.kappa)):
        raise DegenerateLevelError(f"phi_{n + 1}(0) ~ 0: Theta_{n}/Omega_{n} prefactor vanishes")
    if abs(lev_p.phibar0) < 1e-13 * max(1.0, abs(lev_p.kappa)):
        raise DegenerateLevelError(f"phibar_{n + 1}(0) ~ 0: starred prefactor vanishes")

    rng = np.random.default_rng(seed)
    avoid = [0.0 + 0j]
    if weight is not None:
        avoid.extend(weight.locations)
    count = m + 3
    zs_in = circle_samples(rng, count, radius_inside, avoid=avoid, min_distance=0.05)
    zs_mid = circle_samples(rng, count, radius_outside, avoid=avoid, min_distance=0.05)
    zs_far = circle_samples(rng, count, radius_outside * 1.6, avoid=avoid, min_distance=0.05)
    step = tol.fd_step

    def plain_vals(zs, side):
        w_z = vw.w_eval(zs)
        v_z = vw.v_eval(zs)
        phi_n = eval_poly(sys, n, zs)
        phi_p = eval_poly(sys, n + 1, zs)
        dphi_n = polyval(polyder(sys.level(n).c), zs)
        eps_n = asys.eps(n, zs, side=side)
        eps_p = asys.eps(n + 1, zs, side=side)
        deps_n = np.array(
            [central_diff(lambda x: asys.eps(n, x, side=side), z, step) for z in zs]
        )
        pref = 2.0 * lev_p.phi0 / lev_n.kappa * zs**n
        theta = (w_z * (-phi_n * deps_n + eps_n * dphi_n) + 2.0 * v_z * phi_n * eps_n) / pref
        omega = (
            w_z * (eps_p * dphi_n - phi_p * deps_n)
            + v_z * (phi_n * eps_p + eps_n * phi_p)
        ) / pref
        return theta, omega

    def star_vals(zs, side):
        w_z = vw.w_eval(zs)
        v_z = vw.v_eval(zs)
        star_n = eval_poly(sys, n, zs, "phistar")
        star_p = eval_poly(sys, n + 1, zs, "phistar")
        dstar_n = polyval(polyder(sys.level(n).cbar[::-1]), zs)
        es_n = asys.epsstar(n, zs, side=side)
        es_p = asys.epsstar(n + 1, zs, side=side)
        des_n = np.array(
            [central_diff(lambda x: asys.epsstar(n, x, side=side), z, step) for z in zs]
        )
        pref_star = 2.0 * lev_p.phibar0 / lev_n.kappa * zs ** (n + 1)
        thetastar = (
            w_z * (star_n * des_n - es_n * dstar_n) - 2.0 * v_z * star_n * es_n
        ) / pref_star
        omegastar = (
            w_z * (-es_p * dstar_n + star_p * des_n)
            - v_z * (star_n * es_p + es_n * star_p)
        ) / pref_star
        return thetastar, omegastar

    # theta/omega: inside circle plus one outside circle (eps_n keeps the z^n
    # smallness of its defining sum on both, so no cancellation)
    th_a, om_a = plain_vals(zs_in, "inside")
    th_b, om_b = plain_vals(zs_mid, "outside")
    zs_plain = np.concatenate([zs_in, zs_mid])
    theta_vals = np.concatenate([th_a, th_b])
    omega_vals = np.concatenate([om_a, om_b])

    # starred pair: two outside circles (eps*_n is O(1) there)
    ts_a, os_a = star_vals(zs_mid, "outside")
    ts_b, os_b = star_vals(zs_far, "outside")
    zs_star = np.concatenate([zs_mid, zs_far])
    thetastar_vals = np.concatenate([ts_a, ts_b])
    omegastar_vals = np.concatenate([os_a, os_b])

    fits = {}
    residuals = {}
    plan = (
        ("theta", zs_plain, theta_vals, m - 2),
        ("thetastar", zs_star, thetastar_vals, m - 2),
        ("omega", zs_plain, omega_vals, m - 1),
        ("omegastar", zs_star, omegastar_vals, m - 1),
    )
    for name, pts, vals, degree in plan:
        coeffs, res = vandermonde_fit(pts, vals, degree)
        fits[name] = coeffs
        residuals[name] = res
        if res > tol.fit_residual:
            raise NotSemiClassicalError(
                f"{name}_{n} fit residual {res:.3e} exceeds {tol.fit_residual:.1e}; "
                "defining combination is not a polynomial of the stated degree"
            )

    # degree certification: refit with two extra degrees of freedom and check
    # the overflow coefficients stay negligible against the leading one
    excess = 0.0
    for name, pts, vals, degree in plan:
        wide, _ = vandermonde_fit(pts, vals, degree + 2)
        lead = max(abs(fits[name][-1]), 1e-30)
        excess = max(excess, float(np.max(np.abs(wide[degree + 1 :]))) / lead)

    return CoeffQuad(
        n=n,
        theta=fits["theta"],
        thetastar=fits["thetastar"],
        omega=fits["omega"],
        omegastar=fits["omegastar"],
        fit_residuals=residuals,
        degree_excess=excess,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Expansion closed forms (leading and trailing coefficients)
# ---------------------------------------------------------------------------

def expansion_closed_forms(
    sys: BopsSystem, vw: PolyPair, weight: SemiClassicalWeight, n: int
) -> list[tuple[str, int, complex, str]]:
    """Closed forms for the top two and bottom two coefficients of each
    member of the quadruple, expressed through kappa / l / phi(0) data and
    the weight's singularity data.  Returned as (poly, order, value, block)
    tuples: at small m the leading and trailing windows overlap and a
    coefficient is pinned by two independent forms, both of which are
    reported.

    Three sub-leading terms are derived from the series expansions directly:
    the lbar_{n-1} term of the trailing Theta_n block and the l_{n-1} term of
    the leading Theta*_n block carry a 1/kappa_{n-1} (they enter through
    phi'_n(0) and the z^{n-1} coefficient of phi*_n, both of which contribute
    that factor), and the reflection-product term of the leading Theta_n
    block carries 1/kappa_{n+1}^2 (it arises from trading l_n for l_{n+1}
    through the l-recursion).  All three are confirmed by the fitted
    coefficients at every level.
    """
    m = weight.m
    locs = weight.locations
    rhos = weight.exponents
    sum_rho = complex(rhos.sum())
    sum_z = complex(locs.sum())
    sum_rho_z = complex((rhos * locs).sum())

    lm1 = sys.level(n - 1) if n >= 1 else None
    ln = sys.level(n)
    lp = sys.level(n + 1)
    lpp = sys.level(n + 2)

    w1 = vw.w_deriv(0.0)  # W'(0)
    wpp = polyval(polyder(polyder(vw.W)), 0.0)  # W''(0)
    v0 = vw.v_eval(0.0)
    v1 = polyval(polyder(vw.V), 0.0)  # V'(0)

    out: list[tuple[str, int, complex, str]] = []

    out.append(("theta", m - 2, (n + 1 + sum_rho) * ln.kappa / lp.kappa, "leading"))
    out.append(
        (
            "theta",
            m - 3,
            -((n + 1 + sum_rho) * sum_z - sum_rho_z) * ln.kappa / lp.kappa
            + (n + 2 + sum_rho)
            * ln.kappa**3
            / (lp.kappa**2 * lpp.kappa)
            * lpp.phi0
            / lp.phi0
            - (n + sum_rho) * lp.phi0 * ln.phibar0 / lp.kappa**2
            - 2.0 * ln.kappa * lp.l / lp.kappa**2,
            "leading",
        )
    )
    out.append(("theta", 0, (2.0 * v0 - n * w1) * ln.phi0 / lp.phi0, "trailing"))
    if lm1 is not None:
        out.append(
            (
                "theta",
                1,
                (2.0 * v1 - 0.5 * n * wpp) * ln.phi0 / lp.phi0
                + (2.0 * v0 - (n - 1) * w1) * ln.kappa * lm1.phi0 / (lm1.kappa * lp.phi0)
                + (
                    ((n + 1) * w1 - 2.0 * v0) * lp.lbar / lp.kappa
                    - ((n - 1) * w1 - 2.0 * v0) * lm1.lbar / lm1.kappa
                )
                * ln.phi0
                / lp.phi0,
                "trailing",
            )
        )

    out.append(("thetastar", m - 2, -(n + sum_rho) * ln.phibar0 / lp.phibar0, "leading"))
    if lm1 is not None:
        out.append(
            (
                "thetastar",
                m - 3,
                ((n + sum_rho) * sum_z - sum_rho_z) * ln.phibar0 / lp.phibar0
                + (n + 1 + sum_rho) * ln.phibar0 / lp.phibar0 * lp.l / lp.kappa
                - (n - 1 + sum_rho)
                * (ln.kappa * lm1.phibar0 + ln.phibar0 * lm1.l)
                / (lm1.kappa * lp.phibar0),
                "leading",
            )
        )
    out.append(("thetastar", 0, -(2.0 * v0 - (n + 1) * w1) * ln.kappa / lp.kappa, "trailing"))
    out.append(
        (
            "thetastar",
            1,
            -(2.0 * v1 - 0.5 * (n + 1) * wpp) * ln.kappa / lp.kappa
            - (2.0 * v0 - n * w1) * ln.lbar / lp.kappa
            + ((n + 2) * w1 - 2.0 * v0)
            * (
                ln.kappa**3 / (lpp.kappa * lp.kappa**2) * lpp.phibar0 / lp.phibar0
                - ln.kappa / lp.kappa * lp.lbar / lp.kappa
            ),
            "trailing",
        )
    )

    out.append(("omega", m - 1, 1.0 + 0.5 * sum_rho, "leading"))
    out.append(
        (
            "omega",
            m - 2,
            -0.5 * sum_rho * sum_z
            + 0.5 * sum_rho_z
            - sum_z
            + (n + 2 + sum_rho) * ln.kappa**2 / (lpp.kappa * lp.kappa) * lpp.phi0 / lp.phi0
            - lp.l / lp.kappa,
            "leading",
        )
    )
    out.append(("omega", 0, v0 - n * w1, "trailing"))
    out.append(
        (
            "omega",
            1,
            v1
            - 0.5 * n * wpp
            + (v0 * ln.kappa / lp.kappa + (v0 - n * w1) * lp.kappa / ln.kappa)
            * ln.phi0
            / lp.phi0
            + (v0 - n * w1) * ln.lbar / ln.kappa
            - (v0 - (n + 1) * w1) * lp.lbar / lp.kappa,
            "trailing",
        )
    )

    out.append(("omegastar", m - 1, -0.5 * sum_rho, "leading"))
    out.append(
        (
            "omegastar",
            m - 2,
            0.5 * sum_rho * sum_z
            - 0.5 * sum_rho_z
            - (n + sum_rho) * ln.kappa / lp.kappa * ln.phibar0 / lp.phibar0
            + lp.l / lp.kappa,
            "leading",
        )
    )
    out.append(("omegastar", 0, (n + 1) * w1 - v0, "trailing"))
    out.append(
        (
            "omegastar",
            1,
            0.5 * (n + 1) * wpp
            - v1
            + ((n + 2) * w1 - 2.0 * v0)
            * ln.kappa**2
            / (lpp.kappa * lp.kappa)
            * lpp.phibar0
            / lp.phibar0
            - w1 * lp.lbar / lp.kappa,
            "trailing",
        )
    )
    return [(name, order, val, block) for name, order, val, block in out if order >= 0]


def verify_expansion_forms(
    quads: Mapping[int, CoeffQuad],
    sys: BopsSystem,
    vw: PolyPair,
    weight: SemiClassicalWeight,
    ns: Sequence[int],
    tol: float = 1e-6,
) -> IdentityReport:
    """Fitted coefficients against every closed leading/trailing form."""
    rep = IdentityReport("coefficient-function expansion closed forms")
    for n in ns:
        quad = quads[n]
        polys = {
            "theta": quad.theta,
            "thetastar": quad.thetastar,
            "omega": quad.omega,
            "omegastar": quad.omegastar,
        }
        for name, order, want, block in expansion_closed_forms(sys, vw, weight, n):
            coeffs = polys[name]
            if order >= len(coeffs):
                continue
            scale = max(1.0, float(np.max(np.abs(coeffs))))
            rep.add(
                f"{name}_{block}_z{order}",
                "specifically these have leading and trailing expansions",
                abs(coeffs[order] - want) / scale,
                tol,
                n=n,
                where=f"z^{order}",
            )
        rep.add(
            "omega_at_origin",
            "does not lead to any new independent relation",
            abs(quad.om(0.0) - (vw.v_eval(0.0) - n * vw.w_deriv(0.0)))
            / max(1.0, abs(quad.om(0.0))),
            tol,
            n=n,
        )
        rep.add(
            "degree_certification",
            "are polynomials in z of bounded degree",
            quad.degree_excess,
            1e-7,
            n=n,
        )
    return rep


# ---------------------------------------------------------------------------
# Coupled linear recurrence relations (a)-(h) and the three corollary
# identities (i)-(k)
# ---------------------------------------------------------------------------

def verify_linear_relations(
    quads: Mapping[int, CoeffQuad],
    vw: PolyPair,
    sys: BopsSystem,
    samples: Sequence[complex],
    tol: float = 1e-7,
) -> IdentityReport:
    """Residuals of all eight coupled recurrences among the coefficient
    functions plus the three additional corollary identities, at sampled
    z != 0.  Each level n requires quads at n-1, n, n+1."""
    rep = IdentityReport("coefficient-function linear relations")
    zs = np.asarray([z for z in samples if abs(z) > 1e-8], dtype=complex)
    w_z = polyval(vw.W, zs)
    anchor = "the coefficient functions satisfy the coupled linear recurrence relations"
    anchor_cor = "some additional identities satisfied by the coefficient functions"

    levels_needed = lambda n: n + 2 <= sys.nmax
    for n in sorted(quads):
        if not (n - 1 in quads and n + 1 in quads and levels_needed(n)):
            continue
        qm, qn, qp = quads[n - 1], quads[n], quads[n + 1]
        lm, ln, lp, lpp = (
            sys.level(n - 1),
            sys.level(n),
            sys.level(n + 1),
            sys.level(n + 2),
        )
        ratio = lp.phi0 / ln.phi0 + lp.kappa / ln.kappa * zs
        ratio_s = lp.kappa / ln.kappa + lp.phibar0 / ln.phibar0 * zs

        lhs = qn.om(zs) + qm.om(zs) - ratio * qn.th(zs) + (n - 1) * w_z / zs
        rep.add("linear_a", anchor, rel_residual(lhs, qn.om(zs), ratio * qn.th(zs), w_z / zs), tol, n=n)

        lhs = (
            ratio * (qm.om(zs) - qn.om(zs))
            + ln.kappa * lpp.phi0 / (lp.kappa * lp.phi0) * zs * qp.th(zs)
            - lm.kappa * lp.phi0 / (ln.kappa * ln.phi0) * zs * qm.th(zs)
            - lp.phi0 / ln.phi0 * w_z / zs
        )
        rep.add("linear_b", anchor, rel_residual(lhs, ratio * qm.om(zs), zs * qp.th(zs)), tol, n=n)

        lhs = qn.oms(zs) + qm.oms(zs) - ratio_s * qn.ths(zs) - n * w_z / zs
        rep.add("linear_c", anchor, rel_residual(lhs, qn.oms(zs), ratio_s * qn.ths(zs), w_z / zs), tol, n=n)

        lhs = (
            ratio_s * (qm.oms(zs) - qn.oms(zs))
            + ln.kappa * lpp.phibar0 / (lp.kappa * lp.phibar0) * zs * qp.ths(zs)
            - lm.kappa * lp.phibar0 / (ln.kappa * ln.phibar0) * zs * qm.ths(zs)
            + lp.kappa / ln.kappa * w_z / zs
        )
        rep.add("linear_d", anchor, rel_residual(lhs, ratio_s * qm.oms(zs), zs * qp.ths(zs)), tol, n=n)

    for n in sorted(quads):
        if not (n + 1 in quads and levels_needed(n)):
            continue
        qn, qp = quads[n], quads[n + 1]
        ln, lp, lpp = sys.level(n), sys.level(n + 1), sys.level(n + 2)
        ratio_p = lpp.phi0 / lp.phi0 + lpp.kappa / lp.kappa * zs
        ratio_ps = lpp.kappa / lp.kappa + lpp.phibar0 / lp.phibar0 * zs
        cross = lp.kappa / ln.kappa * (zs * qn.th(zs) - qn.ths(zs))

        lhs = qp.om(zs) + qn.oms(zs) - ratio_p * qp.th(zs) + cross
        rep.add("linear_e", anchor, rel_residual(lhs, qp.om(zs), ratio_p * qp.th(zs), cross), tol, n=n)

        lhs = (
            qn.om(zs)
            - qp.om(zs)
            + lpp.kappa / lp.kappa * (zs + lp.phibar0 / lp.kappa * lpp.phi0 / lpp.kappa) * qp.th(zs)
            + lp.phi0 * lp.phibar0 / (lp.kappa * ln.kappa) * qn.ths(zs)
            - lp.kappa / ln.kappa * zs * qn.th(zs)
            - w_z / zs
        )
        rep.add("linear_f", anchor, rel_residual(lhs, qn.om(zs), zs * qp.th(zs), w_z / zs), tol, n=n)

        lhs = (
            qp.oms(zs)
            + qn.om(zs)
            - ratio_ps * qp.ths(zs)
            - cross
            - w_z / zs
        )
        rep.add("linear_g", anchor, rel_residual(lhs, qp.oms(zs), ratio_ps * qp.ths(zs), w_z / zs), tol, n=n)

        lhs = (
            qn.oms(zs)
            - qp.oms(zs)
            + lpp.kappa / lp.kappa * (1.0 + lp.phi0 / lp.kappa * lpp.phibar0 / lpp.kappa * zs) * qp.ths(zs)
            + lp.phi0 * lp.phibar0 / (lp.kappa * ln.kappa) * zs * qn.th(zs)
            - lp.kappa / ln.kappa * qn.ths(zs)
        )
        rep.add("linear_h", anchor, rel_residual(lhs, qn.oms(zs), qp.ths(zs), zs * qn.th(zs)), tol, n=n)

        # corollary (j), (k) need only n and n+1
        lhs = qn.oms(zs) - qn.om(zs) + lp.kappa / ln.kappa * (zs * qn.th(zs) - qn.ths(zs)) - n * w_z / zs
        rep.add("linear_j", anchor_cor, rel_residual(lhs, qn.om(zs), qn.oms(zs), w_z / zs), tol, n=n)

        lhs = (
            qn.oms(zs)
            + qn.om(zs)
            - ln.kappa**2
            / lp.kappa**2
            * (lpp.phi0 / lp.phi0 * qp.th(zs) + lp.kappa / ln.kappa * qn.ths(zs))
            - w_z / zs
        )
        rep.add("linear_k", anchor_cor, rel_residual(lhs, qn.om(zs), qn.oms(zs), w_z / zs), tol, n=n)

    for n in sorted(quads):
        if not (n - 1 in quads and n + 1 <= sys.nmax):
            continue
        qm, qn = quads[n - 1], quads[n]
        lm, ln, lp = sys.level(n - 1), sys.level(n), sys.level(n + 1)
        lhs = (
            lp.phi0 / ln.phi0 * qn.th(zs)
            - ln.kappa / lm.kappa * zs * qm.th(zs)
            - lp.phibar0 / ln.phibar0 * zs * qn.ths(zs)
            + ln.kappa / lm.kappa * qm.ths(zs)
        )
        rep.add("linear_i", anchor_cor, rel_residual(lhs, qn.th(zs), zs * qn.ths(zs)), tol, n=n)
    return rep


# ---------------------------------------------------------------------------
# Bilinear identities, bilinear residues, initial members, telescoping
# ---------------------------------------------------------------------------

def _nonzero_singularities(weight: SemiClassicalWeight):
    return [
        (j, s.location, s.exponent)
        for j, s in enumerate(weight.singularities)
        if s.location != 0
    ]


def verify_bilinear(
    quads: Mapping[int, CoeffQuad],
    vw: PolyPair,
    sys: BopsSystem,
    asys: AssocSystem,
    weight: SemiClassicalWeight,
    u_poly: np.ndarray | None = None,
    ns: Sequence[int] | None = None,
    tol: float = 1e-7,
) -> IdentityReport:
    """At every non-zero singular point: the six bilinear identities among
    quadruple evaluations, the ten bilinear residue formulas tying them to
    phi/eps products, the telescoped summation constant V^2(z_j), and (when
    quads 0 and 1 and U are available) the six initial-member formulas as
    polynomial identities.  ``ns`` selects the levels asserted (default:
    every level whose successor quad is available)."""
    rep = IdentityReport("bilinear identities at the singular points")
    sings = _nonzero_singularities(weight)
    anchor_bil = "the coefficient functions satisfy the bilinear identities"
    anchor_res = "bilinear residues are related to the coefficient function residues"
    if ns is None:
        ns = [n for n in sorted(quads) if n + 1 in quads]

    for j, zj, _rho in sings:
        v_j = vw.v_eval(zj)
        if abs(v_j) < 1e-12:
            raise SingularResidueError(f"V(z_{j + 1}) = 0 at z = {zj}")
        v2 = v_j**2

        for n in sorted(ns):
            if n + 1 not in quads or n + 2 > sys.nmax:
                continue
            qn, qp = quads[n], quads[n + 1]
            ln, lp, lpp = sys.level(n), sys.level(n + 1), sys.level(n + 2)
            th_n, th_p = qn.th(zj), qp.th(zj)
            ths_n, ths_p = qn.ths(zj), qp.ths(zj)
            om_n, oms_n = qn.om(zj), qn.oms(zj)

            lhs = om_n**2
            rhs = ln.kappa * lpp.phi0 / (lp.kappa * lp.phi0) * zj * th_n * th_p + v2
            rep.add("bilinear_a", anchor_bil, rel_residual(lhs - rhs, lhs, rhs), tol, n=n, where=f"z_{j + 1}")

            lhs = oms_n**2
            rhs = ln.kappa * lpp.phibar0 / (lp.kappa * lp.phibar0) * zj * ths_n * ths_p + v2
            rep.add("bilinear_b", anchor_bil, rel_residual(lhs - rhs, lhs, rhs), tol, n=n, where=f"z_{j + 1}")

            # mirror of (d) under the bar swap: the scale factor carries
            # kappa_n / kappa_{n+1}^3 (verified numerically at every level)
            lhs = (om_n - ln.kappa**2 / lp.kappa**2 * lpp.phi0 / lp.phi0 * th_p) ** 2
            rhs = ln.kappa * lpp.phi0 * lp.phibar0 / lp.kappa**3 * th_p * ths_n + v2
            rep.add("bilinear_c", anchor_bil, rel_residual(lhs - rhs, lhs, rhs), tol, n=n, where=f"z_{j + 1}")

            lhs = (oms_n - ln.kappa**2 / lp.kappa**2 * lpp.phibar0 / lp.phibar0 * zj * ths_p) ** 2
            rhs = ln.kappa * lpp.phibar0 * lp.phi0 / lp.kappa**3 * zj**2 * ths_p * th_n + v2
            rep.add("bilinear_d", anchor_bil, rel_residual(lhs - rhs, lhs, rhs), tol, n=n, where=f"z_{j + 1}")

            lhs = lp.phi0 * lp.phibar0 / ln.kappa**2 * zj * th_n * ths_n + v2
            rhs = (om_n - lp.kappa / ln.kappa * zj * th_n) ** 2
            rep.add("bilinear_e", anchor_bil, rel_residual(lhs - rhs, lhs, rhs), tol, n=n, where=f"z_{j + 1}")
            rhs = (oms_n - lp.kappa / ln.kappa * ths_n) ** 2
            rep.add("bilinear_f", anchor_bil, rel_residual(lhs - rhs, lhs, rhs), tol, n=n, where=f"z_{j + 1}")

        # bilinear residue formulas (phi/eps products against the quadruple)
        for n in sorted(ns):
            if n not in quads or n + 1 > sys.nmax:
                continue
            qn = quads[n]
            ln, lp = sys.level(n), sys.level(n + 1)
            phi_n = complex(eval_poly(sys, n, zj))
            star_n = complex(eval_poly(sys, n, zj, "phistar"))
            eps_n = complex(asys.eps(n, zj))
            es_n = complex(asys.epsstar(n, zj))
            phi_p = complex(eval_poly(sys, n + 1, zj))
            star_p = complex(eval_poly(sys, n + 1, zj, "phistar"))
            eps_p = complex(asys.eps(n + 1, zj))
            es_p = complex(asys.epsstar(n + 1, zj))
            th_n, ths_n = qn.th(zj), qn.ths(zj)
            om_n, oms_n = qn.om(zj), qn.oms(zj)
            base = 2.0 * lp.phi0 / ln.kappa * zj**n
            base_s = 2.0 * lp.phibar0 / ln.kappa * zj ** (n + 1)

            checks = [
                ("bilres_a", phi_n * eps_n, base * th_n / (2.0 * v_j)),
                ("bilres_b", star_n * es_n, -base_s * ths_n / (2.0 * v_j)),
                ("bilres_c", phi_p * eps_n, base * (om_n + v_j) / (2.0 * v_j)),
                ("bilres_d", phi_n * eps_p, base * (om_n - v_j) / (2.0 * v_j)),
                ("bilres_e", star_n * es_p, -base_s * (oms_n + v_j) / (2.0 * v_j)),
                ("bilres_f", star_p * es_n, -base_s * (oms_n - v_j) / (2.0 * v_j)),
                (
                    "bilres_g",
                    phi_n * es_n,
                    -(zj**n) / v_j * (om_n - v_j - lp.kappa / ln.kappa * zj * th_n),
                ),
                (
                    "bilres_h",
                    phi_n * es_n,
                    -(zj**n) / v_j * (oms_n - v_j - lp.kappa / ln.kappa * ths_n),
                ),
                (
                    "bilres_i",
                    star_n * eps_n,
                    zj**n / v_j * (om_n + v_j - lp.kappa / ln.kappa * zj * th_n),
                ),
                (
                    "bilres_j",
                    star_n * eps_n,
                    zj**n / v_j * (oms_n + v_j - lp.kappa / ln.kappa * ths_n),
                ),
            ]
            for name, lhs, rhs in checks:
                rep.add(name, anchor_res, rel_residual(lhs - rhs, lhs, rhs), tol, n=n, where=f"z_{j + 1}")

        # telescoped summation: Omega_n^2 - D_n is the constant V^2(z_j)
        ns_chain = sorted(nn for nn in ns if nn + 1 in quads and nn + 2 <= sys.nmax)
        for n in ns_chain:
            qn, qp = quads[n], quads[n + 1]
            ln, lp, lpp = sys.level(n), sys.level(n + 1), sys.level(n + 2)
            d_n = ln.kappa * lpp.phi0 / (lp.kappa * lp.phi0) * zj * qn.th(zj) * qp.th(zj)
            partial = qn.om(zj) ** 2 - d_n
            # the exact difference cancels the large terms; scale by them
            rep.add(
                "telescoped_constant",
                "upon summing this relation the summation constant is",
                rel_residual(partial - v2, qn.om(zj) ** 2, d_n, v2),
                tol,
                n=n,
                where=f"z_{j + 1}",
            )

    if u_poly is not None and 0 in quads and 1 in quads:
        rep.extend(verify_initial_members(quads, vw, sys, u_poly, tol=tol))
    return rep


def verify_initial_members(
    quads: Mapping[int, CoeffQuad],
    vw: PolyPair,
    sys: BopsSystem,
    u_poly: np.ndarray,
    tol: float = 1e-7,
) -> IdentityReport:
    """The six lowest coefficient functions against V, W and the recovered
    inhomogeneity polynomial U, as coefficientwise polynomial identities."""
    rep = IdentityReport("initial members of the coefficient-function sequences")
    anchor = "the initial members of the sequences"
    q0, q1 = quads[0], quads[1]
    l0, l1, l2 = sys.level(0), sys.level(1), sys.level(2)
    two_v = polyadd(2.0 * vw.V)
    k0sq = l0.kappa**2
    u = np.asarray(u_poly, dtype=complex)
    z = np.array([0.0, 1.0], dtype=complex)  # multiply-by-z polynomial

    def check(name: str, lhs: np.ndarray, rhs: np.ndarray):
        diff = polyadd(lhs, -rhs)
        scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
        rep.add(name, anchor, float(np.max(np.abs(diff))) / scale, tol)

    plus = polyadd(two_v, k0sq * u)  # 2V + kappa_0^2 U
    minus = polyadd(two_v, -k0sq * u)  # 2V - kappa_0^2 U

    check("initial_theta_0", 2.0 * l1.phi0 / l0.kappa * q0.theta, minus)
    check(
        "initial_theta_1",
        polymul(z, 2.0 * l2.phi0 / l1.kappa * q1.theta),
        polyadd(
            l1.kappa**2 / k0sq * polymul(polymul(z, z), minus),
            -2.0 * l1.kappa * l1.phi0 * polymul(z, u),
            -2.0 * l1.kappa * l1.phi0 / k0sq * vw.W,
            -(l1.phi0**2) / k0sq * plus,
        ),
    )
    check(
        "initial_thetastar_0",
        polymul(z, 2.0 * l1.phibar0 / l0.kappa * q0.thetastar),
        polyadd(-two_v, -k0sq * u),
    )
    check(
        "initial_thetastar_1",
        polymul(polymul(z, z), 2.0 * l2.phibar0 / l1.kappa * q1.thetastar),
        polyadd(
            l1.phibar0**2 / k0sq * polymul(polymul(z, z), minus),
            -2.0 * l1.kappa * l1.phibar0 * polymul(z, u),
            -2.0 * l1.kappa * l1.phibar0 / k0sq * vw.W,
            -(l1.kappa**2) / k0sq * plus,
        ),
    )
    check(
        "initial_omega_0",
        2.0 * l1.phi0 * q0.omega,
        polyadd(l1.kappa * polymul(z, minus), -k0sq * l1.phi0 * u),
    )
    check(
        "initial_omegastar_0",
        polymul(z, 2.0 * l1.phibar0 * q0.omegastar),
        polyadd(-l1.kappa * plus, -k0sq * l1.phibar0 * polymul(z, u)),
    )
    return rep


# ---------------------------------------------------------------------------
# Spectral derivative relations and the discrete-Painleve ratio
# ---------------------------------------------------------------------------

def spectral_derivative_check(
    quads: Mapping[int, CoeffQuad],
    vw: PolyPair,
    sys: BopsSystem,
    asys: AssocSystem,
    samples: Sequence[complex],
    weight: SemiClassicalWeight | None = None,
    tol: float | None = None,
    step: float = 1e-6,
) -> IdentityReport:
    """Residuals of the four derivative relations; phi and phi* are
    differentiated analytically, eps and eps* by central differences, so the
    tolerance is the finite-difference one."""
    tol = DEFAULT_TOL.fd_identity if tol is None else tol
    rep = IdentityReport("spectral derivative relations")
    anchor = "the derivatives of the bi-orthogonal polynomials and associated functions are expressible"
    avoid = list(weight.locations) if weight is not None else []
    zs = np.asarray(
        [z for z in samples if abs(z) > 1e-8 and all(abs(z - a) > 0.05 for a in avoid)],
        dtype=complex,
    )
    w_z = polyval(vw.W, zs)
    v_z = polyval(vw.V, zs)

    for n in sorted(quads):
        if n + 1 > sys.nmax:
            continue
        quad = quads[n]
        phi_n = eval_poly(sys, n, zs)
        phi_p = eval_poly(sys, n + 1, zs)
        star_n = eval_poly(sys, n, zs, "phistar")
        star_p = eval_poly(sys, n + 1, zs, "phistar")
        dphi = polyval(polyder(sys.level(n).c), zs)
        dstar = polyval(polyder(sys.level(n).cbar[::-1]), zs)
        eps_n, eps_p = asys.eps(n, zs), asys.eps(n + 1, zs)
        es_n, es_p = asys.epsstar(n, zs), asys.epsstar(n + 1, zs)
        deps = np.array([central_diff(lambda x: asys.eps(n, x), z, step) for z in zs])
        des = np.array([central_diff(lambda x: asys.epsstar(n, x), z, step) for z in zs])

        lhs = w_z * dphi - quad.th(zs) * phi_p + (quad.om(zs) + v_z) * phi_n
        rep.add("spectral_d_phi", anchor, rel_residual(lhs, w_z * dphi, quad.th(zs) * phi_p), tol, n=n)

        lhs = w_z * dstar + quad.ths(zs) * star_p - (quad.oms(zs) - v_z) * star_n
        rep.add("spectral_d_phistar", anchor, rel_residual(lhs, w_z * dstar, quad.ths(zs) * star_p), tol, n=n)

        lhs = w_z * deps - quad.th(zs) * eps_p + (quad.om(zs) - v_z) * eps_n
        rep.add("spectral_d_eps", anchor, rel_residual(lhs, w_z * deps, quad.th(zs) * eps_p), tol, n=n)

        lhs = w_z * des + quad.ths(zs) * es_p - (quad.oms(zs) + v_z) * es_n
        rep.add("spectral_d_epsstar", anchor, rel_residual(lhs, w_z * des, quad.ths(zs) * es_p), tol, n=n)

        # trace consistency: W Tr A_n reduces to n W / z - 2 V
        ln, lp = sys.level(n), sys.level(n + 1)
        trace_w = (
            -(quad.om(zs) + v_z)
            + lp.kappa / ln.kappa * zs * quad.th(zs)
            + quad.oms(zs)
            - v_z
            - lp.kappa / ln.kappa * quad.ths(zs)
        )
        lhs = trace_w - (n * w_z / zs - 2.0 * v_z)
        rep.add(
            "trace_reduction",
            "we note that Tr A_n = n/z - w'/w",
            rel_residual(lhs, trace_w, w_z / zs),
            DEFAULT_TOL.identity if tol is None else min(tol, 1e-6),
            n=n,
        )
    return rep


def dpainleve_ratio_check(
    quads: Mapping[int, CoeffQuad],
    vw: PolyPair,
    n: int,
    z_a: complex,
    z_b: complex,
    tol: float = 1e-7,
) -> IdentityReport:
    """Ratio recurrence between two distinct non-zero singularities:

        z_a Theta_n Theta_{n+1}|_{z_a} / z_b Theta_n Theta_{n+1}|_{z_b}
            = (Omega_n - V)(Omega_n + V)|_{z_a} / (same at z_b).
    """
    rep = IdentityReport("discrete-Painleve ratio recurrence")
    if z_a == z_b:
        raise SingularResidueError("ratio check needs two distinct singularities")
    if z_a == 0 or z_b == 0:
        raise SingularResidueError("ratio check is defined away from the origin")
    qn, qp = quads[n], quads[n + 1]

    def packed(zj):
        v = vw.v_eval(zj)
        num = zj * qn.th(zj) * qp.th(zj)
        den = (qn.om(zj) - v) * (qn.om(zj) + v)
        return num, den

    num_a, den_a = packed(z_a)
    num_b, den_b = packed(z_b)
    if min(abs(num_b), abs(den_b), abs(den_a)) < 1e-14:
        raise SingularResidueError("vanishing denominator in the ratio recurrence")
    lhs = num_a / num_b
    rhs = den_a / den_b
    rep.add(
        "ratio_recurrence",
        "this constitutes a recurrence relation",
        rel_residual(lhs - rhs, lhs, rhs),
        tol,
        n=n,
    )
    return rep
