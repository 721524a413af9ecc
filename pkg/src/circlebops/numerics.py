"""Shared numerical helpers: polynomial arithmetic on ascending complex
coefficient vectors, least-squares fits, central differences, FFT Laurent
coefficient extraction and deterministic sample-point draws."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import GeometryError

ArrayLike = Sequence[complex] | np.ndarray


def as_poly(coeffs: ArrayLike) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    return c if c.size else np.zeros(1, dtype=complex)


def polyval(coeffs: ArrayLike, z):
    """Evaluate an ascending-coefficient polynomial by Horner's scheme."""
    return npoly.polyval(np.asarray(z, dtype=complex), as_poly(coeffs))


def polyder(coeffs: ArrayLike) -> np.ndarray:
    return as_poly(npoly.polyder(as_poly(coeffs)))


def polymul(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    return as_poly(npoly.polymul(as_poly(a), as_poly(b)))


def polyadd(*terms: ArrayLike) -> np.ndarray:
    out = np.zeros(max(len(as_poly(t)) for t in terms), dtype=complex)
    for t in terms:
        t = as_poly(t)
        out[: len(t)] += t
    return out


def polyfromroots(roots: Iterable[complex]) -> np.ndarray:
    roots = list(roots)
    if not roots:
        return np.ones(1, dtype=complex)
    return as_poly(npoly.polyfromroots(np.asarray(roots, dtype=complex)))


def principal_sqrt(value: complex) -> complex:
    """Square root with Re >= 0, tie broken towards Im >= 0."""
    root = complex(np.sqrt(complex(value)))
    if root.real < 0 or (root.real == 0 and root.imag < 0):
        root = -root
    return root


def vandermonde_fit(points: np.ndarray, values: np.ndarray, degree: int):
    """Least-squares polynomial fit; returns (coeffs, relative residual)."""
    pts = np.asarray(points, dtype=complex)
    vals = np.asarray(values, dtype=complex)
    vmat = np.vander(pts, degree + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(vmat, vals, rcond=None)
    misfit = np.linalg.norm(vmat @ coeffs - vals)
    scale = max(float(np.linalg.norm(vals)), 1e-300)
    return as_poly(coeffs), float(misfit / scale)


def central_diff(f: Callable, z: complex, step: float = 1e-6) -> complex:
    """Central difference f'(z) with step h = step * (1 + |z|).

    f must be analytic near z; the real-direction difference then approximates
    the complex derivative to O(h^2).
    """
    h = step * (1.0 + abs(z))
    return (f(z + h) - f(z - h)) / (2.0 * h)


def laurent_coefficients(
    f: Callable,
    radius: float,
    orders: Sequence[int],
    oversample: int = 4,
) -> dict[int, complex]:
    """Laurent coefficients of f on the circle |z| = radius by FFT.

    f is sampled at P uniformly spaced points with P >= oversample * (max
    requested order magnitude + 1), rounded up to a power of two.  The
    coefficient of z^k is FFT_k / (P * radius^k).
    """
    kmax = max(abs(int(k)) for k in orders) + 1
    p = 1
    while p < max(oversample * kmax, 64):
        p *= 2
    theta = 2.0 * np.pi * np.arange(p) / p
    zs = radius * np.exp(1j * theta)
    samples = np.asarray([f(z) for z in zs], dtype=complex)
    hat = np.fft.fft(samples) / p
    out: dict[int, complex] = {}
    for k in orders:
        out[int(k)] = complex(hat[int(k) % p] * radius ** (-int(k)))
    return out


def circle_samples(
    rng: np.random.Generator,
    count: int,
    radius: float,
    avoid: Sequence[complex] = (),
    min_distance: float = 0.1,
    max_tries: int = 200,
) -> np.ndarray:
    """Draw ``count`` points on |z| = radius keeping min_distance from the
    points in ``avoid``.  Deterministic for a fixed generator state."""
    out: list[complex] = []
    tries = 0
    while len(out) < count:
        if tries > max_tries * count:
            raise GeometryError(
                f"cannot place {count} samples on |z|={radius} away from {list(avoid)}"
            )
        tries += 1
        z = radius * np.exp(2j * np.pi * rng.random())
        if all(abs(z - a) >= min_distance for a in avoid):
            out.append(complex(z))
    return np.asarray(out, dtype=complex)


def rel_residual(mismatch, *terms) -> float:
    """|mismatch| scaled by the largest constituent term (floor 1).

    Identities are evaluated as displayed, so the natural scale is the size of
    the terms being cancelled; the floor keeps 0 = 0 checks meaningful.
    """
    scale = 1.0
    for t in terms:
        scale = max(scale, float(np.max(np.abs(t))) if np.ndim(t) else abs(t))
    return float(np.max(np.abs(mismatch)) / scale)


def slope_fit(f: Callable, r1: float, r2: float, angles: int = 32) -> float:
    """Mean-log growth exponent between circles |z| = r1 and |z| = r2.

    Averaging log|f| over each circle removes the O(1/z) harmonic correction
    of a leading-order monomial, giving the order to O((c/r)^2).
    """
    theta = 2.0 * np.pi * (np.arange(angles) + 0.5) / angles

    def mean_log(r: float) -> float:
        vals = np.asarray([f(r * np.exp(1j * t)) for t in theta], dtype=complex)
        mags = np.abs(vals)
        if np.any(mags == 0.0):
            return -np.inf
        return float(np.mean(np.log(mags)))

    m1, m2 = mean_log(r1), mean_log(r2)
    if not np.isfinite(m1) or not np.isfinite(m2):
        return -np.inf
    return (m2 - m1) / np.log(r2 / r1)
