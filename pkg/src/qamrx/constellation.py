"""Coherent-state signal sets and their Fock-space representations.

A coherent state is described by a complex field amplitude ``phi`` whose
squared magnitude is the mean photon number of the state.  This module
builds rectangular QAM signal sets, evaluates inner products between
coherent states in closed form, and expands states / density operators in
the photon-number (Fock) basis up to a truncation dimension chosen from the
Poisson photon statistics.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

# Default fractional trace mass allowed outside the truncated Fock space.
DEFAULT_EPSILON = 1e-8

_PRIOR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Constellation:
    """An ordered set of coherent-state amplitudes with prior probabilities.

    Attributes:
        points: complex amplitudes of the M signal states.
        priors: prior probability of each symbol (sums to 1).
        alpha: positive scale parameter of the set (grid half-spacing for
            rectangular QAM; a bookkeeping label for hand-built sets).
    """

    points: np.ndarray
    priors: np.ndarray
    alpha: float

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex)
        priors = np.asarray(self.priors, dtype=float)
        if points.ndim != 1 or points.size == 0:
            raise ValueError("points must be a nonempty 1-D sequence")
        if priors.shape != points.shape:
            raise ValueError("priors must match points in length")
        if not np.all(np.isfinite(points.view(float))):
            raise ValueError("constellation points must be finite")
        if np.any(priors < 0):
            raise ValueError("priors must be nonnegative")
        if abs(priors.sum() - 1.0) > _PRIOR_TOL:
            raise ValueError(f"priors must sum to 1, got {priors.sum()!r}")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be a positive finite real")
        points.setflags(write=False)
        priors.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "priors", priors)

    @property
    def M(self) -> int:
        return self.points.size

    def has_uniform_priors(self, tol: float = _PRIOR_TOL) -> bool:
        return bool(np.max(np.abs(self.priors - 1.0 / self.M)) <= tol)


def qam_points(m: int, alpha: float) -> Constellation:
    """Build the rectangular m-ary QAM constellation with scale ``alpha``.

    Points are ``alpha * (p + 1j*q)`` with p, q ranging over the odd
    integers -(sqrt(m)-1), ..., sqrt(m)-1, ordered row-major (p ascending
    outer, q ascending inner), with uniform priors 1/m.

    Raises:
        ValueError: if m is not an even perfect square or alpha <= 0.
    """
    side = math.isqrt(m)
    if side * side != m:
        raise ValueError(
            f"m={m} is not a perfect square; rectangular QAM needs "
            "m = (2k)^2 (e.g. 4 or 16)"
        )
    if side % 2 != 0:
        raise ValueError(
            f"m={m} has odd side length {side}; the odd-integer grid "
            "requires an even side (m = 4, 16, 36, ...)"
        )
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    points = np.array([alpha * (p + 1j * q) for p in levels for q in levels])
    priors = np.full(m, 1.0 / m)
    return Constellation(points=points, priors=priors, alpha=float(alpha))


def mean_photon_number(c: Constellation) -> float:
    """Prior-weighted mean photon number sum_m P_m |phi_m|^2."""
    return float(np.sum(c.priors * np.abs(c.points) ** 2))


def alpha_for_ns(m: int, ns: float) -> float:
    """Scale parameter giving the m-ary QAM grid mean photon number ``ns``.

    Inverse of ``mean_photon_number(qam_points(m, alpha))``; lets sweeps be
    parameterized by signal energy instead of grid spacing.
    """
    if ns < 0:
        raise ValueError("ns must be nonnegative")
    unit = mean_photon_number(qam_points(m, 1.0))
    return math.sqrt(ns / unit)


def coherent_overlap(a: complex, b: complex) -> complex:
    """Inner product <a|b> of two coherent states.

    Evaluates exp(conj(a)*b - |a|^2/2 - |b|^2/2) in the equivalent form
    exp(-|a-b|^2/2 + 1j*Im(conj(a)*b)), whose magnitude is guaranteed <= 1
    in floating point.
    """
    a = complex(a)
    b = complex(b)
    d = a - b
    re = -0.5 * (d.real * d.real + d.imag * d.imag)
    im = a.real * b.imag - a.imag * b.real
    return cmath.exp(complex(re, im))


def fock_vector(phi: complex, dim: int) -> np.ndarray:
    """Photon-number expansion of the coherent state ``phi``.

    coeffs[n] = exp(-|phi|^2/2) * phi^n / sqrt(n!), built by the recurrence
    coeffs[n] = coeffs[n-1] * phi / sqrt(n) so no factorial overflows.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    phi = complex(phi)
    coeffs = np.zeros(dim, dtype=complex)
    coeffs[0] = math.exp(-0.5 * (phi.real * phi.real + phi.imag * phi.imag))
    for n in range(1, dim):
        coeffs[n] = coeffs[n - 1] * phi / math.sqrt(n)
    return coeffs


def density_matrix(phi: complex, dim: int) -> np.ndarray:
    """Truncated density matrix |phi><phi| in the Fock basis.

    Entry (i, j) is exp(-|phi|^2) * phi^i * conj(phi)^j / sqrt(i! j!), i.e.
    the outer product of ``fock_vector(phi, dim)`` with itself; rank 1 and
    positive semidefinite, with trace approaching 1 as dim grows.
    """
    v = fock_vector(phi, dim)
    return np.outer(v, v.conj())


def truncation_dim(c: Constellation, epsilon: float = DEFAULT_EPSILON) -> int:
    """Smallest Fock dimension keeping trace mass > 1 - epsilon for every state.

    The diagonal of each |phi_m><phi_m| is a Poisson distribution with mean
    |phi_m|^2; the shared dimension is the max over constellation points of
    the per-state cutoff, so all operators live on one space.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    dim = 1
    for phi in c.points:
        mu = abs(phi) ** 2
        p = math.exp(-mu)
        cum = p
        d = 1
        while not cum > 1.0 - epsilon:
            p *= mu / d
            cum += p
            d += 1
        dim = max(dim, d)
    return dim
