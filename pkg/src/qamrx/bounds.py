"""Reference error-rate curves for coherent-state constellations.

Three benchmarks are computed for a signal set:

* the heterodyne standard quantum limit (closed form for square QAM),
* the square-root-measurement (SRM) error rate from the Gram matrix of the
  signal states, and
* the Helstrom limit, the minimum error probability over all quantum
  measurements, found by a fixed-point iteration over POVMs with a dual
  witness as the acceptance certificate.

The Helstrom optimization runs on the linear span of the signal vectors
(dimension M) rather than the full truncated Fock space; the returned POVM
and certificate are embedded back into, and verified on, the full space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .constellation import (
    DEFAULT_EPSILON,
    Constellation,
    coherent_overlap,
    fock_vector,
    mean_photon_number,
    qam_points,
    truncation_dim,
)

# Relative eigenvalue cutoff for pseudo-inverses on numerically rank-deficient
# Gram / normalizer matrices.
_RANK_CUTOFF = 1e-14


class NumericalPSDError(ValueError):
    """A matrix required to be positive semidefinite has a clearly negative eigenvalue."""


class HelstromConvergenceError(RuntimeError):
    """Fixed-point iteration did not reach the certificate tolerance.

    Carries the best iterate found in ``solution``.
    """

    def __init__(self, message: str, solution: "HelstromSolution"):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class GramDecomposition:
    """Eigendecomposition of a Gram matrix together with its square root."""

    gram: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sqrt: np.ndarray


@dataclass(frozen=True)
class HelstromSolution:
    """Optimal-measurement solve result.

    Attributes:
        povm: the M measurement operators on the truncated Fock space.
        lagrange: the operator sym(sum_m P_m rho_m Pi_m); at the optimum it
            majorizes every weighted state, and 1 - trace gives the error.
        p_err: average error probability of the returned POVM.
        gap: worst dual-feasibility violation (most negative eigenvalue of
            lagrange - P_m rho_m over m, clipped at 0).
        iterations: fixed-point update steps performed.
    """

    povm: tuple
    lagrange: np.ndarray
    p_err: float
    gap: float
    iterations: int


def gram_matrix(c: Constellation) -> np.ndarray:
    """M x M matrix of pairwise coherent-state inner products.

    Hermitian with unit diagonal; entry (i, j) is <phi_i|phi_j>.
    """
    m = c.M
    g = np.eye(m, dtype=complex)
    for i in range(m):
        for j in range(i + 1, m):
            g[i, j] = coherent_overlap(c.points[i], c.points[j])
            g[j, i] = g[i, j].conjugate()
    return g


def sqrt_gram(g: np.ndarray) -> GramDecomposition:
    """Hermitian square root via eigendecomposition.

    Eigenvalues in [-1e-10, 0) are treated as rounding noise and clamped to
    zero before the square root.

    Raises:
        NumericalPSDError: if any eigenvalue is below -1e-8.
    """
    g = np.asarray(g, dtype=complex)
    w, q = np.linalg.eigh(g)
    if w.min() < -1e-8:
        raise NumericalPSDError(
            f"matrix is not PSD: min eigenvalue {w.min():.3e}"
        )
    sqrt = (q * np.sqrt(np.clip(w, 0.0, None))) @ q.conj().T
    return GramDecomposition(gram=g, eigenvalues=w, eigenvectors=q, sqrt=sqrt)


def _require_uniform_priors(c: Constellation, what: str):
    if not c.has_uniform_priors():
        raise ValueError(f"{what} is defined here for equal priors only")


def srm_confusion(c: Constellation) -> np.ndarray:
    """Conditional probabilities P(decide j | sent i) under the SRM.

    Row i holds |(G^{1/2})_{ji}|^2 over j; rows sum to 1 because the Gram
    diagonal is 1 for unit-norm states.
    """
    _require_uniform_priors(c, "the square-root measurement")
    s = sqrt_gram(gram_matrix(c)).sqrt
    return np.abs(s.T) ** 2


def srm_error_rate(c: Constellation) -> float:
    """Average symbol error rate of the square-root measurement."""
    _require_uniform_priors(c, "the square-root measurement")
    s = sqrt_gram(gram_matrix(c)).sqrt
    return float(1.0 - np.mean(np.abs(np.diag(s)) ** 2))


def _inv_sqrt_psd(a: np.ndarray) -> np.ndarray:
    """Pseudo-inverse square root of a Hermitian PSD matrix."""
    w, q = np.linalg.eigh(a)
    cutoff = w.max() * _RANK_CUTOFF if w.size and w.max() > 0 else 0.0
    inv = np.where(w > cutoff, 1.0 / np.sqrt(np.clip(w, cutoff, None)), 0.0)
    return (q * inv) @ q.conj().T


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def helstrom_error_rate(
    c: Constellation,
    tol: float = 1e-6,
    max_iter: int = 5000,
    epsilon: float = DEFAULT_EPSILON,
) -> HelstromSolution:
    """Minimum-error measurement for the constellation by fixed-point iteration.

    Starting from the SRM POVM, repeatedly applies the update
    ``Pi_m <- S w_m Pi_m w_m S`` with ``w_m = P_m rho_m`` and ``S`` the
    pseudo-inverse square root of ``sum_k w_k Pi_k w_k``, which preserves
    positivity and completeness.  Iteration stops when the dual witness
    ``Gamma = sym(sum_m w_m Pi_m)`` satisfies
    ``min-eig(Gamma - w_m) >= -tol`` for every m, certifying optimality up
    to ``tol``; the error probability is then ``1 - trace(Gamma)``.

    Args:
        tol: dual-feasibility certificate tolerance.
        max_iter: update-step budget.
        epsilon: Fock truncation accuracy for the state representations.

    Raises:
        HelstromConvergenceError: certificate not met within ``max_iter``;
            the exception carries the last iterate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = c.M
    dim = truncation_dim(c, epsilon)
    vecs = np.column_stack([fock_vector(p, dim) for p in c.points])  # dim x M

    # Orthonormal basis of the signal span; all states are (numerically)
    # supported there, so the optimization is an M x M problem.
    basis, _ = np.linalg.qr(vecs)
    coords = basis.conj().T @ vecs  # M x M state coordinates
    w_ops = [c.priors[k] * np.outer(coords[:, k], coords[:, k].conj()) for k in range(m)]

    # SRM initialization: measurement vectors V G^{-1/2} in span coordinates.
    gram = _sym(vecs.conj().T @ vecs)
    srm_vecs = coords @ _inv_sqrt_psd(gram)
    povm = [np.outer(srm_vecs[:, k], srm_vecs[:, k].conj()) for k in range(m)]

    def witness(povm_list):
        gamma = _sym(sum(w @ p for w, p in zip(w_ops, povm_list)))
        viol = max(-np.linalg.eigvalsh(gamma - w).min() for w in w_ops)
        return gamma, max(viol, 0.0)

    iterations = 0
    gamma, gap = witness(povm)
    best = (gap, [p.copy() for p in povm], gamma, iterations)
    while gap > tol and iterations < max_iter:
        norm = _sym(sum(w @ p @ w for w, p in zip(w_ops, povm)))
        s = _inv_sqrt_psd(norm)
        povm = [s @ w @ p @ w @ s for w, p in zip(w_ops, povm)]
        iterations += 1
        gamma, gap = witness(povm)
        if gap < best[0]:
            best = (gap, [p.copy() for p in povm], gamma, iterations)

    if gap > tol:
        gap, povm, gamma, iterations = best

    # Embed back into the truncated Fock space; the orthogonal complement of
    # the span carries no signal weight, so it is split evenly to keep the
    # POVM complete.
    complement = (np.eye(dim) - basis @ basis.conj().T) / m
    povm_full = tuple(_sym(basis @ p @ basis.conj().T) + complement for p in povm)
    rho_full = [
        c.priors[k] * np.outer(vecs[:, k], vecs[:, k].conj()) for k in range(m)
    ]
    gamma_full = _sym(sum(r @ p for r, p in zip(rho_full, povm_full)))
    gap_full = max(
        max(-np.linalg.eigvalsh(gamma_full - r).min() for r in rho_full), 0.0
    )
    solution = HelstromSolution(
        povm=povm_full,
        lagrange=gamma_full,
        p_err=float(1.0 - np.trace(gamma_full).real),
        gap=gap_full,
        iterations=iterations,
    )
    if gap_full > tol:
        raise HelstromConvergenceError(
            f"certificate violation {gap_full:.3e} > tol {tol:.1e} "
            f"after {iterations} iterations",
            solution,
        )
    return solution


def sql_error_rate(m: int, ns: float) -> float:
    """Heterodyne-detection error rate for square m-ary QAM at mean photon number ns.

    Models ideal dual-quadrature (heterodyne) detection: the outcome is the
    true amplitude plus circular Gaussian noise of variance 1/2 per
    quadrature, decided by nearest-neighbor rectangles.  Each quadrature is
    then an independent PAM decision with error
    ``p1 = (L-1)/L * erfc(alpha)``, L the grid side, and the symbol error
    is ``1 - (1 - p1)^2``.
    """
    if m not in (4, 16):
        raise ValueError(f"unsupported modulation order {m}; expected 4 or 16")
    if ns < 0:
        raise ValueError("ns must be nonnegative")
    side = 4 if m == 16 else 2
    unit_energy = mean_photon_number(qam_points(m, 1.0))
    alpha = np.sqrt(ns / unit_energy)
    p1 = (side - 1) / side * erfc(alpha)
    return float(1.0 - (1.0 - p1) ** 2)
