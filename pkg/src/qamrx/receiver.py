"""Adaptive displacement-feedback receiver model for one detection trial.

The symbol interval is split into N equal slices.  In each slice the
incoming coherent state is displaced by a local field chosen to null the
currently most probable hypothesis, the displaced field is detected by an
on/off or photon-number-resolving detector, and the hypothesis posteriors
are updated by Bayes' rule; the posterior maximizer picks the next local
field and, after the last slice, the symbol decision.

Device imperfections: detector quantum efficiency ``eta`` and dark-count
mean ``nu`` per slice, beam-splitter transmittance ``tau``, and the mode
match factor ``xi`` between signal and local oscillator (``xi = 1`` is
perfect interference).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, pdtrc, xlogy

from .constellation import Constellation

_KINDS = ("on_off", "pnrd_finite", "pnrd_infinite")


class DegenerateEvidenceError(ValueError):
    """The observed outcome has zero probability under every hypothesis."""


@dataclass(frozen=True)
class DetectorModel:
    """Photon-counting detector: kind, quantum efficiency, dark-count mean.

    ``on_off`` reports only zero-vs-some counts and is statistically
    identical to a finite-resolution detector with ``n_pnr = 0``;
    ``pnrd_finite`` resolves counts up to ``n_pnr`` and lumps everything
    above into a saturated outcome; ``pnrd_infinite`` resolves every count.
    """

    kind: str
    eta: float = 1.0
    nu: float = 0.0
    n_pnr: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError("eta must lie in [0, 1]")
        if not (math.isfinite(self.nu) and self.nu >= 0.0):
            raise ValueError("nu must be finite and nonnegative")
        if self.kind == "pnrd_finite":
            if self.n_pnr is None or self.n_pnr < 0:
                raise ValueError("pnrd_finite needs an integer n_pnr >= 0")
        elif self.n_pnr is not None:
            raise ValueError(f"n_pnr is only meaningful for pnrd_finite, not {self.kind}")

    @classmethod
    def on_off(cls, eta: float = 1.0, nu: float = 0.0) -> "DetectorModel":
        return cls(kind="on_off", eta=eta, nu=nu)

    @classmethod
    def pnrd(cls, n_pnr: int, eta: float = 1.0, nu: float = 0.0) -> "DetectorModel":
        return cls(kind="pnrd_finite", eta=eta, nu=nu, n_pnr=n_pnr)

    @classmethod
    def pnrd_inf(cls, eta: float = 1.0, nu: float = 0.0) -> "DetectorModel":
        return cls(kind="pnrd_infinite", eta=eta, nu=nu)

    @property
    def resolution(self) -> int | None:
        """Highest exactly-resolved count; None when unbounded."""
        if self.kind == "on_off":
            return 0
        return self.n_pnr  # None for pnrd_infinite


@dataclass(frozen=True)
class ReceiverParams:
    """Receiver configuration: slice count and optical imperfections."""

    n_partitions: int
    detector: DetectorModel
    tau: float = 1.0
    xi: float = 1.0

    def __post_init__(self):
        if self.n_partitions < 1:
            raise ValueError("n_partitions must be >= 1")
        if not (0.0 <= self.tau <= 1.0):
            raise ValueError("tau must lie in [0, 1]")
        if not (0.0 <= self.xi <= 1.0):
            raise ValueError("xi must lie in [0, 1]")


@dataclass(frozen=True)
class CountOutcome:
    """A photon-counting result: a resolved count n, or saturation (n above the detector's range)."""

    n: int | None = None

    def __post_init__(self):
        if self.n is not None and self.n < 0:
            raise ValueError("count must be nonnegative")

    @property
    def is_saturated(self) -> bool:
        return self.n is None

    @classmethod
    def exact(cls, n: int) -> "CountOutcome":
        return cls(n=n)


SATURATED = CountOutcome(None)


@dataclass(frozen=True)
class CountPmf:
    """Outcome distribution of one detection window.

    ``mu`` is the Poisson mean (dark counts plus detected intensity);
    ``resolution`` is the highest resolved count (None = unbounded).
    """

    mu: float
    resolution: int | None

    def prob(self, outcome: CountOutcome) -> float:
        if outcome.is_saturated:
            if self.resolution is None:
                raise ValueError("an unbounded-resolution detector never saturates")
            return float(pdtrc(self.resolution, self.mu))
        n = outcome.n
        if self.resolution is not None and n > self.resolution:
            return 0.0
        return float(np.exp(xlogy(n, self.mu) - self.mu - gammaln(n + 1)))

    def outcomes(self) -> list[CountOutcome]:
        """Ordered support (finite resolutions only)."""
        if self.resolution is None:
            raise ValueError("unbounded-resolution support is infinite")
        return [CountOutcome.exact(n) for n in range(self.resolution + 1)] + [SATURATED]

    def probs(self) -> np.ndarray:
        """Probabilities aligned with ``outcomes()``; sums to 1."""
        k = self.resolution
        if k is None:
            raise ValueError("unbounded-resolution support is infinite")
        ns = np.arange(k + 1)
        body = np.exp(xlogy(ns, self.mu) - self.mu - gammaln(ns + 1))
        return np.append(body, pdtrc(k, self.mu))

    def sample(self, u: float) -> CountOutcome:
        """Inverse-CDF draw: counts in increasing order, then saturation."""
        if not 0.0 <= u < 1.0:
            raise ValueError("u must lie in [0, 1)")
        p = math.exp(-self.mu)
        cum = p
        n = 0
        while True:
            if u < cum:
                return CountOutcome.exact(n)
            if self.resolution is not None and n >= self.resolution:
                return SATURATED
            if p == 0.0 and n > self.mu:
                # Remaining tail mass is below float resolution.
                return CountOutcome.exact(n)
            n += 1
            p *= self.mu / n
            cum += p


def slice_amplitude(c: Constellation, m: int, n_partitions: int) -> complex:
    """Per-slice amplitude phi_m / sqrt(N); N slices carry the symbol energy."""
    return complex(c.points[m]) / math.sqrt(n_partitions)


def displaced_intensity(phi_slice: complex, beta: complex, tau: float, xi: float) -> float:
    """Mean photon number after displacing ``phi_slice`` by local field ``beta``.

    (1 - xi) * tau * |phi|^2  +  xi * |sqrt(tau) * phi - beta|^2;
    the first term is the non-interfering (mode-mismatched) signal power.
    """
    phi_slice = complex(phi_slice)
    beta = complex(beta)
    direct = abs(phi_slice) ** 2
    interfered = abs(math.sqrt(tau) * phi_slice - beta) ** 2
    return (1.0 - xi) * tau * direct + xi * interfered


def local_field(c: Constellation, m_star: int, tau: float, n_partitions: int) -> complex:
    """Nulling local field sqrt(tau) * phi_{m*} / sqrt(N) for the next slice."""
    return math.sqrt(tau) * slice_amplitude(c, m_star, n_partitions)


def count_pmf(intensity: float, det: DetectorModel) -> CountPmf:
    """Outcome distribution for a detected field of mean intensity ``intensity``.

    The Poisson mean is ``nu + eta * intensity``; on/off detectors resolve
    only the zero-count outcome, finite PNRDs resolve counts up to their
    ``n_pnr`` with the rest aggregated as saturation.
    """
    if intensity < 0:
        raise ValueError("intensity must be nonnegative")
    return CountPmf(mu=det.nu + det.eta * intensity, resolution=det.resolution)


def sample_count(pmf: CountPmf, u: float) -> CountOutcome:
    """Inverse-CDF sample of ``pmf`` from a uniform variate ``u`` in [0, 1)."""
    return pmf.sample(u)


def hypothesis_means(c: Constellation, beta0: complex, params: ReceiverParams) -> np.ndarray:
    """Per-hypothesis detection means for one slice, in product-factored form.

    ``beta0`` is the local field before the beam-splitter scaling (the
    applied field is sqrt(tau) * beta0), so tau factors out of the
    interference term and the means become
    ``nu + (eta * tau) * ((1 - xi) |phi_s|^2 + xi |phi_s - beta0|^2)``.
    eta and tau then enter only through their product, exactly.
    """
    det = params.detector
    phis = c.points / math.sqrt(params.n_partitions)
    base = (1.0 - params.xi) * np.abs(phis) ** 2 + params.xi * np.abs(phis - beta0) ** 2
    return det.nu + (det.eta * params.tau) * base


def likelihoods(
    c: Constellation,
    beta: complex,
    outcome: CountOutcome,
    params: ReceiverParams,
) -> np.ndarray:
    """Probability of ``outcome`` under each symbol hypothesis.

    ``beta`` must be the local field actually applied during the slice.
    """
    det = params.detector
    out = np.empty(c.M)
    for m in range(c.M):
        phi_s = slice_amplitude(c, m, params.n_partitions)
        intensity = displaced_intensity(phi_s, beta, params.tau, params.xi)
        out[m] = count_pmf(intensity, det).prob(outcome)
    return out


def bayes_update(priors: np.ndarray, like: np.ndarray) -> np.ndarray:
    """Posterior ~ prior * likelihood, normalized.

    Raises:
        DegenerateEvidenceError: when the joint mass is zero (outcome
            impossible under every hypothesis).
    """
    joint = np.asarray(priors, dtype=float) * np.asarray(like, dtype=float)
    total = joint.sum()
    if not total > 0.0:
        raise DegenerateEvidenceError("outcome has zero probability under all hypotheses")
    return joint / total


def map_decision(posteriors: np.ndarray) -> int:
    """Index of the largest posterior; ties go to the lowest index."""
    return int(np.argmax(posteriors))


@dataclass(frozen=True)
class TrialState:
    """Receiver state after one slice of a trial."""

    slice_index: int
    beta: complex
    priors: np.ndarray
    posteriors: np.ndarray
    m_star: int


def trial_trace(
    c: Constellation, sent: int, params: ReceiverParams, rng: np.random.Generator
) -> list[TrialState]:
    """Run one trial and return the per-slice receiver states.

    Slice j applies the local field that nulls the current best hypothesis
    (hypothesis 0 before any data), draws a photon count from the true
    symbol's statistics, and Bayes-updates the hypothesis probabilities.
    """
    if not 0 <= sent < c.M:
        raise ValueError("sent symbol index out of range")
    states = []
    priors = c.priors.copy()
    m_star = 0
    for j in range(1, params.n_partitions + 1):
        beta = local_field(c, m_star, params.tau, params.n_partitions)
        true_slice = slice_amplitude(c, sent, params.n_partitions)
        true_intensity = displaced_intensity(true_slice, beta, params.tau, params.xi)
        outcome = count_pmf(true_intensity, params.detector).sample(rng.random())
        posteriors = bayes_update(priors, likelihoods(c, beta, outcome, params))
        m_star = map_decision(posteriors)
        states.append(
            TrialState(
                slice_index=j,
                beta=beta,
                priors=priors,
                posteriors=posteriors,
                m_star=m_star,
            )
        )
        priors = posteriors
    return states


def simulate_trial(
    c: Constellation, sent: int, params: ReceiverParams, rng: np.random.Generator
) -> int:
    """Decision index of one feedback trial with true symbol ``sent``."""
    return trial_trace(c, sent, params, rng)[-1].m_star
