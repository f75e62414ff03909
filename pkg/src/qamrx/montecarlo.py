"""Symbol-error-rate estimation by repeated receiver trials.

`estimate_ser` runs a vectorized trial engine over fixed-size chunks, each
chunk driven by its own counter-based RNG substream derived from the master
seed and the chunk index.  Results are therefore bit-reproducible for a
given (seed, trials) pair no matter how many worker threads execute the
chunks.  `exact_ser` enumerates every count sequence of small instances
through the scalar receiver operations and serves as the independent oracle
for the engine.  `run_sweep` evaluates a grid of operating points and joins
the analytic reference curves.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, pdtrc, xlogy

from .bounds import helstrom_error_rate, sql_error_rate, srm_error_rate
from .constellation import Constellation, alpha_for_ns, qam_points
from .receiver import (
    SATURATED,
    CountOutcome,
    DegenerateEvidenceError,
    DetectorModel,
    ReceiverParams,
    likelihoods,
    local_field,
    map_decision,
)

# Trials per RNG substream; fixed so that worker scheduling cannot change
# which stream a trial draws from.
CHUNK_TRIALS = 16384

_IDEAL = {"eta": 1.0, "nu": 0.0, "tau": 1.0, "xi": 1.0}
_BOUND_NAMES = ("sql", "srm", "helstrom")


class PathBudgetError(ValueError):
    """Exact enumeration would visit more outcome paths than allowed."""


@dataclass(frozen=True)
class SerEstimate:
    """Monte Carlo symbol-error-rate estimate."""

    errors: int
    trials: int
    ser: float
    std_err: float
    seed: int


def detector_from_token(token: str, eta: float = 1.0, nu: float = 0.0) -> DetectorModel:
    """Build a detector from a CLI-style token: onoff | pnrd:<k> | pnrd:inf."""
    if token == "onoff":
        return DetectorModel.on_off(eta=eta, nu=nu)
    if token.startswith("pnrd:"):
        arg = token[len("pnrd:"):]
        if arg == "inf":
            return DetectorModel.pnrd_inf(eta=eta, nu=nu)
        try:
            k = int(arg)
        except ValueError:
            raise ValueError(f"bad detector token {token!r}") from None
        if k < 0:
            raise ValueError(f"photon-number resolution must be >= 0, got {k}")
        return DetectorModel.pnrd(k, eta=eta, nu=nu)
    raise ValueError(f"bad detector token {token!r}; expected onoff, pnrd:<k> or pnrd:inf")


def _resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("QRX_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(chunk_index,))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_errors(
    c: Constellation,
    params: ReceiverParams,
    seed: int,
    chunk_index: int,
    size: int,
    sent_fixed: int | None,
) -> int:
    """Simulate one chunk of trials, all slices vectorized across trials."""
    det = params.detector
    m = c.M
    n = params.n_partitions
    xi = params.xi
    gain = det.eta * params.tau  # single product: eta and tau are interchangeable
    phis = c.points / math.sqrt(n)
    abs2 = np.abs(phis) ** 2
    resolution = det.resolution

    rng = _chunk_rng(seed, chunk_index)
    if sent_fixed is None:
        sent = rng.integers(0, m, size)
    else:
        sent = np.full(size, sent_fixed)
    trial_idx = np.arange(size)
    post = np.tile(c.priors, (size, 1))
    beta0 = np.full(size, phis[0])  # local field before the sqrt(tau) scaling
    m_star = np.zeros(size, dtype=np.intp)
    for _ in range(n):
        base = (1.0 - xi) * abs2[None, :] + xi * np.abs(phis[None, :] - beta0[:, None]) ** 2
        mu = det.nu + gain * base
        mu_true = mu[trial_idx, sent]
        if resolution is None:
            counts = rng.poisson(mu_true)
            like = np.exp(xlogy(counts[:, None], mu) - mu - gammaln(counts + 1)[:, None])
        else:
            u = rng.random(size)
            prob = np.exp(-mu_true)
            cum = prob.copy()
            counts = np.zeros(size, dtype=np.int64)
            for i in range(1, resolution + 1):
                counts += u >= cum
                prob *= mu_true / i
                cum += prob
            counts += u >= cum  # resolution+1 encodes saturation
            saturated = counts > resolution
            like = np.exp(xlogy(counts[:, None], mu) - mu - gammaln(counts + 1)[:, None])
            if saturated.any():
                like[saturated] = pdtrc(resolution, mu[saturated])
        post *= like
        norm = post.sum(axis=1, keepdims=True)
        if not np.all(norm > 0.0):
            raise DegenerateEvidenceError(
                "zero posterior mass in the simulation engine"
            )
        post /= norm
        m_star = np.argmax(post, axis=1)
        beta0 = phis[m_star]
    return int(np.count_nonzero(m_star != sent))


def estimate_ser(
    c: Constellation,
    params: ReceiverParams,
    trials: int,
    seed: int,
    sent: int | None = None,
    workers: int | None = None,
) -> SerEstimate:
    """Monte Carlo symbol error rate over ``trials`` receiver trials.

    Sent symbols are drawn uniformly unless ``sent`` pins them (diagnostic
    mode).  Trials are processed in fixed chunks with per-chunk RNG
    substreams keyed on (seed, chunk index), so the result depends only on
    (seed, trials), never on ``workers`` (default: QRX_THREADS or all CPUs).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if sent is not None and not 0 <= sent < c.M:
        raise ValueError("sent symbol index out of range")
    n_chunks = (trials + CHUNK_TRIALS - 1) // CHUNK_TRIALS
    sizes = [
        min(CHUNK_TRIALS, trials - i * CHUNK_TRIALS) for i in range(n_chunks)
    ]

    def job(i: int) -> int:
        return _chunk_errors(c, params, seed, i, sizes[i], sent)

    n_workers = min(_resolve_workers(workers), n_chunks)
    if n_workers <= 1:
        errors = sum(job(i) for i in range(n_chunks))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            errors = sum(pool.map(job, range(n_chunks)))
    ser = errors / trials
    return SerEstimate(
        errors=errors,
        trials=trials,
        ser=ser,
        std_err=math.sqrt(ser * (1.0 - ser) / trials),
        seed=seed,
    )


def exact_ser(c: Constellation, params: ReceiverParams, max_paths: int = 100_000) -> float:
    """Exact receiver symbol error rate by enumerating all count sequences.

    Walks the outcome tree slice by slice through the scalar receiver
    operations, carrying for every branch the receiver posterior and the
    branch probability under each candidate true symbol; the error is the
    summed probability mass of leaves whose decision differs from the true
    symbol.  Only detectors with a finite outcome alphabet can be
    enumerated, and the path count (n_pnr + 2)^N must stay within
    ``max_paths``.
    """
    det = params.detector
    if det.resolution is None:
        raise ValueError("exact enumeration needs a finite-resolution detector")
    n_outcomes = det.resolution + 2
    n_paths = n_outcomes ** params.n_partitions
    if n_paths > max_paths:
        raise PathBudgetError(
            f"{n_paths} outcome paths exceed the budget of {max_paths}"
        )

    outcome_alphabet = [
        CountOutcome.exact(i) for i in range(det.resolution + 1)
    ] + [SATURATED]
    error_mass = 0.0
    base_priors = c.priors

    def walk(slice_j: int, m_star: int, rec_priors: np.ndarray, path_w: np.ndarray):
        nonlocal error_mass
        beta = local_field(c, m_star, params.tau, params.n_partitions)
        for outcome in outcome_alphabet:
            like = likelihoods(c, beta, outcome, params)
            branch_w = path_w * like
            if branch_w.sum() == 0.0:
                continue  # impossible under every true symbol
            joint = rec_priors * like
            post = joint / joint.sum()
            decision = map_decision(post)
            if slice_j == params.n_partitions:
                keep = np.ones(c.M, dtype=bool)
                keep[decision] = False
                error_mass += float(np.sum(base_priors[keep] * branch_w[keep]))
            else:
                walk(slice_j + 1, decision, post, branch_w)

    walk(1, 0, base_priors.copy(), np.ones(c.M))
    return error_mass


@dataclass(frozen=True)
class SweepSpec:
    """A grid of receiver operating points to estimate.

    One row is produced per (ns, partitions, detector, axis value).  When
    ``axis`` names one of the four imperfections, its value list is swept
    while the other three stay ideal; without an axis the base values
    (which may be non-ideal) apply to every row.
    """

    modulation: int = 16
    ns_grid: tuple = ()
    partitions: tuple = (10,)
    detectors: tuple = ("onoff",)
    eta: float = 1.0
    nu: float = 0.0
    tau: float = 1.0
    xi: float = 1.0
    axis: str | None = None
    axis_values: tuple = ()
    trials: int = 10**6
    seed: int = 0
    bounds: tuple = ("sql", "srm")

    def __post_init__(self):
        object.__setattr__(self, "ns_grid", tuple(float(x) for x in self.ns_grid))
        object.__setattr__(self, "partitions", tuple(int(x) for x in self.partitions))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        object.__setattr__(self, "axis_values", tuple(float(x) for x in self.axis_values))
        object.__setattr__(self, "bounds", tuple(self.bounds))
        if self.modulation not in (4, 16):
            raise ValueError("modulation order must be 4 or 16")
        if any(ns <= 0 for ns in self.ns_grid):
            raise ValueError("mean photon numbers must be positive")
        if any(n < 1 for n in self.partitions):
            raise ValueError("partition counts must be >= 1")
        if not self.detectors:
            raise ValueError("at least one detector is required")
        for token in self.detectors:
            detector_from_token(token)  # validates
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        unknown = set(self.bounds) - set(_BOUND_NAMES)
        if unknown:
            raise ValueError(f"unknown bounds {sorted(unknown)}")
        if self.axis is not None:
            if self.axis not in _IDEAL:
                raise ValueError(f"axis must be one of {sorted(_IDEAL)}")
            if not self.axis_values:
                raise ValueError("an axis sweep needs axis_values")
            for name, ideal in _IDEAL.items():
                if name != self.axis and getattr(self, name) != ideal:
                    raise ValueError(
                        f"{name} must stay at its ideal value {ideal} while "
                        f"sweeping {self.axis}"
                    )
        elif self.axis_values:
            raise ValueError("axis_values given without an axis")


@dataclass(frozen=True)
class SweepRow:
    """One sweep grid point with its estimate and reference-curve values."""

    modulation: str
    ns: float
    alpha: float
    n_partitions: int
    detector: str
    n_pnr: int | None
    eta: float
    nu: float
    tau: float
    xi: float
    trials: int
    errors: int
    ser: float
    std_err: float
    sql: float | None
    srm: float | None
    helstrom: float | None
    seed: int


def _row_seed(master: int, point_index: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(point_index,))
    return int(ss.generate_state(1, np.uint64)[0])


def run_sweep(spec: SweepSpec, progress=None, workers: int | None = None) -> list:
    """Estimate every grid point of ``spec`` and attach bound columns.

    Reference-curve values are computed once per mean photon number and
    joined onto each row.  Row order and all numbers are fully determined
    by the SweepSpec, including its seed.
    """
    axis_values = spec.axis_values if spec.axis is not None else (None,)
    rows = []
    bound_cache: dict = {}
    const_cache: dict = {}
    point_index = 0
    for ns in spec.ns_grid:
        if ns not in const_cache:
            alpha = alpha_for_ns(spec.modulation, ns)
            const_cache[ns] = (alpha, qam_points(spec.modulation, alpha))
        alpha, constellation = const_cache[ns]
        if ns not in bound_cache:
            bound_cache[ns] = {
                "sql": sql_error_rate(spec.modulation, ns) if "sql" in spec.bounds else None,
                "srm": srm_error_rate(constellation) if "srm" in spec.bounds else None,
                "helstrom": (
                    helstrom_error_rate(constellation).p_err
                    if "helstrom" in spec.bounds
                    else None
                ),
            }
        ref = bound_cache[ns]
        for n_partitions in spec.partitions:
            for token in spec.detectors:
                for value in axis_values:
                    imp = {
                        "eta": spec.eta,
                        "nu": spec.nu,
                        "tau": spec.tau,
                        "xi": spec.xi,
                    }
                    if spec.axis is not None:
                        imp[spec.axis] = value
                    det = detector_from_token(token, eta=imp["eta"], nu=imp["nu"])
                    params = ReceiverParams(
                        n_partitions=n_partitions,
                        detector=det,
                        tau=imp["tau"],
                        xi=imp["xi"],
                    )
                    seed = _row_seed(spec.seed, point_index)
                    est = estimate_ser(
                        constellation, params, spec.trials, seed, workers=workers
                    )
                    row = SweepRow(
                        modulation=f"{spec.modulation}qam",
                        ns=ns,
                        alpha=alpha,
                        n_partitions=n_partitions,
                        detector=token,
                        n_pnr=det.n_pnr,
                        eta=imp["eta"],
                        nu=imp["nu"],
                        tau=imp["tau"],
                        xi=imp["xi"],
                        trials=spec.trials,
                        errors=est.errors,
                        ser=est.ser,
                        std_err=est.std_err,
                        sql=ref["sql"],
                        srm=ref["srm"],
                        helstrom=ref["helstrom"],
                        seed=seed,
                    )
                    rows.append(row)
                    if progress is not None:
                        progress(row)
                    point_index += 1
    return rows


_COMMON_GRID = tuple(float(x) for x in range(2, 31, 2))
_PRESETS = {
    "fig3": dict(
        axis="eta",
        axis_values=(1.0, 0.9, 0.8, 0.7),
        partitions=(10, 15, 16, 20),
        detectors=("onoff", "pnrd:inf"),
        ns_grid=_COMMON_GRID,
    ),
    "fig4": dict(
        axis="nu",
        axis_values=(0.0, 1e-4, 1e-3, 1e-2),
        partitions=(10, 15, 16, 20),
        detectors=("onoff", "pnrd:inf"),
        ns_grid=_COMMON_GRID,
    ),
    "fig5": dict(
        axis="tau",
        axis_values=(1.0, 0.99, 0.95, 0.9),
        partitions=(10, 15, 16, 20),
        detectors=("onoff", "pnrd:inf"),
        ns_grid=_COMMON_GRID,
    ),
    "fig6": dict(
        axis="xi",
        axis_values=(1.0, 0.999, 0.995, 0.99),
        partitions=(10, 15, 16, 20),
        detectors=("onoff", "pnrd:inf"),
        ns_grid=_COMMON_GRID,
    ),
    "fig7": dict(
        eta=0.723,
        nu=2.7e-5,
        tau=0.99,
        xi=0.995,
        partitions=(10,),
        detectors=("pnrd:0", "pnrd:1", "pnrd:2", "pnrd:3", "pnrd:inf"),
        ns_grid=tuple(float(x) for x in range(5, 31)),
    ),
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def figure_preset(
    name: str,
    trials: int | None = None,
    ns_grid: tuple | None = None,
    seed: int | None = None,
    bounds: tuple | None = None,
) -> SweepSpec:
    """Canned sweep configurations for the standard result grids.

    fig3/fig4/fig5/fig6 sweep quantum efficiency, dark counts,
    transmittance and mode match respectively over partition counts
    (10, 15, 16, 20) with on/off and unbounded-PNRD detectors; fig7 fixes a
    realistic imperfection set and compares photon-number resolutions 0-3
    and unbounded at 10 partitions.
    """
    if name not in _PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    kwargs = dict(_PRESETS[name])
    if trials is not None:
        kwargs["trials"] = trials
    if ns_grid is not None:
        kwargs["ns_grid"] = tuple(ns_grid)
    if seed is not None:
        kwargs["seed"] = seed
    if bounds is not None:
        kwargs["bounds"] = tuple(bounds)
    return SweepSpec(modulation=16, **kwargs)
