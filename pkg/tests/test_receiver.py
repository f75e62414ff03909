import math

import numpy as np
import pytest

from qamrx.constellation import Constellation, qam_points
from qamrx.receiver import (
    SATURATED,
    CountOutcome,
    DegenerateEvidenceError,
    DetectorModel,
    ReceiverParams,
    bayes_update,
    count_pmf,
    displaced_intensity,
    hypothesis_means,
    likelihoods,
    local_field,
    map_decision,
    sample_count,
    simulate_trial,
    slice_amplitude,
    trial_trace,
)


class FixedUniforms:
    """Minimal rng stand-in feeding a prescribed uniform sequence."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def ideal_params(n, detector=None):
    return ReceiverParams(
        n_partitions=n, detector=detector or DetectorModel.on_off(), tau=1.0, xi=1.0
    )


class TestDetectorModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            DetectorModel(kind="magic")
        with pytest.raises(ValueError):
            DetectorModel.on_off(eta=1.5)
        with pytest.raises(ValueError):
            DetectorModel.on_off(nu=-1e-3)
        with pytest.raises(ValueError):
            DetectorModel.pnrd(-1)
        with pytest.raises(ValueError):
            DetectorModel(kind="pnrd_infinite", n_pnr=3)

    def test_resolution(self):
        assert DetectorModel.on_off().resolution == 0
        assert DetectorModel.pnrd(3).resolution == 3
        assert DetectorModel.pnrd_inf().resolution is None


class TestSliceAmplitude:
    def test_values(self):
        c = Constellation(points=np.array([2.0 + 0j]), priors=np.array([1.0]), alpha=2.0)
        assert slice_amplitude(c, 0, 4) == 1.0
        c2 = Constellation(points=np.array([1 + 1j]), priors=np.array([1.0]), alpha=1.0)
        assert slice_amplitude(c2, 0, 1) == 1 + 1j

    def test_energy_conservation(self):
        c = qam_points(16, 1.3)
        for n in (1, 4, 9):
            for m in range(c.M):
                assert n * abs(slice_amplitude(c, m, n)) ** 2 == pytest.approx(
                    abs(c.points[m]) ** 2, rel=1e-15
                )


class TestDisplacedIntensity:
    def test_perfect_nulling(self):
        for tau in (1.0, 0.9, 0.5):
            phi = 0.8 - 0.3j
            beta = math.sqrt(tau) * phi
            assert displaced_intensity(phi, beta, tau, 1.0) == pytest.approx(0.0, abs=1e-30)

    def test_no_mode_match_ignores_displacement(self):
        phi = 1.1 + 0.4j
        tau = 0.93
        for beta in (0.0, 1.0, -2.0 + 1j):
            assert displaced_intensity(phi, beta, tau, 0.0) == pytest.approx(
                tau * abs(phi) ** 2, rel=1e-15
            )

    def test_realistic_point_value(self):
        assert displaced_intensity(1.0, 0.0, 0.99, 0.995) == pytest.approx(0.99, abs=1e-15)

    def test_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            val = displaced_intensity(
                complex(rng.normal(), rng.normal()),
                complex(rng.normal(), rng.normal()),
                rng.uniform(),
                rng.uniform(),
            )
            assert val >= 0.0


class TestLocalField:
    def test_identity_case(self):
        c = Constellation(points=np.array([0.5 + 0.5j]), priors=np.array([1.0]), alpha=1.0)
        assert local_field(c, 0, 1.0, 1) == 0.5 + 0.5j

    def test_scaling(self):
        c = Constellation(points=np.array([2.0 + 0j]), priors=np.array([1.0]), alpha=2.0)
        assert local_field(c, 0, 0.81, 4) == pytest.approx(0.9, rel=1e-15)

    def test_self_nulling_intensity(self):
        c = qam_points(4, 1.0)
        for tau in (1.0, 0.7):
            for k in range(4):
                beta = local_field(c, k, tau, 3)
                intensity = displaced_intensity(slice_amplitude(c, k, 3), beta, tau, 1.0)
                assert intensity == pytest.approx(0.0, abs=1e-30)


class TestCountPmf:
    def test_zero_intensity_no_dark_counts(self):
        for det in (DetectorModel.on_off(), DetectorModel.pnrd(2), DetectorModel.pnrd_inf()):
            pmf = count_pmf(0.0, det)
            assert pmf.prob(CountOutcome.exact(0)) == 1.0

    def test_poisson_zero_count(self):
        pmf = count_pmf(1.0, DetectorModel.pnrd_inf())
        assert pmf.prob(CountOutcome.exact(0)) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_finite_tail_mass(self):
        pmf = count_pmf(1.0, DetectorModel.pnrd(2))
        expected = 1.0 - math.exp(-1.0) * (1.0 + 1.0 + 0.5)
        assert pmf.prob(SATURATED) == pytest.approx(expected, rel=1e-10)

    def test_total_mass(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            det = DetectorModel.pnrd(int(rng.integers(0, 6)), eta=rng.uniform(), nu=rng.uniform(0, 0.2))
            pmf = count_pmf(rng.uniform(0, 8), det)
            assert pmf.probs().sum() == pytest.approx(1.0, abs=1e-12)

    def test_on_off_equals_pnrd0_bitwise(self):
        rng = np.random.default_rng(13)
        for _ in range(1000):
            intensity = rng.uniform(0, 10)
            eta = rng.uniform()
            nu = rng.uniform(0, 0.5)
            a = count_pmf(intensity, DetectorModel.on_off(eta=eta, nu=nu))
            b = count_pmf(intensity, DetectorModel.pnrd(0, eta=eta, nu=nu))
            assert a.mu == b.mu
            assert np.array_equal(a.probs(), b.probs())

    def test_infinite_detector_never_saturates(self):
        pmf = count_pmf(1.0, DetectorModel.pnrd_inf())
        with pytest.raises(ValueError):
            pmf.prob(SATURATED)

    def test_counts_beyond_resolution_have_zero_mass(self):
        pmf = count_pmf(1.0, DetectorModel.pnrd(2))
        assert pmf.prob(CountOutcome.exact(3)) == 0.0


class TestSampleCount:
    def test_all_mass_on_zero(self):
        pmf = count_pmf(0.0, DetectorModel.on_off())
        for u in (0.0, 0.5, 0.999999):
            assert sample_count(pmf, u) == CountOutcome.exact(0)

    def test_on_off_threshold(self):
        mu = -math.log(0.6)  # e^{-mu} = 0.6
        pmf = count_pmf(mu, DetectorModel.on_off(eta=1.0))
        assert sample_count(pmf, 0.59) == CountOutcome.exact(0)
        assert sample_count(pmf, 0.61) == SATURATED

    def test_poisson_inverse_cdf(self):
        pmf = count_pmf(1.0, DetectorModel.pnrd_inf())
        # Poisson(1) cdf: 0.3679, 0.7358, ...
        assert sample_count(pmf, 0.5) == CountOutcome.exact(1)
        assert sample_count(pmf, 0.3) == CountOutcome.exact(0)
        assert sample_count(pmf, 0.9) == CountOutcome.exact(2)

    def test_finite_saturation(self):
        pmf = count_pmf(4.0, DetectorModel.pnrd(1))
        body = pmf.probs()[:2].sum()
        assert sample_count(pmf, body - 1e-9) == CountOutcome.exact(1)
        assert sample_count(pmf, body + 1e-9) == SATURATED


class TestLikelihoods:
    def test_nulled_hypothesis_cannot_click(self):
        c = qam_points(4, 1.0)
        params = ideal_params(2)
        k = 2
        beta = local_field(c, k, 1.0, 2)
        like = likelihoods(c, beta, SATURATED, params)
        assert like[k] == 0.0
        assert np.all(like[np.arange(4) != k] > 0.0)

    def test_no_mode_match_gives_flat_likelihoods(self):
        # 4-QAM: all amplitudes share |phi|, so xi=0 carries no information
        c = qam_points(4, 1.0)
        params = ReceiverParams(
            n_partitions=2, detector=DetectorModel.on_off(), tau=0.9, xi=0.0
        )
        for outcome in (CountOutcome.exact(0), SATURATED):
            like = likelihoods(c, 1.0 + 1.0j, outcome, params)
            assert np.all(like == like[0])

    def test_no_mode_match_depends_only_on_magnitude(self):
        # 16-QAM has three magnitude classes; xi=0 cannot split them further
        c = qam_points(16, 1.0)
        params = ReceiverParams(
            n_partitions=4, detector=DetectorModel.pnrd(1), tau=0.95, xi=0.0
        )
        like = likelihoods(c, 0.4 - 0.7j, SATURATED, params)
        mags = np.round(np.abs(c.points), 9)
        for mag in np.unique(mags):
            group = like[mags == mag]
            assert np.all(group == group[0])

    def test_hand_evaluated_vector(self):
        # scalar recomputation of the displaced-intensity Poisson model
        c = qam_points(4, 0.8)
        det = DetectorModel.pnrd_inf(eta=0.75, nu=0.01)
        params = ReceiverParams(n_partitions=2, detector=det, tau=0.95, xi=0.98)
        beta = 0.3 - 0.2j
        n_obs = 2
        like = likelihoods(c, beta, CountOutcome.exact(n_obs), params)
        for m in range(4):
            phi_s = c.points[m] / math.sqrt(2)
            intensity = 0.02 * 0.95 * abs(phi_s) ** 2 + 0.98 * abs(
                math.sqrt(0.95) * phi_s - beta
            ) ** 2
            mu = 0.01 + 0.75 * intensity
            expected = math.exp(-mu) * mu**n_obs / 2.0
            assert like[m] == pytest.approx(expected, rel=1e-12)


class TestBayesUpdate:
    def test_uniform_stays_uniform(self):
        post = bayes_update(np.full(4, 0.25), np.full(4, 0.3))
        assert np.allclose(post, 0.25)

    def test_zero_likelihood_zeroes_posterior(self):
        post = bayes_update(np.array([0.5, 0.5]), np.array([0.0, 0.4]))
        assert post[0] == 0.0
        assert post[1] == 1.0

    def test_direct_arithmetic(self):
        post = bayes_update(np.array([0.5, 0.5]), np.array([0.2, 0.6]))
        assert np.allclose(post, [0.25, 0.75])

    def test_degenerate_evidence_raises(self):
        with pytest.raises(DegenerateEvidenceError):
            bayes_update(np.array([0.5, 0.5]), np.array([0.0, 0.0]))


class TestMapDecision:
    def test_argmax(self):
        assert map_decision(np.array([0.1, 0.7, 0.1, 0.1])) == 1

    def test_tie_breaks_low(self):
        assert map_decision(np.full(4, 0.25)) == 0
        assert map_decision(np.array([0.3, 0.3, 0.4, 0.0]) * 0 + 0.25) == 0

    def test_scale_invariance(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            v = rng.uniform(size=8)
            assert map_decision(v) == map_decision(3.7 * v)


class TestEtaTauInterchange:
    def test_means_identical_through_product(self):
        c = qam_points(16, 1.0)
        rng = np.random.default_rng(31)
        for _ in range(200):
            a, b = rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)
            nu = rng.uniform(0, 0.1)
            beta0 = complex(rng.normal(), rng.normal())
            n = int(rng.integers(1, 20))
            det = lambda eta: DetectorModel.pnrd_inf(eta=eta, nu=nu)
            mk = lambda eta, tau: ReceiverParams(n_partitions=n, detector=det(eta), tau=tau, xi=1.0)
            m_ab = hypothesis_means(c, beta0, mk(a, b))
            m_ba = hypothesis_means(c, beta0, mk(b, a))
            m_prod = hypothesis_means(c, beta0, mk(a * b, 1.0))
            assert np.array_equal(m_ab, m_ba)
            assert np.array_equal(m_ab, m_prod)

    def test_pmf_identical_through_product(self):
        c = qam_points(16, 1.0)
        rng = np.random.default_rng(37)
        unit = DetectorModel.pnrd(2)
        for _ in range(100):
            a, b = rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)
            beta0 = complex(rng.normal(), rng.normal())
            mk = lambda eta, tau: ReceiverParams(
                n_partitions=4,
                detector=DetectorModel.pnrd(2, eta=eta, nu=1e-4),
                tau=tau,
                xi=1.0,
            )
            mu_ab = hypothesis_means(c, beta0, mk(a, b))
            mu_prod = hypothesis_means(c, beta0, mk(a * b, 1.0))
            assert np.array_equal(mu_ab, mu_prod)
            for m1, m2 in zip(mu_ab, mu_prod):
                assert np.array_equal(
                    count_pmf(m1, unit).probs(), count_pmf(m2, unit).probs()
                )

    def test_factored_means_match_literal_intensity_path(self):
        c = qam_points(16, 1.2)
        rng = np.random.default_rng(41)
        for _ in range(50):
            eta, tau, xi = rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)
            nu = rng.uniform(0, 0.05)
            n = int(rng.integers(1, 10))
            m_star = int(rng.integers(0, 16))
            det = DetectorModel.pnrd_inf(eta=eta, nu=nu)
            params = ReceiverParams(n_partitions=n, detector=det, tau=tau, xi=xi)
            beta0 = c.points[m_star] / math.sqrt(n)
            beta = local_field(c, m_star, tau, n)
            means = hypothesis_means(c, beta0, params)
            for m in range(16):
                lit = nu + eta * displaced_intensity(
                    slice_amplitude(c, m, n), beta, tau, xi
                )
                assert means[m] == pytest.approx(lit, rel=1e-12, abs=1e-15)


class TestSimulateTrial:
    def test_sent_zero_ideal_always_correct(self):
        rng = np.random.default_rng(43)
        for n in (1, 3, 10):
            c = qam_points(16, 1.0)
            for _ in range(20):
                assert simulate_trial(c, 0, ideal_params(n), rng) == 0

    def test_sent_zero_counts_stay_zero(self):
        c = qam_points(16, 1.0)
        rng = np.random.default_rng(47)
        states = trial_trace(c, 0, ideal_params(8), rng)
        for state in states:
            assert state.m_star == 0
            assert state.posteriors[0] == max(state.posteriors)

    def test_single_slice_saturated_hand_check(self):
        # N=1, on-off, ideal: force a click and compare with one Bayes step
        c = qam_points(4, 1.0)
        params = ideal_params(1)
        sent = 2
        rng = FixedUniforms([0.9999])  # beyond e^{-mu}: saturated
        decision = simulate_trial(c, sent, params, rng)
        beta = local_field(c, 0, 1.0, 1)
        like = likelihoods(c, beta, SATURATED, params)
        expected = map_decision(bayes_update(c.priors, like))
        assert decision == expected

    def test_posteriors_normalized_each_slice(self):
        c = qam_points(16, 1.0)
        det = DetectorModel.pnrd(1, eta=0.8, nu=1e-3)
        params = ReceiverParams(n_partitions=6, detector=det, tau=0.95, xi=0.99)
        rng = np.random.default_rng(53)
        for sent in (0, 7, 15):
            for state in trial_trace(c, sent, params, rng):
                assert state.priors.sum() == pytest.approx(1.0, abs=1e-12)
                assert state.posteriors.sum() == pytest.approx(1.0, abs=1e-12)
                assert np.all(state.posteriors >= 0.0)

    def test_deterministic_given_seed(self):
        c = qam_points(16, 1.0)
        det = DetectorModel.pnrd_inf(eta=0.7, nu=1e-4)
        params = ReceiverParams(n_partitions=5, detector=det, tau=0.98, xi=0.995)
        d1 = [
            simulate_trial(c, 9, params, np.random.default_rng(1000 + k)) for k in range(30)
        ]
        d2 = [
            simulate_trial(c, 9, params, np.random.default_rng(1000 + k)) for k in range(30)
        ]
        assert d1 == d2

    def test_zero_information_keeps_priors_within_magnitude_class(self):
        # 4-QAM has a single magnitude class; with xi=0 the posterior never moves
        c = qam_points(4, 1.0)
        params = ReceiverParams(
            n_partitions=4, detector=DetectorModel.on_off(), tau=0.9, xi=0.0
        )
        rng = np.random.default_rng(59)
        for state in trial_trace(c, 3, params, rng):
            assert np.allclose(state.posteriors, 0.25, atol=1e-14)

    def test_invalid_sent_rejected(self):
        c = qam_points(4, 1.0)
        with pytest.raises(ValueError):
            simulate_trial(c, 4, ideal_params(1), np.random.default_rng(0))
