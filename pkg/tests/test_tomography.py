import numpy as np
import pytest

from bellpurify import priors
from bellpurify import tomography as tm
from bellpurify.bellcore import jaynes_state, werner_weights
from bellpurify.errors import DegeneratePosteriorError, DomainError
from bellpurify.rng import trial_rng

PARITY_POVM = tm.BellPovm([[1, 0, 0, 1], [0, 1, 1, 0]])


class TestPovm:
    def test_validation(self):
        with pytest.raises(DomainError):
            tm.BellPovm([[1, 0, 0, 1], [0, 1, 1, 1]])
        with pytest.raises(DomainError):
            tm.BellPovm([[1, 0, 0]])

    def test_outcome_probs(self):
        w = np.array([0.1, 0.2, 0.3, 0.4])
        np.testing.assert_array_equal(tm.outcome_probs(tm.bell_basis_povm(), w), w)
        np.testing.assert_array_equal(tm.outcome_probs(tm.trivial_povm(), w), [1.0])
        np.testing.assert_allclose(tm.outcome_probs(PARITY_POVM, jaynes_state()), [10 / 16, 6 / 16], atol=1e-16)


class TestPredictive:
    def test_delta(self):
        w = werner_weights(0.7)
        d = priors.delta_prior(w)
        for k in range(4):
            assert tm.predictive_prob(d, tm.bell_basis_povm(), k) == pytest.approx(w[k])

    def test_uniform_simplex(self):
        d = priors.uniform_simplex_prior(20)
        for k in range(4):
            assert tm.predictive_prob(d, tm.bell_basis_povm(), k) == pytest.approx(0.25, abs=1e-12)

    def test_uniform_werner(self, uniform_werner):
        assert tm.predictive_prob(uniform_werner, tm.bell_basis_povm(), 3) == pytest.approx(5 / 8, abs=1e-14)

    @pytest.mark.parametrize("povm", [tm.bell_basis_povm(), PARITY_POVM, tm.trivial_povm()])
    def test_normalized(self, uniform_werner, povm):
        total = sum(tm.predictive_prob(uniform_werner, povm, k) for k in range(len(povm)))
        assert total == pytest.approx(1.0, abs=1e-12)


class TestUpdate:
    def test_delta_unchanged(self):
        d = priors.delta_werner_prior(0.8)
        assert tm.update_on_outcome(d, tm.bell_basis_povm(), 2).values[0] == d.values[0]

    def test_closed_form(self, uniform_werner):
        povm = tm.bell_basis_povm()
        d = uniform_werner
        n4, n1 = 5, 2
        for k in [3] * n4 + [0] * n1:
            d = tm.update_on_outcome(d, povm, k)
        F = uniform_werner.grid.fidelity
        raw = F ** n4 * ((1 - F) / 3) ** n1 * 4 / 3
        np.testing.assert_allclose(d.values, raw / np.sum(raw * uniform_werner.grid.quad), atol=1e-10)

    def test_order_invariance(self, uniform_werner):
        povm = tm.bell_basis_povm()
        a = tm.update_on_outcome(tm.update_on_outcome(uniform_werner, povm, 3), povm, 1)
        b = tm.update_on_outcome(tm.update_on_outcome(uniform_werner, povm, 1), povm, 3)
        np.testing.assert_allclose(a.values, b.values, atol=1e-12)

    def test_counts_match_sequential(self, uniform_werner):
        povm = tm.bell_basis_povm()
        seq = uniform_werner
        for k in (3, 3, 0, 2, 3, 1):
            seq = tm.update_on_outcome(seq, povm, k)
        once = tm.update_on_counts(uniform_werner, povm, [1, 1, 1, 3])
        np.testing.assert_allclose(once.values, seq.values, atol=1e-10)

    def test_martingale(self, uniform_werner):
        povm = tm.bell_basis_povm()
        avg = sum(tm.predictive_prob(uniform_werner, povm, k) * tm.update_on_outcome(uniform_werner, povm, k).values
                  for k in range(4))
        np.testing.assert_allclose(avg, uniform_werner.values, atol=1e-10)

    def test_zero_predictive(self):
        with pytest.raises(DegeneratePosteriorError):
            tm.update_on_outcome(priors.delta_prior([0, 0, 0, 1]), tm.bell_basis_povm(), 0)

    def test_bad_outcome(self, uniform_werner):
        with pytest.raises(DomainError):
            tm.update_on_outcome(uniform_werner, tm.bell_basis_povm(), 4)


class TestRunTomography:
    def test_no_measurements(self, uniform_werner, rng):
        post, counts = tm.run_tomography(uniform_werner, tm.bell_basis_povm(), werner_weights(0.8), 0, rng)
        np.testing.assert_array_equal(post.values, uniform_werner.values)
        assert counts.sum() == 0

    def test_reproducible(self, uniform_werner):
        povm, w = tm.bell_basis_povm(), werner_weights(0.8)
        a, ca = tm.run_tomography(uniform_werner, povm, w, 40, trial_rng(1, 0))
        b, cb = tm.run_tomography(uniform_werner, povm, w, 40, trial_rng(1, 0))
        np.testing.assert_array_equal(ca, cb)
        np.testing.assert_array_equal(a.values, b.values)

    def test_consistency(self, uniform_werner):
        povm, w = tm.bell_basis_povm(), werner_weights(0.8)
        for seed in range(20):
            post, counts = tm.run_tomography(uniform_werner, povm, w, 500, trial_rng(seed, 0))
            assert post.mean_fidelity() == pytest.approx(0.8, abs=0.05)
            # counts-based estimate with one pseudo-count per outcome
            assert post.mean_fidelity() == pytest.approx((counts[3] + 1) / (500 + 4), abs=0.02)

    def test_contraction(self, uniform_werner):
        povm, w = tm.bell_basis_povm(), werner_weights(0.8)

        def var(d):
            m = d.mean_fidelity()
            return d.expect(lambda x: (x[:, 3] - m) ** 2) / d.total()

        means = []
        for M in (0, 10, 50, 200):
            means.append(np.mean([var(tm.run_tomography(uniform_werner, povm, w, M, trial_rng(s, M))[0])
                                  for s in range(30)]))
        assert all(b < a for a, b in zip(means, means[1:]))
