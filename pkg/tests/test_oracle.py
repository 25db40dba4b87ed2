import numpy as np
import pytest

from bellpurify import oracle, priors
from bellpurify.bellcore import entropy, werner_weights
from bellpurify.errors import CapacityError, DegeneratePosteriorError, DomainError
from bellpurify.recurrence import success_prob_fidelity


class TestExactTable:
    def test_pure(self):
        t = oracle.exact_table(priors.delta_prior([0, 0, 0, 1]), 4)
        assert t.probs[-1] == 1.0 and t.probs.sum() == 1.0

    def test_uniform(self):
        np.testing.assert_allclose(oracle.exact_table(priors.delta_prior([0.25] * 4), 3).probs, 4.0 ** -3)

    def test_agrees_with_predictive(self, rng):
        d = priors.uniform_fidelity_prior(128)
        t = oracle.exact_table(d, 5)
        assert t.probs.sum() == pytest.approx(1.0, abs=1e-12)
        labels = oracle.labels_of(5)
        for idx in rng.integers(0, 4 ** 5, size=100):
            assert t.probs[idx] == pytest.approx(priors.predictive_string_prob(d, labels[idx]), abs=1e-14)

    def test_cap(self):
        with pytest.raises(CapacityError):
            oracle.exact_table(priors.delta_prior([0.25] * 4), 11)

    def test_first_pair_most_significant(self):
        labels = oracle.labels_of(3)
        assert list(labels[1]) == [0, 0, 1] and list(labels[16]) == [1, 0, 0]


class TestFilterTable:
    def test_empty(self):
        t = oracle.exact_table(priors.delta_werner_prior(0.8), 3)
        np.testing.assert_array_equal(oracle.filter_table(t, []).probs, t.probs)

    def test_contradiction(self):
        t = oracle.exact_table(priors.delta_prior([0, 0, 0, 1]), 2)
        with pytest.raises(DegeneratePosteriorError):
            oracle.filter_table(t, [([1, 0, 0, 0], 0)])

    def test_marginalizes(self):
        t = oracle.exact_table(priors.delta_werner_prior(0.8), 3)
        out = oracle.filter_table(t, [], [1])
        np.testing.assert_allclose(out.probs, oracle.exact_table(priors.delta_werner_prior(0.8), 2).probs)

    def test_lift_rounds(self):
        masks, sacrificed = oracle.lift_rounds(3, [([0, 1, 0, 0, 1, 1], 0), ([1, 0, 0, 1], 1)])
        assert masks == [[0, 1, 0, 0, 1, 1], [0, 0, 1, 0, 0, 1]]
        assert sacrificed == [0, 2]

    def test_bad_mask(self):
        with pytest.raises(DomainError):
            oracle.lift_rounds(2, [([1, 0], 0)])


class TestQuadratureMc:
    def test_constant(self, uniform_werner, rng):
        q, mc, se = oracle.quadrature_mc_check(uniform_werner, lambda w: np.ones(len(w)), 1000, rng)
        assert q == pytest.approx(1.0) and mc == 1.0 and se == 0.0

    def test_entropy_indicator(self, uniform_werner, rng):
        q, mc, se = oracle.quadrature_mc_check(uniform_werner, lambda w: (entropy(w) <= 1.0).astype(float),
                                               20000, rng)
        assert q == pytest.approx(priors.prob_entropy_below(uniform_werner, 1.0), abs=1e-12)
        assert abs(q - mc) <= 3 * se

    def test_success_probability(self, uniform_werner, rng):
        q, mc, se = oracle.quadrature_mc_check(uniform_werner, lambda w: success_prob_fidelity(w[:, 3]),
                                               20000, rng)
        assert abs(q - mc) <= 3 * se


class TestRootFind:
    def test_examples(self):
        assert oracle.root_find(lambda F: 8 * F ** 2 - 4 * F - 1, 0.5, 1) == pytest.approx(0.6830127018922193,
                                                                                            abs=1e-12)
        assert oracle.root_find(lambda F: F - 0.5, 0.25, 1) == pytest.approx(0.5, abs=1e-12)
        F_star = oracle.root_find(lambda F: entropy(werner_weights(F)) - 1.0, 0.5, 1.0)
        assert F_star == pytest.approx(0.8107103750847682, abs=1e-12)

    def test_no_sign_change(self):
        with pytest.raises(DomainError):
            oracle.root_find(lambda x: x * x + 1, -1, 1)


def test_oracle_is_independent():
    import ast
    from pathlib import Path

    import bellpurify.oracle as mod

    tree = ast.parse(Path(mod.__file__).read_text())
    imported = {n.module for n in ast.walk(tree) if isinstance(n, ast.ImportFrom) and n.module}
    imported |= {a.name for n in ast.walk(tree) if isinstance(n, ast.Import) for a in n.names}
    assert not any(m.split(".")[-1] in {"hashing", "recurrence", "tomography"} for m in imported)
