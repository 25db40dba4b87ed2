import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellpurify import bellcore as bc
from bellpurify.errors import DomainError
from bellpurify.priors import simplex_grid

# high-precision evaluation (mpmath, 40 digits) of -sum w log2 w
S_JAYNES = 1.6225562489182657


class TestLabels:
    def test_label_table(self):
        assert [(lab.hi, lab.lo) for lab in bc.BellLabel] == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert bc.BellLabel.from_bits(1, 1) is bc.BellLabel.PHI_PLUS
        assert bc.BellLabel.from_bits(0, 0) is bc.BellLabel.PSI_MINUS


class TestWeightVector:
    def test_rejects_bad_points(self):
        for bad in ([0.5, 0.5, 0.1, 0.0], [-0.1, 0.6, 0.25, 0.25], [1, 0, 0]):
            with pytest.raises(DomainError):
                bc.weight_vector(bad)

    def test_accepts_tolerance(self):
        w = bc.weight_vector([0.25, 0.25, 0.25, 0.25 + 5e-13])
        assert w.shape == (4,)


class TestEntropy:
    def test_pure(self):
        assert bc.entropy([0, 0, 0, 1]) == 0.0

    def test_uniform(self):
        assert bc.entropy([0.25] * 4) == pytest.approx(2.0, abs=1e-15)

    def test_jaynes(self):
        assert bc.entropy(bc.jaynes_state()) == pytest.approx(S_JAYNES, abs=1e-14)

    def test_invalid(self):
        with pytest.raises(DomainError):
            bc.entropy([0.5, 0.6, 0.0, 0.0])

    @given(st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3),
           st.permutations(range(4)))
    def test_permutation_invariant(self, raw, perm):
        w = np.array(raw) / sum(raw)
        assert bc.entropy(w[list(perm)]) == pytest.approx(bc.entropy(w), abs=1e-12)

    def test_concave_midpoints(self, rng):
        a = rng.dirichlet(np.ones(4), size=500)
        b = rng.dirichlet(np.ones(4), size=500)
        mid = bc.entropy(0.5 * (a + b))
        assert np.all(mid >= 0.5 * (bc.entropy(a) + bc.entropy(b)) - 1e-12)

    def test_bounds(self, rng):
        s = bc.entropy(rng.dirichlet(np.full(4, 0.3), size=1000))
        assert np.all((s >= 0) & (s <= 2))


class TestNamedStates:
    def test_werner(self):
        np.testing.assert_array_equal(bc.werner_weights(1.0), [0, 0, 0, 1])
        np.testing.assert_allclose(bc.werner_weights(0.25), [0.25] * 4, atol=1e-16)
        np.testing.assert_allclose(bc.werner_weights(0.5), [1 / 6, 1 / 6, 1 / 6, 0.5], atol=1e-16)

    @pytest.mark.parametrize("F", [0.2, 1.01, -1])
    def test_werner_domain(self, F):
        with pytest.raises(DomainError):
            bc.werner_weights(F)

    def test_jaynes_and_horodecki(self):
        assert bc.jaynes_state().sum() == 1.0
        assert bc.horodecki_state()[0] == 0.0
        assert bc.entropy(bc.horodecki_state()) == 1.5
        assert bc.entropy(bc.jaynes_state()) > bc.entropy(bc.horodecki_state())

    def test_expectation(self):
        assert bc.expectation(bc.B, bc.jaynes_state()) == 0.5
        assert bc.expectation(bc.B, bc.horodecki_state()) == 0.5
        assert bc.expectation(bc.B, [0.25] * 4) == 0.0

    def test_b_is_phi_plus_minus_psi_minus(self, rng):
        w = rng.dirichlet(np.ones(4), size=50)
        np.testing.assert_allclose(bc.expectation(bc.B, w), w[:, 3] - w[:, 0], atol=1e-15)


class TestMaxent:
    def test_jaynes_target(self):
        np.testing.assert_allclose(bc.maxent_state(bc.B, 0.5), bc.jaynes_state(), atol=1e-10)

    def test_lambda_ln3(self):
        # exp(ln 3 * b) normalized reproduces the Jaynes weights exactly
        z = np.exp(math.log(3) * bc.B.b)
        np.testing.assert_allclose(z / z.sum(), bc.jaynes_state(), atol=1e-15)

    def test_zero_and_edges(self):
        np.testing.assert_allclose(bc.maxent_state(bc.B, 0.0), [0.25] * 4, atol=1e-12)
        np.testing.assert_array_equal(bc.maxent_state(bc.B, 1.0), [0, 0, 0, 1])
        np.testing.assert_array_equal(bc.maxent_state(bc.B, -1.0), [1, 0, 0, 0])

    def test_face_solution(self):
        obs = bc.BellObservable((0.0, 0.0, 1.0, 1.0))
        np.testing.assert_array_equal(bc.maxent_state(obs, 1.0), [0, 0, 0.5, 0.5])

    @pytest.mark.parametrize("t", [-1.5, 1.0000001])
    def test_out_of_range(self, t):
        with pytest.raises(DomainError):
            bc.maxent_state(bc.B, t)

    @settings(max_examples=60)
    @given(st.floats(-0.999, 0.999))
    def test_constraint_met(self, t):
        assert bc.expectation(bc.B, bc.maxent_state(bc.B, t)) == pytest.approx(t, abs=1e-10)

    @pytest.mark.parametrize("t", [0.0, 0.25, 0.5])
    def test_maxent_dominance(self, t):
        g = simplex_grid(80).points
        # nodes of an m=80 lattice that meet <B> = t exactly (w4 - w1 is a multiple of 1/80)
        hits = g[np.abs(g[:, 3] - g[:, 0] - t) < 1e-9][:1000]
        assert len(hits) >= 200
        best = bc.entropy(bc.maxent_state(bc.B, t))
        assert np.all(bc.entropy(hits) <= best + 1e-9)
