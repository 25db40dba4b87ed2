"""Bayesian tomography with measurements that act diagonally on Bell states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bellcore import weight_vector
from .errors import DegeneratePosteriorError, DomainError
from .priors import Density, bayes_update


@dataclass(frozen=True, eq=False)
class BellPovm:
    """POVM whose effects are diagonal in the Bell basis.

    ``effects[k, j]`` is the probability of outcome ``k`` given Bell state
    ``j``; the columns must sum to one.
    """

    effects: np.ndarray

    def __post_init__(self):
        eff = np.atleast_2d(np.asarray(self.effects, dtype=float))
        if eff.shape[1] != 4:
            raise DomainError("each POVM effect needs 4 Bell components")
        if np.any(eff < -1e-12) or np.any(eff > 1 + 1e-12):
            raise DomainError("effect components must lie in [0, 1]")
        if np.any(np.abs(eff.sum(axis=0) - 1.0) > 1e-12):
            raise DomainError("POVM effects must sum to the identity")
        eff = np.clip(eff, 0.0, 1.0)
        eff.setflags(write=False)
        object.__setattr__(self, "effects", eff)

    def __len__(self) -> int:
        return self.effects.shape[0]


def bell_basis_povm() -> BellPovm:
    """Projective measurement in the Bell basis."""
    return BellPovm(np.eye(4))


def trivial_povm() -> BellPovm:
    return BellPovm(np.ones((1, 4)))


def outcome_probs(povm: BellPovm, w) -> np.ndarray:
    """Outcome distribution for the Bell-diagonal state ``w``."""
    return weight_vector(w) @ povm.effects.T


def _check_outcome(povm: BellPovm, k: int) -> int:
    if not 0 <= k < len(povm):
        raise DomainError(f"outcome {k} out of range for a {len(povm)}-outcome POVM")
    return int(k)


def predictive_prob(d: Density, povm: BellPovm, k: int) -> float:
    """Prior predictive probability of outcome ``k`` on a fresh pair."""
    k = _check_outcome(povm, k)
    return d.expect(d.grid.points @ povm.effects[k]) / d.total()


def update_on_outcome(d: Density, povm: BellPovm, k: int) -> Density:
    """Posterior after observing outcome ``k`` on one pair."""
    k = _check_outcome(povm, k)
    try:
        return bayes_update(d, d.grid.points @ povm.effects[k])
    except DegeneratePosteriorError:
        raise DegeneratePosteriorError(f"outcome {k} has zero predictive probability") from None


def update_on_counts(d: Density, povm: BellPovm, counts) -> Density:
    """Fold a whole count vector into ``d`` at once (order does not matter)."""
    counts = np.asarray(counts, dtype=int)
    if counts.shape != (len(povm),) or np.any(counts < 0):
        raise DomainError("counts must be a nonnegative vector with one entry per outcome")
    probs = d.grid.points @ povm.effects.T
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.where(counts > 0, np.log(probs) * counts, 0.0).sum(axis=1)
    finite = np.isfinite(logp)
    if not finite.any():
        raise DegeneratePosteriorError("observed counts have zero probability under the prior")
    like = np.where(finite, np.exp(logp - logp[finite].max()), 0.0)
    return bayes_update(d, like)


def run_tomography(d: Density, povm: BellPovm, true_w, M: int,
                   rng: np.random.Generator) -> tuple[Density, np.ndarray]:
    """Measure ``M`` pairs of state ``true_w`` and update sequentially."""
    if M < 0:
        raise DomainError("number of measured pairs must be nonnegative")
    p = outcome_probs(povm, true_w)
    outcomes = rng.choice(len(povm), size=M, p=p / p.sum())
    post = d
    for k in outcomes:
        post = update_on_outcome(post, povm, int(k))
    return post, np.bincount(outcomes, minlength=len(povm))
