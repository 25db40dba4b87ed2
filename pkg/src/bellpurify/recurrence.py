"""Recurrence purification with Bayesian round updates.

Two state models are supported.  The Werner line tracks only the fidelity
``F`` (the output of each round is twirled back to Werner form), and the
general Bell-diagonal model tracks all four weights and pushes posterior
mass forward along the weight map without re-gridding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .bellcore import weight_vector, werner_weights
from .errors import DegeneratePosteriorError, DomainError
from .priors import (
    FIDELITY_HI,
    FIDELITY_LO,
    Density,
    Grid,
    bayes_update,
    fidelity_grid,
    normalize,
)


@dataclass(frozen=True)
class RoundResult:
    """Outcome of one recurrence round on ``N`` pair-sets (``2N`` pairs)."""

    N: int
    Ns: int
    true_state: np.ndarray | None = None

    def __post_init__(self):
        if not 0 <= self.Ns <= self.N:
            raise DomainError(f"need 0 <= Ns <= N, got Ns={self.Ns}, N={self.N}")


@dataclass(frozen=True, eq=False)
class FidelityPosterior:
    """Posterior after a Werner round.

    ``before`` is ``p(F|Ns)`` on the prior's grid; ``after`` is the
    transformed density ``p'(F')`` of the surviving pairs.
    """

    before: Density
    after: Density
    evidence: float


def _check_fidelity(F):
    F = np.asarray(F, dtype=float)
    if np.any(F < FIDELITY_LO - 1e-12) or np.any(F > FIDELITY_HI + 1e-12):
        raise DomainError(f"fidelity must lie in [1/4, 1], got {F}")
    return np.clip(F, FIDELITY_LO, FIDELITY_HI)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def success_prob_weights(w):
    """Probability that a recurrence step keeps the control pair."""
    w = weight_vector(w)
    ps = (w[..., 0] + w[..., 3]) ** 2 + (w[..., 1] + w[..., 2]) ** 2
    return _scalar(ps)


def update_weights(w) -> np.ndarray:
    """Bell weights of the control pair after a successful step."""
    w = weight_vector(w)
    w1, w2, w3, w4 = (w[..., j] for j in range(4))
    ps = (w1 + w4) ** 2 + (w2 + w3) ** 2
    out = np.stack([2 * w2 * w3, w2 ** 2 + w3 ** 2, 2 * w1 * w4, w1 ** 2 + w4 ** 2], axis=-1)
    return out / ps[..., None]


def success_prob_fidelity(F):
    """``(8F^2 - 4F + 5) / 9`` for Werner input states."""
    F = _check_fidelity(F)
    return _scalar((8 * F ** 2 - 4 * F + 5) / 9)


def fidelity_map(F):
    """Fidelity of a twirled surviving pair: ``(10F^2 - 2F + 1) / (8F^2 - 4F + 5)``."""
    F = _check_fidelity(F)
    return _scalar((10 * F ** 2 - 2 * F + 1) / (8 * F ** 2 - 4 * F + 5))


def _discriminant(Fp):
    return 6 * Fp - 4 * Fp ** 2 - 1


def fidelity_map_inverse(Fp):
    """Inverse of :func:`fidelity_map` on ``[1/4, 1]``."""
    Fp = np.asarray(Fp, dtype=float)
    if np.any(Fp < FIDELITY_LO - 1e-12) or np.any(Fp > FIDELITY_HI + 1e-12):
        raise DomainError(f"fidelity must lie in [1/4, 1], got {Fp}")
    D = _discriminant(Fp)
    if np.any(D < 0):
        raise DomainError("inverse fidelity map has a negative discriminant")
    return _scalar(((1 - 2 * Fp) + 3 * np.sqrt(D)) / (10 - 8 * Fp))


def inverse_jacobian(Fp):
    """``dF/dF'`` along the inverse map."""
    Fp = np.asarray(Fp, dtype=float)
    F = fidelity_map_inverse(Fp)
    return _scalar((8 * F - 2 + 3 * (3 - 4 * Fp) / np.sqrt(_discriminant(Fp))) / (10 - 8 * Fp))


def log_round_likelihood(ps, N: int, Ns: int):
    """Log of the binomial probability of ``Ns`` successes in ``N`` trials."""
    if not 0 <= Ns <= N:
        raise DomainError(f"need 0 <= Ns <= N, got Ns={Ns}, N={N}")
    ps = np.asarray(ps, dtype=float)
    logc = math.lgamma(N + 1) - math.lgamma(Ns + 1) - math.lgamma(N - Ns + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(Ns > 0, Ns * np.log(np.where(ps > 0, ps, 1.0)), 0.0)
        a = np.where((ps <= 0) & (Ns > 0), -np.inf, a)
        b = np.where(N - Ns > 0, (N - Ns) * np.log(np.where(ps < 1, 1 - ps, 1.0)), 0.0)
        b = np.where((ps >= 1) & (N - Ns > 0), -np.inf, b)
    return _scalar(logc + a + b)


def round_likelihood(ps, N: int, Ns: int):
    """``C(N, Ns) ps^Ns (1-ps)^(N-Ns)``, evaluated in log space."""
    return _scalar(np.exp(log_round_likelihood(ps, N, Ns)))


# --------------------------------------------------------------------------
# posterior updates


def _log_scale(d: Density, loglike: np.ndarray) -> float:
    """Largest log-likelihood over supported nodes; keeps exp() in range for large N."""
    live = loglike[(d.masses > 0) & np.isfinite(loglike)]
    if live.size == 0:
        raise DegeneratePosteriorError("round outcome has zero probability under the prior")
    return float(live.max())


def _node_fidelity(d: Density) -> np.ndarray:
    g = d.grid
    return g.fidelity if g.fidelity is not None else g.points[:, 3]


def posterior_after_round_werner(prior: Density, N: int, Ns: int,
                                 out_grid: Grid | None = None) -> FidelityPosterior:
    """Bayes update on ``Ns`` successes, then change variables to ``F'``.

    For a continuous prior the transformed density is evaluated on
    ``out_grid`` (by default a grid of the same resolution as the prior,
    whose last node sits half a step below 1) using the analytic inverse map
    and its Jacobian; the prior is interpolated linearly between its nodes.
    A point-mass prior is pushed forward node by node.
    """
    if not prior.grid.is_werner:
        raise DomainError("Werner round update needs a prior on the Werner line")
    F = _node_fidelity(prior)
    loglike = np.atleast_1d(log_round_likelihood(success_prob_fidelity(F), N, Ns))
    scale = _log_scale(prior, loglike)
    like = np.exp(loglike - scale)
    before = bayes_update(prior, like)
    ev_scaled = float(np.dot(prior.masses, like) / prior.total())
    ev = ev_scaled * math.exp(scale)

    if not prior.grid.continuous:
        Fp = np.atleast_1d(fidelity_map(F))
        g = Grid(werner_weights(Fp), prior.grid.quad, fidelity=Fp, continuous=False)
        return FidelityPosterior(before, Density(g, before.values), ev)

    if out_grid is None:
        out_grid = fidelity_grid(prior.grid.resolution or len(prior.grid))
    Fp = out_grid.fidelity
    Fsrc = np.atleast_1d(fidelity_map_inverse(Fp))
    # linear interpolation of the prior between its nodes, flat beyond the ends
    prior_at = np.interp(Fsrc, F, prior.values / prior.total())
    like_at = np.exp(np.atleast_1d(log_round_likelihood(success_prob_fidelity(Fsrc), N, Ns)) - scale)
    post_at = prior_at * like_at / ev_scaled
    vals = np.atleast_1d(inverse_jacobian(Fp)) * post_at
    return FidelityPosterior(before, normalize(Density(out_grid, vals)), ev)


def posterior_after_round_weights(prior: Density, N: int, Ns: int) -> Density:
    """Bayes update on ``Ns`` successes, then push node masses along the weight map.

    The result lives on the scattered image points; each keeps the posterior
    mass of its source node.
    """
    loglike = np.atleast_1d(log_round_likelihood(success_prob_weights(prior.grid.points), N, Ns))
    post = bayes_update(prior, np.exp(loglike - _log_scale(prior, loglike)))
    pts = update_weights(post.grid.points)
    g = Grid(pts, np.ones(len(pts)), continuous=False)
    return Density(g, post.masses)


def rebin(d: Density, target: Grid) -> Density:
    """Move each node's mass to the nearest node of ``target``."""
    tree = cKDTree(target.points)
    _, idx = tree.query(d.grid.points)
    mass = np.bincount(idx, weights=d.masses, minlength=len(target))
    return normalize(Density(target, mass / target.quad))


def posterior_after_round(prior: Density, N: int, Ns: int) -> Density:
    """Dispatch on the prior's state model."""
    if prior.grid.is_werner:
        return posterior_after_round_werner(prior, N, Ns).after
    return posterior_after_round_weights(prior, N, Ns)


def advance_state(w, werner: bool) -> np.ndarray:
    """True single-pair state of the survivors of a round."""
    w = weight_vector(w)
    if werner:
        return werner_weights(fidelity_map(w[3]))
    return update_weights(w)


def simulate_recurrence_round(prior: Density, N: int, rng: np.random.Generator,
                              true_state=None) -> tuple[RoundResult, Density]:
    """Run one round on ``N`` pair-sets.

    The true single-pair state is drawn from ``prior`` unless given.  The
    number of survivors ``Ns`` is binomial with the true success
    probability; the returned posterior describes the ``Ns`` survivors.
    """
    if N < 1:
        raise DomainError("a recurrence round needs at least one pair-set")
    if true_state is None:
        true_state = prior.grid.points[prior.sample_nodes(rng)]
    true_state = weight_vector(true_state)
    Ns = int(rng.binomial(N, success_prob_weights(true_state)))
    return RoundResult(N, Ns, true_state), posterior_after_round(prior, N, Ns)
