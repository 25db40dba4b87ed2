"""Discretized exchangeable-state priors over Bell-diagonal weights.

A :class:`Density` pairs a :class:`Grid` (node coordinates plus quadrature
weights) with nonnegative values, so that ``sum(quad * values)`` is the
integral of the generating function.  Two continuous grids are provided,
the Werner line ``F in (1/4, 1)`` with measure ``dF`` and the barycentric
lattice on the full simplex with its volume normalized to one.  Point-mass
grids (``continuous=False``) represent delta priors and push-forwards.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .bellcore import BellObservable, entropy, expectation, weight_vector, werner_weights
from .errors import DegeneratePosteriorError, DomainError
from .io import write_csv

FIDELITY_LO = 0.25
FIDELITY_HI = 1.0
NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature nodes on the Bell-weight simplex.

    Attributes
    ----------
    points : ndarray, shape (M, 4)
        Bell weights of each node.
    quad : ndarray, shape (M,)
        Positive quadrature weight of each node.
    fidelity : ndarray or None
        Werner fidelity of each node, when the grid lives on the Werner line.
    continuous : bool
        True when values are densities w.r.t. a continuous measure, False for
        scattered point masses.
    """

    points: np.ndarray
    quad: np.ndarray
    fidelity: np.ndarray | None = None
    continuous: bool = True
    resolution: int | None = field(default=None, compare=False)

    def __post_init__(self):
        pts = weight_vector(np.atleast_2d(self.points))
        quad = np.asarray(self.quad, dtype=float).reshape(-1)
        if quad.shape[0] != pts.shape[0]:
            raise DomainError("quad weights and nodes differ in length")
        if np.any(quad <= 0):
            raise DomainError("quadrature weights must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "quad", quad)
        if self.fidelity is not None:
            object.__setattr__(self, "fidelity", np.asarray(self.fidelity, dtype=float).reshape(-1))

    def __len__(self) -> int:
        return self.quad.shape[0]

    @property
    def is_werner(self) -> bool:
        return self.fidelity is not None

    @property
    def entropies(self) -> np.ndarray:
        return np.atleast_1d(entropy(self.points))


def fidelity_grid(resolution: int = 512) -> Grid:
    """Uniform midpoint grid on the open Werner interval ``(1/4, 1)``."""
    if resolution < 8:
        raise DomainError("fidelity grid resolution must be at least 8")
    step = (FIDELITY_HI - FIDELITY_LO) / resolution
    F = FIDELITY_LO + step * (np.arange(resolution) + 0.5)
    return Grid(werner_weights(F), np.full(resolution, step), fidelity=F, resolution=resolution)


def _lattice(m: int) -> np.ndarray:
    rows = []
    for k1 in range(m + 1):
        for k2 in range(m + 1 - k1):
            for k3 in range(m + 1 - k1 - k2):
                rows.append((k1, k2, k3, m - k1 - k2 - k3))
    return np.array(rows, dtype=float) / m


def simplex_grid(m: int = 40) -> Grid:
    """Barycentric lattice ``w_j = k_j / m`` with equal quadrature weights."""
    if m < 1:
        raise DomainError("simplex lattice resolution must be positive")
    pts = _lattice(m)
    return Grid(pts, np.full(len(pts), 1.0 / len(pts)), resolution=m)


def point_grid(points, fidelity=None) -> Grid:
    """Grid of point masses (unit quadrature weight per node)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return Grid(pts, np.ones(len(pts)), fidelity=fidelity, continuous=False)


@dataclass(frozen=True, eq=False)
class Density:
    """Generating function sampled on a grid; immutable."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.shape[0] != len(self.grid):
            raise DomainError("density values and grid differ in length")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise DomainError("density values must be finite and nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def masses(self) -> np.ndarray:
        """Probability mass carried by each node."""
        return self.grid.quad * self.values

    def total(self) -> float:
        return float(self.masses.sum())

    def expect(self, f) -> float:
        """Integral of ``f`` (callable on node points, or node values) against the density."""
        vals = f(self.grid.points) if callable(f) else np.asarray(f, dtype=float)
        return float(np.dot(self.masses, vals))

    def mean_fidelity(self) -> float:
        return self.expect(self.grid.points[:, 3])

    def sample_nodes(self, rng: np.random.Generator, size=None):
        """Draw node indices with probability proportional to node mass."""
        p = self.masses / self.masses.sum()
        return rng.choice(len(p), size=size, p=p)


def normalize(d: Density) -> Density:
    """Rescale ``d`` so it integrates to one."""
    z = d.total()
    if not z > 0:
        raise DegeneratePosteriorError("cannot normalize a density with zero total mass")
    return Density(d.grid, d.values / z)


def uniform_fidelity_prior(resolution: int = 512) -> Density:
    """Flat prior ``p(F) = 4/3`` on ``(1/4, 1)``."""
    g = fidelity_grid(resolution)
    return normalize(Density(g, np.full(len(g), 4.0 / 3.0)))


def uniform_simplex_prior(m: int = 40) -> Density:
    g = simplex_grid(m)
    return Density(g, np.ones(len(g)))


def delta_prior(w) -> Density:
    """Point mass at the Bell weights ``w``."""
    w = weight_vector(w)
    return Density(point_grid(w[None, :]), np.ones(1))


def delta_werner_prior(F: float) -> Density:
    """Point mass at the Werner state of fidelity ``F``."""
    return Density(point_grid(werner_weights(F)[None, :], fidelity=[F]), np.ones(1))


def _node_values(d: Density, likelihood) -> np.ndarray:
    vals = likelihood(d.grid.points) if callable(likelihood) else likelihood
    vals = np.broadcast_to(np.asarray(vals, dtype=float), d.values.shape)
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise DomainError("likelihood must be finite and nonnegative at every node")
    return vals


def bayes_update(d: Density, likelihood) -> Density:
    """Posterior proportional to ``prior * likelihood``, normalized.

    ``likelihood`` is either an array of node values or a callable taking the
    ``(M, 4)`` array of node weights.
    """
    post = d.values * _node_values(d, likelihood)
    try:
        return normalize(Density(d.grid, post))
    except DegeneratePosteriorError:
        raise DegeneratePosteriorError("observed data has zero evidence under the prior") from None


def evidence(d: Density, likelihood) -> float:
    """Marginal probability ``integral p(w) L(w) dw``."""
    return float(np.dot(d.masses, _node_values(d, likelihood)))


def prob_entropy_below(d: Density, S0: float) -> float:
    """Prior mass of states whose entropy does not exceed ``S0``.

    Ties ``S_w == S0`` count as below, so this is exactly the complement of
    :func:`prob_entropy_above`.
    """
    if not 0.0 <= S0 <= 2.0:
        raise DomainError(f"entropy threshold must lie in [0, 2], got {S0}")
    below = d.grid.entropies <= S0
    return float(d.masses[below].sum() / d.total())


def prob_entropy_above(d: Density, S0: float) -> float:
    """Prior mass ``eta`` of states with entropy strictly above ``S0``."""
    return 1.0 - prob_entropy_below(d, S0)


def _label_counts(labels: Iterable[int]) -> np.ndarray:
    labels = [int(x) for x in labels]
    if any(x < 0 or x > 3 for x in labels):
        raise DomainError("Bell labels must be integers 0..3")
    return np.bincount(np.asarray(labels, dtype=int), minlength=4)


def predictive_string_prob(d: Density, labels: Iterable[int]) -> float:
    """Probability of a string of pair labels under the exchangeable state.

    Only the label counts matter, so the result is permutation invariant.
    """
    n = _label_counts(labels)
    per_node = np.prod(d.grid.points ** n, axis=1)
    return float(np.dot(d.masses, per_node) / d.total())


def constrained_maxent_prior(
    grid: Grid,
    obs: BellObservable,
    o: float,
    band: float,
    weight_fn: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Density:
    """Prior supported on ``|<obs>_w - o| < band``, weighted by ``weight_fn``.

    ``weight_fn`` must be strictly positive; the default is ``f = 1``.
    """
    b = obs.b
    if o < b.min() or o > b.max():
        raise DomainError(f"constraint value {o} not achievable by {obs}")
    if band <= 0:
        raise DomainError("constraint band must be positive")
    inside = np.abs(np.atleast_1d(expectation(obs, grid.points)) - o) < band
    f = np.ones(len(grid)) if weight_fn is None else np.asarray(weight_fn(grid.points), dtype=float)
    if np.any(f[inside] <= 0):
        raise DomainError("weight function must be strictly positive on the constraint band")
    vals = np.where(inside, f, 0.0)
    if not inside.any():
        raise DegeneratePosteriorError("constraint band contains no grid node")
    return normalize(Density(grid, vals))


DENSITY_COLUMNS = ("w1", "w2", "w3", "w4", "F", "quad", "value")


def write_density_csv(path, d: Density) -> None:
    """Write one row per node: four Bell weights, fidelity (or blank), quad weight, value."""
    g = d.grid
    rows = []
    for k in range(len(g)):
        F = "" if g.fidelity is None else g.fidelity[k]
        rows.append([*g.points[k], F, g.quad[k], d.values[k]])
    write_csv(path, DENSITY_COLUMNS, rows)


def read_density_csv(path, continuous: bool = True) -> Density:
    """Inverse of :func:`write_density_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise DomainError(f"{path}: empty density file")
    pts = np.array([[float(r[c]) for c in DENSITY_COLUMNS[:4]] for r in rows])
    fid = [r["F"] for r in rows]
    fidelity = None if any(f == "" for f in fid) else np.array([float(f) for f in fid])
    quad = np.array([float(r["quad"]) for r in rows])
    vals = np.array([float(r["value"]) for r in rows])
    return Density(Grid(pts, quad, fidelity=fidelity, continuous=continuous), vals)

