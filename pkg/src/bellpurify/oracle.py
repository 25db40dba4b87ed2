"""Brute-force reference computations for tests.

Nothing here imports the hashing, recurrence or tomography modules; strings
are handled as explicit label arrays rather than packed integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, DegeneratePosteriorError, DomainError
from .priors import Density

CAP = 10


@dataclass(frozen=True, eq=False)
class FullTable:
    """Dense distribution over ``4**N`` label strings.

    Index ``sum_k label_k 4**(N-1-k)``, i.e. the first pair is the most
    significant radix-4 digit.
    """

    N: int
    probs: np.ndarray


def labels_of(N: int) -> np.ndarray:
    """``(4**N, N)`` array of the labels of every string, in table order."""
    if N == 0:
        return np.zeros((1, 0), dtype=int)
    grids = np.meshgrid(*([np.arange(4)] * N), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def bits_of(labels: np.ndarray) -> np.ndarray:
    """Expand pair labels into ``(hi, lo)`` bit columns."""
    out = np.empty(labels.shape[:-1] + (2 * labels.shape[-1],), dtype=int)
    out[..., 0::2] = labels >> 1
    out[..., 1::2] = labels & 1
    return out


def exact_table(d: Density, N: int) -> FullTable:
    """Tabulate ``p(i) = sum_nodes mass * prod_k w[label_k]`` by Kronecker products."""
    if N > CAP:
        raise CapacityError(f"oracle table capped at N={CAP}")
    masses = d.masses / d.total()
    total = np.zeros(4 ** N)
    for m, w in zip(masses, d.grid.points):
        if m == 0:
            continue
        t = np.ones(1)
        for _ in range(N):
            t = np.kron(t, w)
        total += m * t
    return FullTable(N, total)


def lift_rounds(N: int, rounds: Sequence[tuple[Sequence[int], int]]):
    """Translate sequential rounds into masks over the original ``2N`` bits.

    Each round is ``(mask_bits over the current string, target index in the
    current string)``.  Returns ``(original masks, original sacrificed pair
    indices)``.
    """
    alive = list(range(N))
    masks, sacrificed = [], []
    for mask_bits, target in rounds:
        mask_bits = list(mask_bits)
        if len(mask_bits) != 2 * len(alive):
            raise DomainError("mask length does not match the surviving string")
        full = [0] * (2 * N)
        for pos, pair in enumerate(alive):
            full[2 * pair] = mask_bits[2 * pos]
            full[2 * pair + 1] = mask_bits[2 * pos + 1]
        masks.append(full)
        sacrificed.append(alive.pop(target))
    return masks, sacrificed


def filter_table(t: FullTable, constraints: Sequence[tuple[Sequence[int], int]],
                 sacrificed: Sequence[int] = ()) -> FullTable:
    """Keep strings matching every ``(mask, parity)`` constraint, then sum out ``sacrificed`` pairs."""
    labels = labels_of(t.N)
    bits = bits_of(labels)
    keep = np.ones(len(t.probs), dtype=bool)
    for mask, want in constraints:
        mask = np.asarray(mask, dtype=int)
        if mask.shape != (2 * t.N,):
            raise DomainError("constraint mask must cover all 2N bits")
        keep &= (bits @ mask) % 2 == want
    probs = np.where(keep, t.probs, 0.0)
    z = probs.sum()
    if not z > 0:
        raise DegeneratePosteriorError("constraints have zero joint probability")
    survivors = [k for k in range(t.N) if k not in set(sacrificed)]
    out = np.zeros(4 ** len(survivors))
    idx = np.zeros(len(probs), dtype=int)
    for k in survivors:
        idx = idx * 4 + labels[:, k]
    np.add.at(out, idx, probs / z)
    return FullTable(len(survivors), out)


def quadrature_mc_check(d: Density, f: Callable[[np.ndarray], np.ndarray], samples: int,
                        rng: np.random.Generator) -> tuple[float, float, float]:
    """Grid quadrature of ``f`` against Monte Carlo over sampled nodes."""
    vals = np.asarray(f(d.grid.points), dtype=float)
    quad = float(np.dot(d.masses, vals) / d.total())
    p = d.masses / d.masses.sum()
    draws = vals[rng.choice(len(p), size=samples, p=p)]
    return quad, float(draws.mean()), float(draws.std(ddof=1) / np.sqrt(samples))


def root_find(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-13,
              max_iter: int = 400) -> float:
    """Plain bisection; requires a sign change on ``[lo, hi]``."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise DomainError(f"no sign change on [{lo}, {hi}]")
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol or hi - lo < 1e-16:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return mid
