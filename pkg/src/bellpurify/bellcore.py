"""Bell-diagonal state arithmetic.

Weights are always ordered ``(Psi-, Psi+, Phi-, Phi+)``, i.e. by the two-bit
label ``00, 01, 10, 11`` (high bit: Psi/Phi, low bit: -/+).  A weight vector
is a plain ``numpy`` array of shape ``(4,)``; most functions also accept a
stack of them with shape ``(..., 4)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError

SIMPLEX_TOL = 1e-12


class BellLabel(enum.IntEnum):
    """Two-bit label of a Bell state."""

    PSI_MINUS = 0b00
    PSI_PLUS = 0b01
    PHI_MINUS = 0b10
    PHI_PLUS = 0b11

    @property
    def hi(self) -> int:
        """0 for a Psi state, 1 for a Phi state."""
        return int(self) >> 1

    @property
    def lo(self) -> int:
        """0 for a minus state, 1 for a plus state."""
        return int(self) & 1

    @classmethod
    def from_bits(cls, hi: int, lo: int) -> "BellLabel":
        return cls((hi << 1) | lo)


def weight_vector(w, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate and return ``w`` as a float array on the 3-simplex.

    Raises
    ------
    DomainError
        If ``w`` does not have a trailing axis of length 4, has a negative
        component, or does not sum to one within ``tol``.
    """
    arr = np.asarray(w, dtype=float)
    if arr.shape[-1:] != (4,):
        raise DomainError(f"weight vector must have 4 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("weight vector has non-finite components")
    if np.any(arr < -tol):
        raise DomainError(f"negative Bell weight in {arr}")
    if np.any(np.abs(arr.sum(axis=-1) - 1.0) > tol):
        raise DomainError(f"Bell weights do not sum to 1: {arr}")
    return np.clip(arr, 0.0, None)


def entropy(w) -> np.ndarray | float:
    """Shannon entropy in bits of Bell weights, with ``0 log 0 = 0``."""
    arr = weight_vector(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(arr > 0, -arr * np.log2(np.where(arr > 0, arr, 1.0)), 0.0)
    s = terms.sum(axis=-1)
    s = np.clip(s, 0.0, 2.0)
    return float(s) if np.ndim(s) == 0 else s


def werner_weights(F) -> np.ndarray:
    """Weights of the Werner state with fidelity ``F`` to Phi+."""
    F = np.asarray(F, dtype=float)
    if np.any(F < 0.25 - SIMPLEX_TOL) or np.any(F > 1.0 + SIMPLEX_TOL):
        raise DomainError(f"Werner fidelity must lie in [1/4, 1], got {F}")
    F = np.clip(F, 0.25, 1.0)
    rest = (1.0 - F) / 3.0
    return np.stack([rest, rest, rest, F], axis=-1)


def jaynes_state() -> np.ndarray:
    """Single-pair maximum-entropy state under <B> = 1/2."""
    return np.array([1.0, 3.0, 3.0, 9.0]) / 16.0


def horodecki_state() -> np.ndarray:
    """Separable state that also satisfies <B> = 1/2."""
    return np.array([0.0, 0.25, 0.25, 0.5])


@dataclass(frozen=True)
class BellObservable:
    """An observable diagonal in the Bell basis, given by its eigenvalues."""

    eigenvalues: tuple[float, float, float, float]

    def __post_init__(self):
        ev = tuple(float(b) for b in self.eigenvalues)
        if len(ev) != 4:
            raise DomainError("a Bell observable needs exactly 4 eigenvalues")
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def b(self) -> np.ndarray:
        return np.array(self.eigenvalues)


#: ``B = (sx sx + sz sz)/2 = Phi+ - Psi-``.
B = BellObservable((-1.0, 0.0, 0.0, 1.0))


def expectation(obs: BellObservable, w) -> np.ndarray | float:
    """Expectation value ``sum_j b_j w_j``."""
    val = weight_vector(w) @ obs.b
    return float(val) if np.ndim(val) == 0 else val


def _gibbs(b: np.ndarray, lam: float) -> np.ndarray:
    z = lam * b
    z = np.exp(z - z.max())
    return z / z.sum()


def maxent_state(obs: BellObservable, target: float, tol: float = 1e-10) -> np.ndarray:
    """Maximum-entropy Bell-diagonal state with ``<obs> = target``.

    The solution has the Gibbs form ``w_j ~ exp(lam * b_j)``; ``lam`` is
    found by bracketed root finding.  Targets at the ends of the spectrum
    return the uniform mixture over the extremal eigenspace.
    """
    b = obs.b
    lo, hi = b.min(), b.max()
    if target < lo - tol or target > hi + tol:
        raise DomainError(f"target {target} outside achievable range [{lo}, {hi}]")
    if hi - lo <= tol or abs(target - hi) <= tol or abs(target - lo) <= tol:
        extreme = lo if hi - lo > tol and abs(target - lo) <= tol else hi
        face = (np.abs(b - extreme) <= tol).astype(float)
        return face / face.sum()

    def gap(lam: float) -> float:
        return float(_gibbs(b, lam) @ b) - target

    bound = 50.0
    while gap(-bound) > 0 or gap(bound) < 0:
        bound *= 2.0
        if bound > 1e6:
            raise DomainError(f"cannot bracket the Lagrange multiplier for target {target}")
    lam = brentq(gap, -bound, bound, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    w = _gibbs(b, lam)
    if abs(float(w @ b) - target) > tol:
        raise DomainError(f"maxent solve did not converge for target {target}")
    return w
