"""Bayesian entanglement purification of partially known Bell-diagonal states."""

from .bellcore import (
    B,
    BellLabel,
    BellObservable,
    entropy,
    expectation,
    horodecki_state,
    jaynes_state,
    maxent_state,
    weight_vector,
    werner_weights,
)
from .errors import CapacityError, DegeneratePosteriorError, DomainError, PurificationError

__version__ = "0.1.0"
