"""Active-set and tripartition prediction from interior iterates.

Two predictors coexist:

* one-shot threshold sets read off a single iterate, used for the
  tripartition study, and
* a stateful three-set procedure (active / inactive / undetermined) that
  requires the joint test x_i < C and s_i > C to hold on two consecutive
  iterates before committing an index to the active set.  Its active set
  is what the experiments score and the crossover fixes to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .model import SET_TOL

# Default prediction threshold; indices with x below it (and s above it)
# count as predicted active.
DEFAULT_THRESHOLD = SET_TOL


@dataclass(frozen=True)
class PredictionState:
    """Three-set predictor state plus the previous iterate's test results."""

    active: frozenset
    inactive: frozenset
    undetermined: frozenset
    last_test: tuple

    @property
    def n(self) -> int:
        return len(self.last_test)

    @staticmethod
    def fresh(n: int) -> "PredictionState":
        return PredictionState(
            active=frozenset(),
            inactive=frozenset(),
            undetermined=frozenset(range(n)),
            last_test=tuple(False for _ in range(n)),
        )


@dataclass(frozen=True)
class PredictionRatios:
    false_prediction: float
    missed_prediction: float
    correction: float


def predicted_sets(x, s, C: float):
    """One-shot threshold sets (A_C, S_C, I_C, T_C) at a single iterate.

    A_C = {x_i < C}, S_C = {s_i >= C}, I_C = {x_i >= C} and T_C is the
    complement of S_C and I_C.
    """
    if C <= 0:
        raise ValueError("threshold C must be positive")
    x = linalg.as_vector(x)
    s = linalg.as_vector(s, x.size)
    A_C = frozenset(np.flatnonzero(x < C).tolist())
    S_C = frozenset(np.flatnonzero(s >= C).tolist())
    I_C = frozenset(np.flatnonzero(x >= C).tolist())
    T_C = frozenset(range(x.size)) - S_C - I_C
    return A_C, S_C, I_C, T_C


def update_prediction(state: PredictionState, x, s, C: float = DEFAULT_THRESHOLD) -> PredictionState:
    """Advance the three-set predictor by one iterate.

    Moves: undetermined -> active when the test held here and at the
    previous iterate; undetermined -> inactive when it fails now; active
    -> undetermined when it fails now; inactive -> undetermined when it
    holds now.  An index in the undetermined set whose test holds now but
    not previously stays undetermined awaiting confirmation.
    """
    x = linalg.as_vector(x, state.n)
    s = linalg.as_vector(s, state.n)
    test = (x < C) & (s > C)

    active = set(state.active)
    inactive = set(state.inactive)
    undetermined = set(state.undetermined)

    for i in range(state.n):
        if i in undetermined:
            if test[i] and state.last_test[i]:
                undetermined.discard(i)
                active.add(i)
            elif not test[i]:
                undetermined.discard(i)
                inactive.add(i)
        elif i in active:
            if not test[i]:
                active.discard(i)
                undetermined.add(i)
        else:
            if test[i]:
                inactive.discard(i)
                undetermined.add(i)

    return PredictionState(
        active=frozenset(active),
        inactive=frozenset(inactive),
        undetermined=frozenset(undetermined),
        last_test=tuple(bool(t) for t in test),
    )


def prediction_ratios(predicted, actual) -> PredictionRatios:
    """Score a predicted index set against a reference one.

    The union of the two sets partitions into false predictions, missed
    predictions and correct ones; the three ratios are their fractions and
    sum to one.  An empty union counts as a perfect (vacuous) prediction.
    """
    predicted = frozenset(predicted)
    actual = frozenset(actual)
    union = predicted | actual
    if not union:
        return PredictionRatios(0.0, 0.0, 1.0)
    hit = predicted & actual
    return PredictionRatios(
        false_prediction=len(predicted - hit) / len(union),
        missed_prediction=len(actual - hit) / len(union),
        correction=len(hit) / len(union),
    )
