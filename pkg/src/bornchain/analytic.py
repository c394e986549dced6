"""Closed-form predictions for absorption probabilities and step counts.

Step-count formulas work on the two-component reduction: component ``i``
competes against the pooled remainder ``N - a_i`` with selection probability
``p(a) = w(a) / (w(a) + w(N - a))``. With at most two nonzero components
this is the actual process. With more, the total-step figure is a
heuristic and is flagged as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bornchain.model import ModelKind, TransitionModel
from bornchain.state import IntensityState


@dataclass(frozen=True)
class StepPrediction:
    """Mean step counts for one starting configuration.

    ``v`` holds the per-component mean number of interactions until that
    component reaches 0 or ``N``.
    """

    v: tuple[float, ...]
    total: float
    nontrivial: int
    heuristic: bool


def born_probabilities(state: IntensityState) -> np.ndarray:
    return state.as_array() / state.N


def pooled_probability(model: TransitionModel, a: int, N: int) -> float:
    """Selection probability of an intensity ``a`` facing a single pooled rival ``N - a``."""
    if model.kind is ModelKind.LINEAR:
        return a / N
    w = model.weight([a, N - a])
    return float(w[0] / w.sum())


def q_value(model: TransitionModel, a: int, N: int) -> float:
    """``1 / (p (1 - p))`` for the pooled two-component walk; undefined at ``a`` = 0 or ``N``."""
    if not 0 < a < N:
        raise ValueError(f"q is defined only for 0 < a < N, got a = {a}, N = {N}")
    p = pooled_probability(model, a, N)
    return 1.0 / (p * (1.0 - p))


def _q_table(model: TransitionModel, N: int) -> np.ndarray:
    """``q[i]`` for ``i = 1..N-1`` stored at index ``i`` (index 0 unused)."""
    q = np.zeros(max(N, 1))
    for i in range(1, N):
        q[i] = q_value(model, i, N)
    return q


def _v(q: np.ndarray, a: int, N: int) -> float:
    if a == 0 or a == N:
        return 0.0
    i = np.arange(1, N)
    head = (a / N) * (N - i) * q[1:N]
    j = np.arange(1, a)
    tail = q[1:a] * (a - j)
    # fsum keeps the O(N^2)-sized q terms from eating the small differences
    return math.fsum(np.concatenate([head, -tail]).tolist())


def mean_steps_single(model: TransitionModel, a: int, N: int) -> float:
    """Mean interactions before intensity ``a`` (out of ``N``) reaches 0 or ``N``."""
    if not 0 <= a <= N:
        raise ValueError(f"need 0 <= a <= N, got a = {a}, N = {N}")
    return _v(_q_table(model, N), a, N)


def mean_steps_all(model: TransitionModel, N: int) -> np.ndarray:
    """``mean_steps_single`` for every ``a = 0..N``."""
    q = _q_table(model, N)
    return np.array([_v(q, a, N) for a in range(N + 1)])


def mean_nontrivial_steps(state: IntensityState) -> int:
    """Mean number of intensity-changing steps, ``sum_{i<j} a_i a_j``; model independent."""
    N = state.N
    return (N * N - sum(x * x for x in state.a)) // 2


def max_nontrivial(M: int, N: int) -> float:
    """Largest :func:`mean_nontrivial_steps` over configurations, attained at ``a_i = N/M``."""
    if M < 1 or N < 1:
        raise ValueError("need M >= 1 and N >= 1")
    return (M - 1) * N * N / (2 * M)


def predict_steps(state: IntensityState, model: TransitionModel) -> StepPrediction:
    N = state.N
    q = _q_table(model, N)
    cache: dict[int, float] = {}
    v = tuple(cache.setdefault(x, _v(q, x, N)) for x in state.a)
    return StepPrediction(
        v=v,
        total=0.5 * math.fsum(v),
        nontrivial=mean_nontrivial_steps(state),
        heuristic=len(state.support) > 2,
    )


def mean_total_steps(state: IntensityState, model: TransitionModel) -> float:
    """Half the sum of per-component completion times.

    Exact when at most two components are nonzero. See :func:`predict_steps`
    for the heuristic flag.
    """
    return predict_steps(state, model).total
