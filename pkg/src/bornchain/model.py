"""Transition models: the rule that picks donor and recipient components.

Every model is a per-component weight ``w(a)`` normalised over the current
configuration, ``p_i = w(a_i) / sum_j w(a_j)``. Admissible models have
``w(0) = 0`` and ``w(a) > 0`` for ``a > 0``, which makes ``p`` a proper
distribution vanishing exactly on the empty components.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from bornchain.state import IntensityState, EnumerationGuardError, ENUMERATION_LIMIT, compositions, count_compositions

PROB_TOL = 1e-12


class ModelKind(str, enum.Enum):
    UNIFORM = "uniform"
    LINEAR = "linear"
    CUSTOM = "custom"


class InadmissibleModelError(ValueError):
    pass


@dataclass(frozen=True)
class TransitionModel:
    """A weight rule. ``weights`` is the tabulated ``w(0..N_max)`` for custom models.

    Build through :func:`make_model`, which enforces admissibility; the bare
    constructor does not, so that broken rules can still be handed to
    :func:`validate_model`.
    """

    kind: ModelKind
    weights: tuple[float, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.kind is ModelKind.CUSTOM:
            if self.weights is None:
                raise ValueError("custom model needs a weight table")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def max_intensity(self) -> int | None:
        """Largest intensity the rule is defined for (``None``: unbounded)."""
        return None if self.weights is None else len(self.weights) - 1

    def weight(self, a: np.ndarray | Sequence[int] | int) -> np.ndarray:
        """Unnormalised weights for intensities ``a``."""
        a = np.asarray(a, dtype=np.int64)
        if self.kind is ModelKind.LINEAR:
            return a.astype(float)
        if self.kind is ModelKind.UNIFORM:
            return (a > 0).astype(float)
        table = np.asarray(self.weights, dtype=float)
        if a.size and a.max() >= table.size:
            raise ValueError(f"weight rule defined only up to a = {table.size - 1}")
        return table[a]

    def table(self, N: int) -> np.ndarray:
        """``w(0..N)`` as a float array."""
        return self.weight(np.arange(N + 1))

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.weights is not None:
            d["weights"] = list(self.weights)
        return d


@dataclass
class ModelReport:
    valid: bool
    violations: list[tuple[tuple[int, ...], str]]

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [{"state": list(s), "constraint": c} for s, c in self.violations],
        }


def _tabulate(rule, N: int | None) -> tuple[float, ...]:
    if callable(rule):
        if N is None:
            raise ValueError("a callable weight rule needs N to be tabulated")
        return tuple(float(rule(a)) for a in range(N + 1))
    if isinstance(rule, Mapping):
        keys = {int(k): float(v) for k, v in rule.items()}
        top = max(keys) if N is None else N
        missing = [a for a in range(top + 1) if a not in keys]
        if missing:
            raise ValueError(f"weight rule missing intensities {missing}")
        return tuple(keys[a] for a in range(top + 1))
    table = tuple(float(w) for w in rule)
    if N is not None:
        if len(table) < N + 1:
            raise ValueError(f"weight table has {len(table)} entries, need {N + 1}")
        table = table[: N + 1]
    return table


def make_model(
    kind: str | ModelKind,
    weights: Callable[[int], float] | Mapping | Sequence[float] | None = None,
    N: int | None = None,
    strict: bool = True,
) -> TransitionModel:
    """Build a transition model.

    Parameters
    ----------
    kind : {"uniform", "linear", "custom"}
    weights : callable, mapping or sequence, optional
        Weight rule for custom models, defined on ``0..N``.
    N : int, optional
        Total intensity. Required when ``weights`` is a callable.
    strict : bool
        Reject rules with ``w(0) != 0`` or ``w(a) <= 0`` for some ``a > 0``.
    """
    kind = ModelKind(kind)
    if kind is not ModelKind.CUSTOM:
        if weights is not None:
            raise ValueError(f"{kind.value} model takes no weight rule")
        return TransitionModel(kind)
    if weights is None:
        raise ValueError("custom model needs a weight rule")
    table = _tabulate(weights, N)
    if strict:
        bad = [a for a, w in enumerate(table) if not math.isfinite(w)]
        if bad:
            raise InadmissibleModelError(f"non-finite weights at a = {bad}")
        if table[0] != 0.0:
            raise InadmissibleModelError(f"w(0) must be 0, got {table[0]}")
        bad = [a for a, w in enumerate(table) if a > 0 and w <= 0.0]
        if bad:
            raise InadmissibleModelError(f"w(a) must be positive for a > 0; fails at a = {bad}")
    return TransitionModel(kind, table)


def load_weight_file(path: str | Path, N: int, strict: bool = True) -> TransitionModel:
    """Read a custom rule from JSON ``{"0": w0, "1": w1, ...}`` covering ``0..N``."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: weight file must be a JSON object")
    try:
        rule = {int(k): v for k, v in doc.items()}
    except ValueError as err:
        raise ValueError(f"{path}: keys must be stringified integers") from err
    missing = [a for a in range(N + 1) if a not in rule]
    if missing:
        raise ValueError(f"{path}: missing weights for a = {missing}")
    return make_model(ModelKind.CUSTOM, rule, N=N, strict=strict)


def probabilities(model: TransitionModel, state: IntensityState) -> np.ndarray:
    """Selection probability of each component in ``state``."""
    a = state.as_array()
    if model.kind is ModelKind.LINEAR:
        return a / state.N
    if model.max_intensity is not None and model.max_intensity < state.N:
        raise ValueError(f"weight rule defined only up to a = {model.max_intensity}, state has N = {state.N}")
    w = model.weight(a)
    total = w.sum()
    if not total > 0:
        raise RuntimeError(f"weights vanish on every component of {state}")
    return w / total


def validate_model(model: TransitionModel, M: int, N: int) -> ModelReport:
    """Check every composition of ``N`` into ``M`` parts against the admissibility constraints."""
    if M < 1 or N < 1:
        raise ValueError("need M >= 1 and N >= 1")
    count = count_compositions(M, N)
    if count > ENUMERATION_LIMIT:
        raise EnumerationGuardError(count)
    if model.max_intensity is not None and model.max_intensity < N:
        raise ValueError(f"weight rule defined only up to a = {model.max_intensity}, need N = {N}")

    violations = []
    for a in compositions(M, N):
        state = IntensityState(a)
        try:
            p = probabilities(model, state)
        except RuntimeError:
            violations.append((a, "normalizable"))
            continue
        arr = np.asarray(a)
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            violations.append((a, "nonnegative"))
        elif abs(p.sum() - 1.0) > PROB_TOL:
            violations.append((a, "sums-to-one"))
        if np.any(p[arr == 0] != 0):
            violations.append((a, "zero-at-zero"))
        if np.any(~(p[arr > 0] > 0)):
            violations.append((a, "positive-on-support"))
    return ModelReport(valid=not violations, violations=violations)
