"""Monte Carlo engine for the serial epsilon-exchange process.

One step draws a donor and a recipient independently from the model's
selection probabilities at the current configuration. If they coincide the
step is null; otherwise one unit of intensity moves from donor to recipient.

Random streams
--------------
Each trial owns a numpy ``PCG64`` stream seeded by
``SeedSequence(entropy=master_seed, spawn_key=(trial_index,))``. SeedSequence
hashes the pair into the generator state, so streams for different trial
indices are independent and a trial's outcome does not depend on which
thread ran it or in what order. Component draws use inverse-CDF lookup on
``Generator.random()`` doubles: donor first, recipient second.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from bornchain.model import ModelKind, TransitionModel
from bornchain.state import IntensityState

PRNG_ID = "numpy-PCG64; SeedSequence(entropy=master_seed, spawn_key=(trial_index,)); inverse-CDF on Generator.random()"
MIN_MAX_STEPS = 10**6

_KIND_CODE = {ModelKind.UNIFORM: 0, ModelKind.LINEAR: 1, ModelKind.CUSTOM: 2}


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.trial_index < 0:
            raise ValueError("trial_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.trial_index,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class TransactionOutcome:
    donor: int
    recipient: int

    @property
    def is_null(self) -> bool:
        return self.donor == self.recipient


@dataclass
class EvolutionResult:
    """Outcome of one trial. ``winner`` is ``None`` when the step guard was hit."""

    winner: int | None
    total_steps: int
    nontrivial_steps: int
    change_counts: tuple[int, ...]
    final_state: IntensityState

    @property
    def finished(self) -> bool:
        return self.winner is not None


@dataclass
class TrialRecords:
    """Per-trial arrays from :func:`simulate_trials`, indexed by trial number.

    ``winner`` is -1 for trials that hit the step guard and for partial runs.
    """

    mode: str
    k: int | None
    initial: IntensityState
    winner: np.ndarray
    total_steps: np.ndarray
    nontrivial_steps: np.ndarray
    final_states: np.ndarray
    change_counts: np.ndarray

    @property
    def trials(self) -> int:
        return len(self.winner)


# --- compiled kernels -------------------------------------------------------


@numba.njit(nogil=True, cache=True)
def _weight(kind, table, x):
    if kind == 0:
        return 1.0 if x > 0 else 0.0
    if kind == 1:
        return float(x)
    return table[x]


@numba.njit(nogil=True, cache=True)
def _pick(a, kind, table, total, u):
    target = u * total
    cum = 0.0
    last = -1
    for i in range(a.shape[0]):
        w = _weight(kind, table, a[i])
        if w > 0.0:
            cum += w
            last = i
            if target < cum:
                return i
    # rounding left target >= cum; fall back to the last eligible component
    return last


@numba.njit(nogil=True, cache=True)
def _draw_pair(a, kind, table, rng):
    total = 0.0
    for i in range(a.shape[0]):
        total += _weight(kind, table, a[i])
    donor = _pick(a, kind, table, total, rng.random())
    recipient = _pick(a, kind, table, total, rng.random())
    return donor, recipient


@numba.njit(nogil=True, cache=True)
def _evolve_kernel(a, kind, table, rng, max_steps, changes):
    nonzero = 0
    for i in range(a.shape[0]):
        if a[i] > 0:
            nonzero += 1
    steps = 0
    nontrivial = 0
    while nonzero > 1:
        if steps >= max_steps:
            return steps, nontrivial, False
        d, r = _draw_pair(a, kind, table, rng)
        steps += 1
        if d != r:
            a[d] -= 1
            a[r] += 1
            nontrivial += 1
            changes[d] += 1
            changes[r] += 1
            if a[d] == 0:
                nonzero -= 1
    return steps, nontrivial, True


@numba.njit(nogil=True, cache=True)
def _partial_kernel(a, kind, table, rng, k, changes):
    nontrivial = 0
    for _ in range(k):
        d, r = _draw_pair(a, kind, table, rng)
        if d != r:
            a[d] -= 1
            a[r] += 1
            nontrivial += 1
            changes[d] += 1
            changes[r] += 1
    return nontrivial


# --- python surface ----------------------------------------------------------


def _encode(model: TransitionModel, N: int) -> tuple[int, np.ndarray]:
    if model.kind is ModelKind.CUSTOM:
        if model.max_intensity < N:
            raise ValueError(f"weight rule defined only up to a = {model.max_intensity}, state has N = {N}")
        return 2, np.ascontiguousarray(model.weights[: N + 1], dtype=np.float64)
    return _KIND_CODE[model.kind], np.zeros(1)


def _as_generator(seed: SeedSpec | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return seed.generator()


def default_max_steps(state: IntensityState, model: TransitionModel) -> int:
    """Step guard: 100 times the predicted mean, never below one million."""
    from bornchain.analytic import mean_total_steps

    return max(MIN_MAX_STEPS, int(math.ceil(100 * mean_total_steps(state, model))))


def step(
    state: IntensityState, model: TransitionModel, rng: np.random.Generator
) -> tuple[IntensityState, TransactionOutcome]:
    """Apply one donor/recipient transaction."""
    kind, table = _encode(model, state.N)
    a = state.as_array()
    d, r = _draw_pair(a, kind, table, rng)
    outcome = TransactionOutcome(int(d), int(r))
    if outcome.is_null:
        return state, outcome
    a[d] -= 1
    a[r] += 1
    return IntensityState(tuple(a.tolist())), outcome


def evolve(
    state: IntensityState,
    model: TransitionModel,
    seed: SeedSpec | np.random.Generator,
    max_steps: int | None = None,
) -> EvolutionResult:
    """Run one trial until a single component holds all the intensity.

    If ``max_steps`` transactions pass without absorption the result has
    ``winner=None`` and carries the state reached so far.
    """
    if max_steps is None:
        max_steps = default_max_steps(state, model)
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    kind, table = _encode(model, state.N)
    a = state.as_array()
    changes = np.zeros(state.M, dtype=np.int64)
    steps, nontrivial, done = _evolve_kernel(a, kind, table, _as_generator(seed), max_steps, changes)
    return EvolutionResult(
        winner=int(np.argmax(a)) if done else None,
        total_steps=int(steps),
        nontrivial_steps=int(nontrivial),
        change_counts=tuple(changes.tolist()),
        final_state=IntensityState(tuple(a.tolist())),
    )


def evolve_partial(
    state: IntensityState,
    model: TransitionModel,
    seed: SeedSpec | np.random.Generator,
    k: int,
) -> IntensityState:
    """Apply exactly ``k`` transactions, null ones included, and return the state."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    kind, table = _encode(model, state.N)
    a = state.as_array()
    _partial_kernel(a, kind, table, _as_generator(seed), k, np.zeros(state.M, dtype=np.int64))
    return IntensityState(tuple(a.tolist()))


def simulate_trials(
    state: IntensityState,
    model: TransitionModel,
    trials: int,
    master_seed: int,
    mode: str = "absorb",
    k: int | None = None,
    max_steps: int | None = None,
    threads: int = 1,
) -> TrialRecords:
    """Run ``trials`` independent trials and keep the per-trial records.

    Trial ``t`` always uses stream ``SeedSpec(master_seed, t)`` and writes
    only row ``t`` of the output arrays, so ``threads`` changes speed but
    never results.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if mode not in ("absorb", "partial"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "partial":
        if k is None or k < 0:
            raise ValueError("partial mode needs k >= 0")
    else:
        k = None
        if max_steps is None:
            max_steps = default_max_steps(state, model)
        if max_steps <= 0:
            raise ValueError("max_steps must be positive")
    SeedSpec(master_seed)  # range check

    kind, table = _encode(model, state.N)
    start = state.as_array()
    M = state.M
    winner = np.full(trials, -1, dtype=np.int64)
    total = np.zeros(trials, dtype=np.int64)
    nontrivial = np.zeros(trials, dtype=np.int64)
    finals = np.zeros((trials, M), dtype=np.int64)
    changes = np.zeros((trials, M), dtype=np.int64)

    def work(lo: int, hi: int) -> None:
        for t in range(lo, hi):
            rng = SeedSpec(master_seed, t).generator()
            a = start.copy()
            if mode == "partial":
                nontrivial[t] = _partial_kernel(a, kind, table, rng, k, changes[t])
                total[t] = k
            else:
                s, n, done = _evolve_kernel(a, kind, table, rng, max_steps, changes[t])
                total[t] = s
                nontrivial[t] = n
                if done:
                    winner[t] = int(np.argmax(a))
            finals[t] = a

    threads = max(1, int(threads))
    if threads == 1:
        work(0, trials)
    else:
        bounds = np.linspace(0, trials, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(work, int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
            for f in futures:
                f.result()

    return TrialRecords(mode, k, state, winner, total, nontrivial, finals, changes)


def run_ensemble(
    state: IntensityState,
    model: TransitionModel,
    trials: int,
    master_seed: int,
    mode: str = "absorb",
    k: int | None = None,
    max_steps: int | None = None,
    threads: int = 1,
):
    """Simulate an ensemble and return its :class:`~bornchain.stats.EnsembleSummary`."""
    from bornchain.stats import summarize

    records = simulate_trials(state, model, trials, master_seed, mode, k, max_steps, threads)
    return summarize(records)
