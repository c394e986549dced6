"""Ensemble summaries and the tests used to hold them against predictions."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, asdict
from statistics import NormalDist

import numpy as np
from scipy.special import gammaincc


@dataclass
class EnsembleSummary:
    """Aggregate of a trial ensemble.

    Step moments are taken over trials that reached a pure state. In partial
    mode ``winner_counts`` counts trials whose final state happens to be pure
    and ``unfinished`` counts the ones left mixed.
    """

    mode: str
    k: int | None
    trials: int
    winner_counts: tuple[int, ...]
    unfinished: int
    step_mean: float
    step_variance: float
    nontrivial_mean: float
    nontrivial_variance: float
    null_fraction: float
    null_fraction_se: float
    final_mean: tuple[float, ...]
    final_variance: tuple[float, ...]
    final_distribution: dict[str, int] | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["winner_counts"] = list(self.winner_counts)
        d["final_mean"] = list(self.final_mean)
        d["final_variance"] = list(self.final_variance)
        return d


@dataclass(frozen=True)
class GoodnessOfFit:
    statistic: float
    dof: int
    p_value: float


def proportion_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError("need trials >= 1 and 0 <= successes <= trials")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + level / 2)
    n = trials
    phat = successes / n
    centre = (phat + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    lo, hi = centre - half, centre + half
    # the exact endpoints at 0 and n are 0 and 1; pin them against rounding
    if successes == 0:
        lo = 0.0
    if successes == n:
        hi = 1.0
    return max(0.0, lo), min(1.0, hi)


def chi_square_pvalue(statistic: float, dof: int) -> float:
    if dof < 1:
        return 1.0
    return float(gammaincc(dof / 2.0, statistic / 2.0))


def chi_square_gof(observed, expected, trials: int | None = None) -> GoodnessOfFit:
    """Pearson goodness of fit of counts ``observed`` to probabilities ``expected``."""
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    if observed.shape != expected.shape or observed.ndim != 1:
        raise ValueError("observed and expected must be 1-d and of equal length")
    if np.any(expected <= 0):
        raise ValueError("every category needs positive expected probability")
    if abs(expected.sum() - 1.0) > 1e-9:
        raise ValueError(f"expected probabilities sum to {expected.sum()}, not 1")
    n = observed.sum() if trials is None else trials
    counts = expected * n
    if np.any(counts < 5):
        warnings.warn("some expected counts are below 5; chi-square approximation is poor", stacklevel=2)
    stat = float(np.sum((observed - counts) ** 2 / counts))
    dof = len(observed) - 1
    return GoodnessOfFit(stat, dof, chi_square_pvalue(stat, dof))


def mean_z_test(sample_mean: float, sample_sd: float, n: int, target: float) -> float:
    if n < 2 or not sample_sd > 0:
        raise ValueError("need n >= 2 and a positive standard deviation")
    return (sample_mean - target) / (sample_sd / math.sqrt(n))


def ratio_standard_error(num: np.ndarray, den: np.ndarray) -> float:
    """Delta-method standard error of ``sum(num) / sum(den)`` over i.i.d. pairs."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    n = len(num)
    total = den.sum()
    if n < 2 or total <= 0:
        return 0.0
    r = num.sum() / total
    resid = num - r * den
    return float(math.sqrt(n / (n - 1) * np.sum(resid**2)) / total)


def _moments(x: np.ndarray) -> tuple[float, float]:
    if len(x) == 0:
        return 0.0, 0.0
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1)) if len(x) > 1 else 0.0
    return mean, var


def summarize(records) -> EnsembleSummary:
    """Collapse :class:`~bornchain.engine.TrialRecords` into an :class:`EnsembleSummary`."""
    M = records.final_states.shape[1]
    N = records.initial.N
    if records.mode == "partial":
        pure = records.final_states.max(axis=1) == N
        winners = np.argmax(records.final_states[pure], axis=1)
        used = np.ones(records.trials, dtype=bool)
    else:
        pure = records.winner >= 0
        winners = records.winner[pure]
        used = pure
    counts = np.bincount(winners, minlength=M)

    total = records.total_steps[used]
    nontrivial = records.nontrivial_steps[used]
    nulls = total - nontrivial
    step_total = int(total.sum())
    null_fraction = float(nulls.sum() / step_total) if step_total else 0.0

    step_mean, step_var = _moments(total)
    nt_mean, nt_var = _moments(nontrivial)
    finals = records.final_states
    distribution = None
    if records.mode == "partial":
        rows, freq = np.unique(finals, axis=0, return_counts=True)
        # descending lexicographic, matching the oracle state order
        order = np.lexsort(rows.T[::-1])[::-1]
        distribution = {":".join(map(str, rows[i])): int(freq[i]) for i in order}
    return EnsembleSummary(
        mode=records.mode,
        k=records.k,
        trials=records.trials,
        winner_counts=tuple(int(c) for c in counts),
        unfinished=int(records.trials - pure.sum()),
        step_mean=step_mean,
        step_variance=step_var,
        nontrivial_mean=nt_mean,
        nontrivial_variance=nt_var,
        null_fraction=null_fraction,
        null_fraction_se=ratio_standard_error(nulls, total),
        final_mean=tuple(float(x) for x in finals.mean(axis=0)),
        final_variance=tuple(float(x) for x in (finals.var(axis=0, ddof=1) if records.trials > 1 else np.zeros(M))),
        final_distribution=distribution,
    )
