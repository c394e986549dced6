"""Stochastic epsilon-exchange model of quantum measurement.

Simulation engine, exact absorbing-chain solver and closed-form step
predictions for the serial intensity-exchange process.
"""

from bornchain.state import IntensityState
from bornchain.model import (
    ModelKind,
    ModelReport,
    TransitionModel,
    make_model,
    probabilities,
    validate_model,
)
from bornchain.engine import (
    EvolutionResult,
    SeedSpec,
    TransactionOutcome,
    evolve,
    evolve_partial,
    run_ensemble,
    simulate_trials,
    step,
)
from bornchain.analytic import (
    StepPrediction,
    born_probabilities,
    max_nontrivial,
    mean_nontrivial_steps,
    mean_steps_single,
    mean_total_steps,
    predict_steps,
    q_value,
)
from bornchain.oracle import (
    ChainSolution,
    StateSpace,
    absorption_probabilities,
    build_chain,
    enumerate_states,
    expected_steps,
    second_difference_check,
    solve_chain,
)
from bornchain.stats import (
    EnsembleSummary,
    GoodnessOfFit,
    chi_square_gof,
    mean_z_test,
    proportion_interval,
)

__version__ = "0.1.0"
