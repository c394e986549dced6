"""Exact solution of the exchange process as a finite absorbing Markov chain.

States are all compositions of ``N`` into ``M`` parts; the pure states
(one component equal to ``N``) are absorbing. Absorption probabilities and
expected step counts come from sparse linear solves on the transient block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from bornchain.model import TransitionModel
from bornchain.state import (
    ENUMERATION_LIMIT,
    EnumerationGuardError,
    compositions,
    composition_rank,
    count_compositions,
)

#: Transient-block size above which the solver switches to an iterative method.
DIRECT_SOLVE_LIMIT = 2 * 10**4
ITERATIVE_TOL = 1e-12


class SolverError(RuntimeError):
    pass


@dataclass
class StateSpace:
    M: int
    N: int
    states: np.ndarray
    index: dict[tuple[int, ...], int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def pure_states(self) -> np.ndarray:
        """Ordinal of the pure state of each eigenstate ``0..M-1``."""
        return composition_rank(np.eye(self.M, dtype=np.int64) * self.N, self.N)

    def transient_mask(self) -> np.ndarray:
        return self.states.max(axis=1) < self.N


@dataclass
class ChainSolution:
    """``absorb[s, i]``: probability that state ``s`` ends in eigenstate ``i``."""

    space: StateSpace
    absorb: np.ndarray
    expected_total: np.ndarray
    expected_nontrivial: np.ndarray

    def at(self, a) -> tuple[np.ndarray, float, float]:
        s = self.space.index[tuple(a)]
        return self.absorb[s], float(self.expected_total[s]), float(self.expected_nontrivial[s])


def enumerate_states(M: int, N: int) -> StateSpace:
    count = count_compositions(M, N)
    if count > ENUMERATION_LIMIT:
        raise EnumerationGuardError(count)
    states = np.array(list(compositions(M, N)), dtype=np.int64).reshape(count, M)
    index = {tuple(row): i for i, row in enumerate(states.tolist())}
    return StateSpace(M, N, states, index)


def _probability_matrix(model: TransitionModel, space: StateSpace) -> np.ndarray:
    if model.max_intensity is not None and model.max_intensity < space.N:
        raise ValueError(f"weight rule defined only up to a = {model.max_intensity}")
    w = model.weight(space.states)
    total = w.sum(axis=1, keepdims=True)
    if np.any(total <= 0):
        raise ValueError("model assigns zero total weight to some state")
    return w / total


def build_chain(model: TransitionModel, space: StateSpace) -> sp.csr_matrix:
    """One-step transition matrix, row-stochastic, in ``space`` ordering.

    Entry ``(s, s')`` sums ``p_i p_j`` over ordered pairs (donor ``i``,
    recipient ``j``) taking ``s`` to ``s'``; the diagonal carries the null
    mass ``sum_i p_i**2``.
    """
    P = _probability_matrix(model, space)
    S, M = P.shape
    rows = [np.arange(S)]
    cols = [np.arange(S)]
    vals = [np.einsum("ij,ij->i", P, P)]
    for i in range(M):
        for j in range(M):
            if i == j:
                continue
            mass = P[:, i] * P[:, j]
            live = np.nonzero(mass > 0)[0]
            if live.size == 0:
                continue
            target = space.states[live].copy()
            target[:, i] -= 1
            target[:, j] += 1
            rows.append(live)
            cols.append(composition_rank(target, space.N))
            vals.append(mass[live])
    # coo -> csr sums duplicates; there are none, since each (i, j) gives a distinct target
    chain = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(S, S)
    ).tocsr()
    chain.sum_duplicates()
    return chain


class _TransientSolver:
    """Solves ``(I - Q) x = b`` on the transient block, factorising once."""

    def __init__(self, chain: sp.csr_matrix, space: StateSpace):
        self.transient = np.nonzero(space.transient_mask())[0]
        self.absorbing = space.pure_states()
        Q = chain[self.transient][:, self.transient]
        self.R = chain[self.transient][:, self.absorbing]
        n = len(self.transient)
        self.A = (sp.identity(n, format="csc") - Q.tocsc()).tocsc()
        self._lu = None
        if 0 < n <= DIRECT_SOLVE_LIMIT:
            try:
                self._lu = spla.splu(self.A)
            except RuntimeError as err:
                raise SolverError(f"transient block is singular: {err}") from err

    def solve(self, b: np.ndarray) -> np.ndarray:
        if len(self.transient) == 0:
            return np.zeros_like(b, dtype=float)
        if self._lu is not None:
            x = self._lu.solve(np.asarray(b, dtype=float))
        else:
            x = self._iterative(np.asarray(b, dtype=float))
        if not np.all(np.isfinite(x)):
            raise SolverError("non-finite solution on the transient block")
        return x

    def _iterative(self, b: np.ndarray) -> np.ndarray:
        if b.ndim == 2:
            return np.column_stack([self._iterative(b[:, c]) for c in range(b.shape[1])])
        ilu = spla.spilu(self.A, drop_tol=1e-6, fill_factor=20)
        pre = spla.LinearOperator(self.A.shape, ilu.solve)
        x, info = spla.gmres(self.A, b, M=pre, rtol=ITERATIVE_TOL, atol=0.0, restart=200, maxiter=2000)
        if info != 0:
            raise SolverError(f"iterative solve did not converge (info={info})")
        return x


def _expand(space: StateSpace, solver: _TransientSolver, x_transient: np.ndarray, pure_rows) -> np.ndarray:
    out = np.zeros((len(space),) + x_transient.shape[1:])
    out[solver.transient] = x_transient
    out[solver.absorbing] = pure_rows
    return out


def absorption_probabilities(chain: sp.csr_matrix, space: StateSpace, _solver=None) -> np.ndarray:
    """Matrix ``[state, eigenstate]`` of absorption probabilities."""
    solver = _solver or _TransientSolver(chain, space)
    x = solver.solve(solver.R.toarray())
    return _expand(space, solver, x, np.eye(space.M))


def expected_steps(chain: sp.csr_matrix, space: StateSpace, count_nulls: bool = True, _solver=None) -> np.ndarray:
    """Expected steps to absorption from every state.

    With ``count_nulls=False`` each step is weighted by its probability of
    changing the state, ``1 - chain[s, s]``, which counts only the
    intensity-changing transactions.
    """
    solver = _solver or _TransientSolver(chain, space)
    if count_nulls:
        reward = np.ones(len(solver.transient))
    else:
        reward = 1.0 - chain.diagonal()[solver.transient]
    return _expand(space, solver, solver.solve(reward), 0.0)


def solve_chain(model: TransitionModel, space: StateSpace) -> ChainSolution:
    chain = build_chain(model, space)
    solver = _TransientSolver(chain, space)
    return ChainSolution(
        space=space,
        absorb=absorption_probabilities(chain, space, solver),
        expected_total=expected_steps(chain, space, True, solver),
        expected_nontrivial=expected_steps(chain, space, False, solver),
    )


def second_difference_check(absorb: np.ndarray) -> float:
    """Largest ``|P(a+1) - 2 P(a) + P(a-1)|`` for an ``M = 2`` absorption matrix.

    ``P(a)`` is the probability of ending in eigenstate 0 from ``(a, N - a)``.
    """
    absorb = np.asarray(absorb)
    if absorb.ndim != 2 or absorb.shape[1] != 2:
        raise ValueError("expected an absorption matrix with two eigenstate columns")
    # descending order puts (N, 0) first, so reverse to index by a
    P = absorb[::-1, 0]
    if len(P) < 3:
        return 0.0
    return float(np.max(np.abs(P[2:] - 2 * P[1:-1] + P[:-2])))
