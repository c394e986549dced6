from fractions import Fraction

import pytest

from bornchain import make_model


def exact_two_component_hitting(weight, N):
    """Expected steps to absorption for M = 2, by exact first-step analysis.

    Builds the tridiagonal system ``T_a = 1 + sum_b P(a -> b) T_b`` directly
    from the four (donor, recipient) pairs, in rational arithmetic, and
    solves it by elimination. Independent of the closed form and of the
    sparse solver.
    """
    T = [Fraction(0)] * (N + 1)
    if N < 2:
        return T
    up, down = {}, {}
    for a in range(1, N):
        wa, wb = Fraction(weight(a)), Fraction(weight(N - a))
        p = wa / (wa + wb)
        down[a] = p * (1 - p)  # donor is a, recipient the other
        up[a] = (1 - p) * p
    # (up+down) T_a - down T_{a-1} - up T_{a+1} = 1, Thomas algorithm
    n = N - 1
    diag = [up[a] + down[a] for a in range(1, N)]
    lower = [-down[a] for a in range(1, N)]
    upper = [-up[a] for a in range(1, N)]
    rhs = [Fraction(1)] * n
    for i in range(1, n):
        m = lower[i] / diag[i - 1]
        diag[i] -= m * upper[i - 1]
        rhs[i] -= m * rhs[i - 1]
    x = [Fraction(0)] * n
    x[-1] = rhs[-1] / diag[-1]
    for i in range(n - 2, -1, -1):
        x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i]
    for a in range(1, N):
        T[a] = x[a - 1]
    return T


WEIGHT_RULES = {
    "uniform": lambda a: 1 if a > 0 else 0,
    "linear": lambda a: a,
    "square": lambda a: a * a,
}


def model_for(name, N):
    if name == "square":
        return make_model("custom", WEIGHT_RULES["square"], N=N)
    return make_model(name)


@pytest.fixture(params=sorted(WEIGHT_RULES))
def model_name(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
