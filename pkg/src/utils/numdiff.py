"""Central finite differences used as derivative oracles."""

# ================================== Imports ================================== #
# Standard Library
from typing import Callable

ScalarFn = Callable[[float], float]


# ================================== Functions ================================ #
def central_first(f: ScalarFn, x: float, step: float) -> float:
    """(f(x+h) - f(x-h)) / 2h."""
    return (f(x + step) - f(x - step)) / (2.0 * step)


def central_second(f: ScalarFn, x: float, step: float) -> float:
    """(f(x+h) - 2 f(x) + f(x-h)) / h^2."""
    return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step)


def mixed_second(
    f: Callable[[float, float], float], x: float, y: float, step: float
) -> float:
    """Central estimate of d^2 f / dx dy."""
    return (
        f(x + step, y + step)
        - f(x + step, y - step)
        - f(x - step, y + step)
        + f(x - step, y - step)
    ) / (4.0 * step * step)


def richardson(
    rule: Callable[[ScalarFn, float, float], float], f: ScalarFn, x: float, step: float
) -> float:
    """One Richardson step for an O(h^2) rule: (4 D(h/2) - D(h)) / 3."""
    return (4.0 * rule(f, x, step / 2.0) - rule(f, x, step)) / 3.0


def derivative_residual(
    rule: Callable[[ScalarFn, float, float], float],
    f: ScalarFn,
    x: float,
    exact: float,
    step: float,
    tol: float,
) -> float:
    """|rule(f, x, step) - exact|, refined by Richardson if it misses ``tol``."""
    residual = abs(rule(f, x, step) - exact)
    if residual <= tol:
        return residual
    return min(residual, abs(richardson(rule, f, x, step) - exact))
