"""Log-space q-Pochhammer arithmetic and the real dilogarithm.

Everything here works on natural logarithms. Finite products of N factors
and exponents of size beta*N overflow the probability scale long before they
lose meaning in log space, so probabilities only appear at the reporting
boundary.
"""

# ================================== Imports ================================== #
# Standard Library
import math
from functools import lru_cache, partial

# Third-party
import numpy as np
from loguru import logger

# Local Application
from src.models.numeric import NumericConfig, QArgument
from src.utils.errors import ConstraintViolation, ConvergenceError, DomainError
from src.utils.numdiff import central_first, richardson

PI2_6 = math.pi**2 / 6.0
DEFAULT_NUMERIC = NumericConfig()


# ================================== Helpers ================================== #
def check_q(q: float) -> None:
    """Raise a DomainError unless 0 <= q < 1."""
    if not (0.0 <= q < 1.0):
        raise DomainError(f"q must lie in [0, 1) (got q={q!r})")


def log1mexp(t: float | np.ndarray) -> float | np.ndarray:
    """ln(1 - e^{-t}) for t > 0, accurate at both ends of the range."""
    t = np.asarray(t, dtype=float)
    out = np.where(
        t < math.log(2.0),
        np.log(-np.expm1(-np.minimum(t, math.log(2.0)))),
        np.log1p(-np.exp(-np.maximum(t, math.log(2.0)))),
    )
    return float(out) if out.ndim == 0 else out


def compensated_cumsum(values: np.ndarray) -> np.ndarray:
    """Prefix sums with Neumaier compensation; out[0] = 0, out[k] = sum(values[:k])."""
    out = np.empty(len(values) + 1)
    out[0] = 0.0
    total = 0.0
    comp = 0.0
    for k, value in enumerate(values.tolist(), start=1):
        t = total + value
        if abs(total) >= abs(value):
            comp += (total - t) + value
        else:
            comp += (value - t) + total
        total = t
        out[k] = total + comp
    return out


# ================================== q-Pochhammer ============================= #
def log_qpoch_finite(q: float, n: int) -> float:
    """ln (q; q)_n = sum_{k=1..n} ln(1 - q^k).

    Args:
        q: Base in [0, 1).
        n: Number of factors, n >= 0.

    Returns:
        The log of the finite product (always <= 0).

    Raises:
        DomainError: If q is outside [0, 1) or n is negative.
    """
    check_q(q)
    if n < 0:
        raise DomainError(f"n must be >= 0 (got n={n})")
    if n == 0 or q == 0.0:
        return 0.0
    k = np.arange(1, n + 1, dtype=float)
    return math.fsum(np.log1p(-np.power(q, k)))


@lru_cache(maxsize=64)
def log_qpoch_prefix(q: float, n: int) -> np.ndarray:
    """Read-only table of ln (q; q)_k for k = 0..n.

    Tables are cached per (q, n) and never mutated, so threads can share them.
    """
    check_q(q)
    k = np.arange(1, n + 1, dtype=float)
    table = compensated_cumsum(np.log1p(-np.power(q, k)))
    table.flags.writeable = False
    logger.debug("Built ln(q;q)_k prefix table (q={}, n={})", q, n)
    return table


def log_qpoch_inf(arg: QArgument, cfg: NumericConfig = DEFAULT_NUMERIC) -> float:
    """ln (q^m; q)_inf = sum_{k>=0} ln(1 - q^{m+k}).

    The sum stops at the first K whose remainder bound
    q^{m+K+1} / ((1-q)(1-q^{m+K+1})) drops below ``cfg.tail_tol``.

    Raises:
        ConvergenceError: If m = 0 (the first factor is zero) or more than
            ``cfg.max_terms`` terms would be needed.
    """
    q, m = arg.q, arg.m
    if m == 0.0:
        raise ConvergenceError("(q^0; q)_inf contains the factor 1 - 1 = 0")
    if q == 0.0:
        return 0.0

    log_q = math.log(q)

    def tail(K: int) -> float:
        t = math.exp((m + K + 1) * log_q)
        return t / ((1.0 - q) * (1.0 - t))

    K = max(int(math.ceil(math.log(cfg.tail_tol * (1.0 - q)) / log_q - m)), 0)
    while K > 0 and tail(K - 1) < cfg.tail_tol:
        K -= 1
    while tail(K) >= cfg.tail_tol:
        K += 1
    if K + 1 > cfg.max_terms:
        raise ConvergenceError(
            f"(q^m; q)_inf needs {K + 1} terms for tail_tol={cfg.tail_tol} "
            f"(q={q}, m={m}); max_terms={cfg.max_terms}"
        )
    exponents = m + np.arange(K + 1, dtype=float)
    return math.fsum(np.log1p(-np.exp(exponents * log_q)))


def gaussian_binomial_log(q: float, L: int, s: int) -> float:
    """ln of the Gaussian binomial [L choose s]_q = (q;q)_L / ((q;q)_s (q;q)_{L-s}).

    Raises:
        DomainError: If q is outside [0, 1) or s is outside 0..L.
    """
    check_q(q)
    if not (0 <= s <= L):
        raise DomainError(f"require 0 <= s <= L (got s={s}, L={L})")
    table = log_qpoch_prefix(q, L)
    return float(table[L] - table[s] - table[L - s])


# ================================== Dilogarithm ============================== #
def _dilog_series(z: float, cfg: NumericConfig) -> float:
    total = 0.0
    power = z
    for n in range(1, cfg.max_terms + 1):
        term = power / (n * n)
        total += term
        if abs(term) <= cfg.series_tol * abs(total):
            return total
        power *= z
    raise ConvergenceError(f"dilog series did not converge at z={z}")


def _dilog(z: float, cfg: NumericConfig) -> float:
    if z == 0.0:
        return 0.0
    if z == 1.0:
        return PI2_6
    if -0.5 <= z <= 0.5:
        return _dilog_series(z, cfg)
    if z > 0.5:
        return PI2_6 - math.log(z) * math.log1p(-z) - _dilog_series(1.0 - z, cfg)
    if z >= -1.0:
        return -_dilog(z / (z - 1.0), cfg) - 0.5 * math.log1p(-z) ** 2
    return -PI2_6 - 0.5 * math.log(-z) ** 2 - _dilog(1.0 / z, cfg)


def dilog(z: float, cfg: NumericConfig = DEFAULT_NUMERIC) -> float:
    """Real dilogarithm Li_2(z) for z <= 1.

    The power series is used on |z| <= 1/2; other arguments are mapped there
    with the Euler reflection (1/2 < z < 1), the Landen transform
    (-1 <= z < -1/2) and the inversion formula (z < -1).

    Raises:
        DomainError: For z > 1, where Li_2 leaves the real axis.
    """
    if z > 1.0 or math.isnan(z):
        raise DomainError(f"dilog requires a real argument z <= 1 (got z={z!r})")
    return _dilog(float(z), cfg)


def dilog_real_part(z: float, cfg: NumericConfig = DEFAULT_NUMERIC) -> float:
    """Real part of the principal branch of Li_2(z), for any real z.

    Above 1 the Euler reflection Li_2(z) + Li_2(1-z) = pi^2/6 - ln z ln(1-z)
    is continued with Re ln(1-z) = ln(z-1).
    """
    if z <= 1.0:
        return dilog(z, cfg)
    return PI2_6 - math.log(z) * math.log(z - 1.0) - _dilog(1.0 - z, cfg)


# ================================== Identity residuals ======================= #
def dilog_derivative_residual(
    z: float, step: float, cfg: NumericConfig = DEFAULT_NUMERIC, refine: bool = False
) -> float:
    """|centered difference of Li_2 at z + ln(1 - z)/z|.

    With ``refine`` the difference gets one Richardson step, which cuts the
    truncation error from O(step^2) to O(step^4).
    """
    if not (0.0 < z < 1.0):
        raise DomainError(f"require 0 < z < 1 (got z={z})")
    if not (0.0 < step < min(z, 1.0 - z) / 2.0):
        raise DomainError(f"require 0 < step < min(z, 1-z)/2 (got step={step})")
    li2 = partial(dilog, cfg=cfg)
    if refine:
        slope = richardson(central_first, li2, z, step)
    else:
        slope = central_first(li2, z, step)
    return abs(slope + math.log1p(-z) / z)


def reflection_residual(z_prime: float, cfg: NumericConfig = DEFAULT_NUMERIC) -> float:
    """Residual of Re Li_2(1/z') = -Li_2(z') - pi^2/6 - Re ln^2(-z')/2 on (0, 1).

    For 0 < z' < 1, Re ln^2(-z') = ln^2(z') - pi^2.
    """
    if not (0.0 < z_prime < 1.0):
        raise DomainError(f"require 0 < z' < 1 (got z'={z_prime})")
    lhs = dilog_real_part(1.0 / z_prime, cfg)
    log_z = math.log(z_prime)
    rhs = -dilog(z_prime, cfg) - PI2_6 - 0.5 * (log_z * log_z - math.pi**2)
    return abs(lhs - rhs)


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        if num == 0.0:
            return 1.0
        raise DomainError("dilogarithm argument is unbounded (division by zero)")
    return num / den


def _half_log_sq_real(w: float) -> float:
    """Re (1/2) ln^2(w) on the principal branch."""
    if w == 0.0:
        raise DomainError("ln^2 term diverges at 0")
    log_abs = math.log(abs(w))
    if w > 0.0:
        return 0.5 * log_abs * log_abs
    return 0.5 * (log_abs * log_abs - math.pi**2)


def mantel_residual(
    a: float,
    b: float,
    u: float,
    v: float,
    cfg: NumericConfig = DEFAULT_NUMERIC,
    constraint_tol: float = 1e-12,
) -> float:
    """Signed residual (LHS - RHS) of the nine-term dilogarithm identity.

    Li_2(ab/uv) = Li_2(a/u) + Li_2(b/v) + Li_2(a/v) + Li_2(b/u) + Li_2(u) + Li_2(v)
                  - Li_2(a) - Li_2(b) + (1/2) ln^2(-u/v),
    valid on (1-a)(1-b) = (1-u)(1-v). Both sides are compared through their
    real parts, so arguments above 1 are admitted. A ratio 0/0 takes its
    limit value 1 along a = u, b = v.

    Raises:
        ConstraintViolation: If (1-a)(1-b) and (1-u)(1-v) differ by more than
            ``constraint_tol``.
    """
    gap = (1.0 - a) * (1.0 - b) - (1.0 - u) * (1.0 - v)
    if abs(gap) > constraint_tol:
        raise ConstraintViolation(
            f"(1-a)(1-b) = (1-u)(1-v) violated by {gap:.3e} "
            f"(a={a}, b={b}, u={u}, v={v})"
        )
    li2 = partial(dilog_real_part, cfg=cfg)
    lhs = li2(_ratio(a * b, u * v))
    rhs = math.fsum(
        [
            li2(_ratio(a, u)),
            li2(_ratio(b, v)),
            li2(_ratio(a, v)),
            li2(_ratio(b, u)),
            li2(u),
            li2(v),
            -li2(a),
            -li2(b),
            _half_log_sq_real(-_ratio(u, v)),
        ]
    )
    return lhs - rhs
