"""Closed-form limit laws of the Mallows height function in the regime q = 1 - beta/N.

Covers the limit height density h_beta, the Gaussian scale sigma_beta, the
large-deviation rate a_beta with its derivatives, the drift of a shifted
threshold K, the multi-point covariance, the q-Pochhammer expansions and the
identities that tie them together.
"""

# ================================== Imports ================================== #
# Standard Library
import math
from enum import Enum
from typing import NamedTuple, Optional, Sequence

# Third-party
import numpy as np

# Local Application
from src.models.law import CovarianceSpec, LawPoint, LawValues
from src.models.numeric import NumericConfig, QArgument
from src.services.qnum import PI2_6, dilog, log1mexp, log_qpoch_inf
from src.utils.errors import DomainError
from src.utils.numdiff import (
    central_first,
    central_second,
    derivative_residual,
    mixed_second,
)

DEFAULT_NUMERIC = NumericConfig()


class ExpansionKind(str, Enum):
    """The three q-Pochhammer expansions in the scaling regime."""

    FULL = "qq"  # ln (q; q)_inf
    LINEAR = "qNq"  # ln (q^{delta N + 1}; q)_inf
    SQRT = "qsqrtNq"  # ln (q^{delta N + alpha sqrt(N) + 1}; q)_inf


class ProofResiduals(NamedTuple):
    """Absolute residuals of the identities behind the local limit theorem."""

    dilog_identity: float
    linear_term: float
    constant_term: float
    quadratic_term: float


# ================================== Helpers ================================== #
def _one_minus_exp(beta: float, t: float) -> float:
    """1 - e^{-beta t}."""
    return -math.expm1(-beta * t)


def _odds(beta: float, t: float) -> float:
    """e^{-beta t} / (1 - e^{-beta t})."""
    return 1.0 / math.expm1(beta * t)


def _log1m(beta: float, t: float) -> float:
    """ln(1 - e^{-beta t})."""
    return float(log1mexp(beta * t))


def _denominator(p: LawPoint) -> float:
    """e^{-bx} + e^{-by} - e^{-b(x+y)} - e^{-b}, written without cancellation."""
    b = p.beta
    return _one_minus_exp(b, 1.0) - _one_minus_exp(b, p.x) * _one_minus_exp(b, p.y)


# ================================== Law of large numbers ===================== #
def h_beta(p: LawPoint) -> float:
    """Limit height density h_beta(x, y).

    (1/b)[ln(1-e^{-b}) - ln(e^{-bx} + e^{-by} - e^{-b(x+y)} - e^{-b})].

    Args:
        p: The point (beta, x, y).

    Returns:
        A value strictly between max(x+y-1, 0) and min(x, y).
    """
    b = p.beta
    ratio = _one_minus_exp(b, p.x) * _one_minus_exp(b, p.y) / _one_minus_exp(b, 1.0)
    return -math.log1p(-ratio) / b


def h_partial_x(p: LawPoint) -> float:
    """dh/dx = e^{-bx}(1 - e^{-by}) / D(x, y)."""
    return math.exp(-p.beta * p.x) * _one_minus_exp(p.beta, p.y) / _denominator(p)


def h_partial_y(p: LawPoint) -> float:
    """dh/dy = e^{-by}(1 - e^{-bx}) / D(x, y)."""
    return math.exp(-p.beta * p.y) * _one_minus_exp(p.beta, p.x) / _denominator(p)


def starr_density(p: LawPoint) -> float:
    """Limit density of the permuton: the mixed derivative d^2 h / dx dy.

    Raises:
        DomainError: If the denominator vanishes (impossible for beta > 0 on
            the open square).
    """
    b = p.beta
    den = math.exp(b / 4.0) * math.cosh(b * (p.x - p.y) / 2.0) - math.exp(
        -b / 4.0
    ) * math.cosh(b * (p.x + p.y - 1.0) / 2.0)
    if den <= 0.0:
        raise DomainError(f"density denominator vanished at {p}")
    return (b / 2.0) * math.sinh(b / 2.0) / (den * den)


def starr_mixed_difference_residual(p: LawPoint, step: float = 1e-3) -> float:
    """|density - mixed central difference of h_beta| at p."""

    def h_at(x: float, y: float) -> float:
        return h_beta(LawPoint(beta=p.beta, x=x, y=y))

    return abs(starr_density(p) - mixed_second(h_at, p.x, p.y, step))


# ================================== Gaussian scale =========================== #
def d_beta(p: LawPoint) -> float:
    """(1/2)[ln(1-e^{-b}) - ln(1-e^{-b(x-h)}) - ln(1-e^{-b(y-h)})]."""
    b, h = p.beta, h_beta(p)
    return 0.5 * (_log1m(b, 1.0) - _log1m(b, p.x - h) - _log1m(b, p.y - h))


def sigma_beta(p: LawPoint) -> float:
    """sqrt(beta) e^{d_beta}; the height fluctuates with variance N / sigma_beta^2."""
    return math.sqrt(p.beta) * math.exp(d_beta(p))


def sigma_N_beta(p: LawPoint, N: int) -> float:
    """sqrt(N) / sigma_beta."""
    if N < 1:
        raise DomainError(f"N must be >= 1 (got N={N})")
    return math.sqrt(N) / sigma_beta(p)


# ================================== Large deviations ========================= #
def _check_delta(p: LawPoint, delta: float, interior: bool) -> None:
    lo, hi = p.support
    ok = lo < delta < hi if interior else lo <= delta <= hi
    if not ok:
        bracket = "open" if interior else "closed"
        raise DomainError(
            f"delta must lie in the {bracket} interval [{lo}, {hi}] (got delta={delta})"
        )


def rate_a(p: LawPoint, delta: float, cfg: NumericConfig = DEFAULT_NUMERIC) -> float:
    """Large-deviation rate a_beta(x, y; delta) as a ten-dilogarithm expression.

    Raises:
        DomainError: If delta is outside [max(x+y-1, 0), min(x, y)].
    """
    _check_delta(p, delta, interior=False)
    b, x, y = p.beta, p.x, p.y

    def li2(t: float) -> float:
        return dilog(math.exp(-b * t), cfg)

    terms = [
        b * b * (x - delta) * (y - delta),
        -PI2_6,
        li2(delta),
        li2(x - delta),
        li2(y - delta),
        li2(1.0 - x - y + delta),
        li2(1.0),
        -li2(x),
        -li2(y),
        -li2(1.0 - x),
        -li2(1.0 - y),
    ]
    return math.fsum(terms) / b


def rate_a_derivatives(p: LawPoint, delta: float) -> tuple[float, float]:
    """Closed-form first and second delta-derivatives of the rate.

    Raises:
        DomainError: If delta is not strictly inside the support.
    """
    _check_delta(p, delta, interior=True)
    b, x, y = p.beta, p.x, p.y
    corner = 1.0 - x - y + delta
    first = math.fsum(
        [
            b * (2.0 * delta - x - y),
            -_log1m(b, x - delta),
            -_log1m(b, y - delta),
            _log1m(b, delta),
            _log1m(b, corner),
        ]
    )
    second = b * (
        2.0
        + _odds(b, delta)
        + _odds(b, x - delta)
        + _odds(b, y - delta)
        + _odds(b, corner)
    )
    return first, second


def rate_derivative_residuals(
    p: LawPoint, delta: float, cfg: NumericConfig = DEFAULT_NUMERIC, tol: float = 1e-7
) -> tuple[float, float]:
    """Distance of the closed-form derivatives from central differences of rate_a."""
    first, second = rate_a_derivatives(p, delta)

    def rate(d: float) -> float:
        return rate_a(p, d, cfg)

    return (
        derivative_residual(central_first, rate, delta, first, cfg.fd_step_first, tol),
        derivative_residual(
            central_second, rate, delta, second, cfg.fd_step_second, tol
        ),
    )


def proof_residuals(
    p: LawPoint, cfg: NumericConfig = DEFAULT_NUMERIC
) -> ProofResiduals:
    """Residuals of the four identities that reduce the exact law to a Gaussian.

    Returns:
        (i) the nine-dilogarithm identity at delta = h, (ii) the linear
        coefficient b_beta, (iii) the constant coefficient c_beta and
        (iv) f_beta - e^{2 d_beta}; each vanishes identically.
    """
    b, x, y = p.beta, p.x, p.y
    h = h_beta(p)
    corner = 1.0 - x - y + h

    def li2(t: float) -> float:
        return dilog(math.exp(-b * t), cfg)

    dilog_rhs = math.fsum(
        [
            PI2_6,
            -b * b * (x - h) * (y - h),
            -li2(h),
            -li2(x - h),
            -li2(y - h),
            -li2(1.0),
            li2(x),
            li2(y),
            li2(1.0 - x),
            li2(1.0 - y),
        ]
    )
    dilog_identity = li2(corner) - dilog_rhs

    linear = math.fsum(
        [
            b * (x + y - 2.0 * h),
            _log1m(b, x - h),
            _log1m(b, y - h),
            -_log1m(b, h),
            -_log1m(b, corner),
        ]
    )

    constant = math.fsum(
        [
            b * b / 2.0 * (x + y) * h,
            -b * b * x * y,
            -0.5 * _log1m(b, h),
            -b * x / 2.0 * _log1m(b, x - h),
            -b * y / 2.0 * _log1m(b, y - h),
            -(1.0 + b * (1.0 - x - y)) / 2.0 * _log1m(b, corner),
            (1.0 + b * x) / 2.0 * _log1m(b, x),
            (1.0 + b * y) / 2.0 * _log1m(b, y),
            (1.0 + b * (1.0 - x)) / 2.0 * _log1m(b, 1.0 - x),
            (1.0 + b * (1.0 - y)) / 2.0 * _log1m(b, 1.0 - y),
            -(1.0 + b / 2.0) * _log1m(b, 1.0),
        ]
    )

    f = 2.0 + _odds(b, h) + _odds(b, x - h) + _odds(b, y - h) + _odds(b, corner)
    quadratic = f - math.exp(2.0 * d_beta(p))

    return ProofResiduals(
        dilog_identity=abs(dilog_identity),
        linear_term=abs(linear),
        constant_term=abs(constant),
        quadratic_term=abs(quadratic),
    )


def rate_mantel_arguments(p: LawPoint) -> tuple[float, float, float, float]:
    """(a, b, u, v) = (e^{-beta}, e^{-beta h}, e^{-beta x}, e^{-beta y})."""
    b = p.beta
    return (
        math.exp(-b),
        math.exp(-b * h_beta(p)),
        math.exp(-b * p.x),
        math.exp(-b * p.y),
    )


# ================================== Shifted threshold ======================== #
def drift_terms(p: LawPoint) -> tuple[float, float]:
    """(u_beta, v_beta) as sums of geometric odds."""
    b, x, y = p.beta, p.x, p.y
    h = h_beta(p)
    corner = 1.0 - x - y + h
    u = 1.0 + _odds(b, y - h) + _odds(b, corner)
    v = _odds(b, y - h) + _odds(b, corner) - _odds(b, y) - _odds(b, 1.0 - y)
    return u, v


def drift_terms_closed(p: LawPoint) -> tuple[float, float]:
    """(u_beta, v_beta) as closed ratios of 1 - e^{-beta t} factors."""
    b, x, y = p.beta, p.x, p.y
    h = h_beta(p)

    def om(t: float) -> float:
        return _one_minus_exp(b, t)

    u = om(1.0 - x) / (om(y - h) * om(1.0 - x - y + h))
    v = (
        math.exp(-b * (y - x))
        * om(1.0)
        * om(x)
        / (om(y) * om(1.0 - x) * om(1.0 - y))
    )
    return u, v


def mu_beta(p: LawPoint, gamma: float) -> float:
    """Shift gamma sqrt(beta v_beta) / sigma_beta of K = yN + gamma sqrt(N)."""
    _, v = drift_terms(p)
    return gamma * math.sqrt(p.beta * v) / sigma_beta(p)


def drift_identity_residual(p: LawPoint) -> float:
    """max of |beta u^2 - v sigma^2| / (v sigma^2) and |mu(1) - dh/dy|."""
    u, v = drift_terms(p)
    sigma_sq = sigma_beta(p) ** 2
    square = abs(p.beta * u * u - v * sigma_sq) / (v * sigma_sq)
    slope = abs(mu_beta(p, 1.0) - h_partial_y(p))
    return max(square, slope)


# ================================== Local limit ============================== #
def lclt_prediction(p: LawPoint, N: int, k: int, gamma: float = 0.0) -> float:
    """Gaussian prediction (sigma/sqrt(2 pi N)) exp(-sigma^2 (alpha - mu)^2 / 2).

    Args:
        p: The point (beta, x, y).
        N: Permutation size.
        k: Height value.
        gamma: Shift of the threshold, K = yN + gamma sqrt(N).

    Returns:
        The predicted probability of H = k, with alpha = (k - h N)/sqrt(N).
    """
    sigma = sigma_beta(p)
    alpha = (k - h_beta(p) * N) / math.sqrt(N)
    shift = mu_beta(p, gamma) if gamma else 0.0
    z = sigma * (alpha - shift)
    return sigma / math.sqrt(2.0 * math.pi * N) * math.exp(-0.5 * z * z)


# ================================== Multi-point covariance =================== #
def omega_beta(beta: float, x: float, y: float) -> float:
    """1 - dh/dx = (e^{-by} - e^{-b}) / D(x, y)."""
    p = LawPoint(beta=beta, x=x, y=y)
    return (math.exp(-beta * y) - math.exp(-beta)) / _denominator(p)


def min_matrix_inverse(z: Sequence[float]) -> np.ndarray:
    """Tridiagonal inverse of M(i, j) = z_{min(i, j)} for 0 < z_1 < ... < z_r."""
    z = np.asarray(z, dtype=float)
    gaps = np.diff(np.concatenate([[0.0], z]))
    if np.any(gaps <= 0.0):
        raise DomainError("min-kernel sequence must be positive and increasing")
    r = z.size
    inv = np.zeros((r, r))
    for i in range(r):
        inv[i, i] = 1.0 / gaps[i] + (1.0 / gaps[i + 1] if i + 1 < r else 0.0)
        if i + 1 < r:
            inv[i, i + 1] = inv[i + 1, i] = -1.0 / gaps[i + 1]
    return inv


def covariance_spec(beta: float, x: float, y_list: Sequence[float]) -> CovarianceSpec:
    """Covariance of the rescaled heights ((H_{y_i N, xN} - h N)/sqrt(N))_i.

    C(i, i) = 1/sigma_beta(x, y_i)^2 and C(i, j) = C(i, i) omega(y_j)/omega(y_i)
    for i < j, i.e. C = diag(omega) (z_{min(i,j)}) diag(omega) with
    z_i = C(i, i)/omega(y_i)^2. Determinant and inverse follow from that form.

    Raises:
        DomainError: If y_list is not strictly increasing inside (0, 1).
    """
    y = np.asarray(y_list, dtype=float)
    if y.size == 0 or np.any(y <= 0.0) or np.any(y >= 1.0) or np.any(np.diff(y) <= 0.0):
        raise DomainError(
            f"y_list must be strictly increasing in (0, 1) (got {list(y_list)})"
        )

    diag = np.array([1.0 / sigma_beta(LawPoint(beta=beta, x=x, y=yi)) ** 2 for yi in y])
    omega = np.array([omega_beta(beta, x, yi) for yi in y])
    z = diag / omega**2
    r = y.size
    idx = np.arange(r)
    C = np.outer(omega, omega) * z[np.minimum.outer(idx, idx)]
    det = float(np.prod(omega**2) * np.prod(np.diff(np.concatenate([[0.0], z]))))
    inv = min_matrix_inverse(z) / np.outer(omega, omega)
    return CovarianceSpec(
        beta=beta,
        x=x,
        y_list=tuple(float(v) for v in y),
        C=C.tolist(),
        det=det,
        inv=inv.tolist(),
        omega=omega.tolist(),
        z=z.tolist(),
    )


def h_composition_residual(
    beta: float, x: float, y_prev: float, y_next: float
) -> float:
    """Residual of restarting the limit shape on the block after y_prev.

    With r = 1 - y_prev, compares h_{beta r}((x - h(x, y_prev)) / r,
    (y_next - y_prev) / r) against (h(x, y_next) - h(x, y_prev)) / r.
    """
    if not (0.0 < y_prev < y_next < 1.0):
        raise DomainError(f"require 0 < y_prev < y_next < 1 (got {y_prev}, {y_next})")
    h_prev = h_beta(LawPoint(beta=beta, x=x, y=y_prev))
    h_next = h_beta(LawPoint(beta=beta, x=x, y=y_next))
    rest = 1.0 - y_prev
    inner = h_beta(
        LawPoint(beta=beta * rest, x=(x - h_prev) / rest, y=(y_next - y_prev) / rest)
    )
    return abs(inner - (h_next - h_prev) / rest)


# ================================== q-Pochhammer expansions ================== #
def _check_expansion_args(beta: float, N: int, delta: float) -> None:
    if beta <= 0.0 or N < 1 or beta > N:
        raise DomainError(
            f"require beta > 0, N >= 1, q = 1 - beta/N >= 0 (got {beta}, {N})"
        )
    if delta <= 0.0:
        raise DomainError(f"delta must be > 0 (got delta={delta})")


def asym_log_qpoch(
    beta: float,
    N: int,
    kind: ExpansionKind,
    delta: float = 1.0,
    alpha: float = 0.0,
    cfg: NumericConfig = DEFAULT_NUMERIC,
) -> float:
    """Expansion of a log q-Pochhammer symbol through its constant term.

    FULL gives -pi^2 N/(6b) + pi^2/12 - ln(b/(2 pi N))/2; LINEAR and SQRT
    expand ln (q^{delta N + 1}; q)_inf and ln (q^{delta N + alpha sqrt(N) + 1}; q)_inf.
    """
    _check_expansion_args(beta, N, delta)
    kind = ExpansionKind(kind)
    if kind is ExpansionKind.FULL:
        return -math.pi**2 / (6.0 * beta) * N + math.pi**2 / 12.0 - 0.5 * math.log(
            beta / (2.0 * math.pi * N)
        )
    e = math.exp(-beta * delta)
    li2 = dilog(e, cfg)
    log_1me = _log1m(beta, delta)
    value = -li2 / beta * N + 0.5 * li2 - (1.0 + beta * delta) / 2.0 * log_1me
    if kind is ExpansionKind.SQRT:
        value += -alpha * log_1me * math.sqrt(N) - alpha * alpha * beta * e / (
            2.0 * (1.0 - e)
        )
    return value


def expansion_exponent(
    N: int, kind: ExpansionKind, delta: float = 1.0, alpha: float = 0.0
) -> float:
    """The exponent m of (q^m; q)_inf that each expansion describes."""
    kind = ExpansionKind(kind)
    if kind is ExpansionKind.FULL:
        return 1.0
    if kind is ExpansionKind.LINEAR:
        return delta * N + 1.0
    return delta * N + alpha * math.sqrt(N) + 1.0


def direct_log_qpoch(
    beta: float,
    N: int,
    kind: ExpansionKind,
    delta: float = 1.0,
    alpha: float = 0.0,
    cfg: NumericConfig = DEFAULT_NUMERIC,
) -> float:
    """The product each expansion approximates, summed directly."""
    _check_expansion_args(beta, N, delta)
    m = expansion_exponent(N, kind, delta, alpha)
    return log_qpoch_inf(QArgument(q=1.0 - beta / N, m=m), cfg)


def expansion_error(
    beta: float,
    N: int,
    kind: ExpansionKind,
    delta: float = 1.0,
    alpha: float = 0.0,
    cfg: NumericConfig = DEFAULT_NUMERIC,
) -> float:
    """|expansion - direct sum| at size N."""
    return abs(
        asym_log_qpoch(beta, N, kind, delta, alpha, cfg)
        - direct_log_qpoch(beta, N, kind, delta, alpha, cfg)
    )


# ================================== Assembly ================================= #
def law_values(
    p: LawPoint,
    N: Optional[int] = None,
    delta: Optional[float] = None,
    gamma: Optional[float] = None,
    cfg: NumericConfig = DEFAULT_NUMERIC,
) -> LawValues:
    """Every limit-law quantity at p, plus the N-, delta- and gamma-dependent ones."""
    u, v = drift_terms(p)
    return LawValues(
        point=p,
        h=h_beta(p),
        d=d_beta(p),
        sigma=sigma_beta(p),
        sigma_N=sigma_N_beta(p, N) if N is not None else None,
        N=N,
        delta=delta,
        a=rate_a(p, delta, cfg) if delta is not None else None,
        u=u,
        v=v,
        gamma=gamma,
        mu=mu_beta(p, gamma) if gamma is not None else None,
        starr=starr_density(p),
    )
