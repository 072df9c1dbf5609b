"""Gamma and one-parameter Mittag-Leffler functions on the positive real axis."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ConvergenceError",
    "MLQuery",
    "gamma",
    "log_gamma",
    "mittag_leffler",
]

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Gamma(x) overflows a double just above this.
GAMMA_MAX_ARG = 171.6243769563027

ML_TERM_BUDGET = 10_000
ML_DEFAULT_TOL = 1e-12


class ConvergenceError(ArithmeticError):
    """Raised when a series does not reach its tolerance within the term budget."""


def _lanczos_sum(z: float) -> float:
    # z is the shifted argument x - 1
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (z + i)
    return acc


def gamma(x: float) -> float:
    """Euler's Gamma function for ``x > 0``.

    Integer arguments are returned exactly (as the rounded factorial);
    everything else goes through the Lanczos approximation, with the
    reflection formula below 1/2.

    Raises
    ------
    ValueError
        If ``x <= 0`` or ``x`` is not finite.
    OverflowError
        If ``Gamma(x)`` is not representable as a double.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"gamma is only defined here for finite x > 0, got {x!r}")
    if x > GAMMA_MAX_ARG:
        raise OverflowError(f"gamma({x!r}) overflows a double")
    if x.is_integer():
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))

    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # split the power so t**(z + 1/2) does not overflow before the exp(-t) factor
    half = t ** ((z + 0.5) / 2.0)
    return _SQRT_2PI * half * (half * math.exp(-t)) * _lanczos_sum(z)


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for ``x > 0``; no overflow limit."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"log_gamma is only defined here for finite x > 0, got {x!r}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


@dataclass(frozen=True)
class MLQuery:
    """Arguments for :func:`mittag_leffler`."""

    alpha: float
    x: float
    rel_tol: float = ML_DEFAULT_TOL

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not math.isfinite(self.x) or self.x < 0.0:
            raise ValueError(f"x must be finite and >= 0, got {self.x!r}")
        if not (0.0 < self.rel_tol <= 1e-3):
            raise ValueError(f"rel_tol must lie in (0, 1e-3], got {self.rel_tol!r}")


_LOG_OVERFLOW_EXPONENT = math.log(math.log(1.7976931348623157e308) + 1.0)


def _ml_term(alpha: float, x: float, k: int, log_x: float) -> float:
    arg = alpha * k + 1.0
    if arg < 170.0:
        try:
            return x**k / gamma(arg)
        except OverflowError:
            pass
    return math.exp(k * log_x - log_gamma(arg))


def mittag_leffler(
    q: MLQuery | float,
    x: float | None = None,
    rel_tol: float = ML_DEFAULT_TOL,
) -> float:
    r"""One-parameter Mittag-Leffler function :math:`E_\alpha(x)` for ``x >= 0``.

    Accepts either an :class:`MLQuery` or ``(alpha, x[, rel_tol])``.

    The power series is summed with Neumaier compensation. All terms are
    positive, and the ratio of consecutive terms
    ``x * Gamma(alpha k + 1) / Gamma(alpha k + alpha + 1)`` is nonincreasing
    in ``k`` (log-convexity of Gamma), so once a ratio ``rho < 1`` is seen the
    tail is bounded by ``t_{k+1} / (1 - rho)``. Summation stops when that
    bound drops below half of ``rel_tol`` times the partial sum; the other
    half is left for rounding.
    """
    if not isinstance(q, MLQuery):
        if x is None:
            raise TypeError("mittag_leffler(alpha, x) needs an argument x")
        q = MLQuery(float(q), float(x), rel_tol)

    alpha, x = q.alpha, q.x
    if x == 0.0:
        return 1.0

    log_x = math.log(x)
    # E_a(x) > exp(x^(1/a)) / a - 1 for large x, and 1/a >= 1
    if log_x / alpha > _LOG_OVERFLOW_EXPONENT:
        raise OverflowError(f"E_{alpha}({x}) overflows a double")
    total, comp = 1.0, 0.0
    prev = 1.0
    for k in range(1, ML_TERM_BUDGET):
        try:
            term = _ml_term(alpha, x, k, log_x)
        except OverflowError:
            raise OverflowError(f"E_{alpha}({x}) overflows a double") from None
        s = total + term
        if abs(total) >= abs(term):
            comp += (total - s) + term
        else:
            comp += (term - s) + total
        total = s

        ratio = term / prev if prev > 0.0 else math.inf
        prev = term
        if ratio < 1.0:
            nxt = _ml_term(alpha, x, k + 1, log_x)  # never larger than term
            rho = nxt / term
            if rho < 1.0 and nxt / (1.0 - rho) <= 0.5 * q.rel_tol * (total + comp):
                return total + comp
        if not math.isfinite(total):
            raise OverflowError(f"E_{alpha}({x}) overflows a double")

    raise ConvergenceError(
        f"E_{alpha}({x}) did not converge to rel_tol={q.rel_tol} "
        f"within {ML_TERM_BUDGET} terms"
    )
