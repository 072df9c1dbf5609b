r"""Generalized proportional fractional (GPF) integral and Caputo derivative.

For :math:`\alpha > 0`, :math:`\mu \in (0, 1]` and :math:`\theta = (\mu - 1)/\mu`,

.. math::

    I^{\alpha,\mu} h(t) = \frac{1}{\mu^\alpha \Gamma(\alpha)}
        \int_0^t e^{\theta (t - s)} (t - s)^{\alpha - 1} h(s) \,\mathrm{d}s,

    D^{\alpha,\mu} h(t) = \frac{1}{\mu^{1-\alpha} \Gamma(1 - \alpha)}
        \int_0^t e^{\theta (t - s)} (t - s)^{-\alpha} D^{1,\mu} h(s) \,\mathrm{d}s,

with :math:`D^{1,\mu} h = (1 - \mu) h + \mu h'`. Both are discretized by
product-trapezoidal quadrature on a uniform grid: the power kernel is
integrated exactly against the piecewise-linear interpolant of the
remaining integrand, whose exponential factor is evaluated at the nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .special_fn import gamma

__all__ = [
    "GPFParams",
    "SampledFunction",
    "d1mu",
    "gpf_derivative",
    "gpf_derivative_profile",
    "gpf_integral",
    "gpf_integral_profile",
    "product_trapezoid_weights",
]

_UNIFORM_RTOL = 1e-9


@dataclass(frozen=True)
class GPFParams:
    alpha: float
    mu: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not (0.0 < self.mu <= 1.0):
            raise ValueError(f"mu must lie in (0, 1], got {self.mu!r}")

    @property
    def theta(self) -> float:
        return (self.mu - 1.0) / self.mu


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples of ``h`` (scalar or vector valued) on a uniform grid starting at 0.

    When ``derivative_values`` is omitted it is filled in by second-order
    finite differences (centered inside, one-sided at the two ends).
    """

    grid: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray | None = None

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must be a 1-D array with at least two points")
        if grid[0] != 0.0:
            raise ValueError("grid must start at 0")
        steps = np.diff(grid)
        step = (grid[-1] - grid[0]) / (grid.size - 1)
        if step <= 0.0 or np.max(np.abs(steps - step)) > _UNIFORM_RTOL * step:
            raise ValueError("grid must be uniform and strictly increasing")
        if values.shape[0] != grid.size:
            raise ValueError("values and grid lengths differ")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if self.derivative_values is None:
            edge = 2 if grid.size >= 3 else 1
            deriv = np.gradient(values, step, axis=0, edge_order=edge)
        else:
            deriv = np.asarray(self.derivative_values, dtype=float)
            if deriv.shape != values.shape:
                raise ValueError("derivative_values must match values in shape")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivative_values", deriv)

    @classmethod
    def from_callable(cls, fn, T: float, n: int, derivative=None) -> SampledFunction:
        """Sample ``fn`` (and optionally its derivative) at ``n + 1`` uniform points on ``[0, T]``."""
        grid = np.linspace(0.0, T, n + 1)
        deriv = None if derivative is None else derivative(grid)
        return cls(grid, fn(grid), deriv)

    @property
    def step(self) -> float:
        return float((self.grid[-1] - self.grid[0]) / (self.grid.size - 1))

    def index_of(self, t: float) -> int:
        step = self.step
        i = int(round(t / step))
        if i < 0 or i >= self.grid.size or abs(self.grid[i] - t) > 1e-9 * max(step, abs(t)):
            raise ValueError(f"t = {t!r} is not a grid point")
        return i


def _second_diff_pow(lag: np.ndarray, p: float) -> np.ndarray:
    # (l+1)^p - 2 l^p + (l-1)^p for l >= 2, written to limit cancellation
    lag = lag.astype(float)
    inv = 1.0 / lag
    return lag**p * (np.expm1(p * np.log1p(inv)) + np.expm1(p * np.log1p(-inv)))


@lru_cache(maxsize=8192)
def _unit_weights(beta: float, n: int) -> np.ndarray:
    w = np.empty(n + 1)
    w[n] = 1.0
    w[0] = (n - 1) ** (beta + 1.0) - (n - 1 - beta) * n**beta
    if n >= 2:
        # lag = n - j for j = 1 .. n-1; lag 1 is the last entry
        w[1 : n - 1] = _second_diff_pow(np.arange(n - 1, 1, -1), beta + 1.0)
        w[n - 1] = 2.0 ** (beta + 1.0) - 2.0
    w.setflags(write=False)
    return w


def product_trapezoid_weights(beta: float, n: int, step: float) -> np.ndarray:
    """Weights ``w_j`` with ``sum_j w_j g(t_j) ~ int_0^{t_n} (t_n - s)^(beta-1) g(s) ds``."""
    if n < 1:
        raise ValueError("need at least one panel")
    return _unit_weights(float(beta), int(n)) * (step**beta / (beta * (beta + 1.0)))


def _weighted_sum(w: np.ndarray, g: np.ndarray) -> np.ndarray | float:
    if g.ndim == 1:
        return float(np.sum(w * g))
    return np.sum(w[:, None] * g, axis=0)


def _kernel_integral(data: np.ndarray, grid: np.ndarray, n: int, beta: float,
                     theta: float, step: float):
    # int_0^{t_n} e^{theta (t_n - s)} (t_n - s)^{beta - 1} data(s) ds
    if n == 0:
        return 0.0 if data.ndim == 1 else np.zeros(data.shape[1:])
    expo = np.exp(theta * (grid[n] - grid[: n + 1]))
    g = data[: n + 1] * (expo if data.ndim == 1 else expo[:, None])
    return _weighted_sum(product_trapezoid_weights(beta, n, step), g)


def d1mu(h: SampledFunction, p: GPFParams, t: float):
    """Proportional derivative ``(1 - mu) h(t) + mu h'(t)`` at a grid point."""
    i = h.index_of(t)
    return (1.0 - p.mu) * h.values[i] + p.mu * h.derivative_values[i]


def gpf_integral(h: SampledFunction, p: GPFParams, t: float):
    """Left GPF integral of order ``p.alpha`` at the grid point ``t``."""
    n = h.index_of(t)
    a = p.alpha
    s = _kernel_integral(h.values, h.grid, n, a, p.theta, h.step)
    return s / (p.mu**a * gamma(a))


def gpf_derivative(h: SampledFunction, p: GPFParams, t: float):
    """Caputo GPF derivative of order ``p.alpha`` in (0, 1) at the grid point ``t``."""
    if not (0.0 < p.alpha < 1.0):
        raise ValueError(f"the Caputo GPF derivative needs alpha in (0, 1), got {p.alpha}")
    n = h.index_of(t)
    beta = 1.0 - p.alpha
    d = (1.0 - p.mu) * h.values + p.mu * h.derivative_values
    s = _kernel_integral(d, h.grid, n, beta, p.theta, h.step)
    return s / (p.mu**beta * gamma(beta))


def gpf_integral_profile(h: SampledFunction, p: GPFParams) -> np.ndarray:
    """:func:`gpf_integral` at every grid point."""
    return np.array([gpf_integral(h, p, t) for t in h.grid])


def gpf_derivative_profile(h: SampledFunction, p: GPFParams) -> np.ndarray:
    """:func:`gpf_derivative` at every grid point."""
    return np.array([gpf_derivative(h, p, t) for t in h.grid])
