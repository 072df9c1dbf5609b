r"""Trajectories of delayed GPF systems.

The system is

.. math::

    D^{\alpha,\mu} y(t) = e^{\theta t} [A y(t) + B y(t - \tau) + f(t, y(t), y(t - \tau))],
    \qquad y = \phi \text{ on } [-\tau, 0],

with :math:`\theta = (\mu - 1)/\mu`. Writing :math:`y = e^{\theta t} x` turns
the GPF derivative into :math:`\mu^\alpha e^{\theta t}` times the plain Caputo
derivative of :math:`x`, so :math:`x` solves a standard Caputo delay equation

.. math::

    {}^C D^\alpha x(t) = \mu^{-\alpha} [A y(t) + B y(t - \tau) + f(\dots)],

which is integrated with the fractional Adams predictor-corrector on a grid
whose step divides :math:`\tau`. :func:`picard_oracle` iterates the mild
solution directly in :math:`y` with the GPF integral and serves as an
independent cross-check.
"""

from __future__ import annotations

import csv
import hashlib
import importlib
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .gpf_calculus import GPFParams, SampledFunction, gpf_integral_profile
from .history import InitialHistory, evaluate_history
from .matnorm import spectral_norm
from .special_fn import gamma

__all__ = [
    "DivergenceError",
    "Nonlinearity",
    "StepError",
    "SystemSpec",
    "Trajectory",
    "admit_step",
    "caputo_delay_adams",
    "evaluate_history",
    "picard_oracle",
    "solve_trajectory",
]

BLOWUP_NORM = 1e12
PICARD_TOL = 1e-10
# P(EC)^2E: one sweep leaves an O(h^(2 alpha)) start-up gap to the implicit corrector
DEFAULT_SWEEPS = 2
_TILE_RTOL = 1e-9


class StepError(ValueError):
    """The requested step cannot be made to tile both tau and T."""


class DivergenceError(ArithmeticError):
    """The state norm exceeded :data:`BLOWUP_NORM`.

    ``node`` is the first offending grid index on ``[0, T]``; ``trajectory``
    holds the computed prefix when the solver could assemble one.
    """

    def __init__(self, message: str, trajectory: Trajectory | None = None,
                 node: int | None = None):
        super().__init__(message)
        self.trajectory = trajectory
        self.node = node


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """``f(t, y, y_delayed)`` together with its Lipschitz constant.

    ``kind`` is ``"zero"``, ``"scaled-tanh"`` (``f = c (tanh y + tanh y_d)``,
    Lipschitz constant ``|c|``) or ``"custom"``. A custom hook is a callable
    or a ``"module:function"`` import path; its Lipschitz constant is taken
    on trust.
    """

    kind: str = "zero"
    c: float = 0.0
    lipschitz: float | None = None
    hook: str | Callable[[float, np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.kind == "zero":
            lf = 0.0 if self.lipschitz is None else float(self.lipschitz)
        elif self.kind == "scaled-tanh":
            lf = abs(float(self.c))
            if self.lipschitz is not None and not math.isclose(
                float(self.lipschitz), lf, rel_tol=1e-12, abs_tol=1e-15
            ):
                raise ValueError(
                    f"scaled-tanh(c={self.c}) has Lipschitz constant |c| = {lf}, "
                    f"not {self.lipschitz}"
                )
        elif self.kind == "custom":
            if self.hook is None or self.lipschitz is None:
                raise ValueError("custom nonlinearity needs a hook and a Lipschitz constant")
            lf = float(self.lipschitz)
        else:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if not math.isfinite(lf) or lf < 0.0:
            raise ValueError(f"Lipschitz constant must be finite and >= 0, got {lf}")
        object.__setattr__(self, "lipschitz", lf)

    @cached_property
    def _func(self) -> Callable | None:
        if self.kind != "custom":
            return None
        if callable(self.hook):
            return self.hook
        module, _, name = str(self.hook).partition(":")
        return getattr(importlib.import_module(module), name)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "scaled-tanh" and self.c == 0.0)

    def __call__(self, t: float, y: np.ndarray, yd: np.ndarray) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros_like(y)
        if self.kind == "scaled-tanh":
            return self.c * (np.tanh(y) + np.tanh(yd))
        return np.asarray(self._func(t, y, yd), dtype=float)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "scaled-tanh":
            out["c"] = self.c
        if self.kind == "custom":
            if not isinstance(self.hook, str):
                raise TypeError("a callable custom hook cannot be serialized")
            out["hook"] = self.hook
        out["Lf"] = self.lipschitz
        return out


@dataclass(frozen=True, eq=False)
class SystemSpec:
    alpha: float
    mu: float
    tau: float
    T: float
    A: np.ndarray
    B: np.ndarray
    f: Nonlinearity = field(default_factory=Nonlinearity)

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not (0.0 < self.mu <= 1.0):
            raise ValueError(f"mu must lie in (0, 1], got {self.mu!r}")
        if not (math.isfinite(self.tau) and self.tau > 0.0):
            raise ValueError(f"tau must be positive, got {self.tau!r}")
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ValueError(f"T must be positive, got {self.T!r}")
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        for name, m in (("A", A), ("B", B)):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"{name} must be square, got shape {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} must be finite")
        if A.shape != B.shape:
            raise ValueError(f"A {A.shape} and B {B.shape} differ in size")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def params(self) -> GPFParams:
        return GPFParams(self.alpha, self.mu)

    @property
    def theta(self) -> float:
        return (self.mu - 1.0) / self.mu

    @property
    def lipschitz(self) -> float:
        return float(self.f.lipschitz)

    @cached_property
    def norm_A(self) -> float:
        return spectral_norm(self.A)

    @cached_property
    def norm_B(self) -> float:
        return spectral_norm(self.B)

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "mu": self.mu,
            "tau": self.tau,
            "T": self.T,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "f": self.f.to_dict(),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on the uniform grid ``-tau = t_{-m} < ... < t_0 = 0 < ... < t_N = T``."""

    step: float
    m: int
    grid: np.ndarray
    states: np.ndarray
    norm_profile: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.grid.size - self.m - 1

    @property
    def t(self) -> np.ndarray:
        """Grid on ``[0, T]``."""
        return self.grid[self.m :]

    @property
    def y(self) -> np.ndarray:
        """States on ``[0, T]``."""
        return self.states[self.m :]

    @property
    def norms(self) -> np.ndarray:
        return self.norm_profile[self.m :]

    def max_norm(self) -> tuple[float, float]:
        """Largest ``||y(t_i)||`` over ``[0, T]`` and the time it occurs."""
        i = int(np.argmax(self.norms))
        return float(self.norms[i]), float(self.t[i])

    def to_csv(self, path: str | Path) -> None:
        n = self.states.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *[f"y{i + 1}" for i in range(n)], "norm"])
            for ti, yi, ni in zip(self.grid, self.states, self.norm_profile):
                w.writerow([repr(float(ti)), *[repr(float(v)) for v in yi], repr(float(ni))])

    def to_json_dict(self) -> dict[str, Any]:
        return {
            **self.meta,
            "h": self.step,
            "m": self.m,
            "t": self.grid.tolist(),
            "y": self.states.tolist(),
            "norm": self.norm_profile.tolist(),
        }


def admit_step(tau: float, T: float, h: float) -> tuple[float, int, int]:
    """Largest step ``<= h`` that tiles both ``tau`` and ``T``.

    Returns ``(h_star, m, N)`` with ``m * h_star = tau`` and ``N * h_star = T``.
    Starts from ``h_star = tau / ceil(tau / h)`` and shrinks (``m + 1``, ...)
    until ``T / h_star`` is an integer, giving up after ``m`` extra tries.
    """
    if not (math.isfinite(h) and h > 0.0):
        raise StepError(f"step must be positive, got {h!r}")
    m0 = max(1, math.ceil(tau / h * (1.0 - 1e-12)))
    for m in range(m0, 2 * m0 + 1):
        n_float = T * m / tau
        N = round(n_float)
        if N >= 1 and abs(n_float - N) <= _TILE_RTOL * max(1.0, n_float):
            return tau / m, m, N
    raise StepError(
        f"no step <= {h} tiles both tau = {tau} and T = {T}; "
        "T / tau must be a ratio of small integers"
    )


def _history_block(phi: InitialHistory, m: int, h: float) -> np.ndarray:
    t = -h * np.arange(m, -1, -1)
    t[0] = -phi.tau
    return evaluate_history(phi, t)


def _adams_weights(alpha: float, N: int):
    k = np.arange(N + 2, dtype=float)
    # predictor, lag l = n - j: (l+1)^a - l^a
    b = (k[1:] ** alpha - k[:-1] ** alpha)[: N + 1]
    # corrector interior, lag l = n + 1 - j >= 1: (l+1)^(a+1) - 2 l^(a+1) + (l-1)^(a+1)
    p = alpha + 1.0
    c = np.zeros(N + 2)
    if N >= 1:
        c[1] = 2.0**p - 2.0
    if N >= 2:
        l = k[2 : N + 1]
        c[2 : N + 1] = l**p * (np.expm1(p * np.log1p(1.0 / l)) + np.expm1(p * np.log1p(-1.0 / l)))
    # corrector first node, for step n -> n + 1
    n = k[: N + 1]
    a0 = n**p - (n - alpha) * (n + 1.0) ** alpha
    return b, c, a0


def caputo_delay_adams(
    rhs: Callable[[int, np.ndarray], np.ndarray],
    x0: np.ndarray,
    alpha: float,
    h: float,
    N: int,
    corrector_sweeps: int = DEFAULT_SWEEPS,
    norm_of: Callable[[int, np.ndarray], float] | None = None,
) -> np.ndarray:
    """Fractional Adams PECE for ``D^alpha x(t_n) = rhs(n, x_n)``.

    ``rhs`` must be causal: any delayed data it needs for node ``n`` has to
    be available once nodes ``0 .. n-1`` are known. Returns ``x`` on nodes
    ``0 .. N``. Raises :class:`DivergenceError` when ``norm_of(n, x_n)``
    exceeds :data:`BLOWUP_NORM`.
    """
    if corrector_sweeps < 1:
        raise ValueError("need at least one corrector sweep")
    x0 = np.asarray(x0, dtype=float)
    d = x0.size
    x = np.empty((N + 1, d))
    G = np.empty((N + 1, d))
    x[0] = x0
    G[0] = rhs(0, x0)
    b, c, a0 = _adams_weights(alpha, N)
    cp = h**alpha / gamma(alpha + 1.0)
    cc = h**alpha / gamma(alpha + 2.0)
    norm_of = norm_of or (lambda n, v: float(np.linalg.norm(v)))

    for n in range(N):
        past = G[: n + 1]
        pred = x0 + cp * (b[n::-1] @ past)
        hist = a0[n] * G[0]
        if n >= 1:
            hist = hist + c[n:0:-1] @ G[1 : n + 1]
        xn = pred
        for _ in range(corrector_sweeps):
            xn = x0 + cc * (hist + rhs(n + 1, xn))
        x[n + 1] = xn
        G[n + 1] = rhs(n + 1, xn)
        if not np.all(np.isfinite(xn)) or norm_of(n + 1, xn) > BLOWUP_NORM:
            raise DivergenceError(
                f"state norm exceeded {BLOWUP_NORM:g} at t-index {n + 1}", node=n + 1
            )
    return x


def _check_history(s: SystemSpec, phi: InitialHistory) -> None:
    if phi.dim != s.dim:
        raise ValueError(f"history has dimension {phi.dim}, system has {s.dim}")
    if not math.isclose(phi.tau, s.tau, rel_tol=1e-12):
        raise ValueError(f"history window tau = {phi.tau} differs from system tau = {s.tau}")


def solve_trajectory(
    s: SystemSpec,
    phi: InitialHistory,
    h: float,
    corrector_sweeps: int = DEFAULT_SWEEPS,
) -> Trajectory:
    """Solve the delayed GPF system on ``[0, T]`` with a step no larger than ``h``."""
    _check_history(s, phi)
    hs, m, N = admit_step(s.tau, s.T, h)
    grid = np.arange(-m, N + 1) * hs
    grid[0], grid[-1] = -s.tau, s.T

    theta = s.theta
    growth = np.exp(theta * grid[m:])  # e^{theta t_n}, exactly 1 when mu = 1
    y_hist = _history_block(phi, m, hs)
    y = np.empty((m + N + 1, s.dim))
    y[: m + 1] = y_hist
    scale = s.mu ** (-s.alpha)
    A, B, f = s.A, s.B, s.f
    nonlinear = not s.f.is_zero

    def rhs(n: int, xn: np.ndarray) -> np.ndarray:
        yn = growth[n] * xn
        yd = y[n]  # full-array index n is t_n - tau
        out = A @ yn + B @ yd
        if nonlinear:
            out = out + f(grid[m + n], yn, yd)
        return scale * out

    def norm_and_store(n: int, xn: np.ndarray) -> float:
        y[m + n] = growth[n] * xn
        return float(np.linalg.norm(y[m + n]))

    x0 = y_hist[-1]
    try:
        caputo_delay_adams(rhs, x0, s.alpha, hs, N, corrector_sweeps, norm_and_store)
    except DivergenceError as exc:
        k = m + exc.node + 1
        part = _trajectory(grid[:k], y[:k], hs, m, s, corrector_sweeps)
        raise DivergenceError(str(exc), part, exc.node) from None
    return _trajectory(grid, y, hs, m, s, corrector_sweeps)


def _trajectory(grid, y, hs, m, s: SystemSpec, sweeps: int, solver: str = "gauge-adams"):
    return Trajectory(
        step=hs,
        m=m,
        grid=grid,
        states=y,
        norm_profile=np.linalg.norm(y, axis=1),
        meta={
            "solver": solver,
            "corrector_sweeps": sweeps,
            "spec_hash": s.digest(),
        },
    )


def picard_oracle(
    s: SystemSpec,
    phi: InitialHistory,
    h: float,
    iters: int = 200,
    tol: float = PICARD_TOL,
) -> Trajectory:
    """Fixed-point iteration of the mild-solution equation in ``y``.

    Each sweep evaluates
    ``y_{k+1}(t) = phi(0) e^{theta t} + I^{alpha,mu}[e^{theta s} G_k(s)](t)``
    with ``G_k = A y_k + B y_k(. - tau) + f`` through :func:`gpf_integral_profile`,
    starting from ``y_0 = phi(0) e^{theta t}``. Stops after ``iters`` sweeps
    or once successive sweeps differ by less than ``tol`` in max norm.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    _check_history(s, phi)
    hs, m, N = admit_step(s.tau, s.T, h)
    grid = np.arange(-m, N + 1) * hs
    grid[0], grid[-1] = -s.tau, s.T
    t = grid[m:]
    p = s.params
    tail = np.exp(s.theta * t)[:, None]
    y_hist = _history_block(phi, m, hs)
    free = y_hist[-1][None, :] * tail

    y = free.copy()
    rises = 0
    last = math.inf
    for _ in range(iters):
        full = np.vstack([y_hist[:-1], y])
        yd = full[: N + 1]
        G = y @ s.A.T + yd @ s.B.T
        if not s.f.is_zero:
            G = G + np.array([s.f(ti, yi, ydi) for ti, yi, ydi in zip(t, y, yd)])
        integrand = SampledFunction(t, tail * G, np.zeros_like(G))
        y_new = free + gpf_integral_profile(integrand, p)
        dist = float(np.max(np.abs(y_new - y)))
        y = y_new
        if dist < tol:
            break
        rises = rises + 1 if dist > last else 0
        if rises >= 3:
            warnings.warn("Picard sweeps are not contracting", RuntimeWarning, stacklevel=2)
            rises = 0
        last = dist
        if not np.all(np.isfinite(y)):
            raise DivergenceError("Picard iteration produced non-finite values")

    states = np.vstack([y_hist[:-1], y])
    return _trajectory(grid, states, hs, m, s, 0, solver="picard")
