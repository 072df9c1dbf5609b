"""Initial histories phi on the window [-tau, 0].

Three kinds are supported: a constant vector, a component-wise scaled
``tanh`` family, and a sampled history interpolated piecewise-linearly.
Every kind is callable on scalars or arrays of times and serializes to the
``"phi"`` block of the JSON system spec.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = [
    "ConstantHistory",
    "InitialHistory",
    "SampledHistory",
    "TanhHistory",
    "evaluate_history",
    "history_from_dict",
]

# slack on the window edges, absorbs grid arithmetic like -m * h != -tau
_WINDOW_SLACK = 1e-12


def _as_vector(v: Any, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


class InitialHistory:
    """Base class: a continuous function on ``[-tau, 0]``."""

    tau: float
    kind: str = ""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t: float | np.ndarray) -> np.ndarray:
        """Evaluate at ``t``; shape ``(n,)`` for scalars, ``(len(t), n)`` otherwise."""
        tt = np.asarray(t, dtype=float)
        scalar = tt.ndim == 0
        tt = np.atleast_1d(tt)
        lo = -self.tau * (1.0 + _WINDOW_SLACK) - _WINDOW_SLACK
        if np.any(tt < lo) or np.any(tt > _WINDOW_SLACK):
            raise ValueError(f"history evaluated outside [-{self.tau}, 0]")
        out = self._eval(np.clip(tt, -self.tau, 0.0))
        return out[0] if scalar else out

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def scaled(self, factor: float) -> InitialHistory:
        """Return the history multiplied by ``factor`` (every kind is linear in its data)."""
        raise NotImplementedError


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not np.isfinite(tau) or tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    return tau


@dataclass(frozen=True, eq=False)
class ConstantHistory(InitialHistory):
    value: np.ndarray
    tau: float
    kind: str = field(default="constant", init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", _as_vector(self.value, "value"))
        object.__setattr__(self, "tau", _check_tau(self.tau))

    @property
    def dim(self) -> int:
        return self.value.size

    def _eval(self, t: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.value, (t.size, self.dim)).copy()

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "constant", "value": self.value.tolist()}

    def scaled(self, factor: float) -> ConstantHistory:
        return ConstantHistory(self.value * factor, self.tau)


@dataclass(frozen=True, eq=False)
class TanhHistory(InitialHistory):
    """``phi_i(t) = amplitude_i * tanh(rate * (t + shift))``."""

    amplitude: np.ndarray
    tau: float
    rate: float = 1.0
    shift: float = 0.0
    kind: str = field(default="tanh", init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitude", _as_vector(self.amplitude, "amplitude"))
        object.__setattr__(self, "tau", _check_tau(self.tau))
        if not (np.isfinite(self.rate) and np.isfinite(self.shift)):
            raise ValueError("rate and shift must be finite")

    @property
    def dim(self) -> int:
        return self.amplitude.size

    def _eval(self, t: np.ndarray) -> np.ndarray:
        return np.tanh(self.rate * (t + self.shift))[:, None] * self.amplitude[None, :]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "tanh",
            "amplitude": self.amplitude.tolist(),
            "rate": self.rate,
            "shift": self.shift,
        }

    def scaled(self, factor: float) -> TanhHistory:
        return TanhHistory(self.amplitude * factor, self.tau, self.rate, self.shift)


@dataclass(frozen=True, eq=False)
class SampledHistory(InitialHistory):
    """Piecewise-linear interpolant of ``values`` on a strictly increasing ``grid``.

    The grid must span exactly ``[-tau, 0]``; ``tau`` is taken from it.
    """

    grid: np.ndarray
    values: np.ndarray
    kind: str = field(default="sampled", init=False)
    tau: float = field(init=False)

    def __post_init__(self) -> None:
        grid = _as_vector(self.grid, "grid")
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if grid.size < 2:
            raise ValueError("sampled history needs at least two grid points")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("sampled history grid must be strictly increasing")
        if grid[-1] != 0.0:
            raise ValueError("sampled history grid must end at t = 0")
        if values.shape[0] != grid.size or values.ndim != 2:
            raise ValueError(
                f"values shape {values.shape} does not match grid of length {grid.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "tau", float(-grid[0]))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def _eval(self, t: np.ndarray) -> np.ndarray:
        return np.column_stack(
            [np.interp(t, self.grid, self.values[:, i]) for i in range(self.dim)]
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "sampled",
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
        }

    def scaled(self, factor: float) -> SampledHistory:
        return SampledHistory(self.grid, self.values * factor)


def evaluate_history(phi: InitialHistory, t: float | np.ndarray) -> np.ndarray:
    """Value of ``phi`` at ``t`` in ``[-tau, 0]``; exact for analytic kinds."""
    return phi(t)


def history_from_dict(data: dict[str, Any], tau: float) -> InitialHistory:
    kind = data.get("kind")
    if kind == "constant":
        return ConstantHistory(data["value"], tau)
    if kind == "tanh":
        return TanhHistory(
            data["amplitude"],
            tau,
            rate=float(data.get("rate", 1.0)),
            shift=float(data.get("shift", 0.0)),
        )
    if kind == "sampled":
        h = SampledHistory(data["grid"], data["values"])
        if not np.isclose(h.tau, tau, rtol=1e-12, atol=0.0):
            raise ValueError(f"sampled history spans [-{h.tau}, 0] but tau = {tau}")
        return h
    raise ValueError(f"unknown history kind {kind!r}")
