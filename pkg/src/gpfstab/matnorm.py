"""Spectral norms of system matrices and sup-norms of initial histories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .history import InitialHistory, SampledHistory

__all__ = ["SupNorm", "history_sup_norm", "spectral_norm"]

POWER_TOL = 1e-14
POWER_MAX_ITER = 10_000
SQUARINGS = 64
SUP_SAMPLES = 4_097
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _as_matrix(m) -> np.ndarray:
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _squared_power_start(g: np.ndarray) -> np.ndarray:
    # (M^T M)^(2^j) tends to a multiple of the top eigenprojector even when the
    # leading eigenvalues nearly coincide; its largest column is a start vector
    # that plain iteration alone would need ~1/gap steps to reach
    p = g.copy()
    for _ in range(SQUARINGS):
        p = p @ p
        top = float(np.max(np.abs(p)))
        if top == 0.0:
            break
        p /= top
    cols = np.linalg.norm(p, axis=0)
    j = int(np.argmax(cols))
    if cols[j] == 0.0:
        return np.ones(g.shape[0]) / math.sqrt(g.shape[0])
    return p[:, j] / cols[j]


def spectral_norm(m) -> float:
    """Largest singular value of a small dense square matrix.

    Power iteration on ``M^T M``, started from the dominant column of
    ``(M^T M)^(2^j)`` and stopped once the Rayleigh quotient changes by less
    than ``POWER_TOL`` relative. If the iterate collapses it is re-seeded
    with a fixed deterministic perturbation.
    """
    a = _as_matrix(m)
    n = a.shape[0]
    if not np.any(a):
        return 0.0
    # scale out the magnitude so M^T M cannot over/underflow
    scale = float(np.max(np.abs(a)))
    a = a / scale
    g = a.T @ a

    v = _squared_power_start(g)
    perturb = np.cos(np.arange(1, n + 1) * 1.234567) + 0.5
    perturb /= np.linalg.norm(perturb)

    lam = float(v @ (g @ v))
    for _ in range(POWER_MAX_ITER):
        w = g @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            # stagnation: v is annihilated by M^T M
            v = perturb + 0.5 * v
            v /= np.linalg.norm(v)
            perturb = np.roll(perturb, 1)
            continue
        v = w / nw
        lam_new = float(v @ (g @ v))
        if abs(lam_new - lam) <= POWER_TOL * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return scale * math.sqrt(max(lam, 0.0))


@dataclass(frozen=True)
class SupNorm:
    """Sup of the Euclidean norm over the history window.

    ``lower`` is attained by an actual sample, so it is a guaranteed lower
    bound. ``upper`` adds the largest jump between neighbouring samples,
    which bounds the sup for histories that are monotone between samples.
    For sampled histories the sup is exact (convex per segment, attained at
    a knot) and ``lower == upper``.
    """

    value: float
    lower: float
    upper: float
    argmax: float


def _golden_max(fn, a: float, b: float, iters: int = 80) -> tuple[float, float]:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
        if b - a < 1e-15 * max(1.0, abs(a)):
            break
    t = 0.5 * (a + b)
    return fn(t), t


def history_sup_norm(phi: InitialHistory, samples: int = SUP_SAMPLES) -> SupNorm:
    """``sup_{t in [-tau, 0]} ||phi(t)||`` on a uniform sample grid plus golden-section refinement."""
    if isinstance(phi, SampledHistory):
        norms = np.linalg.norm(phi.values, axis=1)
        i = int(np.argmax(norms))
        v = float(norms[i])
        return SupNorm(v, v, v, float(phi.grid[i]))

    t = np.linspace(-phi.tau, 0.0, samples)
    norms = np.linalg.norm(phi(t), axis=1)
    i = int(np.argmax(norms))
    best, best_t = float(norms[i]), float(t[i])

    def norm_at(s: float) -> float:
        return float(np.linalg.norm(phi(s)))

    lo, hi = t[max(i - 1, 0)], t[min(i + 1, samples - 1)]
    refined, rt = _golden_max(norm_at, float(lo), float(hi))
    if refined > best:
        best, best_t = refined, rt

    jump = float(np.max(np.abs(np.diff(norms)))) if samples > 1 else 0.0
    return SupNorm(best, best, best + jump, best_t)
