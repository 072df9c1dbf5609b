r"""Finite-time stability certificates.

Two sufficient conditions are implemented, both of the form
``LHS(t) <= c2 / c1`` for every ``t`` in ``[0, T]``:

* ``T1`` (Grönwall / Mittag-Leffler)::

      (1 + s t^a / (mu^a Gamma(a+1))) * E_a(s t^a / mu^a),   s = ||A|| + ||B||

* ``T2`` (Hölder / Jensen)::

      ((3^(1/a) r + (3^(1/a) psi + r varphi + psi varphi) e^((psi + r) t)) / (r + psi))^(1/r)

  with ``k = 1 + a``, ``r = 1 + 1/a`` and the constants of :class:`T2Constants`.

Both left-hand sides are nondecreasing in ``t``, so the condition reduces
to its value at ``T``; the sampled profile is kept as a diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .solver import SystemSpec
from .special_fn import gamma, mittag_leffler

__all__ = [
    "Certificate",
    "StabilityBox",
    "T2Constants",
    "gronwall_bound",
    "t1_certify",
    "t1_lhs",
    "t2_certify",
    "t2_constants",
    "t2_lhs",
]

PROFILE_POINTS = 1_024
_LOG_SPACE_AT = 700.0

NOTE_T1_NONLINEAR = (
    "T1 criterion is norm-only; the nonlinearity enters through its "
    "Lipschitz hypothesis only"
)
NOTE_T2_Q = "exp(-tau*q) in varphi is evaluated with q = r (q is otherwise undefined)"
NOTE_T2_MU = (
    "psi and varphi use mu^k with k = 1 + alpha; the Hölder step itself "
    "carries mu^alpha factors"
)


@dataclass(frozen=True)
class StabilityBox:
    """``{c1, c2, T}``: ``||phi||_C <= c1`` must imply ``||y(t)|| < c2`` on ``[0, T]``."""

    c1: float
    c2: float
    T: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c1) and self.c1 > 0.0):
            raise ValueError(f"c1 must be positive, got {self.c1!r}")
        if not (math.isfinite(self.c2) and self.c2 >= self.c1):
            raise ValueError(
                f"finite-time stability box needs 0 < c1 <= c2, got c1={self.c1}, c2={self.c2}"
            )
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ValueError(f"T must be positive, got {self.T!r}")

    @property
    def ratio(self) -> float:
        return self.c2 / self.c1


@dataclass(frozen=True)
class T2Constants:
    k: float
    r: float
    omega: float
    psi: float
    varphi: float

    def to_dict(self) -> dict[str, float]:
        return {"k": self.k, "r": self.r, "omega": self.omega, "psi": self.psi,
                "varphi": self.varphi}


@dataclass(frozen=True)
class Certificate:
    method: str
    alpha: float
    mu: float
    tau: float
    T: float
    normA: float
    normB: float
    Lf: float
    c1: float
    c2: float
    lhs_at_T: float
    margin: float
    verdict: str
    notes: tuple[str, ...] = ()
    constants: T2Constants | None = None
    profile_t: np.ndarray = field(default=None, repr=False, compare=False)
    profile_lhs: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    @property
    def ratio(self) -> float:
        return self.c2 / self.c1

    def to_dict(self, with_profile: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "method": self.method,
            "alpha": self.alpha,
            "mu": self.mu,
            "tau": self.tau,
            "T": self.T,
            "normA": self.normA,
            "normB": self.normB,
            "Lf": self.Lf,
            "c1": self.c1,
            "c2": self.c2,
            "lhs_at_T": self.lhs_at_T,
            "margin": self.margin,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }
        if self.constants is not None:
            out["constants"] = self.constants.to_dict()
        if with_profile and self.profile_t is not None:
            out["profile"] = {"t": self.profile_t.tolist(), "lhs": self.profile_lhs.tolist()}
        return out


def _t1_value(alpha: float, mu: float, norm_sum: float, t: float) -> float:
    if t <= 0.0 or norm_sum == 0.0:
        return 1.0
    ta = float(t) ** alpha / mu**alpha
    try:
        e = mittag_leffler(alpha, norm_sum * ta)
    except OverflowError:
        return math.inf
    return (1.0 + norm_sum * ta / gamma(alpha + 1.0)) * e


def t1_lhs(s: SystemSpec, t: float) -> float:
    """Left-hand side of the Grönwall / Mittag-Leffler condition at time ``t``."""
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    return _t1_value(s.alpha, s.mu, s.norm_A + s.norm_B, t)


def gronwall_bound(s: SystemSpec, phiC: float, t: float) -> float:
    """Upper bound ``||phi||_C * LHS_T1(t)`` on ``||y(t)||`` for the linear system."""
    if phiC < 0.0:
        raise ValueError("phiC must be >= 0")
    if phiC == 0.0:
        return 0.0
    return phiC * t1_lhs(s, t)


def t2_constants_from_norms(alpha: float, mu: float, tau: float, normA: float,
                            normB: float, Lf: float) -> T2Constants:
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    k = 1.0 + alpha
    r = 1.0 + 1.0 / alpha
    omega = (gamma(alpha * alpha) / k ** (alpha * alpha)) ** (1.0 / k)
    c3 = 3.0 ** (1.0 / alpha)
    denom = mu**k * gamma(alpha) ** r
    wr = omega**r
    psi = c3 * ((normA + Lf) ** r + (normB + Lf) ** r * math.exp(-r * tau)) * wr / denom
    q = r
    varphi = c3 * (normB + Lf) ** r * (1.0 - math.exp(-tau * q)) / (r * denom) * wr
    return T2Constants(k, r, omega, psi, varphi)


def t2_constants(s: SystemSpec) -> T2Constants:
    """``k``, ``r``, ``omega``, ``psi`` and ``varphi`` for the Hölder / Jensen condition."""
    return t2_constants_from_norms(s.alpha, s.mu, s.tau, s.norm_A, s.norm_B, s.lipschitz)


def _t2_value(alpha: float, c: T2Constants, t: float) -> float:
    c3 = 3.0 ** (1.0 / alpha)
    r, psi, vp = c.r, c.psi, c.varphi
    lead = c3 * psi + r * vp + psi * vp
    rate = (psi + r) * t
    if rate <= _LOG_SPACE_AT:
        value = ((c3 * r + lead * math.exp(rate)) / (r + psi)) ** (1.0 / r)
        if math.isfinite(value):
            return value
    if lead == 0.0:
        return c3 ** (1.0 / r)
    # the numerator overflowed but its r-th root may not
    log_num = float(np.logaddexp(math.log(c3 * r), math.log(lead) + rate))
    log_val = (log_num - math.log(r + psi)) / r
    try:
        return math.exp(log_val)
    except OverflowError:
        return math.inf


def t2_lhs(s: SystemSpec, t: float) -> float:
    """Left-hand side of the Hölder / Jensen condition at time ``t``."""
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    return _t2_value(s.alpha, t2_constants(s), t)


def _profile_grid(T: float) -> np.ndarray:
    t = np.linspace(0.0, T, PROFILE_POINTS)
    t[-1] = T
    return t


def _monotone_profile(lhs, t: np.ndarray) -> np.ndarray:
    # nondecreasing, so everything after the first overflow is +inf as well
    out = np.full(t.size, math.inf)
    for i, ti in enumerate(t):
        out[i] = lhs(float(ti))
        if out[i] == math.inf:
            break
    return out


def _certificate(method: str, s: SystemSpec, box: StabilityBox, values: np.ndarray,
                 t: np.ndarray, notes: list[str], constants: T2Constants | None = None):
    worst = float(np.max(values))
    ratio = box.ratio
    return Certificate(
        method=method,
        alpha=s.alpha,
        mu=s.mu,
        tau=s.tau,
        T=box.T,
        normA=s.norm_A,
        normB=s.norm_B,
        Lf=s.lipschitz,
        c1=box.c1,
        c2=box.c2,
        lhs_at_T=float(values[-1]),
        margin=ratio - worst,
        verdict="certified" if worst <= ratio else "not-certified",
        notes=tuple(notes),
        constants=constants,
        profile_t=t,
        profile_lhs=values,
    )


def t1_certify(s: SystemSpec, box: StabilityBox) -> Certificate:
    t = _profile_grid(box.T)
    norm_sum = s.norm_A + s.norm_B
    values = _monotone_profile(lambda ti: _t1_value(s.alpha, s.mu, norm_sum, ti), t)
    notes = [] if s.f.is_zero else [NOTE_T1_NONLINEAR]
    return _certificate("T1", s, box, values, t, notes)


def t2_certify(s: SystemSpec, box: StabilityBox) -> Certificate:
    consts = t2_constants(s)
    t = _profile_grid(box.T)
    values = _monotone_profile(lambda ti: _t2_value(s.alpha, consts, ti), t)
    return _certificate("T2", s, box, values, t, [NOTE_T2_Q, NOTE_T2_MU], consts)
