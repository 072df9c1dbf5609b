"""Monte-Carlo finite-time stability checks and example reproduction."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .certify import StabilityBox, t1_certify, t2_certify
from .config import BUNDLED, load_spec
from .history import ConstantHistory, InitialHistory, SampledHistory, TanhHistory
from .matnorm import history_sup_norm
from .solver import DivergenceError, SystemSpec, solve_trajectory

__all__ = [
    "FAMILIES",
    "VerifyConfig",
    "VerifyReport",
    "mc_verify",
    "reproduce_example",
    "sample_history",
]

FAMILIES = ("constant", "tanh", "piecewise-linear")
DEFAULT_STEP = 2.0**-8
STRICT_SLACK = 1e-12
PL_KNOTS = 8


@dataclass(frozen=True)
class VerifyConfig:
    samples: int
    seed: int
    box: StabilityBox
    step: float = DEFAULT_STEP
    families: tuple[str, ...] = FAMILIES

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise ValueError("step must be positive")
        unknown = set(self.families) - set(FAMILIES)
        if unknown or not self.families:
            raise ValueError(f"unknown history families {sorted(unknown)}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "step": self.step,
            "families": list(self.families),
            "box": {"c1": self.box.c1, "c2": self.box.c2, "T": self.box.T},
        }


@dataclass
class VerifyReport:
    system: dict[str, Any]
    config: dict[str, Any]
    records: list[dict[str, Any]]
    certificate: dict[str, Any]
    violations: list[int] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if not self.violations else "fail"

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict[str, Any]:
        return {
            "system": self.system,
            "config": self.config,
            "certificate": self.certificate,
            "samples": self.records,
            "violations": self.violations,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def sample_history(rng: np.random.Generator, family: str, dim: int, tau: float,
                   c1: float) -> InitialHistory:
    """Draw one history with ``||phi||_C <= c1``.

    Constants are unit directions scaled to exactly ``c1``. Tanh ramps and
    piecewise-linear histories are drawn freely and rescaled so their sup
    norm is a random fraction (at least half) of ``c1``.
    """
    if family == "constant":
        v = rng.standard_normal(dim)
        while not np.any(v):
            v = rng.standard_normal(dim)
        return ConstantHistory(v / np.linalg.norm(v) * c1, tau)

    if family == "tanh":
        amp = rng.standard_normal(dim)
        rate = float(rng.uniform(0.5, 5.0)) * (1.0 if rng.random() < 0.5 else -1.0)
        shift = float(rng.uniform(0.0, tau))
        raw = TanhHistory(amp, tau, rate=rate, shift=shift)
    elif family == "piecewise-linear":
        grid = np.linspace(-tau, 0.0, PL_KNOTS)
        grid[-1] = 0.0
        raw = SampledHistory(grid, rng.standard_normal((PL_KNOTS, dim)))
    else:
        raise ValueError(f"unknown history family {family!r}")

    sup = history_sup_norm(raw).value
    if sup == 0.0:
        return ConstantHistory(np.zeros(dim), tau)
    target = c1 * float(rng.uniform(0.5, 1.0))
    return raw.scaled(target / sup)


def _threads() -> int:
    env = os.environ.get("GPFSTAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(4, os.cpu_count() or 1))


def _run_sample(s: SystemSpec, cfg: VerifyConfig, index: int,
                seed_seq: np.random.SeedSequence) -> dict[str, Any]:
    rng = np.random.default_rng(seed_seq)
    family = cfg.families[int(rng.integers(len(cfg.families)))]
    phi = sample_history(rng, family, s.dim, s.tau, cfg.box.c1)
    phi_c = history_sup_norm(phi).value
    if phi_c > cfg.box.c1 * (1.0 + 1e-12):
        raise AssertionError(f"sample {index}: ||phi||_C = {phi_c} exceeds c1 = {cfg.box.c1}")

    record: dict[str, Any] = {"index": index, "family": family, "phiC": phi_c}
    try:
        traj = solve_trajectory(s, phi, cfg.step)
        divergence = False
    except DivergenceError as exc:
        traj = exc.trajectory
        divergence = True
    peak, at = traj.max_norm()
    record.update(
        max_norm=peak,
        argmax_t=at,
        divergence=divergence,
        violated=divergence or peak > cfg.box.c2 - STRICT_SLACK,
    )
    return record


def mc_verify(s: SystemSpec, cfg: VerifyConfig, threads: int | None = None) -> VerifyReport:
    """Simulate ``cfg.samples`` random admissible histories and compare peaks with ``c2``.

    Sample ``i`` draws from its own child of ``SeedSequence(cfg.seed)``, so the
    report does not depend on the number of worker threads.
    """
    if not math.isclose(cfg.box.T, s.T, rel_tol=1e-12):
        raise ValueError(f"box horizon {cfg.box.T} differs from system horizon {s.T}")
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.samples)
    n_threads = threads or _threads()
    if n_threads == 1:
        records = [_run_sample(s, cfg, i, ss) for i, ss in enumerate(children)]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            records = list(pool.map(lambda a: _run_sample(s, cfg, *a), enumerate(children)))

    cert = t1_certify(s, cfg.box)
    return VerifyReport(
        system=s.to_dict(),
        config=cfg.to_dict(),
        records=records,
        certificate={"method": cert.method, "verdict": cert.verdict, "margin": cert.margin},
        violations=[r["index"] for r in records if r["violated"]],
    )


_STATED = {
    "example1": {"phiC": 0.9899, "normA": 0.2, "normB": 0.3, "Lf": None},
    "example2": {"phiC": 0.2266, "normA": 0.3, "normB": 0.5, "Lf": 0.02},
}


def _discrepancies(name: str, spec, phi_c: float, t1) -> list[str]:
    s = spec.system
    notes: list[str] = []
    if name == "example1":
        notes.append(
            f"exponential factor: the example writes exp(0.25 t), but mu = {s.mu} gives "
            f"(mu - 1)/mu = {s.theta:g}; the simulation uses exp({s.theta:g} t)"
        )
    if name == "example2":
        notes.append(
            f"||phi||_C: stated 0.2266, computed {phi_c:.6f} = 0.5 tanh(0.3) for "
            "phi(t) = (0.5 tanh t, 0) on [-0.3, 0]; both are below c1 = 0.4, so the "
            "admissibility conclusion is unchanged"
        )
        notes.append(
            "horizon: the example header lists T = 4 while the system is posed on [0, 3] "
            "and the box uses T = 3; T = 3 is used"
        )
        notes.append(
            "notation: the conclusion names the box {xi = 0.4, eps = 4, T = 3}, i.e. "
            "{c1, c2, T}"
        )
        if not t1.certified:
            notes.append(
                f"T1 verdict: the example states the condition holds on [0, 3], but the "
                f"computed left-hand side at T = 3 is {t1.lhs_at_T:.6g} > c2/c1 = "
                f"{t1.ratio:g}; the criterion does not certify this box"
            )
    return notes


def reproduce_example(which: int | str, step: float = DEFAULT_STEP) -> dict[str, Any]:
    """Recompute every certifiable quantity of bundled example 1 or 2."""
    name = f"example{which}"
    if name not in BUNDLED:
        raise ValueError(f"unknown example {which!r}; choose 1 or 2")
    start = time.perf_counter()
    spec = load_spec(name)
    s = spec.system
    sup = history_sup_norm(spec.phi)
    t1 = t1_certify(s, spec.box)
    t2 = t2_certify(s, spec.box)
    traj = solve_trajectory(s, spec.phi, step)
    peak, at = traj.max_norm()
    stated = _STATED[name]
    return {
        "example": int(which),
        "phiC": sup.value,
        "phiC_bracket": [sup.lower, sup.upper],
        "phiC_stated": stated["phiC"],
        "normA": s.norm_A,
        "normB": s.norm_B,
        "Lf": s.lipschitz,
        "box": {"c1": spec.box.c1, "c2": spec.box.c2, "T": spec.box.T},
        "phi_admissible": sup.value <= spec.box.c1,
        "T1": t1.to_dict(),
        "T2": t2.to_dict(),
        "trajectory": {
            "h": traj.step,
            "solver": traj.meta["solver"],
            "corrector_sweeps": traj.meta["corrector_sweeps"],
            "max_norm": peak,
            "argmax_t": at,
            "below_c2": peak < spec.box.c2,
        },
        "discrepancies": _discrepancies(name, spec, sup.value, t1),
        "elapsed_s": time.perf_counter() - start,
    }
