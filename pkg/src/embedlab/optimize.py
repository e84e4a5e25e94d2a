"""Multi-start Nelder-Mead minimisation of leakage over phase functions.

Only gauge-fixed coordinates are searched: phases on a spanning forest of
the support graph do not change Δ. Restart 0 always starts at the canonical
embedding (all phases zero); the others start at seeded uniform points.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .embeddings import (
    TWO_PI,
    GaugeFixing,
    PhaseAssignment,
    _amplitude_matrix,
    _gram_entropy,
    free_phase_coordinates,
)
from .errors import DimensionTooLarge, ValidationError
from .probdist import JointDistribution, mutual_information

MAX_COORDS = 64
_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def restart_seed(seed: int, index: int) -> int:
    return splitmix64((seed & _MASK64) ^ splitmix64(index))


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 16
    max_iters: int = 2000
    ftol: float = 1e-9
    seed: int = 0
    simplex_scale: float = math.pi / 4
    xtol: float = 1e-6
    threads: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")
        if not self.ftol > 0:
            raise ValidationError(f"ftol must be positive, got {self.ftol}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass(frozen=True)
class RestartTrace:
    index: int
    start: tuple[float, ...]
    final: tuple[float, ...]
    delta: float
    iters: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "start": list(self.start),
            "final": list(self.final),
            "delta": self.delta,
            "iters": self.iters,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class OptimizerResult:
    best_phases: PhaseAssignment
    best_coords: tuple[float, ...]
    best_delta: float
    best_restart: int
    per_restart: list[RestartTrace] = field(repr=False)
    converged: bool
    count: int

    def to_dict(self) -> dict:
        return {
            "best_delta": self.best_delta,
            "best_coords": list(self.best_coords),
            "best_restart": self.best_restart,
            "free_coordinates": self.count,
            "converged": self.converged,
            "per_restart": [t.to_dict() for t in self.per_restart],
        }


class LeakageObjective:
    """Δ as a function of the gauge-fixed coordinates of ``P``."""

    def __init__(self, P: JointDistribution, gauge: GaugeFixing | None = None):
        self.P = P
        self.gauge = gauge or free_phase_coordinates(P)
        self.mi = mutual_information(P)
        self._base = _amplitude_matrix(P, None)
        rows, cols = zip(*P.support) if P.support else ((), ())
        free = self.gauge.free_edges
        self._rows = np.array([rows[e] for e in free], dtype=int)
        self._cols = np.array([cols[e] for e in free], dtype=int)

    @property
    def count(self) -> int:
        return self.gauge.count

    def __call__(self, coords) -> float:
        coords = np.asarray(coords, dtype=float).ravel()
        if coords.shape != (self.count,):
            raise ValidationError(f"expected {self.count} coordinates, got {coords.size}")
        m = self._base.copy()
        m[self._rows, self._cols] *= np.exp(1j * coords)
        return _gram_entropy(m) - self.mi


def evaluate_objective(P: JointDistribution, coords) -> float:
    return LeakageObjective(P)(coords)


def _thread_cap() -> int:
    env = os.environ.get("EMBEDLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _start_point(cfg: OptimizerConfig, index: int, k: int) -> np.ndarray:
    if index == 0:
        return np.zeros(k)
    rng = np.random.default_rng(restart_seed(cfg.seed, index))
    return rng.uniform(0.0, TWO_PI, size=k)


def _run_restart(obj: LeakageObjective, cfg: OptimizerConfig, index: int) -> RestartTrace:
    k = obj.count
    x0 = _start_point(cfg, index, k)
    simplex = np.vstack([x0, x0 + cfg.simplex_scale * np.eye(k)])
    res = minimize(
        obj,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "maxiter": cfg.max_iters,
            "maxfev": 2 * cfg.max_iters * max(1, k),
            "fatol": cfg.ftol,
            "xatol": cfg.xtol,
        },
    )
    final = np.mod(res.x, TWO_PI)
    return RestartTrace(index, tuple(x0.tolist()), tuple(final.tolist()), float(res.fun), int(res.nit), bool(res.success))


def minimize_leakage(P: JointDistribution, cfg: OptimizerConfig | None = None) -> OptimizerResult:
    """Smallest Δ found over regular embeddings of ``P``.

    Not a certified global minimum. Deterministic for a fixed ``cfg.seed``
    regardless of how restarts are scheduled across threads.
    """
    cfg = cfg or OptimizerConfig()
    obj = LeakageObjective(P)
    k = obj.count
    if k > MAX_COORDS:
        raise DimensionTooLarge(f"{k} free phase coordinates exceed the limit of {MAX_COORDS}")
    if k == 0:
        d = obj(np.zeros(0))
        traces = [RestartTrace(0, (), (), d, 0, True)]
    else:
        workers = min(cfg.threads or _thread_cap(), cfg.restarts)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                traces = list(pool.map(lambda i: _run_restart(obj, cfg, i), range(cfg.restarts)))
        else:
            traces = [_run_restart(obj, cfg, i) for i in range(cfg.restarts)]
    # min() keeps the first of equal values, i.e. the lowest restart index
    best = min(traces, key=lambda t: t.delta)
    return OptimizerResult(
        best_phases=obj.gauge.embed(best.final),
        best_coords=best.final,
        best_delta=best.delta,
        best_restart=best.index,
        per_restart=traces,
        converged=any(t.converged for t in traces),
        count=k,
    )
