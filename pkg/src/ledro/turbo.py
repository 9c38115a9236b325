"""Single trust-region Bayesian optimization (TuRBO-1) in the unit cube.

The optimizer maximizes.  Observations live in ``[0, 1]^d`` relative to the
active :class:`~ledro.design_space.SearchRegion`; proposals are mapped back
to legal design points (integer fins, discrete gate lengths) before
evaluation, and the snapped point's unit coordinates are what the surrogate
sees.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .design_space import DesignPoint, ParameterDef, SearchRegion, from_unit, to_unit
from .errors import ConfigError
from .gp import FitSchedule, GaussianProcess, Hyperparameters, fit_gp

log = logging.getLogger(__name__)


@dataclass
class TurboConfig:
    length_init: float = 0.8
    length_min: float = 0.5**7
    length_max: float = 1.6
    success_tolerance: int = 3
    failure_tolerance: int | None = None  # max(5, dim)
    pool_size: int | None = None  # min(100 * dim, 5000)
    batch_size: int = 10
    n_init: int | None = None  # 2 * dim
    max_train: int = 200
    sampler: str = "pathwise"
    n_features: int = 1024
    fit: FitSchedule = field(default_factory=lambda: FitSchedule(n_random_starts=1, maxiter=30))

    def resolve(self, dim: int) -> "TurboConfig":
        c = TurboConfig(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        if c.failure_tolerance is None:
            c.failure_tolerance = max(5, dim)
        if c.pool_size is None:
            c.pool_size = min(100 * dim, 5000)
        if c.n_init is None:
            c.n_init = max(2, 2 * dim)
        if c.sampler not in ("pathwise", "exact"):
            raise ConfigError(f"unknown sampler {c.sampler!r}")
        return c


@dataclass
class TrustRegionState:
    dim: int
    length: float
    length_init: float
    length_min: float
    length_max: float
    success_tolerance: int
    failure_tolerance: int
    X: np.ndarray
    y: np.ndarray
    n_init: int = 2
    success_count: int = 0
    failure_count: int = 0
    restarts: int = 0
    restart_pending: bool = False
    pending: np.ndarray | None = None  # initial design awaiting evaluation
    archive: list = field(default_factory=list)
    hyper: Hyperparameters | None = None
    rng: np.random.Generator | None = None

    @property
    def n_observations(self) -> int:
        return len(self.y)

    @property
    def incumbent(self) -> tuple[np.ndarray, float] | None:
        if len(self.y) == 0:
            return None
        i = int(np.argmax(self.y))
        return self.X[i], float(self.y[i])

    @property
    def best_value(self) -> float:
        return float(np.max(self.y)) if len(self.y) else -math.inf

    def add(self, X, y) -> None:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self.X = np.vstack([self.X, X]) if len(self.X) else X.copy()
        self.y = np.concatenate([self.y, np.asarray(y, dtype=float).ravel()])


def sobol_design(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Scrambled Sobol' points in the unit cube."""
    sampler = qmc.Sobol(d=dim, scramble=True, seed=rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return sampler.random(n)


def init_state(
    dim: int,
    n_init: int,
    seed=0,
    config: TurboConfig | None = None,
    observations: tuple[np.ndarray, np.ndarray] | None = None,
) -> TrustRegionState:
    """Fresh trust region.

    When fewer than ``n_init`` warm-start observations are supplied, the
    shortfall is queued as a space-filling initial design in ``pending``.
    """
    if n_init < 2:
        raise ConfigError("n_init must be at least 2")
    cfg = (config or TurboConfig()).resolve(dim)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    state = TrustRegionState(
        dim=dim,
        length=cfg.length_init,
        length_init=cfg.length_init,
        length_min=cfg.length_min,
        length_max=cfg.length_max,
        success_tolerance=cfg.success_tolerance,
        failure_tolerance=cfg.failure_tolerance,
        X=np.empty((0, dim)),
        y=np.empty(0),
        n_init=n_init,
        rng=rng,
    )
    if observations is not None and len(observations[1]):
        state.add(*observations)
    n_fresh = max(0, n_init - state.n_observations)
    if n_fresh:
        state.pending = sobol_design(n_fresh, dim, rng)
    return state


def update(state: TrustRegionState, X_new, y_new) -> TrustRegionState:
    """Record a batch and adapt the trust-region side length."""
    y_new = np.asarray(y_new, dtype=float).ravel()
    if len(y_new) == 0:
        return state
    if np.max(y_new) > state.best_value:
        state.success_count += 1
        state.failure_count = 0
    else:
        state.success_count = 0
        state.failure_count += 1
    if state.success_count >= state.success_tolerance:
        state.length = min(2.0 * state.length, state.length_max)
        state.success_count = 0
    elif state.failure_count >= state.failure_tolerance:
        state.length /= 2.0
        state.failure_count = 0
    state.add(X_new, y_new)
    if state.length < state.length_min:
        restart(state)
    return state


def restart(state: TrustRegionState) -> None:
    """Archive the session and start over with a fresh initial design."""
    state.archive.append((state.X, state.y))
    state.X = np.empty((0, state.dim))
    state.y = np.empty(0)
    state.length = state.length_init
    state.success_count = state.failure_count = 0
    state.restarts += 1
    state.restart_pending = True
    state.hyper = None
    state.pending = sobol_design(state.n_init, state.dim, state.rng)


def training_set(state: TrustRegionState, max_train: int):
    """Session data, trimmed to the ``max_train`` points nearest the incumbent."""
    if state.n_observations <= max_train:
        return state.X, state.y
    center, _ = state.incumbent
    dist = np.linalg.norm(state.X - center, axis=1)
    keep = np.sort(np.argsort(dist, kind="stable")[:max_train])
    return state.X[keep], state.y[keep]


def fit_surrogate(state: TrustRegionState, config: TurboConfig | None = None, seed=None) -> GaussianProcess:
    cfg = (config or TurboConfig()).resolve(state.dim)
    X, y = training_set(state, cfg.max_train)
    if seed is None:
        seed = int(state.rng.integers(2**31))
    gp = fit_gp(X, y, seed=seed, schedule=cfg.fit, init=state.hyper)
    if not gp.fallback:
        state.hyper = gp.hyper
    return gp


def trust_region_bounds(state: TrustRegionState, gp: GaussianProcess):
    center, _ = state.incumbent
    weights = gp.hyper.lengthscales / gp.hyper.lengthscales.mean()
    weights = weights / np.prod(np.power(weights, 1.0 / len(weights)))
    lb = np.clip(center - weights * state.length / 2.0, 0.0, 1.0)
    ub = np.clip(center + weights * state.length / 2.0, 0.0, 1.0)
    return lb, ub


def propose(state: TrustRegionState, gp: GaussianProcess, batch: int, config: TurboConfig | None = None):
    """Thompson-sample ``batch`` points inside the trust region.

    Returns ``(candidates, (lb, ub))``.
    """
    cfg = (config or TurboConfig()).resolve(state.dim)
    rng = state.rng
    d = state.dim
    center, _ = state.incumbent
    lb, ub = trust_region_bounds(state, gp)
    n_pool = cfg.pool_size
    pert = lb + (ub - lb) * sobol_design(n_pool, d, rng)
    prob = min(20.0 / d, 1.0)
    mask = rng.random((n_pool, d)) <= prob
    empty = np.nonzero(~mask.any(axis=1))[0]
    if len(empty):
        mask[empty, rng.integers(0, d, size=len(empty))] = True
    pool = np.tile(center, (n_pool, 1))
    pool[mask] = pert[mask]

    if cfg.sampler == "exact":
        draws = gp.sample(pool, batch, rng)
    else:
        draws = gp.sample_pathwise(pool, batch, rng, n_features=cfg.n_features)
    chosen = []
    for k in range(batch):
        order = np.argsort(-draws[k], kind="stable")
        for idx in order:
            if idx not in chosen:
                chosen.append(int(idx))
                break
    return pool[chosen], (lb, ub)


@dataclass
class TurboResult:
    records: list
    state: TrustRegionState
    proposals: list = field(default_factory=list)  # (raw unit vector, lb, ub) per modeled point


def run(
    region: SearchRegion,
    defs: Sequence[ParameterDef],
    budget: int,
    evaluator,
    seed=0,
    config: TurboConfig | None = None,
    warm_start: Sequence = (),
    on_batch: Callable[[list], None] | None = None,
) -> TurboResult:
    """Spend exactly ``budget`` evaluations maximizing record ``fom`` inside ``region``.

    ``evaluator`` must provide ``evaluate_batch(points) -> records`` where each
    record has ``point`` and ``fom``.  ``warm_start`` records whose points lie
    in ``region`` seed the surrogate; the trust region itself starts fresh.
    """
    cfg = (config or TurboConfig()).resolve(region.dim)
    if budget < 0:
        raise ConfigError("budget must be non-negative")
    rng = np.random.default_rng(seed)
    warm = [r for r in warm_start if region.contains(r.point)]
    obs = None
    if warm:
        obs = (np.array([to_unit(r.point, region) for r in warm]), np.array([r.fom for r in warm]))
    if budget < cfg.n_init and budget > 0 and not warm:
        raise ConfigError(f"budget {budget} is smaller than n_init {cfg.n_init}")
    state = init_state(region.dim, cfg.n_init, rng, cfg, observations=obs)

    records: list = []
    proposals: list = []
    while len(records) < budget:
        remaining = budget - len(records)
        if state.pending is not None and len(state.pending):
            U = state.pending[:remaining]
            state.pending = state.pending[remaining:] if remaining < len(state.pending) else None
            initial = True
            boxes = None
        else:
            gp = fit_surrogate(state, cfg)
            U, (lb, ub) = propose(state, gp, min(cfg.batch_size, remaining), cfg)
            initial = False
            boxes = (lb, ub)
        points = [from_unit(u, region, defs) for u in U]
        batch = list(evaluator.evaluate_batch(points))
        Xs = np.array([to_unit(p, region) for p in points])
        ys = np.array([r.fom for r in batch])
        if initial:
            state.add(Xs, ys)
            state.restart_pending = False
        else:
            for u in U:
                proposals.append((u, boxes[0], boxes[1]))
            update(state, Xs, ys)
        records.extend(batch)
        if on_batch is not None:
            on_batch(batch)
    return TurboResult(records, state, proposals)


def best_so_far(values) -> np.ndarray:
    return np.maximum.accumulate(np.asarray(values, dtype=float))


def unit_points(points: Sequence[DesignPoint], region: SearchRegion) -> np.ndarray:
    return np.array([to_unit(p, region) for p in points])
