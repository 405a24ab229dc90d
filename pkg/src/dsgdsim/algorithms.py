"""Iteration step functions and the run loop.

Five methods over explicit state:

* ``dsgd``            decentralized SGD: mix(W, Z - alpha * sampled gradients)
* ``dist_subgrad``    same update with exact per-node subgradients
* ``consensus``       neighbor averaging only (no gradient term)
* ``sgd``             centralized SGD using the mean of n sampled gradients
* ``central_subgrad`` centralized method using the mean of n exact subgradients

All step functions are pure (state in, state out) and draw randomness only
from an explicit generator. The stepsize schedule is evaluated at
``state.k + 1`` for the step leaving state k, so 1/k-style schedules are
never evaluated at zero. The gradient is applied before mixing, i.e. the
decentralized update is W (Z - alpha G), not (W Z) - alpha G.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import (
    RunTrace,
    central_error,
    consensus_error,
    metric_grid,
    node_error_max,
    optimization_error,
)
from .mixing import MixingMatrix
from .objectives import Objective

ALGORITHMS = ("dsgd", "dist_subgrad", "consensus", "sgd", "central_subgrad")
_DISTRIBUTED = frozenset({"dsgd", "dist_subgrad", "consensus"})


class DivergenceError(RuntimeError):
    """Raised when an iterate picks up a NaN/Inf entry."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite iterate at iteration {iteration}")
        self.iteration = iteration


# ---------------------------------------------------------------------------
# Stepsize schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """Nonnegative non-increasing stepsize sequence, evaluated at integer k >= 1."""

    kind: str
    c: float = 1.0
    offset: float = 0.0
    mu: float = 0.0

    def __call__(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"schedules are evaluated at k >= 1, got {k}")
        if self.kind == "constant":
            return self.c
        if self.kind == "inv_sqrt":
            return self.c / np.sqrt(k)
        if self.kind == "inv":
            return self.c / (k + self.offset)
        if self.kind == "mu_inv":
            return 1.0 / (self.mu * k)
        raise ValueError(f"unknown schedule kind {self.kind!r}")


def constant(c: float) -> Schedule:
    if c < 0:
        raise ValueError(f"stepsize must be nonnegative, got {c}")
    return Schedule("constant", c=c)


def inv_sqrt(c: float = 1.0) -> Schedule:
    """alpha_k = c / sqrt(k)."""
    if c < 0:
        raise ValueError(f"stepsize scale must be nonnegative, got {c}")
    return Schedule("inv_sqrt", c=c)


def inv(c: float, offset: float = 0.0) -> Schedule:
    """alpha_k = c / (k + offset)."""
    if c < 0 or offset < 0:
        raise ValueError(f"need c, offset >= 0, got c={c}, offset={offset}")
    return Schedule("inv", c=c, offset=offset)


def mu_inv(mu: float) -> Schedule:
    """alpha_k = 1 / (mu k)."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    return Schedule("mu_inv", mu=mu)


def schedule_from_config(spec: dict) -> Schedule:
    kind = spec.get("kind")
    if kind == "constant":
        return constant(float(spec["c"]))
    if kind == "inv_sqrt":
        return inv_sqrt(float(spec.get("c", 1.0)))
    if kind == "inv":
        return inv(float(spec["c"]), float(spec.get("offset", 0.0)))
    if kind == "mu_inv":
        return mu_inv(float(spec["mu"]))
    raise ValueError(f"unknown schedule kind {kind!r}")


# ---------------------------------------------------------------------------
# States and steps
# ---------------------------------------------------------------------------

@dataclass
class IterateBlock:
    """Per-node decision vectors: row i of Z is node i's iterate at time k."""

    Z: np.ndarray
    k: int = 0


@dataclass
class CentralState:
    """Single decision vector of a centralized method at time k."""

    z: np.ndarray
    k: int = 0


def _ensure_finite(arr: np.ndarray, k: int) -> None:
    # cheap check first: a finite sum implies all entries are finite
    if not np.isfinite(arr.sum()) and not np.isfinite(arr).all():
        raise DivergenceError(k)


def dsgd_step(state: IterateBlock, W: MixingMatrix, obj: Objective,
              sched: Schedule, rng: np.random.Generator,
              debug: bool = False) -> IterateBlock:
    """One decentralized SGD update: W (Z - alpha G), one gradient sample per node."""
    k1 = state.k + 1
    alpha = sched(k1)
    G = obj.sample_grad_block(state.Z, rng)
    Znew = W.w @ (state.Z - alpha * G)
    _ensure_finite(Znew, k1)
    if debug:
        _check_mean_dynamics(state.Z, G, alpha, Znew, k1)
    return IterateBlock(Znew, k1)


def subgradient_step(state: IterateBlock, W: MixingMatrix, obj: Objective,
                     sched: Schedule) -> IterateBlock:
    """Decentralized update with exact per-node subgradients."""
    k1 = state.k + 1
    alpha = sched(k1)
    G = obj.exact_grad_block(state.Z)
    Znew = W.w @ (state.Z - alpha * G)
    _ensure_finite(Znew, k1)
    return IterateBlock(Znew, k1)


def consensus_step(state: IterateBlock, W: MixingMatrix) -> IterateBlock:
    """Pure neighbor averaging."""
    Znew = W.w @ state.Z
    k1 = state.k + 1
    _ensure_finite(Znew, k1)
    return IterateBlock(Znew, k1)


def sgd_step(state: CentralState, obj: Objective, sched: Schedule,
             rng: np.random.Generator) -> CentralState:
    """Centralized step with the mean of n sampled gradients at the same point.

    Consumes exactly n gradient samples, matching the per-step budget of the
    decentralized update.
    """
    k1 = state.k + 1
    alpha = sched(k1)
    G = obj.sample_grad_block(np.broadcast_to(state.z, (obj.n, obj.d)), rng)
    znew = state.z - alpha * G.mean(axis=0)
    _ensure_finite(znew, k1)
    return CentralState(znew, k1)


def centralized_subgradient_step(state: CentralState, obj: Objective,
                                 sched: Schedule) -> CentralState:
    """Centralized step with the mean of the n exact subgradients."""
    k1 = state.k + 1
    alpha = sched(k1)
    G = obj.exact_grad_block(np.broadcast_to(state.z, (obj.n, obj.d)))
    znew = state.z - alpha * G.mean(axis=0)
    _ensure_finite(znew, k1)
    return CentralState(znew, k1)


def _check_mean_dynamics(Z, G, alpha, Znew, k1) -> None:
    # double stochasticity implies the row mean evolves like plain (S)GD
    expected = Z.mean(axis=0) - alpha * G.mean(axis=0)
    drift = float(np.abs(Znew.mean(axis=0) - expected).max())
    tol = 1e-12 * max(1.0, float(np.abs(Z).max()))
    if drift > tol:
        raise AssertionError(f"mean-dynamics drift {drift:.3e} at iteration {k1}")


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------

def run(algo: str, *, iters: int, init, mixing: MixingMatrix | None = None,
        objective: Objective | None = None, schedule: Schedule | None = None,
        rng: np.random.Generator | None = None, zstar=None, record_at=None,
        meta: dict | None = None, debug: bool = False) -> RunTrace:
    """Execute ``iters`` steps of the chosen method, recording metrics on a grid.

    ``init`` is the initial iterate: an (n, d) block (or length-n vector, read
    as d = 1) for distributed methods, a d-vector for centralized ones.
    ``record_at`` is a sorted iterable of iteration indices (defaults to
    :func:`metrics.metric_grid`). U/R and the per-node error are recorded when
    the optimum is known (``zstar`` or ``objective.optimum``). Deterministic
    for a fixed generator state.
    """
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
    iters = int(iters)
    if iters < 0:
        raise ValueError(f"iteration count must be nonnegative, got {iters}")
    distributed = algo in _DISTRIBUTED
    problems: list[str] = []
    if algo != "consensus" and objective is None:
        problems.append(f"{algo} requires an objective")
    if algo != "consensus" and schedule is None:
        problems.append(f"{algo} requires a stepsize schedule")
    if algo in ("dsgd", "sgd") and rng is None:
        problems.append(f"{algo} requires a random generator")
    if distributed and mixing is None:
        problems.append(f"{algo} requires a mixing matrix")

    init = np.array(init, dtype=float)
    if distributed:
        if init.ndim == 1:
            init = init[:, None]
        n, d = init.shape
        if mixing is not None and mixing.n != n:
            problems.append(f"initial block has n={n} rows but mixing matrix has n={mixing.n}")
        if objective is not None and objective.n != n:
            problems.append(f"initial block has n={n} rows but objective has n={objective.n}")
        if objective is not None and objective.d != d:
            problems.append(f"initial block has d={d} columns but objective has d={objective.d}")
    else:
        init = init.ravel()
        if objective is not None and objective.d != init.size:
            problems.append(
                f"initial vector has d={init.size} but objective has d={objective.d}"
            )
    if problems:
        raise ValueError("; ".join(problems))

    if zstar is None and objective is not None:
        zstar = objective.optimum
    if zstar is not None:
        zstar = np.asarray(zstar, dtype=float)

    if record_at is None:
        grid = metric_grid(iters)
    else:
        grid = np.unique(np.asarray(record_at, dtype=np.int64))
        if grid.size and (grid[0] < 0 or grid[-1] > iters):
            raise ValueError("metric grid points must lie in [0, iters]")

    _ensure_finite(init, 0)

    if algo == "dsgd":
        step = lambda s: dsgd_step(s, mixing, objective, schedule, rng, debug)
    elif algo == "dist_subgrad":
        step = lambda s: subgradient_step(s, mixing, objective, schedule)
    elif algo == "consensus":
        step = lambda s: consensus_step(s, mixing)
    elif algo == "sgd":
        step = lambda s: sgd_step(s, objective, schedule, rng)
    else:
        step = lambda s: centralized_subgradient_step(s, objective, schedule)

    ks_rec: list[int] = []
    U_rec: list[float] = []
    V_rec: list[float] = []
    R_rec: list[float] = []
    node_max_rec: list[float] = []
    node_mean_rec: list[float] = []

    def record(state) -> None:
        ks_rec.append(state.k)
        if distributed:
            v = consensus_error(state.Z)
            V_rec.append(v)
            if zstar is not None:
                u = optimization_error(state.Z, zstar)
                U_rec.append(u)
                node_max_rec.append(node_error_max(state.Z, zstar))
                # per-node mean error: bias/dispersion identity U + V/n
                node_mean_rec.append(u + v / state.Z.shape[0])
        elif zstar is not None:
            R_rec.append(central_error(state.z, zstar))

    state = IterateBlock(init, 0) if distributed else CentralState(init, 0)
    gi = 0
    if gi < grid.size and grid[gi] == 0:
        record(state)
        gi += 1
    for _ in range(iters):
        state = step(state)
        if gi < grid.size and state.k == grid[gi]:
            record(state)
            gi += 1

    out_meta = dict(meta or {})
    out_meta.setdefault("algo", algo)
    if mixing is not None:
        out_meta.setdefault("lambda", mixing.lam)
    arr = lambda lst: np.array(lst, dtype=float) if lst else None
    return RunTrace(
        ks=np.array(ks_rec, dtype=np.int64),
        U=arr(U_rec) if distributed else None,
        V=arr(V_rec) if distributed else None,
        R=arr(R_rec) if not distributed else None,
        node_err_max=arr(node_max_rec) if distributed else None,
        node_err_mean=arr(node_mean_rec) if distributed else None,
        meta=out_meta,
    )
