"""Error functionals, run traces, aggregation, and the transient-time estimator.

Naming: for a block of node iterates with row mean zbar and optimum zstar,

* consensus error   V = sum_i ||z_i - zbar||^2   (dispersion around the mean)
* optimization error U = ||zbar - zstar||^2      (error of the average iterate)
* central error      R = ||z - zstar||^2         (for single-state methods)

Expectations are approximated by averaging traces over replications.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class RunTrace:
    """Metric records of a single replication, sampled on an iteration grid.

    ``node_err_mean`` is the per-node mean squared error, which by the
    bias/dispersion identity equals U + V/n: the expected error of a node
    selected uniformly at random.
    """

    ks: np.ndarray
    U: np.ndarray | None = None
    V: np.ndarray | None = None
    R: np.ndarray | None = None
    node_err_max: np.ndarray | None = None
    node_err_mean: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


@dataclass
class AggregateTrace:
    """Pointwise means of metric series across replications."""

    ks: np.ndarray
    reps: int
    U_mean: np.ndarray | None = None
    V_mean: np.ndarray | None = None
    R_mean: np.ndarray | None = None
    node_err_max_mean: np.ndarray | None = None
    node_err_mean_mean: np.ndarray | None = None


def _rows(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    return Z[:, None] if Z.ndim == 1 else Z


def consensus_error(Z) -> float:
    """V = sum_i ||z_i - zbar||^2; zero iff all rows are equal."""
    Z = _rows(Z)
    return float(((Z - Z.mean(axis=0)) ** 2).sum())


def optimization_error(Z, zstar) -> float:
    """U = ||zbar - zstar||^2 for the row mean zbar."""
    Z = _rows(Z)
    return float(((Z.mean(axis=0) - np.asarray(zstar, dtype=float)) ** 2).sum())


def central_error(z, zstar) -> float:
    """R = ||z - zstar||^2."""
    diff = np.asarray(z, dtype=float) - np.asarray(zstar, dtype=float)
    return float((diff**2).sum())


def node_error_max(Z, zstar) -> float:
    """Worst per-node squared distance to the optimum."""
    Z = _rows(Z)
    return float(((Z - np.asarray(zstar, dtype=float)) ** 2).sum(axis=1).max())


def running_average_update(y, z, k: int):
    """Incremental update of y(k) = (1/k) sum_{l=0}^{k-1} z(l): y <- ((k-1)y + z(k-1))/k."""
    if k < 1:
        raise ValueError(f"running average is defined for k >= 1, got {k}")
    return ((k - 1) * np.asarray(y, dtype=float) + np.asarray(z, dtype=float)) / k


def median_stop_time(y_trace, epsilon: float) -> int | None:
    """First k (1-based) with mean_i |y_i(k)| < epsilon, or None if never reached.

    ``y_trace`` iterates over the per-node running-average vectors for
    k = 1, 2, ...; only symmetric value sets (optimum 0) make this a
    meaningful error measure.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    for k, y in enumerate(y_trace, start=1):
        if float(np.abs(y).mean()) < epsilon:
            return k
    return None


def metric_grid(horizon: int, dense_until: int = 1000, per_decade: int = 30) -> np.ndarray:
    """Iteration grid: every k up to ``dense_until``, then log-spaced to the horizon.

    Always contains 0 and the horizon itself.
    """
    horizon = int(horizon)
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    dense_end = min(horizon, int(dense_until))
    ks = np.arange(0, dense_end + 1, dtype=np.int64)
    if horizon > dense_end:
        if dense_end >= 1:
            span = np.log10(horizon) - np.log10(dense_end)
            count = max(2, int(np.ceil(span * per_decade)) + 1)
            pts = np.round(
                np.logspace(np.log10(dense_end), np.log10(horizon), count)
            ).astype(np.int64)
            ks = np.concatenate([ks, pts])
        ks = np.unique(np.concatenate([ks, np.array([horizon], dtype=np.int64)]))
    return ks


def aggregate(traces) -> AggregateTrace:
    """Pointwise mean across replications; grids must match exactly.

    Traces are averaged in a canonical order (by replication id when present)
    so the result is independent of the order the caller supplies them in.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("no traces to aggregate")
    if all("rep" in t.meta for t in traces):
        traces = sorted(traces, key=lambda t: (t.meta["rep"], str(t.meta.get("seed"))))
    ks = traces[0].ks
    for t in traces[1:]:
        if not np.array_equal(t.ks, ks):
            raise ValueError("traces use different metric grids")

    def mean_of(name: str):
        vals = [getattr(t, name) for t in traces]
        present = [v is not None for v in vals]
        if not any(present):
            return None
        if not all(present):
            raise ValueError(f"series {name!r} present in some traces but missing in others")
        return np.mean(np.stack(vals), axis=0)

    return AggregateTrace(
        ks=ks.copy(), reps=len(traces),
        U_mean=mean_of("U"), V_mean=mean_of("V"),
        R_mean=mean_of("R"), node_err_max_mean=mean_of("node_err_max"),
        node_err_mean_mean=mean_of("node_err_mean"),
    )


def transient_time(dsgd: AggregateTrace, sgd: AggregateTrace, factor: float = 2.0,
                   window: int = 10, dsgd_series: str = "U") -> int | None:
    """Smallest grid k* whose next ``window`` grid points all satisfy
    series_dsgd(k) <= factor * R_sgd(k); None if no such full window exists.

    ``dsgd_series`` selects which decentralized error series is compared:
    ``"U"`` (error of the average iterate), ``"node_err_max"`` (worst
    per-node error), or ``"node_err_mean"`` (expected error of a uniformly
    selected node, the quantity usually plotted against a centralized
    baseline).
    """
    if factor <= 1.0:
        raise ValueError(f"factor must exceed 1, got {factor}")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if not np.array_equal(dsgd.ks, sgd.ks):
        raise ValueError("traces use different metric grids")
    choices = {
        "U": dsgd.U_mean,
        "node_err_max": dsgd.node_err_max_mean,
        "node_err_mean": dsgd.node_err_mean_mean,
    }
    if dsgd_series not in choices:
        raise ValueError(f"unknown dsgd_series {dsgd_series!r}")
    series = choices[dsgd_series]
    if series is None:
        raise ValueError(f"aggregate trace has no {dsgd_series!r} series")
    if sgd.R_mean is None:
        raise ValueError("centralized aggregate trace has no R series")
    ok = series <= factor * sgd.R_mean
    # suffix run lengths of consecutive passing grid points
    runs = np.zeros(len(ok), dtype=np.int64)
    acc = 0
    for idx in range(len(ok) - 1, -1, -1):
        acc = acc + 1 if ok[idx] else 0
        runs[idx] = acc
    hits = np.nonzero(runs >= window)[0]
    if hits.size == 0:
        return None
    return int(dsgd.ks[hits[0]])


# ---------------------------------------------------------------------------
# CSV schemas
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return "" if x is None else f"{float(x):.17g}"


TRACE_COLUMNS = "k,U,V,R,node_err_max,lambda,seed"
AGGREGATE_COLUMNS = "k,U_mean,V_mean,R_mean,reps"


def trace_csv_text(trace: RunTrace) -> str:
    """One row per recorded k: ``k,U,V,R,node_err_max,lambda,seed`` (blank = absent)."""
    lam = trace.meta.get("lambda")
    seed = trace.meta.get("seed")
    lam_s = _fmt(lam)
    seed_s = "" if seed is None else str(int(seed))
    lines = [TRACE_COLUMNS]
    for idx, k in enumerate(trace.ks):
        cells = [str(int(k))]
        for series in (trace.U, trace.V, trace.R, trace.node_err_max):
            cells.append("" if series is None else _fmt(series[idx]))
        cells.append(lam_s)
        cells.append(seed_s)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def aggregate_csv_text(agg: AggregateTrace) -> str:
    """One row per recorded k: ``k,U_mean,V_mean,R_mean,reps`` (blank = absent)."""
    lines = [AGGREGATE_COLUMNS]
    for idx, k in enumerate(agg.ks):
        cells = [str(int(k))]
        for series in (agg.U_mean, agg.V_mean, agg.R_mean):
            cells.append("" if series is None else _fmt(series[idx]))
        cells.append(str(agg.reps))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: RunTrace, path) -> None:
    Path(path).write_text(trace_csv_text(trace))


def write_aggregate_csv(agg: AggregateTrace, path) -> None:
    Path(path).write_text(aggregate_csv_text(agg))
