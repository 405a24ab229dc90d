"""Symmetric doubly stochastic mixing matrices and their spectral diagnostics.

One multiplication by the matrix is one round of neighbor averaging. The
cached quantity ``lam`` = max(|second-largest eigenvalue|, |smallest
eigenvalue|) controls how fast disagreement between nodes contracts per
round; ``1 - lam`` is the spectral gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, degrees, is_connected


@dataclass(frozen=True)
class MixingMatrix:
    """Dense symmetric doubly stochastic weight matrix with cached spectral quantity."""

    w: np.ndarray
    rule: str
    lam: float

    @property
    def n(self) -> int:
        return self.w.shape[0]


def _require_connected(g: Graph, rule: str) -> None:
    if not is_connected(g):
        raise ValueError(f"{rule} weights require a connected graph")


def _neighbor_weights(g: Graph, denom) -> np.ndarray:
    deg = degrees(g)
    w = np.zeros((g.n, g.n))
    for i, j in g.edges:
        v = 1.0 / denom(int(deg[i]), int(deg[j]))
        w[i, j] = v
        w[j, i] = v
    # complementary diagonal makes every row sum exactly 1
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    w.setflags(write=False)
    return w


def metropolis(g: Graph) -> MixingMatrix:
    """w_ij = 1 / (1 + max(deg_i, deg_j)) on edges, complementary diagonal."""
    _require_connected(g, "metropolis")
    w = _neighbor_weights(g, lambda a, b: 1.0 + max(a, b))
    return MixingMatrix(w, "metropolis", spectral_lambda(w))


def lazy_metropolis(g: Graph) -> MixingMatrix:
    """w_ij = 1 / (2 max(deg_i, deg_j)) on edges; all diagonal entries end up >= 1/2."""
    _require_connected(g, "lazy_metropolis")
    w = _neighbor_weights(g, lambda a, b: 2.0 * max(a, b))
    return MixingMatrix(w, "lazy_metropolis", spectral_lambda(w))


def from_matrix(w, rule: str = "custom", graph: Graph | None = None) -> MixingMatrix:
    """Wrap an explicit weight matrix, rejecting it if any invariant fails."""
    w = np.array(w, dtype=float)
    problems = validate(w, graph)
    if problems:
        raise ValueError("invalid mixing matrix: " + "; ".join(problems))
    w.setflags(write=False)
    return MixingMatrix(w, rule, spectral_lambda(w))


def spectral_lambda(w) -> float:
    """max(|lambda_2|, |lambda_n|) over the eigenvalues 1 = lambda_1 >= ... >= lambda_n.

    Computed with a dense symmetric eigensolver. Returns 0 for n = 1 (a single
    node is already at consensus).
    """
    a = w.w if isinstance(w, MixingMatrix) else np.asarray(w, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if a.shape[0] == 1:
        return 0.0
    vals = np.linalg.eigvalsh(a)  # ascending
    return float(max(abs(vals[0]), abs(vals[-2])))


_STOCHASTIC_TOL = 1e-12


def validate(w, graph: Graph | None = None) -> list[str]:
    """Report-style check of every mixing-matrix invariant; empty list means valid.

    Accepts a raw array or a MixingMatrix. When ``graph`` is given, also checks
    the sparsity pattern and (for connected graphs) that the spectral quantity
    is strictly below 1.
    """
    a = w.w if isinstance(w, MixingMatrix) else np.asarray(w, dtype=float)
    problems: list[str] = []
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return [f"matrix is not square (shape {a.shape})"]
    n = a.shape[0]
    if graph is not None and graph.n != n:
        return [f"matrix has n={n} but graph has n={graph.n}"]
    if not np.array_equal(a, a.T):
        problems.append("symmetry violated (w[i,j] != w[j,i] for some pair)")
    if (a < 0).any():
        i, j = np.argwhere(a < 0)[0]
        problems.append(f"nonnegativity violated (w[{i},{j}] = {a[i, j]})")
    rows = a.sum(axis=1)
    bad = np.abs(rows - 1.0) > _STOCHASTIC_TOL
    if bad.any():
        i = int(np.argmax(bad))
        problems.append(f"row-stochasticity violated (row {i} sums to {rows[i]:.12g})")
    cols = a.sum(axis=0)
    bad = np.abs(cols - 1.0) > _STOCHASTIC_TOL
    if bad.any():
        j = int(np.argmax(bad))
        problems.append(f"column-stochasticity violated (column {j} sums to {cols[j]:.12g})")
    if not (np.diag(a) > 0).any():
        problems.append("no strictly positive diagonal entry")
    if graph is not None:
        allowed = np.zeros((n, n), dtype=bool)
        for i, j in graph.edges:
            allowed[i, j] = True
            allowed[j, i] = True
        np.fill_diagonal(allowed, True)
        offenders = (a > 0) & ~allowed
        if offenders.any():
            i, j = np.argwhere(offenders)[0]
            problems.append(
                f"sparsity-pattern violated (w[{i},{j}] > 0 but ({i},{j}) is not an edge)"
            )
        if not problems and is_connected(graph) and spectral_lambda(a) >= 1.0:
            problems.append("spectral quantity is not below 1 on a connected graph")
    return problems


def mix(w: MixingMatrix, Z: np.ndarray) -> np.ndarray:
    """One averaging round: returns W @ Z (row i becomes i's weighted neighborhood mean)."""
    Z = np.asarray(Z, dtype=float)
    if Z.shape[0] != w.n:
        raise ValueError(f"iterate block has {Z.shape[0]} rows but mixing matrix has n={w.n}")
    return w.w @ Z
