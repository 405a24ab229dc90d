"""First-order oracles: median-of-values, streaming ridge regression, quadratics.

An :class:`Objective` bundles per-node exact (sub)gradients, noisy sampled
gradients, the optimum when it has a closed form, and the curvature/noise
constants (mu, L, sigma). ``mu = 0`` or ``L = inf`` marks that the smooth
strongly convex assumptions do not hold (e.g. the median objective).

The ``*_block`` variants evaluate all n nodes in one vectorized call; they are
the code path the step functions use. Draw order inside a block call is fixed
(documented per objective) so runs are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .rng import make_rng

# Second moment of each coordinate of u ~ Uniform[-1, 1]^d: E[u u^T] = (1/3) I.
U_SECOND_MOMENT = 1.0 / 3.0

# The declared ridge noise bound sigma is valid for iterates with
# ||z||_inf <= RIDGE_SIGMA_BOX (the noise grows with ||z||, so no global
# bound exists for this objective).
RIDGE_SIGMA_BOX = 20.0


@dataclass(frozen=True)
class Objective:
    """First-order oracle bundle for n local functions on R^d."""

    d: int
    n: int
    mu: float
    smoothness: float
    sigma: float
    optimum: Optional[np.ndarray]
    exact_grad: Callable[[int, np.ndarray], np.ndarray]
    exact_grad_block: Callable[[np.ndarray], np.ndarray]
    sample_grad: Callable[[int, np.ndarray, np.random.Generator], np.ndarray]
    sample_grad_block: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    name: str = "custom"


def mean_gradient(obj: Objective, z: np.ndarray) -> np.ndarray:
    """Gradient of the average objective f = (1/n) sum_i f_i at a common point."""
    z = np.asarray(z, dtype=float)
    block = obj.exact_grad_block(np.broadcast_to(z, (obj.n, obj.d)))
    return block.mean(axis=0)


# ---------------------------------------------------------------------------
# Median of a collection of values (nonsmooth, exact subgradients)
# ---------------------------------------------------------------------------

def evenly_spaced_values(n: int, lo: float = -10.0, hi: float = 10.0) -> np.ndarray:
    """Deterministic grid lo = m_1 < ... < m_n = hi."""
    if n < 1:
        raise ValueError(f"need at least one value, got n={n}")
    return np.linspace(lo, hi, n)


def median_objective(m) -> Objective:
    """f_i(z) = |z - m_i| on R^1; subgradient sign(z - m_i) with sign(0) = 0.

    The sampled gradient equals the exact subgradient (no noise); the optimum
    is the midpoint of the two middle values when n is even.
    """
    m = np.asarray(m, dtype=float).ravel()
    if m.size == 0:
        raise ValueError("median objective needs at least one value")
    n = int(m.size)
    col = m[:, None]

    def exact(i: int, z: np.ndarray) -> np.ndarray:
        return np.sign(z - m[i])

    def exact_block(Z: np.ndarray) -> np.ndarray:
        return np.sign(Z - col)

    def sample(i: int, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.sign(z - m[i])

    def sample_block(Z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.sign(Z - col)

    return Objective(
        d=1, n=n, mu=0.0, smoothness=np.inf, sigma=0.0,
        optimum=np.array([float(np.median(m))]),
        exact_grad=exact, exact_grad_block=exact_block,
        sample_grad=sample, sample_grad_block=sample_block,
        name="median",
    )


# ---------------------------------------------------------------------------
# Streaming ridge regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RidgeParams:
    """Per-agent true parameters and noise level for the streaming ridge problem.

    Agent i observes pairs (u, v) with u ~ Uniform[-1, 1]^d and
    v = u . z_tilde_i + eps, eps ~ Normal(0, noise_std^2).
    """

    d: int
    n: int
    rho: float
    z_tilde: np.ndarray
    noise_std: float = 1.0

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise ValueError(f"penalty rho must be positive, got {self.rho}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be nonnegative, got {self.noise_std}")
        zt = np.asarray(self.z_tilde, dtype=float)
        if zt.shape != (self.n, self.d):
            raise ValueError(
                f"z_tilde has shape {zt.shape}, expected ({self.n}, {self.d})"
            )
        object.__setattr__(self, "z_tilde", zt)


def make_ridge_params(
    n: int,
    d: int,
    rho: float,
    ztilde_range: tuple[float, float] = (0.0, 10.0),
    noise_std: float = 1.0,
    seed: int = 0,
    ztilde_mode: str = "random",
) -> RidgeParams:
    """Draw (or evenly place) the per-agent true parameters in the given range.

    ``random`` draws each coordinate uniformly; ``even`` gives agent i the
    constant vector at position i of an even spread across the range.
    """
    lo, hi = float(ztilde_range[0]), float(ztilde_range[1])
    if ztilde_mode == "random":
        zt = make_rng(seed).uniform(lo, hi, size=(n, d))
    elif ztilde_mode == "even":
        levels = np.linspace(lo, hi, n) if n > 1 else np.array([(lo + hi) / 2.0])
        zt = np.repeat(levels[:, None], d, axis=1)
    else:
        raise ValueError(f"unknown ztilde_mode {ztilde_mode!r}")
    return RidgeParams(d=d, n=n, rho=rho, z_tilde=zt, noise_std=noise_std)


def ridge_noise_second_moment(w_sq: float, d: int, noise_std: float) -> float:
    """Exact E||g - grad f||^2 at offset w = z - z_tilde_i with ||w||^2 = w_sq.

    Follows from the moments of u ~ Uniform[-1,1]^d (E u^2 = 1/3, E u^4 = 1/5);
    the moment depends on w only through its squared norm.
    """
    return w_sq * (4.0 / 5.0 + (4.0 * d - 8.0) / 9.0) + (4.0 * d / 3.0) * noise_std**2


def ridge_noise_bound(p: RidgeParams, box: float = RIDGE_SIGMA_BOX) -> float:
    """Supremum of the per-sample noise second moment over ||z||_inf <= box."""
    corner = np.maximum(np.abs(-box - p.z_tilde), np.abs(box - p.z_tilde))
    w_sq = float((corner**2).sum(axis=1).max())
    return ridge_noise_second_moment(w_sq, p.d, p.noise_std)


def ridge_optimum(p: RidgeParams) -> np.ndarray:
    """Unique minimizer of the summed ridge objective, via the general linear solve.

    Solves (sum_i E[u_i u_i^T] + n rho I) z = sum_i E[u_i u_i^T] z_tilde_i,
    which for uniform features reduces to (1/3)/((1/3)+rho) * mean(z_tilde).
    """
    eye = np.eye(p.d)
    h = np.zeros((p.d, p.d))
    rhs = np.zeros(p.d)
    for i in range(p.n):
        h += U_SECOND_MOMENT * eye
        rhs += U_SECOND_MOMENT * eye @ p.z_tilde[i]
    h += p.n * p.rho * eye
    try:
        return np.linalg.solve(h, rhs)
    except np.linalg.LinAlgError as exc:  # unreachable for rho > 0; guard anyway
        raise ValueError(f"singular ridge system: {exc}") from exc


def ridge_objective(p: RidgeParams) -> Objective:
    """Streaming ridge oracle: g_i(z; u, v) = 2(u.z - v)u + 2 rho z (unbiased).

    Exact gradients use the analytic feature covariance (1/3)I. The declared
    sigma is a conservative bound on the sample-noise second moment, valid for
    ||z||_inf <= RIDGE_SIGMA_BOX (the noise grows with ||z||).

    Block draw order per call: one (n, d) uniform feature block, then one
    (n,) normal response-noise block.
    """
    zt = p.z_tilde
    two_rho = 2.0 * p.rho
    curvature = 2.0 * (U_SECOND_MOMENT + p.rho)

    def exact(i: int, z: np.ndarray) -> np.ndarray:
        return 2.0 * U_SECOND_MOMENT * (z - zt[i]) + two_rho * z

    def exact_block(Z: np.ndarray) -> np.ndarray:
        return 2.0 * U_SECOND_MOMENT * (Z - zt) + two_rho * Z

    def sample(i: int, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.uniform(-1.0, 1.0, size=p.d)
        eps = rng.normal(0.0, p.noise_std)
        v = u @ zt[i] + eps
        return 2.0 * (u @ z - v) * u + two_rho * z

    def sample_block(Z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.uniform(-1.0, 1.0, size=(p.n, p.d))
        eps = rng.normal(0.0, p.noise_std, size=p.n)
        v = (u * zt).sum(axis=1) + eps
        resid = (u * Z).sum(axis=1) - v
        return 2.0 * resid[:, None] * u + two_rho * Z

    sigma = float(np.sqrt(1.05 * ridge_noise_bound(p)))
    return Objective(
        d=p.d, n=p.n, mu=curvature, smoothness=curvature, sigma=sigma,
        optimum=ridge_optimum(p),
        exact_grad=exact, exact_grad_block=exact_block,
        sample_grad=sample, sample_grad_block=sample_block,
        name="ridge",
    )


# ---------------------------------------------------------------------------
# Synthetic strongly convex quadratics (controlled test fixture)
# ---------------------------------------------------------------------------

def quadratic_from(A: np.ndarray, b: np.ndarray, noise_sigma: float = 0.0,
                   mu: float | None = None, smoothness: float | None = None) -> Objective:
    """f_i(z) = 0.5 (z - b_i)^T A_i (z - b_i) with explicit SPD matrices.

    The sampled gradient adds isotropic Gaussian noise with
    E||noise||^2 = noise_sigma^2 exactly. Block draw order: one (n, d) normal
    block per call.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n, d = b.shape
    if A.shape != (n, d, d):
        raise ValueError(f"A has shape {A.shape}, expected ({n}, {d}, {d})")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be nonnegative, got {noise_sigma}")
    if mu is None or smoothness is None:
        eigs = np.concatenate([np.linalg.eigvalsh(A[i]) for i in range(n)])
        mu = float(eigs.min()) if mu is None else mu
        smoothness = float(eigs.max()) if smoothness is None else smoothness
    if mu <= 0:
        raise ValueError(f"local Hessians must be positive definite (min eigenvalue {mu})")
    coord_std = noise_sigma / np.sqrt(d)
    optimum = np.linalg.solve(A.sum(axis=0), np.einsum("nij,nj->i", A, b))

    def exact(i: int, z: np.ndarray) -> np.ndarray:
        return A[i] @ (z - b[i])

    def exact_block(Z: np.ndarray) -> np.ndarray:
        return np.einsum("nij,nj->ni", A, Z - b)

    def sample(i: int, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return A[i] @ (z - b[i]) + rng.normal(0.0, coord_std, size=d)

    def sample_block(Z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.einsum("nij,nj->ni", A, Z - b) + rng.normal(0.0, coord_std, size=(n, d))

    return Objective(
        d=d, n=n, mu=float(mu), smoothness=float(smoothness), sigma=float(noise_sigma),
        optimum=optimum,
        exact_grad=exact, exact_grad_block=exact_block,
        sample_grad=sample, sample_grad_block=sample_block,
        name="quadratic",
    )


def quadratic_objective(d: int, n: int, seed: int, mu_target: float,
                        L_target: float, noise_sigma: float = 1.0) -> Objective:
    """Random quadratic instance with per-node Hessian eigenvalues in [mu, L].

    Each A_i is a random rotation of diag(linspace(mu, L, d)), so the declared
    constants are exact (for d = 1 the single eigenvalue is mu, and L remains
    a valid upper bound).
    """
    if not 0 < mu_target <= L_target:
        raise ValueError(f"need 0 < mu_target <= L_target, got {mu_target}, {L_target}")
    rng = make_rng(seed)
    spectrum = np.linspace(mu_target, L_target, d)
    A = np.empty((n, d, d))
    for i in range(n):
        q, r = np.linalg.qr(rng.normal(size=(d, d)))
        q = q * np.sign(np.diag(r))
        ai = (q * spectrum) @ q.T
        A[i] = (ai + ai.T) / 2.0  # exact symmetry
    b = rng.normal(0.0, 1.0, size=(n, d))
    return quadratic_from(A, b, noise_sigma=noise_sigma,
                          mu=mu_target, smoothness=L_target)
