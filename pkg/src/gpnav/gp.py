"""Zero-mean Gaussian process regression with a squared-exponential kernel.

Provides model construction through a Cholesky factorization plus the
closed-form kernel derivatives (spatial, and along training-point motion)
that the barrier synthesis needs. All query operations are pure and
read-only on an immutable model, so they are safe to evaluate concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve


class FactorizationFailure(Exception):
    """Covariance factorization hit a non-positive pivot.

    Usually signals duplicate or near-duplicate training points; the caller
    should downsample and retry.
    """


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential kernel hyperparameters.

    length_scale is in meters. jitter is a dimensionless diagonal
    regularizer added to the covariance matrix before factorization;
    grid-sampled obstacle boundaries produce highly correlated rows and a
    small jitter keeps the factorization stable without visibly perturbing
    interpolation (error at a training point is exactly jitter * alpha_j).
    """

    length_scale: float = 0.9
    jitter: float = 1e-8

    def __post_init__(self) -> None:
        if self.length_scale <= 0.0:
            raise ValueError("length_scale must be > 0")
        if self.jitter < 0.0:
            raise ValueError("jitter must be >= 0")


def kernel_eval(p, q, params: KernelParams) -> float:
    """SE kernel exp(-||p-q||^2 / (2 l^2)). Symmetric, 1 iff p == q."""
    diff = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    return float(np.exp(-(diff @ diff) / (2.0 * params.length_scale**2)))


@dataclass(frozen=True)
class GpModel:
    """Fitted GP over 2D obstacle points with unit labels.

    chol_lower is the lower-triangular factor of cov + jitter*I and alpha
    solves (cov + jitter*I) alpha = labels, so every formula written with an
    explicit matrix inverse is evaluated through triangular solves instead.
    """

    points: np.ndarray      # (N, 2) training inputs, global frame, meters
    labels: np.ndarray      # (N,)
    params: KernelParams
    cov: np.ndarray         # (N, N) kernel matrix, jitter excluded
    chol_lower: np.ndarray  # (N, N) lower factor of cov + jitter*I
    alpha: np.ndarray       # (N,) weight vector

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def kernel_vector(self, query) -> np.ndarray:
        """Covariance vector between a 2D query point and the training set."""
        diff = self.points - np.asarray(query, dtype=float)
        sq = np.einsum("ij,ij->i", diff, diff)
        return np.exp(-sq / (2.0 * self.params.length_scale**2))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve (cov + jitter*I) x = rhs via the stored factor."""
        return cho_solve((self.chol_lower, True), rhs)


def build_model(points, labels=None, params: KernelParams | None = None) -> GpModel:
    """Factorize the covariance of the point set and precompute the weights.

    labels default to all ones. Raises FactorizationFailure when the jittered
    covariance is not positive definite (duplicate points with zero jitter).
    """
    params = params or KernelParams()
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if n < 1 or pts.shape[1] != 2:
        raise ValueError("points must be a non-empty (N, 2) array")
    if labels is None:
        y = np.ones(n)
    else:
        y = np.asarray(labels, dtype=float).reshape(-1)
        if y.shape[0] != n:
            raise ValueError("labels length must match point count")

    diff = pts[:, None, :] - pts[None, :, :]
    cov = np.exp(-np.einsum("ijk,ijk->ij", diff, diff) / (2.0 * params.length_scale**2))
    try:
        factor, _ = cho_factor(cov + params.jitter * np.eye(n), lower=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationFailure(
            f"covariance of {n} points is not positive definite "
            "(duplicate or near-duplicate points; downsample the input)"
        ) from exc
    chol_lower = np.tril(factor)
    alpha = cho_solve((chol_lower, True), y)
    return GpModel(points=pts, labels=y, params=params, cov=cov,
                   chol_lower=chol_lower, alpha=alpha)


def predictive_mean(model: GpModel, query) -> float:
    """Posterior mean k~(query)^T alpha at a 2D query point."""
    return float(model.kernel_vector(query) @ model.alpha)


def predictive_variance(model: GpModel, query) -> float:
    """Posterior variance k(q,q) - k~^T (K + jitter I)^-1 k~, clamped at 0."""
    kv = model.kernel_vector(query)
    var = 1.0 - float(kv @ model.solve(kv))
    return max(var, 0.0)


def mean_gradient(model: GpModel, query) -> np.ndarray:
    """Gradient of the posterior mean w.r.t. the query point, shape (2,).

    Row i of dk~/dq is -(1/l^2) k(q, d_i) (q - d_i)^T, contracted with alpha.
    """
    q = np.asarray(query, dtype=float)
    kv = model.kernel_vector(q)
    diff = q[None, :] - model.points
    return -((model.alpha * kv) @ diff) / model.params.length_scale**2


def cov_matrix_time_derivative(model: GpModel, velocities) -> np.ndarray:
    """Rate of change of the covariance matrix as the points move.

    Entry (i, j) is -(1/l^2) K_ij (d_i - d_j)^T (v_i - v_j); any rigid
    translation of the point set therefore yields an exactly zero matrix.
    """
    v = _check_velocities(model, velocities)
    dpos = model.points[:, None, :] - model.points[None, :, :]
    dvel = v[:, None, :] - v[None, :, :]
    return -(model.cov * np.einsum("ijk,ijk->ij", dpos, dvel)) / model.params.length_scale**2


def query_cov_time_derivative(model: GpModel, query, velocities) -> np.ndarray:
    """Rate of change of the covariance vector as the points move, shape (N,).

    Entry r is (1/l^2) k(q, d_r) (q - d_r)^T v_r.
    """
    v = _check_velocities(model, velocities)
    q = np.asarray(query, dtype=float)
    kv = model.kernel_vector(q)
    diff = q[None, :] - model.points
    return kv * np.einsum("ij,ij->i", diff, v) / model.params.length_scale**2


def _check_velocities(model: GpModel, velocities) -> np.ndarray:
    v = np.atleast_2d(np.asarray(velocities, dtype=float))
    if v.shape != model.points.shape:
        raise ValueError(f"velocities shape {v.shape} does not match "
                         f"training points {model.points.shape}")
    return v
