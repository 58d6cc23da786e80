"""Weighted least squares via orthogonal decomposition of the scaled system.

The estimator systems all carry a pair of rows weighted by a big constant
(default 1e6). Forming normal equations would square that to 1e12 and erode
double precision, so the solver works on the sqrt-weight-scaled design with
an SVD: algebraically identical to the closed form, numerically safer, and
rank-deficient systems fall out naturally as minimum-norm solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericInputError

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WlsProblem:
    """A weighted least-squares system: one row per coalition evaluation."""

    design: np.ndarray
    weights: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        design = np.asarray(self.design, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "targets", targets)
        if design.ndim != 2:
            raise ValueError("design must be a 2-d matrix")
        n = design.shape[0]
        if weights.shape != (n,) or targets.shape != (n,):
            raise ValueError(
                "design rows, weights and targets must agree: "
                f"{design.shape[0]} rows, {weights.shape} weights, "
                f"{targets.shape} targets"
            )
        if not (
            np.all(np.isfinite(design))
            and np.all(np.isfinite(weights))
            and np.all(np.isfinite(targets))
        ):
            raise NumericInputError("WLS inputs must be finite")
        if np.any(weights <= 0):
            raise ValueError("all weights must be positive")


@dataclass(frozen=True, eq=False)
class WlsSolution:
    params: np.ndarray
    residual_norm: float
    rank: int
    condition_estimate: float


def _scaled_svd(problem: WlsProblem, rank_tol: float):
    sqrt_w = np.sqrt(problem.weights)
    scaled = problem.design * sqrt_w[:, None]
    u, s, vt = np.linalg.svd(scaled, full_matrices=False)
    if s.size == 0:
        raise ValueError("empty system")
    col_norms = np.linalg.norm(scaled, axis=0)
    cutoff = rank_tol * float(np.max(col_norms)) if col_norms.size else 0.0
    keep = s > cutoff
    rank = int(np.count_nonzero(keep))
    if rank > 0:
        cond = float(s[0] / s[keep][-1])
    else:
        cond = float("inf")
    return sqrt_w, u, s, vt, keep, rank, cond


def solve_weighted_ls(
    problem: WlsProblem, rank_tol: float = DEFAULT_RANK_TOL
) -> WlsSolution:
    """Minimize the weighted squared residual; minimum-norm on rank deficiency."""
    sqrt_w, u, s, vt, keep, rank, cond = _scaled_svd(problem, rank_tol)
    scaled_targets = problem.targets * sqrt_w
    coeffs = u.T @ scaled_targets
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    params = vt.T @ (inv_s * coeffs)
    residual = scaled_targets - (problem.design * sqrt_w[:, None]) @ params
    return WlsSolution(
        params=params,
        residual_norm=float(np.linalg.norm(residual)),
        rank=rank,
        condition_estimate=cond,
    )


def weighted_pseudoinverse(
    design: np.ndarray, weights: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL
) -> tuple[np.ndarray, int]:
    """Matrix S with S @ targets == solve_weighted_ls(...).params, plus rank.

    Shares the SVD code path with the solver, so applying the cached matrix
    reproduces a direct solve to machine precision. This is the
    instance-independent factor reused across explanations.
    """
    problem = WlsProblem(
        design=design, weights=weights, targets=np.zeros(design.shape[0])
    )
    sqrt_w, u, s, vt, keep, rank, _ = _scaled_svd(problem, rank_tol)
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (vt.T * inv_s) @ (u.T * sqrt_w[None, :]), rank
