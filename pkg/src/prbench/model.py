"""Gaussian sensing model: ensembles, observations, ground truth, distance.

The recovery target is identifiable only up to sign, so all error
measurements go through :func:`dist`, which minimizes over the two signs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng

_SPHERE_STREAM = rng.label_stream("unit-sphere")


@dataclass(frozen=True)
class SensingEnsemble:
    """m Gaussian sensing rows of length n, regenerable from (seed, m, n)."""

    rows: np.ndarray
    m: int
    n: int
    seed: int


@dataclass(frozen=True)
class GroundTruth:
    x_star: np.ndarray
    norm: float

    def __post_init__(self):
        actual = float(np.linalg.norm(self.x_star))
        if not np.isfinite(actual):
            raise ValueError("ground truth vector must be finite")
        if abs(self.norm - actual) > 1e-12 * max(actual, 1.0):
            raise ValueError("norm field disagrees with the vector norm")


@dataclass(frozen=True)
class Observations:
    """Nonnegative squared projections y_i = (a_i . x_star)^2."""

    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y)
        if y.ndim != 1 or not np.all(np.isfinite(y)) or np.any(y < 0):
            raise ValueError("observations must be a finite nonnegative vector")


def sample_ensemble(m: int, n: int, seed: int) -> SensingEnsemble:
    """Draw an m x n standard normal ensemble; row i uses stream (seed, i)."""
    if m < 1 or n < 1:
        raise ValueError(f"ensemble dimensions must be positive, got m={m}, n={n}")
    rows = rng.normal_rows(seed, m, n)
    rows.setflags(write=False)
    return SensingEnsemble(rows=rows, m=m, n=n, seed=seed)


def ground_truth(x_star) -> GroundTruth:
    x_star = np.asarray(x_star, dtype=float).copy()
    x_star.setflags(write=False)
    return GroundTruth(x_star=x_star, norm=float(np.linalg.norm(x_star)))


def random_ground_truth(n: int, seed: int) -> GroundTruth:
    """Unit-norm target drawn uniformly from the sphere."""
    return ground_truth(sample_unit_sphere(n, seed))


def sample_unit_sphere(n: int, seed: int) -> np.ndarray:
    """Uniform draw from the unit sphere: a normalized Gaussian vector."""
    if n < 1:
        raise ValueError("dimension must be positive")
    v = rng.normals(seed, _SPHERE_STREAM, n)
    return v / np.linalg.norm(v)


def observe(ens: SensingEnsemble, gt: GroundTruth) -> Observations:
    """Exact noiseless observations y_i = (a_i . x_star)^2."""
    if ens.n != gt.x_star.shape[0]:
        raise ValueError(
            f"dimension mismatch: ensemble n={ens.n}, ground truth n={gt.x_star.shape[0]}"
        )
    proj = ens.rows @ gt.x_star
    y = proj * proj
    y.setflags(write=False)
    return Observations(y=y)


def dist(x, x_star) -> float:
    """Sign-invariant distance min(||x - x_star||, ||x + x_star||)."""
    x = np.asarray(x, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    if x.shape != x_star.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x_star.shape}")
    return float(min(np.linalg.norm(x - x_star), np.linalg.norm(x + x_star)))


def align_sign(x, x_star) -> float:
    """Sign s in {+1, -1} minimizing ||x - s*x_star||, ties to +1."""
    x = np.asarray(x, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    if np.linalg.norm(x - x_star) <= np.linalg.norm(x + x_star):
        return 1.0
    return -1.0
