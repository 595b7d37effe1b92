"""Region-of-incoherence-and-contraction predicates and contraction matrices.

A point is in the RIC when it is both close to the target (locality) and
its error is not aligned with any single sensing row (incoherence).  The
contraction matrices give the one-step linear map acting on the stacked
pair of consecutive iterate errors for the two momentum methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import GroundTruth, SensingEnsemble, align_sign, dist


@dataclass(frozen=True)
class RicConfig:
    """Constants for locality (c1), incoherence (c2), leave-one-out (c3)."""

    c1: float = 0.3
    c2: float = 5.0
    c3: float = 5.0

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0 or self.c3 <= 0:
            raise ValueError("RIC constants must be positive")


def loc_radius(gt: GroundTruth, cfg: RicConfig) -> float:
    return 2.0 * cfg.c1 * gt.norm


def inc_bound(n: int, gt: GroundTruth, cfg: RicConfig) -> float:
    if n < 2:
        raise ValueError("incoherence bound needs n >= 2 (log n degenerate)")
    return cfg.c2 * math.sqrt(math.log(n)) * gt.norm


def incoherence(ens: SensingEnsemble, delta) -> float:
    """max_i |a_i . delta| over the ensemble rows."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (ens.n,):
        raise ValueError(f"delta has shape {delta.shape}, expected ({ens.n},)")
    return float(np.max(np.abs(ens.rows @ delta)))


def check_loc(x, gt: GroundTruth, cfg: RicConfig) -> bool:
    """Locality: dist(x, x_star) <= 2 c1 ||x_star|| (inclusive)."""
    return dist(x, gt.x_star) <= loc_radius(gt, cfg)


def check_inc(
    x, gt: GroundTruth, ens: SensingEnsemble, cfg: RicConfig
) -> tuple[bool, float]:
    """Incoherence of the sign-aligned error; returns (ok, max incoherence)."""
    x = np.asarray(x, dtype=float)
    bound = inc_bound(ens.n, gt, cfg)
    s = align_sign(x, gt.x_star)
    value = incoherence(ens, x - s * gt.x_star)
    return value <= bound, value


def segment_in_ric(
    x_a,
    x_b,
    gt: GroundTruth,
    ens: SensingEnsemble,
    cfg: RicConfig,
    samples: int = 16,
) -> bool:
    """Check LOC and INC at evenly spaced points of the segment [x_a, x_b].

    Both predicates are convex along a segment, so the endpoints decide;
    interior samples are belt and suspenders for logging.
    """
    if samples < 2:
        raise ValueError("need at least the two endpoint samples")
    x_a = np.asarray(x_a, dtype=float)
    x_b = np.asarray(x_b, dtype=float)
    for tau in np.linspace(0.0, 1.0, samples):
        point = (1.0 - tau) * x_a + tau * x_b
        if not check_loc(point, gt, cfg):
            return False
        ok, _ = check_inc(point, gt, ens, cfg)
        if not ok:
            return False
    return True


def contraction_matrix_hb(hess: np.ndarray, eta: float, beta: float) -> np.ndarray:
    """Heavy-ball pair map [[(1+b)I - eta*H, -b*I], [I, 0]]."""
    hess = np.asarray(hess, dtype=float)
    n = hess.shape[0]
    eye = np.eye(n)
    top = np.hstack([(1.0 + beta) * eye - eta * hess, -beta * eye])
    bottom = np.hstack([eye, np.zeros((n, n))])
    return np.vstack([top, bottom])


def contraction_matrix_nag(hess: np.ndarray, eta: float, beta: float) -> np.ndarray:
    """Nesterov pair map [[(1+b)(I - eta*H), -b(I - eta*H)], [I, 0]]."""
    hess = np.asarray(hess, dtype=float)
    n = hess.shape[0]
    eye = np.eye(n)
    shrunk = eye - eta * hess
    top = np.hstack([(1.0 + beta) * shrunk, -beta * shrunk])
    bottom = np.hstack([eye, np.zeros((n, n))])
    return np.vstack([top, bottom])


def spectral_norm(mat: np.ndarray) -> float:
    return float(np.linalg.norm(mat, 2))


def spectral_radius(mat: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(mat))))
