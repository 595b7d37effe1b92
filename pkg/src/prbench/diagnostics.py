"""Runtime diagnostics: leave-one-out sequences, the convex-quadratic rate
oracle, and Gaussian concentration checks.

The leave-one-out sequence for row l runs the same method on the cost with
measurement l removed (normalization keeps the original 1/4m), from the
same initial point.  Row l of the ensemble is structurally excluded from
every gradient evaluation of sequence l, which is what makes the sequence
independent of that row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError
from .model import GroundTruth, SensingEnsemble
from .ric import RicConfig
from .solvers import Method, SolverParams, momentum_step, run


@dataclass(frozen=True)
class LooBundle:
    """Per-sequence summaries of the m leave-one-out runs.

    `dist_main[l, t]` is ||x^t - x^{t,(l)}||, `dist_star[l, t]` is
    ||x^{t,(l)} - s x_star|| with the main run's sign alignment, and
    `proximity[t]` is the max over l of the stacked-pair norm
    ||(x^t - x^{t,(l)}, x^{t-1} - x^{t-1,(l)})||.  Full iterate sequences
    are retained only on request (they are large).
    """

    dist_main: np.ndarray
    dist_star: np.ndarray
    proximity: np.ndarray
    threshold: float
    within_threshold: bool
    sequences: np.ndarray | None = None


def loo_threshold(n: int, cfg: RicConfig) -> float:
    return cfg.c3 * math.sqrt(math.log(n) / n)


def loo_sequence(
    ens: SensingEnsemble, y, x0, params: SolverParams, ell: int, steps: int
) -> np.ndarray:
    """Iterates of the leave-row-ell sequence, shape (steps + 1, n).

    Row ell is removed from the working arrays before any arithmetic, so it
    is never read; the cost normalization keeps the original 1/m.  The
    sequence runs exactly `steps` steps with no stopping rule.
    """
    y = np.asarray(y, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if not 0 <= ell < ens.m:
        raise ValueError(f"row index {ell} outside [0, {ens.m})")
    rows_l = np.delete(ens.rows, ell, axis=0)
    y_l = np.delete(y, ell)
    m = ens.m

    def grad_fn(x):
        p = rows_l @ x
        return rows_l.T @ ((p * p - y_l) * p) / m

    out = np.empty((steps + 1, ens.n))
    out[0] = x0
    x_prev = x0
    x_curr = x0
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, steps + 1):
            x_new = momentum_step(
                params.method, x_curr, x_prev, grad_fn, params.eta, params.beta
            )
            x_prev, x_curr = x_curr, x_new
            out[t] = x_curr
    return out


def loo_run(
    ens: SensingEnsemble,
    y,
    x0,
    params: SolverParams,
    gt: GroundTruth,
    cfg: RicConfig | None = None,
    budget_m: int = 256,
    budget_iters: int = 500,
    retain_sequences: bool = False,
) -> LooBundle:
    """Run the m leave-one-out sequences next to the main sequence.

    The main run fixes the step count T; every sequence iterates exactly T
    steps so the pairwise distances are time-aligned.  Budget limits guard
    the O(m^2 n T) cost.
    """
    if cfg is None:
        cfg = RicConfig()
    y = np.asarray(y, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if ens.m > budget_m:
        raise CapabilityError(f"leave-one-out budget allows m <= {budget_m}, got {ens.m}")
    if params.max_iters > budget_iters:
        raise CapabilityError(
            f"leave-one-out budget allows max_iters <= {budget_iters}, "
            f"got {params.max_iters}"
        )

    main = run(ens, y, x0, params, gt=gt, ric=cfg, keep_history=True)
    history = main.history
    steps = history.shape[0] - 1
    target = main.sign * gt.x_star

    m = ens.m
    dist_main = np.zeros((m, steps + 1))
    dist_star = np.zeros((m, steps + 1))
    sequences = np.zeros((m, steps + 1, ens.n)) if retain_sequences else None

    for ell in range(m):
        seq = loo_sequence(ens, y, x0, params, ell, steps)
        dist_main[ell] = np.linalg.norm(history - seq, axis=1)
        dist_star[ell] = np.linalg.norm(seq - target, axis=1)
        if retain_sequences:
            sequences[ell] = seq

    proximity = np.zeros(steps + 1)
    if steps >= 1:
        proximity[1:] = np.hypot(dist_main[:, 1:], dist_main[:, :-1]).max(axis=0)
    threshold = loo_threshold(ens.n, cfg)
    within = bool(np.all(proximity <= threshold))
    return LooBundle(
        dist_main=dist_main,
        dist_star=dist_star,
        proximity=proximity,
        threshold=threshold,
        within_threshold=within,
        sequences=sequences,
    )


def quadratic_parameters(mu: float, L: float, method: Method) -> tuple[float, float]:
    """(eta, beta) for the two-dimensional quadratic benchmark.

    GD uses 1/L.  Heavy ball uses the critically damped pairing
    eta = 4/(sqrt(mu)+sqrt(L))^2, beta = ((sqrt(L)-sqrt(mu))/(sqrt(L)+sqrt(mu)))^2,
    which realizes the (sqrt(kappa)-1)/(sqrt(kappa)+1) contraction.
    Nesterov uses eta = 1/L and beta = (sqrt(kappa)-1)/(sqrt(kappa)+1).
    """
    method = Method(method)
    if method is Method.GD:
        return 1.0 / L, 0.0
    root = (math.sqrt(L) - math.sqrt(mu)) / (math.sqrt(L) + math.sqrt(mu))
    if method is Method.POLYAK:
        return 4.0 / (math.sqrt(mu) + math.sqrt(L)) ** 2, root * root
    return 1.0 / L, root


def quadratic_oracle(mu: float, L: float, method: Method, steps: int = 10_000) -> float:
    """Measured asymptotic paired-norm contraction on f = (mu x1^2 + L x2^2)/2.

    Iterates from (1, 1) with the benchmark parameters and returns the
    geometric mean of the per-step stacked-pair norm ratios over the last
    half of the run.  The dynamics are linear, so the pair is renormalized
    each step to dodge underflow; exact convergence reports 0.
    """
    if not 0 < mu <= L:
        raise ValueError("need 0 < mu <= L")
    if steps < 2:
        raise ValueError("need at least two steps")
    eta, beta = quadratic_parameters(mu, L, method)
    method = Method(method)
    scales = np.array([mu, L])
    grad_fn = lambda x: scales * x
    x_prev = np.array([1.0, 1.0])
    x_curr = np.array([1.0, 1.0])
    pair_norm = math.hypot(np.linalg.norm(x_curr), np.linalg.norm(x_prev))
    log_ratios = []
    for _ in range(steps):
        x_new = momentum_step(method, x_curr, x_prev, grad_fn, eta, beta)
        new_norm = math.hypot(np.linalg.norm(x_new), np.linalg.norm(x_curr))
        if new_norm == 0.0:
            log_ratios.append(-math.inf)
            x_prev, x_curr = x_curr, x_new
            continue
        log_ratios.append(math.log(new_norm / pair_norm))
        # renormalize the pair; the update is linear so this is exact
        x_prev, x_curr = x_curr / new_norm, x_new / new_norm
        pair_norm = 1.0
    tail = log_ratios[steps // 2:]
    if any(math.isinf(r) for r in tail):
        return 0.0
    return math.exp(sum(tail) / len(tail))


@dataclass(frozen=True)
class ConcentrationReport:
    max_row_norm: float
    row_norm_bound: float
    row_norm_ok: bool
    max_projection: float
    projection_bound: float
    projection_ok: bool


def concentration_report(ens: SensingEnsemble, probe) -> ConcentrationReport:
    """Row-norm and projection concentration checks.

    The probe must be independent of the ensemble (caller responsibility;
    a fresh unit-sphere draw or any fixed vector qualifies).  Rejects
    n < 3, where the 5 sqrt(log n) bound is not meaningful.
    """
    if ens.n < 3:
        raise ValueError("concentration bounds need n >= 3")
    probe = np.asarray(probe, dtype=float)
    if probe.shape != (ens.n,):
        raise ValueError(f"probe has shape {probe.shape}, expected ({ens.n},)")
    row_norms = np.linalg.norm(ens.rows, axis=1)
    max_row = float(row_norms.max())
    row_bound = math.sqrt(6.0 * ens.n)
    max_proj = float(np.max(np.abs(ens.rows @ probe)))
    proj_bound = 5.0 * math.sqrt(math.log(ens.n)) * float(np.linalg.norm(probe))
    return ConcentrationReport(
        max_row_norm=max_row,
        row_norm_bound=row_bound,
        row_norm_ok=max_row <= row_bound,
        max_projection=max_proj,
        projection_bound=proj_bound,
        projection_ok=max_proj <= proj_bound,
    )
