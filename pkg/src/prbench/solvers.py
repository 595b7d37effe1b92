"""Gradient descent, Polyak heavy ball, and Nesterov iterations.

All three methods are state machines over the pair (x^t, x^{t-1}).  The
cold-start convention sets x^1 = x^0, so the first computed update of any
method is a plain gradient step.  Error columns in a trace are measured
against s * x_star where the sign s is fixed once at t = 0; this keeps
paired norms and contraction ratios continuous along the run.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import DivergenceError
from .model import GroundTruth, SensingEnsemble, align_sign
from .objective import gradient_kernel
from .ric import RicConfig, inc_bound, loc_radius


class Method(str, enum.Enum):
    GD = "gd"
    POLYAK = "polyak"
    NESTEROV = "nesterov"


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class SolverParams:
    method: Method
    eta: float
    beta: float = 0.0
    max_iters: int = 10_000
    tol: float = 1e-7
    divergence_cap: float = 1e8

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("step size must be positive")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.method is Method.GD and self.beta != 0.0:
            raise ValueError("gradient descent requires beta = 0")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.tol <= 0 or self.divergence_cap <= 0:
            raise ValueError("tol and divergence_cap must be positive")


@dataclass(frozen=True)
class SolverState:
    x_curr: np.ndarray
    x_prev: np.ndarray
    t: int


@dataclass(frozen=True)
class IterationTrace:
    """One record per iterate, the initial point included.

    Row t describes x^t.  The dist, incoherence, and pair columns are
    measured against s * x_star with the sign s fixed at t = 0, which
    keeps them continuous along the run; the stopping rule instead uses
    the sign-invariant distance, so a random start that lands in the
    opposite sign basin still reports convergence (with a large dist
    column).  `paired_norm[t]` is the norm of the stacked pair
    (x^t - s x_star, x^{t-1} - s x_star) with x^{-1} taken as x^0, and
    `contraction_ratio[t]` is paired_norm[t] / paired_norm[t-1] (nan at
    t = 0).  When no ground truth was supplied the dist, incoherence, and
    pair columns are nan and the RIC flags are False.
    """

    iters: np.ndarray
    dist: np.ndarray
    cost: np.ndarray
    grad_norm: np.ndarray
    max_incoherence: np.ndarray
    loc_ok: np.ndarray
    inc_ok: np.ndarray
    paired_norm: np.ndarray
    contraction_ratio: np.ndarray
    status: Status
    sign: float
    has_gt: bool
    history: np.ndarray | None = None

    @property
    def n_steps(self) -> int:
        return int(self.iters[-1])

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def initial_state(x0) -> SolverState:
    """Cold-start state with x_curr == x_prev (the x^1 = x^0 convention)."""
    x0 = np.asarray(x0, dtype=float)
    return SolverState(x_curr=x0, x_prev=x0, t=1)


def momentum_step(
    method: Method,
    x_curr: np.ndarray,
    x_prev: np.ndarray,
    grad_fn: Callable[[np.ndarray], np.ndarray],
    eta: float,
    beta: float,
    grad_at_curr: np.ndarray | None = None,
):
    """One update of the chosen method; `grad_at_curr` avoids a recompute
    for the methods that evaluate the gradient at the current iterate."""
    if method is Method.GD:
        g = grad_fn(x_curr) if grad_at_curr is None else grad_at_curr
        return x_curr - eta * g
    mom = beta * (x_curr - x_prev)
    if method is Method.POLYAK:
        g = grad_fn(x_curr) if grad_at_curr is None else grad_at_curr
        return x_curr - eta * g + mom
    return x_curr - eta * grad_fn(x_curr + mom) + mom


def _checked_step(state, ens, y, eta, beta, method) -> SolverState:
    y = np.asarray(y, dtype=float)
    grad_fn = lambda x: gradient_kernel(ens.rows, y, x, ens.m)
    # overflow to inf is the divergence signal, not an anomaly
    with np.errstate(over="ignore", invalid="ignore"):
        x_new = momentum_step(method, state.x_curr, state.x_prev, grad_fn, eta, beta)
    if not np.all(np.isfinite(x_new)):
        raise DivergenceError(f"non-finite iterate at t={state.t + 1}")
    return SolverState(x_curr=x_new, x_prev=state.x_curr, t=state.t + 1)


def step_gd(state: SolverState, ens: SensingEnsemble, y, eta: float) -> SolverState:
    return _checked_step(state, ens, y, eta, 0.0, Method.GD)


def step_polyak(
    state: SolverState, ens: SensingEnsemble, y, eta: float, beta: float
) -> SolverState:
    return _checked_step(state, ens, y, eta, beta, Method.POLYAK)


def step_nesterov(
    state: SolverState, ens: SensingEnsemble, y, eta: float, beta: float
) -> SolverState:
    return _checked_step(state, ens, y, eta, beta, Method.NESTEROV)


def momentum_beta(mu: float, ell: float) -> float:
    """(sqrt(ell) - sqrt(mu)) / (sqrt(ell) + sqrt(mu)), clamped at 0."""
    value = (math.sqrt(ell) - math.sqrt(mu)) / (math.sqrt(ell) + math.sqrt(mu))
    return max(0.0, value)


def default_params(n: int, norm_x0: float, method: Method) -> SolverParams:
    """Experiment defaults: eta = 0.05 / (log(n) ||x0||^2) and the momentum
    targeting a (2, log n)-conditioned objective; beta = 0 for GD."""
    if n < 2:
        raise ValueError("defaults need n >= 2 (log n degenerate)")
    if norm_x0 <= 0:
        raise ValueError("norm_x0 must be positive")
    method = Method(method)
    ell = math.log(n)
    eta = 0.05 / ell / (norm_x0 * norm_x0)
    beta = 0.0 if method is Method.GD else momentum_beta(2.0, ell)
    return SolverParams(method=method, eta=eta, beta=beta)


def theory_params(n: int, norm_x0: float, method: Method, c: float = 1.0) -> SolverParams:
    """Rate-analysis defaults: same eta, momentum targeting (1/2, c log n)."""
    base = default_params(n, norm_x0, method)
    if base.method is Method.GD:
        return base
    return replace(base, beta=momentum_beta(0.5, c * math.log(n)))


def run(
    ens: SensingEnsemble,
    y,
    x0,
    params: SolverParams,
    gt: GroundTruth | None = None,
    ric: RicConfig | None = None,
    keep_history: bool = False,
) -> IterationTrace:
    """Drive the chosen method and record the per-iteration trace.

    Stops when dist <= tol (ground truth given) or ||grad|| <= tol
    (otherwise), when max_iters is exhausted, or on divergence (cost above
    the cap or a non-finite iterate); divergence is a status, never an
    exception.
    """
    y = np.asarray(y, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if y.shape != (ens.m,):
        raise ValueError(f"observations have shape {y.shape}, expected ({ens.m},)")
    if x0.shape != (ens.n,):
        raise ValueError(f"start point has shape {x0.shape}, expected ({ens.n},)")
    if ric is None:
        ric = RicConfig()

    rows = ens.rows
    grad_fn = lambda x: gradient_kernel(rows, y, x, ens.m)

    if gt is not None:
        if gt.x_star.shape != (ens.n,):
            raise ValueError("ground truth dimension mismatch")
        sign = align_sign(x0, gt.x_star)
        target = sign * gt.x_star
        target_proj = rows @ target
        radius = loc_radius(gt, ric)
        bound = inc_bound(ens.n, gt, ric) if ens.n >= 2 else np.inf
    else:
        sign = 1.0
        target = None

    cols = {name: [] for name in (
        "dist", "cost", "grad_norm", "max_incoherence", "loc_ok", "inc_ok",
        "paired_norm",
    )}
    history = [x0] if keep_history else None

    def record(x, x_before, proj, cost_value, grad_value):
        cols["cost"].append(cost_value)
        cols["grad_norm"].append(float(np.linalg.norm(grad_value)))
        if target is None:
            cols["dist"].append(np.nan)
            cols["max_incoherence"].append(np.nan)
            cols["loc_ok"].append(False)
            cols["inc_ok"].append(False)
            cols["paired_norm"].append(np.nan)
            return np.nan
        d = float(np.linalg.norm(x - target))
        inc = float(np.max(np.abs(proj - target_proj)))
        cols["dist"].append(d)
        cols["max_incoherence"].append(inc)
        cols["loc_ok"].append(d <= radius)
        cols["inc_ok"].append(inc <= bound)
        d_prev = float(np.linalg.norm(x_before - target))
        cols["paired_norm"].append(math.hypot(d, d_prev))
        return min(d, float(np.linalg.norm(x + target)))

    state = initial_state(x0)
    status = Status.MAX_ITERS
    t = 0
    # overflow to inf inside a diverging run is the expected signal
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            # one pass of projections feeds cost, gradient, and incoherence
            proj = rows @ state.x_curr
            resid = proj * proj - y
            cost_value = float(resid @ resid) / (4.0 * ens.m)
            grad_value = rows.T @ (resid * proj) / ens.m
            d = record(state.x_curr, state.x_prev, proj, cost_value, grad_value)
            stop_metric = d if target is not None else cols["grad_norm"][-1]
            if not math.isfinite(cost_value) or cost_value > params.divergence_cap:
                status = Status.DIVERGED
                break
            if stop_metric <= params.tol:
                status = Status.CONVERGED
                break
            if t >= params.max_iters:
                status = Status.MAX_ITERS
                break
            x_new = momentum_step(
                params.method, state.x_curr, state.x_prev, grad_fn,
                params.eta, params.beta, grad_at_curr=grad_value,
            )
            if not np.all(np.isfinite(x_new)):
                status = Status.DIVERGED
                break
            state = SolverState(x_curr=x_new, x_prev=state.x_curr, t=state.t + 1)
            if keep_history:
                history.append(x_new)
            t += 1

    paired = np.asarray(cols["paired_norm"], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.concatenate([[np.nan], paired[1:] / paired[:-1]])
    return IterationTrace(
        iters=np.arange(len(paired)),
        dist=np.asarray(cols["dist"], dtype=float),
        cost=np.asarray(cols["cost"], dtype=float),
        grad_norm=np.asarray(cols["grad_norm"], dtype=float),
        max_incoherence=np.asarray(cols["max_incoherence"], dtype=float),
        loc_ok=np.asarray(cols["loc_ok"], dtype=bool),
        inc_ok=np.asarray(cols["inc_ok"], dtype=bool),
        paired_norm=paired,
        contraction_ratio=ratio,
        status=status,
        sign=sign,
        has_gt=gt is not None,
        history=np.asarray(history) if keep_history else None,
    )
