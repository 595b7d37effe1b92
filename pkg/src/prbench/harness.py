"""Experiment harness: flat-file configuration, sweep drivers, CSV emitters.

Every output is a deterministic function of the configuration.  Floats are
written with 17 significant digits so traces round-trip exactly; booleans
are written as 1/0; terminal metadata rides in trailing `# key=value`
comment lines.
"""

from __future__ import annotations

import dataclasses
import math
import os
import statistics
import typing
from dataclasses import dataclass, fields

import numpy as np

from . import cdp as cdp_mod
from .diagnostics import concentration_report, loo_run, quadratic_oracle
from .model import observe, random_ground_truth, sample_ensemble, sample_unit_sphere
from .pgm import read_pgm, write_pgm
from .ric import RicConfig
from .solvers import (
    IterationTrace,
    Method,
    SolverParams,
    Status,
    default_params,
    run,
    theory_params,
)
from .spectral import random_init, spectral_init

EXPERIMENTS = (
    "run", "sweep", "headtohead", "slopes", "loo", "oracle", "cdp", "concentration",
)

TRACE_COLUMNS = (
    "iter", "dist", "cost", "grad_norm", "max_incoherence",
    "loc_ok", "inc_ok", "paired_norm", "contraction_ratio",
)


@dataclass
class ExperimentConfig:
    experiment: str = "run"
    n_list: tuple[int, ...] = (10,)
    m_list: tuple[int, ...] = ()  # empty: use the 10 n log n rule
    seed_list: tuple[int, ...] = (0,)
    methods: tuple[str, ...] = ("gd", "polyak", "nesterov")
    init: str = "spectral"
    eta: float | None = None
    beta: float | None = None
    tol: float = 1e-7
    max_iters: int = 10_000
    out: str = "out.csv"
    # head-to-head and slope fits
    method_a: str = "gd"
    method_b: str = "polyak"
    fit_floor: float = 0.5
    # quadratic oracle
    kappa: float = 100.0
    oracle_steps: int = 10_000
    # leave-one-out budget
    loo_budget_m: int = 256
    loo_budget_iters: int = 500
    # coded diffraction
    image: str = ""  # empty: synthetic test image
    mask_count: int = 12
    cdp_iters: int = 140
    cdp_size: int = 64
    # RIC constants
    c1: float = 0.3
    c2: float = 5.0
    c3: float = 5.0

    def ric(self) -> RicConfig:
        return RicConfig(c1=self.c1, c2=self.c2, c3=self.c3)


_LIST_FIELDS = {"n_list", "m_list", "seed_list", "methods"}
_FIELD_TYPES = typing.get_type_hints(ExperimentConfig)


def _parse_value(name: str, text: str):
    text = text.strip()
    if name in _LIST_FIELDS:
        items = [t.strip() for t in text.split(",") if t.strip()]
        if name == "methods":
            return tuple(items)
        return tuple(int(t) for t in items)
    target = _FIELD_TYPES[name]
    if target is float:
        return float(text)
    if target is int:
        return int(text)
    if target is str:
        return text
    # optional floats (eta, beta): empty means unset
    return None if text == "" else float(text)


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat key=value text; blank lines and # comments are ignored."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        kwargs[key] = _parse_value(key, value)
    cfg = ExperimentConfig(**kwargs)
    validate_config(cfg)
    return cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        if f.name in _LIST_FIELDS:
            value = ",".join(str(v) for v in value)
        lines.append(f"{f.name}={value}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def apply_overrides(cfg: ExperimentConfig, overrides: dict[str, str]) -> ExperimentConfig:
    updates = {}
    for key, value in overrides.items():
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        updates[key] = _parse_value(key, value)
    cfg = dataclasses.replace(cfg, **updates)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {cfg.experiment!r}")
    for name in ("n_list", "seed_list", "methods"):
        if not getattr(cfg, name):
            raise ValueError(f"{name} must be nonempty")
    for m in cfg.methods + (cfg.method_a, cfg.method_b):
        Method(m)
    if cfg.init not in ("spectral", "random"):
        raise ValueError(f"init must be spectral or random, got {cfg.init!r}")


def theory_m(n: int, c: float = 10.0) -> int:
    """Sample count m = round(c n log n) for the theory-regime experiments."""
    return int(round(c * n * math.log(n)))


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path, header, rows, comments=()):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
            for comment in comments:
                fh.write(f"# {comment}\n")
    except OSError as exc:
        raise OSError(f"cannot write output file {path}: {exc}") from exc


def _solver_params(cfg: ExperimentConfig, n: int, norm_x0: float, method) -> SolverParams:
    base = default_params(n, norm_x0, Method(method))
    return SolverParams(
        method=base.method,
        eta=base.eta if cfg.eta is None else cfg.eta,
        beta=base.beta if cfg.beta is None else (0.0 if base.method is Method.GD else cfg.beta),
        max_iters=cfg.max_iters,
        tol=cfg.tol,
    )


def _problem(cfg: ExperimentConfig, n: int, m: int, seed: int):
    ens = sample_ensemble(m, n, seed)
    gt = random_ground_truth(n, seed)
    obs = observe(ens, gt)
    if cfg.init == "spectral":
        x0 = spectral_init(ens, obs.y).x0
    else:
        x0 = random_init(n, seed)
    return ens, gt, obs.y, x0


def _single_run(cfg: ExperimentConfig, n: int, m: int, seed: int, method) -> IterationTrace:
    ens, gt, y, x0 = _problem(cfg, n, m, seed)
    params = _solver_params(cfg, n, float(np.linalg.norm(x0)), method)
    return run(ens, y, x0, params, gt=gt, ric=cfg.ric())


def write_trace(path: str, trace: IterationTrace) -> None:
    columns = [
        trace.iters, trace.dist, trace.cost, trace.grad_norm,
        trace.max_incoherence, trace.loc_ok, trace.inc_ok,
        trace.paired_norm, trace.contraction_ratio,
    ]
    if trace.has_gt:
        header = TRACE_COLUMNS
        rows = zip(*columns)
    else:
        keep = [0, 2, 3]
        header = tuple(TRACE_COLUMNS[i] for i in keep)
        rows = zip(*[columns[i] for i in keep])
    _write_csv(path, header, rows, comments=[f"status={trace.status.value}"])


def cmd_run(cfg: ExperimentConfig) -> int:
    n, seed, method = cfg.n_list[0], cfg.seed_list[0], cfg.methods[0]
    m = cfg.m_list[0] if cfg.m_list else theory_m(n)
    trace = _single_run(cfg, n, m, seed, method)
    write_trace(cfg.out, trace)
    return 0


def _slope_window(trace_a, trace_b, tol: float, floor: float):
    """Pairs (log dist_a(t), log dist_b(t)) over t where both are in [tol, floor]."""
    t_max = min(trace_a.dist.shape[0], trace_b.dist.shape[0])
    da, db = trace_a.dist[:t_max], trace_b.dist[:t_max]
    keep = (da >= tol) & (da <= floor) & (db >= tol) & (db <= floor)
    return np.flatnonzero(keep), np.log(da[keep]), np.log(db[keep])


def _paired_slope(log_a, log_b) -> float:
    if log_a.shape[0] < 2:
        return math.nan
    return float(np.polyfit(log_a, log_b, 1)[0])


def headtohead_slope(cfg: ExperimentConfig, n: int, m: int, seed: int):
    """Run methods a and b from the same start; returns (rows, slope, statuses).

    The accelerated arm uses the rate-analysis momentum by default, the
    `beta` override wins when given.
    """
    ens, gt, y, x0 = _problem(cfg, n, m, seed)
    norm_x0 = float(np.linalg.norm(x0))

    def params_for(method):
        method = Method(method)
        base = theory_params(n, norm_x0, method)
        eta = base.eta if cfg.eta is None else cfg.eta
        beta = base.beta if cfg.beta is None else (0.0 if method is Method.GD else cfg.beta)
        return SolverParams(method=method, eta=eta, beta=beta,
                            max_iters=cfg.max_iters, tol=cfg.tol)

    trace_a = run(ens, y, x0, params_for(cfg.method_a), gt=gt, ric=cfg.ric())
    trace_b = run(ens, y, x0, params_for(cfg.method_b), gt=gt, ric=cfg.ric())
    statuses = (trace_a.status, trace_b.status)
    if not (trace_a.converged and trace_b.converged):
        return [], math.nan, statuses
    idx, log_a, log_b = _slope_window(trace_a, trace_b, cfg.tol, cfg.fit_floor)
    rows = [(seed, int(t), la, lb) for t, la, lb in zip(idx, log_a, log_b)]
    return rows, _paired_slope(log_a, log_b), statuses


def cmd_headtohead(cfg: ExperimentConfig) -> int:
    n = cfg.n_list[0]
    m = cfg.m_list[0] if cfg.m_list else theory_m(n)
    all_rows, comments, slopes = [], [], []
    for seed in cfg.seed_list:
        rows, slope, statuses = headtohead_slope(cfg, n, m, seed)
        all_rows.extend(rows)
        comments.append(
            f"seed_{seed}: status_a={statuses[0].value} status_b={statuses[1].value}"
        )
        if math.isfinite(slope):
            comments.append(f"slope_seed_{seed}={slope:.17g}")
            slopes.append(slope)
    if slopes:
        comments.append(f"mean_slope={statistics.fmean(slopes):.17g}")
    _write_csv(cfg.out, ("seed", "iter", "log_dist_a", "log_dist_b"),
               all_rows, comments=comments)
    return 0


def cmd_slopes(cfg: ExperimentConfig) -> int:
    if len(cfg.n_list) < 3:
        raise ValueError("slope experiments need at least three n values")
    rows = []
    any_fail = False
    for idx, n in enumerate(cfg.n_list):
        m = cfg.m_list[idx] if idx < len(cfg.m_list) else theory_m(n)
        slopes = []
        for seed in cfg.seed_list:
            _, slope, _ = headtohead_slope(cfg, n, m, seed)
            if math.isfinite(slope):
                slopes.append(slope)
        mean_slope = statistics.fmean(slopes) if slopes else math.nan
        reference = math.sqrt(math.log(n))
        ok = math.isfinite(mean_slope) and abs(mean_slope - reference) <= 0.3 * reference
        any_fail = any_fail or not ok
        rows.append((n, m, len(slopes), mean_slope, reference, ok))
    _write_csv(cfg.out, ("n", "m", "seeds", "mean_slope", "sqrt_log_n", "ok"), rows)
    return 1 if any_fail else 0


def sweep_cell(cfg: ExperimentConfig, n: int, m: int, method, out_dir=None):
    """Runs for one (n, m, method) cell over all seeds; returns the summary row."""
    iters, diverged, converged = [], 0, 0
    for seed in cfg.seed_list:
        trace = _single_run(cfg, n, m, seed, method)
        if out_dir is not None:
            name = f"n{n}_m{m}_{Method(method).value}_{cfg.init}_s{seed}.csv"
            write_trace(os.path.join(out_dir, name), trace)
        if trace.status is Status.DIVERGED:
            diverged += 1
            iters.append(math.inf)
        elif trace.converged:
            converged += 1
            iters.append(trace.n_steps)
        else:
            iters.append(math.inf)
    median_iters = statistics.median(iters)
    return (
        n, m, Method(method).value, cfg.init, len(cfg.seed_list),
        converged, diverged,
        median_iters if math.isfinite(median_iters) else math.nan,
    )


def cmd_sweep(cfg: ExperimentConfig) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    rows = []
    for n in cfg.n_list:
        m_values = cfg.m_list if cfg.m_list else (theory_m(n),)
        for m in m_values:
            for method in cfg.methods:
                rows.append(sweep_cell(cfg, n, m, method, out_dir=cfg.out))
    _write_csv(
        os.path.join(cfg.out, "summary.csv"),
        ("n", "m", "method", "init", "seeds", "converged", "diverged", "median_iters"),
        rows,
    )
    return 0


def cmd_loo(cfg: ExperimentConfig) -> int:
    n, seed = cfg.n_list[0], cfg.seed_list[0]
    m = cfg.m_list[0] if cfg.m_list else theory_m(n)
    method = cfg.methods[0]
    ens, gt, y, x0 = _problem(cfg, n, m, seed)
    params = _solver_params(cfg, n, float(np.linalg.norm(x0)), method)
    params = dataclasses.replace(
        params, max_iters=min(params.max_iters, cfg.loo_budget_iters)
    )
    bundle = loo_run(
        ens, y, x0, params, gt,
        cfg=cfg.ric(), budget_m=cfg.loo_budget_m, budget_iters=cfg.loo_budget_iters,
    )
    rows = [
        (t, bundle.proximity[t], bundle.threshold, bundle.proximity[t] <= bundle.threshold)
        for t in range(bundle.proximity.shape[0])
    ]
    _write_csv(cfg.out, ("iter", "proximity", "threshold", "ok"), rows,
               comments=[f"within_threshold={int(bundle.within_threshold)}"])
    return 0 if bundle.within_threshold else 1


def cmd_oracle(cfg: ExperimentConfig) -> int:
    kappa = cfg.kappa
    bounds = {
        Method.GD: 1.0 - 1.0 / kappa + 0.005,
        Method.POLYAK: (math.sqrt(kappa) - 1.0) / (math.sqrt(kappa) + 1.0) + 0.02,
        Method.NESTEROV: 1.0 - 1.0 / math.sqrt(kappa) + 0.02,
    }
    rows = []
    any_fail = False
    for method in (Method.GD, Method.POLYAK, Method.NESTEROV):
        measured = quadratic_oracle(1.0, kappa, method, steps=cfg.oracle_steps)
        ok = measured <= bounds[method]
        any_fail = any_fail or not ok
        rows.append((method.value, measured, bounds[method], ok))
    _write_csv(cfg.out, ("method", "measured_ratio", "bound", "ok"), rows)
    return 1 if any_fail else 0


def cmd_concentration(cfg: ExperimentConfig) -> int:
    n = cfg.n_list[0]
    m = cfg.m_list[0] if cfg.m_list else theory_m(n)
    rows = []
    any_fail = False
    for seed in cfg.seed_list:
        ens = sample_ensemble(m, n, seed)
        probe = sample_unit_sphere(n, seed)
        rep = concentration_report(ens, probe)
        ok = rep.row_norm_ok and rep.projection_ok
        any_fail = any_fail or not ok
        rows.append((
            seed, rep.max_row_norm, rep.row_norm_bound, rep.row_norm_ok,
            rep.max_projection, rep.projection_bound, rep.projection_ok,
        ))
    _write_csv(
        cfg.out,
        ("seed", "max_row_norm", "row_bound", "row_ok",
         "max_projection", "proj_bound", "proj_ok"),
        rows,
    )
    return 1 if any_fail else 0


def cmd_cdp(cfg: ExperimentConfig) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    if cfg.image:
        image = read_pgm(cfg.image)
    else:
        image = cdp_mod.synthetic_image(cfg.cdp_size, cfg.cdp_size)
    seed = cfg.seed_list[0]
    rows = []
    finals = {}
    for method in cfg.methods:
        trace = cdp_mod.cdp_run(
            image, cfg.mask_count, Method(method), cfg.cdp_iters, seed,
            eta=cfg.eta, beta=cfg.beta,
        )
        finals[Method(method)] = float(trace.rel_err[-1])
        for t, err in enumerate(trace.rel_err):
            rows.append((Method(method).value, t, err))
        write_pgm(
            os.path.join(cfg.out, f"recovered_{Method(method).value}.pgm"),
            np.abs(trace.recovered),
        )
    comments = [f"final_{m.value}={v:.17g}" for m, v in finals.items()]
    ok = True
    if Method.GD in finals:
        for method, err in finals.items():
            if method is not Method.GD and not err < finals[Method.GD]:
                ok = False
    comments.append(f"accelerated_below_gd={int(ok)}")
    _write_csv(os.path.join(cfg.out, "errors.csv"), ("method", "iter", "rel_err"),
               rows, comments=comments)
    return 0 if ok else 1


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "headtohead": cmd_headtohead,
    "slopes": cmd_slopes,
    "loo": cmd_loo,
    "oracle": cmd_oracle,
    "cdp": cmd_cdp,
    "concentration": cmd_concentration,
}
