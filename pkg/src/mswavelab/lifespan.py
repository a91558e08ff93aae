"""Lifespan sweeps over the data size and scaling-law fits.

A sweep integrates the same system from the same data profile at a ladder
of amplitudes, records the bootstrap exit time of each run, and fits the
uncensored exits to a scaling law: a power law T = A0 eps^(-e) for the 2D
quadratic regime, or log T = C0 eps^(-nu) + const for the almost-global
regimes.  Runs that never exit within the horizon are censored and never
enter a fit; a fully censored sweep is reported as inconclusive rather
than fitted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .solver import SolverConfig, grid_for_run, make_initial_data, run_with_monitor
from .systems import SystemSpec, load_system, system_to_config

__all__ = [
    "SweepConfig",
    "SweepRun",
    "LifespanRecord",
    "FitResult",
    "run_sweep",
    "fit_scaling",
    "load_sweep_config",
    "sweep_config_to_dict",
]


@dataclass(frozen=True)
class SweepConfig:
    system: SystemSpec
    epsilons: tuple
    family: str = "radial_bump"
    seed: int = 0
    support: float = 1.0
    resolution: int = 257
    pad_cells: int = 12
    bump_power: int = 6
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(t_max=8.0))

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if len(eps) < 3:
            raise ValueError("sweep needs at least 3 epsilon values")
        if any(e <= 0 for e in eps):
            raise ValueError("epsilon values must be positive")
        if list(eps) != sorted(eps, reverse=True):
            raise ValueError("epsilon ladder must be descending")
        object.__setattr__(self, "epsilons", eps)


@dataclass(frozen=True)
class SweepRun:
    epsilon: float  # N4 of the initial data, the size parameter of the scaling laws
    t_star: float
    exit_kind: str
    amplitude: float = 0.0  # configured data amplitude (epsilon is proportional)

    @property
    def censored(self) -> bool:
        return self.exit_kind != "bootstrap_exit"


@dataclass(frozen=True)
class LifespanRecord:
    runs: tuple
    inversions: tuple = ()

    @property
    def uncensored(self) -> tuple:
        return tuple(r for r in self.runs if not r.censored)

    @property
    def n_censored(self) -> int:
        return sum(1 for r in self.runs if r.censored)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("epsilon,T_star,exit_kind\n")
            for r in self.runs:
                fh.write(f"{r.epsilon!r},{r.t_star!r},{r.exit_kind}\n")


def run_sweep(cfg: SweepConfig, keep_results: bool = False):
    """One solver run per epsilon, descending; aborts are recorded, not fatal.

    All runs share the grid, horizon, and data profile, so T_star values are
    directly comparable.  Returns the record (and the run results when
    ``keep_results``).
    """
    grid = grid_for_run(cfg.system.dim, cfg.support, cfg.solver.t_max,
                        cfg.system.c_max, cfg.resolution, cfg.pad_cells)
    runs = []
    results = []
    for eps in cfg.epsilons:
        data = make_initial_data(grid, cfg.system.components, cfg.family, eps,
                                 cfg.support, seed=cfg.seed, power=cfg.bump_power)
        result = run_with_monitor(data, cfg.system, cfg.solver)
        runs.append(SweepRun(result.probe.epsilon, result.probe.t_star,
                             result.exit_kind, amplitude=eps))
        if keep_results:
            results.append(result)
    inversions = []
    clean = [r for r in runs if not r.censored]
    for a, b in zip(clean, clean[1:]):
        # epsilons descend, so T_star should not decrease
        if b.t_star < a.t_star * (1.0 - 1e-9):
            inversions.append((a.epsilon, b.epsilon))
    record = LifespanRecord(tuple(runs), tuple(inversions))
    return (record, results) if keep_results else record


@dataclass(frozen=True)
class FitResult:
    model: str
    status: str  # "ok" | "inconclusive (censored)"
    params: dict = field(default_factory=dict)
    r_squared: float = 0.0
    max_residual: float = 0.0
    n_used: int = 0
    n_censored: int = 0

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "status": self.status,
            "params": dict(sorted(self.params.items())),
            "r_squared": self.r_squared,
            "max_residual": self.max_residual,
            "n_used": self.n_used,
            "n_censored": self.n_censored,
        }


def _linear_fit(x: np.ndarray, y: np.ndarray):
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    resid = y - pred
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), r2, float(np.max(np.abs(resid)))


def fit_scaling(record: LifespanRecord, model: str, nu: int = 1) -> FitResult:
    """Least squares on the linearized law; censored runs never enter the fit.

    power_law:          log T = log A0 - exponent * log eps
    exp_inverse_power:  log T = C0 * eps^(-nu) + log B
    """
    clean = record.uncensored
    if model not in ("power_law", "exp_inverse_power"):
        raise ValueError(f"unknown model {model!r}")
    if len(clean) < 3:
        return FitResult(model, "inconclusive (censored)",
                         n_used=len(clean), n_censored=record.n_censored)
    eps = np.array([r.epsilon for r in clean])
    t = np.array([r.t_star for r in clean])
    if model == "power_law":
        slope, intercept, r2, resid = _linear_fit(np.log(eps), np.log(t))
        params = {"exponent": -slope, "A0": math.exp(intercept)}
    else:
        slope, intercept, r2, resid = _linear_fit(eps ** (-float(nu)), np.log(t))
        params = {"C0": slope, "logB": intercept, "nu": float(nu)}
    return FitResult(model, "ok", params, r2, resid, len(clean), record.n_censored)


# ---------------------------------------------------------------------------
# Sweep configuration files.


def load_sweep_config(source) -> SweepConfig:
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    else:
        cfg = dict(source)
    try:
        system = load_system(cfg["system"])
        solver_cfg = cfg.get("solver", {})
        solver = SolverConfig(
            t_max=float(solver_cfg.get("t_max", 8.0)),
            cfl=float(solver_cfg.get("cfl", 0.4)),
            accuracy=int(solver_cfg.get("accuracy", 4)),
            laplacian_mode=solver_cfg.get("laplacian_mode", "split"),
            sample_interval=solver_cfg.get("sample_interval"),
            magnitude_guard=float(solver_cfg.get("magnitude_guard", 1e6)),
            condition_cap=float(solver_cfg.get("condition_cap", 1e6)),
            keep_snapshots=int(solver_cfg.get("keep_snapshots", 3)),
        )
        return SweepConfig(
            system=system,
            epsilons=tuple(float(e) for e in cfg["epsilons"]),
            family=cfg.get("family", "radial_bump"),
            seed=int(cfg.get("seed", 0)),
            support=float(cfg.get("support", 1.0)),
            resolution=int(cfg.get("resolution", 257)),
            pad_cells=int(cfg.get("pad_cells", 12)),
            bump_power=int(cfg.get("bump_power", 6)),
            solver=solver,
        )
    except KeyError as exc:
        raise ValueError(f"sweep config missing key {exc}") from exc


def sweep_config_to_dict(cfg: SweepConfig) -> dict:
    return {
        "system": system_to_config(cfg.system),
        "epsilons": list(cfg.epsilons),
        "family": cfg.family,
        "seed": cfg.seed,
        "support": cfg.support,
        "resolution": cfg.resolution,
        "pad_cells": cfg.pad_cells,
        "bump_power": cfg.bump_power,
        "solver": {
            "t_max": cfg.solver.t_max,
            "cfl": cfg.solver.cfl,
            "accuracy": cfg.solver.accuracy,
            "laplacian_mode": cfg.solver.laplacian_mode,
            "sample_interval": cfg.solver.sample_interval,
            "magnitude_guard": cfg.solver.magnitude_guard,
            "condition_cap": cfg.solver.condition_cap,
            "keep_snapshots": cfg.solver.keep_snapshots,
        },
    }
