"""Method-of-lines integration with energy monitoring and bootstrap detection.

The second-order system is rewritten as u' = v, v' = dt^2 u with the second
time derivative recovered from the implicit quasi-linear form at every stage
(classical four-stage Runge-Kutta).  A monitor samples the generalized
energy, the modified energy, and the weighted auxiliary norm along the run,
watches the bootstrap threshold N4 > 2 N4(0), and records support
containment diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import (
    Field,
    Grid,
    StateSnapshot,
    boundary_layer_max,
    diff_values,
    integrate,
    support_radius,
)
from .norms import auxiliary_m2_pair
from .operators import scan_energy_words
from .systems import SmallnessViolation, SystemSpec, recover_utt_values

__all__ = [
    "SolverConfig",
    "EnergyTrace",
    "LifespanProbe",
    "RunResult",
    "MonitorSample",
    "make_initial_data",
    "bump_profile",
    "time_step",
    "run_with_monitor",
    "sample_energy_monitor",
    "modified_energy",
    "gronwall_ratio_series",
    "grid_for_run",
]


@dataclass(frozen=True)
class SolverConfig:
    t_max: float
    cfl: float = 0.4
    accuracy: int = 4
    laplacian_mode: str = "split"
    sample_interval: float | None = None
    magnitude_guard: float = 1e6
    condition_cap: float = 1e6
    kappa: int = 4
    keep_snapshots: int = 5
    monitor: str = "full"  # "full" tracks Etilde4/M4; "n4" tracks N4 only

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl factor must lie in (0, 1]")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.laplacian_mode not in ("direct", "split"):
            raise ValueError("laplacian_mode must be 'direct' or 'split'")
        if self.monitor not in ("full", "n4"):
            raise ValueError("monitor must be 'full' or 'n4'")


def grid_for_run(dim: int, support: float, t_max: float, c_max: float,
                 points: int, pad_cells: int = 6) -> Grid:
    """Domain sized so the forward light cone never reaches the boundary.

    R solves R = support + c_max t_max + pad_cells * dx with dx = 2R/(m-1).
    """
    denom = 1.0 - 2.0 * pad_cells / (points - 1)
    if denom <= 0:
        raise ValueError("pad_cells too large for this resolution")
    return Grid(dim, (support + c_max * t_max) / denom, points)


def bump_profile(grid: Grid, support: float, power: int = 6,
                 center=None, stretch=None) -> np.ndarray:
    """Compactly supported C^(power-1) bump ((1 - (r/support)^2)_+)^power."""
    r2 = np.zeros(grid.shape)
    for k in range(1, grid.dim + 1):
        x = grid.coordinate(k) - (0.0 if center is None else center[k - 1])
        s = 1.0 if stretch is None else stretch[k - 1]
        r2 = r2 + (x / s) ** 2
    arg = 1.0 - r2 / support**2
    return np.where(arg > 0.0, arg, 0.0) ** power


def make_initial_data(grid: Grid, components: int, family: str, epsilon: float,
                      support: float, seed: int | None = None, power: int = 6) -> StateSnapshot:
    """Compact smooth Cauchy data (u, v) = epsilon (f, g), exactly homogeneous."""
    if support >= grid.half_width:
        raise ValueError("data support exceeds the grid")
    base = bump_profile(grid, support, power)
    u = np.zeros((components,) + grid.shape)
    v = np.zeros((components,) + grid.shape)
    if family == "radial_bump":
        for l in range(components):
            u[l] = (1.0 / (1.0 + 0.5 * l)) * base
            v[l] = (1.0 / (1.0 + 0.25 * l)) * base
    elif family == "polynomial_bump":
        x = [grid.coordinate(k) for k in range(1, grid.dim + 1)]
        for l in range(components):
            u[l] = base * (1.0 + 0.4 * x[0] / support - 0.3 * x[1] / support * (l + 1))
            v[l] = base * (1.0 - 0.2 * x[0] / support + 0.1 * (l + 1))
    elif family == "random_bump":
        rng = np.random.default_rng(0 if seed is None else seed)
        x = [grid.coordinate(k) for k in range(1, grid.dim + 1)]
        for l in range(components):
            for target in (u, v):
                poly = rng.uniform(0.6, 1.2) * np.ones(grid.shape)
                for k in range(grid.dim):
                    poly = poly + rng.uniform(-0.4, 0.4) * x[k] / support
                target[l] = base * poly
    else:
        raise ValueError(f"unknown data family {family!r}")
    return StateSnapshot(
        Field(grid, epsilon * u, 0.0, check=False),
        Field(grid, epsilon * v, 0.0, check=False),
    )


# ---------------------------------------------------------------------------
# Time integration.


def _rhs(spec, u, v, grid, t, config, forcing):
    force = None if forcing is None else forcing(t)
    utt = recover_utt_values(
        spec, u, v, grid, config.accuracy, config.laplacian_mode,
        config.condition_cap, forcing=force,
    )
    return v, utt


def _rk4(spec, u, v, grid, t, dt, config, forcing):
    k1u, k1v = _rhs(spec, u, v, grid, t, config, forcing)
    k2u, k2v = _rhs(spec, u + 0.5 * dt * k1u, v + 0.5 * dt * k1v, grid, t + 0.5 * dt, config, forcing)
    k3u, k3v = _rhs(spec, u + 0.5 * dt * k2u, v + 0.5 * dt * k2v, grid, t + 0.5 * dt, config, forcing)
    k4u, k4v = _rhs(spec, u + dt * k3u, v + dt * k3v, grid, t + dt, config, forcing)
    u_new = u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    v_new = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return u_new, v_new


def time_step(s: StateSnapshot, spec: SystemSpec, config: SolverConfig, dt: float,
              forcing=None) -> StateSnapshot:
    """One RK4 step of the first-order system; support containment preserved."""
    u, v = _rk4(spec, s.u.values, s.v.values, s.grid, s.time, dt, config, forcing)
    t = s.time + dt
    return StateSnapshot(Field(s.grid, u, t, check=False), Field(s.grid, v, t, check=False))


# ---------------------------------------------------------------------------
# Monitoring.


@dataclass(frozen=True)
class MonitorSample:
    e4: float
    etilde4: float
    n4: float
    m4: float


def sample_energy_monitor(spec: SystemSpec, s: StateSnapshot, utt: Field,
                          kappa: int = 4, accuracy: int = 4,
                          level: str = "full") -> MonitorSample:
    """E4 = N4^2, the modified energy, and M4 in a single word-lattice pass.

    ``level="n4"`` skips the modified-energy correction and M4 (Etilde4 is
    then reported equal to E4 and M4 as zero), which is much cheaper when a
    run only needs the bootstrap probe.
    """
    grid = s.grid
    speeds = spec.speeds
    n_comp = spec.components
    derivs_first = {}

    def first(i, alpha):
        key = (i, alpha)
        if key not in derivs_first:
            if alpha == 0:
                derivs_first[key] = s.v.values[i]
            else:
                derivs_first[key] = diff_values(s.u.values[i], grid, alpha, accuracy)
        return derivs_first[key]

    totals = {"e4": 0.0, "m4": 0.0, "corr_tt": 0.0, "corr_ss": 0.0}
    top = kappa - 1

    full = level == "full"

    def visit(key, wu, wv):
        a, b, d = key
        order = sum(a) + sum(b) + d
        grads = [
            [diff_values(wu[l], grid, k, accuracy) for k in range(1, grid.dim + 1)]
            for l in range(n_comp)
        ]
        e1 = 0.0
        for l, c in enumerate(speeds):
            density = np.square(wv[l])
            for g in grads[l]:
                density = density + c * c * np.square(g)
            e1 += 0.5 * integrate(density, grid)
        totals["e4"] += e1
        if full and d == 0 and order <= 2:
            totals["m4"] += auxiliary_m2_pair(wu, wv, grid, s.time, speeds, accuracy)
        if full and order == top and top == 3:
            if spec.kind == "quadratic":
                for (l, i, j, al, be, ga), val in spec.g_entries:
                    if be == 0 and ga == 0:
                        totals["corr_tt"] += val * integrate(first(i, al) * wv[j] * wv[l], grid)
                    elif be >= 1 and ga >= 1:
                        totals["corr_ss"] += val * integrate(
                            first(i, al) * grads[j][ga - 1] * grads[l][be - 1], grid
                        )
            else:
                for (l, i, j, k, al, be, ga, de), val in spec.g_entries:
                    ff = first(i, al) * first(j, be)
                    if ga == 0 and de == 0:
                        totals["corr_tt"] += val * integrate(ff * wv[k] * wv[l], grid)
                    elif ga >= 1 and de >= 1:
                        totals["corr_ss"] += val * integrate(
                            ff * grads[k][de - 1] * grads[l][ga - 1], grid
                        )

    scan_energy_words(s, utt, kappa, visit, accuracy=accuracy)
    e4 = totals["e4"]
    etilde = e4 - 0.5 * (totals["corr_tt"] - totals["corr_ss"])
    return MonitorSample(e4, etilde, math.sqrt(max(e4, 0.0)), totals["m4"])


def modified_energy(spec: SystemSpec, s: StateSnapshot, utt: Field,
                    kappa: int = 4, accuracy: int = 4) -> float:
    """The modified energy: E4 minus the coefficient-weighted quadratic
    correction over the top-order words (vanishes identically when G = 0)."""
    return sample_energy_monitor(spec, s, utt, kappa, accuracy).etilde4


@dataclass
class EnergyTrace:
    times: np.ndarray
    e4: np.ndarray
    etilde4: np.ndarray
    n4: np.ndarray
    m4: np.ndarray
    boundary_max: np.ndarray
    support_radius: np.ndarray

    @property
    def equivalence_ratio(self) -> np.ndarray:
        return np.where(self.e4 > 0.0, self.etilde4 / np.where(self.e4 > 0, self.e4, 1.0), 1.0)

    def gronwall_ratio(self, nu: int) -> np.ndarray:
        return gronwall_ratio_series(self.times, self.etilde4, self.n4, nu)

    def to_csv(self, path, nu: int) -> None:
        gr = self.gronwall_ratio(nu)
        eq = self.equivalence_ratio
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("t,E4,Etilde4,N4,M4,equivalence_ratio,gronwall_ratio\n")
            for i in range(len(self.times)):
                row = [self.times[i], self.e4[i], self.etilde4[i], self.n4[i],
                       self.m4[i], eq[i], gr[i]]
                fh.write(",".join(repr(float(x)) for x in row) + "\n")


def gronwall_ratio_series(times: np.ndarray, etilde: np.ndarray, n4: np.ndarray,
                          nu: int) -> np.ndarray:
    """dEtilde/dt * <t> / (N4^nu Etilde) per sample (finite differences)."""
    if len(times) < 3:
        return np.zeros(len(times))
    de = np.gradient(etilde, times)
    bracket = np.sqrt(1.0 + times**2)
    denom = n4**nu * etilde
    return np.where(np.abs(denom) > 1e-300, de * bracket / np.where(denom != 0, denom, 1.0), 0.0)


@dataclass(frozen=True)
class LifespanProbe:
    epsilon: float
    threshold: float
    t_star: float
    exit_kind: str  # bootstrap_exit | horizon | guard | singular


@dataclass
class RunResult:
    trace: EnergyTrace
    probe: LifespanProbe
    snapshots: list
    exit_kind: str
    dt: float
    steps: int
    note: str = ""


def run_with_monitor(data: StateSnapshot, spec: SystemSpec, config: SolverConfig,
                     forcing=None, bootstrap: bool = True) -> RunResult:
    """Integrate to the horizon, bootstrap exit, or a guard abort.

    Returns the sampled energy trace, the lifespan probe (first sample time
    with N4 > 2 N4(0), linearly interpolated between samples), and a small
    library of retained snapshots for the inequality checks.
    """
    grid = data.grid
    dt_cfl = config.cfl * grid.spacing / spec.c_max
    steps = max(1, math.ceil(config.t_max / dt_cfl - 1e-12))
    dt = config.t_max / steps
    interval = config.sample_interval or config.t_max / 24.0
    sample_every = max(1, round(interval / dt))
    sample_steps = list(range(0, steps + 1, sample_every))
    if sample_steps[-1] != steps:
        sample_steps.append(steps)
    keep = np.linspace(0, len(sample_steps) - 1, min(config.keep_snapshots, len(sample_steps)))
    keep_set = {sample_steps[int(i)] for i in np.round(keep)}

    u = data.u.values.copy()
    v = data.v.values.copy()
    t = data.time
    width = 2 * (config.accuracy // 2) if config.laplacian_mode == "split" else config.accuracy // 2

    rows = {k: [] for k in ("times", "e4", "etilde4", "n4", "m4", "boundary_max", "support_radius")}
    snapshots = []
    exit_kind = "horizon"
    note = ""
    epsilon = None
    threshold = None
    crossing = None

    step_index = 0
    sample_cursor = 0
    while True:
        if sample_cursor < len(sample_steps) and step_index == sample_steps[sample_cursor]:
            sample_cursor += 1
            snap = StateSnapshot(Field(grid, u, t, check=False), Field(grid, v, t, check=False))
            max_amp = float(np.max(np.abs(u))) if u.size else 0.0
            if not np.isfinite(u).all() or not np.isfinite(v).all() or max_amp > config.magnitude_guard:
                exit_kind = "guard"
                note = f"magnitude guard tripped at t={t:.6g}"
                break
            try:
                utt_values = recover_utt_values(
                    spec, u, v, grid, config.accuracy, config.laplacian_mode, config.condition_cap
                )
            except SmallnessViolation as exc:
                exit_kind = "singular"
                note = str(exc)
                break
            utt = Field(grid, utt_values, t, check=False)
            sample = sample_energy_monitor(spec, snap, utt, config.kappa,
                                           config.accuracy, config.monitor)
            rows["times"].append(t)
            rows["e4"].append(sample.e4)
            rows["etilde4"].append(sample.etilde4)
            rows["n4"].append(sample.n4)
            rows["m4"].append(sample.m4)
            rows["boundary_max"].append(max(
                boundary_layer_max(snap.u, width), boundary_layer_max(snap.v, width)
            ))
            # support measured at a relative threshold: precursor amplitudes
            # scale with the data, the roundoff floor does too
            amp = max(snap.u.max_abs(), snap.v.max_abs())
            thr = 1e-6 * amp if amp > 0 else 1.0
            rows["support_radius"].append(max(
                support_radius(snap.u, thr), support_radius(snap.v, thr)
            ))
            if step_index in keep_set:
                snapshots.append(snap)
            if epsilon is None:
                epsilon = sample.n4
                threshold = 2.0 * epsilon
            elif bootstrap and sample.n4 > threshold and epsilon > 0.0:
                exit_kind = "bootstrap_exit"
                crossing = (rows["times"][-2], rows["n4"][-2], t, sample.n4)
                break
        if step_index >= steps:
            break
        try:
            u, v = _rk4(spec, u, v, grid, t, dt, config, forcing)
        except SmallnessViolation as exc:
            exit_kind = "singular"
            note = str(exc)
            break
        step_index += 1
        t = data.time + step_index * dt

    trace = EnergyTrace(**{k: np.asarray(vals, dtype=np.float64) for k, vals in rows.items()})
    if epsilon is None:
        epsilon, threshold = 0.0, 0.0
    if exit_kind == "bootstrap_exit" and crossing is not None:
        t0, n0, t1, n1 = crossing
        t_star = t0 + (threshold - n0) / (n1 - n0) * (t1 - t0) if n1 > n0 else t1
    else:
        t_star = config.t_max
    probe = LifespanProbe(epsilon, threshold, t_star, exit_kind)
    return RunResult(trace, probe, snapshots, exit_kind, dt, steps, note)
