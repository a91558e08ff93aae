"""Multi-speed quasi-linear wave systems.

A system couples N wave equations (dt^2 - c_l^2 Lap) u^l = F^l where F is
built from constant coefficient tensors contracting first and second
derivatives of u.  Two nonlinearity shapes are supported:

  quadratic:  F^l = G[l,i,j,a,b,g] (d_a u^i) d2_bg u^j
                  + H[l,i,j,a,b]   (d_a u^i) (d_b u^j)
  cubic:      F^l = G[l,i,j,k,a,b,g,d] (d_a u^i)(d_b u^j) d2_gd u^k
                  + H[l,i,j,k,a,b,g]   (d_a u^i)(d_b u^j)(d_g u^k)

Greek indices run over 0..n with 0 the time direction; repeated indices are
summed.  The shape is independent of the spatial dimension: the quadratic
form in 2D is the regime with the polynomial lifespan law, the cubic form in
2D and quadratic form in 3D are the almost-global regimes.

Because the right side contains d2_00 u = dt^2 u, the equations are implicit
in the second time derivative; `recover_utt` solves the pointwise N x N
linear system, which is well conditioned exactly when the gradient smallness
condition holds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Field,
    Grid,
    StateSnapshot,
    diff2_values,
    diff_values,
    laplacian_values,
)
from .words import rotation_pairs

__all__ = [
    "SystemSpec",
    "SmallnessThresholds",
    "SmallnessViolation",
    "SymmetryReport",
    "symmetrize_tensor",
    "check_symmetry",
    "rhs_spatial",
    "recover_utt",
    "recover_utt_values",
    "smallness_check",
    "dalembertian_residual",
    "load_system",
    "system_to_config",
    "preset_linear",
    "preset_quadratic",
    "preset_cubic_2d",
    "preset_lifespan_2d",
]


class SmallnessViolation(RuntimeError):
    """The pointwise quasi-linear matrix is singular or badly conditioned."""

    def __init__(self, message, point=None, condition=None):
        super().__init__(message)
        self.point = point
        self.condition = condition


@dataclass(frozen=True)
class SmallnessThresholds:
    """Configured smallness constants: pointwise bound and norm bound.

    No canonical numeric values exist for these, only that small enough
    ones work; they are configuration, and runs report observed margins.
    """

    epsilon_star: float = 0.1
    delta0: float = 0.05

    def __post_init__(self):
        if self.epsilon_star <= 0 or self.delta0 <= 0:
            raise ValueError("smallness thresholds must be positive")


def _g_shape(kind: str, components: int, dim: int) -> tuple:
    d1 = dim + 1
    if kind == "quadratic":
        return (components,) * 3 + (d1,) * 3
    return (components,) * 4 + (d1,) * 4


def _h_shape(kind: str, components: int, dim: int) -> tuple:
    d1 = dim + 1
    if kind == "quadratic":
        return (components,) * 3 + (d1,) * 2
    return (components,) * 4 + (d1,) * 3


@dataclass(frozen=True, eq=False)
class SystemSpec:
    dim: int
    components: int
    speeds: tuple
    kind: str
    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if self.kind not in ("quadratic", "cubic"):
            raise ValueError("kind must be 'quadratic' or 'cubic'")
        if len(self.speeds) != self.components:
            raise ValueError("need one speed per component")
        if any(c <= 0 for c in self.speeds):
            raise ValueError("propagation speeds must be positive")
        g = np.asarray(self.g, dtype=np.float64)
        h = np.asarray(self.h, dtype=np.float64)
        if g.shape != _g_shape(self.kind, self.components, self.dim):
            raise ValueError(f"G tensor has shape {g.shape}, expected {_g_shape(self.kind, self.components, self.dim)}")
        if h.shape != _h_shape(self.kind, self.components, self.dim):
            raise ValueError(f"H tensor has shape {h.shape}, expected {_h_shape(self.kind, self.components, self.dim)}")
        g.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "speeds", tuple(float(c) for c in self.speeds))
        object.__setattr__(self, "_g_entries", tuple(
            (idx, float(g[idx])) for idx in zip(*np.nonzero(g))
        ))
        object.__setattr__(self, "_h_entries", tuple(
            (idx, float(h[idx])) for idx in zip(*np.nonzero(h))
        ))

    @property
    def g_entries(self) -> tuple:
        return self._g_entries

    @property
    def h_entries(self) -> tuple:
        return self._h_entries

    @property
    def c_max(self) -> float:
        return max(self.speeds)

    @property
    def is_linear(self) -> bool:
        return not self._g_entries and not self._h_entries

    @property
    def has_time_time_g(self) -> bool:
        if self.kind == "quadratic":
            return any(idx[4] == 0 and idx[5] == 0 for idx, _ in self._g_entries)
        return any(idx[6] == 0 and idx[7] == 0 for idx, _ in self._g_entries)

    @property
    def scaling_exponent(self) -> int:
        """Exponent nu in the energy growth rate, keyed by dimension (3D: 1, 2D: 2)."""
        return 1 if self.dim == 3 else 2

    @classmethod
    def from_entries(cls, dim, components, speeds, kind, g_entries=(), h_entries=(),
                     symmetrize: bool = False) -> "SystemSpec":
        g = np.zeros(_g_shape(kind, components, dim))
        h = np.zeros(_h_shape(kind, components, dim))
        for idx, val in g_entries:
            g[tuple(idx)] = val
        for idx, val in h_entries:
            h[tuple(idx)] = val
        if symmetrize:
            g = symmetrize_tensor(g, kind)
        spec = cls(dim, components, tuple(speeds), kind, g, h)
        report = check_symmetry(spec)
        if not report.ok:
            raise ValueError(f"coefficient tensor violates the symmetry condition: {report.violations[:3]}")
        return spec


@dataclass(frozen=True)
class SymmetryReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def _symmetry_swaps(kind: str) -> tuple:
    # quadratic G[l,i,j,a,b,g]: b<->g and l<->j; cubic G[l,i,j,k,a,b,g,d]: g<->d and l<->k
    if kind == "quadratic":
        return ((4, 5), (0, 2))
    return ((6, 7), (0, 3))


def symmetrize_tensor(g: np.ndarray, kind: str) -> np.ndarray:
    out = np.array(g, dtype=np.float64)
    for ax1, ax2 in _symmetry_swaps(kind):
        out = 0.5 * (out + out.swapaxes(ax1, ax2))
    return out


def check_symmetry(spec: SystemSpec, tol: float = 0.0, max_report: int = 20) -> SymmetryReport:
    """Report index tuples where the symmetry condition fails."""
    g = spec.g
    violations = []
    for ax1, ax2 in _symmetry_swaps(spec.kind):
        diff = g - g.swapaxes(ax1, ax2)
        bad = np.argwhere(np.abs(diff) > tol)
        for idx in bad[:max_report]:
            idx = tuple(int(i) for i in idx)
            partner = list(idx)
            partner[ax1], partner[ax2] = partner[ax2], partner[ax1]
            violations.append((idx, float(g[idx]), tuple(partner), float(g[tuple(partner)])))
    return SymmetryReport(tuple(violations))


# ---------------------------------------------------------------------------
# Derivative bookkeeping for the right-hand side.


class _StateDerivatives:
    """Lazy cache of d_alpha u^i and d2_bg u^i on the raw snapshot arrays."""

    def __init__(self, grid: Grid, u: np.ndarray, v: np.ndarray,
                 utt: np.ndarray | None, order: int):
        self.grid = grid
        self.u = u
        self.v = v
        self.utt = utt
        self.order = order
        self._first = {}
        self._second = {}

    def first(self, comp: int, alpha: int) -> np.ndarray:
        key = (comp, alpha)
        if key not in self._first:
            if alpha == 0:
                self._first[key] = self.v[comp]
            else:
                self._first[key] = diff_values(self.u[comp], self.grid, alpha, self.order)
        return self._first[key]

    def second(self, comp: int, beta: int, gamma: int) -> np.ndarray:
        if beta > gamma:
            beta, gamma = gamma, beta
        key = (comp, beta, gamma)
        if key not in self._second:
            if beta == 0 and gamma == 0:
                if self.utt is None:
                    raise SmallnessViolation("d2_00 requested without utt; use recover_utt first")
                self._second[key] = self.utt[comp]
            elif beta == 0:
                self._second[key] = diff_values(self.v[comp], self.grid, gamma, self.order)
            else:
                self._second[key] = diff2_values(self.u[comp], self.grid, beta, gamma, self.order)
        return self._second[key]


def _rhs_terms(spec: SystemSpec, derivs: _StateDerivatives, skip_time_time: bool):
    """Accumulate the nonlinear right side; optionally leave out d2_00 terms."""
    shape = (spec.components,) + derivs.grid.shape
    rhs = np.zeros(shape)
    if spec.kind == "quadratic":
        for (l, i, j, al, be, ga), val in spec.g_entries:
            if skip_time_time and be == 0 and ga == 0:
                continue
            rhs[l] += val * derivs.first(i, al) * derivs.second(j, be, ga)
        for (l, i, j, al, be), val in spec.h_entries:
            rhs[l] += val * derivs.first(i, al) * derivs.first(j, be)
    else:
        for (l, i, j, k, al, be, ga, de), val in spec.g_entries:
            if skip_time_time and ga == 0 and de == 0:
                continue
            rhs[l] += val * derivs.first(i, al) * derivs.first(j, be) * derivs.second(k, ga, de)
        for (l, i, j, k, al, be, ga), val in spec.h_entries:
            rhs[l] += val * derivs.first(i, al) * derivs.first(j, be) * derivs.first(k, ga)
    return rhs


def rhs_spatial(spec: SystemSpec, s: StateSnapshot, utt: Field | None = None,
                accuracy: int = 4) -> Field:
    """The full nonlinear right-hand side, with d_0 = v and d2_00 = utt."""
    utt_values = None if utt is None else utt.values
    derivs = _StateDerivatives(s.grid, s.u.values, s.v.values, utt_values, accuracy)
    return Field(s.grid, _rhs_terms(spec, derivs, skip_time_time=False), s.time, check=False)


def _quasilinear_matrix(spec: SystemSpec, derivs: _StateDerivatives, npoints: int):
    """A[l, j] = delta_lj - (coefficient of dt^2 u^j in F^l), flattened over points."""
    n_comp = spec.components
    a = np.zeros((n_comp, n_comp, npoints))
    for l in range(n_comp):
        a[l, l, :] = 1.0
    if spec.kind == "quadratic":
        for (l, i, j, al, be, ga), val in spec.g_entries:
            if be == 0 and ga == 0:
                a[l, j] -= val * derivs.first(i, al).reshape(npoints)
    else:
        for (l, i, j, k, al, be, ga, de), val in spec.g_entries:
            if ga == 0 and de == 0:
                a[l, k] -= (val * derivs.first(i, al) * derivs.first(j, be)).reshape(npoints)
    return a


def recover_utt_values(spec: SystemSpec, u: np.ndarray, v: np.ndarray, grid: Grid,
                       accuracy: int = 4, laplacian_mode: str = "direct",
                       condition_cap: float = 1e6,
                       forcing: np.ndarray | None = None) -> np.ndarray:
    """Solve the pointwise linear system for dt^2 u (raw array form)."""
    derivs = _StateDerivatives(grid, u, v, None, accuracy)
    b = _rhs_terms(spec, derivs, skip_time_time=True)
    split = laplacian_mode == "split"
    for l in range(spec.components):
        b[l] += spec.speeds[l] ** 2 * laplacian_values(u[l], grid, accuracy, split=split)
    if forcing is not None:
        b = b + forcing
    if not spec.has_time_time_g:
        return b
    npoints = int(np.prod(grid.shape))
    a = _quasilinear_matrix(spec, derivs, npoints)
    mats = np.moveaxis(a, -1, 0)
    worst = int(np.argmin(np.abs(np.linalg.det(mats))))
    svals = np.linalg.svd(mats[worst], compute_uv=False)
    if svals[-1] <= max(svals[0], 1.0) / condition_cap:
        point = tuple(int(i) for i in np.unravel_index(worst, grid.shape))
        cond = float("inf") if svals[-1] == 0 else float(svals[0] / svals[-1])
        raise SmallnessViolation(
            f"quasi-linear matrix near-singular at grid point {point} "
            f"(sigma_min={svals[-1]:.3e}); gradient smallness violated",
            point=point, condition=cond,
        )
    rhs = np.moveaxis(b.reshape(spec.components, npoints), -1, 0)[..., None]
    try:
        sol = np.linalg.solve(mats, rhs)
    except np.linalg.LinAlgError as exc:
        raise SmallnessViolation(f"quasi-linear matrix singular: {exc}") from exc
    return np.moveaxis(sol[..., 0], 0, -1).reshape(b.shape)


def recover_utt(spec: SystemSpec, s: StateSnapshot, accuracy: int = 4,
                laplacian_mode: str = "direct", condition_cap: float = 1e6) -> Field:
    """dt^2 u as a field, from the implicit quasi-linear form."""
    values = recover_utt_values(spec, s.u.values, s.v.values, s.grid, accuracy,
                                laplacian_mode, condition_cap)
    return Field(s.grid, values, s.time, check=False)


@dataclass(frozen=True)
class SmallnessReport:
    max_value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_value <= self.threshold


def smallness_check(s: StateSnapshot, threshold: float, accuracy: int = 4) -> SmallnessReport:
    """Max over |a| <= 1, alpha, i of |Zbar^a d_alpha u^i| against the threshold."""
    grid = s.grid
    worst = 0.0
    for comp in range(s.components):
        firsts = [s.v.values[comp]] + [
            diff_values(s.u.values[comp], grid, k, accuracy) for k in range(1, grid.dim + 1)
        ]
        for base in firsts:
            worst = max(worst, float(np.max(np.abs(base))))
            for k in range(1, grid.dim + 1):
                worst = max(worst, float(np.max(np.abs(diff_values(base, grid, k, accuracy)))))
            for i, j in rotation_pairs(grid.dim):
                rot = grid.coordinate(i) * diff_values(base, grid, j, accuracy) \
                    - grid.coordinate(j) * diff_values(base, grid, i, accuracy)
                worst = max(worst, float(np.max(np.abs(rot))))
    return SmallnessReport(worst, threshold)


def dalembertian_residual(spec: SystemSpec, u: np.ndarray, utt: np.ndarray, grid: Grid,
                          component: int, accuracy: int = 4) -> np.ndarray:
    """box_l u^l = dt^2 u^l - c_l^2 Lap u^l on raw arrays."""
    c = spec.speeds[component]
    return utt[component] - c * c * laplacian_values(u[component], grid, accuracy)


# ---------------------------------------------------------------------------
# Config round-trip.  Component indices are 1-based in configs (as written in
# the equations), Greek derivative indices 0-based with 0 = time.


def _entry_to_config(idx, val, n_comp_indices):
    comp = [int(i) + 1 for i in idx[:n_comp_indices]]
    greek = [int(i) for i in idx[n_comp_indices:]]
    return [comp + greek, val]


def _entry_from_config(entry, n_comp_indices):
    idx, val = entry
    comp = [int(i) - 1 for i in idx[:n_comp_indices]]
    greek = [int(i) for i in idx[n_comp_indices:]]
    return tuple(comp + greek), float(val)


def load_system(source) -> SystemSpec:
    """Build a SystemSpec from a config dict or a JSON file path."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    else:
        cfg = dict(source)
    try:
        kind = cfg.get("kind", "quadratic")
        n_comp = 3 if kind == "quadratic" else 4
        g_entries = [_entry_from_config(e, n_comp) for e in cfg.get("g", [])]
        h_entries = [_entry_from_config(e, n_comp) for e in cfg.get("h", [])]
        return SystemSpec.from_entries(
            dim=int(cfg["dim"]),
            components=int(cfg["components"]),
            speeds=tuple(float(c) for c in cfg["speeds"]),
            kind=kind,
            g_entries=g_entries,
            h_entries=h_entries,
            symmetrize=bool(cfg.get("symmetrize", False)),
        )
    except KeyError as exc:
        raise ValueError(f"system config missing key {exc}") from exc


def system_to_config(spec: SystemSpec) -> dict:
    n_comp = 3 if spec.kind == "quadratic" else 4
    return {
        "dim": spec.dim,
        "components": spec.components,
        "kind": spec.kind,
        "speeds": list(spec.speeds),
        "g": [_entry_to_config(idx, val, n_comp) for idx, val in spec.g_entries],
        "h": [_entry_to_config(idx, val, n_comp) for idx, val in spec.h_entries],
        "symmetrize": False,
    }


# ---------------------------------------------------------------------------
# Stock systems used by the command line and the test suite.


def preset_linear(dim: int, components: int = 2, speeds=(1.0, 2.0)) -> SystemSpec:
    return SystemSpec.from_entries(dim, components, speeds[:components], "quadratic")


def preset_quadratic(dim: int, g_scale: float = 0.5, h_scale: float = 2.0) -> SystemSpec:
    """Two components at distinct speeds, quasi-linear and semilinear coupling."""
    g_entries = [
        ((0, 0, 0, 1, 0, 0), g_scale),          # G_{11}^{1,(1,0,0)}: dt^2 enters the matrix
        ((0, 1, 1, 0, 1, 1), 0.5 * g_scale),     # G_{22}^{1,(0,1,1)}, closed by symmetrization
    ]
    h_entries = [
        ((0, 0, 0, 0, 0), h_scale),              # H_{11}^{1,(0,0)}: (dt u^1)^2
        ((1, 0, 1, 0, 0), 0.75 * h_scale),       # H_{12}^{2,(0,0)}: (dt u^1)(dt u^2)
    ]
    return SystemSpec.from_entries(dim, 2, (1.0, 0.5), "quadratic",
                                   g_entries, h_entries, symmetrize=True)


def preset_cubic_2d(g_scale: float = 0.6, h_scale: float = 3.0) -> SystemSpec:
    g_entries = [
        ((0, 0, 0, 0, 1, 1, 0, 0), g_scale),     # (d1 u^1)^2 dt^2 u^1: cubic matrix term
        ((0, 0, 0, 0, 0, 0, 1, 1), 0.5 * g_scale),  # (dt u^1)^2 d2_11 u^1
        ((0, 1, 0, 1, 0, 0, 2, 2), 0.4 * g_scale),  # cross-component, symmetrized
    ]
    h_entries = [
        ((0, 0, 0, 0, 0, 0, 0), h_scale),        # (dt u^1)^3
        ((1, 0, 0, 1, 0, 0, 0), 0.6 * h_scale),  # (dt u^1)^2 (dt u^2)
    ]
    return SystemSpec.from_entries(2, 2, (1.0, 0.5), "cubic",
                                   g_entries, h_entries, symmetrize=True)


def preset_lifespan_2d(h_scale: float = 1.0) -> SystemSpec:
    """Single-component 2D quadratic system u_tt - Lap u = h (u_t)^2."""
    h_entries = [((0, 0, 0, 0, 0), h_scale)]
    return SystemSpec.from_entries(2, 1, (1.0,), "quadratic", h_entries=h_entries)
