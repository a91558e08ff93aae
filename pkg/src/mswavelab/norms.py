"""Scalar functionals: energies, weighted norms, and mixed radial-angular norms.

All volume integrals are midpoint quadrature sum * dx^n on the uniform grid,
consistent with the difference stencils.  Angular norms interpolate the field
onto spherical shells (uniform angles in 2D, an area-weighted lat-long grid
in 3D) and are accurate to the declared tolerance for smooth compact fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Field,
    Grid,
    StateSnapshot,
    diff2_values,
    diff_values,
    integrate,
    l2_norm,
    lorentz_weight_values,
)
from .operators import scan_energy_words

__all__ = [
    "NormReport",
    "energy_e1",
    "energy_e1_pair",
    "generalized_energy",
    "auxiliary_m2",
    "auxiliary_m2_pair",
    "auxiliary_m4",
    "mixed_radial_angular",
    "mild_weight_data_norm",
    "lp_norm",
    "region_mask",
    "region_lp",
    "interpolate_values",
    "sphere_nodes",
    "shell_radii",
]


@dataclass(frozen=True)
class NormReport:
    kind: str
    value: float
    grid_points: int
    scheme: str = "midpoint"
    tags: dict = field(default_factory=dict)

    def csv_row(self, t: float) -> str:
        tag_text = ";".join(f"{k}={v}" for k, v in sorted(self.tags.items()))
        return f"{t!r},{self.kind},{tag_text},{self.value!r},{self.grid_points}"


# ---------------------------------------------------------------------------
# Energies.


def energy_e1_pair(wu: np.ndarray, wv: np.ndarray, grid: Grid, speeds,
                   accuracy: int = 4) -> float:
    """(1/2) sum_l int |wv^l|^2 + c_l^2 |grad wu^l|^2 for a word pair."""
    total = 0.0
    for l, c in enumerate(speeds):
        density = np.square(wv[l])
        for k in range(1, grid.dim + 1):
            density = density + c * c * np.square(diff_values(wu[l], grid, k, accuracy))
        total += 0.5 * integrate(density, grid)
    return total


def energy_e1(s: StateSnapshot, speeds, accuracy: int = 4) -> float:
    return energy_e1_pair(s.u.values, s.v.values, s.grid, speeds, accuracy)


def generalized_energy(s: StateSnapshot, speeds, kappa: int, utt: Field | None = None,
                       accuracy: int = 4) -> float:
    """N_kappa: sqrt of the summed base energies over the admissible word set."""
    if not 1 <= kappa <= 4:
        raise ValueError("kappa must be between 1 and 4")
    acc = 0.0

    def visit(_key, wu, wv):
        nonlocal acc
        acc += energy_e1_pair(wu, wv, s.grid, speeds, accuracy)

    scan_energy_words(s, utt, kappa, visit, accuracy=accuracy)
    return float(np.sqrt(acc))


def auxiliary_m2_pair(wu: np.ndarray, wv: np.ndarray, grid: Grid, t: float, speeds,
                      accuracy: int = 4) -> float:
    """sum_l sum_{delta=0..n, j=1..n} || <c_l t - r> d2_{delta j} w^l ||_L2.

    Follows the index set literally: mixed time-space derivatives d2_{0j} are
    included (via the pair's time component), dt^2 and S never appear.
    """
    total = 0.0
    for l, c in enumerate(speeds):
        w = lorentz_weight_values(grid, c, t)
        for j in range(1, grid.dim + 1):
            total += l2_norm(w * diff_values(wv[l], grid, j, accuracy), grid)
            for delta in range(1, grid.dim + 1):
                total += l2_norm(w * diff2_values(wu[l], grid, delta, j, accuracy), grid)
    return total


def auxiliary_m2(s: StateSnapshot, speeds, accuracy: int = 4) -> float:
    return auxiliary_m2_pair(s.u.values, s.v.values, s.grid, s.time, speeds, accuracy)


def auxiliary_m4(s: StateSnapshot, speeds, accuracy: int = 4) -> float:
    """sum over spatial-rotational words |a| <= 2 of M2(Zbar^a state)."""
    total = 0.0

    def visit(key, wu, wv):
        nonlocal total
        a, b, d = key
        if sum(a) + sum(b) <= 2:
            total += auxiliary_m2_pair(wu, wv, s.grid, s.time, speeds, accuracy)

    scan_energy_words(s, None, 3, visit, include_scaling=False, accuracy=accuracy)
    return total


def auxiliary_m(s: StateSnapshot, speeds, level: int, accuracy: int = 4) -> float:
    if level == 2:
        return auxiliary_m2(s, speeds, accuracy)
    if level == 4:
        return auxiliary_m4(s, speeds, accuracy)
    raise ValueError("level must be 2 or 4")


# ---------------------------------------------------------------------------
# Plain, weighted, and region-restricted L^p norms.


def lp_norm(values: np.ndarray, grid: Grid, p: float, mask: np.ndarray | None = None) -> float:
    vals = np.abs(values)
    if mask is not None:
        vals = np.where(mask, vals, 0.0)
    if np.isinf(p):
        return float(np.max(vals))
    return float(np.sum(vals**p) * grid.cell_volume) ** (1.0 / p)


def region_mask(grid: Grid, region: str, t: float, speeds, i: int = 0, k: int = 0) -> np.ndarray:
    """Cell-center membership masks for the light-cone interior regions.

    ``region``: "B" is {r < (c_i/2) t + 1}, "Bpair" uses min(c_i, c_k) t / 2 + 1,
    a trailing apostrophe selects the complement, "all" is everything.
    """
    r = grid.radius()
    if region == "all":
        return np.ones(grid.shape, dtype=bool)
    base = region.rstrip("'")
    if base == "B":
        radius = 0.5 * speeds[i] * t + 1.0
    elif base == "Bpair":
        radius = 0.5 * min(speeds[i], speeds[k]) * t + 1.0
    else:
        raise ValueError(f"unknown region {region!r}")
    mask = r < radius
    if region.endswith("'"):
        mask = ~mask
    return mask


def region_lp(values: np.ndarray, grid: Grid, p: float, region: str, t: float,
              speeds, i: int = 0, k: int = 0) -> float:
    return lp_norm(values, grid, p, region_mask(grid, region, t, speeds, i, k))


# ---------------------------------------------------------------------------
# Mixed radial-angular norms.


def sphere_nodes(dim: int, n_angles: int = 256, n_polar: int = 32, n_azimuth: int = 64):
    """Unit directions and quadrature weights summing to |S^(n-1)|."""
    if dim == 2:
        theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(n_angles, 2.0 * np.pi / n_angles)
        return dirs, weights
    theta = (np.arange(n_polar) + 0.5) * np.pi / n_polar
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    # exact band areas: integral of sin over each polar cell
    half = 0.5 * np.pi / n_polar
    band = np.cos(theta - half) - np.cos(theta + half)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    dirs = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    ).reshape(-1, 3)
    weights = (band[:, None] * np.ones((1, n_azimuth)) * (2.0 * np.pi / n_azimuth)).reshape(-1)
    return dirs, weights


def shell_radii(grid: Grid) -> np.ndarray:
    """Midpoint shells covering (0, R], about m/2 of them."""
    count = grid.points // 2
    return (np.arange(count) + 0.5) * (grid.half_width / count)


def interpolate_values(values: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation at arbitrary points; zero outside the box."""
    m = grid.points
    idx = (points + grid.half_width) / grid.spacing
    inside = np.all((idx >= 0.0) & (idx <= m - 1), axis=-1)
    base = np.clip(np.floor(idx).astype(np.int64), 0, m - 2)
    frac = idx - base
    out = np.zeros(points.shape[:-1])
    for corner in range(2**grid.dim):
        weight = np.ones(points.shape[:-1])
        gather = []
        for axis in range(grid.dim):
            bit = (corner >> axis) & 1
            weight = weight * (frac[..., axis] if bit else 1.0 - frac[..., axis])
            gather.append(base[..., axis] + bit)
        out += weight * values[tuple(gather)]
    return np.where(inside, out, 0.0)


def shell_samples(values: np.ndarray, grid: Grid, radii: np.ndarray | None = None):
    """Field samples on every shell: array (n_shells, n_angles)."""
    if radii is None:
        radii = shell_radii(grid)
    dirs, weights = sphere_nodes(grid.dim)
    points = radii[:, None, None] * dirs[None, :, :]
    return radii, weights, interpolate_values(values, grid, points)


def _angular_norm(samples: np.ndarray, weights: np.ndarray, p: float) -> np.ndarray:
    if np.isinf(p):
        return np.max(np.abs(samples), axis=-1)
    return np.sum(weights * np.abs(samples) ** p, axis=-1) ** (1.0 / p)


def mixed_radial_angular(f: Field, outer: str, inner_p: float, component: int = 0,
                         radial_weight=None) -> float:
    """|| w(r) f ||  with inner L^p over angles and outer sup or L^2(r^{n-1} dr).

    ``outer`` is "sup" or "l2"; ``radial_weight`` is an optional callable r ->
    weight applied per shell (e.g. r^{(n-1)/2} for the trace inequalities).
    """
    grid = f.grid
    radii, weights, samples = shell_samples(f.values[component], grid)
    inner = _angular_norm(samples, weights, inner_p)
    if radial_weight is not None:
        inner = inner * radial_weight(radii)
    if outer == "sup":
        return float(np.max(inner))
    if outer == "l2":
        dr = radii[1] - radii[0] if len(radii) > 1 else grid.half_width
        return float(np.sqrt(np.sum(inner**2 * radii ** (grid.dim - 1)) * dr))
    raise ValueError("outer must be 'sup' or 'l2'")


# ---------------------------------------------------------------------------
# Initial-data norm with the mild weight <x>.


def mild_weight_data_norm(data: StateSnapshot, accuracy: int = 4) -> float:
    """sum_l ( sum_{1<=|a|<=4} ||<x> d^a u^l|| + sum_{|a|<=3} ||<x> d^a v^l|| ).

    Defined for t = 0 data; derivative words are plain spatial multi-indices.
    """
    if data.time != 0.0:
        raise ValueError("the mild-weight data norm is defined at t = 0")
    grid = data.grid
    w = np.sqrt(1.0 + grid.radius() ** 2)
    total = 0.0

    def accumulate(arr, max_order, min_order):
        sub = 0.0

        def rec(current, order, min_axis):
            nonlocal sub
            if order >= min_order:
                sub += l2_norm(w * current, grid)
            if order == max_order:
                return
            for k in range(min_axis, grid.dim):
                rec(diff_values(current, grid, k + 1, accuracy), order + 1, k)

        rec(arr, 0, 0)
        return sub

    for l in range(data.components):
        total += accumulate(data.u.values[l], 4, 1)
        total += accumulate(data.v.values[l], 3, 0)
    return total
