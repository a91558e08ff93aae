"""Uniform Cartesian grids, discrete fields, and finite-difference stencils.

The computational domain is the cube [-R, R]^n (n = 2 or 3) sampled at m
points per axis with m odd, so the origin is always a grid point.  All
derivative operators are central differences of order 2 or 4 in the
interior, closed with one-sided formulas of the same order at the edges.
Every stencil (including the closures) is exact on polynomials up to the
stated order, which the test suite relies on heavily.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "StateSnapshot",
    "StencilError",
    "partial_derivative",
    "second_derivative",
    "laplacian",
    "radial_coordinate",
    "lorentz_weight",
    "radial_derivative",
    "integrate",
    "l2_norm",
    "support_radius",
    "boundary_layer_max",
    "save_field",
    "load_field",
]


class StencilError(ValueError):
    """Requested stencil does not fit the grid or its parameters."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-half_width, half_width]^dim with `points` per axis."""

    dim: int
    half_width: float
    points: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.dim}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.points < 5 or self.points % 2 == 0:
            raise ValueError("points must be an odd integer >= 5")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points)

    def coordinate(self, k: int) -> np.ndarray:
        """Broadcastable array of the k-th coordinate (k in 1..dim)."""
        if not 1 <= k <= self.dim:
            raise ValueError(f"axis {k} out of range for dimension {self.dim}")
        shape = [1] * self.dim
        shape[k - 1] = self.points
        return self.axis.reshape(shape)

    def meshgrid(self) -> list:
        return list(np.meshgrid(*([self.axis] * self.dim), indexing="ij", sparse=True))

    def radius(self) -> np.ndarray:
        return _radius_array(self)


@lru_cache(maxsize=16)
def _radius_array(grid: Grid) -> np.ndarray:
    r2 = sum(grid.coordinate(k) ** 2 for k in range(1, grid.dim + 1))
    r = np.sqrt(r2)
    r.setflags(write=False)
    return r


@dataclass(frozen=True, eq=False)
class Field:
    """N scalar components sampled on a grid at a fixed time.

    `values` has shape (N, m, m[, m]) and is treated as immutable after
    construction.  Non-finite values are the blow-up signal and rejected
    here unless `check=False` (used on hot paths that guard separately).
    """

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __init__(self, grid: Grid, values: np.ndarray, time: float = 0.0, check: bool = True):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == grid.dim:
            values = values[np.newaxis]
        if values.shape[1:] != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        if check and not np.all(np.isfinite(values)):
            raise FloatingPointError("field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(time))

    @property
    def components(self) -> int:
        return self.values.shape[0]

    def component(self, l: int) -> np.ndarray:
        return self.values[l]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_compact(self, width: int, tol: float = 1e-14) -> bool:
        return boundary_layer_max(self, width) <= tol


@dataclass(frozen=True, eq=False)
class StateSnapshot:
    """Cauchy pair (u, v = du/dt) on a common grid and time."""

    u: Field
    v: Field

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValueError("u and v live on different grids")
        if self.u.components != self.v.components:
            raise ValueError("u and v have different component counts")
        if self.u.time != self.v.time:
            raise ValueError("u and v are at different times")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def time(self) -> float:
        return self.u.time

    @property
    def components(self) -> int:
        return self.u.components

    def scaled(self, factor: float) -> "StateSnapshot":
        return StateSnapshot(
            Field(self.grid, factor * self.u.values, self.time, check=False),
            Field(self.grid, factor * self.v.values, self.time, check=False),
        )


# ---------------------------------------------------------------------------
# Stencils.  Two boundary treatments:
#   closure="zero":     central stencil with the field extended by zero, the
#                       natural choice for compact-support fields; first
#                       derivatives are then exactly skew-adjoint, so discrete
#                       integration by parts and semi-discrete energy
#                       conservation hold to roundoff.
#   closure="onesided": one-sided formulas of the same order at the edges,
#                       exact on polynomials everywhere (used by the public
#                       derivative API and on non-compact test states).


def _diff_axis_zero(a: np.ndarray, axis: int, dx: float, order: int, nderiv: int) -> np.ndarray:
    x = np.moveaxis(a, axis, -1)
    radius = order // 2
    if x.shape[-1] < 2 * radius + 1:
        raise StencilError("grid too small for the requested stencil")
    pad = [(0, 0)] * (x.ndim - 1) + [(radius, radius)]
    xp = np.pad(x, pad)
    if nderiv == 1 and order == 2:
        out = (xp[..., 2:] - xp[..., :-2]) / (2 * dx)
    elif nderiv == 1 and order == 4:
        out = (xp[..., :-4] - 8 * xp[..., 1:-3] + 8 * xp[..., 3:-1] - xp[..., 4:]) / (12 * dx)
    elif nderiv == 2 and order == 2:
        out = (xp[..., 2:] - 2 * xp[..., 1:-1] + xp[..., :-2]) / (dx * dx)
    elif nderiv == 2 and order == 4:
        out = (
            -xp[..., :-4] + 16 * xp[..., 1:-3] - 30 * xp[..., 2:-2]
            + 16 * xp[..., 3:-1] - xp[..., 4:]
        ) / (12 * dx * dx)
    else:
        raise StencilError(f"unsupported stencil: order={order}, derivative={nderiv}")
    return np.moveaxis(out, -1, axis)


def _diff_axis(a: np.ndarray, axis: int, dx: float, order: int, nderiv: int) -> np.ndarray:
    x = np.moveaxis(a, axis, -1)
    m = x.shape[-1]
    out = np.empty_like(x)
    if nderiv == 1 and order == 2:
        if m < 3:
            raise StencilError("grid too small for order-2 first derivative")
        out[..., 1:-1] = (x[..., 2:] - x[..., :-2]) / (2 * dx)
        out[..., 0] = (-3 * x[..., 0] + 4 * x[..., 1] - x[..., 2]) / (2 * dx)
        out[..., -1] = (3 * x[..., -1] - 4 * x[..., -2] + x[..., -3]) / (2 * dx)
    elif nderiv == 1 and order == 4:
        if m < 5:
            raise StencilError("grid too small for order-4 first derivative")
        out[..., 2:-2] = (
            x[..., :-4] - 8 * x[..., 1:-3] + 8 * x[..., 3:-1] - x[..., 4:]
        ) / (12 * dx)
        out[..., 0] = (
            -25 * x[..., 0] + 48 * x[..., 1] - 36 * x[..., 2] + 16 * x[..., 3] - 3 * x[..., 4]
        ) / (12 * dx)
        out[..., 1] = (
            -3 * x[..., 0] - 10 * x[..., 1] + 18 * x[..., 2] - 6 * x[..., 3] + x[..., 4]
        ) / (12 * dx)
        out[..., -1] = (
            25 * x[..., -1] - 48 * x[..., -2] + 36 * x[..., -3] - 16 * x[..., -4] + 3 * x[..., -5]
        ) / (12 * dx)
        out[..., -2] = (
            3 * x[..., -1] + 10 * x[..., -2] - 18 * x[..., -3] + 6 * x[..., -4] - x[..., -5]
        ) / (12 * dx)
    elif nderiv == 2 and order == 2:
        if m < 4:
            raise StencilError("grid too small for order-2 second derivative")
        dx2 = dx * dx
        out[..., 1:-1] = (x[..., 2:] - 2 * x[..., 1:-1] + x[..., :-2]) / dx2
        out[..., 0] = (2 * x[..., 0] - 5 * x[..., 1] + 4 * x[..., 2] - x[..., 3]) / dx2
        out[..., -1] = (2 * x[..., -1] - 5 * x[..., -2] + 4 * x[..., -3] - x[..., -4]) / dx2
    elif nderiv == 2 and order == 4:
        if m < 6:
            raise StencilError("grid too small for order-4 second derivative")
        dx2 = 12 * dx * dx
        out[..., 2:-2] = (
            -x[..., :-4] + 16 * x[..., 1:-3] - 30 * x[..., 2:-2] + 16 * x[..., 3:-1] - x[..., 4:]
        ) / dx2
        out[..., 0] = (
            45 * x[..., 0] - 154 * x[..., 1] + 214 * x[..., 2]
            - 156 * x[..., 3] + 61 * x[..., 4] - 10 * x[..., 5]
        ) / dx2
        out[..., 1] = (
            10 * x[..., 0] - 15 * x[..., 1] - 4 * x[..., 2]
            + 14 * x[..., 3] - 6 * x[..., 4] + x[..., 5]
        ) / dx2
        out[..., -1] = (
            45 * x[..., -1] - 154 * x[..., -2] + 214 * x[..., -3]
            - 156 * x[..., -4] + 61 * x[..., -5] - 10 * x[..., -6]
        ) / dx2
        out[..., -2] = (
            10 * x[..., -1] - 15 * x[..., -2] - 4 * x[..., -3]
            + 14 * x[..., -4] - 6 * x[..., -5] + x[..., -6]
        ) / dx2
    else:
        raise StencilError(f"unsupported stencil: order={order}, derivative={nderiv}")
    return np.moveaxis(out, -1, axis)


def _axis_diff(values, grid, axis_k, order, nderiv, closure):
    offset = values.ndim - grid.dim
    if closure == "zero":
        return _diff_axis_zero(values, offset + axis_k - 1, grid.spacing, order, nderiv)
    if closure == "onesided":
        return _diff_axis(values, offset + axis_k - 1, grid.spacing, order, nderiv)
    raise StencilError(f"unknown closure {closure!r}")


def diff_values(values: np.ndarray, grid: Grid, axis_k: int, order: int = 4,
                closure: str = "zero") -> np.ndarray:
    """First derivative along spatial axis k (1-based) of raw component values."""
    if not 1 <= axis_k <= grid.dim:
        raise StencilError(f"axis {axis_k} out of range for dimension {grid.dim}")
    return _axis_diff(values, grid, axis_k, order, 1, closure)


def diff2_values(values: np.ndarray, grid: Grid, i: int, j: int, order: int = 4,
                 closure: str = "zero") -> np.ndarray:
    """Second derivative along spatial axes i, j (1-based) of raw values."""
    for k in (i, j):
        if not 1 <= k <= grid.dim:
            raise StencilError(f"axis {k} out of range for dimension {grid.dim}")
    if i == j:
        return _axis_diff(values, grid, i, order, 2, closure)
    tmp = _axis_diff(values, grid, j, order, 1, closure)
    return _axis_diff(tmp, grid, i, order, 1, closure)


def laplacian_values(values: np.ndarray, grid: Grid, order: int = 4, split: bool = False,
                     closure: str = "zero") -> np.ndarray:
    """Sum of second derivatives over all axes.

    `split=True` composes two first-derivative stencils per axis instead of a
    dedicated second-derivative stencil; with the zero closure that form is
    the exact adjoint of the gradient, so the semi-discrete wave energy is
    conserved to roundoff.
    """
    out = np.zeros_like(values)
    for k in range(1, grid.dim + 1):
        if split:
            tmp = _axis_diff(values, grid, k, order, 1, closure)
            out += _axis_diff(tmp, grid, k, order, 1, closure)
        else:
            out += _axis_diff(values, grid, k, order, 2, closure)
    return out


def partial_derivative(f: Field, axis_k: int, accuracy: int = 4,
                       closure: str = "onesided") -> Field:
    """Central-difference d/dx_k of a field, order `accuracy` in dx.

    The default one-sided closure keeps the operator exact on polynomials at
    every grid point; compact fields may use closure="zero".
    """
    return Field(f.grid, diff_values(f.values, f.grid, axis_k, accuracy, closure),
                 f.time, check=False)


def second_derivative(f: Field, i: int, j: int, accuracy: int = 4,
                      closure: str = "onesided") -> Field:
    return Field(f.grid, diff2_values(f.values, f.grid, i, j, accuracy, closure),
                 f.time, check=False)


def laplacian(f: Field, accuracy: int = 4, closure: str = "onesided") -> Field:
    return Field(f.grid, laplacian_values(f.values, f.grid, accuracy, closure=closure),
                 f.time, check=False)


def radial_coordinate(grid: Grid) -> Field:
    """r = |x| as a single-component field (time 0)."""
    return Field(grid, grid.radius().copy(), 0.0, check=False)


def lorentz_weight(grid: Grid, c: float, t: float) -> Field:
    """The weight <c t - r> = sqrt(1 + (c t - r)^2)."""
    return Field(grid, lorentz_weight_values(grid, c, t), t, check=False)


def lorentz_weight_values(grid: Grid, c: float, t: float) -> np.ndarray:
    arg = c * t - grid.radius()
    return np.sqrt(1.0 + arg * arg)


def radial_derivative_values(values: np.ndarray, grid: Grid, order: int = 4,
                             closure: str = "zero") -> np.ndarray:
    """(x/|x|) . grad f, with the origin cell set to the mean of its 2n neighbors.

    The origin value of x.grad(f)/r is formally 0/0; the neighbor-average rule
    is the deterministic convention used throughout (one cell is measure
    negligible in every integral this enters).
    """
    r = grid.radius()
    num = np.zeros_like(values)
    for k in range(1, grid.dim + 1):
        num += grid.coordinate(k) * diff_values(values, grid, k, order, closure)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / r
    center = (grid.points - 1) // 2
    idx = (center,) * grid.dim
    neighbors = []
    for k in range(grid.dim):
        for shift in (-1, 1):
            nidx = list(idx)
            nidx[k] += shift
            neighbors.append(out[(...,) + tuple(nidx)])
    out[(...,) + idx] = sum(neighbors) / (2 * grid.dim)
    return out


def radial_derivative(f: Field, accuracy: int = 4, closure: str = "zero") -> Field:
    return Field(f.grid, radial_derivative_values(f.values, f.grid, accuracy, closure),
                 f.time, check=False)


# ---------------------------------------------------------------------------
# Quadrature and support diagnostics.


def integrate(values: np.ndarray, grid: Grid) -> float:
    """Midpoint quadrature sum(values) * dx^n (pairwise summation)."""
    return float(np.sum(values)) * grid.cell_volume


def l2_norm(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(np.sum(np.square(values)) * grid.cell_volume))


def support_radius(f: Field, threshold: float = 1e-12) -> float:
    """Largest |x| over grid points where any component exceeds threshold."""
    mask = np.any(np.abs(f.values) > threshold, axis=0)
    if not mask.any():
        return 0.0
    return float(np.max(f.grid.radius()[mask]))


def boundary_layer_max(f: Field, width: int) -> float:
    """Max |value| over the outermost `width` cells in any axis."""
    m = f.grid.points
    interior = np.zeros(f.grid.shape, dtype=bool)
    sl = (slice(width, m - width),) * f.grid.dim
    interior[sl] = True
    vals = np.abs(f.values)
    return float(np.max(np.where(interior[np.newaxis], 0.0, vals)))


# ---------------------------------------------------------------------------
# Serialization: binary (.bin) and CSV (.csv) layouts, both bit-exact.

_MAGIC = b"MSWF"


def save_field(f: Field, path: str) -> None:
    path = str(path)
    if path.endswith(".csv"):
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("n,m,R,N,t\n")
            fh.write(
                f"{f.grid.dim},{f.grid.points},{f.grid.half_width!r},{f.components},{f.time!r}\n"
            )
            flat = f.values.ravel(order="C")
            for val in flat:
                fh.write(f"{float(val)!r}\n")
    else:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<iiqdd", f.grid.dim, f.components, f.grid.points,
                                 f.grid.half_width, f.time))
            fh.write(f.values.astype("<f8").tobytes(order="C"))


def load_field(path: str) -> Field:
    path = str(path)
    if path.endswith(".csv"):
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().strip().split(",")
            if header != ["n", "m", "R", "N", "t"]:
                raise ValueError(f"bad field CSV header in {path}")
            n_s, m_s, r_s, nc_s, t_s = fh.readline().strip().split(",")
            grid = Grid(int(n_s), float(r_s), int(m_s))
            ncomp = int(nc_s)
            data = np.array([float(line) for line in fh if line.strip()], dtype=np.float64)
        values = data.reshape((ncomp,) + grid.shape)
        return Field(grid, values, float(t_s))
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a field file: {path}")
        dim, ncomp, m, half_width, t = struct.unpack("<iiqdd", fh.read(struct.calcsize("<iiqdd")))
        grid = Grid(dim, half_width, m)
        count = ncomp * grid.points**dim
        values = np.frombuffer(fh.read(count * 8), dtype="<f8").reshape((ncomp,) + grid.shape)
    return Field(grid, values.copy(), t)
