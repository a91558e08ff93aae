"""Exact polynomial calculus in (t, x1..xn).

Every vector-field generator maps polynomials to polynomials, so commutator
identities can be checked without any discretization noise: apply both sides
symbolically, compare coefficients, and sample on the grid only at the end.
This module is the oracle engine for the operator-identity test suite.
"""

from __future__ import annotations

import numpy as np

from .grid import Field, Grid, StateSnapshot
from .words import Generator, OperatorWord

__all__ = ["SpaceTimePolynomial", "PolynomialState", "monomial", "coordinate"]


class SpaceTimePolynomial:
    """Polynomial in the n+1 variables (t, x_1, ..., x_n).

    Coefficients are floats keyed by exponent tuples of length n+1 with the
    time exponent first.  Terms with zero coefficient are pruned.
    """

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs: dict | None = None):
        self.dim = dim
        self.coeffs = {}
        if coeffs:
            for exp, c in coeffs.items():
                if len(exp) != dim + 1:
                    raise ValueError(f"exponent {exp} has wrong length for dim {dim}")
                if c != 0.0:
                    self.coeffs[tuple(exp)] = self.coeffs.get(tuple(exp), 0.0) + float(c)
        self.coeffs = {e: c for e, c in self.coeffs.items() if c != 0.0}

    # -- algebra ------------------------------------------------------------

    def _binary(self, other, sign: float):
        if np.isscalar(other):
            other = monomial(self.dim, 0, (0,) * self.dim, float(other))
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0.0) + sign * c
        return SpaceTimePolynomial(self.dim, out)

    def __add__(self, other):
        return self._binary(other, 1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, other):
        if np.isscalar(other):
            return SpaceTimePolynomial(
                self.dim, {e: c * float(other) for e, c in self.coeffs.items()}
            )
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return SpaceTimePolynomial(self.dim, out)

    __rmul__ = __mul__

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.coeffs.values())

    def max_coeff_diff(self, other) -> float:
        diff = self - other
        return max((abs(c) for c in diff.coeffs.values()), default=0.0)

    # -- calculus -----------------------------------------------------------

    def partial(self, alpha: int) -> "SpaceTimePolynomial":
        """d/dx_alpha with alpha = 0 the time variable."""
        if not 0 <= alpha <= self.dim:
            raise ValueError(f"alpha {alpha} out of range")
        out = {}
        for e, c in self.coeffs.items():
            if e[alpha] == 0:
                continue
            new = list(e)
            new[alpha] -= 1
            out[tuple(new)] = out.get(tuple(new), 0.0) + c * e[alpha]
        return SpaceTimePolynomial(self.dim, out)

    def times_variable(self, alpha: int) -> "SpaceTimePolynomial":
        out = {}
        for e, c in self.coeffs.items():
            new = list(e)
            new[alpha] += 1
            out[tuple(new)] = c
        return SpaceTimePolynomial(self.dim, out)

    def apply(self, gen: Generator) -> "SpaceTimePolynomial":
        gen.validate_dimension(self.dim)
        if gen.kind == "space":
            return self.partial(gen.i)
        if gen.kind == "time":
            return self.partial(0)
        if gen.kind == "rotation":
            return (
                self.partial(gen.j).times_variable(gen.i)
                - self.partial(gen.i).times_variable(gen.j)
            )
        if gen.kind == "scaling":
            out = self.partial(0).times_variable(0)
            for k in range(1, self.dim + 1):
                out = out + self.partial(k).times_variable(k)
            return out
        if gen.kind == "lorentz":
            return self.partial(0).times_variable(gen.i) + self.partial(gen.i).times_variable(0)
        # scaled_lorentz: (1/c) x_k dt + c t d_k
        return (
            self.partial(0).times_variable(gen.i) * (1.0 / gen.speed)
            + self.partial(gen.i).times_variable(0) * gen.speed
        )

    def apply_word(self, word: OperatorWord) -> "SpaceTimePolynomial":
        out = self
        for gen in reversed(word.gens):
            out = out.apply(gen)
        return out

    def dalembertian(self, c: float) -> "SpaceTimePolynomial":
        out = self.partial(0).partial(0)
        for k in range(1, self.dim + 1):
            out = out - self.partial(k).partial(k) * (c * c)
        return out

    def evaluate(self, t: float, grid: Grid) -> np.ndarray:
        coords = [grid.coordinate(k) for k in range(1, grid.dim + 1)]
        out = np.zeros(grid.shape)
        for e, c in self.coeffs.items():
            term = np.full(grid.shape, c * t ** e[0])
            for k in range(grid.dim):
                if e[k + 1]:
                    term = term * coords[k] ** e[k + 1]
            out += term
        return out

    def __repr__(self):
        if not self.coeffs:
            return "SpaceTimePolynomial(0)"
        names = ["t"] + [f"x{k}" for k in range(1, self.dim + 1)]
        parts = []
        for e, c in sorted(self.coeffs.items()):
            mono = "*".join(f"{n}^{p}" for n, p in zip(names, e) if p) or "1"
            parts.append(f"{c:+g}*{mono}")
        return "SpaceTimePolynomial(" + " ".join(parts) + ")"


def monomial(dim: int, t_power: int, x_powers, coeff: float = 1.0) -> SpaceTimePolynomial:
    return SpaceTimePolynomial(dim, {(t_power, *x_powers): coeff})


def coordinate(dim: int, alpha: int) -> SpaceTimePolynomial:
    """The coordinate x_alpha as a polynomial (alpha = 0 is t)."""
    exp = [0] * (dim + 1)
    exp[alpha] = 1
    return SpaceTimePolynomial(dim, {tuple(exp): 1.0})


class PolynomialState:
    """A vector of space-time polynomials, samplable as grid snapshots."""

    def __init__(self, components: list):
        if not components:
            raise ValueError("need at least one component")
        self.components = list(components)
        self.dim = components[0].dim
        if any(p.dim != self.dim for p in components):
            raise ValueError("components have mixed dimensions")

    def __len__(self):
        return len(self.components)

    def apply_word(self, word: OperatorWord) -> "PolynomialState":
        return PolynomialState([p.apply_word(word) for p in self.components])

    def map(self, fn) -> "PolynomialState":
        return PolynomialState([fn(p) for p in self.components])

    def snapshot(self, t: float, grid: Grid) -> StateSnapshot:
        u = np.stack([p.evaluate(t, grid) for p in self.components])
        v = np.stack([p.partial(0).evaluate(t, grid) for p in self.components])
        return StateSnapshot(Field(grid, u, t, check=False), Field(grid, v, t, check=False))

    def second_time_derivative(self, t: float, grid: Grid) -> Field:
        utt = np.stack([p.partial(0).partial(0).evaluate(t, grid) for p in self.components])
        return Field(grid, utt, t, check=False)

    def evaluate(self, t: float, grid: Grid) -> Field:
        vals = np.stack([p.evaluate(t, grid) for p in self.components])
        return Field(grid, vals, t, check=False)
