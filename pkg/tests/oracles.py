"""Independent oracles for the test suite.

These deliberately avoid the package's quadrature and word machinery:
exact moment integrals over balls for polynomial integrands, dense 1D
radial quadrature for radial profiles, and brute-force enumerations.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def ball_monomial_integral(exponents, radius: float = 1.0) -> float:
    """Exact integral of x^alpha over the ball |x| < radius.

    Vanishes unless every exponent is even; otherwise
    prod Gamma((a_i+1)/2) / Gamma((|a|+n)/2 + 1) * radius^(|a|+n).
    """
    if any(e % 2 for e in exponents):
        return 0.0
    n = len(exponents)
    total = sum(exponents)
    num = math.prod(math.gamma((e + 1) / 2.0) for e in exponents)
    return num / math.gamma((total + n) / 2.0 + 1.0) * radius ** (total + n)


def ball_polynomial_integral(coeffs: dict, radius: float = 1.0) -> float:
    """Integral over the ball of a polynomial given as {exponent tuple: coeff}."""
    return sum(c * ball_monomial_integral(e, radius) for e, c in coeffs.items())


def poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return out


def poly_scale(a: dict, s: float) -> dict:
    return {e: c * s for e, c in a.items()}


def poly_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0.0) + c
    return out


def poly_diff(a: dict, axis: int) -> dict:
    out: dict = {}
    for e, c in a.items():
        if e[axis] == 0:
            continue
        newe = list(e)
        newe[axis] -= 1
        out[tuple(newe)] = out.get(tuple(newe), 0.0) + c * e[axis]
    return out


def spatial_bump_poly(dim: int, power: int, support: float = 1.0) -> dict:
    """(1 - |x/support|^2)^power as an exponent dict (valid inside the ball)."""
    base = {(0,) * dim: 1.0}
    r2 = {}
    for k in range(dim):
        e = [0] * dim
        e[k] = 2
        r2[tuple(e)] = -1.0 / support**2
    shifted = poly_add(base, r2)
    out = {(0,) * dim: 1.0}
    for _ in range(power):
        out = poly_mul(out, shifted)
    return out


def radial_quadrature(fn, r_max: float, dim: int, n: int = 20001) -> float:
    """integral of fn(r) r^(n-1) |S^(n-1)| dr by composite trapezoid."""
    r = np.linspace(0.0, r_max, n)
    sphere = 2.0 * math.pi if dim == 2 else 4.0 * math.pi
    vals = fn(r) * r ** (dim - 1)
    return float(np.trapezoid(vals, r)) * sphere


def brute_force_index_count(dim: int, kappa: int) -> int:
    """#{(a, b, d): |a|+|b|+d <= kappa-1, d <= 1} by direct scan."""
    n_rot = {2: 1, 3: 3}[dim]
    budget = kappa - 1
    count = 0
    for combo in itertools.product(range(budget + 1), repeat=dim + n_rot):
        for d in (0, 1):
            if sum(combo) + d <= budget:
                count += 1
    return count


def richardson_order(errors, factors) -> float:
    """Least-squares slope of log(error) against log(resolution factor)."""
    x = np.log(np.asarray(factors, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)
