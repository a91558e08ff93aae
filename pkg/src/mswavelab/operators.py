"""Applying operator words to states, and the commutator calculus.

Grid snapshots only carry the 2-jet (u, du/dt, optionally d2u/dt2), so a
word is applied by propagating that jet: spatial derivatives and rotations
commute past d/dt, the scaling S = t dt + x.grad consumes one time slot.
This is exactly why the energy words allow at most one S.

Commutator identities are verified on space-time polynomial states where
every generator acts exactly (see `polynomials`); verifying them with grid
jets would already assume the commutation relations under test.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid, StateSnapshot, diff_values
from .polynomials import PolynomialState
from .words import Generator, OperatorWord, WordError, rotation_pairs

__all__ = [
    "MissingTimeDerivative",
    "Dalembertian",
    "apply_word",
    "apply_word_pair",
    "scan_energy_words",
    "commutator_defect",
    "commutator_defect_field",
    "expand_mixed_commutator",
    "mixed_commutator_residual",
    "box_word_commutator_parts",
    "structure_bracket",
    "ExpansionTerm",
]


class MissingTimeDerivative(RuntimeError):
    """A word needed a time derivative the snapshot jet does not carry."""


@dataclass(frozen=True)
class Dalembertian:
    """Marker for the wave operator dt^2 - c^2 Laplacian."""

    speed: float


# ---------------------------------------------------------------------------
# Jet propagation on raw arrays.  A jet is (f, f_t, f_tt), trailing entries
# possibly None once a time slot has been consumed.


def _jet_apply(jet, gen: Generator, grid: Grid, t: float, order: int, closure: str):
    f, ft, ftt = jet

    def d(arr, k):
        return None if arr is None else diff_values(arr, grid, k, order, closure)

    if gen.kind == "space":
        return d(f, gen.i), d(ft, gen.i), d(ftt, gen.i)
    if gen.kind == "rotation":
        xi = grid.coordinate(gen.i)
        xj = grid.coordinate(gen.j)

        def rot(arr):
            if arr is None:
                return None
            return xi * diff_values(arr, grid, gen.j, order, closure) - xj * diff_values(arr, grid, gen.i, order, closure)

        return rot(f), rot(ft), rot(ftt)
    if gen.kind == "time":
        return ft, ftt, None
    if gen.kind == "scaling":
        grad_f = _x_dot_grad(f, grid, order, closure)
        grad_ft = _x_dot_grad(ft, grid, order, closure)
        new_f = None if (ft is None or grad_f is None) else t * ft + grad_f
        if ft is None or grad_ft is None:
            new_ft = None
        elif t == 0.0:
            new_ft = ft + grad_ft
        elif ftt is None:
            new_ft = None
        else:
            new_ft = ft + t * ftt + grad_ft
        return new_f, new_ft, None
    if gen.kind in ("lorentz", "scaled_lorentz"):
        xk = grid.coordinate(gen.i)
        a = 1.0 / gen.speed if gen.kind == "scaled_lorentz" else 1.0
        b = gen.speed if gen.kind == "scaled_lorentz" else 1.0
        dk_f = d(f, gen.i)
        dk_ft = d(ft, gen.i)
        new_f = None if ft is None else a * xk * ft + b * t * dk_f
        if ftt is None or dk_ft is None:
            new_ft = None
        else:
            new_ft = a * xk * ftt + b * dk_f + b * t * dk_ft
        return new_f, new_ft, None
    raise WordError(f"cannot apply generator {gen.to_text()!r} to a snapshot")


def _x_dot_grad(arr, grid: Grid, order: int, closure: str = "zero"):
    if arr is None:
        return None
    out = grid.coordinate(1) * diff_values(arr, grid, 1, order, closure)
    for k in range(2, grid.dim + 1):
        out = out + grid.coordinate(k) * diff_values(arr, grid, k, order, closure)
    return out


def _word_jet(word: OperatorWord, s: StateSnapshot, utt_source, order: int, closure: str):
    if word.dim != s.grid.dim:
        raise WordError("word dimension does not match the snapshot grid")
    jet = (s.u.values, s.v.values, None if utt_source is None else utt_source.values)
    t = s.time
    for gen in reversed(word.gens):
        jet = _jet_apply(jet, gen, s.grid, t, order, closure)
    return jet


def apply_word(word: OperatorWord, s: StateSnapshot, utt_source: Field | None = None,
               accuracy: int = 4, closure: str = "zero") -> Field:
    """The field Z^a u for a word Z^a applied to the snapshot."""
    jet = _word_jet(word, s, utt_source, accuracy, closure)
    if jet[0] is None:
        raise MissingTimeDerivative(
            f"word {word.to_text()!r} needs d2u/dt2; pass utt_source (see recover_utt)"
        )
    return Field(s.grid, jet[0], s.time, check=False)


def apply_word_pair(word: OperatorWord, s: StateSnapshot, utt_source: Field | None = None,
                    accuracy: int = 4, closure: str = "zero") -> tuple:
    """(Z^a u, d/dt Z^a u) as fields; the pair feeding the base energy."""
    jet = _word_jet(word, s, utt_source, accuracy, closure)
    if jet[0] is None or jet[1] is None:
        raise MissingTimeDerivative(
            f"word {word.to_text()!r} exceeds the time jet of the snapshot"
            " (at most one S, supply utt_source at t > 0)"
        )
    return (
        Field(s.grid, jet[0], s.time, check=False),
        Field(s.grid, jet[1], s.time, check=False),
    )


def scan_energy_words(s: StateSnapshot, utt: Field | None, kappa: int, visit,
                      include_scaling: bool = True, accuracy: int = 4,
                      closure: str = "zero") -> None:
    """Visit every canonical energy word of order <= kappa - 1 exactly once.

    ``visit((a, b, d), wu, wv)`` receives the multi-index and the raw arrays
    of the pair (Z^a u, d/dt Z^a u).  Words are generated incrementally along
    the lattice (each word is one generator applied to its parent), keeping
    memory bounded by the recursion depth.
    """
    grid = s.grid
    dim = grid.dim
    rots = rotation_pairs(dim)
    budget = kappa - 1
    t = s.time
    u, v = s.u.values, s.v.values

    def d1(arr, k):
        return diff_values(arr, grid, k, accuracy, closure)

    def rot_pair(wu, wv, i, j):
        xi, xj = grid.coordinate(i), grid.coordinate(j)
        return (
            xi * d1(wu, j) - xj * d1(wu, i),
            xi * d1(wv, j) - xj * d1(wv, i),
        )

    def rec_partials(wu, wv, a, b, d, used, min_axis):
        if used == budget:
            return
        for k in range(min_axis, dim):
            na = a[:k] + (a[k] + 1,) + a[k + 1:]
            nwu, nwv = d1(wu, k + 1), d1(wv, k + 1)
            visit((na, b, d), nwu, nwv)
            rec_partials(nwu, nwv, na, b, d, used + 1, k)

    def rec_rotations(wu, wv, b, d, used, min_rot):
        zeros_a = (0,) * dim
        rec_partials(wu, wv, zeros_a, b, d, used, 0)
        if used == budget:
            return
        for ridx in range(min_rot, len(rots)):
            i, j = rots[ridx]
            nb = b[:ridx] + (b[ridx] + 1,) + b[ridx + 1:]
            nwu, nwv = rot_pair(wu, wv, i, j)
            visit((zeros_a, nb, d), nwu, nwv)
            rec_rotations(nwu, nwv, nb, d, used + 1, ridx)

    zeros_a = (0,) * dim
    zeros_b = (0,) * len(rots)
    visit((zeros_a, zeros_b, 0), u, v)
    rec_rotations(u, v, zeros_b, 0, 0, 0)

    if include_scaling and budget >= 1:
        xgrad_u = _x_dot_grad(u, grid, accuracy, closure)
        xgrad_v = _x_dot_grad(v, grid, accuracy, closure)
        su = t * v + xgrad_u
        if t == 0.0:
            sv = v + xgrad_v
        else:
            if utt is None:
                raise MissingTimeDerivative(
                    "scaling words at t > 0 need utt (see recover_utt)"
                )
            sv = v + t * utt.values + xgrad_v
        visit((zeros_a, zeros_b, 1), su, sv)
        rec_rotations(su, sv, zeros_b, 1, 1, 0)


# ---------------------------------------------------------------------------
# Commutator calculus on polynomial states (exact).


def _apply_operator(op, state: PolynomialState):
    if isinstance(op, Dalembertian):
        return state.map(lambda p: p.dalembertian(op.speed))
    if isinstance(op, OperatorWord):
        return state.apply_word(op)
    raise WordError(f"unsupported operator {op!r}")


def commutator_defect(op_a, op_b, state: PolynomialState) -> PolynomialState:
    """A(B state) - B(A state), exactly, on a polynomial state."""
    ab = _apply_operator(op_a, _apply_operator(op_b, state))
    ba = _apply_operator(op_b, _apply_operator(op_a, state))
    return PolynomialState([p - q for p, q in zip(ab.components, ba.components)])


def commutator_defect_field(op_a, op_b, state: PolynomialState, t: float, grid: Grid) -> Field:
    return commutator_defect(op_a, op_b, state).evaluate(t, grid)


@dataclass(frozen=True)
class ExpansionTerm:
    coeff: float
    alpha: int
    delta: int
    word: OperatorWord


def _rotation_partial_bracket(i: int, j: int, k: int):
    """[O_ij, d_k] = -delta_ik d_j + delta_jk d_i (zero when k = 0)."""
    out = []
    if k == i:
        out.append((-1.0, j))
    if k == j:
        out.append((1.0, i))
    return out


def _pair_bracket(gen: Generator, beta: int, gamma: int):
    """[gen, d_beta d_gamma] as a list of (coeff, alpha, delta) pairs."""
    if gen.kind == "space":
        return []
    if gen.kind == "scaling":
        return [(-2.0, beta, gamma)]
    if gen.kind == "rotation":
        out = []
        for coeff, new in _rotation_partial_bracket(gen.i, gen.j, beta):
            out.append((coeff, new, gamma))
        for coeff, new in _rotation_partial_bracket(gen.i, gen.j, gamma):
            out.append((coeff, beta, new))
        return out
    raise WordError("mixed-commutator expansion is defined over the {d, O, S} alphabet")


def expand_mixed_commutator(word: OperatorWord, beta: int, gamma: int) -> list:
    """[Z^a, d_beta d_gamma] as sum of C * d_alpha d_delta Z^b with |b| <= |a| - 1.

    Indices beta, gamma range over 0..n with 0 the time direction.  The input
    word must have order 3 and at most one S; the output words have order at
    most 2 and inherit the canonical ordering.
    """
    if word.order != 3:
        raise WordError("expansion requires a word of order exactly 3")
    if word.s_count > 1:
        raise WordError("expansion requires at most one scaling generator")
    for idx in (beta, gamma):
        if not 0 <= idx <= word.dim:
            raise WordError(f"derivative index {idx} out of range")
    gens = word.gens
    accum = defaultdict(float)
    work = []
    for pos, g in enumerate(gens):
        for coeff, al, de in _pair_bracket(g, beta, gamma):
            work.append((coeff, gens[:pos], al, de, gens[pos + 1:]))
    while work:
        coeff, prefix, al, de, suffix = work.pop()
        if not prefix:
            accum[(min(al, de), max(al, de), suffix)] += coeff
            continue
        p = prefix[-1]
        work.append((coeff, prefix[:-1], al, de, (p,) + suffix))
        for c2, a2, d2 in _pair_bracket(p, al, de):
            work.append((coeff * c2, prefix[:-1], a2, d2, suffix))
    out = []
    for (al, de, suffix), coeff in sorted(accum.items(), key=lambda kv: (kv[0][0], kv[0][1], tuple(g.to_text() for g in kv[0][2]))):
        if coeff != 0.0:
            out.append(ExpansionTerm(coeff, al, de, OperatorWord(word.dim, suffix)))
    return out


def mixed_commutator_residual(word: OperatorWord, beta: int, gamma: int,
                              state: PolynomialState) -> float:
    """Max coefficient mismatch of the expansion applied to a polynomial state."""
    def dd(p, a, b):
        return p.partial(a).partial(b)

    residual = 0.0
    terms = expand_mixed_commutator(word, beta, gamma)
    for p in state.components:
        # [W, D]p = W(Dp) - D(Wp)
        defect = dd(p, beta, gamma).apply_word(word) - dd(p.apply_word(word), beta, gamma)
        rhs = p * 0.0
        for term in terms:
            rhs = rhs + dd(p.apply_word(term.word), term.alpha, term.delta) * term.coeff
        residual = max(residual, defect.max_coeff_diff(rhs))
    return residual


def box_word_commutator_parts(word: OperatorWord, speed: float, state: PolynomialState):
    """([box, Z^a] applied to the state, and its closed form 2 s box Z^(a\\S)).

    The commutator of the d'Alembertian with an energy word is zero when the
    word has no scaling generator and twice the d'Alembertian composed with
    the S-stripped word when it has one.
    """
    box = Dalembertian(speed)
    defect = commutator_defect(box, word, state)
    stripped = OperatorWord(word.dim, tuple(g for g in word.gens if g.kind != "scaling"))
    s = word.s_count
    expected = _apply_operator(box, state.apply_word(stripped)).map(lambda p: p * (2.0 * s))
    return defect, expected


# ---------------------------------------------------------------------------
# Closed-form brackets of the generator algebra, for closure tests.


def structure_bracket(g1: Generator, g2: Generator, dim: int) -> dict:
    """[g1, g2] as a dict {Generator: coefficient} over the algebra basis."""
    out = defaultdict(float)

    def add_rotation(i, j, coeff):
        if i == j or coeff == 0.0:
            return
        if i < j:
            out[Generator.rotation(i, j)] += coeff
        else:
            out[Generator.rotation(j, i)] -= coeff

    k1, k2 = g1.kind, g2.kind
    if "lorentz" in (k1, k2) or "scaled_lorentz" in (k1, k2):
        raise WordError("boost brackets are not part of the energy algebra table")
    commuting = [
        {"space"}, {"time"}, {"scaling"},
        {"space", "time"}, {"rotation", "time"}, {"rotation", "scaling"},
    ]
    if {k1, k2} in commuting:
        return {}
    if k1 == "space" and k2 == "rotation":
        for coeff, new in _rotation_partial_bracket(g2.i, g2.j, g1.i):
            out[Generator.space(new)] -= coeff
    elif k1 == "rotation" and k2 == "space":
        for coeff, new in _rotation_partial_bracket(g1.i, g1.j, g2.i):
            out[Generator.space(new)] += coeff
    elif k1 == "space" and k2 == "scaling":
        out[Generator.space(g1.i)] += 1.0
    elif k1 == "scaling" and k2 == "space":
        out[Generator.space(g2.i)] -= 1.0
    elif k1 == "time" and k2 == "scaling":
        out[Generator.time()] += 1.0
    elif k1 == "scaling" and k2 == "time":
        out[Generator.time()] -= 1.0
    elif k1 == "rotation" and k2 == "rotation":
        i, j = g1.i, g1.j
        k, l = g2.i, g2.j
        # [O_ij, O_kl] = delta_jk O_il - delta_ik O_jl - delta_jl O_ik + delta_il O_jk
        if j == k:
            add_rotation(i, l, 1.0)
        if i == k:
            add_rotation(j, l, -1.0)
        if j == l:
            add_rotation(i, k, -1.0)
        if i == l:
            add_rotation(j, k, 1.0)
    else:
        raise WordError(f"no closed bracket recorded for ({g1.to_text()}, {g2.to_text()})")
    return {g: c for g, c in out.items() if c != 0.0}
