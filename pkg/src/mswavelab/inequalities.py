"""Numerical verification of the weighted Sobolev, trace, and energy lemmas.

Each inequality is evaluated exactly as written: both sides are computed
with the norms module on a corpus of compactly supported test states, and
the report records the ratio left/right.  Kinds with an explicit constant
(Strauss sqrt(2), generalized Strauss sqrt(p), the L4 inequality in the
constant-4 form, the L3 Gagliardo-Nirenberg case sqrt(2)) are pass/fail
against that constant with quadrature slack; the others are existential,
so only finiteness and refinement stability are asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Field,
    Grid,
    StateSnapshot,
    diff2_values,
    diff_values,
    l2_norm,
    laplacian_values,
    lorentz_weight_values,
    radial_derivative_values,
)
from .norms import (
    auxiliary_m2_pair,
    auxiliary_m4,
    energy_e1_pair,
    generalized_energy,
    lp_norm,
    mixed_radial_angular,
)
from .operators import apply_word_pair
from .solver import bump_profile
from .systems import SystemSpec
from .words import OperatorWord, enumerate_words

__all__ = [
    "InequalityReport",
    "ConstantEstimate",
    "EXPLICIT_KINDS",
    "EXISTENTIAL_KINDS",
    "verify",
    "estimate_constant",
    "scalar_worst_ratios",
    "known_constant",
    "gen_strauss_exponents",
    "make_scalar_corpus",
    "make_state_corpus",
    "make_triple_corpus",
    "check_pointwise_recovery",
    "check_source_bound",
    "check_norm_ratio_trend",
    "SourceBoundReport",
    "NormRatioReport",
]

EXPLICIT_KINDS = ("strauss", "gen_strauss", "ladyzhenskaya", "gn_l3")
EXISTENTIAL_KINDS = (
    "trace_2d",
    "weighted_l4_2d",
    "weighted_l3_3d",
    "weighted_l6_3d",
    "mixed_rl_3d",
    "pointwise_2d",
    "pointwise_3d",
    "rweight_linf",
    "klainerman_sideris",
)


@dataclass(frozen=True)
class InequalityReport:
    kind: str
    lhs: float
    rhs: float
    known_constant: float | None
    item_id: str
    params: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return self.rhs == 0.0 and self.lhs == 0.0

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs

    def passed(self, tol: float = 0.02) -> bool:
        if self.known_constant is None:
            return math.isfinite(self.ratio)
        return self.degenerate or self.ratio <= self.known_constant * (1.0 + tol)


def gen_strauss_exponents(p: float | None = None, q: float | None = None) -> tuple:
    """Resolve (p, q) on the constraint 2/p = 1/2 + 1/q (q = inf gives p = 4)."""
    if p is None and q is None:
        raise ValueError("give p or q")
    if p is None:
        inv_q = 0.0 if math.isinf(q) else 1.0 / q
        p = 2.0 / (0.5 + inv_q)
    elif q is None:
        inv_q = 2.0 / p - 0.5
        q = math.inf if inv_q <= 0.0 else 1.0 / inv_q
    if not 2.0 <= q or not 2.0 <= p <= 4.0:
        raise ValueError(f"exponents (p={p}, q={q}) outside the admissible range")
    return float(p), float(q)


def known_constant(kind: str, params: dict | None = None) -> float | None:
    params = params or {}
    if kind == "strauss":
        return math.sqrt(2.0)
    if kind == "gen_strauss":
        return math.sqrt(params["p"])
    if kind == "ladyzhenskaya":
        return 1.0
    if kind == "gn_l3":
        return math.sqrt(2.0)
    return None


# ---------------------------------------------------------------------------
# Building blocks over snapshots.


def _first_derivative(s: StateSnapshot, l: int, alpha: int, accuracy: int) -> np.ndarray:
    if alpha == 0:
        return s.v.values[l]
    return diff_values(s.u.values[l], s.grid, alpha, accuracy)


def _n1(s: StateSnapshot, speeds, accuracy: int) -> float:
    return math.sqrt(energy_e1_pair(s.u.values, s.v.values, s.grid, speeds, accuracy))


def _word_state_n1(s: StateSnapshot, word: OperatorWord, speeds, accuracy: int) -> float:
    wu, wv = apply_word_pair(word, s, accuracy=accuracy)
    return math.sqrt(energy_e1_pair(wu.values, wv.values, s.grid, speeds, accuracy))


def _word_state_m2(s: StateSnapshot, word: OperatorWord, speeds, accuracy: int) -> float:
    wu, wv = apply_word_pair(word, s, accuracy=accuracy)
    return auxiliary_m2_pair(wu.values, wv.values, s.grid, s.time, speeds, accuracy)


def _partial_words(dim: int, order: int) -> list:
    out = []
    for w in enumerate_words(dim, order + 1):
        a, b, d = w.multi_index()
        if sum(b) == 0 and d == 0 and sum(a) == order:
            out.append(w)
    return out


def _zbar_words(dim: int, max_order: int, exact: int | None = None) -> list:
    out = []
    for w in enumerate_words(dim, max_order + 1):
        a, b, d = w.multi_index()
        if d == 0 and (sum(a) + sum(b) == exact if exact is not None else sum(a) + sum(b) <= max_order):
            out.append(w)
    return out


def _half_weight(grid: Grid, c: float, t: float) -> np.ndarray:
    return np.sqrt(lorentz_weight_values(grid, c, t))


# ---------------------------------------------------------------------------
# verify() dispatch.


def verify(kind: str, item, speeds=(1.0,), p: float | None = None, q: float | None = None,
           utt: Field | None = None, item_id: str = "item", accuracy: int = 4) -> InequalityReport:
    """Compute both sides of an inequality on one corpus item.

    Scalar kinds (strauss, gen_strauss, ladyzhenskaya, gn_l3) take a Field;
    the others take a StateSnapshot whose time and speeds set the weights.
    The Klainerman-Sideris kind additionally needs utt.
    """
    params: dict = {}
    if kind in ("strauss", "gen_strauss", "ladyzhenskaya", "gn_l3"):
        f = item if isinstance(item, Field) else item.u
        grid = f.grid
        phi = f.values[0]
        if kind == "ladyzhenskaya":
            if grid.dim != 2:
                raise ValueError("ladyzhenskaya is the 2D inequality")
            grad_sq = sum(
                l2_norm(diff_values(phi, grid, k, accuracy), grid) ** 2
                for k in range(1, 3)
            )
            lhs = lp_norm(phi, grid, 4.0) ** 4
            rhs = 4.0 * l2_norm(phi, grid) ** 2 * grad_sq
        elif kind == "gn_l3":
            if grid.dim != 3:
                raise ValueError("gn_l3 is the 3D inequality")
            grad = math.sqrt(sum(
                l2_norm(diff_values(phi, grid, k, accuracy), grid) ** 2
                for k in range(1, 4)
            ))
            lhs = lp_norm(phi, grid, 3.0)
            rhs = math.sqrt(l2_norm(phi, grid)) * math.sqrt(grad)
        else:
            half_power = (grid.dim - 1) / 2.0
            dr = l2_norm(radial_derivative_values(phi, grid, accuracy), grid)
            if kind == "strauss":
                inner_p = 2.0
                rhs = math.sqrt(dr) * math.sqrt(l2_norm(phi, grid))
            else:
                pp, qq = gen_strauss_exponents(p, q)
                params = {"p": pp, "q": qq}
                inner_p = pp
                mixed_q = mixed_radial_angular(f, "l2", qq)
                rhs = math.sqrt(dr) * math.sqrt(mixed_q)
            lhs = mixed_radial_angular(
                f, "sup", inner_p, radial_weight=lambda r: r**half_power
            )
        return InequalityReport(kind, lhs, rhs, known_constant(kind, params), item_id, params)

    s: StateSnapshot = item
    grid = s.grid
    t = s.time
    n = grid.dim
    n_comp = s.components
    if kind == "klainerman_sideris":
        if utt is None:
            raise ValueError("klainerman_sideris needs utt")
        lhs = auxiliary_m2_pair(s.u.values, s.v.values, grid, t, speeds, accuracy)
        n2 = generalized_energy(s, speeds, 2, utt=utt, accuracy=accuracy)
        source = 0.0
        for l, c in enumerate(speeds):
            box = utt.values[l] - c * c * laplacian_values(s.u.values[l], grid, accuracy)
            source += t * l2_norm(box, grid)
        rhs = n2 + source
        return InequalityReport(kind, lhs, rhs, None, item_id)

    n1 = _n1(s, speeds, accuracy)
    m2 = auxiliary_m2_pair(s.u.values, s.v.values, grid, t, speeds, accuracy)

    def max_over_components(fn) -> float:
        worst = 0.0
        for l in range(n_comp):
            for alpha in range(n + 1):
                worst = max(worst, fn(l, alpha, _first_derivative(s, l, alpha, accuracy)))
        return worst

    if kind == "trace_2d":
        if n != 2:
            raise ValueError("trace_2d is the 2D inequality")
        lhs = max_over_components(lambda l, a, arr: mixed_radial_angular(
            Field(grid, arr, t, check=False), "sup", 2.0, radial_weight=np.sqrt))
        sum_first = sum(_word_state_n1(s, w, speeds, accuracy) for w in _partial_words(2, 1))
        rhs = math.sqrt(n1) * math.sqrt(sum_first)
    elif kind in ("weighted_l4_2d", "weighted_l3_3d"):
        expect_dim, lp = (2, 4.0) if kind == "weighted_l4_2d" else (3, 3.0)
        if n != expect_dim:
            raise ValueError(f"{kind} needs dimension {expect_dim}")
        lhs = max_over_components(lambda l, a, arr: lp_norm(
            _half_weight(grid, speeds[l], t) * arr, grid, lp))
        rhs = math.sqrt(n1) * math.sqrt(n1 + m2)
    elif kind == "weighted_l6_3d":
        if n != 3:
            raise ValueError("weighted_l6_3d is the 3D inequality")
        lhs = max_over_components(lambda l, a, arr: lp_norm(
            lorentz_weight_values(grid, speeds[l], t) * arr, grid, 6.0))
        rhs = n1 + m2
    elif kind == "mixed_rl_3d":
        if n != 3:
            raise ValueError("mixed_rl_3d is the 3D inequality")
        pp = 3.0 if p is None else float(p)
        if not 2.0 <= pp < 4.0:
            raise ValueError("mixed_rl_3d needs 2 <= p < 4")
        params = {"p": pp}
        lhs = max_over_components(lambda l, a, arr: mixed_radial_angular(
            Field(grid, arr, t, check=False), "sup", pp, radial_weight=lambda r: r))
        rhs = sum(_word_state_n1(s, w, speeds, accuracy) for w in _zbar_words(3, 1))
    elif kind in ("pointwise_2d", "pointwise_3d"):
        expect_dim, power = (2, 0.5) if kind == "pointwise_2d" else (3, 1.0)
        if n != expect_dim:
            raise ValueError(f"{kind} needs dimension {expect_dim}")
        lhs = max_over_components(lambda l, a, arr: float(np.max(
            lorentz_weight_values(grid, speeds[l], t) ** power * np.abs(arr))))
        words = _partial_words(n, 0) + _partial_words(n, 1)
        sum_n1 = sum(_word_state_n1(s, w, speeds, accuracy) for w in words)
        sum_m2 = sum(_word_state_m2(s, w, speeds, accuracy) for w in words)
        if kind == "pointwise_2d":
            rhs = math.sqrt(sum_n1) * math.sqrt(sum_n1 + sum_m2)
        else:
            rhs = sum_n1 + sum_m2
    elif kind == "rweight_linf":
        r_pow = grid.radius() ** ((n - 1) / 2.0)
        lhs = max_over_components(lambda l, a, arr: float(np.max(r_pow * np.abs(arr))))
        rhs = sum(_word_state_n1(s, w, speeds, accuracy) for w in _zbar_words(n, 2))
    else:
        raise ValueError(f"unknown inequality kind {kind!r}")
    return InequalityReport(kind, lhs, rhs, known_constant(kind, params), item_id, params)


@dataclass(frozen=True)
class ConstantEstimate:
    kind: str
    value: float
    argmax_id: str
    reports: tuple

    @property
    def known_constant(self) -> float | None:
        for r in self.reports:
            return r.known_constant
        return None


def scalar_worst_ratios(grid: Grid, size: int, seed: int, gen_pairs=((4.0, math.inf), (2.5, None)),
                        chunk: int = 20, accuracy: int = 4) -> dict:
    """Worst ratios of all scalar trace-family kinds over a streamed corpus.

    Generates the same corpus as `make_scalar_corpus` chunk by chunk, shares
    the shell samples and the radial derivative across kinds per item, and
    never holds more than `chunk` fields.  Returns {kind: (worst, argmax_id)};
    the per-item arithmetic agrees with `verify` (tested).
    """
    from .norms import shell_samples, _angular_norm

    rng = np.random.default_rng(seed)
    half_power = (grid.dim - 1) / 2.0
    pairs = [gen_strauss_exponents(p, q) for p, q in gen_pairs]
    kinds = ["strauss"] + [f"gen_strauss(p={p:g})" for p, _ in pairs]
    kinds.append("ladyzhenskaya" if grid.dim == 2 else "gn_l3")
    worst = {k: (0.0, "") for k in kinds}
    done = 0
    while done < size:
        count = min(chunk, size - done)
        for j in range(count):
            item_id = f"scalar-{done + j:03d}"
            phi = _random_bump(rng, grid)
            norm2 = l2_norm(phi, grid)
            grad2 = sum(l2_norm(diff_values(phi, grid, k, accuracy), grid) ** 2
                        for k in range(1, grid.dim + 1))
            dr = l2_norm(radial_derivative_values(phi, grid, accuracy), grid)
            radii, weights, samples = shell_samples(phi, grid)
            r_weight = radii**half_power

            def update(kind, lhs, rhs):
                ratio = 0.0 if rhs == 0.0 else lhs / rhs
                if ratio > worst[kind][0]:
                    worst[kind] = (ratio, item_id)

            inner2 = _angular_norm(samples, weights, 2.0)
            update("strauss", float(np.max(inner2 * r_weight)),
                   math.sqrt(dr) * math.sqrt(norm2))
            dr_shell = radii[1] - radii[0] if len(radii) > 1 else grid.half_width
            for p, q in pairs:
                inner_p = _angular_norm(samples, weights, p)
                lhs = float(np.max(inner_p * r_weight))
                inner_q = _angular_norm(samples, weights, q)
                mixed_q = float(np.sqrt(np.sum(inner_q**2 * radii ** (grid.dim - 1)) * dr_shell))
                update(f"gen_strauss(p={p:g})", lhs, math.sqrt(dr) * math.sqrt(mixed_q))
            if grid.dim == 2:
                update("ladyzhenskaya", lp_norm(phi, grid, 4.0) ** 4,
                       4.0 * norm2**2 * grad2)
            else:
                update("gn_l3", lp_norm(phi, grid, 3.0),
                       math.sqrt(norm2) * math.sqrt(math.sqrt(grad2)))
        done += count
    return worst


def estimate_constant(kind: str, items, item_ids=None, **kwargs) -> ConstantEstimate:
    """Empirical sup of the ratio over a corpus (argmax item recorded)."""
    items = list(items)
    if not items:
        raise ValueError("corpus must be nonempty")
    ids = item_ids or [f"{kind}-{i:03d}" for i in range(len(items))]
    reports = []
    for item, item_id in zip(items, ids):
        if isinstance(item, tuple):
            snapshot, utt = item
            reports.append(verify(kind, snapshot, utt=utt, item_id=item_id, **kwargs))
        else:
            reports.append(verify(kind, item, item_id=item_id, **kwargs))
    finite = [r for r in reports if not r.degenerate]
    best = max(finite, key=lambda r: r.ratio, default=reports[0])
    return ConstantEstimate(kind, best.ratio, best.item_id, tuple(reports))


# ---------------------------------------------------------------------------
# Test-function corpora: polynomial-times-bump profiles, seeds recorded.


def _random_polynomial(rng, grid: Grid, degree: int = 3) -> np.ndarray:
    coords = [grid.coordinate(k) / grid.half_width for k in range(1, grid.dim + 1)]
    out = rng.uniform(-1.0, 1.0) * np.ones(grid.shape)
    terms = [(i,) for i in range(grid.dim)]
    terms += [(i, j) for i in range(grid.dim) for j in range(i, grid.dim)]
    terms += [(i, j, k) for i in range(grid.dim) for j in range(i, grid.dim)
              for k in range(j, grid.dim)]
    for term in terms:
        if len(term) > degree:
            continue
        mono = np.ones(grid.shape)
        for i in term:
            mono = mono * coords[i]
        out = out + rng.uniform(-1.0, 1.0) * mono
    return out


def _random_bump(rng, grid: Grid) -> np.ndarray:
    support = grid.half_width * rng.uniform(0.35, 0.55)
    center = rng.uniform(-0.25, 0.25, size=grid.dim) * grid.half_width
    stretch = rng.uniform(0.7, 1.3, size=grid.dim)
    power = int(rng.integers(4, 9))
    window = bump_profile(grid, support, power, center=center, stretch=stretch)
    return window * _random_polynomial(rng, grid)


def make_scalar_corpus(grid: Grid, size: int, seed: int) -> list:
    """Compact scalar test functions for the trace-type inequalities."""
    rng = np.random.default_rng(seed)
    return [Field(grid, _random_bump(rng, grid)[np.newaxis], 0.0, check=False)
            for _ in range(size)]


def make_state_corpus(grid: Grid, size: int, seed: int, components: int = 1,
                      time: float = 1.5) -> list:
    """Snapshots with independent u and v bumps, evaluated at the given time."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(size):
        u = np.stack([_random_bump(rng, grid) for _ in range(components)])
        v = np.stack([_random_bump(rng, grid) for _ in range(components)])
        out.append(StateSnapshot(Field(grid, u, time, check=False),
                                 Field(grid, v, time, check=False)))
    return out


def make_triple_corpus(grid: Grid, size: int, seed: int, components: int = 1,
                       time: float = 1.5) -> list:
    """(snapshot, utt) pairs; the weighted second-derivative bound holds for any 2-jet."""
    rng = np.random.default_rng(seed)
    out = []
    for s in make_state_corpus(grid, size, seed + 1, components, time):
        utt = np.stack([_random_bump(rng, grid) for _ in range(components)])
        out.append((s, Field(grid, utt, time, check=False)))
    return out


# ---------------------------------------------------------------------------
# Pointwise recovery and source bounds on system-consistent states.


def _apply_spatial_word(arr: np.ndarray, grid: Grid, word: OperatorWord,
                        accuracy: int) -> np.ndarray:
    out = arr
    for gen in reversed(word.gens):
        if gen.kind == "space":
            out = diff_values(out, grid, gen.i, accuracy)
        elif gen.kind == "rotation":
            out = grid.coordinate(gen.i) * diff_values(out, grid, gen.j, accuracy) \
                - grid.coordinate(gen.j) * diff_values(out, grid, gen.i, accuracy)
        else:
            raise ValueError("only spatial-rotational words apply here")
    return out


def check_pointwise_recovery(spec: SystemSpec, s: StateSnapshot, utt: Field,
                             word_order: int = 0, accuracy: int = 4) -> InequalityReport:
    """Pointwise recovery of dt^2 u (and its Zbar derivatives) from space-time mixes.

    word_order 0 checks sum_i |dt^2 u^i| against first and mixed second
    derivatives; orders 1 and 2 check the Zbar^a-differentiated version,
    with the right side summed over 1 <= |b| <= |a| as stated.
    """
    grid = s.grid
    n = grid.dim
    n_comp = s.components
    if word_order == 0:
        lhs = sum(np.abs(utt.values[i]) for i in range(n_comp))
        rhs = np.zeros(grid.shape)
        for i in range(n_comp):
            for m in range(1, n + 1):
                for alpha in range(n + 1):
                    if alpha == 0:
                        rhs = rhs + np.abs(diff_values(s.v.values[i], grid, m, accuracy))
                    else:
                        rhs = rhs + np.abs(diff2_values(s.u.values[i], grid, m, alpha, accuracy))
            rhs = rhs + np.abs(s.v.values[i])
            for k in range(1, n + 1):
                rhs = rhs + np.abs(diff_values(s.u.values[i], grid, k, accuracy))
        ratio_field = np.where(rhs > 1e-14, lhs / np.where(rhs > 0, rhs, 1.0), 0.0)
        return InequalityReport("pointwise_recovery", float(np.max(ratio_field)), 1.0,
                                None, "order0", {"order": 0})
    words = _zbar_words(n, word_order, exact=word_order)
    lower_words = [w for order in range(1, word_order + 1) for w in _zbar_words(n, order, exact=order)]
    worst = 0.0
    for word in words:
        lhs = sum(np.abs(_apply_spatial_word(utt.values[i], grid, word, accuracy))
                  for i in range(n_comp))
        rhs = np.zeros(grid.shape)
        for i in range(n_comp):
            for b in lower_words:
                for m in range(1, n + 1):
                    for alpha in range(n + 1):
                        if alpha == 0:
                            base = diff_values(s.v.values[i], grid, m, accuracy)
                        else:
                            base = diff2_values(s.u.values[i], grid, m, alpha, accuracy)
                        rhs = rhs + np.abs(_apply_spatial_word(base, grid, b, accuracy))
                rhs = rhs + np.abs(_apply_spatial_word(s.v.values[i], grid, b, accuracy))
                for k in range(1, n + 1):
                    rhs = rhs + np.abs(_apply_spatial_word(
                        diff_values(s.u.values[i], grid, k, accuracy), grid, b, accuracy))
        ratio_field = np.where(rhs > 1e-14, lhs / np.where(rhs > 0, rhs, 1.0), 0.0)
        worst = max(worst, float(np.max(ratio_field)))
    return InequalityReport("pointwise_recovery", worst, 1.0, None,
                            f"order{word_order}", {"order": word_order})


@dataclass(frozen=True)
class SourceBoundReport:
    lhs: float
    rhs: float
    n4: float
    m4: float
    smallness_ok: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs == 0 else math.inf)


def check_source_bound(spec: SystemSpec, s: StateSnapshot, utt: Field,
                       epsilon_star: float = 0.1, accuracy: int = 4,
                       laplacian_mode: str = "split") -> SourceBoundReport:
    """Source bound t ||box_l Zbar^a u^l|| against the N4/M4 combination.

    Quadratic 3D: rhs = C(N4^2 + N4 M4); cubic 2D: rhs = C(N4^3 + N4^2 M4).
    The wave operator uses the same Laplacian the solver evolved with, so
    the linear part of box u cancels to the word-commutation defect instead
    of polluting the nonlinear source with a discretization mismatch.
    """
    from .systems import smallness_check

    if (spec.kind, spec.dim) not in (("quadratic", 3), ("cubic", 2)):
        raise ValueError("the source bound applies to the 3D quadratic and 2D cubic regimes")
    grid = s.grid
    split = laplacian_mode == "split"
    lhs = 0.0
    for word in _zbar_words(grid.dim, 2):
        for l, c in enumerate(spec.speeds):
            wa_u = _apply_spatial_word(s.u.values[l], grid, word, accuracy)
            wa_utt = _apply_spatial_word(utt.values[l], grid, word, accuracy)
            box = wa_utt - c * c * laplacian_values(wa_u, grid, accuracy, split=split)
            lhs = max(lhs, s.time * l2_norm(box, grid))
    n4 = generalized_energy(s, spec.speeds, 4, utt=utt, accuracy=accuracy)
    m4 = auxiliary_m4(s, spec.speeds, accuracy)
    if spec.kind == "quadratic":
        rhs = n4**2 + n4 * m4
    else:
        rhs = n4**3 + n4**2 * m4
    ok = smallness_check(s, epsilon_star, accuracy).passed
    return SourceBoundReport(lhs, rhs, n4, m4, ok)


@dataclass(frozen=True)
class NormRatioReport:
    max_ratio: float
    early_max: float
    late_max: float
    smallness_ok: bool

    @property
    def trend_growth(self) -> float:
        if self.early_max <= 0:
            return 0.0
        return self.late_max / self.early_max - 1.0

    def passed(self, max_growth: float = 0.5) -> bool:
        return math.isfinite(self.max_ratio) and self.trend_growth < max_growth


def check_norm_ratio_trend(times, n4_series, m4_series, delta0: float = 0.05) -> NormRatioReport:
    """M4 <= C N4 along a run: finite ratio, no trend growth."""
    times = np.asarray(times)
    n4 = np.asarray(n4_series)
    m4 = np.asarray(m4_series)
    ratio = np.where(n4 > 0, m4 / np.where(n4 > 0, n4, 1.0), 0.0)
    if len(times) < 4:
        return NormRatioReport(float(np.max(ratio, initial=0.0)), 0.0, 0.0, True)
    third = max(2, len(times) // 3)
    early = float(np.max(ratio[:third]))
    late = float(np.max(ratio[-third:]))
    return NormRatioReport(float(np.max(ratio)), early, late, bool(np.all(n4 <= delta0)))
