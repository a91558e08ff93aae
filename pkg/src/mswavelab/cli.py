"""Batch front-end: simulate, verify-inequalities, check-commutators, lifespan-sweep.

Every subcommand echoes its fully resolved configuration into the output
directory and writes deterministic CSV/JSON artifacts (identical config and
seed give byte-identical files).  Exit status: 0 when all asserted checks
pass, 2 on a check failure, 1 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .grid import Grid, save_field
from .inequalities import (
    estimate_constant,
    known_constant,
    make_state_corpus,
    make_triple_corpus,
    scalar_worst_ratios,
)
from .lifespan import fit_scaling, load_sweep_config, run_sweep, sweep_config_to_dict
from .norms import NormReport
from .operators import (
    Dalembertian,
    box_word_commutator_parts,
    commutator_defect,
    mixed_commutator_residual,
    structure_bracket,
)
from .polynomials import PolynomialState, monomial
from .solver import SolverConfig, grid_for_run, make_initial_data, run_with_monitor
from .systems import SmallnessThresholds, load_system, system_to_config
from .words import Generator, OperatorWord, enumerate_words, rotation_pairs


class ConfigError(ValueError):
    pass


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare_out(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    probe = os.path.join(out_dir, ".write_probe")
    with open(probe, "w"):
        pass
    os.remove(probe)


# ---------------------------------------------------------------------------
# simulate


def _cmd_simulate(args) -> int:
    if not os.path.exists(args.spec):
        raise ConfigError(f"system spec file not found: {args.spec}")
    spec = load_system(args.spec)
    resolution = args.resolution or (257 if spec.dim == 2 else 97)
    config = SolverConfig(
        t_max=args.tmax,
        cfl=args.cfl,
        sample_interval=args.sample_interval,
        keep_snapshots=args.keep_snapshots,
    )
    grid = grid_for_run(spec.dim, args.support, args.tmax, spec.c_max,
                        resolution, args.pad_cells)
    data = make_initial_data(grid, spec.components, args.family, args.epsilon,
                             args.support, seed=args.seed, power=args.bump_power)
    _prepare_out(args.out)
    result = run_with_monitor(data, spec, config)
    nu = spec.scaling_exponent
    result.trace.to_csv(os.path.join(args.out, "trace.csv"), nu)
    with open(os.path.join(args.out, "norms.csv"), "w", encoding="ascii", newline="\n") as fh:
        fh.write("t,kind,tags,value,resolution\n")
        tr = result.trace
        for i, t in enumerate(tr.times):
            for kind, series in (("N4", tr.n4), ("M4", tr.m4), ("E4", tr.e4),
                                 ("Etilde4", tr.etilde4)):
                row = NormReport(kind, float(series[i]), resolution,
                                 tags={"kappa": config.kappa}).csv_row(float(t))
                fh.write(row + "\n")
    for idx, snap in enumerate(result.snapshots):
        save_field(snap.u, os.path.join(args.out, f"snapshot_u_{idx:03d}.bin"))
        save_field(snap.v, os.path.join(args.out, f"snapshot_v_{idx:03d}.bin"))
    echo = {
        "command": "simulate",
        "version": __version__,
        "system": system_to_config(spec),
        "epsilon": args.epsilon,
        "t_max": args.tmax,
        "cfl": args.cfl,
        "family": args.family,
        "seed": args.seed,
        "support": args.support,
        "resolution": resolution,
        "pad_cells": args.pad_cells,
        "bump_power": args.bump_power,
        "half_width": grid.half_width,
        "exit_kind": result.exit_kind,
        "t_star": result.probe.t_star,
        "nu": nu,
    }
    _write_json(os.path.join(args.out, "config_echo.json"), echo)

    failures = []
    if result.exit_kind in ("guard", "singular"):
        failures.append(f"run aborted: {result.exit_kind} ({result.note})")
    thresholds = SmallnessThresholds()
    n4 = result.trace.n4
    if len(n4) and np.all(n4 <= thresholds.delta0):
        eq = result.trace.equivalence_ratio
        if np.any((eq < 2.0 / 3.0) | (eq > 1.5)):
            failures.append("modified-energy equivalence window violated")
    if spec.is_linear and len(n4) > 1 and n4[0] > 0:
        drift = float(np.max(np.abs(n4 - n4[0]))) / n4[0] / args.tmax
        if drift > args.drift_budget:
            failures.append(f"linear N4 drift {drift:.3e} exceeds budget {args.drift_budget:.1e}")
    for msg in failures:
        print(f"FAIL simulate: {msg}", file=sys.stderr)
    if not failures:
        print(f"simulate: exit_kind={result.exit_kind} T*={result.probe.t_star!r} -> {args.out}")
    return 2 if failures else 0


# ---------------------------------------------------------------------------
# verify-inequalities


def _cmd_verify(args) -> int:
    dim = args.dim
    resolution = args.resolution or (257 if dim == 2 else 97)
    speeds = (1.0, 2.0)
    t_eval = args.time
    grid_scalar = Grid(dim, 3.0, resolution)
    states = make_state_corpus(grid_scalar, args.state_corpus_size, args.seed + 1,
                               components=2, time=t_eval)
    triples = make_triple_corpus(grid_scalar, args.state_corpus_size, args.seed + 2,
                                 components=2, time=t_eval)
    _prepare_out(args.out)

    rows = []
    all_pass = True

    def record(kind, estimate, corpus_name):
        nonlocal all_pass
        const = estimate.known_constant
        ok = (math.isfinite(estimate.value) if const is None
              else estimate.value <= const * (1.0 + args.tolerance))
        all_pass = all_pass and ok
        rows.append((kind, corpus_name, estimate.value, const, ok))

    def record_value(kind, value, const, corpus_name):
        nonlocal all_pass
        ok = (math.isfinite(value) if const is None
              else value <= const * (1.0 + args.tolerance))
        all_pass = all_pass and ok
        rows.append((kind, corpus_name, value, const, ok))

    scalar_worst = scalar_worst_ratios(grid_scalar, args.corpus_size, args.seed)
    corpus_name = f"scalar{args.corpus_size}"
    for kind, (value, _) in scalar_worst.items():
        if kind.startswith("gen_strauss"):
            const = math.sqrt(float(kind.split("p=")[1].rstrip(")")))
        else:
            const = known_constant(kind)
        record_value(kind, value, const, corpus_name)
    if dim == 2:
        state_kinds = ("trace_2d", "weighted_l4_2d", "pointwise_2d", "rweight_linf")
    else:
        state_kinds = ("weighted_l3_3d", "weighted_l6_3d", "mixed_rl_3d",
                       "pointwise_3d", "rweight_linf")
    for kind in state_kinds:
        est = estimate_constant(kind, states, speeds=speeds)
        record(kind, est, f"state{len(states)}")
    est = estimate_constant("klainerman_sideris", triples, speeds=speeds)
    record("klainerman_sideris", est, f"triple{len(triples)}")

    with open(os.path.join(args.out, "inequalities.csv"), "w", encoding="ascii", newline="\n") as fh:
        fh.write("kind,corpus,worst_ratio,known_constant,pass\n")
        for kind, corpus_name, value, const, ok in rows:
            const_txt = "" if const is None else repr(const)
            fh.write(f"{kind},{corpus_name},{value!r},{const_txt},{str(ok).lower()}\n")
    _write_json(os.path.join(args.out, "config_echo.json"), {
        "command": "verify-inequalities", "version": __version__, "dim": dim,
        "corpus_size": args.corpus_size, "state_corpus_size": args.state_corpus_size,
        "seed": args.seed, "resolution": resolution, "time": t_eval,
        "tolerance": args.tolerance, "speeds": list(speeds),
    })
    for kind, corpus_name, value, const, ok in rows:
        badge = "pass" if ok else "FAIL"
        bound = "finite" if const is None else f"<= {const:.4f}*(1+tol)"
        print(f"{badge} {kind}: worst ratio {value:.6f} ({bound})")
    return 0 if all_pass else 2


# ---------------------------------------------------------------------------
# check-commutators


def _poly_states(dim: int) -> list:
    """Mixed-degree polynomial states exercising t and every coordinate."""
    states = []
    base = [
        monomial(dim, 2, (0,) * dim) - monomial(dim, 0, (2,) + (0,) * (dim - 1)),
        monomial(dim, 1, (2,) + (0,) * (dim - 1)),
        monomial(dim, 3, (0,) * dim) + monomial(dim, 0, (1, 1) + (0,) * (dim - 2)),
        monomial(dim, 2, (1,) * dim) + monomial(dim, 0, (3, 1) + (0,) * (dim - 2)) * 0.5,
    ]
    for p in base:
        states.append(PolynomialState([p]))
    return states


def commutator_identity_rows(dim: int, tol: float = 1e-9) -> list:
    """(identity, residual, pass) rows for the full commutator suite."""
    rows = []
    states = _poly_states(dim)
    speeds = (1.0, 2.0)

    def add(name, residual):
        rows.append((name, residual, residual < tol))

    # [Z_i, box] = 0 for i < mu, [S, box] = -2 box
    zgens = [Generator.space(k) for k in range(1, dim + 1)]
    zgens += [Generator.rotation(i, j) for i, j in rotation_pairs(dim)]
    for c in speeds:
        box = Dalembertian(c)
        for gen in zgens:
            word = OperatorWord(dim, (gen,))
            res = max(
                max((abs(cf) for q in commutator_defect(word, box, st).components
                     for cf in q.coeffs.values()), default=0.0)
                for st in states
            )
            add(f"[{gen.to_text()},box_{c:g}]=0", res)
        sword = OperatorWord(dim, (Generator.scaling(),))
        res = 0.0
        for st in states:
            defect = commutator_defect(sword, box, st)
            expected = st.map(lambda pq: pq.dalembertian(c) * (-2.0))
            res = max(res, max(p.max_coeff_diff(q) for p, q in
                               zip(defect.components, expected.components)))
        add(f"[S,box_{c:g}]=-2box", res)

    # algebra closure: each bracket is a constant-coefficient combination
    gens = zgens + [Generator.scaling(), Generator.time()]
    for g1 in gens:
        for g2 in gens:
            table = structure_bracket(g1, g2, dim)
            res = 0.0
            for st in states:
                p = st.components[0]
                defect = p.apply(g2).apply(g1) - p.apply(g1).apply(g2)
                expected = p * 0.0
                for gen, coeff in table.items():
                    expected = expected + p.apply(gen) * coeff
                res = max(res, defect.max_coeff_diff(expected))
            add(f"[{g1.to_text()},{g2.to_text()}]=closure", res)

    # box-word rule: [box, Z^a] is 0 or 2 box (composed with the S-stripped word)
    for word in enumerate_words(dim, 3):
        if word.order == 0:
            continue
        res = 0.0
        for st in states:
            defect, expected = box_word_commutator_parts(word, 2.0, st)
            res = max(res, max(p.max_coeff_diff(q) for p, q in
                               zip(defect.components, expected.components)))
        add(f"[box,{word.to_text()}]=2s*box", res)

    # mixed-commutator expansion for all order-3 words
    order3 = [w for w in enumerate_words(dim, 4) if w.order == 3]
    worst = 0.0
    for word in order3:
        for beta in range(dim + 1):
            for gamma in range(beta, dim + 1):
                for st in states:
                    worst = max(worst, mixed_commutator_residual(word, beta, gamma, st))
    add("mixed_expansion_order3", worst)

    # multi-speed obstruction: [Lt_k(c), box_chat] = 2/c (chat^2 - c^2) dk dt
    c, chat = 1.0, 2.0
    for k in range(1, dim + 1):
        word = OperatorWord(dim, (Generator.scaled_lorentz(k, c),))
        res = 0.0
        nonzero = False
        for st in states:
            defect = commutator_defect(word, Dalembertian(chat), st)
            factor = 2.0 / c * (chat**2 - c**2)
            expected = st.map(lambda pq: pq.partial(k).partial(0) * factor)
            res = max(res, max(p.max_coeff_diff(q) for p, q in
                               zip(defect.components, expected.components)))
            nonzero = nonzero or any(not p.is_zero() for p in defect.components)
        add(f"[Lt{k}({c:g}),box_{chat:g}]=2/c(chat^2-c^2)d{k}dt", res)
        rows.append((f"[Lt{k}({c:g}),box_{chat:g}] nonzero", 0.0 if nonzero else 1.0, nonzero))
    return rows


def _cmd_commutators(args) -> int:
    _prepare_out(args.out)
    rows = commutator_identity_rows(args.dim, args.tolerance)
    with open(os.path.join(args.out, "commutators.csv"), "w", encoding="ascii", newline="\n") as fh:
        fh.write("identity,residual,pass\n")
        for name, residual, ok in rows:
            fh.write(f"{name},{residual!r},{str(ok).lower()}\n")
    _write_json(os.path.join(args.out, "config_echo.json"), {
        "command": "check-commutators", "version": __version__,
        "dim": args.dim, "tolerance": args.tolerance,
    })
    n_fail = sum(1 for _, _, ok in rows if not ok)
    print(f"check-commutators: {len(rows) - n_fail}/{len(rows)} identities pass "
          f"(residual < {args.tolerance:g})")
    for name, residual, ok in rows:
        if not ok:
            print(f"FAIL {name}: residual {residual:.3e}", file=sys.stderr)
    return 0 if n_fail == 0 else 2


# ---------------------------------------------------------------------------
# lifespan-sweep


def _cmd_sweep(args) -> int:
    if not os.path.exists(args.sweep):
        raise ConfigError(f"sweep config file not found: {args.sweep}")
    cfg = load_sweep_config(args.sweep)
    _prepare_out(args.out)
    record = run_sweep(cfg)
    record.to_csv(os.path.join(args.out, "sweep.csv"))
    nu = cfg.system.scaling_exponent
    model = "power_law" if (cfg.system.kind, cfg.system.dim) == ("quadratic", 2) else "exp_inverse_power"
    fit = fit_scaling(record, model, nu=nu)
    _write_json(os.path.join(args.out, "fit.json"), fit.to_dict())
    _write_json(os.path.join(args.out, "config_echo.json"), {
        "command": "lifespan-sweep", "version": __version__,
        "sweep": sweep_config_to_dict(cfg), "model": model, "nu": nu,
    })
    print(f"lifespan-sweep: {len(record.runs)} runs, {record.n_censored} censored, "
          f"fit status: {fit.status}")
    if record.inversions and len(record.inversions) > 1:
        print(f"FAIL monotonicity: inversions at {record.inversions}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mswavelab",
        description="Numerical laboratory for multi-speed quasi-linear wave systems",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a system and write the energy trace")
    sim.add_argument("--spec", required=True, help="system spec JSON file")
    sim.add_argument("--epsilon", type=float, required=True)
    sim.add_argument("--tmax", type=float, required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--resolution", type=int, default=None)
    sim.add_argument("--family", default="radial_bump",
                     choices=["radial_bump", "polynomial_bump", "random_bump"])
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--support", type=float, default=1.0)
    sim.add_argument("--cfl", type=float, default=0.4)
    sim.add_argument("--pad-cells", type=int, default=12)
    sim.add_argument("--bump-power", type=int, default=6)
    sim.add_argument("--sample-interval", type=float, default=None)
    sim.add_argument("--keep-snapshots", type=int, default=3)
    sim.add_argument("--drift-budget", type=float, default=1e-3,
                     help="linear-system N4 drift budget per unit time; the default is a "
                          "loose stability sanity bound, tighten it at high resolution")
    sim.set_defaults(func=_cmd_simulate)

    ver = sub.add_parser("verify-inequalities", help="ratio reports on a test corpus")
    ver.add_argument("--dim", type=int, choices=[2, 3], required=True)
    ver.add_argument("--corpus-size", type=int, default=200)
    ver.add_argument("--state-corpus-size", type=int, default=16)
    ver.add_argument("--seed", type=int, default=7)
    ver.add_argument("--out", required=True)
    ver.add_argument("--resolution", type=int, default=None)
    ver.add_argument("--time", type=float, default=1.5)
    ver.add_argument("--tolerance", type=float, default=0.02)
    ver.set_defaults(func=_cmd_verify)

    com = sub.add_parser("check-commutators", help="polynomial-state identity suite")
    com.add_argument("--dim", type=int, choices=[2, 3], required=True)
    com.add_argument("--out", required=True)
    com.add_argument("--tolerance", type=float, default=1e-9)
    com.set_defaults(func=_cmd_commutators)

    swp = sub.add_parser("lifespan-sweep", help="epsilon sweep and scaling-law fit")
    swp.add_argument("--sweep", required=True, help="sweep config JSON file")
    swp.add_argument("--out", required=True)
    swp.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
