import math

import numpy as np
import pytest

from mswavelab.grid import Field, Grid, StateSnapshot
from mswavelab.norms import energy_e1, mild_weight_data_norm
from mswavelab.polynomials import PolynomialState, monomial
from mswavelab.solver import (
    EnergyTrace,
    SolverConfig,
    bump_profile,
    grid_for_run,
    gronwall_ratio_series,
    make_initial_data,
    run_with_monitor,
    sample_energy_monitor,
    time_step,
)
from mswavelab.systems import (
    SystemSpec,
    preset_cubic_2d,
    preset_linear,
    preset_quadratic,
    recover_utt,
)

from oracles import richardson_order


class TestInitialData:
    def test_zero_epsilon_gives_zero_state(self):
        g = Grid(2, 3.0, 33)
        s = make_initial_data(g, 2, "radial_bump", 0.0, 1.0)
        assert s.u.max_abs() == 0.0 and s.v.max_abs() == 0.0

    def test_exact_homogeneity(self):
        g = Grid(2, 3.0, 33)
        s1 = make_initial_data(g, 2, "radial_bump", 0.1, 1.0)
        s2 = make_initial_data(g, 2, "radial_bump", 0.05, 1.0)
        assert np.array_equal(s1.u.values, 2.0 * s2.u.values)
        assert np.array_equal(s1.v.values, 2.0 * s2.v.values)

    def test_mild_weight_norm_linear_in_epsilon(self):
        g = Grid(2, 3.0, 65)
        vals = [mild_weight_data_norm(make_initial_data(g, 1, "radial_bump", e, 1.0))
                for e in (0.2, 0.1)]
        assert vals[0] == pytest.approx(2.0 * vals[1], rel=1e-12)

    def test_support_exceeding_grid_rejected(self):
        g = Grid(2, 2.0, 33)
        with pytest.raises(ValueError):
            make_initial_data(g, 1, "radial_bump", 0.1, 2.5)

    def test_random_family_deterministic_in_seed(self):
        g = Grid(2, 3.0, 33)
        a = make_initial_data(g, 2, "random_bump", 0.1, 1.0, seed=5)
        b = make_initial_data(g, 2, "random_bump", 0.1, 1.0, seed=5)
        assert np.array_equal(a.u.values, b.u.values)

    def test_grid_for_run_contains_cone(self):
        g = grid_for_run(2, 1.5, 4.0, 2.0, 257, pad_cells=10)
        assert g.half_width >= 1.5 + 2.0 * 4.0 + 10 * g.spacing - 1e-12


class TestStepAndConservation:
    def test_linear_standing_pulse_base_energy_drift(self):
        # semi-discrete energy is exact for the split laplacian; RK4 drift only
        spec = preset_linear(2, 1, (1.0,))
        tmax = 1.0
        grid = grid_for_run(2, 2.0, tmax, 1.0, 129, pad_cells=8)
        data = make_initial_data(grid, 1, "radial_bump", 0.1, 2.0, power=6)
        cfg = SolverConfig(t_max=tmax, cfl=0.2, laplacian_mode="split")
        dt = cfg.cfl * grid.spacing
        s = data
        e0 = energy_e1(s, spec.speeds)
        steps = int(round(tmax / dt))
        for _ in range(steps):
            s = time_step(s, spec, cfg, dt)
        e1 = energy_e1(s, spec.speeds)
        assert abs(e1 - e0) / e0 < 1e-8

    def test_two_speed_components_decouple_when_linear(self):
        spec = preset_linear(2, 2, (1.0, 2.0))
        grid = grid_for_run(2, 1.0, 0.5, 2.0, 65, pad_cells=6)
        base = bump_profile(grid, 1.0, 5)
        u = np.stack([base, np.zeros(grid.shape)])
        v = np.stack([0.5 * base, np.zeros(grid.shape)])
        s = StateSnapshot(Field(grid, u), Field(grid, v))
        cfg = SolverConfig(t_max=0.5, cfl=0.4)
        dt = cfg.cfl * grid.spacing / 2.0
        for _ in range(8):
            s = time_step(s, spec, cfg, dt)
        assert np.max(np.abs(s.u.values[1])) == 0.0
        assert np.max(np.abs(s.v.values[1])) == 0.0

    def test_manufactured_solution_temporal_order(self):
        # u(t) = q(t) B is an exact solution of the semi-discrete system when
        # the forcing is assembled from the discrete operators themselves, so
        # the measured error is purely temporal: RK4 slope >= 3.5
        spec = SystemSpec.from_entries(
            2, 1, (1.0,), "quadratic",
            g_entries=[((0, 0, 0, 0, 1, 1), 0.2)],
            h_entries=[((0, 0, 0, 0, 0), 0.5)], symmetrize=True)
        grid = Grid(2, 2.0, 21)
        x1, x2 = grid.coordinate(1), grid.coordinate(2)
        b = (bump_profile(grid, 1.6, 6) * (0.4 + 0.3 * x1 - 0.2 * x1 * x2))[None]
        q = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0]

        def q_val(t, der=0):
            return sum(q[k] * math.factorial(k) / math.factorial(k - der) * t ** (k - der)
                       for k in range(der, len(q)))

        from mswavelab.grid import diff2_values, laplacian_values

        lap_b = laplacian_values(b, grid, 4, split=True)
        d11_b = diff2_values(b[0], grid, 1, 1, 4)

        def forcing(t):
            out = q_val(t, 2) * b - q_val(t) * lap_b
            out[0] -= 0.2 * (q_val(t, 1) * b[0]) * (q_val(t) * d11_b)
            out[0] -= 0.5 * (q_val(t, 1) * b[0]) ** 2
            return out

        def error(n_steps, t_end=0.5):
            cfg = SolverConfig(t_max=t_end, cfl=0.9, laplacian_mode="split")
            s = StateSnapshot(Field(grid, b.copy(), 0.0),
                              Field(grid, q_val(0.0, 1) * b, 0.0))
            dt = t_end / n_steps
            for _ in range(n_steps):
                s = time_step(s, spec, cfg, dt, forcing=forcing)
            return np.max(np.abs(s.u.values - q_val(t_end) * b))

        errors = [error(n) for n in (8, 16, 32)]
        slope = -richardson_order(errors, [8, 16, 32])
        assert slope >= 3.5
        assert errors[-1] > 1e-12  # above the roundoff floor

    def test_blowup_guard_trips(self):
        spec = SystemSpec.from_entries(2, 1, (1.0,), "quadratic",
                                       h_entries=[((0, 0, 0, 0, 0), 400.0)])
        grid = grid_for_run(2, 1.0, 4.0, 1.0, 65, pad_cells=6)
        data = make_initial_data(grid, 1, "radial_bump", 0.8, 1.0)
        cfg = SolverConfig(t_max=4.0, magnitude_guard=5.0, sample_interval=0.05)
        result = run_with_monitor(data, spec, cfg, bootstrap=False)
        assert result.exit_kind in ("guard", "singular")


class TestMonitorAndTrace:
    def test_zero_data_traces_are_zero(self):
        spec = preset_linear(2, 1, (1.0,))
        grid = grid_for_run(2, 1.0, 1.0, 1.0, 33, pad_cells=6)
        data = make_initial_data(grid, 1, "radial_bump", 0.0, 1.0)
        result = run_with_monitor(data, spec, SolverConfig(t_max=1.0, sample_interval=0.25))
        assert np.all(result.trace.n4 == 0.0)
        assert result.probe.t_star == 1.0
        assert result.exit_kind == "horizon"

    def test_modified_energy_reduces_to_e4_when_g_zero(self):
        spec = SystemSpec.from_entries(2, 1, (1.0,), "quadratic",
                                       h_entries=[((0, 0, 0, 0, 0), 1.0)])
        grid = Grid(2, 3.0, 65)
        data = make_initial_data(grid, 1, "radial_bump", 0.05, 1.0)
        utt = recover_utt(spec, data)
        sample = sample_energy_monitor(spec, data, utt)
        assert sample.etilde4 == pytest.approx(sample.e4, rel=1e-14)
        assert sample.n4 == pytest.approx(math.sqrt(sample.e4), rel=1e-14)

    def test_modified_energy_correction_scales_like_epsilon(self):
        spec = preset_quadratic(2)
        grid = Grid(2, 3.0, 65)
        rel = []
        for eps in (1e-2, 1e-3):
            data = make_initial_data(grid, 2, "radial_bump", eps, 1.0)
            utt = recover_utt(spec, data)
            s = sample_energy_monitor(spec, data, utt)
            rel.append(abs(s.etilde4 - s.e4) / s.e4)
        slope = math.log(rel[0] / rel[1]) / math.log(10.0)
        assert abs(slope - 1.0) < 0.1

    def test_gronwall_series_zero_for_linear(self):
        times = np.linspace(0, 2, 9)
        etilde = np.full(9, 2.5)
        n4 = np.full(9, 0.1)
        series = gronwall_ratio_series(times, etilde, n4, 1)
        assert np.allclose(series, 0.0)

    def test_gronwall_guard_degenerate(self):
        times = np.linspace(0, 1, 5)
        series = gronwall_ratio_series(times, np.zeros(5), np.zeros(5), 2)
        assert np.allclose(series, 0.0)

    def test_time_reversed_data_ratio_finite(self):
        spec = preset_cubic_2d()
        grid = grid_for_run(2, 1.0, 1.0, spec.c_max, 65, pad_cells=6)
        data = make_initial_data(grid, 2, "radial_bump", 0.05, 1.0)
        reversed_data = StateSnapshot(data.u, Field(grid, -data.v.values, 0.0))
        result = run_with_monitor(reversed_data, spec, SolverConfig(t_max=1.0, sample_interval=0.1),
                                  bootstrap=False)
        series = result.trace.gronwall_ratio(2)
        assert np.all(np.isfinite(series))

    def test_bootstrap_exit_detection_and_interpolation(self):
        # synthetic check of the probe arithmetic via a fabricated trace
        spec = SystemSpec.from_entries(2, 1, (1.0,), "cubic",
                                       h_entries=[((0, 0, 0, 0, 0, 0, 0), 60.0)])
        grid = grid_for_run(2, 1.0, 6.0, 1.0, 129, pad_cells=8)
        data = make_initial_data(grid, 1, "radial_bump", 0.3, 1.0)
        cfg = SolverConfig(t_max=6.0, sample_interval=0.06, monitor="n4")
        result = run_with_monitor(data, spec, cfg)
        assert result.exit_kind == "bootstrap_exit"
        n4 = result.trace.n4
        thr = result.probe.threshold
        assert n4[-1] > thr and np.all(n4[:-1] <= thr)
        assert result.trace.times[-2] <= result.probe.t_star <= result.trace.times[-1]

    def test_trace_csv_round_trip_values(self, tmp_path):
        times = np.array([0.0, 0.5, 1.0])
        tr = EnergyTrace(times, times + 1, times + 1.0001, np.sqrt(times + 1),
                         times * 0.1, times * 0, times * 0 + 1)
        path = tmp_path / "trace.csv"
        tr.to_csv(path, nu=1)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,E4,Etilde4,N4,M4,equivalence_ratio,gronwall_ratio"
        assert len(lines) == 4
        first = [float(x) for x in lines[1].split(",")]
        assert first[0] == 0.0 and first[1] == 1.0
