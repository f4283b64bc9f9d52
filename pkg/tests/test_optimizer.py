"""Gradient descent, convergence detection, and trace output."""

from __future__ import annotations

import csv
from math import degrees

import numpy as np
import pytest

from conftest import (
    DIMER_ENERGY_STAR,
    DIMER_LAT_STAR_DEG,
    T_HOP,
    U_INT,
    dimer_energy,
    dimer_energy_grad,
)
from cvqe.ansatz import bloch_singlet_hubbard
from cvqe.optimizer import (
    OptimizationTrace,
    OptimizerConfig,
    TracePoint,
    check_convergence,
    gradient_descent,
    optimizer_methods,
    run_optimizer,
    write_trace_csv,
)


def _energy(theta):
    return dimer_energy(theta[0], theta[1])


def _grad(theta):
    return dimer_energy_grad(theta[0], theta[1])


class TestConfig:
    def test_theta0_coerced(self):
        cfg = OptimizerConfig(theta0=np.array([1, 2]))
        assert cfg.theta0 == (1.0, 2.0)

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            OptimizerConfig(theta0=(0.0,), max_iters=0)
        with pytest.raises(ValueError):
            OptimizerConfig(theta0=(0.0,), param_tol=0.0)
        with pytest.raises(ValueError):
            OptimizerConfig(theta0=(0.0,), energy_tol=-1.0)


@pytest.fixture(scope="module")
def trace():
    cfg = OptimizerConfig(theta0=(0.0, 0.0), step_size=1.0)
    return gradient_descent(_energy, _grad, cfg,
                            domain=bloch_singlet_hubbard().domain)


class TestDimerDescent:
    def test_converges(self, trace):
        assert trace.converged
        assert trace.status == "converged"
        assert 2 <= trace.iterations < 50

    def test_reaches_known_minimum(self, trace):
        final = trace.final
        assert abs(degrees(final.theta[0]) - DIMER_LAT_STAR_DEG) < 5e-4
        assert final.theta[1] == 0.0
        assert abs(final.energy - DIMER_ENERGY_STAR) < 1e-9

    def test_fixed_point_condition(self, trace):
        # the stationary latitude satisfies tan(lat) = -u / (4 t)
        lat = trace.final.theta[0]
        assert np.tan(lat) == pytest.approx(-U_INT / (4 * T_HOP), abs=1e-5)

    def test_initial_point_recorded(self, trace):
        first = trace.points[0]
        assert first.k == 0
        assert first.theta == (0.0, 0.0)
        assert first.energy == pytest.approx(0.184, abs=1e-15)
        assert first.gradient[0] == pytest.approx(-U_INT / 2, abs=1e-12)

    def test_energy_monotone(self, trace):
        energies = [p.energy for p in trace.points]
        assert all(b <= a + 1e-15 for a, b in zip(energies, energies[1:]))

    def test_longitude_never_moves(self, trace):
        assert all(p.theta[1] == 0.0 for p in trace.points)

    def test_no_clipping_needed(self, trace):
        assert not any(p.clipped for p in trace.points)


class TestDescentMechanics:
    def test_zero_gradient_converges_immediately(self):
        cfg = OptimizerConfig(theta0=(0.7,))
        trace = gradient_descent(lambda th: 1.5, lambda th: np.zeros(1), cfg)
        assert trace.converged
        assert "zero gradient" in trace.message
        assert len(trace.points) == 1
        assert trace.points[0].k == 0
        assert trace.iterations == 0

    def test_iteration_cap(self):
        cfg = OptimizerConfig(theta0=(1.0,), step_size=1e-4, max_iters=3)
        trace = gradient_descent(lambda th: th[0] ** 2, lambda th: 2 * th, cfg)
        assert trace.status == "max_iters"
        assert len(trace.points) == 4
        assert trace.iterations == 3

    def test_step_schedule_sequence(self):
        cfg = OptimizerConfig(theta0=(1.0,), step_size=[0.1, 0.05], max_iters=3)
        trace = gradient_descent(lambda th: th[0] ** 2, lambda th: 2 * th, cfg)
        thetas = [p.theta[0] for p in trace.points]
        assert thetas[1] == pytest.approx(1.0 - 0.1 * 2.0)
        assert thetas[2] == pytest.approx(thetas[1] - 0.05 * 2 * thetas[1])
        # the last schedule entry repeats past the end
        assert thetas[3] == pytest.approx(thetas[2] - 0.05 * 2 * thetas[2])

    def test_step_schedule_callable(self):
        cfg = OptimizerConfig(theta0=(1.0,), step_size=lambda k: 0.25, max_iters=2)
        trace = gradient_descent(lambda th: th[0] ** 2, lambda th: 2 * th, cfg)
        assert trace.points[1].theta[0] == pytest.approx(0.5)

    def test_domain_clipping_flags_points(self):
        cfg = OptimizerConfig(theta0=(0.0,), step_size=1.0, max_iters=10)
        trace = gradient_descent(lambda th: th[0], lambda th: np.ones(1), cfg,
                                 domain=((-0.25, 0.25),))
        assert trace.converged
        assert trace.points[1].theta[0] == -0.25
        assert trace.points[1].clipped
        assert trace.final.theta[0] == -0.25

    def test_partial_domain_bounds(self):
        cfg = OptimizerConfig(theta0=(0.0, 0.0), step_size=1.0, max_iters=5)
        trace = gradient_descent(lambda th: th[0] + th[1],
                                 lambda th: np.ones(2), cfg,
                                 domain=((-0.5, 0.5), None))
        assert trace.points[1].theta == (-0.5, -1.0)

    def test_evaluation_error_reported(self):
        def boom(th):
            raise RuntimeError("sampled family set degenerate")

        cfg = OptimizerConfig(theta0=(0.0,))
        trace = gradient_descent(boom, lambda th: np.zeros(1), cfg)
        assert trace.status == "error"
        assert "iteration 0" in trace.message
        assert trace.points == []

    def test_non_finite_gradient_reported(self):
        cfg = OptimizerConfig(theta0=(0.0,))
        trace = gradient_descent(lambda th: 0.0,
                                 lambda th: np.array([np.nan]), cfg)
        assert trace.status == "error"
        assert "non-finite" in trace.message

    def test_error_mid_run(self):
        calls = {"n": 0}

        def energy(th):
            calls["n"] += 1
            if calls["n"] > 2:
                raise ValueError("lost the state")
            return float(th[0] ** 2)

        cfg = OptimizerConfig(theta0=(1.0,), step_size=0.1)
        trace = gradient_descent(energy, lambda th: 2 * np.asarray(th), cfg)
        assert trace.status == "error"
        assert len(trace.points) == 2


class TestConvergenceCheck:
    def _mk(self, k, theta, energy):
        return TracePoint(k, theta, energy, (0.0,))

    def test_requires_two_points(self):
        cfg = OptimizerConfig(theta0=(0.0,))
        with pytest.raises(ValueError):
            check_convergence([self._mk(0, (0.0,), 1.0)], cfg)

    def test_both_conditions_needed(self):
        cfg = OptimizerConfig(theta0=(0.0,), param_tol=1e-3, energy_tol=1e-3)
        near = [self._mk(0, (0.0,), 1.0), self._mk(1, (1e-4,), 1.0 + 1e-4)]
        assert check_convergence(near, cfg)
        far_theta = [self._mk(0, (0.0,), 1.0), self._mk(1, (0.1,), 1.0)]
        assert not check_convergence(far_theta, cfg)
        far_energy = [self._mk(0, (0.0,), 1.0), self._mk(1, (0.0,), 1.1)]
        assert not check_convergence(far_energy, cfg)

    def test_energy_tolerance_is_relative_above_one(self):
        cfg = OptimizerConfig(theta0=(0.0,), param_tol=1.0, energy_tol=1e-3)
        # |dE| = 0.05 passes against |E| = 100 (tol 0.1) but not against 1.0
        big = [self._mk(0, (0.0,), 100.0), self._mk(1, (0.0,), 100.05)]
        assert check_convergence(big, cfg)
        small = [self._mk(0, (0.0,), 1.0), self._mk(1, (0.0,), 1.05)]
        assert not check_convergence(small, cfg)


class TestDispatch:
    def test_methods_listed(self):
        assert optimizer_methods() == ("gradient_descent",)

    def test_run_optimizer_routes(self):
        cfg = OptimizerConfig(theta0=(0.0, 0.0), step_size=1.0)
        trace = run_optimizer(_energy, _grad, cfg,
                              domain=bloch_singlet_hubbard().domain)
        assert trace.converged

    def test_unknown_method(self):
        cfg = OptimizerConfig(theta0=(0.0,), method="newton")
        with pytest.raises(ValueError, match="gradient_descent"):
            run_optimizer(_energy, _grad, cfg)


class TestTraceCsv:
    def test_columns_and_units(self, tmp_path):
        cfg = OptimizerConfig(theta0=(0.0, 0.0), step_size=1.0)
        trace = gradient_descent(_energy, _grad, cfg,
                                 domain=bloch_singlet_hubbard().domain)
        path = tmp_path / "trace.csv"
        write_trace_csv(trace, path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == len(trace.points)
        assert set(rows[0]) == {"k", "theta_0_rad", "theta_1_rad",
                                "theta_0_deg", "theta_1_deg", "energy", "clipped"}
        last = rows[-1]
        assert int(last["k"]) == trace.final.k
        assert float(last["theta_0_deg"]) == pytest.approx(
            degrees(float(last["theta_0_rad"])), abs=1e-12)
        assert float(last["energy"]) == trace.final.energy
        assert last["clipped"] == "0"

    def test_empty_trace_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_trace_csv(OptimizationTrace(), tmp_path / "t.csv")


class TestTraceProperties:
    def test_final_requires_points(self):
        with pytest.raises(RuntimeError):
            OptimizationTrace().final
