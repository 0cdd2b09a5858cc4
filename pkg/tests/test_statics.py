"""
Unit tests for the coupled rod-finger statics solver.
"""

from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from src.core.errors import SweepAbortedError
from src.models.shapes import ShapeSpec
from src.services.bodies.contact import ContactResult
from src.services.geometry.rod import actuation_matrix, kinematics, station_arclengths
from src.services.scene.shapes import build_rod
from src.services.statics import (
    SweepResult,
    actuation_sweep,
    evaluate,
    fd_jacobian,
    finger_tip_z,
    mount_system,
    net_force,
    potential_energy,
    residual,
    rod_tip_z,
    solve_equilibrium,
    state_labels,
    triangular_schedule,
    with_tip_load,
    write_sweep_trace,
    zero_state,
)
from src.services.verification import beam_deflection, check_energy, check_statics_sweep


class TestSystem:
    """Tests for FingerExosuitSystem bookkeeping"""

    def test_dof_per_mode(self, default_rod):
        """25 unknowns with an active finger, 22 otherwise"""
        assert mount_system(default_rod).n_dof == 25
        assert mount_system(default_rod, finger_mode="rigid").n_dof == 22
        assert mount_system(default_rod, finger_mode="removed").n_dof == 22

    def test_pack_split_round_trip(self, mounted_system, rng):
        """split(pack(q, theta)) returns the parts"""
        q, theta = rng.normal(size=22), rng.normal(size=3)
        q2, theta2 = mounted_system.split(mounted_system.pack(q, theta))
        assert np.array_equal(q, q2)
        assert np.array_equal(theta, theta2)

    def test_rigid_finger_stays_straight(self, default_rod):
        """Non-active modes report theta = 0"""
        system = mount_system(default_rod, finger_mode="rigid")
        _, theta = system.split(np.ones(22))
        assert np.array_equal(theta, np.zeros(3))


class TestMounting:
    """Tests for mount_system"""

    def test_base_sits_above_finger(self, mounted_system, default_rod):
        """Base height is at least S(0) + R_C0"""
        height = mounted_system.rod.base.translation[2]
        assert height >= default_rod.radius_at(0.0) + 0.0108 - 1e-15

    def test_no_initial_interference(self, mounted_system):
        """The unactuated rod does not touch C_1 .. C_7"""
        ev = evaluate(mounted_system, np.zeros(mounted_system.n_dof), 0.0)
        assert np.all(ev.contact.gaps[:, 1:] <= 0.0)
        assert not ev.contact.in_contact

    def test_rest_state_is_equilibrium(self, mounted_system):
        """u = 0 needs no Newton iterations"""
        state = solve_equilibrium(mounted_system, 0.0)
        assert state.iterations == 0
        assert state.converged
        assert np.array_equal(state.q, np.zeros(22))
        assert state.f_net == 0.0

    def test_large_base_radius_is_raised(self, finger):
        """A thick rod is lifted until it clears the finger"""

        rod = build_rod(ShapeSpec(family="R01", length=0.1, r0=0.01, r1=0.01))
        system = mount_system(rod, finger)
        ev = evaluate(system, np.zeros(system.n_dof), 0.0)
        assert np.all(ev.contact.gaps[:, 1:] <= 0.0)


class TestSolveEquilibrium:
    """Tests for the damped Newton solve"""

    def test_free_rod_bends_toward_finger(self, free_system):
        """Positive actuation drops the rod tip below its base"""
        state = solve_equilibrium(free_system, 1e-3)
        assert state.converged
        assert rod_tip_z(free_system, state) < free_system.rod.base.translation[2]

    def test_residual_below_tolerance(self, free_system):
        """Converged states re-evaluate below tol"""
        state = solve_equilibrium(free_system, 2e-3, tol=1e-10)
        assert np.max(np.abs(residual(free_system, state))) < 1e-10

    def test_small_actuation_is_linear(self, free_system):
        """For small u, q ~ K^-1 B(0) u"""
        u = 1e-4
        state = solve_equilibrium(free_system, u, tol=1e-14)
        rod = free_system.rod
        q_lin = np.linalg.solve(rod.stiffness, actuation_matrix(rod, np.zeros(22)) * u)
        assert np.linalg.norm(state.q - q_lin) / np.linalg.norm(q_lin) < 1e-2

    @pytest.mark.parametrize("u", [0.01, 0.05, 0.1])
    def test_default_shape_with_finger_converges(self, mounted_system, u):
        """Newton crosses contact onset on the default shape from the rest state"""
        state = solve_equilibrium(mounted_system, u)
        assert state.converged
        assert np.max(np.abs(residual(mounted_system, state))) < 1e-8
        assert state.labels[0] == 0.0

    def test_default_shape_presses_the_finger(self, mounted_system):
        """At 0.1 N the curled rod loads C_1..C_7"""
        state = solve_equilibrium(mounted_system, 0.1)
        assert state.f_net > 0.0

    def test_residual_is_gradient_of_potential(self, mounted_system):
        """Central differences of V match the residual with several pairs overlapping"""
        q = np.r_[3.0 * np.ones(11), np.zeros(11)]
        theta = np.array([0.02, 0.0, 0.0])
        u = 0.05
        x = mounted_system.pack(q, theta)
        base = evaluate(mounted_system, x, u)
        assert base.contact.in_contact

        h = 1e-7
        numeric = np.empty(x.size)
        for j in range(x.size):
            dx = np.zeros(x.size)
            dx[j] = h
            up = evaluate(mounted_system, x + dx, u).energy
            down = evaluate(mounted_system, x - dx, u).energy
            numeric[j] = (up - down) / (2.0 * h)
        np.testing.assert_allclose(numeric, base.residual, rtol=1e-5, atol=1e-8)

    def test_potential_energy_of_rest_state(self, mounted_system):
        """Straight, unactuated and contact-free: V = 0"""
        assert potential_energy(mounted_system, zero_state(mounted_system)) == 0.0

    def test_fd_jacobian_matches_linear_stiffness(self, free_system):
        """Without contact or actuation the Jacobian is K"""
        x = np.zeros(free_system.n_dof)
        base = evaluate(free_system, x, 0.0)
        jac = fd_jacobian(free_system, x, 0.0, base, 1e-7)
        np.testing.assert_allclose(jac, free_system.rod.stiffness, rtol=1e-6, atol=1e-9)

    def test_warm_and_cold_start_agree(self, mounted_system):
        """A warm-started sweep and a cold solve land on the same equilibrium"""
        sweep = actuation_sweep(mounted_system, [0.0, 0.05, 0.1], tol=1e-11)
        cold = solve_equilibrium(mounted_system, 0.1, tol=1e-11)
        warm = sweep.states[-1]
        assert np.max(np.abs(warm.q - cold.q)) < 1e-6
        assert np.max(np.abs(warm.theta - cold.theta)) < 1e-6

    def test_tol_must_be_positive(self, free_system):
        """tol <= 0 is refused"""
        with pytest.raises(ValueError):
            solve_equilibrium(free_system, 0.0, tol=0.0)

    def test_zero_state(self, mounted_system):
        """zero_state carries u and zero coordinates"""
        state = zero_state(mounted_system, 0.5)
        assert state.u == 0.5
        assert state.labels.shape == (8,)
        assert state.f_net == 0.0

    def test_labels_and_net_force(self, mounted_system):
        """net_force skips C_0 and sums the other seven labels"""
        finger_forces = np.zeros((8, 3))
        finger_forces[:, 2] = [-5.0, -0.1, -0.2, 0.0, 0.0, 0.0, 0.0, -0.3]
        contact = ContactResult(finger_forces, np.zeros((42, 3)), np.zeros((42, 8)))
        state = replace(zero_state(mounted_system), contact=contact)
        assert np.array_equal(state_labels(state), contact.labels)
        assert net_force(state) == pytest.approx(0.6)
        assert state_labels(zero_state(mounted_system)).shape == (8,)


class TestSweep:
    """Tests for continuation along an actuation schedule"""

    def test_triangular_schedule(self):
        """0 -> 4 -> 0 in 0.1 N steps has 81 points"""
        schedule = triangular_schedule(4.0, 0.1)
        assert len(schedule) == 81
        assert schedule[0] == 0.0 and schedule[-1] == 0.0
        assert schedule[40] == 4.0
        assert schedule == schedule[::-1]

    def test_schedule_rejects_nonpositive_increment(self):
        """increment must be positive"""
        with pytest.raises(ValueError):
            triangular_schedule(4.0, 0.0)

    def test_empty_schedule(self, free_system):
        """An empty schedule is refused"""
        with pytest.raises(ValueError):
            actuation_sweep(free_system, [])

    def test_small_sweep_returns_to_rest(self, free_system):
        """A contact-free up-down sweep ends at q = 0"""
        result = actuation_sweep(free_system, triangular_schedule(0.004, 0.001), increment=0.001)
        assert result.complete
        assert all(result.converged)
        assert len(result.states) == 9
        assert np.linalg.norm(result.states[-1].q) < 1e-6

    def test_failed_step_aborts_with_partial_result(self, free_system):
        """A solve that cannot converge aborts the sweep"""
        with pytest.raises(SweepAbortedError) as exc:
            actuation_sweep(free_system, [0.001, 0.002], max_iters=0, max_halvings=1)
        assert exc.value.failed_index == 0
        assert isinstance(exc.value.result, SweepResult)
        assert exc.value.result.states == []
        assert not exc.value.result.complete

    def test_default_shape_ramp_with_finger(self, mounted_system):
        """0 -> 0.5 N on the default shape completes and F_net never drops"""
        result = actuation_sweep(mounted_system, [0.1 * k for k in range(6)])
        assert result.complete
        assert all(result.converged)
        forces = result.net_forces
        assert forces[-1] > 0.0
        assert np.all(np.diff(forces) >= -1e-6)

    def test_sweep_trace_csv(self, free_system, tmp_path):
        """Trace has one row per state with q and theta columns"""
        result = actuation_sweep(free_system, [0.0, 0.001], increment=0.001)
        path = write_sweep_trace(result, tmp_path / "trace.csv")
        frame = pd.read_csv(path)
        assert len(frame) == 2
        assert {"u", "iterations", "residual", "F_net", "q0", "q21"} <= set(frame.columns)


class TestTipLoad:
    """Tests for the clamped-beam benchmark path"""

    def test_tip_load_deflects_downward(self, default_rod):
        """A -z tip load lowers the tip"""
        system = with_tip_load(mount_system(default_rod, finger_mode="removed"), [0.0, 0.0, -5e-5])
        state = solve_equilibrium(system, 0.0, tol=1e-12)
        assert rod_tip_z(system, state) < system.rod.base.translation[2]

    def test_matches_euler_bernoulli(self):
        """Tip deflection within 2% of the tapered-beam integral"""
        simulated, expected = beam_deflection(5e-5)
        assert expected < 0.05 * 0.1
        assert abs(simulated - expected) / expected < 0.02

    def test_energy_balance(self):
        """Stored elastic energy equals actuation work on a contact-free path"""
        result = check_energy()
        assert result.passed, result.detail


class TestTips:
    """Tests for the tip-height helpers used by the frame filter"""

    def test_straight_configuration(self, mounted_system):
        """At rest the rod tip is above the fingertip"""
        state = zero_state(mounted_system)
        assert rod_tip_z(mounted_system, state) > finger_tip_z(mounted_system, state)

    def test_rod_tip_matches_kinematics(self, mounted_system):
        """rod_tip_z is the z of the pose at L"""
        state = zero_state(mounted_system)
        rod = mounted_system.rod
        z = kinematics(rod, state.q, [rod.length], with_jacobian=False).positions[0, 2]
        assert rod_tip_z(mounted_system, state) == z
        assert len(station_arclengths(rod)) == 42


@pytest.mark.integration
class TestSweepContract:
    """Full 0 -> 4 -> 0 N sweep of the default shape with the finger"""

    def test_statics_contract(self):
        """Every state re-evaluates below 1e-8 and q returns to 0"""
        result = check_statics_sweep()
        assert result.passed, result.detail
