"""
Numerical oracle suites run by `exoforce verify`.

Each check compares an implementation against an independent calculation
(series expansion, dense integration, finite differences, beam theory) and
returns an OracleResult; none of them raise on a failed comparison.
"""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np
from loguru import logger
from pydantic import BaseModel
from scipy import integrate

from ..models.estimator import NetworkSpec
from .bodies.finger import FingerModel
from .estimator.network import init_network, loss_and_gradients
from .geometry.lie import adjoint_Ad_matrix, exp_matrix, hat, inverse_matrix, vee
from .geometry.rod import RodModel, actuation_line_length, actuation_matrix, jacobian, kinematics, strain_at
from .scene.shapes import build_rod, default_shape
from .statics import actuation_sweep, mount_system, residual, solve_equilibrium, triangular_schedule


class OracleResult(BaseModel):
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0


def _result(name: str, value: float, threshold: float, detail: str = "") -> OracleResult:
    passed = bool(np.isfinite(value) and value < threshold)
    return OracleResult(name=name, passed=passed, value=float(value), threshold=threshold, detail=detail)


def _series_exp(omega: np.ndarray, terms: int = 30) -> np.ndarray:
    X = hat(omega)
    total = np.eye(4)
    term = np.eye(4)
    for k in range(1, terms):
        term = term @ X / k
        total = total + term
    return total


def check_exp_series(n: int = 1000, seed: int = 0) -> OracleResult:
    """Closed-form exp against a 30-term power series of the hat matrix"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        omega = rng.uniform(-1.0, 1.0, 6) * rng.uniform(0.0, 1.0)
        worst = max(worst, float(np.max(np.abs(exp_matrix(omega) - _series_exp(omega)))))
    return _result("lie.exp_series", worst, 1e-12, f"{n} random twists")


def check_adjoint_composition(n: int = 1000, seed: int = 1) -> OracleResult:
    """Ad(g1 g2) = Ad(g1) Ad(g2)"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        g1 = exp_matrix(rng.normal(size=6))
        g2 = exp_matrix(rng.normal(size=6))
        diff = adjoint_Ad_matrix(g1 @ g2) - adjoint_Ad_matrix(g1) @ adjoint_Ad_matrix(g2)
        worst = max(worst, float(np.max(np.abs(diff))))
    return _result("lie.adjoint_composition", worst, 1e-12, f"{n} random pairs")


def random_rod_state(rng: np.random.Generator, bending: float = 10.0, extension: float = 0.1) -> tuple[RodModel, np.ndarray]:
    r0, r1 = rng.uniform(0.004, 0.01, 2)
    spec = default_shape().model_copy(update={"r0": float(r0), "r1": float(r1), "length": float(rng.uniform(0.07, 0.11))})
    rod = build_rod(spec)
    m = rod.basis.n_nodes
    q = np.concatenate([rng.uniform(-bending, bending, m), rng.uniform(-extension, extension, m)])
    return rod, q


def dense_tip_position(rod: RodModel, q: np.ndarray, steps: int = 10_000) -> np.ndarray:
    """Classical RK4 on g' = g xi^ over `steps` uniform steps"""
    h = rod.length / steps
    X = np.linspace(0.0, rod.length, 2 * steps + 1)
    xi_hat = [hat(strain_at(rod, q, x).vector()) for x in X]
    g = np.eye(4)
    for i in range(steps):
        a, mid, b = xi_hat[2 * i], xi_hat[2 * i + 1], xi_hat[2 * i + 2]
        k1 = g @ a
        k2 = (g + 0.5 * h * k1) @ mid
        k3 = (g + 0.5 * h * k2) @ mid
        k4 = (g + h * k3) @ b
        g = g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rod.base.matrix() @ g[:, 3]


def check_kinematics_dense(n: int = 100, seed: int = 2, steps: int = 10_000) -> OracleResult:
    """Magnus forward kinematics against dense RK4 integration of the tip pose"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        rod, q = random_rod_state(rng)
        tip = kinematics(rod, q, [rod.length], with_jacobian=False).positions[0]
        worst = max(worst, float(np.linalg.norm(tip - dense_tip_position(rod, q, steps)[:3])))
    return _result("geometry.kinematics_dense", worst, 1e-6, f"{n} random shapes, tip error (m)")


def body_jacobian_fd(rod: RodModel, q: np.ndarray, X: float, step: float = 1e-6) -> np.ndarray:
    """Central-difference body Jacobian: columns vee(g^-1 dg/dq_j)"""
    g0 = kinematics(rod, q, [X], with_jacobian=False).poses[0]
    g0_inv = inverse_matrix(g0)
    cols = []
    for j in range(q.size):
        dq = np.zeros_like(q)
        dq[j] = step
        gp = kinematics(rod, q + dq, [X], with_jacobian=False).poses[0]
        gm = kinematics(rod, q - dq, [X], with_jacobian=False).poses[0]
        cols.append(vee(g0_inv @ (gp - gm) / (2.0 * step)).vector())
    return np.column_stack(cols)


def check_jacobian_fd(n: int = 100, seed: int = 3) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        rod, q = random_rod_state(rng)
        X = float(rng.uniform(0.2, 1.0) * rod.length)
        analytic = jacobian(rod, q, X)
        numeric = body_jacobian_fd(rod, q, X)
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)))
    return _result("geometry.jacobian_fd", worst, 1e-5, f"{n} random shapes, relative error")


def check_actuation_gradient(n: int = 100, seed: int = 4, step: float = 1e-6) -> OracleResult:
    """B(q) against the central-difference gradient of the actuation-line length"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        rod, q = random_rod_state(rng)
        numeric = np.array(
            [
                (actuation_line_length(rod, q + step * e) - actuation_line_length(rod, q - step * e)) / (2.0 * step)
                for e in np.eye(q.size)
            ]
        )
        worst = max(worst, float(np.linalg.norm(actuation_matrix(rod, q) - numeric) / np.linalg.norm(numeric)))
    return _result("geometry.actuation_gradient", worst, 1e-6, f"{n} random shapes, relative error")


def beam_deflection(load: float = 5e-5) -> tuple[float, float]:
    """(simulated, Euler-Bernoulli) tip deflection of the clamped default rod under a tip load"""
    rod = build_rod(default_shape())
    system = mount_system(rod, finger_mode="removed", tip_load=[0.0, 0.0, -load])
    state = solve_equilibrium(system, 0.0, tol=1e-12)
    base_z = system.rod.base.translation[2]
    tip_z = kinematics(system.rod, state.q, [rod.length], with_jacobian=False).positions[0, 2]

    E = rod.youngs_modulus
    expected, _ = integrate.quad(lambda X: (rod.length - X) ** 2 / (E * rod.section(X)[1]), 0.0, rod.length)
    return float(base_z - tip_z), float(load * expected)


def check_beam(load: float = 5e-5) -> OracleResult:
    simulated, expected = beam_deflection(load)
    rel = abs(simulated - expected) / expected
    return _result(
        "statics.beam_deflection",
        rel,
        0.02,
        f"simulated {simulated:.6e} m, Euler-Bernoulli {expected:.6e} m",
    )


def check_energy(u_max: float = 0.02, steps: int = 40) -> OracleResult:
    """Stored elastic energy against the actuation work along a contact-free quasi-static path"""
    rod = build_rod(default_shape())
    system = mount_system(rod, finger_mode="removed")
    schedule = list(np.linspace(0.0, u_max, steps + 1))
    sweep = actuation_sweep(system, schedule, increment=u_max / steps)
    lengths = np.array([actuation_line_length(system.rod, s.q) for s in sweep.states])
    u = np.array(schedule)
    work = float(np.sum(0.5 * (u[1:] + u[:-1]) * np.diff(lengths)))
    q = sweep.states[-1].q
    stored = 0.5 * float(q @ system.rod.stiffness @ q)
    rel = abs(stored - work) / stored
    return _result("statics.energy_consistency", rel, 0.01, f"stored {stored:.6e} J, work {work:.6e} J")


def check_statics_sweep(u_max: float = 4.0, increment: float = 0.1) -> OracleResult:
    """Default shape 0 -> u_max -> 0: every state re-evaluates below tol, and q returns to 0"""
    system = mount_system(build_rod(default_shape()), FingerModel())
    sweep = actuation_sweep(system, triangular_schedule(u_max, increment))
    worst = max(float(np.max(np.abs(residual(system, s)))) for s in sweep.states)
    q_final = float(np.linalg.norm(sweep.states[-1].q))
    value = max(worst / 1e-8, q_final / 1e-6)
    return _result(
        "statics.sweep_contract",
        value,
        1.0,
        f"max residual {worst:.3e}, final |q| {q_final:.3e}, peak F_net {sweep.net_forces.max():.4f} N",
    )


def tiny_network_spec() -> NetworkSpec:
    return NetworkSpec(input_size=8, conv_filters=[3, 2], pooled_convs=1, dense_units=[4], outputs=8)


def check_gradients(seed: int = 5, step: float = 1e-4, samples: int = 12) -> OracleResult:
    """Backpropagation against central finite differences on a tiny float64 network"""
    rng = np.random.default_rng(seed)
    net = init_network(tiny_network_spec(), seed=seed, dtype="float64")
    images = rng.uniform(0.0, 1.0, (4, 1, 8, 8))
    labels = 5.0 + rng.uniform(0.0, 1.0, (4, 8))
    _, grads = loss_and_gradients(net, images, labels, update_stats=False)

    worst = 0.0
    for name, value in net.params.items():
        flat = value.reshape(-1)
        picks = rng.choice(flat.size, size=min(samples, flat.size), replace=False)
        analytic = grads[name].reshape(-1)[picks]
        numeric = np.empty(len(picks))
        for i, k in enumerate(picks):
            original = flat[k]
            flat[k] = original + step
            up, _ = loss_and_gradients(net, images, labels, update_stats=False)
            flat[k] = original - step
            down, _ = loss_and_gradients(net, images, labels, update_stats=False)
            flat[k] = original
            numeric[i] = (up - down) / (2.0 * step)
        scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
        if scale > 1e-12:
            worst = max(worst, float(np.linalg.norm(analytic - numeric) / scale))
    return _result("estimator.gradients", worst, 1e-4, "relative error, every parameter tensor")


SUITES: dict[str, Callable[[], OracleResult]] = {
    "lie.exp_series": check_exp_series,
    "lie.adjoint_composition": check_adjoint_composition,
    "geometry.kinematics_dense": check_kinematics_dense,
    "geometry.jacobian_fd": check_jacobian_fd,
    "geometry.actuation_gradient": check_actuation_gradient,
    "statics.beam_deflection": check_beam,
    "statics.energy_consistency": check_energy,
    "statics.sweep_contract": check_statics_sweep,
    "estimator.gradients": check_gradients,
}


def run_suites(names: list[str] | None = None) -> list[OracleResult]:
    results = []
    for name in names or list(SUITES):
        if name not in SUITES:
            raise ValueError(f"unknown oracle suite '{name}'")
        started = time.perf_counter()
        try:
            result = SUITES[name]()
        except Exception as e:
            logger.exception("Oracle suite crashed", suite=name)
            result = OracleResult(name=name, passed=False, value=math.nan, threshold=math.nan, detail=f"{type(e).__name__}: {e}")
        result.seconds = round(time.perf_counter() - started, 3)
        log = logger.info if result.passed else logger.error
        log("Oracle checked", suite=name, passed=result.passed, value=result.value, threshold=result.threshold)
        results.append(result)
    return results
