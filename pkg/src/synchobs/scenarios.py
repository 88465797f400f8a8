"""The three worked scenarios wired into the generic machinery.

* ``bearings``  gyro-driven direction estimation on the sphere, SO(3) acting
  by phi(R, eta) = R^T eta. No measurement channels; demonstrates synchrony.
* ``unicycle``  planar kinematic unicycle under the SE(2) action. No
  channels; exists for the accessibility / symmetry-derivation pipeline.
* ``vaa``       velocity-aided attitude on SO(3) x R^3 under the
  velocity-attitude group, with GNSS velocity and magnetometer update
  channels and a Lyapunov cost.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .actions import (
    SPHERE_ACTION,
    SPHERE2,
    UNICYCLE_ACTION,
    UNICYCLE_M,
    VAA_ACTION,
    VAA_M,
    ManifoldPoint,
)
from .lie_core import (
    SE2,
    SO3,
    VAA,
    GroupElement,
    angle_diff,
    hat,
    rotation_angle,
    rotation_exp,
)
from .observer import CostFunction, ObserverState, UpdateChannel
from .systems import AffineSystem, FundamentalStructure, verify_fundamental

E1, E2, E3 = np.eye(3)

# Defaults of the canonical experiment; both are overridable per bundle.
GRAVITY = 9.81 * E3
MAG_REFERENCE = E1

GNSS_CHANNEL = 1
MAG_CHANNEL = 2


@dataclass(frozen=True)
class VAAGains:
    """Correction gains; the decrease condition needs k_v > k_c / (2 alpha)."""

    k_v: float = 5.0
    k_c: float = 1.0
    k_m: float = 5.0
    alpha: float = 1.0

    def validate(self) -> None:
        for name in ("k_v", "k_c", "k_m", "alpha"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"gain {name} must be positive")
        if self.k_v <= self.k_c / (2.0 * self.alpha):
            raise ValueError(
                f"gain condition violated: k_v = {self.k_v} must exceed "
                f"k_c / (2 alpha) = {self.k_c / (2.0 * self.alpha)}"
            )


@dataclass(frozen=True)
class ScenarioBundle:
    """A fundamental structure plus everything the simulator needs."""

    name: str
    structure: FundamentalStructure
    channels: tuple[UpdateChannel, ...]
    cost: CostFunction
    origin: ManifoldPoint
    initial_truth: ManifoldPoint
    initial_observer: GroupElement
    input_signal: Callable[[float], np.ndarray]
    error_metrics: Callable[[ManifoldPoint, ManifoldPoint], tuple[float, float]]
    truth_closed_form: Callable[[float], tuple[ManifoldPoint, np.ndarray]] | None = None

    def __post_init__(self):
        report = verify_fundamental(self.structure, n_samples=50, tol=1e-9)
        if not report.passed:
            raise RuntimeError(f"scenario {self.name} is not fundamental: {report}")

    def initial_state(self) -> ObserverState:
        return ObserverState(self.initial_observer, self.structure, self.origin, 0.0)


def bearings_scenario() -> ScenarioBundle:
    """Direction of a reference vector in the body frame, gyro input."""

    def drift(xi: ManifoldPoint) -> np.ndarray:
        return np.zeros(3)

    def make_input(i: int):
        A = -hat(np.eye(3)[i])
        return (lambda xi: A @ xi.coords), (lambda xi: A)

    inputs, jacobians = zip(*(make_input(i) for i in range(3)))
    system = AffineSystem(
        SPHERE2, drift, tuple(inputs),
        drift_jacobian=lambda xi: np.zeros((3, 3)),
        input_jacobians=tuple(jacobians),
    )
    structure = FundamentalStructure(
        system, SPHERE_ACTION,
        lambda_bias=SO3.zero_algebra(),
        lambda_columns=tuple(SO3.algebra(np.eye(3)[i]) for i in range(3)),
    )
    origin = SPHERE2.point(E3)

    def cost_eval(e: ManifoldPoint) -> float:
        return 0.5 * float(np.sum((e.coords - origin.coords) ** 2))

    def cost_grad(e: ManifoldPoint, tangent: np.ndarray) -> float:
        return float(np.dot(e.coords - origin.coords, tangent))

    def metrics(truth: ManifoldPoint, est: ManifoldPoint) -> tuple[float, float]:
        c = float(np.clip(np.dot(truth.coords, est.coords), -1.0, 1.0))
        return float(np.arccos(c)), 0.0

    omega = np.array([0.3, 0.2, 1.0])
    return ScenarioBundle(
        name="bearings",
        structure=structure,
        channels=(),
        cost=CostFunction(cost_eval, cost_grad),
        origin=origin,
        initial_truth=SPHERE2.point(E1),
        initial_observer=SO3.exp(SO3.algebra(np.array([0.0, 0.5, 0.0]))),
        input_signal=lambda t: omega,
        error_metrics=metrics,
        truth_closed_form=lambda t: (
            SPHERE2.point(rotation_exp(t * omega).T @ E1),
            omega,
        ),
    )


def unicycle_scenario() -> ScenarioBundle:
    """Kinematic unicycle (theta, x, y) with turn-rate and speed inputs."""

    def drift(xi: ManifoldPoint) -> np.ndarray:
        return np.zeros(3)

    def f1(xi: ManifoldPoint) -> np.ndarray:
        return np.array([1.0, 0.0, 0.0])

    def f2(xi: ManifoldPoint) -> np.ndarray:
        theta = xi.coords[0]
        return np.array([0.0, np.cos(theta), np.sin(theta)])

    def j_zero(xi: ManifoldPoint) -> np.ndarray:
        return np.zeros((3, 3))

    def j2(xi: ManifoldPoint) -> np.ndarray:
        theta = xi.coords[0]
        J = np.zeros((3, 3))
        J[1, 0] = -np.sin(theta)
        J[2, 0] = np.cos(theta)
        return J

    system = AffineSystem(
        UNICYCLE_M, drift, (f1, f2),
        drift_jacobian=j_zero, input_jacobians=(j_zero, j2),
    )
    structure = FundamentalStructure(
        system, UNICYCLE_ACTION,
        lambda_bias=SE2.zero_algebra(),
        # Turn rate is the rotation generator, speed the body-x translation.
        lambda_columns=(SE2.algebra([1.0, 0.0, 0.0]), SE2.algebra([0.0, 1.0, 0.0])),
    )
    origin = UNICYCLE_M.point(np.zeros(3))

    def cost_eval(e: ManifoldPoint) -> float:
        d = UNICYCLE_M.chart_diff(e, origin)
        return 0.5 * float(np.sum(d**2))

    def cost_grad(e: ManifoldPoint, tangent: np.ndarray) -> float:
        return float(np.dot(UNICYCLE_M.chart_diff(e, origin), tangent))

    def metrics(truth: ManifoldPoint, est: ManifoldPoint) -> tuple[float, float]:
        att = abs(angle_diff(est.coords[0], truth.coords[0]))
        return att, float(np.linalg.norm(est.coords[1:3] - truth.coords[1:3]))

    v = np.array([1.0, 2.0])
    return ScenarioBundle(
        name="unicycle",
        structure=structure,
        channels=(),
        cost=CostFunction(cost_eval, cost_grad),
        origin=origin,
        initial_truth=UNICYCLE_M.point(np.zeros(3)),
        initial_observer=SE2.from_parts(0.8, np.array([1.0, -1.0])),
        input_signal=lambda t: v,
        error_metrics=metrics,
    )


def _vaa_system(gravity: np.ndarray) -> AffineSystem:
    def drift(xi: ManifoldPoint) -> np.ndarray:
        return np.concatenate([np.zeros(9), gravity])

    def make_omega_input(i: int):
        A = hat(np.eye(3)[i])
        J = np.zeros((12, 12))
        J[0:9, 0:9] = np.kron(np.eye(3), A.T)

        def fi(xi: ManifoldPoint) -> np.ndarray:
            R, _ = VAA_M.parts(xi)
            return np.concatenate([(R @ A).ravel(), np.zeros(3)])

        return fi, (lambda xi: J)

    def make_accel_input(i: int):
        a = np.eye(3)[i]
        J = np.zeros((12, 12))
        J[9:12, 0:9] = np.kron(np.eye(3), a.reshape(1, 3))

        def fi(xi: ManifoldPoint) -> np.ndarray:
            R, _ = VAA_M.parts(xi)
            return np.concatenate([np.zeros(9), R @ a])

        return fi, (lambda xi: J)

    made = [make_omega_input(i) for i in range(3)] + [make_accel_input(i) for i in range(3)]
    inputs, jacobians = zip(*made)
    return AffineSystem(
        VAA_M, drift, tuple(inputs),
        drift_jacobian=lambda xi: np.zeros((12, 12)),
        input_jacobians=tuple(jacobians),
    )


def vaa_structure(gravity: np.ndarray = GRAVITY) -> FundamentalStructure:
    """Fundamental structure of the velocity-aided attitude system.

    The input map sends (Omega, a) to (g, Omega, a + g) in the group
    algebra, so that the induced field is (R hat(Omega), R a + g).
    """
    columns = [VAA.from_algebra_parts(np.zeros(3), np.eye(3)[i], np.zeros(3)) for i in range(3)]
    columns += [VAA.from_algebra_parts(np.zeros(3), np.zeros(3), np.eye(3)[i]) for i in range(3)]
    return FundamentalStructure(
        _vaa_system(gravity), VAA_ACTION,
        lambda_bias=VAA.from_algebra_parts(gravity, np.zeros(3), gravity),
        lambda_columns=tuple(columns),
    )


def vaa_cost(alpha: float = 1.0) -> CostFunction:
    """0.5 |R_e - I|_F^2 + (alpha / 2) |v_e|^2 with its analytic pairing."""

    def evaluator(e: ManifoldPoint) -> float:
        R_e, v_e = VAA_M.parts(e)
        return 0.5 * float(np.sum((R_e - np.eye(3)) ** 2)) + 0.5 * alpha * float(np.sum(v_e**2))

    def gradient(e: ManifoldPoint, tangent: np.ndarray) -> float:
        R_e, v_e = VAA_M.parts(e)
        dR = tangent[0:9].reshape(3, 3)
        dv = tangent[9:12]
        return float(np.sum((R_e - np.eye(3)) * dR)) + alpha * float(np.dot(v_e, dv))

    return CostFunction(evaluator, gradient, alpha)


def vaa_channels(
    gains: VAAGains,
    mag_reference: np.ndarray = MAG_REFERENCE,
    gnss_rate_hz: float = 1.0,
    mag_rate_hz: float = 5.0,
    gnss_tau: float = 1.0,
    mag_tau: float = 0.2,
    flow_steps: int = 50,
) -> tuple[UpdateChannel, UpdateChannel]:
    m0 = np.asarray(mag_reference, dtype=float)

    def gnss_measure(xi: ManifoldPoint) -> np.ndarray:
        _, v = VAA_M.parts(xi)
        return v.copy()

    def gnss_delta(y: np.ndarray, Xhat: GroupElement):
        z, Q, x = VAA.parts(Xhat)
        return VAA.from_algebra_parts(
            gains.k_v * (y - z),
            gains.k_c * np.cross(x - z, y - z),
            gains.k_v * (y - x),
        )

    def mag_measure(xi: ManifoldPoint) -> np.ndarray:
        R, _ = VAA_M.parts(xi)
        return R.T @ m0

    def mag_delta(y: np.ndarray, Xhat: GroupElement):
        _, Q, _ = VAA.parts(Xhat)
        return VAA.from_algebra_parts(np.zeros(3), gains.k_m * np.cross(Q @ y, m0), np.zeros(3))

    gnss = UpdateChannel(GNSS_CHANNEL, "gnss", gnss_measure, gnss_delta,
                         tau=gnss_tau, n_flow_steps=flow_steps, rate_hz=gnss_rate_hz)
    mag = UpdateChannel(MAG_CHANNEL, "magnetometer", mag_measure, mag_delta,
                        tau=mag_tau, n_flow_steps=flow_steps, rate_hz=mag_rate_hz)
    return gnss, mag


def vaa_truth(t: float, gravity: np.ndarray = GRAVITY) -> tuple[ManifoldPoint, np.ndarray]:
    """Closed-form circular flight: R(t) = exp(t hat(e3)), v(t) = 2 R(t) e1.

    The matching inputs are (Omega, a) = (e3, 2 e2 - g), constant in time.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    R = rotation_exp(t * E3)
    point = VAA_M.from_parts(R, 2.0 * R @ E1)
    return point, np.concatenate([E3, 2.0 * E2 - gravity])


def vaa_initial_observer() -> GroupElement:
    """Observer start with a large attitude and velocity offset."""
    return VAA.from_parts(np.zeros(3), rotation_exp(0.99 * np.pi * E1), np.array([3.0, -2.0, 2.0]))


def vaa_scenario(
    gains: VAAGains | None = None,
    *,
    gravity: np.ndarray = GRAVITY,
    mag_reference: np.ndarray = MAG_REFERENCE,
    gnss_rate_hz: float = 1.0,
    mag_rate_hz: float = 5.0,
    gnss_tau: float = 1.0,
    mag_tau: float = 0.2,
    flow_steps: int = 50,
    enforce_gain_condition: bool = True,
) -> ScenarioBundle:
    """Full velocity-aided attitude bundle with both update channels.

    ``enforce_gain_condition=False`` is a diagnostic escape hatch for the
    verify command; simulation entry points keep it on.
    """
    gains = gains or VAAGains()
    if enforce_gain_condition:
        gains.validate()
    structure = vaa_structure(gravity)
    channels = vaa_channels(gains, mag_reference, gnss_rate_hz, mag_rate_hz,
                            gnss_tau, mag_tau, flow_steps)
    origin = VAA_M.from_parts(np.eye(3), np.zeros(3))
    truth0, input0 = vaa_truth(0.0, gravity)

    def metrics(truth: ManifoldPoint, est: ManifoldPoint) -> tuple[float, float]:
        R, v = VAA_M.parts(truth)
        Rhat, vhat = VAA_M.parts(est)
        return rotation_angle(Rhat.T @ R), float(np.linalg.norm(v - vhat))

    return ScenarioBundle(
        name="vaa",
        structure=structure,
        channels=channels,
        cost=vaa_cost(gains.alpha),
        origin=origin,
        initial_truth=truth0,
        initial_observer=vaa_initial_observer(),
        input_signal=lambda t: input0,
        error_metrics=metrics,
        truth_closed_form=lambda t: vaa_truth(t, gravity),
    )


SCENARIOS = {
    "bearings": bearings_scenario,
    "unicycle": unicycle_scenario,
    "vaa": vaa_scenario,
}


def load_scenario(name: str, **kwargs) -> ScenarioBundle:
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    if name != "vaa" and kwargs:
        kwargs = {}
    return SCENARIOS[name](**kwargs)
