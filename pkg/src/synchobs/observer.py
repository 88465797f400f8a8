"""Synchronous observer architecture with asynchronous flow-based updates.

Between measurements the observer propagates on the group by
Xhat <- Xhat exp(dt Lambda(v)), which is exact for piecewise-constant
inputs, so the error e(Xhat, xi) = phi(inverse(Xhat), xi) is stationary to
rounding. A measurement on channel l triggers an instantaneous update:
the flow of the right-trivialised correction field
Xhat' = Delta^l(Xhat', y) Xhat' for a fixed duration tau, integrated with
left-Euler substeps. Each channel's correction is designed to make a cost
of the error non-increasing, so the cost is a Lyapunov-like function of
the hybrid error trajectory: constant between events, decreased at events.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .actions import GroupAction, ManifoldPoint, act, error, reconstruct
from .lie_core import AlgebraElement, GroupElement, compose, exp
from .systems import FundamentalStructure, VerificationReport, eval_system, lift_input

logger = logging.getLogger(__name__)

# An update is reported as a decrease violation only beyond this slack.
DECREASE_SLACK = 1e-12


@dataclass(frozen=True)
class ObserverState:
    """Group-valued observer state with its structure and chosen origin."""

    Xhat: GroupElement
    structure: FundamentalStructure
    origin: ManifoldPoint
    t: float = 0.0

    def estimate(self) -> ManifoldPoint:
        return reconstruct(self.structure.action, self.Xhat, self.origin)

    def error_to(self, xi: ManifoldPoint) -> ManifoldPoint:
        return error(self.structure.action, self.Xhat, xi)


@dataclass(frozen=True)
class UpdateChannel:
    """One asynchronous measurement channel with its correction field.

    ``delta(y, Xhat)`` is the right-trivialised correction Delta in the
    algebra; the update flows Xhat' = Delta Xhat' for duration tau using
    n_flow_steps left-Euler substeps, re-evaluating Delta each substep.
    """

    channel_id: int
    name: str
    measure: Callable[[ManifoldPoint], np.ndarray]
    delta: Callable[[np.ndarray, GroupElement], AlgebraElement]
    tau: float
    n_flow_steps: int = 50
    rate_hz: float = 1.0

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.n_flow_steps < 1:
            raise ValueError("n_flow_steps must be >= 1")
        if self.rate_hz <= 0.0:
            raise ValueError("rate_hz must be positive")


@dataclass(frozen=True)
class Measurement:
    channel_id: int
    value: np.ndarray
    timestamp: float


@dataclass(frozen=True)
class CostFunction:
    """Cost of the error point, vanishing at the origin.

    ``gradient(e, tangent_components) -> float`` is the analytic pairing
    D L(e)[tangent], used by the differential decrease check so that the
    check does not stack two finite-difference layers.
    """

    evaluator: Callable[[ManifoldPoint], float]
    gradient: Callable[[ManifoldPoint, np.ndarray], float] | None = None
    alpha: float = 1.0


@dataclass(frozen=True)
class TraceRow:
    t: float
    truth: ManifoldPoint
    estimate: ManifoldPoint
    error: ManifoldPoint
    lyapunov: float
    event: int  # 0 = none, otherwise the channel id


@dataclass
class SimTrace:
    """Timestamped record of truth, estimate, error, cost, and events."""

    rows: list[TraceRow]

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.rows])

    def lyapunov(self) -> np.ndarray:
        return np.array([r.lyapunov for r in self.rows])

    def events(self) -> np.ndarray:
        return np.array([r.event for r in self.rows])

    def event_count(self, channel_id: int) -> int:
        return int(np.sum(self.events() == channel_id))


def propagate(obs: ObserverState, v: np.ndarray, dt: float) -> ObserverState:
    """Xhat <- Xhat exp(dt Lambda(v)); exact for constant v over the step."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    u = lift_input(obs.structure, v)
    Xhat = compose(obs.Xhat, exp(u * dt))
    return replace(obs, Xhat=Xhat, t=obs.t + dt)


def propagate_truth(
    fs: FundamentalStructure, xi: ManifoldPoint, v: np.ndarray, dt: float
) -> ManifoldPoint:
    """Exact flow of f_v for constant v: xi <- phi(exp(dt Lambda(v)), xi)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    u = lift_input(fs, v)
    return act(fs.action, exp(u * dt), xi)


def propagate_truth_euler(
    fs: FundamentalStructure, xi: ManifoldPoint, v: np.ndarray, dt: float
) -> ManifoldPoint:
    """Chart Euler step xi <- xi + dt f_v(xi), invariants restored."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    vel = eval_system(fs.system, v, xi).components
    return xi.manifold.point(xi.coords + dt * vel)


def apply_update(obs: ObserverState, ch: UpdateChannel, y: Measurement) -> ObserverState:
    """Flow of Xhat' = Delta(Xhat', y) Xhat' for duration tau (hybrid jump).

    Left-Euler on the group: Xhat <- exp((tau/n) Delta(Xhat, y)) Xhat, with
    Delta re-evaluated at every substep. Time is unchanged.
    """
    if y.channel_id != ch.channel_id:
        raise ValueError(f"measurement channel {y.channel_id} != channel {ch.channel_id}")
    Xhat = obs.Xhat
    h = ch.tau / ch.n_flow_steps
    for _ in range(ch.n_flow_steps):
        delta = ch.delta(y.value, Xhat)
        Xhat = compose(exp(delta * h), Xhat)
    return replace(obs, Xhat=Xhat)


def lyapunov_value(cost: CostFunction, e: ManifoldPoint) -> float:
    return float(cost.evaluator(e))


def correction_cost_rate(
    fs: FundamentalStructure,
    cost: CostFunction,
    ch: UpdateChannel,
    Xhat: GroupElement,
    xi: ManifoldPoint,
) -> float:
    """Derivative of the cost along the update flow at flow time zero.

    The error moves by e' = -phi#_Delta(e) under Xhat' = Delta Xhat, so the
    rate is D L(e)[-phi#_Delta(e)], evaluated with the analytic gradient.
    Non-positive everywhere is the design condition for a decreasing update.
    """
    if cost.gradient is None:
        raise ValueError("cost gradient required for the differential check")
    y = ch.measure(xi)
    delta = ch.delta(y, Xhat)
    e = error(fs.action, Xhat, xi)
    edot = -fs.action._fundamental(delta, e)
    return float(cost.gradient(e, edot))


def differential_decrease_check(
    fs: FundamentalStructure,
    cost: CostFunction,
    ch: UpdateChannel,
    n_samples: int = 1000,
    tol: float = 1e-12,
    seed: int = 0,
) -> VerificationReport:
    """Evaluate the correction cost rate at random states; pass iff <= tol."""
    rng = np.random.default_rng(seed)
    group = fs.action.group
    worst = -np.inf
    for _ in range(n_samples):
        Xhat = group.random_element(rng)
        xi = act(fs.action, group.random_element(rng), fs.action.manifold.base_point())
        worst = max(worst, correction_cost_rate(fs, cost, ch, Xhat, xi))
    return VerificationReport(
        f"decrease[{ch.name}]", n_samples, tol, worst, worst <= tol,
        detail="max cost rate along the update flow",
    )


def _event_period_steps(rate_hz: float, dt: float) -> int:
    period = 1.0 / rate_hz
    m = round(period / dt)
    if m < 1 or abs(m * dt - period) > 1e-9 * max(1.0, period):
        raise ValueError(
            f"dt = {dt} does not divide the measurement period {period} (rate {rate_hz} Hz)"
        )
    return m


def run_hybrid(
    fs: FundamentalStructure,
    obs0: ObserverState,
    truth0: ManifoldPoint,
    input_signal: Callable[[float], np.ndarray],
    channels: Sequence[UpdateChannel],
    cost: CostFunction,
    t_end: float,
    dt: float,
    integrator: str = "exact",
) -> SimTrace:
    """Alternate grid propagation with instantaneous updates at event times.

    Measurement instants are integer multiples of each channel's period,
    snapped to the dt grid (the grid must subdivide every period). Channels
    firing at the same instant are applied in ascending channel_id. Rows are
    recorded at every grid time plus one row per update (same t, pre/post).
    """
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError("dt and t_end must be positive")
    if integrator not in ("exact", "euler"):
        raise ValueError(f"unknown integrator {integrator!r}")
    n_steps = round(t_end / dt)
    if abs(n_steps * dt - t_end) > 1e-9:
        raise ValueError(f"dt = {dt} does not divide t_end = {t_end}")
    channels = sorted(channels, key=lambda c: c.channel_id)
    periods = {ch.channel_id: _event_period_steps(ch.rate_hz, dt) for ch in channels}
    step_truth = propagate_truth if integrator == "exact" else propagate_truth_euler

    obs = obs0
    truth = truth0

    def row(event: int) -> TraceRow:
        e = obs.error_to(truth)
        return TraceRow(obs.t, truth, obs.estimate(), e, lyapunov_value(cost, e), event)

    rows = [row(0)]
    for i in range(1, n_steps + 1):
        t_prev = (i - 1) * dt
        v = np.asarray(input_signal(t_prev), dtype=float)
        truth = step_truth(fs, truth, v, dt)
        obs = propagate(obs, v, dt)
        obs = replace(obs, t=i * dt)  # recomputed, not accumulated
        rows.append(row(0))
        for ch in channels:
            if i % periods[ch.channel_id] == 0:
                y = Measurement(ch.channel_id, ch.measure(truth), obs.t)
                before = rows[-1].lyapunov
                obs = apply_update(obs, ch, y)
                rows.append(row(ch.channel_id))
                after = rows[-1].lyapunov
                if after > before + DECREASE_SLACK:
                    logger.warning(
                        "update on channel %d at t=%.6f increased the cost: %.3e -> %.3e",
                        ch.channel_id, obs.t, before, after,
                    )
    return SimTrace(rows)


@dataclass(frozen=True)
class MonotonicityReport:
    """Verdict on the Lyapunov trace of a hybrid run."""

    n_events: int
    max_event_increase: float
    max_flat_drift: float
    event_tol: float
    flat_tol: float

    @property
    def passed(self) -> bool:
        return self.max_event_increase <= self.event_tol and self.max_flat_drift <= self.flat_tol


def check_lyapunov_monotonicity(
    trace: SimTrace, event_tol: float = DECREASE_SLACK, flat_tol: float = 1e-9
) -> MonotonicityReport:
    """Non-increase at every event row, flatness between events."""
    lyap = trace.lyapunov()
    events = trace.events()
    max_increase = 0.0
    max_drift = 0.0
    n_events = 0
    segment_start = lyap[0]
    for k in range(1, len(lyap)):
        if events[k] != 0:
            n_events += 1
            max_increase = max(max_increase, lyap[k] - lyap[k - 1])
            segment_start = lyap[k]
        else:
            max_drift = max(max_drift, abs(lyap[k] - segment_start))
    return MonotonicityReport(n_events, max_increase, max_drift, event_tol, flat_tol)
