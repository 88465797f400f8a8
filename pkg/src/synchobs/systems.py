"""Affine system maps, fundamental structures, and fundamental lifts.

An affine system is f_v = f0 + sum_i v_i f_i over chart-coordinate vector
fields. A fundamental structure ties such a system to a transitive group
action phi through an affine input map Lambda into the group's algebra so
that f_v(xi) = phi#_{Lambda(v)}(xi). The induced observer dynamics on the
group, Xhat' = Xhat Lambda(v), are a synchronous lift: the error
phi(inverse(Xhat), xi) is stationary under matched inputs.

Vector-field callables take a ManifoldPoint and return flat chart
components; they must be side-effect free.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .actions import GroupAction, ManifoldPoint, Manifold, act, error, fundamental_field
from .lie_core import AlgebraElement, GroupElement, TangentVector, left_translate

VectorField = Callable[[ManifoldPoint], np.ndarray]


@dataclass(frozen=True)
class AffineSystem:
    """Drift plus input vector fields on a manifold chart."""

    manifold: Manifold
    drift: VectorField
    inputs: tuple[VectorField, ...]
    drift_jacobian: Callable[[ManifoldPoint], np.ndarray] | None = None
    input_jacobians: tuple[Callable[[ManifoldPoint], np.ndarray], ...] | None = None

    @property
    def input_dim(self) -> int:
        return len(self.inputs)


def eval_system(f: AffineSystem, v: np.ndarray, xi: ManifoldPoint) -> TangentVector:
    """f0(xi) + sum_i v_i f_i(xi)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (f.input_dim,):
        raise ValueError(f"input must have shape ({f.input_dim},), got {v.shape}")
    out = np.array(f.drift(xi), dtype=float)
    for vi, fi in zip(v, f.inputs):
        out = out + vi * np.asarray(fi(xi), dtype=float)
    return TangentVector(xi, out)


@dataclass(frozen=True)
class FundamentalStructure:
    """A system together with the action and affine input map that realise it.

    The input map is stored as Lambda(v) = bias + sum_i v_i columns[i],
    exact componentwise in algebra coordinates.
    """

    system: AffineSystem
    action: GroupAction
    lambda_bias: AlgebraElement
    lambda_columns: tuple[AlgebraElement, ...]

    def __post_init__(self):
        if len(self.lambda_columns) != self.system.input_dim:
            raise ValueError("one lambda column per system input is required")


def lift_input(fs: FundamentalStructure, v: np.ndarray) -> AlgebraElement:
    """Affine input map Lambda(v) = bias + sum_i v_i columns[i]."""
    v = np.asarray(v, dtype=float)
    if v.shape != (fs.system.input_dim,):
        raise ValueError(f"input must have shape ({fs.system.input_dim},), got {v.shape}")
    vec = fs.lambda_bias.vec.copy()
    for vi, col in zip(v, fs.lambda_columns):
        vec = vec + vi * col.vec
    return AlgebraElement(fs.lambda_bias.group, vec)


def lifted_dynamics(fs: FundamentalStructure, Xhat: GroupElement, v: np.ndarray) -> TangentVector:
    """Fundamental lift f|_v(Xhat) = Xhat Lambda(v)."""
    return left_translate(Xhat, lift_input(fs, v))


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a numerical verification sweep."""

    name: str
    n_samples: int
    tol: float
    max_residual: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_samples": self.n_samples,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "passed": self.passed,
            "detail": self.detail,
        }

    def __str__(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return (
            f"{self.name}: max residual {self.max_residual:.3e} "
            f"(tol {self.tol:.1e}, {self.n_samples} samples) {verdict}"
        )


def _sample_state(fs: FundamentalStructure, rng: np.random.Generator) -> ManifoldPoint:
    # States are random group elements acting on the manifold's base point,
    # which covers the orbit of the (transitive) action.
    X = fs.action.group.random_element(rng)
    return act(fs.action, X, fs.action.manifold.base_point())


def _sample_input(fs: FundamentalStructure, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-2.0, 2.0, fs.system.input_dim)


def verify_fundamental(
    fs: FundamentalStructure, n_samples: int = 500, tol: float = 1e-9, seed: int = 0
) -> VerificationReport:
    """Check phi#_{Lambda(v)}(xi) = f_v(xi) on random (v, xi) samples."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        xi = _sample_state(fs, rng)
        v = _sample_input(fs, rng)
        lhs = fundamental_field(fs.action, lift_input(fs, v), xi).components
        rhs = eval_system(fs.system, v, xi).components
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return VerificationReport("fundamental", n_samples, tol, worst, worst <= tol)


def verify_synchrony(
    fs: FundamentalStructure,
    n_samples: int = 200,
    tol: float = 1e-5,
    seed: int = 0,
    h: float = 1e-6,
) -> VerificationReport:
    """Check D_Xhat e[f|_v(Xhat)] + D_xi e[f_v(xi)] = 0 by finite differences.

    The observer-side derivative is taken along the exp-flow
    Xhat exp(s Lambda(v)) with xi held fixed. The state-side derivative is
    taken along a chart curve through xi with velocity f_v(xi) evaluated
    from the system itself (invariants restored), so a wrong input map
    cannot cancel against its own induced flow.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    group = fs.action.group
    manifold = fs.action.manifold
    worst = 0.0
    for _ in range(n_samples):
        Xhat = group.random_element(rng)
        xi = _sample_state(fs, rng)
        v = _sample_input(fs, rng)
        u = lift_input(fs, v)
        step = h * max(1.0, u.norm())

        obs_fwd = error(fs.action, group.compose(Xhat, group.exp(u * step)), xi)
        obs_bwd = error(fs.action, group.compose(Xhat, group.exp(u * (-step))), xi)
        d_obs = manifold.chart_diff(obs_fwd, obs_bwd) / (2.0 * step)

        vel = eval_system(fs.system, v, xi).components
        st_fwd = error(fs.action, Xhat, manifold.point(xi.coords + step * vel))
        st_bwd = error(fs.action, Xhat, manifold.point(xi.coords - step * vel))
        d_state = manifold.chart_diff(st_fwd, st_bwd) / (2.0 * step)

        worst = max(worst, float(np.max(np.abs(d_obs + d_state))))
    return VerificationReport("synchrony", n_samples, tol, worst, worst <= tol)
