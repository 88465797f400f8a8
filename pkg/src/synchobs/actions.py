"""Right group actions on manifold charts, fundamental vector fields,
the synchronous error function, and the reconstruction map.

Every action phi satisfies the right-action axioms phi(I, xi) = xi and
phi(Y, phi(X, xi)) = phi(X Y, xi). The error of an observer state Xhat
against a true state xi is e(Xhat, xi) = phi(inverse(Xhat), xi), and a
choice of origin induces the reconstruction xi_hat = phi(Xhat, origin),
with e(Xhat, xi) = origin iff xi_hat = xi.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .lie_core import (
    SE2,
    SO3,
    VAA,
    AlgebraElement,
    GroupElement,
    LieGroup,
    TangentVector,
    angle_diff,
    hat,
    project_rotation,
    rot2,
    rotation_angle,
    wrap_angle,
)

SPHERE_NORM_TOL = 1e-9
ROTATION_BLOCK_TOL = 1e-9


class Manifold(ABC):
    """A chart for one of the supported state spaces."""

    name: str
    chart_dim: int
    intrinsic_dim: int
    labels: tuple[str, ...]

    def point(self, coords: np.ndarray) -> "ManifoldPoint":
        coords = np.asarray(coords, dtype=float).reshape(self.chart_dim).copy()
        return ManifoldPoint(self, self.normalize(coords))

    @abstractmethod
    def normalize(self, coords: np.ndarray) -> np.ndarray:
        """Restore chart invariants (unit norm, angle wrap, orthonormal blocks)."""

    def chart_diff(self, a: "ManifoldPoint", b: "ManifoldPoint") -> np.ndarray:
        """Chart difference a - b, wrap-aware where needed."""
        return a.coords - b.coords

    @abstractmethod
    def tangent_basis(self, p: "ManifoldPoint") -> np.ndarray:
        """Orthonormal basis of the tangent space, (chart_dim, intrinsic_dim)."""

    @abstractmethod
    def base_point(self) -> "ManifoldPoint":
        """Canonical point used as sampling anchor."""

    @abstractmethod
    def random_point(self, rng: np.random.Generator) -> "ManifoldPoint":
        ...

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ManifoldPoint:
    manifold: Manifold
    coords: np.ndarray

    def __repr__(self) -> str:
        return f"ManifoldPoint({self.manifold.name}, {np.array2string(self.coords, precision=4)})"


class _Sphere2(Manifold):
    """Unit directions in R^3."""

    name = "Sphere2"
    chart_dim = 3
    intrinsic_dim = 2
    labels = ("eta0", "eta1", "eta2")

    def normalize(self, coords: np.ndarray) -> np.ndarray:
        n = np.linalg.norm(coords)
        if n < 1e-6:
            raise ValueError("Sphere2 point must have norm near 1, got near-zero vector")
        return coords / n

    def tangent_basis(self, p: ManifoldPoint) -> np.ndarray:
        eta = p.coords
        # Any axis not parallel to eta seeds an orthonormal pair.
        seed = np.eye(3)[np.argmin(np.abs(eta))]
        t1 = np.cross(eta, seed)
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(eta, t1)
        return np.column_stack([t1, t2])

    def base_point(self) -> ManifoldPoint:
        return self.point(np.array([0.0, 0.0, 1.0]))

    def random_point(self, rng: np.random.Generator) -> ManifoldPoint:
        while True:
            v = rng.uniform(-1.0, 1.0, 3)
            if np.linalg.norm(v) > 0.1:
                return self.point(v)


class _UnicycleM(Manifold):
    """Heading and planar position, chart (theta, x, y)."""

    name = "UnicycleM"
    chart_dim = 3
    intrinsic_dim = 3
    labels = ("theta", "x", "y")

    def normalize(self, coords: np.ndarray) -> np.ndarray:
        out = coords.copy()
        out[0] = wrap_angle(out[0])
        return out

    def chart_diff(self, a: ManifoldPoint, b: ManifoldPoint) -> np.ndarray:
        d = a.coords - b.coords
        d[0] = angle_diff(a.coords[0], b.coords[0])
        return d

    def tangent_basis(self, p: ManifoldPoint) -> np.ndarray:
        return np.eye(3)

    def base_point(self) -> ManifoldPoint:
        return self.point(np.zeros(3))

    def random_point(self, rng: np.random.Generator) -> ManifoldPoint:
        return self.point(np.array([rng.uniform(0.0, 2.0 * np.pi), *rng.uniform(-5.0, 5.0, 2)]))


class _VAAM(Manifold):
    """Attitude and velocity, chart [R row-major (9), v (3)]."""

    name = "VAAM"
    chart_dim = 12
    intrinsic_dim = 6
    labels = (
        "R00", "R01", "R02", "R10", "R11", "R12", "R20", "R21", "R22",
        "v0", "v1", "v2",
    )

    def from_parts(self, R: np.ndarray, v: np.ndarray) -> ManifoldPoint:
        return self.point(np.concatenate([np.asarray(R, float).ravel(), np.asarray(v, float)]))

    @staticmethod
    def parts(p: ManifoldPoint) -> tuple[np.ndarray, np.ndarray]:
        return p.coords[0:9].reshape(3, 3), p.coords[9:12]

    def normalize(self, coords: np.ndarray) -> np.ndarray:
        out = coords.copy()
        R = coords[0:9].reshape(3, 3)
        if np.linalg.det(R) <= 0.0:
            raise ValueError("VAAM rotation block must have positive determinant")
        if np.linalg.norm(R.T @ R - np.eye(3)) > ROTATION_BLOCK_TOL:
            R = project_rotation(R)
        out[0:9] = R.ravel()
        return out

    def tangent_basis(self, p: ManifoldPoint) -> np.ndarray:
        R, _ = self.parts(p)
        cols = []
        for i in range(3):
            cols.append(np.concatenate([(R @ hat(np.eye(3)[i])).ravel() / np.sqrt(2.0), np.zeros(3)]))
        for i in range(3):
            cols.append(np.concatenate([np.zeros(9), np.eye(3)[i]]))
        return np.column_stack(cols)

    def base_point(self) -> ManifoldPoint:
        return self.from_parts(np.eye(3), np.zeros(3))

    def random_point(self, rng: np.random.Generator) -> ManifoldPoint:
        from .lie_core import rotation_exp

        R = rotation_exp(rng.uniform(-np.pi, np.pi, 3))
        return self.from_parts(R, rng.uniform(-5.0, 5.0, 3))


class EuclideanRn(Manifold):
    """Flat R^n chart, used by the accessibility analyzer for field specs."""

    def __init__(self, n: int):
        self.name = f"R{n}"
        self.chart_dim = n
        self.intrinsic_dim = n
        self.labels = tuple(f"x{i}" for i in range(n))

    def normalize(self, coords: np.ndarray) -> np.ndarray:
        return coords

    def tangent_basis(self, p: ManifoldPoint) -> np.ndarray:
        return np.eye(self.chart_dim)

    def base_point(self) -> ManifoldPoint:
        return self.point(np.zeros(self.chart_dim))

    def random_point(self, rng: np.random.Generator) -> ManifoldPoint:
        return self.point(rng.uniform(-5.0, 5.0, self.chart_dim))


SPHERE2 = _Sphere2()
UNICYCLE_M = _UnicycleM()
VAA_M = _VAAM()


class GroupAction(ABC):
    """A concrete right action of one of the supported groups."""

    group: LieGroup
    manifold: Manifold
    name: str

    @abstractmethod
    def _apply(self, X: GroupElement, xi: ManifoldPoint) -> np.ndarray:
        """Raw chart coordinates of phi(X, xi); invariants restored by act()."""

    @abstractmethod
    def _fundamental(self, u: AlgebraElement, xi: ManifoldPoint) -> np.ndarray:
        """Chart components of the fundamental field phi#_u(xi) = D phi_xi(I)[u]."""

    @abstractmethod
    def transport_between(self, a: ManifoldPoint, b: ManifoldPoint) -> GroupElement:
        """Some X with phi(X, a) = b (the action is transitive)."""


class _SphereRotationAction(GroupAction):
    """phi(R, eta) = R^T eta."""

    group = SO3
    manifold = SPHERE2
    name = "sphere_rotation"

    def _apply(self, X: GroupElement, xi: ManifoldPoint) -> np.ndarray:
        return SO3.matrix(X).T @ xi.coords

    def _fundamental(self, u: AlgebraElement, xi: ManifoldPoint) -> np.ndarray:
        return -hat(u.vec) @ xi.coords

    def transport_between(self, a: ManifoldPoint, b: ManifoldPoint) -> GroupElement:
        # Need R^T a = b, i.e. R maps b to a; use the minimal rotation.
        axis = np.cross(b.coords, a.coords)
        s, c = np.linalg.norm(axis), float(np.dot(b.coords, a.coords))
        if s < 1e-12:
            if c > 0.0:
                return SO3.identity()
            seed = np.eye(3)[np.argmin(np.abs(a.coords))]
            axis = np.cross(a.coords, seed)
            axis = axis / np.linalg.norm(axis) * np.pi
            return SO3.exp(SO3.algebra(axis))
        angle = np.arctan2(s, c)
        return SO3.exp(SO3.algebra(axis / s * angle))


class _UnicyclePlanarAction(GroupAction):
    """phi((t, a, b), (theta, x, y)) rotates the heading by t and translates
    the position by (a, b) expressed in the body frame at heading theta."""

    group = SE2
    manifold = UNICYCLE_M
    name = "unicycle_planar"

    def _apply(self, X: GroupElement, xi: ManifoldPoint) -> np.ndarray:
        t, ab = SE2.parts(X)
        theta, pos = float(xi.coords[0]), xi.coords[1:3]
        out = pos + rot2(theta) @ ab
        return np.array([theta + t, out[0], out[1]])

    def _fundamental(self, u: AlgebraElement, xi: ManifoldPoint) -> np.ndarray:
        theta = float(xi.coords[0])
        t = rot2(theta) @ u.vec[1:3]
        return np.array([u.vec[0], t[0], t[1]])

    def transport_between(self, a: ManifoldPoint, b: ManifoldPoint) -> GroupElement:
        t = wrap_angle(b.coords[0] - a.coords[0])
        ab = rot2(a.coords[0]).T @ (b.coords[1:3] - a.coords[1:3])
        return SE2.from_parts(t, ab)


class _VAAAction(GroupAction):
    """phi((z, Q, x), (R, v)) = (R Q, v + R x + (I - R) z)."""

    group = VAA
    manifold = VAA_M
    name = "vaa"

    def _apply(self, X: GroupElement, xi: ManifoldPoint) -> np.ndarray:
        z, Q, x = VAA.parts(X)
        R, v = VAA_M.parts(xi)
        return np.concatenate([(R @ Q).ravel(), v + R @ x + z - R @ z])

    def _fundamental(self, u: AlgebraElement, xi: ManifoldPoint) -> np.ndarray:
        w, omega, trans = VAA.algebra_parts(u)
        R, _ = VAA_M.parts(xi)
        return np.concatenate([(R @ hat(omega)).ravel(), R @ trans + w - R @ w])

    def transport_between(self, a: ManifoldPoint, b: ManifoldPoint) -> GroupElement:
        Ra, va = VAA_M.parts(a)
        Rb, vb = VAA_M.parts(b)
        # z = 0 leaves (Q, x) = (Ra^T Rb, Ra^T (vb - va)).
        return VAA.from_parts(np.zeros(3), Ra.T @ Rb, Ra.T @ (vb - va))


SPHERE_ACTION = _SphereRotationAction()
UNICYCLE_ACTION = _UnicyclePlanarAction()
VAA_ACTION = _VAAAction()


def _check_ids(phi: GroupAction, X=None, u=None, xi: ManifoldPoint | None = None) -> None:
    if X is not None and X.group is not phi.group:
        raise ValueError(f"action {phi.name} expects group {phi.group.name}, got {X.group.name}")
    if u is not None and u.group is not phi.group:
        raise ValueError(f"action {phi.name} expects algebra of {phi.group.name}, got {u.group.name}")
    if xi is not None and xi.manifold is not phi.manifold:
        raise ValueError(f"action {phi.name} expects manifold {phi.manifold.name}, got {xi.manifold.name}")


def act(phi: GroupAction, X: GroupElement, xi: ManifoldPoint) -> ManifoldPoint:
    """Apply the action; output invariants are restored."""
    _check_ids(phi, X=X, xi=xi)
    return phi.manifold.point(phi._apply(X, xi))


def fundamental_field(phi: GroupAction, u: AlgebraElement, xi: ManifoldPoint) -> TangentVector:
    """Fundamental vector field phi#_u(xi), by the closed-form differential."""
    _check_ids(phi, u=u, xi=xi)
    return TangentVector(xi, phi._fundamental(u, xi))


def fundamental_field_fd(
    phi: GroupAction, u: AlgebraElement, xi: ManifoldPoint, h: float | None = None
) -> TangentVector:
    """Central finite difference of s -> act(phi, exp(s u), xi) at s = 0.

    Cross-check for the closed forms; step scales with the element size.
    """
    _check_ids(phi, u=u, xi=xi)
    if h is None:
        h = 1e-6 * max(1.0, float(np.linalg.norm(u.vec)))
    fwd = act(phi, u.group.exp(u * h), xi)
    bwd = act(phi, u.group.exp(u * (-h)), xi)
    return TangentVector(xi, phi.manifold.chart_diff(fwd, bwd) / (2.0 * h))


def error(phi: GroupAction, Xhat: GroupElement, xi: ManifoldPoint) -> ManifoldPoint:
    """Synchronous error e(Xhat, xi) = phi(inverse(Xhat), xi)."""
    _check_ids(phi, X=Xhat, xi=xi)
    return act(phi, Xhat.group.inverse(Xhat), xi)


def reconstruct(phi: GroupAction, Xhat: GroupElement, origin: ManifoldPoint) -> ManifoldPoint:
    """State estimate phi(Xhat, origin); satisfies error(phi, Xhat, .) = origin."""
    return act(phi, Xhat, origin)
