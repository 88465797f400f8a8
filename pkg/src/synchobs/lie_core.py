"""Concrete Lie groups and algebras behind one group contract.

Three groups are supported:

* ``SO3``  rotations, stored as 3x3 matrices.
* ``SE2``  planar rigid transforms, stored as (theta, x, y) with theta
  wrapped to [0, 2pi).
* ``VAA``  the velocity-attitude group (R^3 x SO(3)) |x R^3 with elements
  (z, Q, x) and product
  (z1, Q1, x1) (z2, Q2, x2) = (z1 + z2, Q1 Q2, x1 + Q1 x2 + (I - Q1) z2).

Group and algebra elements are immutable value objects and all operations
are pure functions, so values can be shared and sent across threads without
synchronization.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any

import numpy as np

TWO_PI = 2.0 * np.pi

# Rotation blocks are repaired by polar projection once the orthonormality
# defect exceeds this.
ORTHONORMALITY_TOL = 1e-9

# Below this angle the trigonometric coefficients switch to series.
SMALL_ANGLE = 1e-8


def hat(omega: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector, hat(w) v = w x v."""
    wx, wy, wz = omega
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def vee(W: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hat` for a skew-symmetric 3x3 matrix."""
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [0, 2pi)."""
    out = float(theta) % TWO_PI
    return 0.0 if out == TWO_PI else out


def angle_diff(a: float, b: float) -> float:
    """Minimal signed difference a - b, in (-pi, pi]."""
    d = (a - b) % TWO_PI
    if d > np.pi:
        d -= TWO_PI
    return d


def rot2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotation_exp(omega: np.ndarray) -> np.ndarray:
    """Rotation matrix exp(hat(omega)), closed form with a series fallback."""
    theta = float(np.linalg.norm(omega))
    W = hat(omega)
    if theta < SMALL_ANGLE:
        c1 = 1.0 - theta**2 / 6.0
        c2 = 0.5 - theta**2 / 24.0
    else:
        c1 = np.sin(theta) / theta
        c2 = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + c1 * W + c2 * (W @ W)


def so3_left_jacobian(omega: np.ndarray) -> np.ndarray:
    """Integral of exp(s hat(omega)) over s in [0, 1]."""
    theta = float(np.linalg.norm(omega))
    W = hat(omega)
    if theta < SMALL_ANGLE:
        c1 = 0.5 - theta**2 / 24.0
        c2 = 1.0 / 6.0 - theta**2 / 120.0
    else:
        c1 = (1.0 - np.cos(theta)) / theta**2
        c2 = (theta - np.sin(theta)) / theta**3
    return np.eye(3) + c1 * W + c2 * (W @ W)


def project_rotation(Q: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix in the Frobenius sense (polar projection)."""
    U, _, Vt = np.linalg.svd(Q)
    R = U @ Vt
    if np.linalg.det(R) < 0.0:
        R = U @ np.diag([1.0, 1.0, -1.0]) @ Vt
    return R


def rotation_angle(R: np.ndarray) -> float:
    """Rotation angle in [0, pi] of a rotation matrix."""
    return float(np.arccos(np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)))


def _checked_rotation(Q: np.ndarray, what: str) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (3, 3):
        raise ValueError(f"{what} must be a 3x3 matrix, got shape {Q.shape}")
    if np.linalg.det(Q) <= 0.0:
        raise ValueError(f"{what} must have positive determinant")
    defect = np.linalg.norm(Q.T @ Q - np.eye(3))
    if defect > ORTHONORMALITY_TOL:
        Q = project_rotation(Q)
    return Q


@dataclass(frozen=True)
class GroupElement:
    """Element of a concrete Lie group, in that group's chart coordinates."""

    group: "LieGroup"
    coords: np.ndarray

    def __repr__(self) -> str:
        return f"GroupElement({self.group.name}, {np.array2string(self.coords, precision=4)})"


@dataclass(frozen=True)
class AlgebraElement:
    """Lie algebra element as a coordinate vector in the group's basis.

    Coordinates: so(3) -> Omega in R^3 (housing hat(Omega)); se(2) ->
    (omega, u1, u2); vaa -> (w, Omega, u) in R^9 housing (w, hat(Omega), u).
    Addition and scaling are exact componentwise operations.
    """

    group: "LieGroup"
    vec: np.ndarray

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _require_same_group(self, other)
        return AlgebraElement(self.group, self.vec + other.vec)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _require_same_group(self, other)
        return AlgebraElement(self.group, self.vec - other.vec)

    def __mul__(self, scalar: float) -> "AlgebraElement":
        return AlgebraElement(self.group, self.vec * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.group, -self.vec)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def __repr__(self) -> str:
        return f"AlgebraElement({self.group.name}, {np.array2string(self.vec, precision=4)})"


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector at ``base``, components in the base's chart coordinates."""

    base: Any
    components: np.ndarray


class LieGroup(ABC):
    """Abstract group contract: compose, inverse, identity, exp, bracket,
    left translation of algebra elements."""

    name: str
    algebra_dim: int
    chart_dim: int

    def element(self, coords: np.ndarray) -> GroupElement:
        return GroupElement(self, self._validated(np.asarray(coords, dtype=float).copy()))

    def algebra(self, vec: np.ndarray) -> AlgebraElement:
        vec = np.asarray(vec, dtype=float).reshape(self.algebra_dim).copy()
        return AlgebraElement(self, vec)

    def zero_algebra(self) -> AlgebraElement:
        return AlgebraElement(self, np.zeros(self.algebra_dim))

    @abstractmethod
    def _validated(self, coords: np.ndarray) -> np.ndarray:
        """Check and restore the chart invariants of raw coordinates."""

    @abstractmethod
    def identity(self) -> GroupElement: ...

    @abstractmethod
    def compose(self, a: GroupElement, b: GroupElement) -> GroupElement: ...

    @abstractmethod
    def inverse(self, a: GroupElement) -> GroupElement: ...

    @abstractmethod
    def exp(self, u: AlgebraElement) -> GroupElement: ...

    @abstractmethod
    def bracket(self, u: AlgebraElement, v: AlgebraElement) -> AlgebraElement: ...

    @abstractmethod
    def left_translate(self, a: GroupElement, u: AlgebraElement) -> TangentVector: ...

    def chart_diff(self, a: GroupElement, b: GroupElement) -> np.ndarray:
        """Chart-coordinate difference a - b, wrap-aware where needed."""
        return a.coords - b.coords

    def random_algebra(self, rng: np.random.Generator, scale: float = 1.0) -> AlgebraElement:
        """Algebra sample uniform in the box [-scale, scale]^n."""
        return self.algebra(rng.uniform(-scale, scale, self.algebra_dim))

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> GroupElement:
        return self.exp(self.random_algebra(rng, scale))

    def __repr__(self) -> str:
        return self.name


class _SO3(LieGroup):
    """Rotation group; chart coordinates are the row-major 3x3 matrix."""

    name = "SO3"
    algebra_dim = 3
    chart_dim = 9

    def from_matrix(self, R: np.ndarray) -> GroupElement:
        return self.element(np.asarray(R, dtype=float).ravel())

    @staticmethod
    def matrix(a: GroupElement) -> np.ndarray:
        return a.coords.reshape(3, 3)

    def _validated(self, coords: np.ndarray) -> np.ndarray:
        if coords.shape != (9,):
            raise ValueError(f"SO3 chart coordinates must have shape (9,), got {coords.shape}")
        return _checked_rotation(coords.reshape(3, 3), "SO3 element").ravel()

    def identity(self) -> GroupElement:
        return GroupElement(self, np.eye(3).ravel())

    def compose(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return self.element((self.matrix(a) @ self.matrix(b)).ravel())

    def inverse(self, a: GroupElement) -> GroupElement:
        return GroupElement(self, self.matrix(a).T.copy().ravel())

    def exp(self, u: AlgebraElement) -> GroupElement:
        return GroupElement(self, rotation_exp(u.vec).ravel())

    def bracket(self, u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(self, np.cross(u.vec, v.vec))

    def left_translate(self, a: GroupElement, u: AlgebraElement) -> TangentVector:
        return TangentVector(a, (self.matrix(a) @ hat(u.vec)).ravel())


class _SE2(LieGroup):
    """Planar rigid transforms; chart coordinates are (theta, x, y)."""

    name = "SE2"
    algebra_dim = 3
    chart_dim = 3

    def from_parts(self, theta: float, xy: np.ndarray) -> GroupElement:
        xy = np.asarray(xy, dtype=float)
        return self.element(np.array([theta, xy[0], xy[1]]))

    @staticmethod
    def parts(a: GroupElement) -> tuple[float, np.ndarray]:
        return float(a.coords[0]), a.coords[1:3]

    def _validated(self, coords: np.ndarray) -> np.ndarray:
        if coords.shape != (3,):
            raise ValueError(f"SE2 chart coordinates must have shape (3,), got {coords.shape}")
        out = coords.copy()
        out[0] = wrap_angle(out[0])
        return out

    def identity(self) -> GroupElement:
        return GroupElement(self, np.zeros(3))

    def compose(self, a: GroupElement, b: GroupElement) -> GroupElement:
        ta, pa = self.parts(a)
        tb, pb = self.parts(b)
        p = pa + rot2(ta) @ pb
        return GroupElement(self, np.array([wrap_angle(ta + tb), p[0], p[1]]))

    def inverse(self, a: GroupElement) -> GroupElement:
        ta, pa = self.parts(a)
        p = -rot2(ta).T @ pa
        return GroupElement(self, np.array([wrap_angle(-ta), p[0], p[1]]))

    def exp(self, u: AlgebraElement) -> GroupElement:
        omega, trans = float(u.vec[0]), u.vec[1:3]
        if abs(omega) < SMALL_ANGLE:
            c1 = 1.0 - omega**2 / 6.0
            c2 = omega / 2.0 - omega**3 / 24.0
        else:
            c1 = np.sin(omega) / omega
            c2 = (1.0 - np.cos(omega)) / omega
        V = np.array([[c1, -c2], [c2, c1]])
        p = V @ trans
        return GroupElement(self, np.array([wrap_angle(omega), p[0], p[1]]))

    def bracket(self, u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
        J = np.array([[0.0, -1.0], [1.0, 0.0]])
        w1, t1 = float(u.vec[0]), u.vec[1:3]
        w2, t2 = float(v.vec[0]), v.vec[1:3]
        trans = w1 * (J @ t2) - w2 * (J @ t1)
        return AlgebraElement(self, np.array([0.0, trans[0], trans[1]]))

    def left_translate(self, a: GroupElement, u: AlgebraElement) -> TangentVector:
        ta, _ = self.parts(a)
        t = rot2(ta) @ u.vec[1:3]
        return TangentVector(a, np.array([u.vec[0], t[0], t[1]]))

    def chart_diff(self, a: GroupElement, b: GroupElement) -> np.ndarray:
        d = a.coords - b.coords
        d[0] = angle_diff(a.coords[0], b.coords[0])
        return d


class _VAAGroup(LieGroup):
    """Velocity-attitude group (R^3 x SO(3)) |x R^3.

    Chart coordinates are the flat vector [z (3), Q row-major (9), x (3)].
    Algebra coordinates are [w (3), Omega (3), u (3)].
    """

    name = "VAA"
    algebra_dim = 9
    chart_dim = 15

    def from_parts(self, z: np.ndarray, Q: np.ndarray, x: np.ndarray) -> GroupElement:
        return self.element(np.concatenate([np.asarray(z, float), np.asarray(Q, float).ravel(), np.asarray(x, float)]))

    @staticmethod
    def parts(a: GroupElement) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return a.coords[0:3], a.coords[3:12].reshape(3, 3), a.coords[12:15]

    @staticmethod
    def algebra_parts(u: AlgebraElement) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return u.vec[0:3], u.vec[3:6], u.vec[6:9]

    def from_algebra_parts(self, w: np.ndarray, omega: np.ndarray, u: np.ndarray) -> AlgebraElement:
        return self.algebra(np.concatenate([np.asarray(w, float), np.asarray(omega, float), np.asarray(u, float)]))

    def _validated(self, coords: np.ndarray) -> np.ndarray:
        if coords.shape != (15,):
            raise ValueError(f"VAA chart coordinates must have shape (15,), got {coords.shape}")
        out = coords.copy()
        out[3:12] = _checked_rotation(coords[3:12].reshape(3, 3), "VAA rotation block").ravel()
        return out

    def identity(self) -> GroupElement:
        return GroupElement(self, np.concatenate([np.zeros(3), np.eye(3).ravel(), np.zeros(3)]))

    def compose(self, a: GroupElement, b: GroupElement) -> GroupElement:
        z1, Q1, x1 = self.parts(a)
        z2, Q2, x2 = self.parts(b)
        return self.element(np.concatenate([
            z1 + z2,
            (Q1 @ Q2).ravel(),
            x1 + Q1 @ x2 + z2 - Q1 @ z2,
        ]))

    def inverse(self, a: GroupElement) -> GroupElement:
        z, Q, x = self.parts(a)
        Qt = Q.T
        return GroupElement(self, np.concatenate([
            -z,
            Qt.copy().ravel(),
            -Qt @ x - z + Qt @ z,
        ]))

    def exp(self, u: AlgebraElement) -> GroupElement:
        w, omega, trans = self.algebra_parts(u)
        # One-parameter subgroup: z(t) = t w, Q(t) = exp(t hat(omega)),
        # x'(t) = Q(t) (u - w) + w.
        Q = rotation_exp(omega)
        x = so3_left_jacobian(omega) @ (trans - w) + w
        return GroupElement(self, np.concatenate([w, Q.ravel(), x]))

    def bracket(self, u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
        w1, o1, u1 = self.algebra_parts(u)
        w2, o2, u2 = self.algebra_parts(v)
        return AlgebraElement(self, np.concatenate([
            np.zeros(3),
            np.cross(o1, o2),
            np.cross(o1, u2 - w2) - np.cross(o2, u1 - w1),
        ]))

    def left_translate(self, a: GroupElement, u: AlgebraElement) -> TangentVector:
        _, Q, _ = self.parts(a)
        w, omega, trans = self.algebra_parts(u)
        return TangentVector(a, np.concatenate([
            w,
            (Q @ hat(omega)).ravel(),
            Q @ trans + w - Q @ w,
        ]))


SO3 = _SO3()
SE2 = _SE2()
VAA = _VAAGroup()

GROUPS = {g.name: g for g in (SO3, SE2, VAA)}


def _require_same_group(a, b) -> None:
    if a.group is not b.group:
        raise ValueError(f"group mismatch: {a.group.name} vs {b.group.name}")


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group product a b."""
    _require_same_group(a, b)
    return a.group.compose(a, b)


def inverse(a: GroupElement) -> GroupElement:
    """Group inverse, compose(a, inverse(a)) = identity."""
    return a.group.inverse(a)


def identity(group: LieGroup) -> GroupElement:
    return group.identity()


def exp(u: AlgebraElement) -> GroupElement:
    """Group element reached by flowing the left-invariant field of u for unit time."""
    return u.group.exp(u)


def bracket(u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
    """Lie algebra bracket [u, v]."""
    _require_same_group(u, v)
    return u.group.bracket(u, v)


def left_translate(a: GroupElement, u: AlgebraElement) -> TangentVector:
    """Tangent vector a u = D L_a[u] at a, in chart coordinates."""
    _require_same_group(a, u)
    return a.group.left_translate(a, u)
