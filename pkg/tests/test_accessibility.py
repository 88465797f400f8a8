import numpy as np
import pytest

from synchobs.accessibility import (
    NonClosureError,
    VectorFieldHandle,
    bracket_handle,
    bracket_vf,
    build_accessibility_basis,
    controllability_check,
    default_sample_points,
    match_algebra,
    structure_constants,
    system_field_handles,
)
from synchobs.actions import SPHERE2, UNICYCLE_M, VAA_M, EuclideanRn, ManifoldPoint
from synchobs.lie_core import SO3, VAA, bracket
from synchobs.scenarios import bearings_scenario, unicycle_scenario, vaa_scenario
from synchobs.systems import AffineSystem

from conftest import max_abs

R1 = EuclideanRn(1)
R2 = EuclideanRn(2)
R3 = EuclideanRn(3)


def constant_system(manifold, vectors):
    dim = manifold.chart_dim
    fields = tuple((lambda p, v=np.asarray(v, float): v) for v in vectors)
    jacs = tuple((lambda p: np.zeros((dim, dim))) for _ in vectors)
    return AffineSystem(manifold, lambda p: np.zeros(dim), fields,
                        drift_jacobian=lambda p: np.zeros((dim, dim)), input_jacobians=jacs)


@pytest.fixture(scope="module")
def unicycle_handles():
    sys = unicycle_scenario().structure.system
    return system_field_handles(sys)


def test_bracket_with_self_vanishes(unicycle_handles, rng):
    f = unicycle_handles[2]
    xi = UNICYCLE_M.random_point(rng)
    assert max_abs(bracket_vf(f, f, xi).components) == 0.0


def test_unicycle_first_bracket(unicycle_handles):
    _, f1, f2 = unicycle_handles
    xi = UNICYCLE_M.point([0.9, 1.0, -2.0])
    out = bracket_vf(f1, f2, xi).components
    assert max_abs(out - np.array([0.0, -np.sin(0.9), np.cos(0.9)])) <= 1e-12


def test_unicycle_second_bracket_is_minus_speed_field(unicycle_handles):
    _, f1, f2 = unicycle_handles
    f3 = bracket_handle(f1, f2)
    xi = UNICYCLE_M.point([0.9, 1.0, -2.0])
    out = bracket_vf(f1, f3, xi).components
    assert max_abs(out - (-f2(xi.coords))) <= 1e-8


def test_bracket_manifold_mismatch(unicycle_handles, rng):
    g = VectorFieldHandle(R2, lambda x: x, lambda x: np.eye(2), "g")
    with pytest.raises(ValueError, match="mismatch"):
        bracket_vf(unicycle_handles[1], g, UNICYCLE_M.random_point(rng))


def test_unicycle_basis_dimension_and_constants():
    basis = build_accessibility_basis(unicycle_scenario().structure.system)
    assert basis.dimension == 3
    assert basis.labels == ("f1", "f2", "[f1,f2]")
    c = basis.constants.c
    assert basis.constants.residual <= 1e-8
    assert abs(c[0, 1, 2] - 1.0) <= 1e-6
    assert abs(c[0, 2, 1] + 1.0) <= 1e-6
    assert max_abs(c[1, 2, :]) <= 1e-6


def test_single_constant_field_dimension_one():
    basis = build_accessibility_basis(
        constant_system(R2, [[1.0, 0.0]]), default_sample_points(R2, 10)
    )
    assert basis.dimension == 1
    assert max_abs(basis.constants.c) <= 1e-12


def test_bearings_basis_matches_cross_product_oracle(rng):
    # Oracle: for fields f_i(eta) = -hat(e_i) eta the coordinate bracket is
    # [f_i, f_j] = f_{e_i x e_j}, the rotation-algebra relations.
    basis = build_accessibility_basis(bearings_scenario().structure.system)
    assert basis.dimension == 3
    c = basis.constants.c
    eye = np.eye(3)
    for i in range(3):
        for j in range(3):
            expected = np.cross(eye[i], eye[j])
            assert max_abs(c[i, j, :] - expected) <= 1e-8
    assert basis.constants.residual <= 1e-8

    # pointwise confirmation at a fresh sample
    handles = system_field_handles(bearings_scenario().structure.system)[1:]
    xi = SPHERE2.random_point(rng)
    out = bracket_vf(handles[0], handles[1], xi).components
    oracle = -np.cross(eye[0], eye[1])  # field of e1 x e2 = e3 is -hat(e3) eta
    assert max_abs(out - (-np.cross(eye[2], xi.coords))) <= 1e-12


def test_structure_constants_recompute_matches(rng):
    basis = build_accessibility_basis(unicycle_scenario().structure.system)
    again = structure_constants(basis)
    assert max_abs(again.c - basis.constants.c) == 0.0


def test_abelian_constants_all_zero():
    basis = build_accessibility_basis(
        constant_system(R2, [[1.0, 0.0], [0.0, 1.0]]), default_sample_points(R2, 10)
    )
    assert basis.dimension == 2
    assert max_abs(basis.constants.c) <= 1e-12
    assert match_algebra(basis.constants).name == "abelian R^2"


def test_controllability_unicycle():
    basis = build_accessibility_basis(unicycle_scenario().structure.system)
    report = controllability_check(basis, default_sample_points(UNICYCLE_M, 20, seed=9))
    assert report.controllable
    assert report.min_rank == 3
    assert report.ranks == (3,) * 20


def test_controllability_zero_system():
    basis = build_accessibility_basis(
        constant_system(R2, [[0.0, 0.0]]), default_sample_points(R2, 10)
    )
    assert basis.dimension == 0
    report = controllability_check(basis, default_sample_points(R2, 5, seed=1))
    assert report.min_rank == 0
    assert not report.controllable


def test_controllability_bearings_in_tangent_coordinates():
    basis = build_accessibility_basis(bearings_scenario().structure.system)
    report = controllability_check(basis, default_sample_points(SPHERE2, 20, seed=9))
    assert report.manifold_dim == 2
    assert report.min_rank == 2
    assert report.controllable


def test_match_unicycle_se2():
    basis = build_accessibility_basis(unicycle_scenario().structure.system)
    match = match_algebra(basis.constants)
    assert match.name == "se(2)"
    assert match.invariants["derived_dimension"] == 2


def test_match_bearings_so3():
    basis = build_accessibility_basis(bearings_scenario().structure.system)
    match = match_algebra(basis.constants)
    assert match.name == "so(3)"
    assert match.invariants["killing_signature"] == (0, 3, 0)


def test_match_heisenberg():
    # d/dx, d/dy + x d/dz close with a single central bracket.
    def f2(p):
        return np.array([0.0, 1.0, p.coords[0]])

    def j2(p):
        J = np.zeros((3, 3))
        J[2, 0] = 1.0
        return J

    sys = AffineSystem(
        R3, lambda p: np.zeros(3),
        ((lambda p: np.array([1.0, 0.0, 0.0])), f2),
        drift_jacobian=lambda p: np.zeros((3, 3)),
        input_jacobians=((lambda p: np.zeros((3, 3))), j2),
    )
    basis = build_accessibility_basis(sys, default_sample_points(R3, 15))
    assert basis.dimension == 3
    assert match_algebra(basis.constants).name == "heisenberg"


def test_match_unknown_for_sl2_like():
    # d/dx, x d/dx, x^2 d/dx has an indefinite Killing form: out of catalog.
    fields = (
        lambda p: np.array([1.0]),
        lambda p: np.array([p.coords[0]]),
        lambda p: np.array([p.coords[0] ** 2]),
    )
    jacs = (
        lambda p: np.zeros((1, 1)),
        lambda p: np.ones((1, 1)),
        lambda p: np.array([[2.0 * p.coords[0]]]),
    )
    sys = AffineSystem(R1, lambda p: np.zeros(1), fields,
                       drift_jacobian=lambda p: np.zeros((1, 1)), input_jacobians=jacs)
    basis = build_accessibility_basis(sys, default_sample_points(R1, 15))
    assert basis.dimension == 3
    match = match_algebra(basis.constants)
    assert match.name == "unknown"
    assert not match.matched


def test_vaa_accessibility_dimension():
    basis = build_accessibility_basis(vaa_scenario().structure.system)
    assert basis.dimension == 7
    report = controllability_check(basis, default_sample_points(VAA_M, 10, seed=2))
    assert report.controllable
    assert match_algebra(basis.constants).name == "unknown"


def test_non_closure_raises_with_budget():
    fields = (lambda p: np.array([1.0]), lambda p: np.array([p.coords[0] ** 3]))
    jacs = (lambda p: np.zeros((1, 1)), lambda p: np.array([[3.0 * p.coords[0] ** 2]]))
    sys = AffineSystem(R1, lambda p: np.zeros(1), fields,
                       drift_jacobian=lambda p: np.zeros((1, 1)), input_jacobians=jacs)
    with pytest.raises(NonClosureError, match="budget"):
        build_accessibility_basis(sys, default_sample_points(R1, 25))


def test_bracket_antisymmetric_and_bilinear(unicycle_handles, rng):
    _, f1, f2 = unicycle_handles
    f3 = bracket_handle(f1, f2)  # finite-difference Jacobian path
    for _ in range(20):
        xi = UNICYCLE_M.random_point(rng)
        assert max_abs(bracket_vf(f1, f2, xi).components + bracket_vf(f2, f1, xi).components) <= 1e-12
        assert max_abs(bracket_vf(f1, f3, xi).components + bracket_vf(f3, f1, xi).components) <= 1e-8


def test_jacobi_identity_on_basis_fields(unicycle_handles, rng):
    basis = build_accessibility_basis(unicycle_scenario().structure.system)
    f1, f2, f3 = basis.fields
    for xi in basis.sample_points[:10]:
        total = (
            bracket_vf(f1, bracket_handle(f2, f3), xi).components
            + bracket_vf(f2, bracket_handle(f3, f1), xi).components
            + bracket_vf(f3, bracket_handle(f1, f2), xi).components
        )
        assert max_abs(total) <= 1e-6


def test_basis_construction_deterministic():
    sys = unicycle_scenario().structure.system
    a = build_accessibility_basis(sys, seed=11)
    b = build_accessibility_basis(sys, seed=11)
    assert a.labels == b.labels
    assert max_abs(a.constants.c - b.constants.c) == 0.0


def test_action_bracket_homomorphism(rng):
    # [phi#_U, phi#_V] = phi#_[U,V]: ties the coordinate bracket of fields to
    # the group-algebra bracket through each action.
    for bundle, group in ((bearings_scenario(), SO3), (vaa_scenario(), VAA)):
        phi = bundle.structure.action
        for _ in range(10):
            U, V = group.random_algebra(rng), group.random_algebra(rng)
            fU = VectorFieldHandle(
                phi.manifold, lambda x, U=U: phi._fundamental(U, ManifoldPoint(phi.manifold, x)), None, "U")
            fV = VectorFieldHandle(
                phi.manifold, lambda x, V=V: phi._fundamental(V, ManifoldPoint(phi.manifold, x)), None, "V")
            xi = phi.manifold.random_point(rng)
            lhs = bracket_vf(fU, fV, xi).components
            rhs = phi._fundamental(bracket(U, V), xi)
            assert max_abs(lhs - rhs) <= 1e-7
