import numpy as np
import pytest

from synchobs.lie_core import (
    SE2,
    SO3,
    VAA,
    bracket,
    compose,
    exp,
    hat,
    identity,
    inverse,
    left_translate,
    rotation_angle,
    rotation_exp,
    so3_left_jacobian,
    vee,
    wrap_angle,
)

from conftest import ALL_GROUPS, max_abs


def series_matrix_exp(W: np.ndarray, order: int = 40) -> np.ndarray:
    """Truncated power series oracle, accurate to machine precision for small W."""
    out = np.eye(W.shape[0])
    term = np.eye(W.shape[0])
    for k in range(1, order):
        term = term @ W / k
        out = out + term
    return out


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_compose_identity(group, rng):
    b = group.random_element(rng)
    assert max_abs(group.chart_diff(compose(identity(group), b), b)) <= 1e-15
    assert max_abs(group.chart_diff(compose(b, identity(group)), b)) <= 1e-15


def test_vaa_product_of_translations():
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    a = VAA.from_parts(np.zeros(3), np.eye(3), e1)
    b = VAA.from_parts(np.zeros(3), np.eye(3), e2)
    out = compose(a, b)
    z, Q, x = VAA.parts(out)
    assert max_abs(z) == 0.0
    assert max_abs(Q - np.eye(3)) == 0.0
    assert max_abs(x - (e1 + e2)) == 0.0


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_associativity(group, rng):
    for _ in range(100):
        a, b, c = (group.random_element(rng) for _ in range(3))
        lhs = compose(compose(a, b), c)
        rhs = compose(a, compose(b, c))
        assert max_abs(group.chart_diff(lhs, rhs)) <= 1e-12


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_inverse(group, rng):
    assert max_abs(group.chart_diff(inverse(identity(group)), identity(group))) == 0.0
    for _ in range(100):
        a = group.random_element(rng)
        assert max_abs(group.chart_diff(compose(a, inverse(a)), identity(group))) <= 1e-12
        assert max_abs(group.chart_diff(compose(inverse(a), a), identity(group))) <= 1e-12


def test_vaa_inverse_of_translation(rng):
    x = rng.uniform(-3, 3, 3)
    a = VAA.from_parts(np.zeros(3), np.eye(3), x)
    z, Q, xi = VAA.parts(inverse(a))
    assert max_abs(z) == 0.0
    assert max_abs(Q - np.eye(3)) == 0.0
    assert max_abs(xi + x) <= 1e-15


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_exp_zero_is_identity(group):
    assert max_abs(group.chart_diff(exp(group.zero_algebra()), identity(group))) == 0.0


def test_so3_exp_quarter_turn_against_series():
    omega = np.array([0.0, 0.0, np.pi / 2.0])
    R = SO3.matrix(exp(SO3.algebra(omega)))
    oracle = series_matrix_exp(hat(omega))
    assert max_abs(R - oracle) <= 1e-14
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    assert max_abs(R @ e1 - e2) <= 1e-9


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_exp_matches_series_oracle(group, rng):
    # The group chart of exp(u) must agree with flowing the left-invariant
    # field; for the matrix blocks this reduces to the series exponential.
    for _ in range(20):
        u = group.random_algebra(rng)
        X = exp(u)
        if group is SO3:
            assert max_abs(SO3.matrix(X) - series_matrix_exp(hat(u.vec))) <= 1e-13
        elif group is SE2:
            W = np.array([[0.0, -u.vec[0], u.vec[1]], [u.vec[0], 0.0, u.vec[2]], [0.0, 0.0, 0.0]])
            M = series_matrix_exp(W)
            theta, xy = SE2.parts(X)
            assert abs(wrap_angle(np.arctan2(M[1, 0], M[0, 0])) - theta) <= 1e-12
            assert max_abs(M[0:2, 2] - xy) <= 1e-13


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_exp_one_parameter_subgroup(group, rng):
    for _ in range(50):
        u = group.random_algebra(rng)
        s, t = rng.uniform(-2, 2, 2)
        lhs = exp(u * (s + t))
        rhs = compose(exp(u * s), exp(u * t))
        assert max_abs(group.chart_diff(lhs, rhs)) <= 1e-10


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_bracket_self_is_zero(group, rng):
    u = group.random_algebra(rng)
    assert max_abs(bracket(u, u).vec) == 0.0


def test_so3_bracket_matches_commutator_oracle(rng):
    e = np.eye(3)
    out = bracket(SO3.algebra(e[0]), SO3.algebra(e[1]))
    assert max_abs(out.vec - e[2]) == 0.0
    for _ in range(50):
        u, v = SO3.random_algebra(rng), SO3.random_algebra(rng)
        oracle = vee(hat(u.vec) @ hat(v.vec) - hat(v.vec) @ hat(u.vec))
        assert max_abs(bracket(u, v).vec - oracle) <= 1e-14


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_bracket_antisymmetric_bilinear(group, rng):
    for _ in range(100):
        u, v, w = (group.random_algebra(rng) for _ in range(3))
        a, b = rng.uniform(-2, 2, 2)
        assert max_abs((bracket(u, v) + bracket(v, u)).vec) <= 1e-12
        lhs = bracket(a * u + b * v, w)
        rhs = a * bracket(u, w) + b * bracket(v, w)
        assert max_abs((lhs - rhs).vec) <= 1e-12


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_jacobi_identity(group, rng):
    for _ in range(100):
        u, v, w = (group.random_algebra(rng) for _ in range(3))
        total = bracket(u, bracket(v, w)) + bracket(v, bracket(w, u)) + bracket(w, bracket(u, v))
        assert max_abs(total.vec) <= 1e-12


def test_left_translate_at_identity_embeds_algebra(rng):
    u = SO3.random_algebra(rng)
    tv = left_translate(identity(SO3), u)
    assert max_abs(tv.components - hat(u.vec).ravel()) == 0.0
    v = SE2.random_algebra(rng)
    assert max_abs(left_translate(identity(SE2), v).components - v.vec) <= 1e-15
    w = VAA.random_algebra(rng)
    tvw = left_translate(identity(VAA), w)
    w1, o1, u1 = VAA.algebra_parts(w)
    assert max_abs(tvw.components - np.concatenate([w1, hat(o1).ravel(), u1])) <= 1e-15


def test_vaa_left_translate_closed_form(rng):
    # Tangent of X (w, Omega, u) must be (w, Q hat(Omega), Q u + (I - Q) w).
    for _ in range(20):
        X = VAA.random_element(rng)
        u = VAA.random_algebra(rng)
        _, Q, _ = VAA.parts(X)
        w1, o1, u1 = VAA.algebra_parts(u)
        expected = np.concatenate([w1, (Q @ hat(o1)).ravel(), Q @ u1 + w1 - Q @ w1])
        assert max_abs(left_translate(X, u).components - expected) <= 1e-14


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_left_translate_is_derivative_of_composition(group, rng):
    h = 1e-6
    for _ in range(20):
        a = group.random_element(rng)
        u = group.random_algebra(rng)
        fwd = compose(a, exp(u * h))
        bwd = compose(a, exp(u * (-h)))
        fd = group.chart_diff(fwd, bwd) / (2.0 * h)
        assert max_abs(fd - left_translate(a, u).components) <= 1e-6


@pytest.mark.parametrize("group", (SO3, VAA))
def test_rotation_blocks_stay_orthonormal_under_many_compositions(group, rng):
    pool = [group.random_element(rng) for _ in range(64)]
    acc = identity(group)
    for k in range(100_000):
        acc = compose(acc, pool[k % 64])
    R = SO3.matrix(acc) if group is SO3 else VAA.parts(acc)[1]
    assert max_abs(R.T @ R - np.eye(3)) <= 1e-9


def test_group_mismatch_raises(rng):
    with pytest.raises(ValueError, match="mismatch"):
        compose(SO3.random_element(rng), SE2.random_element(rng))
    with pytest.raises(ValueError, match="mismatch"):
        bracket(SO3.random_algebra(rng), VAA.random_algebra(rng))
    with pytest.raises(ValueError, match="mismatch"):
        left_translate(SE2.random_element(rng), SO3.random_algebra(rng))


def test_se2_angle_wrapped(rng):
    a = SE2.from_parts(5.0, np.zeros(2))
    b = SE2.from_parts(4.0, np.zeros(2))
    theta, _ = SE2.parts(compose(a, b))
    assert 0.0 <= theta < 2.0 * np.pi
    assert abs(theta - wrap_angle(9.0)) <= 1e-15


def test_so3_left_jacobian_is_flow_integral(rng):
    # d/dt exp(t u) = exp(t u) u validates both exp and the Jacobian it uses.
    for group in (SO3, VAA):
        for _ in range(10):
            u = group.random_algebra(rng)
            t = rng.uniform(0.2, 1.5)
            h = 1e-6
            fd = group.chart_diff(exp(u * (t + h)), exp(u * (t - h))) / (2.0 * h)
            expected = left_translate(exp(u * t), u).components
            assert max_abs(fd - expected) <= 1e-6


def test_rotation_angle_and_projection():
    omega = np.array([0.3, -0.4, 0.5])
    theta = np.linalg.norm(omega)
    assert abs(rotation_angle(rotation_exp(omega)) - theta) <= 1e-12
    with pytest.raises(ValueError, match="determinant"):
        SO3.from_matrix(np.diag([1.0, 1.0, -1.0]))


def test_small_angle_series_branch():
    omega = np.array([1e-10, -2e-10, 1.5e-10])
    R = rotation_exp(omega)
    assert max_abs(R - (np.eye(3) + hat(omega))) <= 1e-19
    J = so3_left_jacobian(omega)
    assert max_abs(J - np.eye(3)) <= 1e-9
