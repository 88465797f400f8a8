import numpy as np
import pytest

from synchobs.actions import VAA_M, act, error, reconstruct
from synchobs.lie_core import SO3, VAA, compose, exp, hat
from synchobs.scenarios import (
    GRAVITY,
    bearings_scenario,
    unicycle_scenario,
    vaa_scenario,
)
from synchobs.systems import (
    FundamentalStructure,
    eval_system,
    lift_input,
    lifted_dynamics,
    verify_fundamental,
    verify_synchrony,
)

from conftest import max_abs


@pytest.fixture(scope="module")
def bundles():
    return {
        "bearings": bearings_scenario(),
        "unicycle": unicycle_scenario(),
        "vaa": vaa_scenario(),
    }


def test_eval_unicycle(bundles):
    sys = bundles["unicycle"].structure.system
    xi = sys.manifold.point([0.6, 1.0, 2.0])
    out = eval_system(sys, np.array([0.4, 1.5]), xi)
    expected = np.array([0.4, 1.5 * np.cos(0.6), 1.5 * np.sin(0.6)])
    assert max_abs(out.components - expected) <= 1e-15


def test_eval_zero_input_gives_drift(bundles):
    for name in ("bearings", "unicycle", "vaa"):
        sys = bundles[name].structure.system
        xi = sys.manifold.base_point()
        out = eval_system(sys, np.zeros(sys.input_dim), xi)
        drift = np.asarray(sys.drift(xi), dtype=float)
        assert max_abs(out.components - drift) == 0.0


def test_eval_bearings(bundles, rng):
    sys = bundles["bearings"].structure.system
    for _ in range(20):
        omega = rng.uniform(-2, 2, 3)
        xi = sys.manifold.random_point(rng)
        out = eval_system(sys, omega, xi)
        assert max_abs(out.components - (-hat(omega) @ xi.coords)) <= 1e-15


def test_eval_dimension_mismatch(bundles):
    sys = bundles["unicycle"].structure.system
    with pytest.raises(ValueError, match="shape"):
        eval_system(sys, np.zeros(3), sys.manifold.base_point())


def test_vaa_lift_input_components(bundles, rng):
    fs = bundles["vaa"].structure
    omega, a = rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)
    u = lift_input(fs, np.concatenate([omega, a]))
    w, o, trans = VAA.algebra_parts(u)
    assert max_abs(w - GRAVITY) == 0.0
    assert max_abs(o - omega) == 0.0
    assert max_abs(trans - (a + GRAVITY)) == 0.0


def test_bearings_lift_is_identity_on_rates(bundles, rng):
    fs = bundles["bearings"].structure
    omega = rng.uniform(-2, 2, 3)
    assert max_abs(lift_input(fs, omega).vec - omega) == 0.0


def test_lift_of_zero_is_bias(bundles):
    for name, bundle in bundles.items():
        fs = bundle.structure
        u = lift_input(fs, np.zeros(fs.system.input_dim))
        assert max_abs(u.vec - fs.lambda_bias.vec) == 0.0


def test_lifted_dynamics_at_identity_is_lift(bundles, rng):
    for bundle in bundles.values():
        fs = bundle.structure
        v = rng.uniform(-2, 2, fs.system.input_dim)
        tv = lifted_dynamics(fs, fs.action.group.identity(), v)
        at_identity = fs.action.group.left_translate(
            fs.action.group.identity(), lift_input(fs, v)
        )
        assert max_abs(tv.components - at_identity.components) == 0.0


def test_vaa_lifted_dynamics_closed_form(bundles, rng):
    # Xhat Lambda(Omega, a) must come out as (g, Q hat(Omega), Q a + g).
    fs = bundles["vaa"].structure
    for _ in range(20):
        Xhat = VAA.random_element(rng)
        _, Q, _ = VAA.parts(Xhat)
        omega, a = rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)
        out = lifted_dynamics(fs, Xhat, np.concatenate([omega, a]))
        expected = np.concatenate([GRAVITY, (Q @ hat(omega)).ravel(), Q @ a + GRAVITY])
        assert max_abs(out.components - expected) <= 1e-13


def test_bearings_lifted_dynamics_closed_form(bundles, rng):
    fs = bundles["bearings"].structure
    Rhat = SO3.random_element(rng)
    omega = rng.uniform(-2, 2, 3)
    out = lifted_dynamics(fs, Rhat, omega)
    assert max_abs(out.components - (SO3.matrix(Rhat) @ hat(omega)).ravel()) <= 1e-14


@pytest.mark.parametrize("name", ("bearings", "unicycle", "vaa"))
def test_verify_fundamental_passes(bundles, name):
    report = verify_fundamental(bundles[name].structure, n_samples=200, tol=1e-9, seed=3)
    assert report.passed, str(report)


def test_verify_fundamental_rejects_corrupted_lift(bundles):
    fs = bundles["bearings"].structure
    corrupted = FundamentalStructure(
        fs.system, fs.action,
        lambda_bias=SO3.algebra([1.0, 0.0, 0.0]),  # bias shifted by e1
        lambda_columns=fs.lambda_columns,
    )
    report = verify_fundamental(corrupted, n_samples=100, tol=1e-9, seed=3)
    assert not report.passed
    assert report.max_residual > 0.1  # the spurious field -hat(e1) eta has size O(1)


@pytest.mark.parametrize("name", ("bearings", "unicycle", "vaa"))
def test_verify_synchrony_passes(bundles, name):
    report = verify_synchrony(bundles[name].structure, n_samples=100, tol=1e-5, seed=4)
    assert report.passed, str(report)


def test_verify_synchrony_rejects_corrupted_lift(bundles):
    fs = bundles["vaa"].structure
    corrupted = FundamentalStructure(
        fs.system, fs.action,
        lambda_bias=VAA.from_algebra_parts(GRAVITY, np.zeros(3), -GRAVITY),
        lambda_columns=fs.lambda_columns,
    )
    report = verify_synchrony(corrupted, n_samples=100, tol=1e-5, seed=4)
    assert not report.passed


@pytest.mark.parametrize("name", ("bearings", "unicycle", "vaa"))
def test_discrete_synchrony_is_exact(bundles, name, rng):
    # e(Xhat exp(d Lambda(v)), phi(exp(d Lambda(v)), xi)) == e(Xhat, xi) for
    # any step size d: the group-algebraic cancellation is exact.
    fs = bundles[name].structure
    phi, group = fs.action, fs.action.group
    for _ in range(100):
        Xhat = group.random_element(rng)
        xi = act(phi, group.random_element(rng), phi.manifold.base_point())
        v = rng.uniform(-2, 2, fs.system.input_dim)
        d = rng.uniform(-5.0, 5.0)
        step = exp(lift_input(fs, v) * d)
        before = error(phi, Xhat, xi)
        after = error(phi, compose(Xhat, step), act(phi, step, xi))
        assert max_abs(phi.manifold.chart_diff(after, before)) <= 1e-12


@pytest.mark.parametrize("name", ("bearings", "unicycle", "vaa"))
def test_lift_projects_to_system_through_reconstruction(bundles, name, rng):
    # D phi_origin applied to the lifted dynamics equals the system field at
    # the reconstructed state (classical-lift property), by finite difference.
    fs = bundles[name].structure
    phi, group = fs.action, fs.action.group
    origin = phi.manifold.base_point()
    h = 1e-6
    for _ in range(30):
        Xhat = group.random_element(rng)
        v = rng.uniform(-2, 2, fs.system.input_dim)
        u = lift_input(fs, v)
        fwd = reconstruct(phi, compose(Xhat, exp(u * h)), origin)
        bwd = reconstruct(phi, compose(Xhat, exp(u * (-h))), origin)
        fd = phi.manifold.chart_diff(fwd, bwd) / (2.0 * h)
        expected = eval_system(fs.system, v, reconstruct(phi, Xhat, origin)).components
        assert max_abs(fd - expected) <= 1e-5


def test_lambda_is_affine_exactly(bundles, rng):
    fs = bundles["vaa"].structure
    for _ in range(50):
        v = rng.uniform(-2, 2, 6)
        manual = fs.lambda_bias.vec.copy()
        for vi, col in zip(v, fs.lambda_columns):
            manual = manual + vi * col.vec
        assert max_abs(lift_input(fs, v).vec - manual) == 0.0
