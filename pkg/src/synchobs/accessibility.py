"""Numerical accessibility-algebra engine.

Builds a basis of the Lie algebra generated by an affine system by
repeatedly bracketing vector fields and keeping the numerically
independent results, extracts structure constants by least squares over
sample points, tests the rank of the accessibility distribution, and
matches the resulting constants against a small catalog of algebras.

All fields are chart-coordinate callables on raw coordinate vectors; the
callables must be defined in a neighbourhood of the manifold so that
finite-difference Jacobians are meaningful.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .actions import Manifold, ManifoldPoint
from .lie_core import TangentVector
from .systems import AffineSystem

INDEPENDENCE_TOL = 1e-8
FD_STEP = 1e-6


class NonClosureError(RuntimeError):
    """Raised when bracketing exceeds the dimension budget without closing.

    A budget overrun cannot be numerically distinguished from a genuinely
    infinite-dimensional algebra; the message says so.
    """

    def __init__(self, reached_dim: int, max_dim: int):
        self.reached_dim = reached_dim
        self.max_dim = max_dim
        super().__init__(
            f"bracket closure not reached within budget: {reached_dim} independent "
            f"fields found, max_dim = {max_dim}. The generated algebra is either "
            f"infinite-dimensional or larger than the budget; no numeric test can "
            f"tell these apart."
        )


@dataclass(frozen=True)
class VectorFieldHandle:
    """A chart-coordinate vector field with optional analytic Jacobian."""

    manifold: Manifold
    evaluator: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = ""

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(coords), dtype=float)

    def jac(self, coords: np.ndarray) -> np.ndarray:
        if self.jacobian is not None:
            return np.asarray(self.jacobian(coords), dtype=float)
        return fd_jacobian(self.evaluator, coords)


def fd_jacobian(evaluator, coords: np.ndarray, h_base: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian, step scaled by coordinate magnitude."""
    coords = np.asarray(coords, dtype=float)
    n = coords.size
    f0 = np.asarray(evaluator(coords), dtype=float)
    J = np.empty((f0.size, n))
    for j in range(n):
        h = h_base * max(1.0, abs(coords[j]))
        fwd = coords.copy()
        bwd = coords.copy()
        fwd[j] += h
        bwd[j] -= h
        J[:, j] = (np.asarray(evaluator(fwd), float) - np.asarray(evaluator(bwd), float)) / (2.0 * h)
    return J


def bracket_vf(f: VectorFieldHandle, g: VectorFieldHandle, xi: ManifoldPoint) -> TangentVector:
    """Coordinate Lie bracket Dg(xi)[f(xi)] - Df(xi)[g(xi)]."""
    if f.manifold is not g.manifold:
        raise ValueError(f"manifold mismatch: {f.manifold.name} vs {g.manifold.name}")
    x = xi.coords
    return TangentVector(xi, g.jac(x) @ f(x) - f.jac(x) @ g(x))


def bracket_handle(f: VectorFieldHandle, g: VectorFieldHandle) -> VectorFieldHandle:
    """The bracket [f, g] as a new field handle (Jacobian by finite differences)."""

    def evaluator(coords: np.ndarray) -> np.ndarray:
        return g.jac(coords) @ f(coords) - f.jac(coords) @ g(coords)

    return VectorFieldHandle(f.manifold, evaluator, None, f"[{f.label},{g.label}]")


@dataclass(frozen=True)
class ConstantsWithResidual:
    """Structure constants c[i, j, k] with the least-squares fit residual.

    [f_i, f_j] = sum_k c[i, j, k] f_k; antisymmetry in (i, j) is enforced
    by construction.
    """

    c: np.ndarray
    residual: float


@dataclass(frozen=True)
class AlgebraBasis:
    """Numerically independent basis of the generated algebra of fields."""

    fields: tuple[VectorFieldHandle, ...]
    sample_points: tuple[ManifoldPoint, ...]
    gram_rank: int
    constants: ConstantsWithResidual

    @property
    def dimension(self) -> int:
        return len(self.fields)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.fields)


@dataclass(frozen=True)
class ControllabilityReport:
    """Pointwise rank of the accessibility distribution."""

    ranks: tuple[int, ...]
    manifold_dim: int
    min_rank: int
    worst_point: ManifoldPoint | None
    controllable: bool

    def __str__(self) -> str:
        verdict = "controllable" if self.controllable else "not controllable"
        return f"min rank {self.min_rank} of {self.manifold_dim} -> {verdict}"


@dataclass(frozen=True)
class AlgebraMatch:
    """Best catalog match for a set of structure constants."""

    name: str
    matched: bool
    invariants: dict


def default_sample_points(manifold: Manifold, n: int = 25, seed: int = 0) -> tuple[ManifoldPoint, ...]:
    rng = np.random.default_rng(seed)
    return tuple(manifold.random_point(rng) for _ in range(n))


def _stack_values(field: VectorFieldHandle, points: Sequence[ManifoldPoint]) -> np.ndarray:
    return np.concatenate([field(p.coords) for p in points])


def _is_independent(stack: list[np.ndarray], candidate: np.ndarray, tol: float) -> bool:
    # Multi-point stacking avoids false positives at measure-zero loci of a
    # single point: a candidate joins the basis only if it enlarges the span
    # of the stacked evaluation matrix.
    norm = float(np.max(np.abs(candidate))) if candidate.size else 0.0
    if not stack:
        return norm > tol
    M = np.column_stack(stack + [candidate])
    s = np.linalg.svd(M, compute_uv=False)
    return s[-1] > tol * s[0]


def system_field_handles(sys: AffineSystem) -> list[VectorFieldHandle]:
    """Wrap the drift and input fields of an affine system as handles.

    The drift is labelled f0 and the inputs f1..fl; the handles evaluate the
    system's point-callables on raw coordinates without restoring chart
    invariants, which is what finite differencing needs.
    """

    def raw(field_fn):
        def evaluator(coords: np.ndarray) -> np.ndarray:
            return np.asarray(field_fn(ManifoldPoint(sys.manifold, np.asarray(coords, float))), float)

        return evaluator

    handles = [VectorFieldHandle(sys.manifold, raw(sys.drift),
                                 raw(sys.drift_jacobian) if sys.drift_jacobian else None, "f0")]
    jacs = sys.input_jacobians or (None,) * sys.input_dim
    for i, (fi, ji) in enumerate(zip(sys.inputs, jacs), start=1):
        handles.append(VectorFieldHandle(sys.manifold, raw(fi), raw(ji) if ji else None, f"f{i}"))
    return handles


def build_accessibility_basis(
    sys: AffineSystem,
    samples: Sequence[ManifoldPoint] | None = None,
    tol: float = INDEPENDENCE_TOL,
    max_dim: int | None = None,
    seed: int = 0,
) -> AlgebraBasis:
    """Recursive bracket closure of span{f0, f1, ..., fl}.

    Starts from the deduplicated system fields, repeatedly brackets all
    pairs, adds numerically independent results, and stops at closure.
    Raises :class:`NonClosureError` once max_dim (default 4 x chart
    dimension) is exceeded without closure. Deterministic for a fixed seed
    and sample set.
    """
    if samples is None:
        samples = default_sample_points(sys.manifold, seed=seed)
    samples = tuple(samples)
    if len(samples) < sys.manifold.chart_dim:
        raise ValueError("need at least chart-dimension many sample points")
    if max_dim is None:
        max_dim = 4 * sys.manifold.chart_dim

    basis: list[VectorFieldHandle] = []
    stacks: list[np.ndarray] = []

    def try_add(handle: VectorFieldHandle) -> bool:
        values = _stack_values(handle, samples)
        if _is_independent(stacks, values, tol):
            basis.append(handle)
            stacks.append(values)
            return True
        return False

    for handle in system_field_handles(sys):
        try_add(handle)

    frontier_start = 0
    while True:
        if len(basis) > max_dim:
            raise NonClosureError(len(basis), max_dim)
        new_start = len(basis)
        added = False
        for i in range(len(basis)):
            for j in range(max(i + 1, frontier_start), len(basis)):
                if j >= new_start:
                    break  # brackets with fields added this round wait a round
                if try_add(bracket_handle(basis[i], basis[j])):
                    added = True
                    if len(basis) > max_dim:
                        raise NonClosureError(len(basis), max_dim)
        if not added:
            break
        frontier_start = new_start

    fields = tuple(basis)
    constants = _fit_structure_constants(fields, samples)
    return AlgebraBasis(fields, samples, len(fields), constants)


def _fit_structure_constants(
    fields: tuple[VectorFieldHandle, ...], samples: tuple[ManifoldPoint, ...]
) -> ConstantsWithResidual:
    k = len(fields)
    c = np.zeros((k, k, k))
    if k == 0:
        return ConstantsWithResidual(c, 0.0)
    A = np.column_stack([_stack_values(f, samples) for f in fields])
    worst = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            b = np.concatenate([bracket_vf(fields[i], fields[j], p).components for p in samples])
            coeff, *_ = np.linalg.lstsq(A, b, rcond=None)
            c[i, j, :] = coeff
            c[j, i, :] = -coeff
            worst = max(worst, float(np.max(np.abs(A @ coeff - b))))
    return ConstantsWithResidual(c, worst)


def structure_constants(basis: AlgebraBasis) -> ConstantsWithResidual:
    """Least-squares structure constants of a closed basis."""
    return _fit_structure_constants(basis.fields, basis.sample_points)


def controllability_check(
    basis: AlgebraBasis,
    test_points: Sequence[ManifoldPoint],
    tol: float = INDEPENDENCE_TOL,
) -> ControllabilityReport:
    """Rank of the stacked basis evaluations at each point, in intrinsic
    tangent coordinates; controllable iff full rank everywhere."""
    if not test_points:
        raise ValueError("need at least one test point")
    manifold = test_points[0].manifold
    dim = manifold.intrinsic_dim
    ranks = []
    worst_point = None
    min_rank = dim + 1
    for p in test_points:
        if not basis.fields:
            rank = 0
        else:
            basis_matrix = manifold.tangent_basis(p)
            V = np.stack([basis_matrix.T @ f(p.coords) for f in basis.fields])
            s = np.linalg.svd(V, compute_uv=False)
            rank = 0 if s.size == 0 or s[0] <= tol else int(np.sum(s > tol * s[0]))
        ranks.append(rank)
        if rank < min_rank:
            min_rank = rank
            worst_point = p
    return ControllabilityReport(tuple(ranks), dim, min_rank, worst_point, min_rank == dim)


def _killing_form(c: np.ndarray) -> np.ndarray:
    # ad_a has matrix (ad_a)[z, y] = c[a, y, z]; K[a, b] = tr(ad_a ad_b).
    k = c.shape[0]
    K = np.zeros((k, k))
    for a in range(k):
        for b in range(k):
            K[a, b] = sum(c[a, y, z] * c[b, z, y] for y in range(k) for z in range(k))
    return K


def match_algebra(constants: ConstantsWithResidual, tol: float = 1e-6) -> AlgebraMatch:
    """Match constants against {abelian R^n, so(3), se(2), heisenberg}.

    Matching uses basis-independent invariants: dimension, derived-algebra
    dimension, and the Killing-form signature. Dimensions above 3 are out
    of catalog scope unless abelian.
    """
    c = constants.c
    k = c.shape[0]
    invariants: dict = {"dimension": k}
    if k == 0:
        return AlgebraMatch("trivial", True, invariants)
    if float(np.max(np.abs(c))) <= tol:
        return AlgebraMatch(f"abelian R^{k}", True, invariants)

    brackets = [c[i, j, :] for i in range(k) for j in range(i + 1, k)]
    s = np.linalg.svd(np.stack(brackets), compute_uv=False)
    derived_dim = int(np.sum(s > tol * max(1.0, s[0])))
    K = _killing_form(c)
    eigs = np.linalg.eigvalsh(0.5 * (K + K.T))
    scale = max(1.0, float(np.max(np.abs(eigs))))
    n_neg = int(np.sum(eigs < -tol * scale))
    n_pos = int(np.sum(eigs > tol * scale))
    n_zero = k - n_neg - n_pos
    invariants.update(
        {"derived_dimension": derived_dim, "killing_signature": (n_pos, n_neg, n_zero)}
    )

    if k == 3:
        if derived_dim == 3 and n_neg == 3:
            return AlgebraMatch("so(3)", True, invariants)
        if derived_dim == 2 and (n_pos, n_neg, n_zero) == (0, 1, 2):
            return AlgebraMatch("se(2)", True, invariants)
        if derived_dim == 1 and (n_pos, n_neg) == (0, 0):
            return AlgebraMatch("heisenberg", True, invariants)
    return AlgebraMatch("unknown", False, invariants)
