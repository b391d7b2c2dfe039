"""Coarse-graining maps and the level-contraction decision procedure.

Three grains are provided: pinching onto an orthogonal projector family,
decorrelation of a bipartite state, and the canonical projection that
sends a state to the minimum-relative-entropy state with the same
relevant expectation values (Kawasaki-Gunton projector).  All three are
trace-preserving, positive, and idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, ToleranceConfig
from .canonical import (
    CanonicalState,
    ConstraintData,
    LevelOfDescription,
    level_of_description,
    second_order_divergence,
    solve_minrent,
)
from .entropy import quantum_relative_entropy
from .errors import (
    DimensionMismatchError,
    FeasibilityError,
    SupportError,
    ValidationError,
)
from .operators import (
    DensityOperator,
    HermitianOperator,
    degenerate_groups,
    density,
    expectation,
    hermitian,
    partial_trace,
    tensor_product,
)


@dataclass(frozen=True)
class Pinching:
    """Mutually orthogonal, collectively exhaustive projectors."""

    projectors: tuple[HermitianOperator, ...]

    @property
    def dim(self) -> int:
        return self.projectors[0].dim


def pinching(projectors, cfg: ToleranceConfig = DEFAULT) -> Pinching:
    """Validate a projector family: idempotent, orthogonal, summing to I."""
    ops = tuple(
        p if isinstance(p, HermitianOperator) else hermitian(p, cfg, "projector")
        for p in projectors
    )
    if not ops:
        raise ValidationError("pinching requires at least one projector")
    d = ops[0].dim
    total = np.zeros((d, d), dtype=complex)
    for k, p in enumerate(ops):
        if p.dim != d:
            raise DimensionMismatchError(f"projector {k} has dim {p.dim}, expected {d}")
        if np.abs(p.matrix @ p.matrix - p.matrix).max() > cfg.spec_tol * 10:
            raise ValidationError(f"projector {k} is not idempotent")
        total += p.matrix
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            if np.abs(ops[i].matrix @ ops[j].matrix).max() > cfg.spec_tol * 10:
                raise ValidationError(f"projectors {i} and {j} are not orthogonal")
    if np.abs(total - np.eye(d)).max() > cfg.spec_tol * 10:
        raise ValidationError("projectors do not sum to the identity")
    return Pinching(ops)


def eigenspace_pinching(sigma: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> Pinching:
    """The pinching family of a state's eigenspace projectors."""
    w, v = np.linalg.eigh(sigma.matrix)
    projs = []
    for grp in degenerate_groups(w, cfg):
        cols = v[:, grp]
        projs.append(hermitian(cols @ cols.conj().T, cfg))
    return Pinching(tuple(projs))


def pinch(family: Pinching, rho: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> DensityOperator:
    """Keep only the block probabilities: sum_i tr(rho P_i)/tr(P_i) * P_i."""
    if family.dim != rho.dim:
        raise DimensionMismatchError(f"pinching dim {family.dim} != state dim {rho.dim}")
    out = np.zeros_like(rho.matrix)
    for p in family.projectors:
        rank = float(np.trace(p.matrix).real)
        weight = expectation(rho, p, cfg)
        out += (max(weight, 0.0) / rank) * p.matrix
    return density(out, cfg, "pinched state")


def decorrelate(
    rho_ab: DensityOperator,
    dims: tuple[int, int],
    cfg: ToleranceConfig = DEFAULT,
) -> DensityOperator:
    """Replace a bipartite state by the product of its marginals,
    normalized back to the original trace."""
    rho_a = partial_trace(rho_ab, dims, "A", cfg)
    rho_b = partial_trace(rho_ab, dims, "B", cfg)
    prod = tensor_product(rho_a, rho_b, cfg)
    mat = prod.matrix / rho_ab.iota
    return density(mat, cfg, "decorrelated state")


def _clipped_targets(
    rho: DensityOperator,
    level: LevelOfDescription,
    cfg: ToleranceConfig,
) -> ConstraintData:
    """Expectation values read off rho after flooring tiny negative eigenvalues."""
    w, v = np.linalg.eigh(rho.matrix)
    if w[0] < cfg.eig_floor * max(1.0, float(np.abs(w).max())):
        w = np.clip(w, 0.0, None)
        mat = (v * w) @ v.conj().T
        mat *= rho.iota / np.trace(mat).real
        rho = density(mat, cfg)
    g = np.array([expectation(rho, op, cfg) for op in level.observables])
    return ConstraintData(rho.iota, g)


def kawasaki_gunton(
    sigma: DensityOperator,
    level: LevelOfDescription,
    rho: DensityOperator,
    cfg: ToleranceConfig = DEFAULT,
) -> CanonicalState:
    """Project rho onto the canonical family: the minimum-relative-entropy
    state (relative to sigma) with rho's own trace and level expectations."""
    return solve_minrent(sigma, level, _clipped_targets(rho, level, cfg), cfg)


@dataclass(frozen=True)
class Decorrelator:
    """Grain wrapper for the marginal-product map."""

    dims: tuple[int, int]

    def apply(self, rho: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> DensityOperator:
        return decorrelate(rho, self.dims, cfg)


@dataclass(frozen=True)
class CanonicalProjection:
    """Grain wrapper for the Kawasaki-Gunton projector with a fixed
    reference and level."""

    reference: DensityOperator
    level: LevelOfDescription

    def apply(self, rho: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> DensityOperator:
        return kawasaki_gunton(self.reference, self.level, rho, cfg).mu


def apply_grain(grain, rho: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> DensityOperator:
    if isinstance(grain, Pinching):
        return pinch(grain, rho, cfg)
    if isinstance(grain, (Decorrelator, CanonicalProjection)):
        return grain.apply(rho, cfg)
    raise ValidationError(f"unknown grain {type(grain).__name__}")


def pythagorean_residual(
    rho: DensityOperator,
    sigma: DensityOperator,
    grain,
    cfg: ToleranceConfig = DEFAULT,
) -> float:
    """|S(rho || P sigma) - S(rho || P rho) - S(P rho || P sigma)|."""
    p_rho = apply_grain(grain, rho, cfg)
    p_sigma = apply_grain(grain, sigma, cfg)
    terms = (
        quantum_relative_entropy(rho, p_sigma, cfg),
        quantum_relative_entropy(rho, p_rho, cfg),
        quantum_relative_entropy(p_rho, p_sigma, cfg),
    )
    if not all(np.isfinite(terms)):
        raise SupportError("a term of the decomposition is infinite (support violation)")
    return abs(terms[0] - terms[1] - terms[2])


@dataclass(frozen=True)
class ContractionVerdict:
    """Outcome of a level-contraction check.

    ``accepted`` holds exactly when the entropy differential is below the
    larger of the statistical-fluctuation and measurement-accuracy
    thresholds.
    """

    entropy_differential: float
    fluctuation_threshold: float
    accuracy_threshold: float
    accepted: bool
    dependent_extensions: tuple[int, ...] = ()


def _split_extension(
    level: LevelOfDescription,
    extension: tuple[HermitianOperator, ...],
    cfg: ToleranceConfig,
) -> tuple[list[int], list[int]]:
    """Indices of extension observables dependent on span{I, G}."""
    d = level.dim
    basis = [np.eye(d, dtype=complex).ravel()]
    basis += [op.matrix.ravel() for op in level.observables]
    q, _ = np.linalg.qr(np.array(basis).T)
    dependent, independent = [], []
    for b, f_op in enumerate(extension):
        vec = f_op.matrix.ravel()
        res = vec - q @ (q.conj().T @ vec)
        if np.linalg.norm(res) <= cfg.dep_tol * max(1.0, np.linalg.norm(vec)):
            dependent.append(b)
        else:
            independent.append(b)
    return dependent, independent


def contract_level(
    sigma: DensityOperator,
    level: LevelOfDescription,
    extension,
    data: ConstraintData,
    f,
    n_trials: int,
    delta_f,
    cfg: ToleranceConfig = DEFAULT,
) -> ContractionVerdict:
    """Decide whether the extension observables add significant information.

    Solves the canonical state on the base level (targets ``data``) and on
    the extended level (extra observables ``extension`` with targets ``f``),
    and compares the entropy differential

        S(mu_extended || sigma) - S(mu_base || sigma)

    against two thresholds: the statistical band
    (d^2 - 1 - #constraints) / (2 n_trials) and the divergence produced by
    perturbing the extension targets by the measurement accuracy
    ``delta_f``.  Extension observables linearly dependent on the base
    level carry no information; their targets must be consistent with the
    base solution.
    """
    ext_ops = tuple(
        o if isinstance(o, HermitianOperator) else hermitian(o, cfg, "extension observable")
        for o in extension
    )
    f = np.asarray(f, dtype=float).ravel()
    delta_f = np.asarray(delta_f, dtype=float).ravel()
    if len(ext_ops) != f.size or f.size != delta_f.size:
        raise DimensionMismatchError("extension, targets and accuracies must have equal length")
    if n_trials < 1:
        raise ValidationError(f"trial count must be >= 1, got {n_trials}")

    base = solve_minrent(sigma, level, data, cfg)
    dependent, independent = _split_extension(level, ext_ops, cfg)
    for b in dependent:
        implied = expectation(base.mu, ext_ops[b], cfg)
        if abs(implied - f[b]) > max(1e3 * cfg.solver_tol, cfg.trace_tol):
            raise FeasibilityError(
                f"extension observable {b} is dependent on the level but its target "
                f"{f[b]!r} conflicts with the implied value {implied!r}"
            )

    d = level.dim
    n_constraints = level.m + len(independent)
    fluctuation = max(d * d - 1 - n_constraints, 0) / (2.0 * n_trials)

    if not independent:
        differential = 0.0
        accuracy = 0.0
    else:
        ext_level = level_of_description(
            level.observables + tuple(ext_ops[b] for b in independent), d, cfg
        )
        ext_targets = ConstraintData(
            data.iota, np.concatenate([np.asarray(data.g, dtype=float), f[independent]])
        )
        extended = solve_minrent(sigma, ext_level, ext_targets, cfg)
        differential = (
            quantum_relative_entropy(extended.mu, sigma, cfg)
            - quantum_relative_entropy(base.mu, sigma, cfg)
        )
        delta = np.zeros(ext_level.m)
        delta[level.m:] = delta_f[independent]
        accuracy, _ = second_order_divergence(extended, delta, cfg)

    threshold = max(fluctuation, accuracy)
    return ContractionVerdict(
        entropy_differential=differential,
        fluctuation_threshold=fluctuation,
        accuracy_threshold=accuracy,
        accepted=differential < threshold,
        dependent_extensions=tuple(dependent),
    )


def level_for_pinching(family: Pinching, cfg: ToleranceConfig = DEFAULT) -> LevelOfDescription:
    """The level spanned by a pinching family (one projector dropped,
    since they sum to the identity)."""
    return level_of_description(family.projectors[:-1], family.dim, cfg)


def level_for_decorrelation(dims: tuple[int, int], cfg: ToleranceConfig = DEFAULT) -> LevelOfDescription:
    """The level of all single-subsystem observables of a bipartite system:
    traceless Hermitian basis elements X (x) I and I (x) Y."""
    d_a, d_b = dims
    obs: list[np.ndarray] = []
    for d_sub, side in ((d_a, "A"), (d_b, "B")):
        for mat in _traceless_hermitian_basis(d_sub):
            if side == "A":
                obs.append(np.kron(mat, np.eye(d_b)))
            else:
                obs.append(np.kron(np.eye(d_a), mat))
    return level_of_description(obs, d_a * d_b, cfg)


def _traceless_hermitian_basis(d: int) -> list[np.ndarray]:
    basis: list[np.ndarray] = []
    for i in range(d):
        for j in range(i + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[i, j] = sym[j, i] = 1.0
            basis.append(sym)
            antisym = np.zeros((d, d), dtype=complex)
            antisym[i, j] = -1j
            antisym[j, i] = 1j
            basis.append(antisym)
    for k in range(1, d):
        diag = np.zeros((d, d), dtype=complex)
        diag[:k, :k] = np.eye(k)
        diag[k, k] = -k
        basis.append(diag / np.sqrt(k * (k + 1) / 2.0))
    return basis
