"""Dense Hermitian-operator algebra.

Spectral decomposition, operator functions, tensor products, partial
traces and expectation values on finite-dimensional complex Hilbert
spaces.  All operations are pure functions of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .config import DEFAULT, ToleranceConfig
from .errors import (
    CapacityError,
    DimensionMismatchError,
    DomainError,
    ValidationError,
)


@dataclass(frozen=True)
class HermitianOperator:
    """A d x d complex matrix equal to its conjugate transpose.

    Construct through :func:`hermitian`, which validates and symmetrizes;
    the stored matrix is exactly Hermitian.
    """

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class DensityOperator:
    """A positive semidefinite Hermitian operator with trace in (0, 1]."""

    op: HermitianOperator
    iota: float

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def dim(self) -> int:
        return self.op.dim

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.op.matrix, dtype=dtype)


class SpectralDecomposition(NamedTuple):
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_square_complex(matrix, what: str) -> np.ndarray:
    arr = np.asarray(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{what} must be a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValidationError(f"{what} must have dimension >= 1")
    return arr


def hermitian(matrix, cfg: ToleranceConfig = DEFAULT, what: str = "operator") -> HermitianOperator:
    """Validate Hermiticity and return the symmetrized operator.

    Asymmetry up to ``hermit_tol`` (relative to the largest entry, with
    floor 1) is symmetrized away; anything larger is rejected, naming the
    worst entry.
    """
    arr = _as_square_complex(matrix, what)
    asym = arr - arr.conj().T
    amax = np.abs(asym).max()
    scale = max(1.0, float(np.abs(arr).max()))
    if amax > cfg.hermit_tol * scale:
        i, j = np.unravel_index(np.abs(asym).argmax(), asym.shape)
        raise ValidationError(
            f"{what} is not Hermitian: max asymmetry {amax:.3e} at entry ({i}, {j})"
        )
    sym = (arr + arr.conj().T) / 2.0
    sym.flags.writeable = False
    return HermitianOperator(sym)


def density(matrix, cfg: ToleranceConfig = DEFAULT, what: str = "state") -> DensityOperator:
    """Validate positivity and trace, returning a density operator."""
    op = matrix if isinstance(matrix, HermitianOperator) else hermitian(matrix, cfg, what)
    w = np.linalg.eigvalsh(op.matrix)
    if w[0] < -cfg.psd_tol:
        raise ValidationError(f"{what} has negative eigenvalue {w[0]:.3e}")
    iota = float(np.trace(op.matrix).real)
    if not (0.0 < iota <= 1.0 + cfg.trace_tol):
        raise ValidationError(f"{what} has trace {iota!r} outside (0, 1]")
    return DensityOperator(op, iota)


def spectral_decompose(H: HermitianOperator, cfg: ToleranceConfig = DEFAULT) -> SpectralDecomposition:
    """Eigendecompose a Hermitian operator; eigenvalues ascending."""
    w, v = np.linalg.eigh(H.matrix)
    return SpectralDecomposition(w, v)


def degenerate_groups(eigenvalues: np.ndarray, cfg: ToleranceConfig = DEFAULT) -> list[slice]:
    """Contiguous index slices of numerically degenerate ascending eigenvalues.

    The grouping gap is ``degen_gap`` times the spectral range (floor 1).
    """
    w = np.asarray(eigenvalues, dtype=float)
    gap = cfg.degen_gap * max(1.0, float(w[-1] - w[0]))
    groups: list[slice] = []
    start = 0
    for k in range(1, len(w)):
        if w[k] - w[k - 1] > gap:
            groups.append(slice(start, k))
            start = k
    groups.append(slice(start, len(w)))
    return groups


def _support_mask(w: np.ndarray, cfg: ToleranceConfig) -> np.ndarray:
    floor = cfg.eig_floor * max(1.0, float(np.abs(w).max(initial=0.0)))
    return w > floor


def operator_function(
    H: HermitianOperator,
    f: Callable[[np.ndarray], np.ndarray],
    support_only: bool = False,
    cfg: ToleranceConfig = DEFAULT,
) -> HermitianOperator:
    """Apply a real scalar function to the spectrum: V f(diag) V^dagger.

    With ``support_only`` the function sees only eigenvalues above the
    support floor; floored eigenvalues map to exactly 0 (the 0*ln(0) = 0
    convention).
    """
    w, v = np.linalg.eigh(H.matrix)
    fw = np.zeros_like(w)
    mask = _support_mask(w, cfg) if support_only else np.ones_like(w, dtype=bool)
    if mask.any():
        with np.errstate(all="ignore"):
            vals = np.asarray(f(w[mask]), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = w[mask][~np.isfinite(vals)][0]
            raise DomainError(f"function undefined at retained eigenvalue {bad!r}")
        fw[mask] = vals
    out = (v * fw) @ v.conj().T
    out = (out + out.conj().T) / 2.0
    out.flags.writeable = False
    return HermitianOperator(out)


def expectation(rho: DensityOperator, A: HermitianOperator, cfg: ToleranceConfig = DEFAULT) -> float:
    """tr(rho A) as a real number."""
    if rho.dim != A.dim:
        raise DimensionMismatchError(f"state dim {rho.dim} != observable dim {A.dim}")
    val = complex(np.sum(rho.matrix * A.matrix.T))
    if abs(val.imag) > cfg.herm_residue_tol * max(1.0, abs(val.real)):
        raise ValidationError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def tensor_product(A, B, cfg: ToleranceConfig = DEFAULT):
    """Kronecker product; density inputs give a density with multiplicative trace."""
    if isinstance(A, DensityOperator) and isinstance(B, DensityOperator):
        mat = np.kron(A.matrix, B.matrix)
        mat.flags.writeable = False
        return DensityOperator(HermitianOperator(mat), A.iota * B.iota)
    if isinstance(A, HermitianOperator) and isinstance(B, HermitianOperator):
        mat = np.kron(A.matrix, B.matrix)
        mat.flags.writeable = False
        return HermitianOperator(mat)
    raise ValidationError("tensor_product operands must both be Hermitian or both densities")


def n_fold_power(A, n: int, cfg: ToleranceConfig = DEFAULT):
    """A^{tensor n} for n >= 1, subject to the dimension budget."""
    if n < 1:
        raise ValidationError(f"tensor power requires n >= 1, got {n}")
    dim = A.dim
    if dim**n > cfg.max_dim:
        raise CapacityError(f"dimension {dim}^{n} exceeds budget max_dim={cfg.max_dim}")
    out = A
    for _ in range(n - 1):
        out = tensor_product(out, A, cfg)
    return out


def partial_trace(
    rho_ab: DensityOperator,
    dims: tuple[int, int],
    keep: str,
    cfg: ToleranceConfig = DEFAULT,
) -> DensityOperator:
    """Trace out one tensor factor of a bipartite state; keep is "A" or "B"."""
    d_a, d_b = dims
    if d_a * d_b != rho_ab.dim:
        raise DimensionMismatchError(
            f"dims {d_a}x{d_b} do not factor dimension {rho_ab.dim}"
        )
    four = rho_ab.matrix.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        mat = np.einsum("ijkj->ik", four)
    elif keep == "B":
        mat = np.einsum("ijil->jl", four)
    else:
        raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")
    mat = np.ascontiguousarray((mat + mat.conj().T) / 2.0)
    mat.flags.writeable = False
    return DensityOperator(HermitianOperator(mat), rho_ab.iota)


def support_projector(rho: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> HermitianOperator:
    """Orthogonal projector onto the eigenspaces above the support floor."""
    w, v = np.linalg.eigh(rho.matrix)
    cols = v[:, _support_mask(w, cfg)]
    mat = cols @ cols.conj().T
    mat = (mat + mat.conj().T) / 2.0
    mat.flags.writeable = False
    return HermitianOperator(mat)


def support_weight_outside(rho: DensityOperator, sigma: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> float:
    """tr(rho K) where K projects onto the kernel of sigma."""
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dims {rho.dim} != {sigma.dim}")
    w, v = np.linalg.eigh(sigma.matrix)
    kern = v[:, ~_support_mask(w, cfg)]
    if kern.shape[1] == 0:
        return 0.0
    weight = np.einsum("ij,ik,kj->", kern.conj(), rho.matrix, kern).real
    return float(max(weight, 0.0))


def identity_density(dim: int, trace: float = 1.0) -> DensityOperator:
    """The maximally mixed state scaled to the given trace."""
    mat = np.eye(dim, dtype=complex) * (trace / dim)
    mat.flags.writeable = False
    return DensityOperator(HermitianOperator(mat), trace)


def operators_as_matrices(ops: Sequence[HermitianOperator]) -> list[np.ndarray]:
    return [op.matrix for op in ops]
