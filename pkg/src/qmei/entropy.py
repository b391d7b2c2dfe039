"""Classical and quantum entropies and relative entropies.

All entropies are in nats.  Relative entropies return ``math.inf`` (the
IEEE infinity, kept distinct from any finite float) when the first
argument has weight outside the support of the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, ToleranceConfig
from .errors import (
    DimensionMismatchError,
    RationalApproximationError,
    SupportError,
    ValidationError,
)
from .operators import (
    DensityOperator,
    degenerate_groups,
    identity_density,
    support_weight_outside,
)


@dataclass(frozen=True)
class ClassicalDistribution:
    """Nonnegative weight vector with total in (0, 1]."""

    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return len(self.weights)


def distribution(weights, cfg: ToleranceConfig = DEFAULT, what: str = "distribution") -> ClassicalDistribution:
    """Validate and build a classical distribution; tiny negatives are zeroed."""
    w = np.asarray(weights, dtype=float).ravel().copy()
    if w.size == 0:
        raise ValidationError(f"{what} is empty")
    if w.min(initial=0.0) < -cfg.psd_tol:
        raise ValidationError(f"{what} has negative weight {w.min():.3e}")
    w[w < 0.0] = 0.0
    total = float(w.sum())
    if not (0.0 < total <= 1.0 + cfg.trace_tol):
        raise ValidationError(f"{what} has total weight {total!r} outside (0, 1]")
    w.flags.writeable = False
    return ClassicalDistribution(w)


def _entropy_of_weights(w: np.ndarray) -> float:
    pos = w[w > 0.0]
    return float(-(pos * np.log(pos)).sum())


def classical_entropy(q: ClassicalDistribution) -> float:
    """-sum q_i ln q_i with the 0 ln 0 = 0 convention."""
    return _entropy_of_weights(q.weights)


def classical_relative_entropy(
    q: ClassicalDistribution,
    p: ClassicalDistribution,
    cfg: ToleranceConfig = DEFAULT,
) -> float:
    """sum q_i ln(q_i / p_i); +inf when q puts weight where p has none."""
    if len(q) != len(p):
        raise DimensionMismatchError(f"lengths {len(q)} != {len(p)}")
    qw, pw = q.weights, p.weights
    q_floor = cfg.eig_floor * max(1.0, float(qw.max()))
    p_floor = cfg.eig_floor * max(1.0, float(pw.max()))
    if np.any((qw > q_floor) & (pw <= p_floor)):
        return math.inf
    mask = qw > q_floor
    return float((qw[mask] * np.log(qw[mask] / pw[mask])).sum())


def spectrum(rho: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> np.ndarray:
    """Eigenvalues of a density operator, clipped at zero."""
    w = np.linalg.eigvalsh(rho.matrix)
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> float:
    """-tr(rho ln rho), evaluated on the spectrum."""
    return _entropy_of_weights(spectrum(rho, cfg))


def quantum_relative_entropy(
    rho: DensityOperator,
    sigma: DensityOperator,
    cfg: ToleranceConfig = DEFAULT,
) -> float:
    """tr(rho ln rho - rho ln sigma) on supp(sigma); +inf outside.

    The cross term is evaluated in sigma's eigenbasis so that ln(sigma)
    is never formed on a near-singular kernel.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dims {rho.dim} != {sigma.dim}")
    s, v = np.linalg.eigh(sigma.matrix)
    floor = cfg.eig_floor * max(1.0, float(np.abs(s).max()))
    supp = s > floor
    diag = np.einsum("ij,ik,kj->j", v.conj(), rho.matrix, v).real
    outside = float(rho.iota - diag[supp].sum())
    if outside > cfg.support_tol:
        return math.inf
    tr_rho_ln_rho = -_entropy_of_weights(spectrum(rho, cfg))
    tr_rho_ln_sigma = float((diag[supp] * np.log(s[supp])).sum())
    return tr_rho_ln_rho - tr_rho_ln_sigma


def entropy_from_relative(rho: DensityOperator, cfg: ToleranceConfig = DEFAULT) -> float:
    """S[1/d] - S(rho || 1/d); equals the von Neumann entropy for unit trace."""
    if abs(rho.iota - 1.0) > cfg.trace_tol:
        raise ValidationError(f"requires unit trace, got {rho.iota!r}")
    d = rho.dim
    return math.log(d) - quantum_relative_entropy(rho, identity_density(d), cfg)


def _pinched_blocks(
    rho: DensityOperator,
    sigma: DensityOperator,
    cfg: ToleranceConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Block probabilities of rho and sigma over sigma's eigenspaces.

    Returns (q, p, ranks) where q_i = tr(rho P_i), p_i = tr(sigma P_i)
    and ranks are the eigenspace dimensions.
    """
    s, v = np.linalg.eigh(sigma.matrix)
    diag = np.einsum("ij,ik,kj->j", v.conj(), rho.matrix, v).real
    qs, ps, ranks = [], [], []
    for grp in degenerate_groups(s, cfg):
        qs.append(diag[grp].sum())
        ps.append(s[grp].sum())
        ranks.append(grp.stop - grp.start)
    return np.array(qs), np.array(ps), np.array(ranks, dtype=int)


def _zero_sum_offsets(k: int) -> np.ndarray:
    """Integer transfer vectors summing to zero, with a span that keeps
    the combinatorics small for many blocks."""
    span = {1: 0, 2: 2, 3: 5, 4: 3}.get(k, 1)
    if k > 8:
        return np.zeros((1, k), dtype=np.int64)
    grids = np.meshgrid(*([np.arange(-span, span + 1)] * k), indexing="ij")
    flat = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    return flat[flat.sum(axis=1) == 0]


def _best_common_denominator(
    p: np.ndarray,
    q: np.ndarray,
    d_max: int,
    cfg: ToleranceConfig,
) -> tuple[int, np.ndarray, float]:
    """Integers n with sum(n) = D <= d_max and n/D ~ p, minimizing the
    weighted log discrepancy sum q_i ln(p_i D / n_i).

    Every denominator is scanned (which covers all mediant/convergent
    candidates of the component fractions), and every rounding is refined
    over zero-sum unit transfers between blocks; the transfer lattice
    cancels discrepancies far below the plain rounding resolution.
    """
    k = len(p)
    if d_max < k:
        raise RationalApproximationError(
            f"denominator budget {d_max} below block count {k}"
        )
    denoms = np.arange(k, d_max + 1, dtype=np.int64)
    base = np.round(np.outer(denoms, p)).astype(np.int64)
    base[base < 1] = 1
    heaviest = int(np.argmax(p))
    deficit = denoms - base.sum(axis=1)
    base[:, heaviest] += deficit
    valid = base[:, heaviest] >= 1
    if not valid.any():
        raise RationalApproximationError(
            f"no admissible denominator up to {d_max} for {k} blocks"
        )
    denoms, base = denoms[valid], base[valid]
    log_p_term = float((q * np.log(p)).sum())
    q_total = float(q.sum())
    offsets = _zero_sum_offsets(k)

    best: tuple[int, np.ndarray, float] | None = None
    chunk = max(1, (1 << 21) // max(len(offsets) * k, 1))
    for lo in range(0, len(denoms), chunk):
        d_blk = denoms[lo : lo + chunk]
        n_cand = base[lo : lo + chunk, None, :] + offsets[None, :, :]
        bad = (n_cand < 1).any(axis=2)
        errs = (
            log_p_term
            + q_total * np.log(d_blk)[:, None]
            - np.einsum("k,rok->ro", q, np.log(np.maximum(n_cand, 1)))
        )
        errs = np.where(bad, np.inf, errs)
        flat = int(np.argmin(np.abs(errs)))
        r, o = divmod(flat, errs.shape[1])
        err = float(errs[r, o])
        if best is None or abs(err) < abs(best[2]):
            best = (int(d_blk[r]), n_cand[r, o].copy(), err)
            if err == 0.0:
                break
    assert best is not None
    return best


def relative_entropy_via_extension(
    rho: DensityOperator,
    sigma: DensityOperator,
    d_max: int,
    cfg: ToleranceConfig = DEFAULT,
) -> float:
    """Relative entropy reduced to ordinary entropies via a uniformizing
    Hilbert-space embedding.

    Pinches rho onto sigma's eigenspaces, approximates the block weights
    of sigma by n_i / D with a common denominator D <= d_max, and returns

        ln D - S[extended pinched rho] + S[pinched rho] - S[rho],

    where the extended state spreads block i uniformly over n_i copies.
    Works for non-commuting pairs; the only approximation error is the
    rational one, which must stay below ``ratapprox_tol``.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dims {rho.dim} != {sigma.dim}")
    if abs(rho.iota - 1.0) > cfg.trace_tol or abs(sigma.iota - 1.0) > cfg.trace_tol:
        raise ValidationError("extension construction requires unit-trace states")
    if support_weight_outside(rho, sigma, cfg) > cfg.support_tol:
        raise SupportError("supp(rho) is not contained in supp(sigma)")

    q, p, ranks = _pinched_blocks(rho, sigma, cfg)
    keep = p > cfg.eig_floor
    q, p, ranks = q[keep], p[keep], ranks[keep]
    q = np.clip(q, 0.0, None)

    denom, counts, err = _best_common_denominator(p, q, d_max, cfg)
    if abs(err) > cfg.ratapprox_tol:
        raise RationalApproximationError(
            f"best denominator {denom} leaves discrepancy {err:.3e} > {cfg.ratapprox_tol}"
        )

    pos = q > 0.0
    s_extended = float(-(q[pos] * np.log(q[pos] / counts[pos])).sum())
    s_pinched = float(-(q[pos] * np.log(q[pos] / ranks[pos])).sum())
    s_rho = von_neumann_entropy(rho, cfg)
    return math.log(denom) - s_extended + s_pinched - s_rho


def meta_probability(
    rho: DensityOperator,
    sigma: DensityOperator,
    cfg: ToleranceConfig = DEFAULT,
) -> float:
    """exp(-S(rho || sigma)); zero on support violation."""
    s = quantum_relative_entropy(rho, sigma, cfg)
    return math.exp(-s) if math.isfinite(s) else 0.0
