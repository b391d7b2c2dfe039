"""Desk-scale checks of the asymptotic statements.

Entropy concentration for multinomial frequencies (Monte Carlo with
counter-based per-sample streams, or exact enumeration when the outcome
space is small), and the exact optimal type-II error of discriminating
tensor-power states (the quantity whose exponential rate approaches the
relative entropy).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc, gammaln

from .config import DEFAULT, ToleranceConfig
from .entropy import ClassicalDistribution, classical_relative_entropy, distribution
from .errors import (
    CapacityError,
    ConvergenceError,
    DimensionMismatchError,
    DomainError,
    ValidationError,
)
from .operators import DensityOperator

_PHILOX_SAMPLE_STRIDE = 1 << 128  # disjoint counter blocks per sample


@dataclass(frozen=True)
class ConcentrationReport:
    """Aggregates of the frequency relative-entropy distribution."""

    d: int
    n_trials: int
    samples: int
    mean_rel_entropy: float
    predicted_mean: float
    tail_prob: dict
    predicted_tail: dict
    method: str
    seed: int
    warnings: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class SteinPoint:
    """One point of the optimal type-II error trace."""

    n_copies: int
    epsilon: float
    beta: float
    rate: float


def frequency_meta_probability(
    f: ClassicalDistribution,
    p: ClassicalDistribution,
    n_trials: int,
) -> tuple[float, float, float]:
    """(exact, factored, prefactor) for observing frequencies f in
    n_trials draws from p.

    exact     multinomial probability of the sample numbers n_trials * f;
    factored  prob(f | f) * exp(-n_trials * S(f || p)), algebraically equal;
    prefactor (2 pi N)^{-(d-1)/2} prod f_i^{-1/2}, the Stirling estimate
              of prob(f | f).
    """
    if len(f) != len(p):
        raise DimensionMismatchError(f"lengths {len(f)} != {len(p)}")
    if n_trials < 1:
        raise ValidationError(f"n_trials must be >= 1, got {n_trials}")
    for dist, name in ((f, "f"), (p, "p")):
        if abs(dist.total - 1.0) > 1e-9:
            raise ValidationError(f"{name} must be normalized, total is {dist.total!r}")
    counts = f.weights * n_trials
    rounded = np.round(counts)
    if np.abs(counts - rounded).max() > 1e-9 * n_trials:
        raise ValidationError(f"{n_trials} * f is not integral: {counts.tolist()}")
    counts = rounded.astype(int)

    log_coef = gammaln(n_trials + 1) - gammaln(counts + 1).sum()
    pos = counts > 0
    if np.any(pos & (p.weights <= 0.0)):
        exact = 0.0
    else:
        exact = math.exp(log_coef + float((counts[pos] * np.log(p.weights[pos])).sum()))
    prob_ff = math.exp(log_coef + float((counts[pos] * np.log(f.weights[pos])).sum()))
    rel = classical_relative_entropy(f, p)
    factored = prob_ff * (math.exp(-n_trials * rel) if math.isfinite(rel) else 0.0)

    d = len(f)
    if np.all(f.weights > 0.0):
        prefactor = (2.0 * math.pi * n_trials) ** (-(d - 1) / 2.0) * float(
            np.prod(1.0 / np.sqrt(f.weights))
        )
    else:
        prefactor = math.inf
    return exact, factored, prefactor


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    bitgen = np.random.Philox(key=seed & (2**64 - 1), counter=index * _PHILOX_SAMPLE_STRIDE)
    return np.random.Generator(bitgen)


def _multinomial_stick_breaking(rng: np.random.Generator, n: int, probs: np.ndarray) -> np.ndarray:
    """Draw multinomial counts by sequential binomial conditionals."""
    counts = np.zeros(len(probs), dtype=np.int64)
    remaining = n
    mass = 1.0
    for i in range(len(probs) - 1):
        if remaining == 0 or mass <= 0.0:
            break
        share = min(max(probs[i] / mass, 0.0), 1.0)
        counts[i] = rng.binomial(remaining, share)
        remaining -= counts[i]
        mass -= probs[i]
    counts[-1] = remaining
    return counts


def _rel_entropy_rows(counts: np.ndarray, n: int, probs: np.ndarray) -> np.ndarray:
    freq = counts / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(freq > 0.0, freq * np.log(freq / probs), 0.0)
    return terms.sum(axis=1)


def _enumerate_compositions(n: int, d: int):
    if d == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _enumerate_compositions(n - first, d - 1):
            yield (first, *rest)


def _outcome_count(n: int, d: int) -> int:
    return math.comb(n + d - 1, d - 1)


ENUMERATION_LIMIT = 10**5


def concentration_simulation(
    p: ClassicalDistribution,
    n_trials: int,
    samples: int,
    thresholds,
    seed: int,
    cfg: ToleranceConfig = DEFAULT,
    workers: int = 1,
) -> ConcentrationReport:
    """Distribution of S(f || p) over multinomial frequency draws.

    Switches to exact enumeration of the outcome space when it has at
    most 10^5 points; otherwise draws ``samples`` Monte Carlo samples,
    each from its own counter-based stream, so the result is identical
    for any ``workers`` count.
    """
    if n_trials < 1:
        raise ValidationError(f"n_trials must be >= 1, got {n_trials}")
    if samples < 1000:
        raise ValidationError(f"samples must be >= 1000, got {samples}")
    if abs(p.total - 1.0) > 1e-9:
        raise ValidationError(f"p must be normalized, total is {p.total!r}")
    thresholds = [float(t) for t in thresholds]

    supp = p.weights > 0.0
    probs = p.weights[supp]
    d_eff = int(supp.sum())
    if d_eff < 2:
        raise DomainError("concentration needs at least two outcomes with nonzero probability")

    warnings: list[str] = []
    if _outcome_count(n_trials, d_eff) <= ENUMERATION_LIMIT:
        method = "enumeration"
        counts = np.array(list(_enumerate_compositions(n_trials, d_eff)), dtype=np.int64)
        log_pmf = (
            gammaln(n_trials + 1)
            - gammaln(counts + 1).sum(axis=1)
            + np.where(counts > 0, counts * np.log(probs), 0.0).sum(axis=1)
        )
        pmf = np.exp(log_pmf)
        rel = _rel_entropy_rows(counts, n_trials, probs)
        mean = float((pmf * rel).sum())
        tail = {t: float(pmf[rel > t].sum()) for t in thresholds}
    else:
        method = "monte-carlo"

        def run_chunk(bounds: tuple[int, int]) -> np.ndarray:
            lo, hi = bounds
            block = np.empty((hi - lo, d_eff), dtype=np.int64)
            for j in range(lo, hi):
                block[j - lo] = _multinomial_stick_breaking(_sample_rng(seed, j), n_trials, probs)
            return block

        chunk = max(1, math.ceil(samples / max(workers, 1)))
        bounds = [(lo, min(lo + chunk, samples)) for lo in range(0, samples, chunk)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                blocks = list(pool.map(run_chunk, bounds))
        else:
            blocks = [run_chunk(b) for b in bounds]
        counts = np.concatenate(blocks, axis=0)
        rel = _rel_entropy_rows(counts, n_trials, probs)
        mean = float(rel.mean())
        tail = {t: float((rel > t).mean()) for t in thresholds}

    predicted_mean = (d_eff - 1) / (2.0 * n_trials)
    predicted_tail = {
        t: float(gammaincc((d_eff - 1) / 2.0, n_trials * t)) for t in thresholds
    }
    if abs(mean / predicted_mean - 1.0) > 0.25:
        warnings.append(
            f"pre-asymptotic regime: sample mean {mean:.3e} deviates from predicted "
            f"{predicted_mean:.3e} by more than 25%"
        )
    return ConcentrationReport(
        d=d_eff,
        n_trials=n_trials,
        samples=samples if method == "monte-carlo" else len(counts),
        mean_rel_entropy=mean,
        predicted_mean=predicted_mean,
        tail_prob=tail,
        predicted_tail=predicted_tail,
        method=method,
        seed=seed,
        warnings=tuple(warnings),
    )


def _tensor_power_matrix(rho: DensityOperator, n: int, cfg: ToleranceConfig) -> np.ndarray:
    if rho.dim**n > cfg.max_dim:
        raise CapacityError(f"dimension {rho.dim}^{n} exceeds budget max_dim={cfg.max_dim}")
    out = rho.matrix
    for _ in range(n - 1):
        out = np.kron(out, rho.matrix)
    return out


def _acceptance_mass(r_mat: np.ndarray, w: np.ndarray, v: np.ndarray, mask: np.ndarray) -> float:
    if not mask.any():
        return 0.0
    cols = v[:, mask]
    return float(np.einsum("ij,ik,kj->", cols.conj(), r_mat, cols).real)


def quantum_neyman_pearson(
    rho: DensityOperator,
    sigma: DensityOperator,
    n_copies: int,
    epsilon: float,
    cfg: ToleranceConfig = DEFAULT,
) -> SteinPoint:
    """Exact optimal type-II error for testing rho^(x)N against sigma^(x)N.

    Minimizes tr(sigma^N Gamma) over tests 0 <= Gamma <= I subject to
    tr(rho^N Gamma) >= 1 - epsilon.  The optimum is the positive spectral
    part of rho^N - t sigma^N plus fractional weight on the boundary
    eigenspace; t is located by bisection and the boundary weight is
    spread uniformly over degenerate eigenvectors so the constraint holds
    with equality.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValidationError(f"epsilon must be in (0, 1), got {epsilon}")
    for state, name in ((rho, "rho"), (sigma, "sigma")):
        if abs(state.iota - 1.0) > cfg.trace_tol:
            raise ValidationError(f"{name} must have unit trace, got {state.iota!r}")
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dims {rho.dim} != {sigma.dim}")

    r_mat = _tensor_power_matrix(rho, n_copies, cfg)
    s_mat = _tensor_power_matrix(sigma, n_copies, cfg)
    target = 1.0 - epsilon

    def mass_above_zero(t: float) -> float:
        w, v = np.linalg.eigh(r_mat - t * s_mat)
        return _acceptance_mass(r_mat, w, v, w > 0.0)

    t_lo, t_hi = 0.0, 1.0
    for _ in range(120):
        if mass_above_zero(t_hi) < target:
            break
        t_lo = t_hi
        t_hi *= 2.0
    else:
        raise ConvergenceError("no finite threshold separates the hypotheses")

    for _ in range(cfg.max_iter):
        if t_hi - t_lo <= 1e-12 * max(1.0, t_hi):
            break
        mid = 0.5 * (t_lo + t_hi)
        if mass_above_zero(mid) >= target:
            t_lo = mid
        else:
            t_hi = mid

    w, v = np.linalg.eigh(r_mat - t_hi * s_mat)
    boundary_tol = max(1e-13, 10.0 * (t_hi - t_lo))
    accept = w > boundary_tol
    alpha_plus = _acceptance_mass(r_mat, w, v, accept)
    beta = _acceptance_mass(s_mat, w, v, accept)
    deficit = target - alpha_plus

    if deficit > 1e-15:
        rest = np.where(~accept)[0][::-1]  # descending eigenvalue order
        k = 0
        while k < len(rest) and deficit > 1e-15:
            group = [rest[k]]
            while (
                k + len(group) < len(rest)
                and abs(w[rest[k + len(group)]] - w[group[0]]) <= boundary_tol
            ):
                group.append(rest[k + len(group)])
            cols = v[:, group]
            r_gain = float(np.einsum("ij,ik,kj->", cols.conj(), r_mat, cols).real)
            s_gain = float(np.einsum("ij,ik,kj->", cols.conj(), s_mat, cols).real)
            if r_gain >= deficit or k + len(group) >= len(rest):
                frac = min(max(deficit / r_gain, 0.0), 1.0) if r_gain > 0.0 else 0.0
                beta += frac * s_gain
                deficit -= frac * r_gain
                break
            beta += s_gain
            deficit -= r_gain
            k += len(group)

    beta = float(min(max(beta, 0.0), 1.0))
    if beta <= 0.0:
        raise DomainError(
            "type-II error is exactly zero (disjoint supports); the rate is unbounded"
        )
    rate = -math.log(beta) / n_copies
    return SteinPoint(n_copies=n_copies, epsilon=epsilon, beta=beta, rate=rate)


def classical_neyman_pearson(
    rho_probs,
    sigma_probs,
    n_copies: int,
    epsilon: float,
) -> float:
    """Exhaustive classical oracle: optimal randomized type-II error over
    all d^N outcome sequences, by likelihood-ratio ordering.

    Independent of the operator path; product probabilities are formed
    outcome by outcome and filled greedily with randomization on the
    marginal likelihood-ratio class.
    """
    r1 = np.asarray(rho_probs, dtype=float).ravel()
    s1 = np.asarray(sigma_probs, dtype=float).ravel()
    if r1.shape != s1.shape:
        raise DimensionMismatchError("probability vectors differ in length")
    if not (0.0 < epsilon < 1.0):
        raise ValidationError(f"epsilon must be in (0, 1), got {epsilon}")

    r = r1.copy()
    s = s1.copy()
    for _ in range(n_copies - 1):
        r = np.multiply.outer(r, r1).ravel()
        s = np.multiply.outer(s, s1).ravel()

    with np.errstate(divide="ignore"):
        ratio = np.where(s > 0.0, r / s, math.inf)
    order = np.argsort(-ratio, kind="stable")
    target = 1.0 - epsilon
    accepted_r = 0.0
    beta = 0.0
    idx = 0
    while idx < len(order) and accepted_r < target - 1e-15:
        # group outcomes with equal likelihood ratio and fill them together
        grp = [order[idx]]
        while idx + len(grp) < len(order) and np.isclose(
            ratio[order[idx + len(grp)]], ratio[grp[0]], rtol=1e-12, atol=0.0
        ):
            grp.append(order[idx + len(grp)])
        r_gain = float(r[grp].sum())
        s_gain = float(s[grp].sum())
        room = target - accepted_r
        if r_gain <= room + 1e-15:
            accepted_r += r_gain
            beta += s_gain
            idx += len(grp)
        else:
            frac = room / r_gain if r_gain > 0.0 else 0.0
            beta += frac * s_gain
            accepted_r = target
    return float(min(max(beta, 0.0), 1.0))


def stein_rate_trace(
    rho: DensityOperator,
    sigma: DensityOperator,
    n_max: int,
    epsilon: float,
    cfg: ToleranceConfig = DEFAULT,
) -> list[SteinPoint]:
    """Optimal error rates for N = 1 .. n_max copies."""
    if n_max < 1:
        raise ValidationError(f"n_max must be >= 1, got {n_max}")
    return [
        quantum_neyman_pearson(rho, sigma, n, epsilon, cfg) for n in range(1, n_max + 1)
    ]
