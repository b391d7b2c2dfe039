"""Generalized canonical states and their calculus.

A level of description is a set of relevant observables; the canonical
state for Lagrange parameters lambda relative to a reference sigma is

    mu = (iota / Z) exp[(ln sigma - <ln sigma>_{1/d}) - sum_a lambda^a G_a],

with Z the trace of the exponential.  ``solve_minrent`` inverts the map
lambda -> expectations by damped Newton iteration, using the Kubo-Mori
correlation matrix as the exact Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .config import DEFAULT, ToleranceConfig
from .entropy import (
    ClassicalDistribution,
    _entropy_of_weights,
    distribution,
    von_neumann_entropy,
)
from .errors import (
    ConditioningError,
    ConvergenceError,
    DimensionMismatchError,
    DomainError,
    FeasibilityError,
    SupportError,
    ValidationError,
)
from .operators import (
    DensityOperator,
    HermitianOperator,
    density,
    expectation,
    hermitian,
)


@dataclass(frozen=True)
class LevelOfDescription:
    """Relevant observables G_1..G_m (the identity is implicit)."""

    observables: tuple[HermitianOperator, ...]
    dim: int

    @property
    def m(self) -> int:
        return len(self.observables)


@dataclass(frozen=True)
class ConstraintData:
    """Target trace iota and expectation values g for a level."""

    iota: float
    g: np.ndarray


@dataclass(frozen=True)
class CanonicalState:
    """A constructed or solved canonical state."""

    sigma: DensityOperator
    level: LevelOfDescription
    lam: np.ndarray
    Z: float
    log_Z: float
    mu: DensityOperator
    g: np.ndarray          # realized expectation values of the level observables
    residual: float
    iterations: int = 0
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def iota(self) -> float:
        return self.mu.iota


def hs_gram(mats: list[np.ndarray]) -> np.ndarray:
    """Gram matrix under the Hilbert-Schmidt inner product, norm-scaled."""
    vecs = []
    for m in mats:
        norm = np.linalg.norm(m.ravel())
        if norm == 0.0:
            raise ValidationError("level contains a zero observable")
        vecs.append(m.ravel() / norm)
    x = np.array(vecs)
    return (x.conj() @ x.T).real


def level_of_description(
    observables,
    dim: int | None = None,
    cfg: ToleranceConfig = DEFAULT,
) -> LevelOfDescription:
    """Validate linear independence of {I, G_a} and build the level."""
    obs = tuple(
        o if isinstance(o, HermitianOperator) else hermitian(o, cfg, "observable")
        for o in observables
    )
    if dim is None:
        if not obs:
            raise ValidationError("empty level requires an explicit dimension")
        dim = obs[0].dim
    for k, o in enumerate(obs):
        if o.dim != dim:
            raise DimensionMismatchError(f"observable {k} has dim {o.dim}, expected {dim}")
    m = len(obs)
    if m >= dim * dim:
        raise ValidationError(f"m={m} observables exceed d^2-1={dim*dim-1} independent directions")
    if m:
        gram = hs_gram([np.eye(dim, dtype=complex)] + [o.matrix for o in obs])
        cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > cfg.gram_cond_max:
            raise ValidationError(
                f"level observables are not independent of the identity: "
                f"Gram condition {cond:.3e} exceeds {cfg.gram_cond_max:.1e}"
            )
    return LevelOfDescription(obs, dim)


def _sigma_support(sigma: DensityOperator, cfg: ToleranceConfig):
    s, v = np.linalg.eigh(sigma.matrix)
    floor = cfg.eig_floor * max(1.0, float(np.abs(s).max()))
    supp = s > floor
    if not supp.any():
        raise DomainError("reference state has empty support")
    return s[supp], v[:, supp]


def canonical_state(
    sigma: DensityOperator,
    level: LevelOfDescription,
    lam,
    iota: float,
    cfg: ToleranceConfig = DEFAULT,
    _log_z_only: bool = False,
):
    """Construct the canonical state for given Lagrange parameters.

    The exponent lives on the support of sigma; the scalar shift
    <ln sigma>_{1/d} sums ln over the support only (it cancels in mu and
    keeps Z finite for singular references).
    """
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.size != level.m:
        raise DimensionMismatchError(f"lambda length {lam.size} != level size {level.m}")
    if not np.all(np.isfinite(lam)):
        raise ValidationError("lambda must be finite")
    if not (0.0 < iota <= 1.0 + cfg.trace_tol):
        raise ValidationError(f"iota {iota!r} outside (0, 1]")

    d = sigma.dim
    s_supp, v_supp = _sigma_support(sigma, cfg)
    shift = float(np.log(s_supp).sum()) / d
    exponent = np.diag(np.log(s_supp) - shift).astype(complex)
    for a, g_op in enumerate(level.observables):
        exponent -= lam[a] * (v_supp.conj().T @ g_op.matrix @ v_supp)
    exponent = (exponent + exponent.conj().T) / 2.0

    w, u = np.linalg.eigh(exponent)
    w_max = float(w[-1])
    if w_max > cfg.lambda_max:
        raise DomainError(f"exponent eigenvalue {w_max:.3e} exceeds lambda_max={cfg.lambda_max}")
    scaled = np.exp(w - w_max)
    total = float(scaled.sum())
    log_z = w_max + math.log(total)
    z = math.exp(log_z) if log_z < 700.0 else math.inf
    if _log_z_only:
        return log_z

    mu_supp = (u * (scaled / total)) @ u.conj().T
    mu_full = v_supp @ mu_supp @ v_supp.conj().T
    mu_full = (mu_full + mu_full.conj().T) / 2.0 * iota
    mu = density(mu_full, cfg, "canonical state")
    g_real = np.array([expectation(mu, g_op, cfg) for g_op in level.observables])
    return CanonicalState(
        sigma=sigma, level=level, lam=lam, Z=z, log_Z=log_z, mu=mu,
        g=g_real, residual=0.0,
    )


def _observable_range_on_support(
    g_op: HermitianOperator, v_supp: np.ndarray
) -> tuple[float, float]:
    block = v_supp.conj().T @ g_op.matrix @ v_supp
    w = np.linalg.eigvalsh((block + block.conj().T) / 2.0)
    return float(w[0]), float(w[-1])


def check_feasibility(
    sigma: DensityOperator,
    level: LevelOfDescription,
    data: ConstraintData,
    cfg: ToleranceConfig = DEFAULT,
) -> None:
    """Each target must lie strictly inside the spectral range of its
    observable restricted to supp(sigma)."""
    _, v_supp = _sigma_support(sigma, cfg)
    for a, g_op in enumerate(level.observables):
        lo, hi = _observable_range_on_support(g_op, v_supp)
        target = data.g[a] / data.iota
        if not (lo + cfg.feas_margin < target < hi - cfg.feas_margin):
            raise FeasibilityError(
                f"target g[{a}]/iota = {target!r} outside spectral range "
                f"({lo!r}, {hi!r}) of observable {a} on the reference support"
            )


def kubo_mori_correlation(
    rho: DensityOperator,
    B: HermitianOperator,
    A: HermitianOperator,
    cfg: ToleranceConfig = DEFAULT,
    require_support: bool = True,
) -> float:
    """Canonical correlation <B; A>_rho = int_0^1 tr[rho^nu B rho^(1-nu) A] dnu.

    Closed form in rho's eigenbasis with kernel (p_i - p_j)/(ln p_i - ln p_j);
    nearly equal eigenvalues use the limit value (their mean) to keep the
    kernel exactly symmetric.  With ``require_support`` (the default) the
    operators must not have weight outside supp(rho); the solver disables
    the check because only the support block enters the Jacobian.
    """
    if not (rho.dim == A.dim == B.dim):
        raise DimensionMismatchError("dimension mismatch in correlation")
    w, v = np.linalg.eigh(rho.matrix)
    floor = cfg.eig_floor * max(1.0, float(np.abs(w).max()))
    supp = w > floor
    if require_support and not supp.all():
        scale_a = max(1.0, float(np.abs(A.matrix).max()))
        scale_b = max(1.0, float(np.abs(B.matrix).max()))
        kern = v[:, ~supp]
        for op, scale, name in ((A, scale_a, "A"), (B, scale_b, "B")):
            leak = np.abs(op.matrix @ kern).max()
            if leak > 1e3 * cfg.support_tol * scale:
                raise SupportError(f"operator {name} has weight outside supp(rho): {leak:.3e}")
    p = w[supp]
    vs = v[:, supp]
    logp = np.log(p)
    dp = p[:, None] - p[None, :]
    dl = logp[:, None] - logp[None, :]
    mean = (p[:, None] + p[None, :]) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = np.where(np.abs(dl) < cfg.km_degen, mean, dp / dl)
    a_t = vs.conj().T @ A.matrix @ vs
    b_t = vs.conj().T @ B.matrix @ vs
    val = complex(np.sum(kernel * b_t * a_t.T))
    if abs(val.imag) > cfg.herm_residue_tol * max(1.0, abs(val.real)):
        raise ValidationError(f"correlation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def correlation_matrix(state: CanonicalState, cfg: ToleranceConfig = DEFAULT) -> np.ndarray:
    """C_ab = <dG_a; dG_b>_mu with dG_a = G_a - (g_a/iota) I."""
    mu, level = state.mu, state.level
    iota = mu.iota
    eye = np.eye(level.dim)
    centered = [
        hermitian(g_op.matrix - (state.g[a] / iota) * eye, cfg)
        for a, g_op in enumerate(level.observables)
    ]
    m = level.m
    c = np.empty((m, m))
    for a in range(m):
        for b in range(m):
            c[a, b] = kubo_mori_correlation(mu, centered[a], centered[b], cfg, require_support=False)
    return c


def _solve_spd(c: np.ndarray, rhs: np.ndarray, cfg: ToleranceConfig):
    """Solve C x = rhs via Cholesky, escalating a Tikhonov shift when the
    matrix is numerically indefinite at its own scale."""
    sym = (c + c.T) / 2.0
    try:
        return cho_solve(cho_factor(sym), rhs), None
    except np.linalg.LinAlgError:
        pass
    scale = max(float(np.trace(sym)) / max(len(sym), 1), 0.0)
    shift = max(cfg.tikh * scale, 1e-300)
    for _ in range(40):
        try:
            factor = cho_factor(sym + shift * np.eye(len(sym)))
            return (
                cho_solve(factor, rhs),
                f"tikhonov shift {shift:.3e} applied to correlation matrix",
            )
        except np.linalg.LinAlgError:
            shift *= 100.0
            if scale > 0.0 and shift > 1e6 * scale:
                break
    raise ConditioningError(
        f"correlation matrix not positive definite even after shift {shift:.3e}"
    )


_STEP_CAP = 64.0     # max infinity-norm of a raw Newton step
_ARMIJO = 1e-4


def solve_minrent(
    sigma: DensityOperator,
    level: LevelOfDescription,
    data: ConstraintData,
    cfg: ToleranceConfig = DEFAULT,
) -> CanonicalState:
    """Find the canonical state matching the constraint targets.

    Damped Newton on lambda starting from the ignorance state (lambda = 0):
    the step is delta_lambda = C^{-1} (g_current - g_target) with C the
    correlation matrix.  Backtracking (up to 20 halvings) accepts a step
    when it decreases the strictly convex dual potential
    ln Z + lambda . g_target / iota, whose unique minimum is the solution;
    accepting on the raw residual instead can strand the iteration in the
    exponentially flat region near the spectral boundary.
    """
    g_target = np.asarray(data.g, dtype=float).ravel()
    if g_target.size != level.m:
        raise DimensionMismatchError(f"targets length {g_target.size} != level size {level.m}")
    data = ConstraintData(float(data.iota), g_target)
    check_feasibility(sigma, level, data, cfg)

    state = canonical_state(sigma, level, np.zeros(level.m), data.iota, cfg)
    if level.m == 0:
        return state
    residual = float(np.abs(state.g - g_target).max())
    history = [residual]
    warnings: list[str] = []

    def dual(st: CanonicalState) -> float:
        return st.log_Z + float(st.lam @ g_target) / data.iota

    for iteration in range(1, cfg.max_iter + 1):
        if residual <= cfg.solver_tol:
            return CanonicalState(
                sigma=sigma, level=level, lam=state.lam, Z=state.Z, log_Z=state.log_Z,
                mu=state.mu, g=state.g, residual=residual, iterations=iteration - 1,
                warnings=tuple(warnings),
            )
        c = correlation_matrix(state, cfg)
        step, warn = _solve_spd(c, state.g - g_target, cfg)
        if warn and warn not in warnings:
            warnings.append(warn)
        step_norm = float(np.abs(step).max())
        factor = min(1.0, _STEP_CAP / step_norm) if step_norm > _STEP_CAP else 1.0
        current_dual = dual(state)
        # directional derivative of the dual along the step (negative)
        slope = float((g_target - state.g) @ step) / data.iota
        dual_resolution = 16.0 * np.finfo(float).eps * max(1.0, abs(current_dual))
        accepted = False
        for _ in range(21):
            lam_try = state.lam + factor * step
            if np.abs(lam_try).max() <= cfg.lambda_max:
                try:
                    trial = canonical_state(sigma, level, lam_try, data.iota, cfg)
                except DomainError:
                    trial = None
                if trial is not None:
                    trial_res = float(np.abs(trial.g - g_target).max())
                    armijo = dual(trial) <= current_dual + _ARMIJO * factor * slope
                    # when the predicted decrease is below float resolution,
                    # fall back to plain residual descent
                    exhausted = -slope * factor <= dual_resolution
                    if armijo or (exhausted and trial_res < residual):
                        state, residual = trial, trial_res
                        accepted = True
                        break
            factor /= 2.0
        if not accepted:
            raise ConvergenceError(
                f"no dual decrease after 20 halvings at residual {residual:.3e}", history
            )
        history.append(residual)

    if residual <= cfg.solver_tol:
        return CanonicalState(
            sigma=sigma, level=level, lam=state.lam, Z=state.Z, log_Z=state.log_Z,
            mu=state.mu, g=state.g, residual=residual, iterations=cfg.max_iter,
            warnings=tuple(warnings),
        )
    raise ConvergenceError(
        f"residual {residual:.3e} > solver_tol after {cfg.max_iter} iterations", history
    )


def classical_maxent(
    prior: ClassicalDistribution,
    features: np.ndarray,
    data: ConstraintData,
    cfg: ToleranceConfig = DEFAULT,
) -> ClassicalDistribution:
    """Diagonal counterpart of :func:`solve_minrent`.

    Weights q_i proportional to p_i exp[-sum_a lambda^a G_a^i], scaled to
    total iota, with lambda fitted by the same damped Newton iteration.
    """
    g_mat = np.atleast_2d(np.asarray(features, dtype=float))
    m, d = g_mat.shape if g_mat.size else (0, len(prior))
    if d != len(prior):
        raise DimensionMismatchError(f"feature width {d} != prior length {len(prior)}")
    g_target = np.asarray(data.g, dtype=float).ravel()
    if g_target.size != m:
        raise DimensionMismatchError(f"targets length {g_target.size} != feature count {m}")
    iota = float(data.iota)

    pw = prior.weights
    supp = pw > cfg.eig_floor * max(1.0, float(pw.max()))
    if not supp.any():
        raise DomainError("prior has empty support")
    log_p = np.log(pw[supp])
    shift = log_p.sum() / d
    g_s = g_mat[:, supp] if m else np.zeros((0, int(supp.sum())))

    for a in range(m):
        lo, hi = float(g_s[a].min()), float(g_s[a].max())
        if not (lo + cfg.feas_margin < g_target[a] / iota < hi - cfg.feas_margin):
            raise FeasibilityError(
                f"target g[{a}]/iota = {g_target[a] / iota!r} outside feature range ({lo!r}, {hi!r})"
            )

    def weights_for(lam: np.ndarray) -> tuple[np.ndarray, float]:
        x = log_p - shift - (lam @ g_s if m else 0.0)
        x_max = x.max()
        e = np.exp(x - x_max)
        total = e.sum()
        return iota * e / total, float(x_max + np.log(total))

    def full(q_s: np.ndarray) -> ClassicalDistribution:
        q = np.zeros_like(pw)
        q[supp] = q_s
        return distribution(q, cfg)

    lam = np.zeros(m)
    q_s, log_z = weights_for(lam)
    if m == 0:
        return full(q_s)
    g_cur = g_s @ q_s
    residual = float(np.abs(g_cur - g_target).max())
    history = [residual]

    def dual(log_z_val: float, lam_val: np.ndarray) -> float:
        return log_z_val + float(lam_val @ g_target) / iota

    for _ in range(cfg.max_iter):
        if residual <= cfg.solver_tol:
            return full(q_s)
        centered = g_s - (g_cur / iota)[:, None]
        c = (centered * q_s) @ centered.T
        step, _ = _solve_spd(c, g_cur - g_target, cfg)
        step_norm = float(np.abs(step).max())
        factor = min(1.0, _STEP_CAP / step_norm) if step_norm > _STEP_CAP else 1.0
        current_dual = dual(log_z, lam)
        slope = float((g_target - g_cur) @ step) / iota
        dual_resolution = 16.0 * np.finfo(float).eps * max(1.0, abs(current_dual))
        for _ in range(21):
            lam_try = lam + factor * step
            q_try, log_z_try = weights_for(lam_try)
            g_try = g_s @ q_try
            res_try = float(np.abs(g_try - g_target).max())
            armijo = dual(log_z_try, lam_try) <= current_dual + _ARMIJO * factor * slope
            exhausted = -slope * factor <= dual_resolution
            if armijo or (exhausted and res_try < residual):
                lam, q_s, log_z, g_cur, residual = lam_try, q_try, log_z_try, g_try, res_try
                break
            factor /= 2.0
        else:
            raise ConvergenceError(
                f"no dual decrease after 20 halvings at residual {residual:.3e}", history
            )
        history.append(residual)

    if residual <= cfg.solver_tol:
        return full(q_s)
    raise ConvergenceError(
        f"residual {residual:.3e} > solver_tol after {cfg.max_iter} iterations", history
    )


def canonical_entropy_identity(state: CanonicalState, cfg: ToleranceConfig = DEFAULT) -> tuple[float, float]:
    """Both sides of the canonical entropy relation.

    lhs = S[mu/iota] + (<ln sigma>_{mu/iota} - <ln sigma>_{1/d});
    rhs = ln Z + sum_a lambda^a g_a / iota.
    """
    iota = state.iota
    d = state.sigma.dim
    s_supp, v_supp = _sigma_support(state.sigma, cfg)
    log_s = np.log(s_supp)
    shift = float(log_s.sum()) / d
    diag = np.einsum("ij,ik,kj->j", v_supp.conj(), state.mu.matrix, v_supp).real
    mean_log_sigma = float((diag * log_s).sum()) / iota
    w = np.clip(np.linalg.eigvalsh(state.mu.matrix / iota), 0.0, None)
    lhs = _entropy_of_weights(w) + mean_log_sigma - shift
    rhs = state.log_Z + float(state.lam @ state.g) / iota
    return lhs, rhs


def partition_gradient_check(state: CanonicalState, cfg: ToleranceConfig = DEFAULT) -> float:
    """Max deviation of central differences of ln Z from -g_a/iota."""
    h = cfg.fd_step
    worst = 0.0
    for a in range(state.level.m):
        lam_p = state.lam.copy(); lam_p[a] += h
        lam_m = state.lam.copy(); lam_m[a] -= h
        lz_p = canonical_state(state.sigma, state.level, lam_p, state.iota, cfg, _log_z_only=True)
        lz_m = canonical_state(state.sigma, state.level, lam_m, state.iota, cfg, _log_z_only=True)
        fd = (lz_p - lz_m) / (2.0 * h)
        worst = max(worst, abs(fd + state.g[a] / state.iota))
    return worst


def _same_level(s1: CanonicalState, s2: CanonicalState) -> bool:
    if s1.level.m != s2.level.m or s1.level.dim != s2.level.dim:
        return False
    return all(
        np.allclose(a.matrix, b.matrix, atol=1e-12)
        for a, b in zip(s1.level.observables, s2.level.observables)
    )


def macrostate_relative_entropy(
    s1: CanonicalState,
    s2: CanonicalState,
    cfg: ToleranceConfig = DEFAULT,
) -> float:
    """S(mu_1 || mu_2) for two macrostates on the same level and reference:

        sum_a (lambda_2 - lambda_1)^a g_1a + iota_1 (ln Z_2 - ln Z_1)
        - iota_1 ln(iota_2 / iota_1).
    """
    if not np.allclose(s1.sigma.matrix, s2.sigma.matrix, atol=1e-12):
        raise ValidationError("macrostates must share the reference state")
    if not _same_level(s1, s2):
        raise ValidationError("macrostates must share the level of description")
    i1, i2 = s1.iota, s2.iota
    return float(
        (s2.lam - s1.lam) @ s1.g + i1 * (s2.log_Z - s1.log_Z) - i1 * math.log(i2 / i1)
    )


def second_order_divergence(
    state: CanonicalState,
    delta_g,
    cfg: ToleranceConfig = DEFAULT,
) -> tuple[float, float]:
    """Exact and quadratic-order divergence to the state at g + delta_g.

    exact     = S(mu_g || mu_{g+delta_g})  (same iota),
    quadratic = (1/2) delta_g^T C^{-1} delta_g  with C at the base state.
    """
    delta = np.asarray(delta_g, dtype=float).ravel()
    if delta.size != state.level.m:
        raise DimensionMismatchError(f"delta length {delta.size} != level size {state.level.m}")
    if not delta.any():
        return 0.0, 0.0
    perturbed = solve_minrent(
        state.sigma, state.level, ConstraintData(state.iota, state.g + delta), cfg
    )
    exact = macrostate_relative_entropy(state, perturbed, cfg)
    c = correlation_matrix(state, cfg)
    x, _ = _solve_spd(c, delta, cfg)
    quadratic = 0.5 * float(delta @ x)
    return exact, quadratic
