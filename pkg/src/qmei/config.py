"""Numerical tolerances and resource limits.

Every tolerance used anywhere in the toolkit lives here so that runs are
reproducible from a report's echoed configuration.  Resolution order is
defaults < environment (``QMEI_<NAME>``) < problem-file ``config`` block
< explicit CLI overrides; later sources win.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .errors import ValidationError

ENV_PREFIX = "QMEI_"


@dataclass(frozen=True)
class ToleranceConfig:
    # operator algebra
    hermit_tol: float = 1e-10    # max asymmetry (relative to largest entry) before rejection
    psd_tol: float = 1e-10       # most negative admissible density eigenvalue
    eig_floor: float = 1e-12     # eigenvalues below eig_floor * max count as zero
    trace_tol: float = 1e-8
    spec_tol: float = 1e-10
    herm_residue_tol: float = 1e-9
    degen_gap: float = 1e-10     # eigenvalue-grouping gap, relative to spectral range
    max_dim: int = 4096

    # entropies
    support_tol: float = 1e-10   # weight outside supp(sigma) above this means +inf
    ratapprox_tol: float = 1e-6  # admissible entropy discrepancy of the rational embedding

    # canonical solver
    gram_cond_max: float = 1e12
    solver_tol: float = 1e-9
    max_iter: int = 200
    feas_margin: float = 1e-9
    lambda_max: float = 700.0    # exponent magnitude beyond which exp() is declared overflowed
    tikh: float = 1e-12          # Tikhonov shift factor for near-singular correlation matrices
    km_degen: float = 1e-8       # |ln p_i - ln p_j| below this uses the degenerate kernel limit
    fd_step: float = 1e-5
    fd_tol: float = 1e-6
    identity_tol: float = 1e-9
    canon_tol: float = 1e-8

    # coarse-graining
    pyth_tol: float = 1e-8
    dep_tol: float = 1e-10       # relative residual below which an observable is dependent

    # selftest
    selftest_trials: int = 20

    def replace(self, **kwargs) -> "ToleranceConfig":
        return dataclasses.replace(self, **kwargs)


DEFAULT = ToleranceConfig()

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ToleranceConfig)}
_INT_FIELDS = {f.name for f in dataclasses.fields(ToleranceConfig) if f.type == "int"}


def _coerce(name: str, value) -> float | int:
    if name not in _FIELD_TYPES:
        raise ValidationError(f"unknown tolerance key {name!r}")
    try:
        return int(value) if name in _INT_FIELDS else float(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"tolerance {name!r} has non-numeric value {value!r}") from exc


def from_env(base: ToleranceConfig | None = None, environ=None) -> ToleranceConfig:
    """Apply ``QMEI_<NAME>`` environment overrides on top of ``base``."""
    env = os.environ if environ is None else environ
    cfg = base if base is not None else DEFAULT
    updates = {}
    for name in _FIELD_TYPES:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None:
            updates[name] = _coerce(name, raw)
    return cfg.replace(**updates) if updates else cfg


def resolve(
    file_config: dict | None = None,
    overrides: dict | None = None,
    base: ToleranceConfig | None = None,
    environ=None,
) -> ToleranceConfig:
    """Combine environment, problem-file, and explicit overrides."""
    cfg = from_env(base, environ)
    for source in (file_config, overrides):
        if source:
            cfg = cfg.replace(**{k: _coerce(k, v) for k, v in source.items()})
    return cfg
