"""Command-line front-end.

Subcommands: entropy, relent, reconstruct, coarse-grain, contract,
concentrate, stein, selftest.  Problem files are JSON (schema
``qmei-problem/1``); structured results are JSON, Monte Carlo tables can
be emitted as CSV, and ``--figures DIR`` additionally renders plots for
the tabular commands.

Exit codes: 0 success, 1 parse/validation failure, 2 infeasibility,
3 non-convergence.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .asymptotics import (
    classical_neyman_pearson,
    concentration_simulation,
    stein_rate_trace,
)
from .canonical import ConstraintData, level_of_description, solve_minrent
from .coarsegrain import (
    CanonicalProjection,
    Decorrelator,
    contract_level,
    pinching,
    pythagorean_residual,
    apply_grain,
)
from .config import ToleranceConfig, resolve
from .entropy import (
    classical_entropy,
    classical_relative_entropy,
    distribution,
    meta_probability,
    quantum_relative_entropy,
    relative_entropy_via_extension,
    von_neumann_entropy,
)
from .errors import ToolkitError, ValidationError
from .operators import hermitian, support_projector, support_weight_outside
from .problem import Problem, load_problem, parse_matrix, parse_vector, serialize_matrix
from .properties import run_selftest
from .report import Report, build_report, report_to_csv, report_to_json

DEFAULT_SEED = 0

TABULAR_COMMANDS = {"concentrate", "stein"}


def _state_summary(name: str, state, cfg: ToleranceConfig) -> dict:
    proj = support_projector(state, cfg)
    return {
        "name": name,
        "dim": state.dim,
        "trace": state.iota,
        "support_dim": int(round(float(np.trace(proj.matrix).real))),
        "von_neumann_entropy": von_neumann_entropy(state, cfg),
    }


def cmd_entropy(problem: Problem, cfg: ToleranceConfig, options) -> Report:
    """Entropies of every supplied state and distribution, plus relative
    entropies of the (rho, sigma) and (q, p) pairs when both are present."""
    result: dict = {"states": [], "pairs": {}}
    names = sorted((problem.raw.get("states") or {}).keys())
    if not names and not problem.raw.get("distributions"):
        raise ValidationError("entropy command needs a states or distributions block")
    for name in names:
        state = problem.state(name)
        result["states"].append(_state_summary(name, state, cfg))
    if "rho" in names and "sigma" in names:
        rho, sigma = problem.state("rho"), problem.state("sigma")
        outside = support_weight_outside(rho, sigma, cfg)
        result["pairs"]["quantum_relative_entropy"] = quantum_relative_entropy(rho, sigma, cfg)
        result["pairs"]["meta_probability"] = meta_probability(rho, sigma, cfg)
        result["pairs"]["weight_outside_support"] = outside
    q_vec = problem.distribution_vector("q", required=False)
    p_vec = problem.distribution_vector("p", required=False)
    if q_vec is not None:
        q = distribution(q_vec, cfg, "distributions.q")
        result.setdefault("distributions", []).append(
            {"name": "q", "total": q.total, "entropy": classical_entropy(q)}
        )
        if p_vec is not None:
            p = distribution(p_vec, cfg, "distributions.p")
            result["distributions"].append(
                {"name": "p", "total": p.total, "entropy": classical_entropy(p)}
            )
            result["pairs"]["classical_relative_entropy"] = classical_relative_entropy(q, p, cfg)
    return build_report("entropy", cfg, _inputs(problem, options), result)


def cmd_relent(problem: Problem, cfg: ToleranceConfig, options) -> Report:
    """Relative entropy of the pair (rho, sigma), with the optional
    Hilbert-space-extension cross-check."""
    rho, sigma = problem.state("rho"), problem.state("sigma")
    direct = quantum_relative_entropy(rho, sigma, cfg)
    result = {
        "quantum_relative_entropy": direct,
        "reverse": quantum_relative_entropy(sigma, rho, cfg),
        "meta_probability": meta_probability(rho, sigma, cfg),
        "weight_outside_support": support_weight_outside(rho, sigma, cfg),
    }
    check = problem.raw.get("extension_check")
    if check is not None:
        if not isinstance(check, dict):
            raise ValidationError("extension_check must be an object")
        d_max = check.get("d_max", 10**4)
        if not isinstance(d_max, int) or isinstance(d_max, bool) or d_max < 1:
            raise ValidationError("extension_check.d_max must be a positive integer")
        via = relative_entropy_via_extension(rho, sigma, d_max, cfg)
        result["extension_value"] = via
        result["extension_discrepancy"] = abs(via - direct) if math.isfinite(direct) else math.inf
        result["extension_d_max"] = d_max
    return build_report("relent", cfg, _inputs(problem, options), result)


def cmd_reconstruct(problem: Problem, cfg: ToleranceConfig, options) -> Report:
    """Solve the minimum-relative-entropy state for the given level and
    targets; emits lambda, Z, mu, residuals."""
    sigma = problem.state("sigma")
    observables = problem.observables(required=False)
    level = level_of_description(observables, sigma.dim, cfg)
    iota, g = problem.targets()
    if g.size != level.m:
        raise ValidationError(f"targets.g has {g.size} entries for {level.m} observables")
    state = solve_minrent(sigma, level, ConstraintData(iota, g), cfg)
    result = {
        "lambda": state.lam,
        "Z": state.Z,
        "log_Z": state.log_Z,
        "mu": serialize_matrix(state.mu.matrix),
        "realized_g": state.g,
        "iota": state.iota,
        "relative_entropy_to_reference": quantum_relative_entropy(state.mu, sigma, cfg),
        "entropy": von_neumann_entropy(state.mu, cfg),
    }
    diagnostics = {
        "residual": state.residual,
        "iterations": state.iterations,
        "warnings": list(state.warnings),
    }
    return build_report("reconstruct", cfg, _inputs(problem, options), result, diagnostics)


def _parse_grain(problem: Problem, cfg: ToleranceConfig):
    node = problem.section("grain")
    kind = node.get("kind")
    if kind == "pinch":
        raw_projs = node.get("projectors")
        if not isinstance(raw_projs, list) or not raw_projs:
            raise ValidationError("pinch grain needs a non-empty grain.projectors list")
        mats = [
            parse_matrix(m, f"grain.projectors[{k}]") for k, m in enumerate(raw_projs)
        ]
        return pinching(mats, cfg)
    if kind == "decorrelate":
        dims = node.get("dims")
        if (
            not isinstance(dims, list)
            or len(dims) != 2
            or not all(isinstance(d, int) and not isinstance(d, bool) for d in dims)
        ):
            raise ValidationError("decorrelate grain needs dims: [d_A, d_B]")
        return Decorrelator((dims[0], dims[1]))
    if kind == "canonical":
        reference = problem.state("sigma")
        level = level_of_description(problem.observables(), reference.dim, cfg)
        return CanonicalProjection(reference, level)
    raise ValidationError(f"unknown grain kind {kind!r}; use pinch, decorrelate or canonical")


def cmd_coarse_grain(problem: Problem, cfg: ToleranceConfig, options) -> Report:
    """Apply a grain to rho; reports the coarse state and, when sigma is
    supplied, the decomposition residual."""
    rho = problem.state("rho")
    grain = _parse_grain(problem, cfg)
    coarse = apply_grain(grain, rho, cfg)
    result = {
        "grain": problem.section("grain").get("kind"),
        "coarse_state": serialize_matrix(coarse.matrix),
        "trace": coarse.iota,
        "entropy_before": von_neumann_entropy(rho, cfg),
        "entropy_after": von_neumann_entropy(coarse, cfg),
    }
    sigma = problem.state("sigma", required=False)
    if sigma is not None:
        result["pythagorean_residual"] = pythagorean_residual(rho, sigma, grain, cfg)
    return build_report("coarse-grain", cfg, _inputs(problem, options), result)


def cmd_contract(problem: Problem, cfg: ToleranceConfig, options) -> Report:
    """Level-contraction verdict for a base level plus extension."""
    sigma = problem.state("sigma")
    level = level_of_description(problem.observables(), sigma.dim, cfg)
    iota, g = problem.targets()
    ext = problem.section("extension")
    raw_obs = ext.get("observables")
    if not isinstance(raw_obs, list) or not raw_obs:
        raise ValidationError("extension.observables must be a non-empty list")
    ext_obs = [
        hermitian(parse_matrix(m, f"extension.observables[{k}]"), cfg)
        for k, m in enumerate(raw_obs)
    ]
    f = parse_vector(ext.get("f", []), "extension.f")
    delta_f = parse_vector(ext.get("delta_f", []), "extension.delta_f")
    trials = ext.get("trials")
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise ValidationError("extension.trials must be a positive integer")
    verdict = contract_level(
        sigma, level, ext_obs, ConstraintData(iota, g), f, trials, delta_f, cfg
    )
    result = {
        "entropy_differential": verdict.entropy_differential,
        "fluctuation_threshold": verdict.fluctuation_threshold,
        "accuracy_threshold": verdict.accuracy_threshold,
        "accepted": verdict.accepted,
        "dependent_extensions": list(verdict.dependent_extensions),
    }
    return build_report("contract", cfg, _inputs(problem, options), result)


def cmd_concentrate(problem: Problem, cfg: ToleranceConfig, options) -> Report:
    """Monte Carlo / exact check of frequency-entropy concentration."""
    block = problem.section("concentration")
    p = distribution(parse_vector(block.get("p", []), "concentration.p"), cfg, "concentration.p")
    n_trials = block.get("trials")
    samples = block.get("samples", 10**4)
    thresholds = parse_vector(block.get("thresholds", []), "concentration.thresholds")
    if not isinstance(n_trials, int) or isinstance(n_trials, bool) or n_trials < 1:
        raise ValidationError("concentration.trials must be a positive integer")
    if not isinstance(samples, int) or isinstance(samples, bool):
        raise ValidationError("concentration.samples must be an integer")
    seed = options.seed if options.seed is not None else (problem.seed or DEFAULT_SEED)
    report = concentration_simulation(
        p, n_trials, samples, thresholds.tolist(), seed, cfg, workers=options.workers
    )
    rows = [
        [t, report.tail_prob[t], report.predicted_tail[t]]
        for t in sorted(report.tail_prob)
    ]
    result = {
        "d": report.d,
        "trials_per_sample": report.n_trials,
        "samples": report.samples,
        "method": report.method,
        "mean_rel_entropy": report.mean_rel_entropy,
        "predicted_mean": report.predicted_mean,
        "seed": report.seed,
    }
    diagnostics = {"warnings": list(report.warnings)}
    table = (["threshold", "empirical_tail", "predicted_tail"], rows)
    rep = build_report("concentrate", cfg, _inputs(problem, options), result, diagnostics, table)
    if options.figures:
        from .figures import save_concentration_figures

        rep.diagnostics["figures"] = save_concentration_figures(options.figures, report)
    return rep


def cmd_stein(problem: Problem, cfg: ToleranceConfig, options) -> Report:
    """Optimal discrimination error trace for rho vs sigma tensor powers."""
    rho, sigma = problem.state("rho"), problem.state("sigma")
    block = problem.section("stein")
    n_max = block.get("n_max")
    epsilon = block.get("epsilon")
    if not isinstance(n_max, int) or isinstance(n_max, bool) or n_max < 1:
        raise ValidationError("stein.n_max must be a positive integer")
    if not isinstance(epsilon, (int, float)) or isinstance(epsilon, bool):
        raise ValidationError("stein.epsilon must be a number")
    points = stein_rate_trace(rho, sigma, n_max, float(epsilon), cfg)
    target = quantum_relative_entropy(rho, sigma, cfg)
    rows = [[p.n_copies, p.beta, p.rate, target] for p in points]
    result = {
        "epsilon": float(epsilon),
        "relative_entropy": target,
        "final_gap": abs(points[-1].rate - target) if math.isfinite(target) else math.inf,
    }
    table = (["N", "beta", "rate", "relative_entropy"], rows)
    rep = build_report("stein", cfg, _inputs(problem, options), result, {}, table)
    if options.figures:
        from .figures import save_stein_figures

        rep.diagnostics["figures"] = save_stein_figures(options.figures, points, target)
    return rep


def cmd_selftest(problem: Problem, cfg: ToleranceConfig, options) -> Report:
    """Run the seeded invariant suite and report pass/fail per property."""
    seed = options.seed if options.seed is not None else (problem.seed or DEFAULT_SEED)
    block = problem.raw.get("selftest") or {}
    trials = block.get("trials", cfg.selftest_trials)
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise ValidationError("selftest.trials must be a positive integer")
    results = run_selftest(seed, cfg, trials)
    result = {
        "seed": seed,
        "trials": trials,
        "all_passed": all(r.passed for r in results),
        "properties": [
            {
                "name": r.name,
                "passed": r.passed,
                "tolerance": r.tolerance,
                "max_violation": r.max_violation,
                "note": r.note,
            }
            for r in results
        ],
    }
    return build_report("selftest", cfg, _inputs(problem, options), result)


def _inputs(problem: Problem, options) -> dict:
    return {
        "input": problem.path,
        "seed": options.seed if options.seed is not None else problem.seed,
        "format": options.format,
    }


COMMANDS = {
    "entropy": cmd_entropy,
    "relent": cmd_relent,
    "reconstruct": cmd_reconstruct,
    "coarse-grain": cmd_coarse_grain,
    "contract": cmd_contract,
    "concentrate": cmd_concentrate,
    "stein": cmd_stein,
    "selftest": cmd_selftest,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are validation failures (exit 1)
        raise ValidationError(message)


def _parse_tol_overrides(pairs: list[str]) -> dict:
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValidationError(f"--tol-override expects KEY=VAL, got {pair!r}")
        key, _, value = pair.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmei", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qmei {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--input", default=None, help="problem file (JSON)")
        p.add_argument("--output", default=None, help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=None, help="overrides file seed and QMEI_SEED")
        p.add_argument("--max-dim", type=int, default=None, help="dense dimension budget")
        p.add_argument(
            "--tol-override",
            action="append",
            default=[],
            metavar="KEY=VAL",
            help="override a named tolerance (repeatable)",
        )
        if name in TABULAR_COMMANDS:
            p.add_argument(
                "--figures",
                default=None,
                metavar="DIR",
                help="render matplotlib figures into DIR alongside the table",
            )
    return parser


def _resolve_options(args) -> None:
    if args.seed is None:
        env_seed = os.environ.get("QMEI_SEED")
        if env_seed is not None:
            try:
                args.seed = int(env_seed)
            except ValueError as exc:
                raise ValidationError(f"QMEI_SEED is not an integer: {env_seed!r}") from exc
    args.workers = 1
    env_workers = os.environ.get("QMEI_WORKERS")
    if env_workers is not None:
        try:
            args.workers = max(1, int(env_workers))
        except ValueError as exc:
            raise ValidationError(f"QMEI_WORKERS is not an integer: {env_workers!r}") from exc
    if not hasattr(args, "figures"):
        args.figures = None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _resolve_options(args)
        overrides = _parse_tol_overrides(args.tol_override)
        if args.max_dim is not None:
            overrides["max_dim"] = args.max_dim
        problem = load_problem(args.input, overrides)
        cfg = problem.config
        if args.format == "csv" and args.command not in TABULAR_COMMANDS:
            raise ValidationError(
                f"--format csv applies to {sorted(TABULAR_COMMANDS)} only"
            )
        report = COMMANDS[args.command](problem, cfg, args)
        text = report_to_csv(report) if args.format == "csv" else report_to_json(report)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except ToolkitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
