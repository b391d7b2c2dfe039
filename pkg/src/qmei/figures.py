"""Optional matplotlib rendering for the tabular report commands.

Figures are written next to the delimited output when the CLI is invoked
with ``--figures DIR``; the library emits tables either way.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .asymptotics import ConcentrationReport, SteinPoint


def concentration_figure(report: ConcentrationReport):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    thresholds = sorted(report.tail_prob)
    empirical = [report.tail_prob[t] for t in thresholds]
    predicted = [report.predicted_tail[t] for t in thresholds]
    ax.semilogy(thresholds, predicted, "-", color="tab:blue", label="predicted tail")
    ax.semilogy(thresholds, empirical, "o", color="tab:red", label="empirical tail")
    ax.set_xlabel("relative-entropy threshold")
    ax.set_ylabel("P[S(f||p) > threshold]")
    ax.set_title(
        f"Frequency concentration: d={report.d}, N={report.n_trials}, "
        f"{report.samples} samples ({report.method})"
    )
    ax.axvline(report.mean_rel_entropy, color="gray", ls="--", lw=0.8, label="sample mean")
    ax.legend()
    fig.tight_layout()
    return fig


def stein_figures(points: list[SteinPoint], target: float):
    ns = [p.n_copies for p in points]
    fig_rate, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ns, [p.rate for p in points], "o-", color="tab:red", label="-ln(beta)/N")
    if target == target and target != float("inf"):  # finite
        ax.axhline(target, color="tab:blue", ls="--", label="relative entropy")
    ax.set_xlabel("copies N")
    ax.set_ylabel("error exponent")
    ax.set_title(f"Optimal discrimination rate (epsilon={points[0].epsilon})")
    ax.legend()
    fig_rate.tight_layout()

    fig_beta, ax2 = plt.subplots(figsize=(6.0, 4.0))
    ax2.semilogy(ns, [p.beta for p in points], "s-", color="tab:green")
    ax2.set_xlabel("copies N")
    ax2.set_ylabel("optimal type-II error beta")
    ax2.set_title("Type-II error decay")
    fig_beta.tight_layout()
    return fig_rate, fig_beta


def save_concentration_figures(directory: str, report: ConcentrationReport) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "concentrate_tails.png")
    fig = concentration_figure(report)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def save_stein_figures(directory: str, points: list[SteinPoint], target: float) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    fig_rate, fig_beta = stein_figures(points, target)
    paths = []
    for name, fig in (("stein_rate.png", fig_rate), ("stein_beta.png", fig_beta)):
        path = os.path.join(directory, name)
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths
