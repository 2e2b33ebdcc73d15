"""Figure rendering for the experiment reports.

Each report CSV gets a companion PNG: the ratio study mirrors the
four-panel layout (three prediction ratios plus log10 average relative
residual against the stop iteration), the crossover study shows the
active-set iteration counts and the error magnitudes per instance, and a
single solve gets its gap/residual history.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_PER_STYLE = dict(color="tab:red", marker="o", label="perturbed")
_UNP_STYLE = dict(color="tab:blue", marker="s", label="unperturbed")


def ratio_figure(rows, path) -> None:
    rows = [r for r in rows if r.get("n_ok")]
    stops = [r["stop_iteration"] for r in rows]
    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    panels = (
        ("falsePer", "falseUnp", "false-prediction ratio"),
        ("missPer", "missUnp", "missed-prediction ratio"),
        ("corrPer", "corrUnp", "correction ratio"),
        ("log10ResPer", "log10ResUnp", "log10 avg relative residual"),
    )
    for ax, (per_key, unp_key, title) in zip(axes.flat, panels):
        ax.plot(stops, [r[per_key] for r in rows], **_PER_STYLE)
        ax.plot(stops, [r[unp_key] for r in rows], **_UNP_STYLE)
        ax.set_title(title, fontsize=10)
        ax.set_xlabel("interior point iterations")
        ax.grid(True, alpha=0.3)
    axes.flat[0].legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def crossover_figure(rows, path) -> None:
    idx = np.arange(len(rows))
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))

    width = 0.4
    axes[0].bar(idx - width / 2, [r["actvItr_Per"] for r in rows], width,
                color="tab:red", label="perturbed")
    axes[0].bar(idx + width / 2, [r["actvItr_Unp"] for r in rows], width,
                color="tab:blue", label="unperturbed")
    axes[0].set_title("active-set iterations on the sub-problems", fontsize=10)
    axes[0].set_xlabel("instance")
    axes[0].legend(fontsize=9)

    floor = 1e-17
    axes[1].semilogy(idx, np.maximum([r["relObjErr_Per"] for r in rows], floor),
                     "o", color="tab:red", label="objective err (per)")
    axes[1].semilogy(idx, np.maximum([r["relObjErr_Unp"] for r in rows], floor),
                     "s", color="tab:blue", label="objective err (unp)")
    axes[1].semilogy(idx, np.maximum([r["feaErr_Per"] for r in rows], floor),
                     "x", color="tab:orange", label="feasibility err (per)")
    axes[1].semilogy(idx, np.maximum([r["feaErr_Unp"] for r in rows], floor),
                     "+", color="tab:green", label="feasibility err (unp)")
    axes[1].set_title("crossover errors", fontsize=10)
    axes[1].set_xlabel("instance")
    axes[1].legend(fontsize=8)
    axes[1].grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def solve_figure(trace, path) -> None:
    ks = np.arange(1, len(trace) + 1)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.semilogy(ks, [t.mu_lambda for t in trace], "-o", color="tab:red",
                label="perturbed gap")
    ax.semilogy(ks, [max(t.residual, 1e-300) for t in trace], "-s",
                color="tab:blue", label="relative residual")
    ax.semilogy(ks, [max(t.lambda_inf, 1e-300) for t in trace], "--",
                color="tab:gray", label="perturbation (inf norm)")
    ax.set_xlabel("iteration")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
