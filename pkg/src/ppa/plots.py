"""Static figure rendering for the report-emitting CLI commands.

Each function writes one PNG next to the delimited report it accompanies.
Rendering is headless (Agg); nothing here is interactive.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def save_benchmark_figure(report, path) -> None:
    """Relative MSE vs retained dimensions, one panel per split."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharey=True)
    for ax, part in zip(axes, ("train", "test")):
        for method in report.methods:
            rows = [r for r in report.rows if r["method"] == method and r["split"] == part]
            qs = [r["q"] for r in rows]
            means = [r["rel_mse_mean"] for r in rows]
            stds = [r["rel_mse_std"] for r in rows]
            ax.errorbar(qs, means, yerr=stds, marker="o", capsize=3, label=method)
        ax.axhline(100.0, color="gray", lw=0.8, ls="--")
        ax.set_title(f"{report.dataset} ({part})")
        ax.set_xlabel("retained dimensions q")
    axes[0].set_ylabel("Rel. MSE vs PCA (%)")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_knn_figure(rows, path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    metrics = sorted({r["metric"] for r in rows})
    for metric in metrics:
        sub = sorted((r for r in rows if r["metric"] == metric), key=lambda r: r["k"])
        ax.errorbar(
            [r["k"] for r in sub],
            [r["accuracy_mean"] for r in sub],
            yerr=[r["accuracy_std"] for r in sub],
            marker="o",
            capsize=3,
            label=metric,
        )
    ax.set_xlabel("neighbors k")
    ax.set_ylabel("accuracy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_curvature_figure(alphas, curvatures, path) -> None:
    curvatures = np.asarray(curvatures)
    fig, ax = plt.subplots(figsize=(6, 3.8))
    for i in range(curvatures.shape[1]):
        ax.plot(alphas, curvatures[:, i], label=f"chi{i + 1}")
    ax.set_xlabel("first coordinate alpha")
    ax.set_ylabel("generalized curvature")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_curve_figure(points, path, background=None) -> None:
    """Scatter of the traced curve/grid over the first 2-3 dimensions."""
    points = np.asarray(points)
    d = points.shape[1]
    if d >= 3:
        fig = plt.figure(figsize=(5.5, 4.5))
        ax = fig.add_subplot(projection="3d")
        if background is not None:
            ax.scatter(*background[:3, :], s=3, alpha=0.2, color="steelblue")
        ax.scatter(points[:, 0], points[:, 1], points[:, 2], s=6, color="crimson")
        ax.set_xlabel("x1"), ax.set_ylabel("x2"), ax.set_zlabel("x3")
    else:
        fig, ax = plt.subplots(figsize=(5.5, 4.2))
        if background is not None:
            ax.scatter(background[0], background[1], s=3, alpha=0.2, color="steelblue")
        ax.scatter(points[:, 0], points[:, 1], s=6, color="crimson")
        ax.set_xlabel("x1"), ax.set_ylabel("x2")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_mi_figure(entries, path) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    names = [e["method"] for e in entries]
    vals = [e["delta_i_bits_per_dim"] for e in entries]
    ax.bar(names, vals, color=["crimson", "steelblue", "gray"][: len(names)])
    ax.set_ylabel("multi-information reduction (bits/dim)")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
