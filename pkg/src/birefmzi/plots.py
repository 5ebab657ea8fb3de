"""Matplotlib rendering of the delimited outputs (report path)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_fringe(
    temperatures: np.ndarray,
    series: dict[str, np.ndarray],
    path: str,
    title: str = "Beating fringe versus temperature",
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, values in series.items():
        ax.plot(temperatures, values, label=label, lw=1.2)
    ax.set_xlabel("crystal temperature (K)")
    ax.set_ylabel("rate / counts")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_hom(
    tau_ps: np.ndarray,
    series: dict[str, np.ndarray],
    path: str,
    title: str = "HOM coincidence versus delay",
) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in series.items():
        ax.plot(tau_ps, values, label=label, lw=1.2)
    ax.axhline(0.5, color="gray", ls=":", lw=0.8)
    ax.set_xlabel("relative delay (ps)")
    ax.set_ylabel("coincidence probability")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_imbalance(
    dL_mm: np.ndarray,
    vis_single: np.ndarray,
    vis_two: np.ndarray,
    path: str,
    title: str = "Fringe visibility versus path imbalance",
) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(dL_mm, vis_single, "o-", label="single photon")
    ax.plot(dL_mm, vis_two, "s-", label="two photon")
    ax.set_xlabel("path imbalance (mm)")
    ax.set_ylabel("visibility")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fit(
    temperatures: np.ndarray,
    counts: np.ndarray,
    model_curve: np.ndarray,
    path: str,
    title: str = "Fringe fit",
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(temperatures, counts, ".", ms=3, label="data")
    ax.plot(temperatures, model_curve, "-", lw=1.2, label="fit")
    ax.set_xlabel("crystal temperature (K)")
    ax.set_ylabel("counts")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
