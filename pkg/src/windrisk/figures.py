"""Headless figure rendering for reports.

Every function draws to a file and returns the path; nothing opens a window,
so these are safe in CI and over SSH.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import InputError
from .fuzzy import Variables, membership
from .rules import DecisionMap


def plot_memberships(variables: Variables, path) -> str:
    """One panel per linguistic variable, one curve per set."""
    fig, axes = plt.subplots(3, 1, figsize=(7, 8))
    for ax, var in zip(axes, (variables.mean, variables.std, variables.risk)):
        xs = np.linspace(var.lo, var.hi, 501)
        for s in var.sets:
            ax.plot(xs, [membership(s, x) for x in xs], label=s.label)
        ax.set_title(var.name)
        ax.set_ylabel("membership")
        ax.set_ylim(-0.05, 1.05)
        ax.legend(loc="center right", fontsize=8)
    axes[-1].set_xlabel("value")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def plot_decision_map(dmap: DecisionMap, path) -> str:
    """Top-down risk surface with the interpolated zone outlined."""
    fig, ax = plt.subplots(figsize=(7, 6))
    im = ax.imshow(
        dmap.values.T,
        origin="lower",
        extent=(dmap.mean_lo, dmap.mean_hi, dmap.std_lo, dmap.std_hi),
        aspect="auto",
        cmap="RdYlGn_r",
        vmin=0.0,
        vmax=100.0,
    )
    if not dmap.covered.all():
        ax.contour(
            dmap.mean_axis(),
            dmap.std_axis(),
            dmap.covered.T.astype(float),
            levels=[0.5],
            colors="black",
            linewidths=1.2,
            linestyles="dashed",
        )
    fig.colorbar(im, ax=ax, label="risk [%]")
    ax.set_xlabel("margin mean")
    ax.set_ylabel("margin std")
    ax.set_title("decision map (dashed: interpolated zone)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def plot_risk_trace(records: Sequence, path) -> str:
    """Margin statistics on top, instantaneous and accumulated risk below."""
    if not records:
        raise InputError("no records to plot")
    t = [r.t for r in records]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    ax1.plot(t, [r.margin_mean for r in records], label="margin mean")
    ax1.plot(t, [r.margin_std for r in records], label="margin std")
    ax1.set_ylabel("margin")
    ax1.legend(loc="upper right", fontsize=8)
    ax2.plot(t, [r.risk_inst for r in records], label="risk_inst", alpha=0.7)
    ax2.plot(t, [r.risk_acc for r in records], label="risk_acc", linewidth=2)
    ax2.axhline(75.0, color="red", linestyle=":", linewidth=1)
    ax2.axhline(25.0, color="green", linestyle=":", linewidth=1)
    ax2.set_ylabel("risk [%]")
    ax2.set_xlabel("t [s]")
    ax2.set_ylim(-2, 102)
    ax2.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
