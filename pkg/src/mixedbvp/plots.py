"""Matplotlib figure helpers for the command-line report path.

Figures are rendered to files next to the delimited output; pyplot is
imported lazily so library users never pay for a backend.
"""

from __future__ import annotations

from .numerics import GridFunction

__all__ = ["solution_figure", "sweep_figure", "kernel_sign_figure", "save_figure"]


def solution_figure(gf: GridFunction, title: str = ""):
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    t = gf.grid.nodes
    ax.plot(t, gf.u, lw=1.8, label="u")
    ax.plot(t, gf.du, lw=1.2, ls="--", label="u'")
    ax.axhline(0.0, color="0.6", lw=0.6)
    ax.set_xlabel("t")
    ax.grid(alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def sweep_figure(params, norms, converged, xlabel: str, target: float | None = None,
                 title: str = ""):
    import matplotlib.pyplot as plt
    import numpy as np

    params = np.asarray(params, dtype=float)
    norms = np.asarray(norms, dtype=float)
    ok = np.asarray(converged, dtype=bool)
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(params[ok], norms[ok], "o-", lw=1.4, label="converged")
    if np.any(~ok):
        ax.plot(params[~ok], norms[~ok], "x", color="crimson", label="failed")
    if target is not None:
        ax.axhline(target, color="0.3", ls=":", lw=1.2, label=f"target {target:g}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("sup norm")
    ax.grid(alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def kernel_sign_figure(a_values, h_values, halfwidth: float, title: str = ""):
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(a_values, h_values, lw=1.6)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.axvline(-halfwidth, color="0.4", ls=":", lw=1.0)
    ax.axvline(halfwidth, color="0.4", ls=":", lw=1.0)
    ax.set_xlabel("kernel coordinate a")
    ax.set_ylabel("h(a)")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def save_figure(fig, path) -> None:
    import matplotlib.pyplot as plt

    fig.savefig(path, dpi=140)
    plt.close(fig)
