"""Matplotlib renderings of regime maps and single-run traces."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap
from matplotlib.patches import Patch

from .atlas import CODE_NAMES, RegimeMap

_RGB = {
    "OFS": (0, 0, 139),
    "SO": (135, 206, 250),
    "UO": (255, 255, 0),
    "U": (255, 0, 0),
    "Invalid": (128, 128, 128),
}


def _edges(axis: np.ndarray) -> np.ndarray:
    mids = 0.5 * (axis[1:] + axis[:-1])
    first = axis[0] - (mids[0] - axis[0])
    last = axis[-1] + (axis[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def render_regime_map(regime_map: RegimeMap, path: Path) -> None:
    """Colored cell grid with the analytic condition curves overlaid."""
    cfg = regime_map.config
    cmap = ListedColormap([tuple(c / 255 for c in _RGB[name])
                           for name in CODE_NAMES])
    fig, ax = plt.subplots(figsize=(7.2, 5.6))
    ax.pcolormesh(_edges(regime_map.dx_axis), _edges(regime_map.dt_axis),
                  regime_map.codes.T, cmap=cmap, vmin=-0.5,
                  vmax=len(CODE_NAMES) - 0.5, shading="flat")
    styles = {"vn-stability": ("#ffffff", "-"),
              "positive-eigenvalue": ("#111111", "--"),
              "dominance": ("#444444", ":")}
    for curve in regime_map.curves:
        if curve.unconditional:
            continue
        color, dash = styles.get(curve.kind, ("#666666", "-"))
        dx = curve.samples[:, 0]
        bound = curve.samples[:, 1]
        keep = np.isfinite(bound) & (bound > 0)
        ax.plot(dx[keep], np.clip(bound[keep], *cfg.dt_range), dash,
                color=color, linewidth=1.6, label=curve.kind)
    if cfg.log_axes:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlim(*cfg.dx_range)
    ax.set_ylim(*cfg.dt_range)
    ax.set_xlabel("dx (space step)")
    ax.set_ylabel("dt (time step)")
    ax.set_title(f"{cfg.equation} / {cfg.scheme} / {cfg.bc}")
    present = regime_map.code_counts()
    patches = [Patch(facecolor=tuple(c / 255 for c in _RGB[name]), label=name)
               for name in CODE_NAMES if name in present]
    line_handles, _ = ax.get_legend_handles_labels()
    ax.legend(handles=patches + line_handles, loc="upper right", fontsize=8,
              framealpha=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_solution(trace: list[tuple[int, float, float]],
                    snapshots: list[tuple[float, np.ndarray, np.ndarray]],
                    title: str, path: Path) -> None:
    """Two panels: solution profiles at a few times, and the norm history."""
    fig, (ax_prof, ax_norm) = plt.subplots(1, 2, figsize=(10.0, 4.2))
    for t, xs, values in snapshots:
        ax_prof.plot(xs, values, label=f"t={t:g}")
    ax_prof.set_xlabel("x")
    ax_prof.set_ylabel("u")
    ax_prof.set_title(title)
    if snapshots:
        ax_prof.legend(fontsize=8)
    steps = [rec[1] for rec in trace]
    norms = [rec[2] for rec in trace]
    ax_norm.plot(steps, norms, color="#2c3e50")
    ax_norm.set_xlabel("t")
    ax_norm.set_ylabel("max |u|")
    ax_norm.set_yscale("log")
    ax_norm.set_title("infinity-norm history")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
