"""Render the four figure kinds from producer CSVs.

heatmap: indicator over (delta, g) with the boundary-curve overlays drawn
in the producer's conventions (topological line white, the two
bound-state-count curves blue and green, all dashed). bse_lines:
bound-state energies against delta, colored by residue magnitude.
timeseries: ergotropy against time, one line per input file. power_curve:
maximum charging power against dissipation with the Zeno crossover marked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import load_validated

OVERLAY_STYLES = {
    "l0": {"color": "white", "linestyle": "--", "linewidth": 1.6},
    "l1": {"color": "tab:blue", "linestyle": "--", "linewidth": 1.6},
    "l2": {"color": "tab:green", "linestyle": "--", "linewidth": 1.6},
    "w0": {"color": "white", "linestyle": "--", "linewidth": 1.6},
}

KINDS = ("heatmap", "bse_lines", "timeseries", "power_curve")


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str
    overlay: str | None = None
    title: str = ""
    value_label: str = "indicator"
    color_max: float = 1.0  # heatmap scale tops out at omega_e

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        if self.kind != "timeseries" and len(self.inputs) != 1:
            raise ValueError(f"{self.kind} takes exactly one input CSV")


def _render_heatmap(spec: PlotSpec, ax) -> None:
    frame = load_validated(spec.inputs[0], "heatmap")
    table = frame.pivot(index="g", columns="delta", values="value")
    deltas = table.columns.to_numpy(dtype=float)
    gs = table.index.to_numpy(dtype=float)
    mesh = ax.pcolormesh(deltas, gs, table.to_numpy(dtype=float),
                         shading="nearest", vmin=0.0, vmax=spec.color_max,
                         cmap="viridis")
    plt.colorbar(mesh, ax=ax, label=spec.value_label)
    if spec.overlay:
        curves = load_validated(spec.overlay, "overlay")
        for name, group in curves.groupby("curve"):
            style = OVERLAY_STYLES.get(str(name), {"linestyle": "--"})
            pts = group.sort_values("delta") if group["delta"].nunique() > 1 \
                else group.sort_values("g")
            sel = (pts["g"] >= gs.min()) & (pts["g"] <= gs.max())
            ax.plot(pts["delta"][sel], pts["g"][sel], label=str(name), **style)
        ax.legend(loc="upper right", framealpha=0.4)
    ax.set_xlim(deltas.min(), deltas.max())
    ax.set_ylim(gs.min(), gs.max())
    ax.set_xlabel(r"dimerization $\delta$")
    ax.set_ylabel(r"coupling $g/J$")


def _render_bse_lines(spec: PlotSpec, ax) -> None:
    frame = load_validated(spec.inputs[0], "bse_lines")
    sc = ax.scatter(frame["delta"], frame["energy_re"], c=frame["res_abs"],
                    s=6, cmap="plasma", vmin=0.0)
    plt.colorbar(sc, ax=ax, label=r"$|\mathrm{Res}|$")
    ax.set_xlabel(r"dimerization $\delta$")
    ax.set_ylabel(r"bound-state energy $/J$")


def _render_timeseries(spec: PlotSpec, ax) -> None:
    for path in spec.inputs:
        frame = load_validated(path, "timeseries")
        ax.plot(frame["t"], frame["ergotropy"], label=Path(path).stem)
    ax.set_xlabel(r"time $tJ$")
    ax.set_ylabel(r"ergotropy $/\omega_e$")
    ax.legend()


def _render_power_curve(spec: PlotSpec, ax) -> None:
    frame = load_validated(spec.inputs[0], "power_curve")
    frame = frame.sort_values("kappa")
    ax.plot(frame["kappa"], frame["max_power"], marker="o")
    kqze = float(frame["kappa_qze"].iloc[0])
    if frame["kappa"].min() <= kqze <= frame["kappa"].max():
        ax.axvline(kqze, color="gray", linestyle=":",
                   label=r"$\kappa_\mathrm{QZE}$")
        ax.legend()
    ax.set_xlabel(r"dissipation $\kappa/J$")
    ax.set_ylabel(r"$\max_t P(t)$")


_RENDERERS = {
    "heatmap": _render_heatmap,
    "bse_lines": _render_bse_lines,
    "timeseries": _render_timeseries,
    "power_curve": _render_power_curve,
}


def render(spec: PlotSpec) -> str:
    """Write the figure for a validated spec; returns the output path.

    Inputs are schema-checked first; on mismatch nothing is written.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=150)
    try:
        _RENDERERS[spec.kind](spec, ax)
        if spec.title:
            ax.set_title(spec.title)
        fig.tight_layout()
        fig.savefig(spec.output)
    finally:
        plt.close(fig)
    return spec.output
