"""The seven figure recipes.

Each recipe names its artifact file, a loader that validates it, and a
plotter working purely from the loaded payload.  Rendering never writes
anything except the requested output file.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Callable, Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .schema import read_table, read_tpdm  # noqa: E402

QBER_THRESHOLD = 0.11


def _figure(style: Mapping):
    fig, ax = plt.subplots(figsize=(4.8, 3.4), layout="constrained")
    if style.get("title"):
        ax.set_title(style["title"])
    return fig, ax


def _by_temperature(rows):
    groups = {}
    for row in rows:
        groups.setdefault(row["temperature_K"], []).append(row)
    return dict(sorted(groups.items()))


def load_rates(path):
    rows = read_table(path, ("delta_meV", "gamma_plus", "gamma_minus",
                             "temperature_K"))
    return {"groups": _by_temperature(rows)}


def plot_rates(payload, style):
    fig, ax = _figure(style)
    peak = 0.0
    for temp, rows in payload["groups"].items():
        delta = [r["delta_meV"] for r in rows]
        up = [r["gamma_plus"] for r in rows]
        down = [r["gamma_minus"] for r in rows]
        ax.plot(delta, up, label=f"absorption, {temp:g} K")
        ax.plot(delta, down, "--", label=f"emission, {temp:g} K")
        peak = max(peak, *up, *down)
    if peak > 0.0:  # all-zero tables (phonons disabled) stay linear
        ax.set_yscale("log")
    ax.set_xlabel("detuning (meV)")
    ax.set_ylabel("phonon-assisted rate (meV)")
    ax.legend(fontsize=8)
    return fig


def load_tp_rates(path):
    rows = read_table(path, ("delta_meV", "gamma_tp", "temperature_K"))
    return {"groups": _by_temperature(rows)}


def plot_tp_rates(payload, style):
    fig, ax = _figure(style)
    for temp, rows in payload["groups"].items():
        ax.plot([r["delta_meV"] for r in rows],
                [r["gamma_tp"] for r in rows], label=f"{temp:g} K")
    ax.axhline(0.0, color="grey", lw=0.8)
    ax.set_xlabel("detuning (meV)")
    ax.set_ylabel("two-photon phonon rate (meV)")
    ax.legend(fontsize=8)
    return fig


def load_concurrence_g(path):
    return {"rows": read_table(path, ("axis_value", "concurrence"))}


def plot_concurrence_g(payload, style):
    fig, ax = _figure(style)
    rows = payload["rows"]
    ax.plot([r["axis_value"] for r in rows],
            [r["concurrence"] for r in rows], "o-")
    ax.set_xlabel("coupling g (ueV)")
    ax.set_ylabel("concurrence")
    ax.set_ylim(0.0, 1.02)
    return fig


def load_tpdm_bars(path):
    blob = read_tpdm(path)
    mags = [[abs(complex(blob["real"][i][j], blob["imag"][i][j]))
             for j in range(4)] for i in range(4)]
    return {"basis": blob["basis"], "magnitudes": mags,
            "concurrence": blob.get("concurrence")}


def plot_tpdm_bars(payload, style):
    fig = plt.figure(figsize=(4.8, 3.8))  # constrained layout and 3d axes disagree
    ax = fig.add_subplot(projection="3d")
    mags = payload["magnitudes"]
    xs, ys, zs = [], [], []
    for i in range(4):
        for j in range(4):
            xs.append(i)
            ys.append(j)
            zs.append(mags[i][j])
    ax.bar3d([x - 0.3 for x in xs], [y - 0.3 for y in ys], [0.0] * 16,
             0.6, 0.6, zs, shade=True, color="#4878cf")
    ax.set_xticks(range(4), payload["basis"])
    ax.set_yticks(range(4), payload["basis"])
    ax.set_zlim(0.0, max(0.55, max(zs)))
    ax.set_zlabel("matrix element magnitude")
    if style.get("title"):
        ax.set_title(style["title"])
    elif payload["concurrence"] is not None:
        ax.set_title(f"C = {payload['concurrence']:.3f}")
    return fig


def load_stark(path):
    return {"rows": read_table(path, ("shift_H_meV", "shift_V_meV",
                                      "splitting_meV"))}


def plot_stark(payload, style):
    fig, ax = _figure(style)
    rows = payload["rows"]
    idx = range(len(rows))
    width = 0.25
    for k, (col, label) in enumerate((("shift_H_meV", "H shift"),
                                      ("shift_V_meV", "V shift"),
                                      ("splitting_meV", "splitting"))):
        ax.bar([i + (k - 1) * width for i in idx],
               [r[col] for r in rows], width, label=label)
    ax.set_xticks(list(idx), [f"run {i}" for i in idx])
    ax.set_ylabel("photon-induced shift (meV)")
    ax.legend(fontsize=8)
    return fig


def load_ettocf(path):
    return {"rows": read_table(path, ("t_ps", "ettocf"))}


def plot_ettocf(payload, style):
    fig, ax = _figure(style)
    rows = payload["rows"]
    ax.plot([r["t_ps"] for r in rows], [r["ettocf"] for r in rows])
    ax.set_xlabel("time (ps)")
    ax.set_ylabel("third-order correlator")
    return fig


def load_qber_T(path):
    rows = read_table(path, ("axis_value", "qber"))
    return {"rows": rows, "threshold": QBER_THRESHOLD}


def plot_qber_T(payload, style):
    fig, ax = _figure(style)
    rows = payload["rows"]
    ax.plot([r["axis_value"] for r in rows], [r["qber"] for r in rows], "o-")
    ax.axhline(payload["threshold"], color="grey", linestyle=":",
               label=f"{payload['threshold']:g} threshold")
    ax.set_xlabel("temperature (K)")
    ax.set_ylabel("qubit error rate")
    ax.legend(fontsize=8)
    return fig


RECIPES: dict[str, tuple[str, Callable, Callable]] = {
    "rates": ("rates.csv", load_rates, plot_rates),
    "tp_rates": ("rates.csv", load_tp_rates, plot_tp_rates),
    "concurrence_g": ("sweep_g.csv", load_concurrence_g, plot_concurrence_g),
    "tpdm_bars": ("tpdm.json", load_tpdm_bars, plot_tpdm_bars),
    "stark": ("stark.csv", load_stark, plot_stark),
    "ettocf": ("ettocf.csv", load_ettocf, plot_ettocf),
    "qber_T": ("sweep_temperature.csv", load_qber_T, plot_qber_T),
}


@dataclass(frozen=True)
class FigureRecipe:
    figure_id: str
    in_dir: Path
    out_file: Path
    input_name: str | None = None  # override the conventional filename
    style: Mapping = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        if self.figure_id not in RECIPES:
            raise ValueError(f"unknown figure id {self.figure_id!r}; "
                             f"choose from {sorted(RECIPES)}")

    @property
    def input_path(self) -> Path:
        name = self.input_name or RECIPES[self.figure_id][0]
        return Path(self.in_dir) / name


def render(recipe: FigureRecipe):
    """Render one figure to recipe.out_file; returns (figure, payload)."""
    _, load, plot = RECIPES[recipe.figure_id]
    payload = load(recipe.input_path)
    fig = plot(payload, recipe.style)
    fig.savefig(recipe.out_file, dpi=recipe.style.get("dpi", 150))
    plt.close(fig)
    return fig, payload
