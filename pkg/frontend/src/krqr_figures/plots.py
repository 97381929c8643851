"""Figure builders.

Strict consumers of the simulator's CSV/JSON contract: no physics is
computed here beyond axis conveniences derived from the data itself
(subtracting the initial energy, rescaling densities for visibility).
Re-running on identical inputs produces identical image payloads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_filter_csv, read_result_json, read_series_csv

#: savefig metadata that strips run-dependent fields where the format has any
_CLEAN_METADATA = {".svg": {"Date": None}}


@dataclass(frozen=True)
class PlotSpec:
    """What to draw and where to put it."""

    inputs: tuple
    output: str
    kind: str = "energy"                # energy | filter | reconstruction
    subtract_initial: bool = False      # plot E(t) - E(0) instead of E(t)
    log_x: bool = False
    log_y: bool = False
    inset: tuple | None = None          # (t_lo, t_hi) early-time inset

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("need at least one input file")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))


def _save(fig, output):
    out = Path(output)
    meta = _CLEAN_METADATA.get(out.suffix.lower())
    fig.savefig(out, dpi=150, metadata=meta)
    plt.close(fig)
    return str(out)


def plot_energy_series(spec: PlotSpec):
    """Overlay mean kinetic energy curves from one or more series CSVs."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    curves = []
    for path in spec.inputs:
        series = read_series_csv(path)
        if not series:
            continue
        stem = Path(path).stem
        for engine, cols in series.items():
            label = f"{stem} [{engine}]" if len(series) > 1 else stem
            y = cols["mean_e"]
            if spec.subtract_initial and y.size:
                y = y - y[0]
            curves.append((cols["t"], y, label))
    if not curves:
        raise SchemaError("no data rows in any input")
    for t, y, label in curves:
        ax.plot(t, y, lw=1.4, label=label)
    ax.set_xlabel("kick number t")
    ax.set_ylabel("mean kinetic energy" + (" gain" if spec.subtract_initial
                                           else ""))
    if spec.log_x:
        ax.set_xscale("log")
    if spec.log_y:
        ax.set_yscale("log")
    if len(curves) > 1:
        ax.legend(fontsize=8)
    if spec.inset:
        lo, hi = spec.inset
        box = ax.inset_axes([0.12, 0.55, 0.38, 0.38])
        for t, y, _ in curves:
            mask = (t >= lo) & (t <= hi)
            box.plot(t[mask], y[mask], lw=1.0)
        box.set_title(f"t in [{lo}, {hi}]", fontsize=7)
        box.tick_params(labelsize=7)
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_filter(spec: PlotSpec):
    """Exact filter, central-lobe approximation and rescaled densities.

    One panel per kick count found in the input table; the densities are
    scaled to the filter's peak so they stay visible.
    """
    groups = {}
    for path in spec.inputs:
        groups.update(read_filter_csv(path))
    if not groups:
        raise SchemaError("no filter samples in the input")
    times = sorted(groups)
    fig, axes = plt.subplots(len(times), 1, figsize=(6.4, 3.2 * len(times)),
                             squeeze=False)
    for ax, t in zip(axes[:, 0], times):
        g = groups[t]
        ax.plot(g["beta"], g["exact"], "-", color="tab:blue",
                lw=1.4, label="filter")
        if np.all(np.isnan(g["approx"])):
            warnings.warn(f"t={t}: no central-lobe approximation samples; "
                          "plotting the exact filter only")
        else:
            ax.plot(g["beta"], g["approx"], "--", color="tab:orange",
                    lw=1.4, label="central lobe")
        peak = float(np.nanmax(g["exact"]))
        for key, style, color in (("gaussian", ":", "tab:green"),
                                  ("square", "-.", "tab:red")):
            vals = g[key]
            top = float(np.nanmax(vals)) if np.any(np.isfinite(vals)) else 0.0
            if top > 0:
                ax.plot(g["beta"], vals * (0.9 * peak / top), style,
                        color=color, lw=1.1, label=f"{key} (rescaled)")
        ax.set_title(f"t = {t} kicks", fontsize=9)
        ax.set_xlabel("quasimomentum beta")
        ax.set_ylabel("filter weight")
        ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, spec.output)


def _true_density(config, beta):
    """Initial momentum density implied by the run's own config echo."""
    delta = config.get("delta")
    sigma = config.get("sigma")
    if delta:
        return np.where(np.abs(beta) <= delta / 2, 1.0 / delta, 0.0)
    if sigma:
        dens = np.exp(-beta**2 / (2 * sigma**2))
        return dens / (np.trapezoid(dens, beta) or 1.0)
    return None


def plot_reconstruction(spec: PlotSpec):
    """Recovered initial momentum density against the true one."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    drew = False
    for path in spec.inputs:
        doc = read_result_json(path)
        rec = doc.get("reconstruction")
        if not rec:
            raise SchemaError(f"{path}: 'reconstruction' is empty; run a "
                              "reconstruction scenario first")
        beta = np.asarray(rec["beta"], dtype=float)
        dens = np.asarray(rec["density"], dtype=float)
        ax.plot(beta, dens, lw=1.3, label=f"{Path(path).stem} recovered")
        truth = _true_density(doc.get("config", {}), beta)
        if truth is not None and not drew:
            ax.plot(beta, truth, "k--", lw=1.1, label="initial distribution")
            drew = True
    ax.set_xlabel("quasimomentum beta")
    ax.set_ylabel("momentum density")
    ax.legend(fontsize=8)
    if spec.log_y:
        ax.set_yscale("log")
    fig.tight_layout()
    return _save(fig, spec.output)


PLOTTERS = {
    "energy": plot_energy_series,
    "filter": plot_filter,
    "reconstruction": plot_reconstruction,
}


def make_plot(spec: PlotSpec):
    try:
        plotter = PLOTTERS[spec.kind]
    except KeyError:
        raise ValueError(f"unknown figure kind {spec.kind!r}; expected one "
                         f"of {', '.join(PLOTTERS)}") from None
    return plotter(spec)
