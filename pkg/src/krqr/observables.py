"""Momentum-diagonal expectation values.

Distinct quasimomenta never interfere in these sums, so coherence enters
only through each fiber's amplitudes, never through cross-fiber terms.
"""

from __future__ import annotations

import numpy as np

from .core import Ensemble, ObservableSeries
from .errors import WindowTooSmallError


def mean_momentum(ensemble: Ensemble, kbar) -> float:
    """Ensemble mean of P = (n + beta)*kbar."""
    total = 0.0
    for w, f in zip(ensemble.weights, ensemble.fibers):
        probs = np.abs(f.amps) ** 2
        total += w * float(probs @ f.momenta(kbar))
    return total


def mean_energy(ensemble: Ensemble, kbar) -> float:
    """Ensemble mean of P^2/2."""
    total = 0.0
    for w, f in zip(ensemble.weights, ensemble.fibers):
        probs = np.abs(f.amps) ** 2
        total += w * 0.5 * float(probs @ f.momenta(kbar) ** 2)
    return total


def series_from_snapshots(snapshots, kbar) -> ObservableSeries:
    """Reduce a snapshot list to per-kick mean momentum and energy."""
    if not snapshots:
        raise ValueError("need at least one snapshot")
    t = np.arange(len(snapshots))
    p = np.array([mean_momentum(s, kbar) for s in snapshots])
    e = np.array([mean_energy(s, kbar) for s in snapshots])
    return ObservableSeries(t=t, mean_p=p, mean_e=e)


def fit_rate(series: ObservableSeries, t_min, t_max, power):
    """Least-squares fit of mean_e(t) - mean_e(0) to c * t**power.

    Returns (c, residual) with residual the RMS misfit normalized by the
    RMS of the data over the window.  The window is [t_min, t_max]
    inclusive and must contain at least four points.
    """
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    if not (t_min < t_max <= int(series.t.max())):
        raise WindowTooSmallError(
            f"need t_min < t_max <= {int(series.t.max())}, "
            f"got [{t_min}, {t_max}]")
    mask = (series.t >= t_min) & (series.t <= t_max)
    if int(mask.sum()) < 4:
        raise WindowTooSmallError(
            f"window [{t_min}, {t_max}] holds {int(mask.sum())} points; "
            "need at least 4")
    y = series.mean_e[mask] - series.mean_e[0]
    x = series.t[mask].astype(float) ** power
    c = float(np.dot(x, y) / np.dot(x, x))
    scale = float(np.sqrt(np.mean(y**2)))
    if scale == 0.0:
        return c, 0.0
    residual = float(np.sqrt(np.mean((y - c * x) ** 2)) / scale)
    return c, residual
