"""Initial conditions and the quasimomentum quadrature behind them.

Every experimentally relevant initial state is built here: single plane
waves, the two-wave ratchet superposition, and narrow or broad momentum
distributions realized as weighted fiber sets.  Dirac deltas in beta are
always single fibers with full weight, never narrow numerical Gaussians.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BZ_HI,
    BZ_LO,
    Coherence,
    CSBWDistribution,
    Ensemble,
    Fiber,
    SimParams,
    fold_momentum,
)
from .errors import OutOfLadderError

#: default position-grid resolution; the weight fields in scope carry at
#: most two harmonics in xi, so 256 points integrate them exactly.
DEFAULT_XI_POINTS = 256

#: relative amplitude below which Gaussian ladder rungs are dropped
RUNG_CUT = 1e-9


class Scheme(enum.Enum):
    MIDPOINT = "midpoint"
    GAUSS_LEGENDRE = "gauss-legendre"


@dataclass(frozen=True)
class QuadratureSpec:
    """How to discretize an integral over quasimomentum."""

    n_beta: int = 512
    scheme: Scheme = Scheme.MIDPOINT
    support: tuple[float, float] | None = None

    def __post_init__(self):
        if self.n_beta < 8:
            raise ValueError("n_beta must be at least 8")
        if self.support is not None:
            lo, hi = self.support
            if not (BZ_LO <= lo < hi <= BZ_HI):
                raise ValueError("support must be a non-empty interval "
                                 "within [-1/2, 1/2)")


def default_n_beta(n_kicks, support_width):
    """Node count resolving the filter oscillation ~1/t over the support."""
    return max(512, int(math.ceil(8 * n_kicks * support_width)))


def quadrature_nodes(spec: QuadratureSpec, support=None):
    """Nodes and plain d-beta weights (density not yet applied)."""
    lo, hi = support if support is not None else spec.support
    if spec.scheme is Scheme.MIDPOINT:
        h = (hi - lo) / spec.n_beta
        nodes = lo + h * (np.arange(spec.n_beta) + 0.5)
        weights = np.full(spec.n_beta, h)
    else:
        x, w = np.polynomial.legendre.leggauss(spec.n_beta)
        nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        weights = 0.5 * (hi - lo) * w
    return nodes, weights


def default_xi_grid(n=DEFAULT_XI_POINTS):
    """Uniform grid on [-pi, pi)."""
    return -np.pi + 2 * np.pi * np.arange(n) / n


def _one_hot(n0, half_width):
    if abs(n0) > half_width:
        raise OutOfLadderError(
            f"rung n={n0} outside the ladder |n| <= {half_width}")
    amps = np.zeros(2 * half_width + 1, dtype=complex)
    amps[n0 + half_width] = 1.0
    return amps


def make_plane_wave(n0, beta0, params: SimParams,
                    coherence=Coherence.COHERENT) -> Ensemble:
    """Single plane wave of momentum (n0 + beta0)*kbar.

    beta0 outside the first Brillouin zone is folded back with the integer
    part absorbed into n0.
    """
    n0, beta0 = fold_momentum(n0, beta0)
    fiber = Fiber(beta=beta0, amps=_one_hot(n0, params.ladder_half_width))
    return Ensemble(fibers=(fiber,), weights=[1.0], coherence=coherence)


def make_bragg_superposition(phi, n, params: SimParams) -> Ensemble:
    """Equal superposition (|n kbar> - i e^{i phi} |(n-1) kbar>)/sqrt(2).

    The resulting comb-wave weights are (1 - sin(xi - phi))/2pi regardless
    of n, which is what drives the directed current.
    """
    half = params.ladder_half_width
    if abs(n) > half or abs(n - 1) > half:
        raise OutOfLadderError(
            f"rungs {n} and {n - 1} must lie within |n| <= {half}")
    amps = np.zeros(2 * half + 1, dtype=complex)
    amps[n + half] = 1 / math.sqrt(2)
    amps[n - 1 + half] = -1j * np.exp(1j * phi) / math.sqrt(2)
    fiber = Fiber(beta=0.0, amps=amps)
    return Ensemble(fibers=(fiber,), weights=[1.0],
                    coherence=Coherence.COHERENT)


def make_gaussian(sigma, coherence, phi=0.0, quad=None,
                  params: SimParams = None) -> Ensemble:
    """Gaussian momentum distribution of rms width sigma (in units of kbar).

    For sigma << 1 only the central rung of each fiber is populated and the
    Gaussian acts as a quasimomentum weight; for sigma ~ 1 or larger each
    fiber spans several ladder rungs.  Coherent ensembles carry the phase
    factor exp(-i (n+beta) phi) (a wave packet centered at xi = phi);
    incoherent ensembles carry magnitudes only.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    quad = quad or QuadratureSpec()
    if quad.support is not None:
        support = quad.support
    else:
        half_supp = min(8 * sigma, BZ_HI)
        support = (-half_supp, half_supp)
    nodes, base_w = quadrature_nodes(quad, support)

    half = params.ladder_half_width
    n_cut = int(math.ceil(sigma * math.sqrt(-4 * math.log(RUNG_CUT)) + 1))
    if n_cut > half:
        raise OutOfLadderError(
            f"sigma={sigma} needs rungs out to |n|={n_cut} but the ladder "
            f"stops at {half}")
    rungs = np.arange(-n_cut, n_cut + 1)

    fibers = []
    weights = np.empty(nodes.size)
    for i, beta in enumerate(nodes):
        p = rungs + beta
        mag = np.exp(-p**2 / (4 * sigma**2))
        weights[i] = base_w[i] * float(np.sum(mag**2))
        amps = np.zeros(2 * half + 1, dtype=complex)
        if coherence is Coherence.COHERENT:
            amps[rungs + half] = mag * np.exp(-1j * p * phi)
        else:
            amps[rungs + half] = mag
        fibers.append(Fiber.normalized(beta, amps))
    weights /= weights.sum()
    return Ensemble(fibers=tuple(fibers), weights=weights, coherence=coherence)


def make_square(delta, quad=None, params: SimParams = None) -> Ensemble:
    """Flat momentum distribution of full width delta around zero.

    Matched in kinetic energy to a Gaussian of rms sigma = delta/sqrt(12).
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    quad = quad or QuadratureSpec()
    nodes, base_w = quadrature_nodes(quad, (-delta / 2, delta / 2))
    half = params.ladder_half_width
    fibers = tuple(Fiber(beta=b, amps=_one_hot(0, half)) for b in nodes)
    weights = base_w / base_w.sum()
    return Ensemble(fibers=fibers, weights=weights,
                    coherence=Coherence.INCOHERENT)


def matched_sigma(delta):
    """Gaussian rms with the same kinetic energy as a width-delta square."""
    return delta / math.sqrt(12)


def csbw_weights(ensemble: Ensemble, xi_grid=None, kbar=None) -> CSBWDistribution:
    """Expand an ensemble into comb-shaped Bloch-wave weights pi(beta, xi).

    Coherent fibers give |psi_beta(xi)|^2 / 2pi evaluated from the ladder
    amplitudes; incoherent fibers give the xi-flat sum of squared magnitudes.
    Row i is premultiplied by fiber weight i, so the double quadrature of the
    result is one.

    When ``kbar`` is given the distribution also carries the local momentum
    density and the ensemble's initial mean momentum and energy, which the
    map-based observables need; otherwise those fields stay empty.
    """
    xi = default_xi_grid() if xi_grid is None else np.asarray(xi_grid, float)
    n_f = len(ensemble)
    weights = np.empty((n_f, xi.size))
    current = np.empty((n_f, xi.size)) if kbar is not None else None
    p0 = e0 = 0.0
    for i, (w, fiber) in enumerate(zip(ensemble.weights, ensemble.fibers)):
        a = fiber.amps
        probs = np.abs(a) ** 2
        p_over_kbar = fiber.rungs + fiber.beta
        if kbar is not None:
            p0 += w * kbar * float(probs @ p_over_kbar)
            e0 += w * 0.5 * kbar**2 * float(probs @ p_over_kbar**2)
        if ensemble.coherence is Coherence.COHERENT:
            mask = probs > 0
            phases = np.exp(1j * np.outer(p_over_kbar[mask], xi))
            psi = (a[mask] @ phases) / math.sqrt(2 * np.pi)
            weights[i] = w * np.abs(psi) ** 2
            if kbar is not None:
                dpsi = ((a[mask] * p_over_kbar[mask]) @ phases) \
                    / math.sqrt(2 * np.pi)
                current[i] = w * kbar * (psi.conj() * dpsi).real
        else:
            weights[i] = w * probs.sum() / (2 * np.pi)
            if kbar is not None:
                current[i] = w * kbar * float(probs @ p_over_kbar) / (2 * np.pi)
    return CSBWDistribution(beta_grid=ensemble.betas, xi_grid=xi,
                            weights=weights, current=current,
                            p0=p0, e0=e0, kbar=kbar)
