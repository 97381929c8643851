"""Domain types and reduced-unit conventions.

Everything downstream works in reduced units: position X = 2*k_L*x, momentum
P = (n + beta)*kbar, time counted in kick periods.  ``kbar`` is the effective
Planck constant; simple resonances live at kbar = 2*pi*ell.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    LadderTooSmallError,
    NotRationalError,
    OutOfLadderError,
    ResonanceMismatchError,
)

#: quasimomentum lives in the first Brillouin zone [-1/2, 1/2)
BZ_LO, BZ_HI = -0.5, 0.5

RESONANCE_TOL = 1e-12
NORM_TOL = 1e-12
WEIGHT_TOL = 1e-10

#: extra rungs beyond the ballistic estimate K/kbar * n_kicks; the kick
#: operator's ladder couplings decay super-exponentially past order K/kbar,
#: so this margin keeps per-kick edge leakage below 1e-12.
LADDER_MARGIN = 16


def wrap_angle(x):
    """Wrap an angle (or array of angles) into [-pi, pi)."""
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def fold_momentum(n, beta):
    """Fold (n, beta) so that beta lands in [-1/2, 1/2).

    The integer part of beta is absorbed into the ladder index n; the total
    momentum (n + beta) is unchanged.
    """
    shift = math.floor(beta + 0.5)
    return n + shift, beta - shift


def min_ladder_half_width(K, kbar, n_kicks):
    """Smallest ladder half-width that passes validation for these params."""
    return math.ceil(K / kbar * n_kicks) + LADDER_MARGIN


def auto_ladder_half_width(K, kbar, n_kicks, extra_rungs=0):
    """Ladder half-width with headroom for long runs.

    The ballistic edge of the spreading state sits near K/kbar * n_kicks;
    its amplitude tail decays on the Airy scale (edge/2)^(1/3), so the
    fixed +16 margin alone lets the per-kick truncation loss creep toward
    1e-9 on ~200-kick runs.  The cushion added here keeps it below 1e-14.
    """
    reach = K / kbar * max(n_kicks, 1)
    cushion = math.ceil(8 * (max(reach, 2.0) / 2.0) ** (1.0 / 3.0))
    return min_ladder_half_width(K, kbar, n_kicks) + cushion + extra_rungs


class Coherence(enum.Enum):
    """Whether an ensemble is a coherent superposition or a statistical mixture."""

    COHERENT = "coherent"
    INCOHERENT = "incoherent"


@dataclass(frozen=True)
class SimParams:
    """Kick strength, effective Planck constant and run geometry.

    Attributes
    ----------
    K : float
        Dimensionless kick strength (> 0).
    kbar : float
        Reduced Planck constant (> 0).
    ell : int or None
        Resonance order; when set, kbar must equal 2*pi*ell.
    n_kicks : int
        Number of kick periods to evolve (>= 0).
    ladder_half_width : int
        Ladder spans momentum rungs n in [-N, N].
    """

    K: float
    kbar: float
    n_kicks: int
    ladder_half_width: int
    ell: int | None = None

    @classmethod
    def resonant(cls, K, ell, n_kicks, ladder_half_width=None):
        """Build parameters on the resonance kbar = 2*pi*ell."""
        kbar = 2 * math.pi * ell
        if ladder_half_width is None:
            ladder_half_width = auto_ladder_half_width(K, kbar, n_kicks)
        return cls(K=K, kbar=kbar, n_kicks=n_kicks,
                   ladder_half_width=ladder_half_width, ell=ell)


def validate_params(params: SimParams) -> SimParams:
    """Check all SimParams invariants; return the params unchanged.

    Raises
    ------
    ResonanceMismatchError
        ``ell`` is set but kbar != 2*pi*ell (within 1e-12).
    LadderTooSmallError
        ladder_half_width < ceil(K/kbar * n_kicks) + 16.
    ValueError
        Plainly out-of-domain fields (K <= 0, ...).
    """
    if params.K <= 0:
        raise ValueError(f"kick strength must be positive, got K={params.K}")
    if params.kbar <= 0:
        raise ValueError(f"kbar must be positive, got {params.kbar}")
    if params.n_kicks < 0:
        raise ValueError(f"n_kicks must be >= 0, got {params.n_kicks}")
    if params.ladder_half_width < 1:
        raise ValueError(
            f"ladder_half_width must be >= 1, got {params.ladder_half_width}")
    if params.ell is not None:
        if params.ell < 1 or params.ell != int(params.ell):
            raise ValueError(f"ell must be a positive integer, got {params.ell}")
        if abs(params.kbar - 2 * math.pi * params.ell) >= RESONANCE_TOL:
            raise ResonanceMismatchError(
                f"kbar={params.kbar!r} is not 2*pi*ell for ell={params.ell} "
                f"(expected {2 * math.pi * params.ell!r})")
    needed = min_ladder_half_width(params.K, params.kbar, params.n_kicks)
    if params.ladder_half_width < needed:
        raise LadderTooSmallError(
            f"ladder_half_width={params.ladder_half_width} < {needed} required "
            f"for K={params.K}, kbar={params.kbar}, n_kicks={params.n_kicks}")
    return params


def reduced_from_physical(kick_period_T, talbot_time_TT, *, tol=1e-9,
                          max_denominator=10**6):
    """Express the kicking period as the rational fraction r/s of the Talbot time.

    Returns the smallest coprime (r, s) with |T/T_T - r/s| < tol, from which
    kbar = 4*pi*r/s.

    Raises
    ------
    NotRationalError
        No fraction with denominator <= 1e6 matches within tolerance.
    """
    if kick_period_T <= 0 or talbot_time_TT <= 0:
        raise ValueError("both times must be positive")
    ratio = kick_period_T / talbot_time_TT
    frac = Fraction(ratio).limit_denominator(max_denominator)
    if abs(ratio - float(frac)) >= tol or frac.numerator == 0:
        raise NotRationalError(
            f"T/T_T={ratio!r} has no rational approximation r/s with "
            f"s <= {max_denominator} within {tol}")
    return frac.numerator, frac.denominator


@dataclass(frozen=True)
class Fiber:
    """One quasimomentum beta with complex amplitudes on the momentum ladder.

    ``amps[i]`` is the amplitude of rung n = i - N where 2N+1 = len(amps);
    the physical momentum of rung n is (n + beta)*kbar.
    """

    beta: float
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.ndim != 1 or amps.size % 2 == 0:
            raise ValueError("amps must be a 1-d vector of odd length 2N+1")
        if not (BZ_LO <= self.beta < BZ_HI):
            raise ValueError(
                f"beta={self.beta} outside the first Brillouin zone [-1/2, 1/2)")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, beta, amps):
        """Build a unit-norm fiber, folding beta into the zone if needed."""
        amps = np.asarray(amps, dtype=complex)
        shift, beta = fold_momentum(0, beta)
        if shift:
            rolled = np.zeros_like(amps)
            src = slice(max(0, -shift), amps.size - max(0, shift))
            dst = slice(max(0, shift), amps.size - max(0, -shift))
            rolled[dst] = amps[src]
            lost = np.sum(np.abs(amps) ** 2) - np.sum(np.abs(rolled) ** 2)
            if lost > NORM_TOL:
                raise OutOfLadderError(
                    "Brillouin folding pushed amplitude past the ladder edge")
            amps = rolled
        norm = np.sqrt(np.sum(np.abs(amps) ** 2))
        if norm == 0:
            raise ValueError("cannot normalize a zero amplitude vector")
        return cls(beta=beta, amps=amps / norm)

    @property
    def half_width(self):
        """Ladder half-width N."""
        return self.amps.size // 2

    @property
    def rungs(self):
        """Integer rung indices n = -N..N."""
        n = self.half_width
        return np.arange(-n, n + 1)

    def momenta(self, kbar):
        """Physical momenta (n + beta)*kbar of every rung."""
        return (self.rungs + self.beta) * kbar

    def norm(self):
        return float(np.sum(np.abs(self.amps) ** 2))


@dataclass(frozen=True)
class Ensemble:
    """Weighted set of fibers, either a coherent superposition or a mixture.

    Weights are quadrature weights over quasimomentum and must sum to one.
    Distinct quasimomenta never interfere in momentum-diagonal observables;
    the coherence flag matters for the position-space weight field.
    """

    fibers: tuple
    weights: np.ndarray
    coherence: Coherence = Coherence.COHERENT

    def __post_init__(self):
        fibers = tuple(self.fibers)
        weights = np.asarray(self.weights, dtype=float)
        if len(fibers) != weights.size or not fibers:
            raise ValueError("need one weight per fiber and at least one fiber")
        if np.any(weights < 0):
            raise ValueError("weights must be non-negative")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1, got {weights.sum()!r}")
        widths = {f.half_width for f in fibers}
        if len(widths) != 1:
            raise ValueError("all fibers must share the same ladder half-width")
        weights = weights.copy()
        weights.flags.writeable = False
        object.__setattr__(self, "fibers", fibers)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.fibers)

    @property
    def half_width(self):
        return self.fibers[0].half_width

    @property
    def betas(self):
        return np.array([f.beta for f in self.fibers])

    def amps_matrix(self):
        """Stack fiber amplitudes into an (n_fibers, 2N+1) matrix."""
        return np.array([f.amps for f in self.fibers])


@dataclass(frozen=True)
class CSBWDistribution:
    """Weight field pi(beta, xi) of the comb-wave expansion.

    ``weights[i, j]`` already folds in the quasimomentum quadrature weight of
    row i, so the total is sum_i integral_dxi weights[i] = 1.  ``current`` is
    the matching local momentum density j(beta, xi); it is what the energy map
    needs to seed each comb's initial momentum (zero / absent for xi-flat
    states).  ``p0`` and ``e0`` are the ensemble's initial mean momentum and
    kinetic energy, carried along because the weight field alone cannot
    recover them (distributions are invariant under rigid ladder shifts).
    """

    beta_grid: np.ndarray
    xi_grid: np.ndarray
    weights: np.ndarray
    current: np.ndarray | None = None
    p0: float = 0.0
    e0: float = 0.0
    kbar: float | None = None

    def __post_init__(self):
        beta = np.asarray(self.beta_grid, dtype=float)
        xi = np.asarray(self.xi_grid, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (beta.size, xi.size):
            raise ValueError("weights must have shape (len(beta_grid), len(xi_grid))")
        if xi.size < 2:
            raise ValueError("xi grid needs at least two points")
        step = np.diff(xi)
        if not (np.allclose(step, step[0]) and xi[0] >= -np.pi and xi[-1] < np.pi):
            raise ValueError("xi_grid must be uniform within [-pi, pi)")
        for name, arr in (("beta_grid", beta), ("xi_grid", xi), ("weights", w)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.current is not None:
            cur = np.asarray(self.current, dtype=float).copy()
            if cur.shape != w.shape:
                raise ValueError("current must have the same shape as weights")
            cur.flags.writeable = False
            object.__setattr__(self, "current", cur)

    @property
    def dxi(self):
        return 2 * np.pi / self.xi_grid.size

    def total(self):
        """Double quadrature of the weight field (should be 1)."""
        return float(np.sum(self.weights) * self.dxi)


@dataclass(frozen=True)
class ObservableSeries:
    """Per-kick mean momentum and mean kinetic energy."""

    t: np.ndarray
    mean_p: np.ndarray
    mean_e: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=int)
        p = np.asarray(self.mean_p, dtype=float)
        e = np.asarray(self.mean_e, dtype=float)
        if not (t.size == p.size == e.size):
            raise ValueError("t, mean_p, mean_e must have equal lengths")
        if t.size and np.any(e < 0):
            raise ValueError("mean kinetic energy cannot be negative")
        for name, arr in (("t", t), ("mean_p", p), ("mean_e", e)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.t.size
