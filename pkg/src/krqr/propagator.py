"""Exact one-period Floquet evolution of quasimomentum fibers.

One kick period is a free flight followed by an instantaneous cosine kick.
The free flight is diagonal on the momentum ladder; the kick is diagonal on
the position grid of one spatial period, so it is applied spectrally:
transform to the grid, multiply by exp(-i K cos X / kbar), transform back,
truncate to the ladder.  Distinct quasimomenta never mix.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .core import (
    Ensemble,
    Fiber,
    ObservableSeries,
    SimParams,
    validate_params,
    wrap_angle,
)
from .errors import LadderLeakError, NotResonantError

#: raise LADDER_LEAK when one kick discards this fraction of the norm;
#: loose enough to survive hundreds of kicks at healthy margins, tight
#: enough to flag a misconfigured ladder immediately.
LEAK_TOL = 1e-9

THREADS_ENV = "KRQR_THREADS"


def _fft_workers():
    """Worker cap for the batched FFTs; KRQR_THREADS overrides the default."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def grid_size_for(half_width):
    """Smallest power of two >= 4(N+1): factor-2 oversampling of the ladder."""
    return 1 << max(4, int(math.ceil(4 * (half_width + 1))) - 1).bit_length()


@dataclass(frozen=True)
class KickPlan:
    """Precomputed position grid and kick phase table for one ladder size."""

    half_width: int
    K: float
    kbar: float
    grid_size: int
    xi: np.ndarray
    phase_table: np.ndarray

    def __post_init__(self):
        if self.grid_size < 2 * (2 * self.half_width + 1):
            raise ValueError("grid must oversample the ladder at least twice")
        for name in ("xi", "phase_table"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def make_kick_plan(params: SimParams, half_width=None) -> KickPlan:
    """Build the kick phase table exp(-i K cos X / kbar) on the unit cell."""
    n = params.ladder_half_width if half_width is None else half_width
    m = grid_size_for(n)
    xi = -np.pi + 2 * np.pi * np.arange(m) / m
    table = np.exp(-1j * (params.K / params.kbar) * np.cos(xi))
    return KickPlan(half_width=n, K=params.K, kbar=params.kbar,
                    grid_size=m, xi=xi, phase_table=table)


class _Block:
    """Stacked amplitudes of many fibers advancing in lock-step."""

    def __init__(self, amps, betas, params, plan):
        self.amps = np.array(amps, dtype=complex)      # (F, 2N+1)
        self.betas = np.asarray(betas, dtype=float)
        self.params = params
        self.plan = plan
        n = self.amps.shape[1] // 2
        self.rungs = np.arange(-n, n + 1)
        mom = (self.rungs[None, :] + self.betas[:, None]) * params.kbar
        self.p_weight = mom
        self.e_weight = 0.5 * mom**2
        self.free_phase = np.exp(-0.5j * params.kbar
                                 * (self.rungs[None, :] + self.betas[:, None]) ** 2)
        m = plan.grid_size
        self.idx = self.rungs % m
        self.twiddle = np.where(self.rungs % 2 == 0, 1.0, -1.0)
        self.workers = _fft_workers()
        self._grid = np.zeros((self.amps.shape[0], m), dtype=complex)

    def free(self):
        self.amps *= self.free_phase

    def kick(self):
        c = self._grid
        c[:] = 0.0
        c[:, self.idx] = self.amps * self.twiddle
        u = sfft.ifft(c, axis=-1, workers=self.workers)
        u *= self.plan.phase_table
        full = sfft.fft(u, axis=-1, workers=self.workers)
        total = np.sum(full.real**2 + full.imag**2, axis=-1)
        self.amps = full[:, self.idx] * self.twiddle
        kept = np.sum(self.amps.real**2 + self.amps.imag**2, axis=-1)
        leak = np.max((total - kept) / total)
        if leak > LEAK_TOL:
            raise LadderLeakError(
                f"kick discarded {leak:.3e} of the norm past rung "
                f"|n|={self.amps.shape[1] // 2}; increase ladder_half_width")

    def step(self):
        self.free()
        self.kick()

    def observables(self, weights):
        probs = self.amps.real**2 + self.amps.imag**2
        p = np.sum(probs * self.p_weight, axis=1)
        e = np.sum(probs * self.e_weight, axis=1)
        return float(weights @ p), float(weights @ e)


def free_step(fiber: Fiber, params: SimParams) -> Fiber:
    """Free flight over one period: pure phase exp(-i kbar (n+beta)^2 / 2)."""
    phase = np.exp(-0.5j * params.kbar * (fiber.rungs + fiber.beta) ** 2)
    return Fiber(beta=fiber.beta, amps=fiber.amps * phase)


def kick_step(fiber: Fiber, plan: KickPlan) -> Fiber:
    """Apply one instantaneous kick exp(-i K cos X / kbar) spectrally.

    Raises LadderLeakError when truncation back to [-N, N] discards more
    than 1e-9 of the norm.
    """
    if fiber.half_width != plan.half_width:
        raise ValueError("kick plan was built for a different ladder size")
    dummy = SimParams(K=plan.K, kbar=plan.kbar, n_kicks=0,
                      ladder_half_width=plan.half_width)
    block = _Block(fiber.amps[None, :], [fiber.beta], dummy, plan)
    block.kick()
    return Fiber(beta=fiber.beta, amps=block.amps[0])


def evolve(ensemble: Ensemble, params: SimParams) -> list[Ensemble]:
    """Advance every fiber through n_kicks periods; return all snapshots.

    Snapshot t is the state just after the kick of period t; snapshot 0 is
    the initial ensemble.  Quasimomenta are conserved bitwise.
    """
    validate_params(params)
    plan = make_kick_plan(params, ensemble.half_width)
    block = _Block(ensemble.amps_matrix(), ensemble.betas, params, plan)
    snaps = [ensemble]
    for _ in range(params.n_kicks):
        block.step()
        fibers = tuple(Fiber(beta=f.beta, amps=row)
                       for f, row in zip(ensemble.fibers, block.amps))
        snaps.append(Ensemble(fibers=fibers, weights=ensemble.weights,
                              coherence=ensemble.coherence))
    return snaps


def evolve_observables(ensemble: Ensemble, params: SimParams,
                       chunk_bytes=1 << 26) -> ObservableSeries:
    """Streaming equivalent of series_from_snapshots(evolve(...)).

    Fibers advance in fixed-order chunks so no full snapshot is ever
    materialized; results are bit-identical to the snapshot path and
    independent of the FFT worker count.
    """
    validate_params(params)
    plan = make_kick_plan(params, ensemble.half_width)
    n_t = params.n_kicks + 1
    mean_p = np.zeros(n_t)
    mean_e = np.zeros(n_t)
    amps = ensemble.amps_matrix()
    betas = ensemble.betas
    chunk = max(1, chunk_bytes // (16 * plan.grid_size))
    for lo in range(0, len(ensemble), chunk):
        hi = min(lo + chunk, len(ensemble))
        block = _Block(amps[lo:hi], betas[lo:hi], params, plan)
        w = ensemble.weights[lo:hi]
        p, e = block.observables(w)
        mean_p[0] += p
        mean_e[0] += e
        for t in range(1, n_t):
            block.step()
            p, e = block.observables(w)
            mean_p[t] += p
            mean_e[t] += e
    return ObservableSeries(t=np.arange(n_t), mean_p=mean_p, mean_e=mean_e)


def recursion_step_csbw(xi, beta, params: SimParams, t):
    """Translate a comb center t periods ahead at exact resonance.

    Returns (xi_t, phase): the wrapped center xi + v_beta*t with
    v_beta = kbar*(beta + 1/2), and the accumulated global phase
    exp(i kbar beta (beta+1)/2)^t.
    """
    if params.ell is None:
        raise NotResonantError("recursion requires kbar = 2*pi*ell (set ell)")
    validate_params(params)
    if t < 0:
        raise ValueError("t must be >= 0")
    v = params.kbar * (beta + 0.5)
    xi_t = float(wrap_angle(xi + v * t))
    phase = complex(np.exp(0.5j * params.kbar * beta * (beta + 1) * t))
    return xi_t, phase
