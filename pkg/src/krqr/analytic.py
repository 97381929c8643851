"""Closed-form theory of the resonant dynamics.

At kbar = 2*pi*ell the free flight rigidly translates each comb-shaped
Bloch wave by v_beta = kbar*(beta + 1/2) per period, so every observable
reduces to trigonometric sums over the kick positions.  These expressions
are exact at resonance and double as the oracle for the numeric engine.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    CSBWDistribution,
    ObservableSeries,
    SimParams,
    validate_params,
    wrap_angle,
)
from .errors import (
    AntiResonantTransportWarning,
    NotResonantError,
    OutOfLobeError,
    SeriesTooShortError,
)

#: below this |sin(v/2)| the Dirichlet kernel switches to its linear-in-t limit
DEGENERATE_TOL = 1e-9


@dataclass(frozen=True)
class CSBWState:
    """Comb center, quasimomentum and accumulated (p, e) of one comb wave.

    ``e`` is the energy gained since t = 0 (only differences are defined
    for a comb).
    """

    xi: float
    beta: float
    p: float
    e: float


def _require_resonant(params: SimParams) -> int:
    if params.ell is None:
        raise NotResonantError(
            "closed forms require kbar = 2*pi*ell; set SimParams.ell")
    validate_params(params)
    return params.ell


def v_beta(params: SimParams, beta):
    """Translation per period of a comb at quasimomentum beta."""
    return params.kbar * (np.asarray(beta) + 0.5)


def kick_sum(xi0, v, t):
    """sum_{s=1..t} sin(xi0 + v s), evaluated in closed form.

    Uses the Dirichlet kernel when sin(v/2) is away from zero and the
    degenerate linear-in-t expression t*sin(xi0 + v) otherwise.
    """
    xi0 = np.asarray(xi0, dtype=float)
    v = np.asarray(v, dtype=float)
    sv2 = np.sin(v / 2)
    degenerate = np.abs(sv2) < DEGENERATE_TOL
    safe = np.where(degenerate, 1.0, sv2)
    regular = np.sin(v * t / 2) * np.sin(xi0 + v * (t + 1) / 2) / safe
    linear = t * np.sin(xi0 + v)
    out = np.where(degenerate, linear, regular)
    return out if out.ndim else float(out)


def csbw_map(xi0, beta, p0, params: SimParams, t) -> CSBWState:
    """Advance one comb wave t periods: rigid translation plus kick sums."""
    _require_resonant(params)
    if t < 0:
        raise ValueError("t must be >= 0")
    v = float(v_beta(params, beta))
    p = p0 + params.K * kick_sum(xi0, v, t)
    return CSBWState(
        xi=float(wrap_angle(xi0 + v * t)),
        beta=beta,
        p=float(p),
        e=float(0.5 * (p**2 - p0**2)),
    )


def plane_wave_energy(t, n0, beta0, params: SimParams) -> float:
    """Mean kinetic energy of a plane wave after t kicks at resonance.

    E(t) = kbar^2 (n0+beta0)^2 / 2 + (K^2/4) sin^2(v t/2) / sin^2(v/2),
    with the removable singularities v = 0 mod 2pi (ballistic, K^2 t^2/4)
    and v = pi mod 2pi (period-2 alternation) handled exactly.
    """
    _require_resonant(params)
    e0 = 0.5 * params.kbar**2 * (n0 + beta0) ** 2
    v = float(v_beta(params, beta0))
    w = float(wrap_angle(v))
    if abs(math.sin(v / 2)) < DEGENERATE_TOL:
        return e0 + 0.25 * params.K**2 * t * t
    if min(abs(w - math.pi), abs(w + math.pi)) < DEGENERATE_TOL:
        return e0 + (0.25 * params.K**2 if t % 2 else 0.0)
    ratio = math.sin(v * t / 2) ** 2 / math.sin(v / 2) ** 2
    return e0 + 0.25 * params.K**2 * ratio


def ratchet_momentum(t, phi, params: SimParams) -> float:
    """Directed current of the two-wave superposition, Eq.-of-motion form.

    P(t) = -kbar/2 - (K t / 2) cos(phi).  Valid as a transport law only for
    even resonance order; for odd ell consecutive kicks cancel and the
    function warns that no current actually builds up.
    """
    ell = _require_resonant(params)
    if ell % 2:
        warnings.warn(AntiResonantTransportWarning(
            "odd resonance order: kicks alternate sign, the mean momentum "
            "oscillates about -kbar/2 and no directed transport occurs"))
    return -params.kbar / 2 - 0.5 * params.K * t * math.cos(phi)


def filter_function(beta, t, ell):
    """Grating filter f_beta(t) = sin^2(pi l (b+1/2) t) / sin^2(pi l (b+1/2)).

    The removable singularity at integer l*(b+1/2) evaluates to t^2.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    x = np.pi * ell * (np.asarray(beta, dtype=float) + 0.5)
    den = np.sin(x) ** 2
    singular = den < DEGENERATE_TOL**2
    out = np.where(singular, float(t * t),
                   np.sin(x * t) ** 2 / np.where(singular, 1.0, den))
    return out if out.ndim else float(out)


def filter_approx(beta, t):
    """Central-lobe approximation t^2 cos^2(pi beta t), valid for |beta| t <= 1."""
    beta = np.asarray(beta, dtype=float)
    if np.any(np.abs(beta) * t > 1):
        raise OutOfLobeError("central-lobe form needs |beta|*t <= 1")
    out = t * t * np.cos(np.pi * beta * t) ** 2
    return out if out.ndim else float(out)


def damping_time(ell, delta) -> float:
    """Kick count 2/(l*delta) after which the finite width takes over."""
    if ell < 1 or delta <= 0:
        raise ValueError("need ell >= 1 and delta > 0")
    return 2.0 / (ell * delta)


def narrow_resonant_energy(t, delta, params: SimParams) -> float:
    """Ballistic-to-diffusive energy of a narrow square distribution.

    Central-lobe result: for t <= 1/delta
        E(0) + (K^2 t^2 / 8) (1 + sinc(pi delta t)),
    beyond the lobe the diffusive law E(0) + K^2 t / (8 delta).
    """
    ell = _require_resonant(params)
    if ell % 2:
        raise NotResonantError(
            "ballistic center requires even resonance order")
    if delta <= 0:
        raise ValueError("delta must be positive")
    e0 = params.kbar**2 * delta**2 / 24
    if t <= 1 / delta:
        return e0 + params.K**2 * t * t / 8 * (1 + np.sinc(delta * t))
    return e0 + params.K**2 * t / (8 * delta)


def narrow_antiresonant_energy(t, delta, params: SimParams) -> float:
    """Damped anti-resonant oscillation of a narrow square distribution.

    E(0) + (K^2/8) [1 - (-1)^t sinc(pi delta t)]; the parity factor comes
    from integer arithmetic, never from real powers.
    """
    ell = _require_resonant(params)
    if ell % 2 == 0:
        raise NotResonantError("anti-resonance requires odd resonance order")
    if delta <= 0:
        raise ValueError("delta must be positive")
    e0 = params.kbar**2 * delta**2 / 24
    sign = -1.0 if (int(t) % 2) else 1.0
    return e0 + params.K**2 / 8 * (1 - sign * float(np.sinc(delta * t)))


def broad_diffusion_energy(t, K, e0=0.0) -> float:
    """Diffusive growth E(0) + K^2 t / 4 of a zone-filling distribution."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return e0 + K**2 * t / 4


def reconstruct_distribution(series: ObservableSeries, K, beta_grid):
    """Raw cosine series sum_{s=1..t} (4/K^2)(E(0)-E(s)) cos(2 pi s (b+1/2)).

    This is the bare inversion series of the damped anti-resonant energy;
    it is returned unnormalized (and is not yet a density: see
    ``reconstruct_density`` for the completed, normalized form).
    """
    if len(series) < 3:
        raise SeriesTooShortError("need the energies of at least kicks 1 and 2")
    beta = np.asarray(beta_grid, dtype=float)
    out = np.zeros_like(beta)
    e0 = series.mean_e[0]
    for s in range(1, len(series)):
        out += (4 / K**2) * (e0 - series.mean_e[s]) \
            * np.cos(2 * np.pi * s * (beta + 0.5))
    return out


def reconstruct_density(series: ObservableSeries, K, beta_grid):
    """Initial momentum density recovered from an anti-resonant energy series.

    Completes the raw cosine series with its data-independent part: the
    distribution's cosine-Fourier coefficients are
    c_s = 1 + (8/K^2)(E(0) - E(s)), so the density is
    1 + 2 sum_s c_s cos(2 pi s (beta+1/2)).  Without the constant-offset
    restoration the bare series drags a Dirichlet kernel along the zone
    edge that never decays.  The result is clipped at zero and normalized
    to unit integral over the zone.
    """
    beta = np.asarray(beta_grid, dtype=float)
    raw = reconstruct_distribution(series, K, beta_grid)
    t_end = len(series) - 1
    s = np.arange(1, t_end + 1)
    kernel = np.cos(2 * np.pi * np.outer(beta + 0.5, s)).sum(axis=1)
    density = 1.0 + 4.0 * raw + 2.0 * kernel
    density = np.clip(density, 0.0, None)
    if beta.size > 1:
        db = beta[1] - beta[0]
        total = density.sum() * db
        if total > 0:
            density = density / total
    return density


def _row_moments(dist: CSBWDistribution):
    """First and second xi-harmonics of every row of the weight field."""
    xi = dist.xi_grid
    dxi = dist.dxi
    basis = np.stack([np.ones_like(xi), np.cos(xi), np.sin(xi),
                      np.cos(2 * xi), np.sin(2 * xi)])
    mom = dist.weights @ basis.T * dxi          # (rows, 5)
    if dist.current is not None:
        cur = dist.current @ basis[1:3].T * dxi  # (rows, 2): cos, sin
    else:
        cur = np.zeros((dist.weights.shape[0], 2))
    return mom, cur


def _map_terms(dist: CSBWDistribution, params: SimParams, ts, mom, cur):
    """Momentum and energy gains of the weight field after each t in ts."""
    v = v_beta(params, dist.beta_grid)[:, None]
    ts = np.asarray(ts, dtype=float)[None, :]
    sv2 = np.sin(v / 2)
    degenerate = np.abs(sv2) < DEGENERATE_TOL
    amp = np.where(degenerate, ts,
                   np.sin(v * ts / 2) / np.where(degenerate, 1.0, sv2))
    theta = np.where(degenerate, v, v * (ts + 1) / 2)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    m0, mc1, ms1, mc2, ms2 = mom.T
    jc1, js1 = cur.T
    K = params.K
    # integral of S_t against the weights and against the current
    dp = K * amp * (cos_t * ms1[:, None] + sin_t * mc1[:, None])
    cross = K * amp * (cos_t * js1[:, None] + sin_t * jc1[:, None])
    # integral of S_t^2 against the weights
    quad = 0.25 * K**2 * amp**2 * (
        m0[:, None] - np.cos(2 * theta) * mc2[:, None]
        + np.sin(2 * theta) * ms2[:, None])
    return dp.sum(axis=0), (cross + quad).sum(axis=0)


def averaged_observables(dist: CSBWDistribution, params: SimParams, t):
    """Mean momentum and energy after t kicks, from the weight field alone.

    Integrates the comb-map momenta against pi(beta, xi) on the stored
    grid; exact at resonance once the grid resolves the field's harmonics.
    The distribution must have been built with kbar (see csbw_weights) so
    that its initial momentum, energy and local current are available.
    """
    _require_resonant(params)
    if dist.kbar is None:
        raise ValueError(
            "distribution lacks momentum metadata; build it with "
            "csbw_weights(..., kbar=params.kbar)")
    if not math.isclose(dist.kbar, params.kbar, rel_tol=1e-12):
        raise ValueError("distribution was built for a different kbar")
    mom, cur = _row_moments(dist)
    dp, de = _map_terms(dist, params, [t], mom, cur)
    return dist.p0 + float(dp[0]), dist.e0 + float(de[0])


def observable_series(dist: CSBWDistribution, params: SimParams,
                      n_kicks=None) -> ObservableSeries:
    """Whole per-kick series of averaged_observables in one sweep."""
    _require_resonant(params)
    if dist.kbar is None or not math.isclose(dist.kbar, params.kbar,
                                             rel_tol=1e-12):
        raise ValueError("distribution momentum metadata missing or stale")
    n_kicks = params.n_kicks if n_kicks is None else n_kicks
    ts = np.arange(n_kicks + 1)
    mom, cur = _row_moments(dist)
    dp, de = _map_terms(dist, params, ts, mom, cur)
    return ObservableSeries(t=ts, mean_p=dist.p0 + dp, mean_e=dist.e0 + de)


def slice_trajectories(xi0, params: SimParams, n_kicks, beta=0.0):
    """Comb-center path and per-kick momentum transfer for chosen slices.

    Returns (t, xi, dp): arrays of shape (len(xi0), n_kicks+1) giving each
    slice's wrapped position before kick t and the momentum K sin(xi(t))
    it receives from that kick (zero at t=0 where no kick has happened).
    """
    _require_resonant(params)
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    v = float(v_beta(params, beta))
    ts = np.arange(n_kicks + 1)
    xi = wrap_angle(xi0[:, None] + v * ts[None, :])
    dp = params.K * np.sin(xi)
    dp[:, 0] = 0.0
    return ts, xi, dp
