import math

import numpy as np
import pytest
from scipy import integrate

from krqr import analytic
from krqr.analytic import (
    averaged_observables,
    broad_diffusion_energy,
    csbw_map,
    damping_time,
    filter_approx,
    filter_function,
    kick_sum,
    narrow_antiresonant_energy,
    narrow_resonant_energy,
    observable_series,
    plane_wave_energy,
    ratchet_momentum,
    reconstruct_density,
    reconstruct_distribution,
    slice_trajectories,
)
from krqr.core import ObservableSeries, SimParams
from krqr.ensembles import (
    QuadratureSpec,
    csbw_weights,
    default_xi_grid,
    make_bragg_superposition,
    make_plane_wave,
    make_square,
)
from krqr.errors import (
    AntiResonantTransportWarning,
    NotResonantError,
    OutOfLobeError,
    SeriesTooShortError,
)
from krqr.propagator import evolve_observables

TWO_PI = 2 * math.pi
P2 = SimParams.resonant(K=10.0, ell=2, n_kicks=30)
P1 = SimParams.resonant(K=10.0, ell=1, n_kicks=30)


class TestCSBWMap:
    def test_maximal_transfer_each_kick(self):
        st = csbw_map(np.pi / 2, 0.0, 0.0, P2, 3)
        assert st.p == pytest.approx(30.0, abs=1e-9)

    def test_node_slice_gets_nothing(self):
        st = csbw_map(0.0, -0.5, 1.3, P2, 7)
        assert st.p == pytest.approx(1.3, abs=1e-9)

    def test_antiresonant_cancellation(self):
        st = csbw_map(np.pi / 2, 0.0, 0.0, P1, 2)
        assert st.p == pytest.approx(0.0, abs=1e-9)

    def test_energy_from_momentum(self):
        st = csbw_map(1.1, 0.1, 2.0, P2, 5)
        assert st.e == pytest.approx(0.5 * (st.p**2 - 4.0))

    def test_position_translates(self):
        st = csbw_map(0.3, 0.25, 0.0, P1, 1)
        v = TWO_PI * 0.75
        expected = (0.3 + v + np.pi) % TWO_PI - np.pi
        assert st.xi == pytest.approx(expected)

    def test_requires_resonance(self):
        p = SimParams(K=10.0, kbar=1.0, n_kicks=1, ladder_half_width=32)
        with pytest.raises(NotResonantError):
            csbw_map(0.0, 0.0, 0.0, p, 1)

    @pytest.mark.parametrize("beta", [0.0, 0.125, 0.3, -0.49, -0.5])
    def test_kick_sum_telescopes(self, beta):
        # P(t) - P(t-1) = K sin(xi0 + v t) exactly
        v = float(analytic.v_beta(P1, beta))
        xi0 = 0.7
        for t in range(1, 21):
            delta = kick_sum(xi0, v, t) - kick_sum(xi0, v, t - 1)
            assert delta == pytest.approx(math.sin(xi0 + v * t), abs=1e-9)

    def test_kick_sum_matches_brute_force(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            xi0 = rng.uniform(-np.pi, np.pi)
            v = rng.uniform(-10, 10)
            t = int(rng.integers(0, 40))
            brute = sum(math.sin(xi0 + v * s) for s in range(1, t + 1))
            assert kick_sum(xi0, v, t) == pytest.approx(brute, abs=1e-9)


class TestPlaneWaveEnergy:
    def test_ballistic(self):
        assert plane_wave_energy(7, 0, 0.0, P2) == pytest.approx(1225.0)

    def test_antiresonant_even(self):
        assert plane_wave_energy(6, 0, 0.0, P1) == pytest.approx(0.0)

    def test_antiresonant_odd(self):
        assert plane_wave_energy(5, 0, 0.0, P1) == pytest.approx(25.0)

    def test_rest_energy_offset(self):
        e = plane_wave_energy(0, 2, 0.1, P2)
        assert e == pytest.approx(P2.kbar**2 * 2.1**2 / 2)

    def test_generic_beta_formula(self):
        t, beta = 5, 0.1
        v = TWO_PI * (beta + 0.5)
        expected = 25.0 * math.sin(v * t / 2) ** 2 / math.sin(v / 2) ** 2
        p = SimParams.resonant(K=10.0, ell=1, n_kicks=5)
        assert plane_wave_energy(t, 0, beta, p) - plane_wave_energy(
            0, 0, beta, p) == pytest.approx(expected)

    def test_against_numeric_engine(self):
        beta = 0.1
        p = SimParams.resonant(K=10.0, ell=1, n_kicks=5)
        s = evolve_observables(make_plane_wave(0, beta, p), p)
        for t in range(6):
            assert s.mean_e[t] == pytest.approx(
                plane_wave_energy(t, 0, beta, p), rel=1e-8, abs=1e-9)


class TestRatchetMomentum:
    def test_quarter_phase_no_current(self):
        assert ratchet_momentum(9, np.pi / 2, P2) == pytest.approx(
            -P2.kbar / 2, abs=1e-12)

    def test_full_current_negative_direction(self):
        assert ratchet_momentum(10, 0.0, P2) == pytest.approx(-TWO_PI - 50)

    def test_full_current_positive_direction(self):
        assert ratchet_momentum(10, np.pi, P2) == pytest.approx(-TWO_PI + 50)

    def test_odd_order_warns_no_transport(self):
        with pytest.warns(AntiResonantTransportWarning):
            value = ratchet_momentum(4, np.pi, P1)
        # the closed form evaluates regardless; dynamics tested elsewhere
        assert value == pytest.approx(-np.pi + 20)


class TestFilterFunction:
    def test_resonant_center_t_squared(self):
        assert filter_function(0.0, 13, 2) == pytest.approx(169.0)

    def test_odd_order_alternation(self):
        assert filter_function(0.0, 8, 1) == pytest.approx(0.0, abs=1e-20)
        assert filter_function(0.0, 9, 1) == pytest.approx(1.0)

    @pytest.mark.parametrize("ell,t", [(2, 8), (2, 25), (1, 60)])
    def test_first_zero_of_central_lobe(self, ell, t):
        beta_res = 0.0 if ell % 2 == 0 else 0.5 - 1e-12
        offset = 1.0 / (ell * t)
        # zero of the numerator one lobe away from the resonant beta
        val = filter_function(beta_res - offset, t, ell)
        assert val / t**2 < 1e-15

    def test_nonnegative_everywhere(self):
        beta = np.linspace(-0.5, 0.5, 2001, endpoint=False)
        for ell in (1, 2, 3):
            assert np.all(filter_function(beta, 17, ell) >= 0)

    def test_parseval_mass(self):
        # integral over the full zone is exactly t for any order
        beta = np.linspace(-0.5, 0.5, 4096, endpoint=False) + 0.5 / 4096
        for ell, t in [(1, 12), (2, 9)]:
            mass = filter_function(beta, t, ell).mean()
            assert mass == pytest.approx(t, rel=1e-12)


class TestFilterApprox:
    def test_center(self):
        assert filter_approx(0.0, 9) == pytest.approx(81.0)

    def test_zero_at_half_lobe(self):
        t = 8
        assert filter_approx(1 / (2 * t), t) / t**2 < 1e-15

    def test_out_of_lobe_raises(self):
        with pytest.raises(OutOfLobeError):
            filter_approx(0.2, 8)

    def test_tracks_exact_filter_in_central_lobe(self):
        t = 8
        beta = np.linspace(-1 / (2 * t), 1 / (2 * t), 501)
        exact = filter_function(beta, t, 2)
        approx = filter_approx(beta, t)
        assert np.max(np.abs(approx - exact)) / t**2 < 0.1


class TestNarrowEnergies:
    def test_resonant_early_matches_plane_wave_rate(self):
        delta = 0.04
        e1 = narrow_resonant_energy(1, delta, P2)
        e0 = narrow_resonant_energy(0, delta, P2)
        assert e1 - e0 == pytest.approx(25.0, rel=2e-3)

    def test_resonant_rate_halves_by_lobe_edge(self):
        delta = 0.04
        t = int(1 / delta)
        gain = narrow_resonant_energy(t, delta, P2) \
            - narrow_resonant_energy(0, delta, P2)
        assert gain == pytest.approx(12.5 * t * t, rel=1e-6)

    def test_diffusive_tail_value(self):
        delta = 0.04
        p = SimParams.resonant(K=10.0, ell=2, n_kicks=200)
        gain = narrow_resonant_energy(200, delta, p) \
            - narrow_resonant_energy(0, delta, p)
        assert gain == pytest.approx(62500.0)

    def test_resonant_requires_even_order(self):
        with pytest.raises(NotResonantError):
            narrow_resonant_energy(5, 0.04, P1)

    def test_antiresonant_small_width_limit(self):
        e1 = narrow_antiresonant_energy(1, 1e-9, P1)
        e0 = narrow_antiresonant_energy(0, 1e-9, P1)
        assert e1 - e0 == pytest.approx(25.0, rel=1e-9)

    def test_antiresonant_asymptote(self):
        val = narrow_antiresonant_energy(10_001, 0.04, P1)
        assert val == pytest.approx(12.5, rel=1e-3)

    def test_antiresonant_sinc_zero(self):
        # delta * t = 2 sits exactly on a sinc node
        assert narrow_antiresonant_energy(50, 0.04, P1) == pytest.approx(
            P1.kbar**2 * 0.04**2 / 24 + 12.5)

    def test_antiresonant_requires_odd_order(self):
        with pytest.raises(NotResonantError):
            narrow_antiresonant_energy(5, 0.04, P2)

    def test_recovers_plane_wave_alternation(self):
        for t in range(1, 12):
            got = narrow_antiresonant_energy(t, 1e-12, P1)
            expected = 25.0 if t % 2 else 0.0
            assert got == pytest.approx(expected, abs=1e-6)


class TestDampingTime:
    def test_paper_values(self):
        assert damping_time(2, 0.04) == pytest.approx(25.0)
        assert damping_time(1, 0.04) == pytest.approx(50.0)
        assert damping_time(1, 0.02) == pytest.approx(100.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            damping_time(0, 0.04)
        with pytest.raises(ValueError):
            damping_time(1, 0.0)


class TestBroadDiffusion:
    def test_rate(self):
        assert broad_diffusion_energy(10, 10.0) == pytest.approx(250.0)

    def test_zero_kicks(self):
        assert broad_diffusion_energy(0, 10.0, e0=3.0) == pytest.approx(3.0)


def antiresonant_series(delta, t_max, params):
    e = [narrow_antiresonant_energy(t, delta, params) for t in range(t_max + 1)]
    return ObservableSeries(t=np.arange(t_max + 1),
                            mean_p=np.zeros(t_max + 1), mean_e=e)


class TestReconstruction:
    def test_constant_series_gives_zero(self):
        s = ObservableSeries(t=np.arange(6), mean_p=np.zeros(6),
                             mean_e=np.full(6, 2.5))
        beta = np.linspace(-0.5, 0.5, 101, endpoint=False)
        np.testing.assert_allclose(reconstruct_distribution(s, 10.0, beta),
                                   0.0, atol=1e-12)

    def test_series_too_short(self):
        s = ObservableSeries(t=[0, 1], mean_p=[0.0, 0.0], mean_e=[0.0, 25.0])
        with pytest.raises(SeriesTooShortError):
            reconstruct_distribution(s, 10.0, np.linspace(-0.4, 0.4, 11))

    def test_round_trip_width(self):
        delta = 0.02
        p = SimParams.resonant(K=10.0, ell=1, n_kicks=100)
        series = antiresonant_series(delta, 100, p)
        beta = np.linspace(-0.5, 0.5, 4001, endpoint=False)
        dens = reconstruct_density(series, p.K, beta)
        half = dens.max() / 2
        above = beta[dens >= half]
        width = above.max() - above.min()
        assert width == pytest.approx(delta, rel=0.10)

    def test_l2_error_shrinks_with_time(self):
        delta = 0.02
        p = SimParams.resonant(K=10.0, ell=1, n_kicks=200)
        beta = np.linspace(-0.5, 0.5, 2001, endpoint=False)
        truth = np.where(np.abs(beta) <= delta / 2, 1 / delta, 0.0)
        db = beta[1] - beta[0]
        errors = []
        for t_max in (25, 50, 100, 200):
            series = antiresonant_series(delta, t_max, p)
            dens = reconstruct_density(series, p.K, beta)
            errors.append(np.sqrt(np.sum((dens - truth) ** 2) * db))
        assert errors == sorted(errors, reverse=True)

    def test_density_normalized(self):
        p = SimParams.resonant(K=10.0, ell=1, n_kicks=60)
        series = antiresonant_series(0.02, 60, p)
        beta = np.linspace(-0.5, 0.5, 1001, endpoint=False)
        dens = reconstruct_density(series, p.K, beta)
        assert np.sum(dens) * (beta[1] - beta[0]) == pytest.approx(1.0)
        assert np.all(dens >= 0)


class TestAveragedObservables:
    def test_plane_wave_reproduces_closed_form(self):
        for beta0, ell in [(0.0, 2), (0.0, 1), (0.1, 1), (0.3, 2)]:
            p = SimParams.resonant(K=10.0, ell=ell, n_kicks=12)
            ens = make_plane_wave(0, beta0, p)
            dist = csbw_weights(ens, default_xi_grid(), kbar=p.kbar)
            for t in (0, 3, 12):
                _, e = averaged_observables(dist, p, t)
                assert e == pytest.approx(plane_wave_energy(t, 0, beta0, p),
                                          rel=1e-10, abs=1e-12)

    def test_ratchet_reproduces_current(self):
        ens = make_bragg_superposition(0.6, 0, P2)
        dist = csbw_weights(ens, default_xi_grid(), kbar=P2.kbar)
        for t in (1, 7, 30):
            pt, _ = averaged_observables(dist, P2, t)
            assert pt == pytest.approx(ratchet_momentum(t, 0.6, P2),
                                       rel=1e-12)

    def test_square_matches_independent_filter_quadrature(self):
        delta, t = 0.04, 8
        p = SimParams.resonant(K=10.0, ell=2, n_kicks=8)
        ens = make_square(delta, quad=QuadratureSpec(n_beta=2048), params=p)
        dist = csbw_weights(ens, default_xi_grid(), kbar=p.kbar)
        _, e = averaged_observables(dist, p, t)
        # oracle: (K^2 / 4 delta) * integral of the filter over the support
        val, _ = integrate.quad(
            lambda b: math.sin(2 * math.pi * b * t) ** 2
            / math.sin(2 * math.pi * b) ** 2 if b else t * t,
            -delta / 2, delta / 2, limit=200)
        expected = dist.e0 + 25.0 / delta * val
        assert e == pytest.approx(expected, rel=1e-7)

    def test_requires_momentum_metadata(self):
        ens = make_plane_wave(0, 0.0, P2)
        dist = csbw_weights(ens)
        with pytest.raises(ValueError):
            averaged_observables(dist, P2, 3)

    def test_series_matches_pointwise_calls(self):
        ens = make_bragg_superposition(0.2, 0, P2)
        dist = csbw_weights(ens, default_xi_grid(), kbar=P2.kbar)
        series = observable_series(dist, P2, n_kicks=9)
        for t in (0, 4, 9):
            pt, et = averaged_observables(dist, P2, t)
            assert series.mean_p[t] == pytest.approx(pt, rel=1e-14, abs=1e-14)
            assert series.mean_e[t] == pytest.approx(et, rel=1e-14, abs=1e-14)


class TestOracleAgreementSmall:
    """Numeric and analytic engines on the same ensembles."""

    @pytest.mark.parametrize("case", ["plane", "ratchet", "square", "bragg_shift"])
    def test_energy_agreement(self, case):
        p = SimParams.resonant(K=10.0, ell=2, n_kicks=20)
        if case == "plane":
            ens = make_plane_wave(0, 0.17, p)
        elif case == "ratchet":
            ens = make_bragg_superposition(1.0, 0, p)
        elif case == "bragg_shift":
            ens = make_bragg_superposition(1.0, 3, p)
        else:
            ens = make_square(0.04, quad=QuadratureSpec(n_beta=128), params=p)
        numeric = evolve_observables(ens, p)
        dist = csbw_weights(ens, default_xi_grid(), kbar=p.kbar)
        ana = observable_series(dist, p)
        scale = np.maximum(np.abs(numeric.mean_e), 1e-12)
        assert np.max(np.abs(numeric.mean_e - ana.mean_e) / scale) < 1e-9
        assert np.max(np.abs(numeric.mean_p - ana.mean_p)) < 1e-9


class TestSliceTrajectories:
    def test_shapes_and_first_kick(self):
        ts, xi, dp = slice_trajectories([0.0, np.pi / 2], P2, 5)
        assert xi.shape == (2, 6) and dp.shape == (2, 6)
        assert np.all(dp[:, 0] == 0.0)
        # at full resonance every slice returns to its birth position
        np.testing.assert_allclose(xi[1], np.pi / 2, atol=1e-9)
        np.testing.assert_allclose(dp[1, 1:], 10.0, atol=1e-9)
