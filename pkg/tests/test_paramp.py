import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import constants

from impa import paramp
from impa.errors import (BelowThreshold, DivergentInductance, DomainError, IdlerOutOfRange,
                         InvalidGeometry, InvalidSpec, InvalidTarget, NearInstability)

TWO_PI = 2 * math.pi


class TestTuning:
    def test_zero_flux(self, device):
        assert paramp.tuning_curve(device, 0.0) == pytest.approx(9.58e9, rel=1e-3)
        want = 1 / (TWO_PI * math.sqrt(4e-12 * 69e-12))
        assert paramp.tuning_curve(device, 0.0) == pytest.approx(want, rel=1e-15)

    def test_flux_03(self, device):
        want = 1 / (TWO_PI * math.sqrt(4e-12 * 69e-12 / math.cos(0.3 * math.pi)))
        assert paramp.tuning_curve(device, 0.3) == pytest.approx(want, rel=1e-14)
        assert paramp.tuning_curve(device, 0.3) == pytest.approx(7.34e9, rel=2e-3)

    def test_half_flux_diverges(self, device):
        with pytest.raises(DivergentInductance):
            paramp.squid_inductance(device, 0.5)

    def test_asymmetry_regularizes(self, device):
        r = device.replace(asymmetry=0.01)
        assert paramp.squid_inductance(r, 0.5) == pytest.approx(69e-12 / 0.01, rel=1e-12)

    def test_periodic_and_even(self, device):
        f = np.linspace(-0.45, 0.45, 19)
        np.testing.assert_allclose(paramp.tuning_curve(device, f), paramp.tuning_curve(device, -f), rtol=1e-15)
        np.testing.assert_allclose(paramp.tuning_curve(device, f), paramp.tuning_curve(device, f + 1), rtol=1e-12)

    def test_geometric_inductance_lowers_frequency(self, device):
        assert paramp.tuning_curve(device.replace(geometric_inductance=10e-12), 0.2) < paramp.tuning_curve(device, 0.2)

    @pytest.mark.parametrize("kw", [dict(capacitance=0.0), dict(asymmetry=1.0), dict(pump_amplitude=1.0),
                                    dict(geometric_inductance=-1e-12), dict(pump_frequency=-1.0)])
    def test_invalid(self, device, kw):
        with pytest.raises(InvalidSpec):
            device.replace(**kw)


class TestPumpCoupling:
    def test_zero_modulation(self, device):
        assert paramp.pump_coupling_lambda(device.replace(flux=0.3), 0.0) == 0.0

    def test_energies(self, device):
        assert device.josephson_energy / constants.h == pytest.approx(2.369e12, rel=1e-3)
        assert device.charging_energy / constants.h == pytest.approx(4.84e6, rel=2e-3)

    def test_example_value(self, device):
        lam = paramp.pump_coupling_lambda(device.replace(flux=0.3), 0.01)
        ej, ec = 2.369e12, 4.84e6
        F = 0.3 * math.pi
        oracle = 0.01 * ej * math.sqrt(math.sin(F) * math.tan(F) * ec / (8 * ej))
        assert lam / TWO_PI == pytest.approx(oracle, rel=2e-3)
        assert lam / TWO_PI == pytest.approx(12.6e6, rel=5e-3)

    def test_lc_identity(self, device):
        ej, ec = device.josephson_energy, device.charging_energy
        assert math.sqrt(8 * ej * ec) / constants.hbar == pytest.approx(paramp.resonant_frequency(device, 0.0), rel=1e-12)

    @given(st.floats(0.01, 0.45), st.floats(1e-4, 0.05))
    @settings(max_examples=50, deadline=None)
    def test_matches_rotating_wave_map(self, flux, df):
        # lambda(delta_f) equals eps * w0(flux) / 8 with eps = delta_f tan(pi flux)
        r = paramp.PumpedResonator(4e-12, 69e-12, flux=flux)
        eps = paramp.modulation_from_flux(r, df)
        assert paramp.pump_coupling_lambda(r, df) == pytest.approx(eps * paramp.resonant_frequency(r) / 8, rel=1e-12)

    def test_from_pump_amplitude(self, device):
        r = device.replace(flux=0.2, pump_amplitude=0.1)
        assert paramp.pump_coupling_lambda(r) == pytest.approx(paramp.lambda_from_modulation(r), rel=1e-12)

    def test_flux_domain(self, device):
        with pytest.raises(DomainError):
            paramp.pump_coupling_lambda(device.replace(flux=0.6), 0.01)


class TestKappa:
    def test_values(self, device):
        assert paramp.kappa_from_environment(device, paramp.ConstantImpedance(18.0)) / TWO_PI == pytest.approx(2.21e9, rel=1e-3)
        assert paramp.kappa_from_environment(device, paramp.ConstantImpedance(50.0)) / TWO_PI == pytest.approx(0.80e9, abs=5e6)
        q = paramp.resonant_frequency(device, 0.0) / paramp.kappa_from_environment(device, 18.0)
        assert 2.5 < q < 4.5

    def test_large_capacitance(self, device):
        assert paramp.kappa_from_environment(device.replace(capacitance=1.0), 18.0) < 1e-1

    def test_invalid(self, device):
        with pytest.raises(InvalidGeometry):
            paramp.ConstantImpedance(0.0)
        with pytest.raises(InvalidGeometry):
            paramp.kappa_from_environment(device, -1.0)


def rwa_oracle(w, kappa, lam, delta):
    """Direct 2x2 input-output solution in the rotating frame."""
    m = np.array([[kappa / 2 - 1j * (w - delta), -2j * lam], [2j * lam, kappa / 2 - 1j * (w + delta)]])
    # a = M^-1 sqrt(kappa) [a_in, a_in_idler^dag]; a_out = sqrt(kappa) a - a_in
    inv = np.linalg.inv(m)
    gs = abs(kappa * inv[0, 0] - 1) ** 2
    gi = abs(kappa * inv[0, 1]) ** 2
    return gs, gi


class TestRwaGain:
    def test_no_pump_is_unity(self):
        w = np.linspace(-5e10, 5e10, 1001)
        gs, gi = paramp.rwa_gain(w, 1.4e10, 0.0, 3e9)
        np.testing.assert_allclose(gs, 1.0, atol=1e-12)
        np.testing.assert_allclose(gi, 0.0, atol=1e-30)

    def test_twenty_db(self):
        k = 1.0
        gs, _ = paramp.rwa_gain(0.0, k, k / 4 * math.sqrt(9 / 11))
        assert gs == pytest.approx(100.0, rel=1e-12)

    def test_half_linewidth_detuned(self):
        k = 1.0
        gs, gi = paramp.rwa_gain(k / 2, k, k / 4 * math.sqrt(9 / 11))
        assert gs == pytest.approx(1.701, abs=1e-3)
        assert gi == pytest.approx(0.701, abs=1e-3)

    @given(st.floats(1e6, 1e11), st.floats(0, 0.999), st.floats(-5, 5), st.floats(-2, 2))
    @settings(max_examples=200, deadline=None)
    def test_against_matrix_oracle(self, kappa, frac, wk, dk):
        lam = frac * kappa / 4
        gs, gi = paramp.rwa_gain(wk * kappa, kappa, lam, dk * kappa)
        os_, oi = rwa_oracle(wk * kappa, kappa, lam, dk * kappa)
        assert gs == pytest.approx(os_, rel=1e-9)
        assert gi == pytest.approx(oi, rel=1e-9, abs=1e-15)

    @given(st.floats(1e6, 1e11), st.floats(0, 0.999), st.floats(-5, 5), st.floats(-2, 2))
    @settings(max_examples=200, deadline=None)
    def test_manley_rowe(self, kappa, frac, wk, dk):
        gs, gi = paramp.rwa_gain(wk * kappa, kappa, frac * kappa / 4, dk * kappa)
        assert gs - gi == pytest.approx(1.0, abs=1e-9 * max(1.0, gs))

    def test_symmetric_in_offset(self):
        w = np.linspace(0, 3, 31)
        np.testing.assert_allclose(paramp.rwa_gain(w, 1.0, 0.2)[0], paramp.rwa_gain(-w, 1.0, 0.2)[0], rtol=1e-14)

    def test_instability_warning(self):
        with pytest.warns(NearInstability):
            paramp.rwa_gain(0.0, 1.0, 0.25)

    def test_invalid_kappa(self):
        with pytest.raises(DomainError):
            paramp.rwa_gain(0.0, 0.0, 0.1)


class TestPumpStrength:
    def test_unity(self):
        assert paramp.pump_strength_for_gain(1.0, 3.0) == 0.0

    def test_hundred(self):
        assert paramp.pump_strength_for_gain(100.0, 1.0) == pytest.approx(0.226134, abs=1e-6)

    @pytest.mark.parametrize("g", [10.0, 31.6, 100.0, 1000.0])
    def test_roundtrip(self, g):
        k = 1.3e10
        gs, _ = paramp.rwa_gain(0.0, k, paramp.pump_strength_for_gain(g, k))
        assert gs == pytest.approx(g, rel=1e-9)

    def test_invalid(self):
        with pytest.raises(InvalidTarget):
            paramp.pump_strength_for_gain(0.5, 1.0)


class TestBandwidth:
    def test_flat(self):
        f = np.linspace(1, 2, 11)
        p = paramp.GainProfile(f, np.full(11, 1000.0), np.zeros(11))
        assert paramp.gain_bandwidth(p, 20.0) == pytest.approx(1.0)

    def test_symmetric_rwa(self, device):
        r = device.replace(pump_frequency=2 * 8e9)
        k = 2e9
        f = np.linspace(7e9, 9e9, 4001)
        p = paramp.rwa_profile(r, k, f, lam=paramp.pump_strength_for_gain(100, k), delta=0.0)
        i = int(np.argmax(p.gain))
        assert p.frequencies[i] == pytest.approx(8e9, abs=1e6)
        g = 10 * np.log10(p.gain)
        lo = np.interp(15, g[:i + 1], f[:i + 1])
        hi = np.interp(-15, -g[i:], f[i:])
        assert 8e9 - lo == pytest.approx(hi - 8e9, rel=1e-6)
        assert paramp.gain_bandwidth(p, 15.0) == pytest.approx(hi - lo, rel=1e-9)

    def test_analytic_bandwidth(self):
        # for delta = 0, G(w) is a closed form in w; invert it for the 15-dB edges
        k, g0 = 1.0, 100.0
        lam = paramp.pump_strength_for_gain(g0, k)
        f = np.linspace(-1, 1, 20001) / TWO_PI
        half_pump = 0.0
        gs, gi = paramp.rwa_gain(TWO_PI * f - half_pump, k, lam)
        p = paramp.GainProfile(f, gs, gi)
        a = k * k / 4 - 4 * lam * lam
        # G = 1 + (2 k lam)^2 / ((a - w^2)^2 + k^2 w^2)
        t = 10 ** 1.5
        c = (2 * k * lam) ** 2 / (t - 1)
        # solve w^4 + (k^2 - 2a) w^2 + a^2 - c = 0
        w2 = (-(k * k - 2 * a) + math.sqrt((k * k - 2 * a) ** 2 - 4 * (a * a - c))) / 2
        assert paramp.gain_bandwidth(p, 15.0) == pytest.approx(2 * math.sqrt(w2) / TWO_PI, rel=1e-6)

    def test_below_threshold(self):
        p = paramp.GainProfile(np.array([1.0, 2.0]), np.array([2.0, 3.0]), np.zeros(2))
        with pytest.raises(BelowThreshold):
            paramp.gain_bandwidth(p, 20.0)


@pytest.fixture(scope="module")
def high_q():
    """Resonator with Q = 20 against a constant environment, pumped at 2 w0."""
    r = paramp.PumpedResonator(4e-12, 69e-12, flux=0.2)
    w0 = paramp.resonant_frequency(r)
    z0 = 20 / (w0 * r.capacitance)
    return r.replace(pump_frequency=2 * w0 / TWO_PI), paramp.ConstantImpedance(z0)


class TestEmbedded:
    def test_no_pump_unity(self, device, design_profile):
        r = device.replace(flux=0.2, pump_frequency=17e9)
        f = np.linspace(6e9, 11e9, 101)
        for env in (paramp.ConstantImpedance(18.0), paramp.TaperEnvironment(design_profile)):
            gs, gi = paramp.embedded_response(r, env, f)
            np.testing.assert_allclose(gs, 1.0, atol=1e-12)
            np.testing.assert_allclose(gi, 0.0, atol=1e-30)

    @pytest.mark.parametrize("kind", ["constant", "taper"])
    def test_manley_rowe(self, device, design_profile, kind):
        r = device.replace(flux=0.2, pump_frequency=17.2e9, pump_amplitude=0.3)
        env = paramp.ConstantImpedance(18.0) if kind == "constant" else paramp.TaperEnvironment(design_profile)
        f = np.linspace(7e9, 10e9, 61)
        gs, gi = paramp.embedded_response(r, env, f)
        fi = 17.2e9 - f
        np.testing.assert_allclose(gs - 1, gi * f / fi, rtol=1e-9, atol=1e-12)

    def test_lumped_limit(self, high_q):
        r, env = high_q
        w0 = paramp.resonant_frequency(r)
        kappa = paramp.kappa_from_environment(r, env)
        f = w0 / TWO_PI + np.linspace(-2, 2, 2001) * kappa / TWO_PI
        r = r.replace(pump_amplitude=paramp.tune_pump_amplitude(r, env, f, 20.0))
        emb = paramp.embedded_profile(r, env, f)
        rwa = paramp.rwa_profile(r, kappa, f, lam=paramp.lambda_from_modulation(r))
        assert abs(10 * math.log10(emb.peak_gain / rwa.peak_gain)) < 0.5
        be = paramp.gain_bandwidth(emb, 10 * math.log10(emb.peak_gain) - 3)
        br = paramp.gain_bandwidth(rwa, 10 * math.log10(rwa.peak_gain) - 3)
        assert be == pytest.approx(br, rel=0.05)

    def test_tabulated_matches_taper_route(self, device, design_profile):
        r = device.replace(flux=0.2, pump_frequency=17.2e9, pump_amplitude=0.3)
        env = paramp.TaperEnvironment(design_profile)
        grid = np.linspace(6e9, 11.2e9, 5201)
        tab = env.tabulate(grid)
        f = np.linspace(7e9, 10e9, 31)
        np.testing.assert_allclose(paramp.embedded_gain(r, tab, f), paramp.embedded_gain(r, env, f), rtol=1e-4)

    def test_tune_hits_target(self, device, design_profile):
        r = device.replace(flux=0.2)
        r = r.replace(pump_frequency=2 * paramp.tuning_curve(r, 0.2))
        env = paramp.TaperEnvironment(design_profile)
        f = np.linspace(6e9, 11e9, 501)
        eps = paramp.tune_pump_amplitude(r, env, f, 20.0)
        p = paramp.embedded_profile(r.replace(pump_amplitude=eps), env, f)
        assert 10 * math.log10(p.peak_gain) == pytest.approx(20.0, abs=1e-9)

    def test_tune_unreachable(self, high_q):
        r, env = high_q
        f = np.linspace(7e9, 8e9, 11)
        with pytest.raises(InvalidTarget):
            paramp.tune_pump_amplitude(r, env, f, 80.0, eps_max=0.002)

    def test_idler_out_of_range(self, device):
        r = device.replace(flux=0.2, pump_frequency=10e9, pump_amplitude=0.1)
        with pytest.raises(IdlerOutOfRange):
            paramp.embedded_gain(r, paramp.ConstantImpedance(18.0), np.array([9e9, 11e9]))
        tab = paramp.TabulatedImpedance(np.array([4e9, 6e9]), np.array([18.0, 18.0]))
        with pytest.raises(IdlerOutOfRange):
            paramp.embedded_gain(r, tab, np.array([5e9, 5.5e9, 6.5e9]))

    def test_no_pump_frequency(self, device):
        with pytest.raises(InvalidSpec):
            paramp.embedded_gain(device, paramp.ConstantImpedance(18.0), 8e9)


class TestSaturation:
    def test_values(self):
        assert paramp.saturation_scaling(4e-12, 50, 4e-12, 50) == 0.0
        assert paramp.saturation_scaling(4e-12, 50, 4e-12, 18) == pytest.approx(4.437, abs=1e-3)
        assert paramp.saturation_scaling(1e-12, 50, 10e-12, 50) == pytest.approx(10.0, abs=1e-12)

    def test_invalid(self):
        with pytest.raises(InvalidGeometry):
            paramp.saturation_scaling(0, 1, 1, 1)

    @pytest.mark.parametrize("flux", [0.25, 0.35])
    def test_tune_finds_narrow_window(self, device, design_profile, flux):
        # the usable eps window below oscillation is narrow here; a coarse scan steps over it
        r = device.replace(flux=flux)
        r = r.replace(pump_frequency=2 * paramp.tuning_curve(r, flux))
        env = paramp.TaperEnvironment(design_profile)
        f = np.linspace(6e9, 11e9, 2001)
        eps = paramp.tune_pump_amplitude(r, env, f, 20.0)
        p = paramp.embedded_profile(r.replace(pump_amplitude=eps), env, f)
        assert 10 * math.log10(p.peak_gain) == pytest.approx(20.0, abs=1e-9)
