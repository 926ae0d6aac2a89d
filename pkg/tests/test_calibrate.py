import math
import time
import warnings

import numpy as np
import pytest
from scipy.optimize import least_squares

from impa import calibrate, paramp
from impa.errors import DegenerateData, DomainError, NoCompression, NonMonotonic, PoorFit

TWO_PI = 2 * math.pi
TRUE = {"josephson_inductance": 69e-12, "capacitance": 4e-12}
GUESS = {"josephson_inductance": 60e-12, "capacitance": 3.5e-12, "flux_scale": 0.45, "flux_offset": 0.01}


def synth_sweep(noise=0.0, scale=0.5, offset=0.0, n=61, seed=11, bias_span=0.9):
    rng = np.random.default_rng(seed)
    r = paramp.PumpedResonator(4e-12, 69e-12)
    bias = np.linspace(-bias_span, bias_span, n)
    f = paramp.tuning_curve(r, scale * bias + offset)
    lw = np.full(n, 1 / (4e-12 * 18) / TWO_PI)
    f = f * (1 + noise * rng.standard_normal(n))
    lw = lw * (1 + noise * rng.standard_normal(n))
    return calibrate.FluxSweepData(bias, f, linewidth=lw)


class TestTuningFit:
    def test_noiseless(self):
        res = calibrate.fit_tuning_curve(synth_sweep(), GUESS, environment_impedance=18.0)
        assert res.converged
        for k, v in TRUE.items():
            assert res[k] == pytest.approx(v, rel=1e-6)
        assert res["flux_scale"] == pytest.approx(0.5, rel=1e-6)

    def test_noisy(self):
        res = calibrate.fit_tuning_curve(synth_sweep(noise=1e-3), GUESS, environment_impedance=18.0)
        for k, v in TRUE.items():
            assert res[k] == pytest.approx(v, rel=0.02)
        assert res.stderr["josephson_inductance"] > 0

    def test_runtime(self):
        t0 = time.perf_counter()
        calibrate.fit_tuning_curve(synth_sweep(noise=1e-3), GUESS, environment_impedance=18.0)
        assert time.perf_counter() - t0 < 5.0

    def test_bias_units_do_not_matter(self):
        a = calibrate.fit_tuning_curve(synth_sweep(), GUESS, environment_impedance=18.0)
        d = synth_sweep()
        milli = calibrate.FluxSweepData(d.bias * 1000, d.frequency, linewidth=d.linewidth)
        guess = dict(GUESS, flux_scale=GUESS["flux_scale"] / 1000)
        b = calibrate.fit_tuning_curve(milli, guess, environment_impedance=18.0)
        for k in TRUE:
            assert b[k] == pytest.approx(a[k], rel=1e-8)
        assert b["flux_scale"] * 1000 == pytest.approx(a["flux_scale"], rel=1e-8)

    def test_fixed_capacitance_without_linewidth(self):
        d = synth_sweep()
        bare = calibrate.FluxSweepData(d.bias, d.frequency)
        guess = {k: v for k, v in GUESS.items() if k != "capacitance"}
        res = calibrate.fit_tuning_curve(bare, guess, fixed={"capacitance": 4e-12})
        assert res["josephson_inductance"] == pytest.approx(69e-12, rel=1e-6)
        assert res["capacitance"] == 4e-12

    def test_frequency_only_is_degenerate(self):
        d = synth_sweep()
        with pytest.raises(DegenerateData):
            calibrate.fit_tuning_curve(calibrate.FluxSweepData(d.bias, d.frequency), GUESS)

    def test_narrow_sweep_is_degenerate(self):
        r = paramp.PumpedResonator(4e-12, 69e-12)
        flux = np.linspace(0, 0.05, 21)
        d = calibrate.FluxSweepData(flux, paramp.tuning_curve(r, flux), linewidth=np.full(21, 2.2e9))
        with pytest.raises(DegenerateData):
            calibrate.fit_tuning_curve(d, dict(GUESS, flux_scale=1.0, flux_offset=0.0), environment_impedance=18.0)

    def test_narrow_sweep_is_ill_conditioned(self):
        params = dict(TRUE, geometric_inductance=1e-12, flux_scale=1.0, flux_offset=0.0, asymmetry=0.0)
        narrow = calibrate.tuning_normal_matrix_condition(np.linspace(0, 0.05, 21), params)
        wide = calibrate.tuning_normal_matrix_condition(np.linspace(-0.45, 0.45, 21), params)
        assert narrow > 1e3 * wide

    def test_matches_scipy(self):
        d = synth_sweep(noise=1e-3)
        res = calibrate.fit_tuning_curve(d, GUESS, environment_impedance=18.0)
        scale = calibrate._TUNING_SCALE

        def fun(p):
            f = calibrate._tuning_model_ghz(p, d.bias) - d.frequency / 1e9
            k = 1e3 / (TWO_PI * p[1] * 18.0) - d.linewidth / 1e9
            return np.concatenate([f, k])

        x0 = np.array([GUESS["josephson_inductance"], GUESS["capacitance"], 0.0,
                       GUESS["flux_scale"], GUESS["flux_offset"], 0.01]) / scale
        ref = least_squares(fun, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        for i, name in enumerate(calibrate.TUNING_PARAMS[:2]):
            assert res[name] == pytest.approx(ref.x[i] * scale[i], rel=1e-6)

    def test_too_few_rows(self):
        with pytest.raises(DegenerateData):
            calibrate.FluxSweepData(np.arange(3.0), np.arange(3.0))

    def test_unknown_parameter(self):
        with pytest.raises(DomainError):
            calibrate.fit_tuning_curve(synth_sweep(), dict(GUESS, colour=1.0), environment_impedance=18.0)


def synth_trace(f_r=6.633e9, kext=250e3, kint=59e3, span=20, n=801, noise=0.0, seed=5):
    f = f_r + np.linspace(-span, span, n) * (kext + kint)
    s = calibrate.reflection_model(f, f_r, kext, kint)
    rng = np.random.default_rng(seed)
    s = s + noise * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return f, s


class TestReflectionFit:
    def test_table_values(self):
        res = calibrate.fit_reflection_resonance(*synth_trace(noise=0.01))
        assert res["omega_r"] / TWO_PI == pytest.approx(6.633e9, rel=5e-3)
        assert res["kappa_r"] / TWO_PI == pytest.approx(309e3, rel=5e-3)

    def test_exact(self):
        res = calibrate.fit_reflection_resonance(*synth_trace())
        assert res["kappa_ext"] / TWO_PI == pytest.approx(250e3, rel=1e-9)
        assert res["kappa_int"] / TWO_PI == pytest.approx(59e3, rel=1e-8)

    def test_lossless_limit(self):
        f, s = synth_trace(kint=0.0)
        np.testing.assert_allclose(np.abs(s), 1.0, atol=1e-15)
        res = calibrate.fit_reflection_resonance(f, s)
        assert abs(res["kappa_int"]) / res["kappa_r"] < 1e-9

    def test_zero_span(self):
        with pytest.raises((PoorFit, calibrate.NonConvergence)):
            calibrate.fit_reflection_resonance(np.full(20, 6.6e9), np.ones(20, dtype=complex))

    def test_narrow_span(self):
        with pytest.raises(PoorFit):
            calibrate.fit_reflection_resonance(*synth_trace(span=1))

    def test_noise_only(self):
        rng = np.random.default_rng(2)
        f = np.linspace(6e9, 7e9, 200)
        s = 0.3 * (rng.standard_normal(200) + 1j * rng.standard_normal(200))
        with pytest.raises((PoorFit, calibrate.NonConvergence)):
            calibrate.fit_reflection_resonance(f, s)


class TestStark:
    KR = TWO_PI * 309e3

    def test_roundtrip(self):
        chi, n = TWO_PI * 0.2e6, 2.0
        d = 2 * chi * n
        g = 8 * chi * chi * n / self.KR
        c, nb = calibrate.chi_nbar_from_stark_dephasing(d, g, self.KR)
        assert c == pytest.approx(chi, rel=1e-12)
        assert nb == pytest.approx(n, rel=1e-12)

    def test_linearity(self):
        chi = TWO_PI * 0.2e6
        d = np.array([1.0, 2.0]) * 2 * chi
        g = 8 * chi * chi * np.array([1.0, 2.0]) / self.KR
        _, n = calibrate.chi_nbar_from_stark_dephasing(d, g, self.KR)
        assert n[1] == pytest.approx(2 * n[0], rel=1e-12)

    def test_zero_dephasing(self):
        with pytest.raises(DomainError):
            calibrate.chi_nbar_from_stark_dephasing(1e6, 0.0, self.KR)

    def test_table_fit(self):
        chi = TWO_PI * 0.2e6
        n = np.array([0.5, 1.0, 2.0, 4.0])
        data = calibrate.StarkDephasingData(np.array([-130.0, -127, -124, -121]), 2 * chi * n,
                                            8 * chi * chi * n / self.KR)
        res = calibrate.fit_stark_dephasing(data, self.KR, omega_r=TWO_PI * 6.633e9)
        assert res["chi"] == pytest.approx(chi, rel=1e-12)
        np.testing.assert_allclose(res.extras["n_bar"], n, rtol=1e-12)
        assert res.extras["p_device_dbm"][1] == pytest.approx(-140.7, abs=0.1)

    def test_too_few_rows(self):
        with pytest.raises(DegenerateData):
            calibrate.StarkDephasingData([1.0, 2.0], [1.0, 2.0], [1.0, 2.0])


class TestAttenuation:
    def test_exact(self):
        res = calibrate.fit_attenuation([(p, p - 70.0) for p in (-40.0, -30.0, -20.0)])
        assert res["attenuation"] == pytest.approx(70.0, abs=1e-12)
        assert res.residual_norm == pytest.approx(0.0, abs=1e-12)

    def test_noisy(self):
        rng = np.random.default_rng(4)
        src = np.linspace(-50, -10, 20)
        dev = src - 70.0 + rng.uniform(-0.2, 0.2, 20)
        assert calibrate.fit_attenuation(zip(src, dev))["attenuation"] == pytest.approx(70.0, abs=0.2)

    def test_single_pair(self):
        with pytest.raises(DegenerateData):
            calibrate.fit_attenuation([(-30.0, -100.0)])


def compression_curve(p1db=-111.5, g0=20.0):
    # G = G0 - 10 log10(1 + P/Ps); Ps chosen so the drop is 1 dB at p1db
    ps = calibrate.noise.dbm_to_watts(p1db) / (10 ** 0.1 - 1)
    p = np.linspace(-150, -100, 501)
    return list(zip(p, g0 - 10 * np.log10(1 + calibrate.noise.dbm_to_watts(p) / ps)))


class TestCompression:
    def test_target(self):
        assert calibrate.compression_point(compression_curve()) == pytest.approx(-111.5, abs=0.1)

    def test_flat(self):
        with pytest.raises(NoCompression):
            calibrate.compression_point([(p, 20.0) for p in np.linspace(-140, -100, 20)])

    def test_exact_sample(self):
        data = [(-130.0, 20.0), (-120.0, 20.0), (-115.0, 19.5), (-110.0, 19.0), (-100.0, 17.0)]
        assert calibrate.compression_point(data) == -110.0

    def test_unsorted_input(self):
        c = compression_curve()
        assert calibrate.compression_point(c[::-1]) == calibrate.compression_point(c)

    def test_gain_expansion_warns(self):
        data = [(-130.0, 20.0), (-125.0, 20.0), (-120.0, 20.0), (-115.0, 20.6), (-110.0, 18.0)]
        with pytest.warns(NonMonotonic):
            calibrate.compression_point(data)

    def test_too_few_points(self):
        with pytest.raises(DegenerateData):
            calibrate.compression_point([(-130.0, 20.0), (-100.0, 10.0)])


def test_fit_result_dict():
    res = calibrate.fit_attenuation([(0.0, -70.0), (1.0, -69.0)])
    d = res.to_dict()
    assert set(d) >= {"params", "residual_norm", "converged", "iterations"}
