"""Closed-form rate formulas: conservation, bounds, limits, envelopes."""

import math

import numpy as np
import pytest

from birefmzi.crystal import BirefringentCrystal, dn_dT_to_dk_dT
from birefmzi.fringe import expected_rates
from birefmzi.rates import (
    SpectrumParams,
    gaussian_decoherence_factor,
    rates_for_spectrum,
    rates_gaussian,
    rates_monochromatic,
    rates_sinc2,
    sinc2_visibility_factor,
)

FIG5_SIGMA = math.pi / math.sqrt(math.log(2.0)) * 0.05  # rad/ps


def make_crystal(**overrides):
    params = dict(
        length_mm=8.0,
        dny_dT=1.027e-5,
        dnz_dT=1.680e-5,
        wavelength_nm=1550.0,
        group_delay_mismatch=0.947,
        static_phase_rad=0.3,
    )
    params.update(overrides)
    return BirefringentCrystal.from_dn_dT(**params)


class TestConservationAndBounds:
    def test_singles_sum_to_one(self):
        rng = np.random.default_rng(2)
        crystal = make_crystal()
        for _ in range(10_000):
            delta = rng.uniform(0.0, math.pi)
            phi = rng.uniform(-math.pi, math.pi, 3)
            r = rates_monochromatic(delta, *phi)
            assert abs(r.r4 + r.r5 - 1.0) < 1e-12
        for _ in range(100):
            delta = rng.uniform(0.0, math.pi)
            dT = rng.uniform(-30.0, 30.0)
            g = rates_gaussian(delta, crystal, FIG5_SIGMA, dT)
            assert abs(g.r4 + g.r5 - 1.0) < 1e-12

    def test_rates_bounded(self):
        rng = np.random.default_rng(9)
        n = 100_000
        deltas = rng.uniform(0.0, math.pi, n)
        phis = rng.uniform(-math.pi, math.pi, (n, 3))
        for delta, phi in zip(deltas, phis):
            r = rates_monochromatic(delta, *phi)
            assert -1e-12 <= r.r4 <= 1.0 + 1e-12
            assert -1e-12 <= r.r5 <= 1.0 + 1e-12
            assert -1e-12 <= r.r45 <= 1.0 + 1e-12

    def test_broadband_rates_bounded(self):
        rng = np.random.default_rng(10)
        crystal = make_crystal()
        for _ in range(1000):
            delta = rng.uniform(0.0, math.pi)
            dT = rng.uniform(-50.0, 50.0)
            sigma = rng.uniform(0.0, 2.0)
            r = rates_gaussian(delta, crystal, sigma, dT)
            assert -1e-12 <= r.r4 <= 1.0 + 1e-12
            assert -1e-12 <= r.r45 <= 1.0 + 1e-12


class TestMonochromaticLimit:
    def test_gaussian_converges_quadratically(self):
        crystal = make_crystal()
        delta = math.pi / 3
        diffs = []
        for factor in (1e-2, 1e-3, 1e-4):
            sigma = FIG5_SIGMA * factor
            worst = 0.0
            for dT in np.linspace(-20.0, 20.0, 41):
                g = rates_gaussian(delta, crystal, sigma, dT)
                m = rates_monochromatic(
                    delta,
                    crystal.phase_at("y", 0.0, dT),
                    crystal.phase_at("z", 0.0, dT),
                )
                worst = max(worst, abs(g.r4 - m.r4), abs(g.r45 - m.r45))
            diffs.append(worst)
        # quadratic in sigma: each decade of width gains two decades
        assert diffs[1] == pytest.approx(diffs[0] * 1e-2, rel=0.05)
        assert diffs[2] == pytest.approx(diffs[1] * 1e-2, rel=0.05)
        # sup-norm agreement at 1e-4 of the nominal width
        assert diffs[2] < 1e-8


class TestDecoherenceFactor:
    def test_value_at_fig5_parameters(self):
        crystal = make_crystal(dny_dT=1.03e-5, dnz_dT=1.62e-5)
        mu = gaussian_decoherence_factor(crystal, FIG5_SIGMA)
        dls = 0.947 * 8.0 * FIG5_SIGMA
        assert mu == pytest.approx(math.exp(-0.25 * dls * dls), rel=1e-14)
        assert mu == pytest.approx(0.60, abs=0.01)

    def test_monotone_in_each_argument(self):
        mus = [
            gaussian_decoherence_factor(make_crystal(group_delay_mismatch=d), 0.2)
            for d in np.linspace(0.1, 3.0, 20)
        ]
        assert all(a > b for a, b in zip(mus, mus[1:]))
        mus = [
            gaussian_decoherence_factor(make_crystal(length_mm=length), 0.2)
            for length in np.linspace(1.0, 20.0, 20)
        ]
        assert all(a > b for a, b in zip(mus, mus[1:]))
        crystal = make_crystal()
        mus = [
            gaussian_decoherence_factor(crystal, s) for s in np.linspace(0.01, 1.0, 20)
        ]
        assert all(a > b for a, b in zip(mus, mus[1:]))


class TestSinc2Branches:
    def test_visibility_factor_long_crystal(self):
        crystal = make_crystal()
        assert sinc2_visibility_factor(crystal, 20.0) == pytest.approx(0.6)

    def test_branches_meet_at_equal_lengths(self):
        crystal = make_crystal()
        eps = 1e-9
        assert sinc2_visibility_factor(crystal, 8.0) == 0.0
        assert sinc2_visibility_factor(crystal, 8.0 + eps) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_short_spdc_crystal_suppresses_z_term(self):
        # for L_spdc < L only the y-axis cosine survives in the singles
        crystal = make_crystal(static_phase_rad=0.0)
        delta = math.pi / 3
        for dT in np.linspace(-10.0, 10.0, 21):
            r = rates_sinc2(delta, crystal, 4.0, dT)
            expected = 0.5 * (
                1.0 + math.cos(delta) ** 2 * math.cos(crystal.dky_dT * 8.0 * dT)
            )
            assert r.r4 == pytest.approx(expected, abs=1e-12)

    def test_gamma_factor_consistency(self):
        # specifying gamma = D * L_spdc / 2 directly must match L_spdc input
        crystal = make_crystal()
        gamma = 0.5 * 0.947 * 20.0
        a = rates_for_spectrum(
            0.9, crystal, SpectrumParams(kind="sinc2", L_spdc_mm=20.0), 3.0
        )
        b = rates_for_spectrum(
            0.9, crystal, SpectrumParams(kind="sinc2", gamma_ps=gamma), 3.0
        )
        assert a.r4 == pytest.approx(b.r4, abs=1e-12)
        assert a.r45 == pytest.approx(b.r45, abs=1e-12)

    def test_invalid_widths(self):
        with pytest.raises(ValueError):
            SpectrumParams(kind="sinc2")
        with pytest.raises(ValueError):
            SpectrumParams(kind="gaussian")
        with pytest.raises(ValueError):
            SpectrumParams(kind="sinc2", gamma_ps=-1.0)
        with pytest.raises(ValueError):
            SpectrumParams(kind="lorentzian")
        with pytest.raises(ValueError):
            sinc2_visibility_factor(make_crystal(), 0.0)


class TestPeriodDoubling:
    @staticmethod
    def dominant_frequency(temperatures, values):
        y = values - values.mean()
        n = y.size
        padded = 1 << 18
        spectrum = np.abs(np.fft.rfft(y * np.hanning(n), padded))
        k = int(np.argmax(spectrum))
        l0, l1, l2 = np.log(spectrum[k - 1 : k + 2])
        shift = 0.5 * (l0 - l2) / (l0 - 2.0 * l1 + l2)
        return (k + shift) / (padded * (temperatures[1] - temperatures[0]))

    @pytest.mark.parametrize("delta", [0.0, math.pi / 2])
    def test_two_photon_fringe_beats_twice_as_fast(self, delta):
        crystal = make_crystal(static_phase_rad=0.0)
        spectrum = SpectrumParams(kind="monochromatic")
        temperatures = np.linspace(275.0, 375.0, 4000)
        r4, _, r45 = expected_rates(delta, crystal, spectrum, temperatures)
        f_single = self.dominant_frequency(temperatures, r4)
        f_double = self.dominant_frequency(temperatures, r45)
        assert f_double / f_single == pytest.approx(2.0, abs=1e-3)
