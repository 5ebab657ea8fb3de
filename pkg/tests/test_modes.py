"""Mode algebra: beam splitter, polarization coefficients, unitarity."""

import cmath
import math

import numpy as np
import pytest

from birefmzi.modes import (
    bs_transform,
    coincidence_kernel,
    output_amplitudes,
    polarization_coefficients,
    transfer_matrix,
)
from birefmzi.rates import rates_monochromatic


def random_phases(rng, n):
    return rng.uniform(-math.pi, math.pi, size=(n, 3))


class TestBeamSplitter:
    def test_balanced_splitting(self):
        t, r = bs_transform((1.0, 0.0))
        assert abs(t) ** 2 == pytest.approx(0.5)
        assert abs(r) ** 2 == pytest.approx(0.5)

    def test_energy_conservation(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = complex(*rng.normal(size=2))
            b = complex(*rng.normal(size=2))
            out = bs_transform((a, b))
            before = abs(a) ** 2 + abs(b) ** 2
            after = abs(out[0]) ** 2 + abs(out[1]) ** 2
            assert after == pytest.approx(before, rel=1e-12)


class TestPolarizationCoefficients:
    def test_modulus_invariant(self):
        rng = np.random.default_rng(11)
        deltas = rng.uniform(0.0, math.pi, 1000)
        for delta, (phi_y, phi_z, _) in zip(deltas, random_phases(rng, 1000)):
            pc = polarization_coefficients(delta, phi_y, phi_z)
            total = abs(pc.alpha) ** 2 + abs(pc.beta) ** 2
            assert abs(total - 1.0) < 1e-12

    def test_zero_rotation_is_diagonal(self):
        pc = polarization_coefficients(0.0, 0.3, 1.1)
        assert pc.alpha == pytest.approx(cmath.exp(0.3j))
        assert pc.beta == pytest.approx(0.0)

    def test_rotation_with_phase_swap_leaves_coefficients_unchanged(self):
        # delta -> delta + pi/2 together with phi_y <-> phi_z maps
        # cos^2 <-> sin^2 and flips both factors of beta, so alpha and
        # beta are each invariant (and so are all output probabilities)
        rng = np.random.default_rng(5)
        for delta, (phi_y, phi_z, _) in zip(
            rng.uniform(0.0, math.pi, 200), random_phases(rng, 200)
        ):
            a = polarization_coefficients(delta, phi_y, phi_z)
            b = polarization_coefficients(delta + math.pi / 2.0, phi_z, phi_y)
            assert b.alpha == pytest.approx(a.alpha, abs=1e-12)
            assert b.beta == pytest.approx(a.beta, abs=1e-12)

    def test_beta_flips_sign_under_rotation_alone(self):
        rng = np.random.default_rng(6)
        for delta, (phi_y, phi_z, _) in zip(
            rng.uniform(0.0, math.pi, 200), random_phases(rng, 200)
        ):
            a = polarization_coefficients(delta, phi_y, phi_z)
            b = polarization_coefficients(delta + math.pi / 2.0, phi_y, phi_z)
            assert b.beta == pytest.approx(-a.beta, abs=1e-12)


class TestOutputAmplitudes:
    def test_probability_conservation(self):
        rng = np.random.default_rng(21)
        for delta, (phi_y, phi_z, phi_c) in zip(
            rng.uniform(0.0, math.pi, 1000), random_phases(rng, 1000)
        ):
            amps = output_amplitudes(delta, phi_y, phi_z, cmath.exp(1j * phi_c))
            for port in (0, 1):
                p4, p5 = amps.single_photon_probabilities(port)
                assert abs(p4 + p5 - 1.0) < 1e-12

    def test_perfectly_compensated_photon_exits_port4(self):
        # delta = 0, crystal phase equal to compensator phase: the
        # interferometer is balanced and a port-1 photon exits port 4
        phi = 0.9
        amps = output_amplitudes(0.0, phi, 2.2, cmath.exp(1j * phi))
        assert abs(amps.f1[1]) ** 2 == pytest.approx(1.0, abs=1e-12)
        assert abs(amps.g1[1]) ** 2 == pytest.approx(0.0, abs=1e-12)
        assert abs(amps.f2[1]) ** 2 == pytest.approx(0.0, abs=1e-12)
        assert abs(amps.g2[1]) ** 2 == pytest.approx(0.0, abs=1e-12)

    def test_pi_phase_swaps_output_port(self):
        phi = 0.9
        amps = output_amplitudes(0.0, phi + math.pi, 2.2, cmath.exp(1j * phi))
        p4, p5 = amps.single_photon_probabilities(1)
        assert p5 == pytest.approx(1.0, abs=1e-12)
        assert p4 == pytest.approx(0.0, abs=1e-12)

    def test_probabilities_invariant_under_rotation_with_swap(self):
        rng = np.random.default_rng(8)
        for delta, (phi_y, phi_z, phi_c) in zip(
            rng.uniform(0.0, math.pi, 100), random_phases(rng, 100)
        ):
            t = cmath.exp(1j * phi_c)
            a = output_amplitudes(delta, phi_y, phi_z, t)
            b = output_amplitudes(delta + math.pi / 2.0, phi_z, phi_y, t)
            assert a.single_photon_probabilities(1) == pytest.approx(
                b.single_photon_probabilities(1), abs=1e-12
            )


class TestTransferMatrix:
    def test_unitary_over_random_configs(self):
        rng = np.random.default_rng(33)
        eye = np.eye(4)
        for delta, (phi_y, phi_z, phi_c) in zip(
            rng.uniform(0.0, math.pi, 100), random_phases(rng, 100)
        ):
            m = transfer_matrix(delta, phi_y, phi_z, cmath.exp(1j * phi_c))
            assert np.max(np.abs(m.conj().T @ m - eye)) < 1e-12

    def test_matches_output_amplitudes(self):
        # column for a port-b (input 1) H photon reproduces the f/g pairs
        delta, phi_y, phi_z, phi_c = 0.7, 0.3, -1.2, 0.5
        t = cmath.exp(1j * phi_c)
        m = transfer_matrix(delta, phi_y, phi_z, t)
        amps = output_amplitudes(delta, phi_y, phi_z, t)
        col = m[:, 2]  # input port b, H
        assert col[0] == pytest.approx(amps.f1[1])
        assert col[1] == pytest.approx(amps.g1[1])
        assert col[2] == pytest.approx(amps.f2[1])
        assert col[3] == pytest.approx(amps.g2[1])


class TestCoincidenceKernel:
    def test_matches_monochromatic_coincidence(self):
        # at a single frequency the kernel must reproduce the closed-form
        # coincidence rate for arbitrary phases
        rng = np.random.default_rng(44)
        for delta, (phi_y, phi_z, phi_c) in zip(
            rng.uniform(0.0, math.pi, 200), random_phases(rng, 200)
        ):
            t = cmath.exp(1j * phi_c)
            amps = output_amplitudes(delta, phi_y, phi_z, t)
            got = coincidence_kernel(amps, amps)
            expected = rates_monochromatic(delta, phi_y, phi_z, phi_c).r45
            assert got == pytest.approx(expected, abs=1e-12)

    def test_bounded(self):
        rng = np.random.default_rng(45)
        for delta, (phi_y, phi_z, phi_c) in zip(
            rng.uniform(0.0, math.pi, 200), random_phases(rng, 200)
        ):
            amps = output_amplitudes(delta, phi_y, phi_z, cmath.exp(1j * phi_c))
            value = coincidence_kernel(amps, amps)
            assert -1e-12 <= value <= 1.0 + 1e-12
