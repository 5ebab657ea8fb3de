"""Frequency-resolved transfer algebra of the birefringent MZI.

Beam splitters use the symmetric i-convention: a 50/50 lossless splitter maps
(a0, a1) -> ((a0 + i a1)/sqrt(2), (i a0 + a1)/sqrt(2)).  The rotated crystal
acts as a Jones matrix in the measurement arm, the compensator as a scalar
phase per polarization in the reference arm.  Composing BS - arms - BS yields
the four output coefficients F1, G1, F2, G2 (H and V amplitudes at ports 4
and 5) as linear forms in the input-port operators (A0, A1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .crystal import (
    BirefringentCrystal,
    CompensatorState,
    compensator_phase,
)

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def bs_transform(pair: tuple[complex, complex]) -> tuple[complex, complex]:
    """Apply the 50/50 beam splitter to a pair of mode amplitudes."""
    a0, a1 = pair
    return ((a0 + 1j * a1) * _INV_SQRT2, (1j * a0 + a1) * _INV_SQRT2)


@dataclass(frozen=True)
class PolarizationCoefficients:
    """Diagonal (alpha) and cross (beta) response of the rotated crystal."""

    alpha: complex
    beta: complex


def polarization_coefficients(
    delta: float, phi_y: float, phi_z: float
) -> PolarizationCoefficients:
    """alpha/beta of a crystal rotated by delta with principal phases phi_y, phi_z."""
    ey = cmath.exp(1j * phi_y)
    ez = cmath.exp(1j * phi_z)
    c = math.cos(delta)
    s = math.sin(delta)
    return PolarizationCoefficients(
        alpha=c * c * ey + s * s * ez,
        beta=c * s * (ey - ez),
    )


@dataclass(frozen=True)
class OutputAmplitudes:
    """Coefficients of (A0, A1) for the four output modes.

    f1/g1 are the H/V amplitudes at port 4, f2/g2 at port 5; each is a pair
    (coefficient of A0, coefficient of A1).
    """

    f1: tuple[complex, complex]
    g1: tuple[complex, complex]
    f2: tuple[complex, complex]
    g2: tuple[complex, complex]

    def single_photon_probabilities(self, input_port: int = 1) -> tuple[float, float]:
        """(P4, P5) for one photon injected into the given input port."""
        p4 = abs(self.f1[input_port]) ** 2 + abs(self.g1[input_port]) ** 2
        p5 = abs(self.f2[input_port]) ** 2 + abs(self.g2[input_port]) ** 2
        return p4, p5


def output_amplitudes(
    delta: float,
    phi_y: float,
    phi_z: float,
    t_compensator: complex,
) -> OutputAmplitudes:
    """Assemble F1, G1, F2, G2 from crystal phases and the compensator scalar.

    Direct closed form of the BS-crystal/compensator-BS composition:
    F1 = -1/2 (T - alpha) A0 + i/2 (T + alpha) A1, G1 = beta/2 (A0 + i A1),
    F2 = i/2 (T + alpha) A0 + 1/2 (T - alpha) A1, G2 = i beta/2 (A0 + i A1).
    """
    pc = polarization_coefficients(delta, phi_y, phi_z)
    a, b, t = pc.alpha, pc.beta, t_compensator
    return OutputAmplitudes(
        f1=(-0.5 * (t - a), 0.5j * (t + a)),
        g1=(0.5 * b, 0.5j * b),
        f2=(0.5j * (t + a), 0.5 * (t - a)),
        g2=(0.5j * b, -0.5 * b),
    )


def transfer_matrix(
    delta: float,
    phi_y: float,
    phi_z: float,
    t_h: complex,
    t_v: complex | None = None,
) -> np.ndarray:
    """Full 4x4 map (ports x polarizations) of the interferometer.

    Basis order is (port_a H, port_a V, port_b H, port_b V) on input and
    (port4 H, port4 V, port5 H, port5 V) on output.  With unit-modulus
    compensator scalars the map is unitary.
    """
    if t_v is None:
        t_v = t_h
    ey = cmath.exp(1j * phi_y)
    ez = cmath.exp(1j * phi_z)
    c = math.cos(delta)
    s = math.sin(delta)
    jones = np.array(
        [
            [c * c * ey + s * s * ez, c * s * (ey - ez)],
            [c * s * (ey - ez), s * s * ey + c * c * ez],
        ],
        dtype=complex,
    )
    arm = np.zeros((4, 4), dtype=complex)
    arm[:2, :2] = jones
    arm[2, 2] = t_h
    arm[3, 3] = t_v
    bs = _INV_SQRT2 * np.array([[1.0, 1j], [1j, 1.0]], dtype=complex)
    bs4 = np.kron(bs, np.eye(2))
    return bs4 @ arm @ bs4


@dataclass(frozen=True)
class InterferometerConfig:
    """Rotation angle, measurement crystal, compensator, and pump center."""

    delta: float
    crystal: BirefringentCrystal
    compensator: CompensatorState
    pump_center_omega: float  # rad/ps; CW pump, w_s + w_i = pump_center_omega

    def __post_init__(self) -> None:
        if self.pump_center_omega <= 0.0:
            raise ValueError("pump center frequency must be positive")

    @property
    def photon_center_omega(self) -> float:
        """Degenerate photon center, half the pump frequency."""
        return 0.5 * self.pump_center_omega

    def phases_at(self, detuning: float, dT: float) -> tuple[float, float, float]:
        """(phi_y, phi_z, phi_c) at photon detuning (rad/ps) and offset dT (K)."""
        phi_y = self.crystal.phase_at("y", detuning, dT)
        phi_z = self.crystal.phase_at("z", detuning, dT)
        phi_c = compensator_phase(
            self.compensator, self.crystal, self.photon_center_omega, detuning, "H"
        )
        return phi_y, phi_z, phi_c

    def amplitudes_at(self, detuning: float, dT: float) -> OutputAmplitudes:
        phi_y, phi_z, phi_c = self.phases_at(detuning, dT)
        return output_amplitudes(self.delta, phi_y, phi_z, cmath.exp(1j * phi_c))


def coincidence_kernel(amp_s: OutputAmplitudes, amp_i: OutputAmplitudes) -> float:
    """Two-photon detection kernel for photons s (port 0) and i (port 1).

    Sums |amplitude|^2 over the four polarization outcomes (H/V at port 4
    times H/V at port 5) of the symmetrized two-photon amplitude.
    """
    total = 0.0
    for det4_s, det4_i, det5_s, det5_i in (
        (amp_s.f1, amp_i.f1, amp_s.f2, amp_i.f2),
        (amp_s.f1, amp_i.f1, amp_s.g2, amp_i.g2),
        (amp_s.g1, amp_i.g1, amp_s.f2, amp_i.f2),
        (amp_s.g1, amp_i.g1, amp_s.g2, amp_i.g2),
    ):
        amplitude = det4_s[0] * det5_i[1] + det5_s[0] * det4_i[1]
        total += abs(amplitude) ** 2
    return total
