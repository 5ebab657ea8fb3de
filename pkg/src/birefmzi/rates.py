"""Closed-form count rates: monochromatic, Gaussian, and sinc^2 spectra.

All rates are probabilities per input photon (single counts) or per input
pair (coincidences); conversion to counts per integration window lives in
:mod:`birefmzi.fringe`.

The broadband formulas assume the canonical configuration of the experiment:
compensator crystal aligned with the y axis, balanced paths, photons centered
at the expansion frequency.  An optional constant arm offset ``phi_c`` is
supported (it shifts every fringe phase); frequency-dependent compensator
terms require the numerical engine in :mod:`birefmzi.spectral`.

The two-photon coincidence uses the supplementary-material normalization
(prefactor 1/2, cross term 2 sin^2 cos^2): it is the only version consistent
with the delta = 0 limit and with continuity in delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .crystal import BirefringentCrystal

IDENTIFIABILITY_EPS = 1.0e-3  # angular coefficients below this carry no signal


@dataclass(frozen=True)
class CountRates:
    """Single-count probabilities at ports 4/5 and the 4-5 coincidence."""

    r4: float
    r5: float
    r45: float | None = None


@dataclass(frozen=True)
class SpectrumParams:
    """Tagged photon-spectrum description.

    kind 'monochromatic' needs no width; 'gaussian' uses sigma (rad/ps) with
    f^2(v) = exp(-v^2/sigma^2) / (sqrt(pi) sigma); 'sinc2' uses
    f^2(v) = (gamma/pi) sinc^2(gamma v) with gamma = D * L_spdc / 2 (ps).
    Either gamma_ps or (L_spdc_mm together with the crystal's D) pins the
    sinc^2 width.
    """

    kind: str
    sigma: float | None = None  # rad/ps
    gamma_ps: float | None = None
    L_spdc_mm: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("monochromatic", "gaussian", "sinc2"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.kind == "gaussian" and (self.sigma is None or self.sigma <= 0.0):
            raise ValueError("gaussian spectrum needs sigma > 0")
        if self.kind == "sinc2":
            if self.gamma_ps is None and self.L_spdc_mm is None:
                raise ValueError("sinc2 spectrum needs gamma_ps or L_spdc_mm")
            if self.gamma_ps is not None and self.gamma_ps <= 0.0:
                raise ValueError("gamma_ps must be positive")
            if self.L_spdc_mm is not None and self.L_spdc_mm <= 0.0:
                raise ValueError("L_spdc_mm must be positive")

    def gamma_for(self, crystal: BirefringentCrystal) -> float:
        """sinc^2 time scale gamma = D * L_spdc / 2 in ps."""
        if self.gamma_ps is not None:
            return self.gamma_ps
        if self.L_spdc_mm is None:
            raise ValueError("sinc2 spectrum has neither gamma_ps nor L_spdc_mm")
        if crystal.group_delay_mismatch == 0.0:
            raise ValueError("cannot derive gamma from L_spdc with D = 0")
        return 0.5 * crystal.group_delay_mismatch * self.L_spdc_mm


def rates_monochromatic(
    delta: float, phi_y: float, phi_z: float, phi_c: float = 0.0
) -> CountRates:
    """Narrow-band rates for arbitrary phases (monochromatic formulas)."""
    c2 = math.cos(delta) ** 2
    s2 = math.sin(delta) ** 2
    fy = math.cos(phi_y - phi_c)
    fz = math.cos(phi_z - phi_c)
    r4 = 0.5 * (1.0 + c2 * fy + s2 * fz)
    r45 = 0.5 * (
        1.0
        + c2 * c2 * math.cos(2.0 * (phi_y - phi_c))
        + s2 * s2 * math.cos(2.0 * (phi_z - phi_c))
        + 2.0 * s2 * c2 * math.cos(phi_y + phi_z - 2.0 * phi_c)
    )
    return CountRates(r4=r4, r5=1.0 - r4, r45=r45)


def gaussian_decoherence_factor(crystal: BirefringentCrystal, sigma: float) -> float:
    """Polarization walk-off envelope exp(-D^2 L^2 sigma^2 / 4)."""
    dls = crystal.group_delay_mismatch * crystal.length_mm * sigma
    return math.exp(-0.25 * dls * dls)


def sinc2_visibility_factor(crystal: BirefringentCrystal, L_spdc_mm: float) -> float:
    """z-term visibility for a sinc^2 spectrum: (L_spdc - L)/L_spdc, clamped at 0."""
    if L_spdc_mm <= 0.0:
        raise ValueError("L_spdc must be positive")
    return max(L_spdc_mm - crystal.length_mm, 0.0) / L_spdc_mm


def _beating_rates(
    delta: float,
    crystal: BirefringentCrystal,
    dT: float,
    mu: float,
    phi_c: float,
) -> CountRates:
    """Shared broadband fringe shape; mu is the spectrum's envelope at t = D*L."""
    L = crystal.length_mm
    ay = crystal.dky_dT * L * dT
    az = crystal.dkz_dT * L * dT
    dphi = crystal.static_phase_rad
    c2 = math.cos(delta) ** 2
    s2 = math.sin(delta) ** 2
    r4 = 0.5 * (
        1.0
        + c2 * math.cos(ay - phi_c)
        + s2 * mu * math.cos(dphi + az - phi_c)
    )
    r45 = 0.5 * (
        1.0
        + c2 * c2 * math.cos(2.0 * (ay - phi_c))
        + s2 * s2 * math.cos(2.0 * (dphi + az - phi_c))
        + 2.0 * c2 * s2 * mu * math.cos(dphi + ay + az - 2.0 * phi_c)
    )
    return CountRates(r4=r4, r5=1.0 - r4, r45=r45)


def rates_gaussian(
    delta: float,
    crystal: BirefringentCrystal,
    sigma: float,
    dT: float,
    phi_c: float = 0.0,
) -> CountRates:
    """Broadband rates for a Gaussian spectrum of rms width sigma (rad/ps)."""
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    mu = gaussian_decoherence_factor(crystal, sigma)
    return _beating_rates(delta, crystal, dT, mu, phi_c)


def rates_sinc2(
    delta: float,
    crystal: BirefringentCrystal,
    L_spdc_mm: float,
    dT: float,
    phi_c: float = 0.0,
) -> CountRates:
    """Broadband rates for a sinc^2 spectrum from an SPDC crystal of length L_spdc.

    For L_spdc > L the z-axis single term and the coincidence cross term are
    scaled by (L_spdc - L)/L_spdc; for L_spdc <= L they vanish (the two
    branches meet continuously at L_spdc = L).
    """
    mu = sinc2_visibility_factor(crystal, L_spdc_mm)
    return _beating_rates(delta, crystal, dT, mu, phi_c)


def rates_for_spectrum(
    delta: float,
    crystal: BirefringentCrystal,
    spectrum: SpectrumParams,
    dT: float,
    phi_c: float = 0.0,
) -> CountRates:
    """Dispatch to the closed form matching the spectrum kind."""
    if spectrum.kind == "monochromatic":
        L = crystal.length_mm
        return rates_monochromatic(
            delta,
            phi_y=crystal.dky_dT * L * dT,
            phi_z=crystal.static_phase_rad + crystal.dkz_dT * L * dT,
            phi_c=phi_c,
        )
    if spectrum.kind == "gaussian":
        assert spectrum.sigma is not None
        return rates_gaussian(delta, crystal, spectrum.sigma, dT, phi_c)
    if spectrum.kind == "sinc2":
        if spectrum.L_spdc_mm is not None:
            return rates_sinc2(delta, crystal, spectrum.L_spdc_mm, dT, phi_c)
        # gamma given directly: envelope is the triangle transform at t = D*L
        assert spectrum.gamma_ps is not None
        t = crystal.group_delay_mismatch * crystal.length_mm
        mu = max(0.0, 1.0 - t / (2.0 * spectrum.gamma_ps))
        return _beating_rates(delta, crystal, dT, mu, phi_c)
    raise ValueError(f"unknown spectrum kind {spectrum.kind!r}")
