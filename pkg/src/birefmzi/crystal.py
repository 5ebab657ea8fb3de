"""Linearized dispersion/temperature phase model for the birefringent crystals.

Unit conventions used throughout the package:

* lengths in mm
* times in ps, angular frequencies in rad/ps
* temperatures in K (offsets relative to a reference temperature)
* phases in rad

Phases are gauged to the measurement crystal's y-axis carrier: the common
terms k_y(w0, T0) * L and (dk_y/dw) * (w - w0) * L are subtracted from both
principal axes and from the compensator arm.  Only phase *differences*
between the arms (and between the axes) are observable, so this gauge leaves
every count rate unchanged while keeping absolute refractive indices out of
the inputs.  The z - y carrier difference survives as ``static_phase_rad``
and the group-index difference survives as the walk-off parameter D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

C_MM_PER_PS = 0.299792458
"""Speed of light in mm/ps (equivalently nm/fs)."""

C_NM_PER_PS = C_MM_PER_PS * 1.0e6

TWO_PI = 2.0 * math.pi


def dn_dT_to_dk_dT(dn_dT: float, wavelength_nm: float) -> float:
    """Convert a thermo-optic coefficient (1/K) to rad/(mm*K) at wavelength_nm."""
    wavelength_mm = wavelength_nm * 1.0e-6
    return TWO_PI / wavelength_mm * dn_dT


def dk_dT_to_dn_dT(dk_dT: float, wavelength_nm: float) -> float:
    """Inverse of :func:`dn_dT_to_dk_dT`."""
    wavelength_mm = wavelength_nm * 1.0e-6
    return dk_dT * wavelength_mm / TWO_PI


def omega_from_wavelength(wavelength_nm: float) -> float:
    """Angular frequency (rad/ps) of light with the given vacuum wavelength."""
    return TWO_PI * C_NM_PER_PS / wavelength_nm


def bandwidth_fwhm_to_delta_omega(fwhm_nm: float, center_nm: float) -> float:
    """Spectral FWHM in nm -> angular-frequency FWHM in rad/ps."""
    return TWO_PI * C_NM_PER_PS * fwhm_nm / center_nm**2


@dataclass(frozen=True)
class BirefringentCrystal:
    """Measurement crystal, linearized around (w0, T0).

    ``dky_dT`` / ``dkz_dT`` are the thermal wavenumber slopes in rad/(mm*K);
    ``group_delay_mismatch`` is D = 1/v_gz - 1/v_gy in ps/mm, fixed >= 0 by
    convention (only D or D**2 times even spectral moments enter the rates);
    ``static_phase_rad`` is the z-minus-y carrier phase difference
    [k_z(w0,T0) - k_y(w0,T0)] * L, a free parameter rather than a derived one.
    """

    length_mm: float
    dky_dT: float
    dkz_dT: float
    group_delay_mismatch: float = 0.0
    static_phase_rad: float = 0.0
    reference_temperature_K: float = 295.45

    def __post_init__(self) -> None:
        if self.length_mm <= 0.0:
            raise ValueError(f"crystal length must be positive, got {self.length_mm}")
        if self.group_delay_mismatch < 0.0:
            raise ValueError(
                "group delay mismatch D must be >= 0 by convention "
                f"(got {self.group_delay_mismatch})"
            )

    @classmethod
    def from_dn_dT(
        cls,
        length_mm: float,
        dny_dT: float,
        dnz_dT: float,
        wavelength_nm: float,
        group_delay_mismatch: float = 0.0,
        static_phase_rad: float = 0.0,
        reference_temperature_K: float = 295.45,
    ) -> "BirefringentCrystal":
        return cls(
            length_mm=length_mm,
            dky_dT=dn_dT_to_dk_dT(dny_dT, wavelength_nm),
            dkz_dT=dn_dT_to_dk_dT(dnz_dT, wavelength_nm),
            group_delay_mismatch=group_delay_mismatch,
            static_phase_rad=static_phase_rad,
            reference_temperature_K=reference_temperature_K,
        )

    def phase_at(self, axis: str, detuning: float = 0.0, dT: float = 0.0) -> float:
        """First-order phase of one principal axis, in the y-carrier gauge.

        ``detuning`` is w - w0 in rad/ps, ``dT`` is T - T0 in K.  The y axis
        at zero detuning and zero offset defines the phase origin.
        """
        if axis == "y":
            return self.dky_dT * self.length_mm * dT
        if axis == "z":
            return (
                self.static_phase_rad
                + self.group_delay_mismatch * self.length_mm * detuning
                + self.dkz_dT * self.length_mm * dT
            )
        raise ValueError(f"axis must be 'y' or 'z', got {axis!r}")

    def thermal_fringe_period(self, axis: str, photon_order: int = 1) -> float:
        """Temperature period (K) of the fringe driven by one axis.

        Equals lambda / (L * dn/dT * order); the two-photon fringe beats at
        twice the single-photon rate, halving the period.
        """
        if photon_order not in (1, 2):
            raise ValueError(f"photon_order must be 1 or 2, got {photon_order}")
        dk = {"y": self.dky_dT, "z": self.dkz_dT}[axis]
        if dk == 0.0:
            raise ValueError(f"degenerate axis: infinite period (dk_{axis}/dT = 0)")
        return TWO_PI / (abs(dk) * self.length_mm * photon_order)


class CompensatorAlignment(Enum):
    Y = "y"
    Z = "z"
    REMOVED = "removed"


@dataclass(frozen=True)
class CompensatorState:
    """Reference-arm phase element: compensating crystal plus path imbalance.

    The whole arm reduces to one scalar phase per frequency.  ``extra_path_mm``
    is a geometric imbalance contributing w * dL / c; ``static_phase_rad`` is
    an additional constant arm offset (a sweep/fit knob, zero in the ideal
    compensated configuration).  ``fixed_temperature_K`` of None means the
    compensator sits at the measurement crystal's reference temperature.
    """

    alignment: CompensatorAlignment = CompensatorAlignment.Y
    fixed_temperature_K: float | None = None
    extra_path_mm: float = 0.0
    static_phase_rad: float = 0.0

    def __post_init__(self) -> None:
        if self.extra_path_mm < 0.0:
            raise ValueError(f"extra path must be >= 0, got {self.extra_path_mm}")

    def is_balanced(self) -> bool:
        return (
            self.alignment is CompensatorAlignment.Y
            and self.extra_path_mm == 0.0
            and (
                self.fixed_temperature_K is None
            )
        )


def compensator_phase(
    compensator: CompensatorState,
    crystal: BirefringentCrystal,
    center_omega: float,
    detuning: float = 0.0,
    polarization: str = "H",
) -> float:
    """Scalar reference-arm phase at absolute frequency center_omega + detuning.

    The input photons are H-polarized; an H photon sees the compensator's
    alignment axis, a V photon the orthogonal one.  The compensating crystal
    is taken to be a twin of the measurement crystal (same cut and length),
    held at a fixed temperature, so its phases reuse the measurement
    crystal's expansion in the same y-carrier gauge.
    """
    if polarization not in ("H", "V"):
        raise ValueError(f"polarization must be 'H' or 'V', got {polarization!r}")

    phi = compensator.static_phase_rad
    phi += (center_omega + detuning) * compensator.extra_path_mm / C_MM_PER_PS

    if compensator.alignment is CompensatorAlignment.REMOVED:
        return phi

    if compensator.fixed_temperature_K is None:
        dTc = 0.0
    else:
        dTc = compensator.fixed_temperature_K - crystal.reference_temperature_K

    aligned = compensator.alignment.value  # axis seen by H
    axis = aligned if polarization == "H" else ("z" if aligned == "y" else "y")
    return phi + crystal.phase_at(axis, detuning, dTc)
