"""JSON experiment configuration: schema validation and object construction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from jsonschema import Draft202012Validator

from .crystal import (
    BirefringentCrystal,
    CompensatorAlignment,
    CompensatorState,
    bandwidth_fwhm_to_delta_omega,
    omega_from_wavelength,
)
from .modes import InterferometerConfig
from .rates import SpectrumParams

# sinc(x)^2 = 1/2 at x = SINC2_HALF_POWER (sinc(x) = sin(x)/x)
SINC2_HALF_POWER = 1.3915573783


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the field path."""


_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["crystal", "compensator", "spectrum", "interferometer"],
    "properties": {
        "crystal": {
            "type": "object",
            "additionalProperties": False,
            "required": ["L_mm", "dny_dT", "dnz_dT"],
            "properties": {
                "L_mm": {"type": "number", "exclusiveMinimum": 0},
                "dny_dT": {"type": "number"},
                "dnz_dT": {"type": "number"},
                "D_ps_per_mm": {"type": "number", "minimum": 0},
                "T0_K": {"type": "number"},
                "dphi_rad": {"type": "number"},
            },
        },
        "compensator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alignment": {"enum": ["y", "z", "removed"]},
                "dL_mm": {"type": "number", "minimum": 0},
                "phase_rad": {"type": "number"},
                "fixed_T_K": {"type": "number"},
            },
        },
        "spectrum": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["monochromatic", "gaussian", "sinc2"]},
                "sigma_rad_s": {"type": "number", "exclusiveMinimum": 0},
                "gamma_ps": {"type": "number", "exclusiveMinimum": 0},
                "L_spdc_mm": {"type": "number", "exclusiveMinimum": 0},
                "fwhm_nm": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "interferometer": {
            "type": "object",
            "additionalProperties": False,
            "required": ["delta_rad", "pump_center_nm"],
            "properties": {
                "delta_rad": {"type": "number"},
                "pump_center_nm": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["T_start", "T_stop", "points"],
            "properties": {
                "T_start": {"type": "number"},
                "T_stop": {"type": "number"},
                "points": {"type": "integer", "minimum": 2},
            },
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mean_counts"],
            "properties": {
                "mean_counts": {"type": "number", "exclusiveMinimum": 0},
                "background": {"type": "number", "minimum": 0},
                "seed": {"type": "integer"},
            },
        },
    },
}

_VALIDATOR = Draft202012Validator(_SCHEMA)


@dataclass(frozen=True)
class NoiseParams:
    mean_counts: float
    background: float = 0.0
    seed: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    interferometer: InterferometerConfig
    spectrum: SpectrumParams
    photon_wavelength_nm: float
    sweep: np.ndarray | None = None
    noise: NoiseParams | None = None

    @property
    def crystal(self) -> BirefringentCrystal:
        return self.interferometer.crystal

    @property
    def compensator(self) -> CompensatorState:
        return self.interferometer.compensator

    @property
    def delta(self) -> float:
        return self.interferometer.delta


def _spectrum_from_section(
    section: dict, crystal: BirefringentCrystal, photon_wavelength_nm: float
) -> SpectrumParams:
    kind = section["kind"]
    if kind == "monochromatic":
        return SpectrumParams(kind="monochromatic")
    fwhm_nm = section.get("fwhm_nm")
    delta_omega = (
        bandwidth_fwhm_to_delta_omega(fwhm_nm, photon_wavelength_nm)
        if fwhm_nm is not None
        else None
    )
    if kind == "gaussian":
        if "sigma_rad_s" in section:
            sigma = section["sigma_rad_s"] * 1.0e-12  # rad/s -> rad/ps
        elif delta_omega is not None:
            sigma = delta_omega / (2.0 * math.sqrt(math.log(2.0)))
        else:
            raise ConfigError("spectrum: gaussian needs sigma_rad_s or fwhm_nm")
        return SpectrumParams(kind="gaussian", sigma=sigma)
    # sinc2
    if "gamma_ps" in section:
        return SpectrumParams(kind="sinc2", gamma_ps=section["gamma_ps"])
    if "L_spdc_mm" in section:
        return SpectrumParams(kind="sinc2", L_spdc_mm=section["L_spdc_mm"])
    if delta_omega is not None:
        return SpectrumParams(kind="sinc2", gamma_ps=2.0 * SINC2_HALF_POWER / delta_omega)
    raise ConfigError("spectrum: sinc2 needs gamma_ps, L_spdc_mm, or fwhm_nm")


def parse_config(document: dict) -> ExperimentConfig:
    """Validate a parsed JSON document and build the experiment objects."""
    errors = sorted(_VALIDATOR.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path) or "(root)"
        raise ConfigError(f"{path}: {err.message}")

    inter = document["interferometer"]
    pump_nm = inter["pump_center_nm"]
    photon_nm = 2.0 * pump_nm  # degenerate SPDC

    c = document["crystal"]
    crystal = BirefringentCrystal.from_dn_dT(
        length_mm=c["L_mm"],
        dny_dT=c["dny_dT"],
        dnz_dT=c["dnz_dT"],
        wavelength_nm=photon_nm,
        group_delay_mismatch=c.get("D_ps_per_mm", 0.0),
        static_phase_rad=c.get("dphi_rad", 0.0),
        reference_temperature_K=c.get("T0_K", 295.45),
    )

    comp_section = document["compensator"]
    compensator = CompensatorState(
        alignment=CompensatorAlignment(comp_section.get("alignment", "y")),
        fixed_temperature_K=comp_section.get("fixed_T_K"),
        extra_path_mm=comp_section.get("dL_mm", 0.0),
        static_phase_rad=comp_section.get("phase_rad", 0.0),
    )

    interferometer = InterferometerConfig(
        delta=inter["delta_rad"],
        crystal=crystal,
        compensator=compensator,
        pump_center_omega=omega_from_wavelength(pump_nm),
    )
    spectrum = _spectrum_from_section(document["spectrum"], crystal, photon_nm)

    sweep = None
    if "sweep" in document:
        s = document["sweep"]
        if not s["T_start"] < s["T_stop"]:
            raise ConfigError("sweep: T_start must be below T_stop")
        sweep = np.linspace(s["T_start"], s["T_stop"], s["points"])

    noise = None
    if "noise" in document:
        n = document["noise"]
        noise = NoiseParams(
            mean_counts=n["mean_counts"],
            background=n.get("background", 0.0),
            seed=n.get("seed"),
        )

    return ExperimentConfig(
        interferometer=interferometer,
        spectrum=spectrum,
        photon_wavelength_nm=photon_nm,
        sweep=sweep,
        noise=noise,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            document = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(document)
