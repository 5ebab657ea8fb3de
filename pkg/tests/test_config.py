"""JSON configuration: schema validation, unit conversions, error paths."""

import json
import math

import pytest

from birefmzi.config import SINC2_HALF_POWER, ConfigError, load_config, parse_config
from birefmzi.crystal import (
    CompensatorAlignment,
    bandwidth_fwhm_to_delta_omega,
    dn_dT_to_dk_dT,
)


def base_document(**overrides):
    doc = {
        "crystal": {
            "L_mm": 8.0,
            "dny_dT": 1.027e-5,
            "dnz_dT": 1.680e-5,
            "D_ps_per_mm": 0.947,
            "T0_K": 295.45,
            "dphi_rad": 0.1,
        },
        "compensator": {"alignment": "y", "dL_mm": 0.0},
        "spectrum": {"kind": "gaussian", "sigma_rad_s": 1.9e11},
        "interferometer": {"delta_rad": 0.5, "pump_center_nm": 775.0},
    }
    for key, value in overrides.items():
        if key in doc and isinstance(value, dict):
            doc[key] = {**doc[key], **value}
        else:
            doc[key] = value
    return doc


class TestParsing:
    def test_valid_document(self):
        config = parse_config(base_document())
        assert config.delta == 0.5
        assert config.photon_wavelength_nm == pytest.approx(1550.0)
        assert config.crystal.length_mm == 8.0
        assert config.crystal.dky_dT == pytest.approx(
            dn_dT_to_dk_dT(1.027e-5, 1550.0)
        )
        assert config.compensator.alignment is CompensatorAlignment.Y
        assert config.spectrum.sigma == pytest.approx(0.19)  # rad/s -> rad/ps

    def test_sweep_and_noise_sections(self):
        doc = base_document(
            sweep={"T_start": 280.0, "T_stop": 310.0, "points": 31},
            noise={"mean_counts": 2000, "background": 3.0, "seed": 7},
        )
        config = parse_config(doc)
        assert config.sweep.size == 31
        assert config.sweep[0] == 280.0
        assert config.noise.mean_counts == 2000
        assert config.noise.seed == 7

    def test_unknown_top_level_key_rejected(self):
        doc = base_document()
        doc["extra"] = 1
        with pytest.raises(ConfigError, match="extra"):
            parse_config(doc)

    def test_unknown_nested_key_rejected(self):
        doc = base_document(crystal={"n_y": 1.7})
        with pytest.raises(ConfigError, match="crystal"):
            parse_config(doc)

    def test_missing_required_section(self):
        doc = base_document()
        del doc["crystal"]
        with pytest.raises(ConfigError, match="crystal"):
            parse_config(doc)

    def test_wrong_type_reports_field_path(self):
        doc = base_document(crystal={"L_mm": "eight"})
        with pytest.raises(ConfigError, match="crystal/L_mm"):
            parse_config(doc)

    def test_sweep_order_enforced(self):
        doc = base_document(sweep={"T_start": 300.0, "T_stop": 290.0, "points": 5})
        with pytest.raises(ConfigError, match="T_start"):
            parse_config(doc)


class TestSpectrumConversions:
    def test_gaussian_from_fwhm(self):
        doc = base_document(spectrum={"kind": "gaussian", "fwhm_nm": 0.5})
        del doc["spectrum"]["sigma_rad_s"]
        config = parse_config(doc)
        delta_omega = bandwidth_fwhm_to_delta_omega(0.5, 1550.0)
        assert config.spectrum.sigma == pytest.approx(
            delta_omega / (2.0 * math.sqrt(math.log(2.0)))
        )

    def test_sinc2_from_fwhm(self):
        doc = base_document(spectrum={"kind": "sinc2", "fwhm_nm": 1.3})
        del doc["spectrum"]["sigma_rad_s"]
        config = parse_config(doc)
        delta_omega = bandwidth_fwhm_to_delta_omega(1.3, 1550.0)
        assert config.spectrum.gamma_ps == pytest.approx(
            2.0 * SINC2_HALF_POWER / delta_omega
        )
        # half-power check: sinc^2(gamma * delta_omega / 2) = 1/2
        x = config.spectrum.gamma_ps * delta_omega / 2.0
        assert (math.sin(x) / x) ** 2 == pytest.approx(0.5, abs=1e-9)

    def test_sinc2_from_spdc_length(self):
        doc = base_document(spectrum={"kind": "sinc2", "L_spdc_mm": 20.0})
        del doc["spectrum"]["sigma_rad_s"]
        config = parse_config(doc)
        assert config.spectrum.L_spdc_mm == 20.0

    def test_monochromatic(self):
        doc = base_document(spectrum={"kind": "monochromatic"})
        del doc["spectrum"]["sigma_rad_s"]
        config = parse_config(doc)
        assert config.spectrum.kind == "monochromatic"

    def test_missing_width_rejected(self):
        doc = base_document(spectrum={"kind": "sinc2"})
        del doc["spectrum"]["sigma_rad_s"]
        with pytest.raises(ConfigError, match="sinc2 needs"):
            parse_config(doc)


class TestLoading:
    def test_load_valid_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(base_document()))
        config = load_config(path)
        assert config.delta == 0.5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.json")

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"crystal": \n!}')
        with pytest.raises(ConfigError, match="line 2"):
            load_config(path)

    def test_non_object_root(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="JSON object"):
            load_config(path)
