"""Command-line front end: simulate, fit, hom, imbalance, reproduce.

Data goes to CSV/JSON files (or stdout with ``--out -``); diagnostics go to
stderr.  Exit codes: 0 success, 1 fit non-convergence, 2 invalid
config/data, 3 quadrature non-convergence, 4 unidentifiable model.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import plots
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .crystal import CompensatorAlignment, dk_dT_to_dn_dT
from .fit import FitModel, fit as run_fit
from .fringe import FringeDataset, expected_rates, synthesize
from .rates import SpectrumParams
from .spectral import (
    QuadratureError,
    SpectralDensity,
    hom_dip,
    imbalance_visibility,
    integrate_coincidence,
    integrate_single,
)

EXIT_OK = 0
EXIT_NONCONVERGED = 1
EXIT_BAD_INPUT = 2
EXIT_QUADRATURE = 3
EXIT_UNIDENTIFIABLE = 4


def _write_text(out: str, text: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _write_csv(out: str, header: list[str], rows: list[list[float]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        # shortest round-trip float repr keeps CSV -> fit lossless
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    _write_text(out, buf.getvalue())


def _density_for(config: ExperimentConfig) -> SpectralDensity:
    return SpectralDensity.from_params(
        config.spectrum, config.crystal.group_delay_mismatch
    )


def _require_analytic_geometry(config: ExperimentConfig) -> None:
    comp = config.compensator
    if comp.alignment is not CompensatorAlignment.Y or comp.extra_path_mm != 0.0:
        raise ConfigError(
            "compensator: the analytic model covers the balanced y-aligned "
            "configuration only; use --model oracle for imbalanced setups"
        )


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if config.sweep is None:
        raise ConfigError("sweep: section required for simulate")
    temperatures = config.sweep
    crystal = config.crystal
    phi_c = config.compensator.static_phase_rad

    if args.model == "analytic":
        _require_analytic_geometry(config)
        r4, r5, r45 = expected_rates(
            config.delta, crystal, config.spectrum, temperatures, phi_c
        )
    else:
        density = _density_for(config)
        r4 = np.empty(temperatures.size)
        r45 = np.empty(temperatures.size)
        for i, T in enumerate(temperatures):
            dT = T - crystal.reference_temperature_K
            r4[i] = integrate_single(config.interferometer, density, dT).r4
            r45[i] = integrate_coincidence(config.interferometer, density, dT)
        r5 = 1.0 - r4

    header = ["temperature_K", "R4", "R5", "R45"]
    columns = [temperatures, r4, r5, r45]
    if config.noise is not None:
        rng = np.random.default_rng(config.noise.seed)
        scale, bg = config.noise.mean_counts, config.noise.background
        s4 = rng.poisson(scale * r4 + bg).astype(float)
        s5 = rng.poisson(scale * r5 + bg).astype(float)
        c45 = rng.poisson(scale * r45 + bg).astype(float)
        header += ["singles4", "singles5", "coincidences"]
        columns += [s4, s5, c45]

    rows = [[float(c[i]) for c in columns] for i in range(temperatures.size)]
    _write_csv(args.out, header, rows)
    if args.plot:
        plots.render_fringe(
            temperatures,
            {"R4": r4, "R5": r5, "R45": r45},
            args.plot,
        )
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    kind = "single_photon" if args.photon == "single" else "two_photon"
    try:
        dataset = FringeDataset.from_csv(args.data)
    except (OSError, ValueError) as exc:
        print(f"error: data CSV: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    temperatures = dataset.temperature_K
    model = FitModel(
        kind=kind,
        delta=config.delta,
        crystal_length_mm=config.crystal.length_mm,
        reference_temperature_K=float(temperatures.mean()),
        fit_background=args.background,
    )
    background = config.noise.background if config.noise is not None else 0.0
    result = run_fit(dataset, model, background=background)

    if result.unidentifiable and not args.allow_partial:
        frozen = ", ".join(result.unidentifiable)
        print(
            "error: unidentifiable model: no sensitivity to "
            f"[{frozen}] at delta = {config.delta:.6g} rad; "
            "rotate the crystal or fit a reduced model (--allow-partial "
            "accepts the partial fit)",
            file=sys.stderr,
        )
        return EXIT_UNIDENTIFIABLE

    _write_text(args.out, result.to_json() + "\n")
    lam = config.photon_wavelength_nm
    for axis, key in (("y", "dky_dT"), ("z", "dkz_dT")):
        if key in result.free_names:
            dn = dk_dT_to_dn_dT(result.estimates[key], lam)
            err = dk_dT_to_dn_dT(result.standard_errors[key], lam)
            print(f"dn_{axis}/dT = {dn:.4g} +/- {err:.2g} /K", file=sys.stderr)
    if args.plot:
        theta = np.array([result.estimates[n] for n in result.parameter_names])
        plots.render_fit(
            temperatures,
            dataset.counts_for(kind),
            model.rate(theta, temperatures),
            args.plot,
        )
    if not result.converged:
        print(f"error: fit did not converge: {result.message}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_hom(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if config.spectrum.kind == "monochromatic":
        raise ConfigError("spectrum: HOM dip needs a finite-bandwidth spectrum")
    density = _density_for(config)
    tau = np.linspace(-args.tau_max, args.tau_max, args.points)
    dip = np.array([hom_dip(density, t) for t in tau])
    _write_csv(
        args.out,
        ["tau_ps", "coincidence"],
        [[float(t), float(v)] for t, v in zip(tau, dip)],
    )
    if args.plot:
        plots.render_hom(tau, {config.spectrum.kind: dip}, args.plot)
    return EXIT_OK


def cmd_imbalance(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    density = _density_for(config)
    try:
        dl_values = [float(v) for v in args.dL.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--dL: {exc}") from exc
    if not dl_values:
        raise ConfigError("--dL: need at least one value")
    rows = []
    for dl in dl_values:
        comp = replace(config.compensator, extra_path_mm=dl)
        interf = replace(config.interferometer, compensator=comp)
        v1 = imbalance_visibility(interf, density, photon_order=1)
        v2 = imbalance_visibility(interf, density, photon_order=2)
        rows.append([dl, v1, v2])
    _write_csv(args.out, ["dL_mm", "visibility_single", "visibility_two"], rows)
    if args.plot:
        arr = np.array(rows)
        plots.render_imbalance(arr[:, 0], arr[:, 1], arr[:, 2], args.plot)
    return EXIT_OK


# canned parameter sets for the figure reproductions
_BASE_CRYSTAL = {
    "L_mm": 8.0,
    "dny_dT": 1.027e-5,
    "dnz_dT": 1.680e-5,
    "D_ps_per_mm": 0.947,
    "T0_K": 295.45,
    "dphi_rad": 0.0,
}
_BASE = {
    "crystal": _BASE_CRYSTAL,
    "compensator": {"alignment": "y", "dL_mm": 0.0},
    "interferometer": {"delta_rad": 0.0, "pump_center_nm": 775.0},
}


def _figure_config(**overrides) -> dict:
    doc = {
        "crystal": dict(_BASE_CRYSTAL),
        "compensator": dict(_BASE["compensator"]),
        "interferometer": dict(_BASE["interferometer"]),
    }
    for key, value in overrides.items():
        if key in doc:
            doc[key].update(value)
        else:
            doc[key] = value
    return doc


def cmd_reproduce(args: argparse.Namespace) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    figures = ["fig2", "fig3", "fig4", "fig5"] if args.figure == "all" else [args.figure]
    for figure in figures:
        getattr(sys.modules[__name__], f"_reproduce_{figure}")(outdir)
        print(f"wrote {figure} outputs to {outdir}", file=sys.stderr)
    return EXIT_OK


def _reproduce_fig2(outdir: Path) -> None:
    """HOM dips: unfiltered sinc^2 (triangle) vs 0.5 nm filtered (Gaussian)."""
    tau = np.linspace(-25.0, 25.0, 251)
    sinc2 = SpectralDensity.from_params(
        SpectrumParams(kind="sinc2", L_spdc_mm=20.0), group_delay_mismatch=0.947
    )
    doc = _figure_config(spectrum={"kind": "gaussian", "fwhm_nm": 0.5})
    gaussian = SpectralDensity.from_params(parse_config(doc).spectrum)
    dip_s = np.array([hom_dip(sinc2, t) for t in tau])
    dip_g = np.array([hom_dip(gaussian, t) for t in tau])
    _write_csv(
        str(outdir / "fig2_hom.csv"),
        ["tau_ps", "coincidence_sinc2", "coincidence_gaussian"],
        [[float(t), float(a), float(b)] for t, a, b in zip(tau, dip_s, dip_g)],
    )
    plots.render_hom(
        tau,
        {"unfiltered (sinc^2)": dip_s, "0.5 nm filtered (Gaussian)": dip_g},
        str(outdir / "fig2_hom.png"),
    )


def _reproduce_fig3(outdir: Path) -> None:
    """Beating versus temperature for five rotation angles, both photon orders."""
    deltas = {"0": 0.0, "pi6": math.pi / 6, "pi4": math.pi / 4,
              "pi3": math.pi / 3, "pi2": math.pi / 2}
    temperatures = np.linspace(291.0, 319.0, 561)
    spectrum = SpectrumParams(kind="sinc2", L_spdc_mm=20.0)
    config = parse_config(_figure_config(spectrum={"kind": "sinc2", "L_spdc_mm": 20.0}))
    crystal = config.crystal
    series = {}
    for tag, delta in deltas.items():
        r4, r5, r45 = expected_rates(delta, crystal, spectrum, temperatures)
        _write_csv(
            str(outdir / f"fig3_delta_{tag}.csv"),
            ["temperature_K", "R4", "R5", "R45"],
            [[float(t), float(a), float(b), float(c)]
             for t, a, b, c in zip(temperatures, r4, r5, r45)],
        )
        series[f"R4 d={tag}"] = r4
        series[f"R45 d={tag}"] = r45
    plots.render_fringe(
        temperatures, series, str(outdir / "fig3_beating.png"),
        title="Beating fringes, five rotation angles",
    )


def _reproduce_fig4(outdir: Path) -> None:
    """Visibility versus path imbalance for a 1.3 nm unfiltered spectrum."""
    doc = _figure_config(spectrum={"kind": "sinc2", "fwhm_nm": 1.3})
    config = parse_config(doc)
    density = _density_for(config)
    rows = []
    for dl in (0.0, 0.66, 5.87):
        comp = replace(config.compensator, extra_path_mm=dl)
        interf = replace(config.interferometer, compensator=comp)
        v1 = imbalance_visibility(interf, density, photon_order=1)
        v2 = imbalance_visibility(interf, density, photon_order=2)
        rows.append([dl, v1, v2])
    _write_csv(
        str(outdir / "fig4_imbalance.csv"),
        ["dL_mm", "visibility_single", "visibility_two"],
        rows,
    )
    arr = np.array(rows)
    plots.render_imbalance(arr[:, 0], arr[:, 1], arr[:, 2],
                           str(outdir / "fig4_imbalance.png"))


def _reproduce_fig5(outdir: Path) -> None:
    """Broadband beating at delta = pi/4 with the decohered cross term."""
    sigma = math.pi / math.sqrt(math.log(2.0)) * 50.0e9 * 1.0e-12  # rad/ps
    doc = _figure_config(
        crystal={"dny_dT": 1.03e-5, "dnz_dT": 1.620e-5},
        interferometer={"delta_rad": math.pi / 4, "pump_center_nm": 775.0},
        spectrum={"kind": "gaussian", "sigma_rad_s": sigma * 1.0e12},
    )
    config = parse_config(doc)
    temperatures = np.linspace(291.0, 319.0, 561)
    r4, r5, r45 = expected_rates(
        config.delta, config.crystal, config.spectrum, temperatures
    )
    _write_csv(
        str(outdir / "fig5_broadband.csv"),
        ["temperature_K", "R4", "R5", "R45"],
        [[float(t), float(a), float(b), float(c)]
         for t, a, b, c in zip(temperatures, r4, r5, r45)],
    )
    plots.render_fringe(
        temperatures, {"R4": r4, "R45": r45}, str(outdir / "fig5_broadband.png"),
        title="Broadband beating at delta = pi/4",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmzi",
        description="Birefringent MZI photon-interference simulator and fitter",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="temperature-swept fringe CSV")
    p.add_argument("--config", "-c", required=True)
    p.add_argument("--out", "-o", required=True, help="output CSV path or '-'")
    p.add_argument("--model", choices=["analytic", "oracle"], default="analytic")
    p.add_argument("--plot", help="also render a PNG to this path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a fringe CSV, emit FitResult JSON")
    p.add_argument("--config", "-c", required=True)
    p.add_argument("--data", "-d", required=True, help="fringe CSV")
    p.add_argument("--out", "-o", required=True, help="output JSON path or '-'")
    p.add_argument("--photon", choices=["single", "two"], default="two")
    p.add_argument("--background", action="store_true",
                   help="fit a flat background level")
    p.add_argument("--allow-partial", action="store_true",
                   help="accept fits with unidentifiable parameters")
    p.add_argument("--plot", help="also render data + fit PNG")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("hom", help="HOM dip versus delay CSV")
    p.add_argument("--config", "-c", required=True)
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--tau-max", type=float, default=25.0, help="max |delay| in ps")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--plot")
    p.set_defaults(func=cmd_hom)

    p = sub.add_parser("imbalance", help="visibility versus path imbalance CSV")
    p.add_argument("--config", "-c", required=True)
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--dL", required=True, help="comma-separated imbalances in mm")
    p.add_argument("--plot")
    p.set_defaults(func=cmd_imbalance)

    p = sub.add_parser("reproduce", help="canned figure reproductions")
    p.add_argument("--figure", choices=["fig2", "fig3", "fig4", "fig5", "all"],
                   default="all")
    p.add_argument("--outdir", default="reproduction")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except QuadratureError as exc:
        print(f"error: quadrature: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE


if __name__ == "__main__":
    sys.exit(main())
