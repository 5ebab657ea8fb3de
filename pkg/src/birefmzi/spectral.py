"""Numerical oracle: quadrature over arbitrary spectra, HOM dips, imbalance.

Everything here is deliberately independent of the closed forms in
:mod:`birefmzi.rates`: count rates are assembled per-frequency from the mode
algebra and integrated adaptively.  Agreement between the two routes is the
package's core correctness check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .crystal import C_MM_PER_PS
from .modes import InterferometerConfig, coincidence_kernel
from .rates import CountRates, SpectrumParams

# truncating the sinc^2 tail perturbs the normalized cosine transform by
# O(1/lobes); 200 lobes keeps the triangle shape good to a few 1e-4
SINC2_LOBES = 200
GAUSSIAN_WIDTHS = 8.0
NEAR_DELTA_WIDTH = 1.0e-9  # rad/ps


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature cannot reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved absolute error {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class QuadratureSettings:
    relative_tolerance: float = 1.0e-9
    absolute_tolerance: float = 1.0e-12
    max_subdivisions: int = 400

    def __post_init__(self) -> None:
        if self.relative_tolerance <= 0.0 or self.absolute_tolerance <= 0.0:
            raise ValueError("quadrature tolerances must be positive")


DEFAULT_SETTINGS = QuadratureSettings()


def _quad(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    settings: QuadratureSettings,
    weight: str | None = None,
    wvar: float | None = None,
) -> float:
    kwargs: dict = dict(
        epsabs=settings.absolute_tolerance,
        epsrel=settings.relative_tolerance,
        limit=settings.max_subdivisions,
        full_output=True,
    )
    if weight is not None:
        kwargs["weight"] = weight
        kwargs["wvar"] = wvar
    out = quad(f, lo, hi, **kwargs)
    value, abserr = out[0], out[1]
    if len(out) > 3:  # warning message present
        # QUADPACK's error estimate for the oscillatory rule is conservative
        # and plateaus near 1e-7; results below that floor are accepted.
        tol = max(
            settings.absolute_tolerance,
            abs(value) * settings.relative_tolerance,
            1.0e-7,
        )
        if abserr > 10.0 * tol:
            raise QuadratureError("quadrature did not converge", abserr)
    return value


class SpectralDensity:
    """Normalized 1-D spectral density on a finite support.

    ``evaluator`` maps detuning (rad/ps) to an unnormalized nonnegative
    density; the constructor normalizes numerically so the unit-integral
    invariant holds to quadrature tolerance by construction.
    """

    def __init__(
        self,
        evaluator: Callable[[float], float],
        support: tuple[float, float],
        settings: QuadratureSettings = DEFAULT_SETTINGS,
    ):
        lo, hi = support
        if not lo < hi:
            raise ValueError("support must be a nonempty interval")
        self._raw = evaluator
        self.support = (lo, hi)
        self.settings = settings
        norm = _quad(evaluator, lo, hi, settings)
        if norm <= 0.0:
            raise ValueError("spectral density integrates to a nonpositive value")
        self._norm = norm

    def pdf(self, detuning: float) -> float:
        return self._raw(detuning) / self._norm

    def integrate(self, f: Callable[[float], float]) -> float:
        """Expectation of f under the density (adaptive quadrature)."""
        lo, hi = self.support
        return _quad(lambda v: f(v) * self.pdf(v), lo, hi, self.settings)

    def cosine_transform(self, t: float) -> float:
        """integral of pdf(v) * cos(v t) dv."""
        lo, hi = self.support
        # allow a few subdivisions per oscillation of the kernel
        oscillations = int((hi - lo) * abs(t) / math.pi) + 50
        settings = self.settings
        if settings.max_subdivisions < 2 * oscillations:
            settings = replace(settings, max_subdivisions=2 * oscillations)
        return _quad(lambda v: self.pdf(v) * math.cos(v * t), lo, hi, settings)

    @classmethod
    def gaussian(
        cls,
        sigma: float,
        truncation_widths: float = GAUSSIAN_WIDTHS,
        settings: QuadratureSettings = DEFAULT_SETTINGS,
    ) -> "SpectralDensity":
        if sigma <= 0.0:
            raise ValueError("sigma must be positive")
        span = truncation_widths * sigma
        return cls(
            lambda v: math.exp(-((v / sigma) ** 2)),
            (-span, span),
            settings,
        )

    @classmethod
    def sinc2(
        cls,
        gamma_ps: float,
        lobes: int = SINC2_LOBES,
        settings: QuadratureSettings = DEFAULT_SETTINGS,
    ) -> "SpectralDensity":
        if gamma_ps <= 0.0:
            raise ValueError("gamma must be positive")
        span = lobes * math.pi / gamma_ps
        # each lobe (and each oscillation of a transform kernel on this
        # support) needs its own subintervals
        if settings.max_subdivisions < 30 * lobes:
            settings = replace(settings, max_subdivisions=30 * lobes)

        def density(v: float) -> float:
            x = gamma_ps * v
            if x == 0.0:
                return 1.0
            return (math.sin(x) / x) ** 2

        return cls(density, (-span, span), settings)

    @classmethod
    def near_delta(
        cls,
        width: float = NEAR_DELTA_WIDTH,
        settings: QuadratureSettings = DEFAULT_SETTINGS,
    ) -> "SpectralDensity":
        """Numerically resolvable stand-in for a monochromatic line."""
        return cls.gaussian(width, settings=settings)

    @classmethod
    def from_params(
        cls,
        params: SpectrumParams,
        group_delay_mismatch: float = 0.0,
        settings: QuadratureSettings = DEFAULT_SETTINGS,
    ) -> "SpectralDensity":
        if params.kind == "monochromatic":
            return cls.near_delta(settings=settings)
        if params.kind == "gaussian":
            assert params.sigma is not None
            return cls.gaussian(params.sigma, settings=settings)
        if params.gamma_ps is not None:
            return cls.sinc2(params.gamma_ps, settings=settings)
        assert params.L_spdc_mm is not None
        if group_delay_mismatch == 0.0:
            raise ValueError("sinc2 width from L_spdc requires the crystal's D")
        return cls.sinc2(0.5 * group_delay_mismatch * params.L_spdc_mm, settings=settings)


def integrate_single(
    config: InterferometerConfig,
    spectrum: SpectralDensity,
    dT: float,
    input_port: int = 1,
) -> CountRates:
    """Single-photon count rate by direct quadrature of the spectral integral."""

    def p4(v: float) -> float:
        amp = config.amplitudes_at(v, dT)
        return amp.single_photon_probabilities(input_port)[0]

    r4 = spectrum.integrate(p4)
    return CountRates(r4=r4, r5=1.0 - r4)


def integrate_coincidence(
    config: InterferometerConfig,
    spectrum: SpectralDensity,
    dT: float,
) -> float:
    """Coincidence probability for a CW-pumped degenerate pair.

    The pump delta function is resolved analytically: the idler detuning is
    minus the signal detuning, reducing the joint integral to one dimension
    weighted by the (symmetric) marginal density.
    """

    def kernel(v: float) -> float:
        amp_s = config.amplitudes_at(v, dT)
        amp_i = config.amplitudes_at(-v, dT)
        return coincidence_kernel(amp_s, amp_i)

    return spectrum.integrate(kernel)


def hom_dip(spectrum: SpectralDensity, tau_ps: float) -> float:
    """Two-photon beam-splitter coincidence at relative delay tau.

    Standard HOM form 1/2 * [1 - integral f^2(v) cos(2 v tau) dv] for a
    symmetric marginal spectrum (textbook result for degenerate CW-pumped
    pairs; the dip shape is the cosine transform of the spectrum).
    """
    return 0.5 * (1.0 - spectrum.cosine_transform(2.0 * tau_ps))


def fringe_harmonics(
    config: InterferometerConfig,
    spectrum: SpectralDensity,
    photon_order: int,
    dT: float = 0.0,
    n_phases: int = 8,
) -> tuple[float, float]:
    """(mean level, amplitude) of the fringe swept via the compensator phase.

    The swept rate is band-limited in the compensator offset (harmonic 1 for
    singles, harmonic 2 for coincidences), so a short uniform DFT extracts
    the amplitude exactly up to quadrature error.
    """
    if photon_order not in (1, 2):
        raise ValueError("photon_order must be 1 or 2")
    base = config.compensator.static_phase_rad
    phases = base + np.arange(n_phases) * (2.0 * math.pi / n_phases)
    values = []
    for phi in phases:
        comp = replace(config.compensator, static_phase_rad=float(phi))
        cfg = replace(config, compensator=comp)
        if photon_order == 1:
            values.append(integrate_single(cfg, spectrum, dT).r4)
        else:
            values.append(integrate_coincidence(cfg, spectrum, dT))
    values = np.asarray(values)
    mean = float(values.mean())
    spectrum_bin = np.exp(-1j * photon_order * (phases - base))
    amplitude = 2.0 * abs(np.sum(values * spectrum_bin)) / n_phases
    return mean, float(amplitude)


def imbalance_visibility(
    config: InterferometerConfig,
    spectrum: SpectralDensity,
    photon_order: int,
    dT: float = 0.0,
) -> float:
    """Fringe visibility (max-min)/(max+min) at the config's path imbalance."""
    mean, amplitude = fringe_harmonics(config, spectrum, photon_order, dT)
    if mean <= 0.0:
        return 0.0
    return amplitude / mean


def path_delay_ps(extra_path_mm: float) -> float:
    """Group delay (ps) associated with a geometric path imbalance."""
    return extra_path_mm / C_MM_PER_PS
