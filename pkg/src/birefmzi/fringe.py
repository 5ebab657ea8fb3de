"""Synthetic temperature-swept fringes with Poisson counting noise."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .crystal import BirefringentCrystal
from .rates import SpectrumParams, rates_for_spectrum

CSV_HEADER = ("temperature_K", "singles4", "singles5", "coincidences")


@dataclass
class FringeDataset:
    """Per-temperature counts for one sweep.

    Counts are floats so a noiseless dataset can carry exact expectations;
    Poisson-sampled datasets hold integers stored as floats.
    """

    temperature_K: np.ndarray
    singles4: np.ndarray
    singles5: np.ndarray
    coincidences: np.ndarray
    integration_time_s: float = 10.0
    mean_rate_scale: float = 1.0
    rng_seed: int | None = None

    def __post_init__(self) -> None:
        self.temperature_K = np.asarray(self.temperature_K, dtype=float)
        self.singles4 = np.asarray(self.singles4, dtype=float)
        self.singles5 = np.asarray(self.singles5, dtype=float)
        self.coincidences = np.asarray(self.coincidences, dtype=float)
        n = self.temperature_K.size
        if n == 0:
            raise ValueError("empty temperature sweep")
        for name in ("singles4", "singles5", "coincidences"):
            arr = getattr(self, name)
            if arr.shape != self.temperature_K.shape:
                raise ValueError(f"{name} length does not match the sweep")
            if np.any(arr < 0):
                raise ValueError(f"{name} contains negative counts")
        if np.any(np.diff(self.temperature_K) <= 0):
            raise ValueError("temperatures must be strictly increasing")

    def counts_for(self, kind: str) -> np.ndarray:
        """Count column used by a fit-model family."""
        if kind == "single_photon":
            return self.singles4
        if kind == "two_photon":
            return self.coincidences
        raise ValueError(f"unknown model kind {kind!r}")

    def to_csv(self, path_or_buffer) -> None:
        if hasattr(path_or_buffer, "write"):
            self._write(path_or_buffer)
        else:
            with open(path_or_buffer, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in zip(
            self.temperature_K, self.singles4, self.singles5, self.coincidences
        ):
            # shortest round-trip float repr: CSV -> dataset is lossless
            writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path_or_buffer) -> "FringeDataset":
        if hasattr(path_or_buffer, "read"):
            return cls._read(path_or_buffer)
        with open(path_or_buffer, newline="") as fh:
            return cls._read(fh)

    @classmethod
    def _read(cls, fh) -> "FringeDataset":
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(CSV_HEADER) <= set(reader.fieldnames):
            raise ValueError(
                f"fringe CSV must carry columns {','.join(CSV_HEADER)}, "
                f"got {reader.fieldnames}"
            )
        cols: dict[str, list[float]] = {name: [] for name in CSV_HEADER}
        for lineno, row in enumerate(reader, start=2):
            for name in CSV_HEADER:
                try:
                    cols[name].append(float(row[name]))
                except (TypeError, ValueError) as exc:
                    raise ValueError(f"line {lineno}: bad value for {name}") from exc
        return cls(
            temperature_K=np.array(cols["temperature_K"]),
            singles4=np.array(cols["singles4"]),
            singles5=np.array(cols["singles5"]),
            coincidences=np.array(cols["coincidences"]),
        )


def expected_rates(
    delta: float,
    crystal: BirefringentCrystal,
    spectrum: SpectrumParams,
    temperatures: np.ndarray,
    phi_c: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(R4, R5, R45) arrays over a temperature sweep, from the closed forms."""
    temperatures = np.asarray(temperatures, dtype=float)
    r4 = np.empty_like(temperatures)
    r5 = np.empty_like(temperatures)
    r45 = np.empty_like(temperatures)
    for idx, T in enumerate(temperatures):
        dT = T - crystal.reference_temperature_K
        rates = rates_for_spectrum(delta, crystal, spectrum, dT, phi_c)
        r4[idx], r5[idx], r45[idx] = rates.r4, rates.r5, rates.r45
    return r4, r5, r45


def synthesize(
    delta: float,
    crystal: BirefringentCrystal,
    spectrum: SpectrumParams,
    temperatures: np.ndarray,
    mean_counts: float,
    seed: int | None = None,
    background: float = 0.0,
    noiseless: bool = False,
) -> FringeDataset:
    """Forward-model a fringe dataset, Poisson noise unless noiseless.

    Expected counts are mean_counts * rate(T) + background per point; with a
    fixed seed the draw is deterministic.
    """
    temperatures = np.asarray(temperatures, dtype=float)
    if temperatures.size == 0:
        raise ValueError("empty temperature sweep")
    if mean_counts <= 0.0:
        raise ValueError("mean_counts must be positive")
    if background < 0.0:
        raise ValueError("background must be >= 0")

    r4, r5, r45 = expected_rates(delta, crystal, spectrum, temperatures)
    mu4 = mean_counts * r4 + background
    mu5 = mean_counts * r5 + background
    mu45 = mean_counts * r45 + background
    if noiseless:
        s4, s5, c45 = mu4, mu5, mu45
    else:
        rng = np.random.default_rng(seed)
        s4 = rng.poisson(mu4).astype(float)
        s5 = rng.poisson(mu5).astype(float)
        c45 = rng.poisson(mu45).astype(float)
    return FringeDataset(
        temperature_K=temperatures,
        singles4=s4,
        singles5=s5,
        coincidences=c45,
        mean_rate_scale=mean_counts,
        rng_seed=seed,
    )


def visibility(curve: np.ndarray) -> float:
    """(max - min)/(max + min) of a sampled rate curve.

    Callers should pass a fitted or analytic curve, not raw noisy counts.
    A flat curve returns 0 with a degeneracy warning.
    """
    curve = np.asarray(curve, dtype=float)
    if curve.size < 2:
        raise ValueError("need at least two samples")
    hi = float(curve.max())
    lo = float(curve.min())
    if hi + lo <= 0.0 or (hi - lo) <= 1.0e-12 * max(abs(hi), 1.0):
        warnings.warn("flat fringe: visibility degenerate, returning 0", stacklevel=2)
        return 0.0
    return (hi - lo) / (hi + lo)
