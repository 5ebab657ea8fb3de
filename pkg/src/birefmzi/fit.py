"""Nonlinear least-squares recovery of thermal-dispersion parameters.

The fitter is a damped (Levenberg-Marquardt) least-squares loop written
in-house, with analytic Jacobians for the beating models, Poisson weighting
1/sqrt(counts + 1), and periodogram-peak frequency seeding refined by a
linear amplitude solve over candidate tone assignments.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fringe import FringeDataset
from .rates import IDENTIFIABILITY_EPS

PARAM_NAMES = (
    "amplitude",
    "background",
    "dky_dT",
    "dkz_dT",
    "phase_y",
    "phase_z",
    "vis_y",
    "vis_z",
    "vis_cross",
)

# Visibilities may drift slightly above 1 under Poisson noise; a hard cap at
# the physical bound would bias and stall the optimizer.
_VIS_UPPER = 1.2

# number of top-ranked tone-assignment seeds polished with the full optimizer
_N_SEED_REFINEMENTS = 4


class UnidentifiableModelError(ValueError):
    """Requested parameters carry no signal at the given rotation angle."""


@dataclass(frozen=True)
class FitModel:
    """Beating-fringe forward model with fixed geometry (delta, L).

    kind 'single_photon' is the broadband single-count shape (two tones at
    the axis frequencies); 'two_photon' is the coincidence shape (doubled
    tones plus a sum-frequency cross tone).  Free parameters per
    ``PARAM_NAMES``: overall amplitude, optional flat background, the two
    thermal wavenumber slopes (rad/(mm*K)), per-axis phase offsets at the
    temperature origin, and per-term visibilities.
    """

    kind: str
    delta: float
    crystal_length_mm: float
    reference_temperature_K: float
    fit_background: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("single_photon", "two_photon"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.crystal_length_mm <= 0.0:
            raise ValueError("crystal length must be positive")

    @property
    def coefficients(self) -> tuple[float, float, float]:
        """(y, z, cross) angular sensitivity coefficients."""
        c2 = math.cos(self.delta) ** 2
        s2 = math.sin(self.delta) ** 2
        if self.kind == "single_photon":
            return c2, s2, 0.0
        return c2 * c2, s2 * s2, 2.0 * c2 * s2

    def unidentifiable_parameters(self) -> list[str]:
        """Parameters frozen because their sensitivity coefficient vanishes."""
        cy, cz, cx = self.coefficients
        frozen: list[str] = []
        if cy < IDENTIFIABILITY_EPS:
            frozen += ["dky_dT", "phase_y", "vis_y"]
        if cz < IDENTIFIABILITY_EPS:
            frozen += ["dkz_dT", "phase_z", "vis_z"]
        if self.kind == "single_photon" or cx < IDENTIFIABILITY_EPS:
            frozen += ["vis_cross"]
        # the cross tone alone cannot pin both axes
        if cy < IDENTIFIABILITY_EPS or cz < IDENTIFIABILITY_EPS:
            if "vis_cross" not in frozen:
                frozen += ["vis_cross"]
        return frozen

    def free_mask(self) -> np.ndarray:
        frozen = set(self.unidentifiable_parameters())
        if not self.fit_background:
            frozen.add("background")
        return np.array([name not in frozen for name in PARAM_NAMES])

    def _tone_args(self, theta: np.ndarray, dT: np.ndarray):
        _, _, wy, wz, py, pz, _, _, _ = theta
        L = self.crystal_length_mm
        uy = wy * L * dT + py
        uz = wz * L * dT + pz
        if self.kind == "single_photon":
            return uy, uz, None
        return 2.0 * uy, 2.0 * uz, uy + uz

    def rate(self, theta: np.ndarray, temperatures: np.ndarray) -> np.ndarray:
        """Expected counts per point for the full 9-parameter vector."""
        A, B = theta[0], theta[1]
        vy, vz, vx = theta[6], theta[7], theta[8]
        cy, cz, cx = self.coefficients
        dT = np.asarray(temperatures, dtype=float) - self.reference_temperature_K
        ay, az, ax = self._tone_args(theta, dT)
        shape = 1.0 + cy * vy * np.cos(ay) + cz * vz * np.cos(az)
        if ax is not None:
            shape = shape + cx * vx * np.cos(ax)
        return B + 0.5 * A * shape

    def jacobian(self, theta: np.ndarray, temperatures: np.ndarray) -> np.ndarray:
        """Analytic d(rate)/d(theta), shape (n_points, 9)."""
        A = theta[0]
        vy, vz, vx = theta[6], theta[7], theta[8]
        cy, cz, cx = self.coefficients
        L = self.crystal_length_mm
        dT = np.asarray(temperatures, dtype=float) - self.reference_temperature_K
        ay, az, ax = self._tone_args(theta, dT)
        order = 1.0 if self.kind == "single_photon" else 2.0

        J = np.zeros((dT.size, len(PARAM_NAMES)))
        shape = 1.0 + cy * vy * np.cos(ay) + cz * vz * np.cos(az)
        sin_y = np.sin(ay)
        sin_z = np.sin(az)
        if ax is not None:
            shape = shape + cx * vx * np.cos(ax)
            sin_x = np.sin(ax)
        J[:, 0] = 0.5 * shape  # amplitude
        J[:, 1] = 1.0  # background
        # tone arguments scale with order in the harmonic, cross with 1
        dy_darg = -0.5 * A * cy * vy * sin_y
        dz_darg = -0.5 * A * cz * vz * sin_z
        J[:, 2] = dy_darg * order * L * dT
        J[:, 3] = dz_darg * order * L * dT
        J[:, 4] = dy_darg * order
        J[:, 5] = dz_darg * order
        J[:, 6] = 0.5 * A * cy * np.cos(ay)
        J[:, 7] = 0.5 * A * cz * np.cos(az)
        if ax is not None:
            dx_darg = -0.5 * A * cx * vx * sin_x
            J[:, 2] += dx_darg * L * dT
            J[:, 3] += dx_darg * L * dT
            J[:, 4] += dx_darg
            J[:, 5] += dx_darg
            J[:, 8] = 0.5 * A * cx * np.cos(ax)
        return J

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lower = np.array([1e-12, 0.0, 0.0, 0.0, -np.inf, -np.inf, 0.0, 0.0, 0.0])
        upper = np.array(
            [np.inf, np.inf, np.inf, np.inf, np.inf, np.inf,
             _VIS_UPPER, _VIS_UPPER, _VIS_UPPER]
        )
        return lower, upper


@dataclass
class FitResult:
    """Estimates, 1-sigma errors, and convergence metadata for one fit."""

    parameter_names: list[str]
    estimates: dict[str, float]
    standard_errors: dict[str, float]
    covariance: np.ndarray  # over free parameters, ordered as free_names
    free_names: list[str]
    unidentifiable: list[str]
    residual_norm: float
    converged: bool
    iterations: int
    message: str = ""

    def to_json(self, path_or_buffer=None) -> str:
        payload = {
            "parameter_names": self.parameter_names,
            "estimates": self.estimates,
            "standard_errors": self.standard_errors,
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "free_names": self.free_names,
            "unidentifiable": self.unidentifiable,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "iterations": self.iterations,
            "message": self.message,
        }
        text = json.dumps(payload, indent=2, sort_keys=True)
        if path_or_buffer is not None:
            if hasattr(path_or_buffer, "write"):
                path_or_buffer.write(text + "\n")
            else:
                with open(path_or_buffer, "w") as fh:
                    fh.write(text + "\n")
        return text

    @classmethod
    def from_json(cls, path_or_buffer) -> "FitResult":
        if hasattr(path_or_buffer, "read"):
            payload = json.load(path_or_buffer)
        else:
            with open(path_or_buffer) as fh:
                payload = json.load(fh)
        payload["covariance"] = np.asarray(payload["covariance"], dtype=float)
        return cls(**payload)


def levenberg_marquardt(
    residual_fn,
    jacobian_fn,
    x0: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    max_iterations: int = 300,
    gtol: float = 1.0e-12,
    ftol: float = 1.0e-14,
    xtol: float = 1.0e-14,
):
    """Damped least-squares minimizer with box projection.

    Minimizes ||residual(x)||^2.  Returns (x, converged, iterations, message).
    """
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    r = residual_fn(x)
    cost = float(r @ r)
    lam = 1.0e-3
    converged = False
    message = "maximum iterations reached"
    it = 0
    for it in range(1, max_iterations + 1):
        J = jacobian_fn(x)
        g = J.T @ r
        scale = max(cost, 1.0)
        if np.max(np.abs(g)) < gtol * scale:
            converged, message = True, "gradient below tolerance"
            break
        H = J.T @ J
        diag = np.clip(np.diag(H), 1.0e-12, None)
        accepted = False
        while lam < 1.0e14:
            try:
                step = np.linalg.solve(H + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = np.clip(x + step, lower, upper)
            r_new = residual_fn(x_new)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                dx = np.max(np.abs(x_new - x) / np.maximum(np.abs(x), 1.0e-12))
                dcost = cost - cost_new
                x, r, cost = x_new, r_new, cost_new
                lam = max(lam * 0.25, 1.0e-14)
                accepted = True
                if dcost < ftol * max(cost, 1.0e-300) or dx < xtol:
                    converged, message = True, "step/cost change below tolerance"
                break
            lam *= 10.0
        if not accepted:
            converged, message = True, "damping saturated (local minimum)"
            break
        if converged:
            break
    return x, converged, it, message


def _periodogram_peaks(
    temperatures: np.ndarray, counts: np.ndarray, n_peaks: int = 4
) -> list[float]:
    """Dominant angular frequencies (rad/K) of the detrended fringe.

    Least-squares periodogram (best-fit single-cosine power on a frequency
    grid).  Unlike a windowed FFT this resolves tones separated by less than
    a resolution bin, which matters for short sweeps covering only a few
    fringe periods.
    """
    dT = temperatures - temperatures.mean()
    y = counts - counts.mean()
    span = temperatures[-1] - temperatures[0]
    step = float(np.min(np.diff(temperatures)))
    w_min = math.pi / span  # half a period across the sweep
    w_max = math.pi / step  # Nyquist for the densest sampling
    dw = 0.125 * math.pi / span  # 1/16 cycle phase error across the sweep
    grid = np.arange(w_min, w_max, dw)

    arg = grid[:, None] * dT[None, :]
    c = np.cos(arg)
    s = np.sin(arg)
    scc = np.sum(c * c, axis=1)
    sss = np.sum(s * s, axis=1)
    scs = np.sum(c * s, axis=1)
    det = scc * sss - scs * scs
    det = np.where(np.abs(det) < 1.0e-30, 1.0e-30, det)

    out: list[float] = []
    # deflation: subtract each recovered tone so that a weak tone is not
    # buried under a stronger neighbor's spectral leakage
    for _ in range(n_peaks):
        scy = c @ y
        ssy = s @ y
        a_cos = (sss * scy - scs * ssy) / det
        a_sin = (scc * ssy - scs * scy) / det
        power = a_cos * scy + a_sin * ssy  # variance explained by the tone
        k = int(np.argmax(power))
        if power[k] <= 1.0e-12 * float(y @ y) + 1.0e-300:
            break
        w = grid[k]
        if 0 < k < grid.size - 1:
            p0, p1, p2 = power[k - 1], power[k], power[k + 1]
            denom = p0 - 2.0 * p1 + p2
            if denom != 0:
                w += 0.5 * (p0 - p2) / denom * dw
        # exact least-squares tone at the refined frequency, then subtract
        cw = np.cos(w * dT)
        sw = np.sin(w * dT)
        X = np.stack([cw, sw], axis=1)
        beta, *_ = np.linalg.lstsq(X, y, rcond=None)
        y = y - X @ beta
        if all(abs(w - prev) > 2.0 * dw for prev in out):
            out.append(float(w))
    return out


def _candidate_tone_pairs(peaks: list[float], model: FitModel) -> list[tuple[float, float]]:
    """Candidate (w_y*L, w_z*L) fringe frequencies from FFT peaks."""
    cands: list[tuple[float, float]] = []

    def add(a: float, b: float) -> None:
        if a <= 0.0 or b <= 0.0:
            return
        # convention: the slower tone is the y axis (dn_y/dT < dn_z/dT in KTP)
        lo, hi = sorted((a, b))
        for c in cands:
            if abs(c[0] - lo) < 1e-6 * hi and abs(c[1] - hi) < 1e-6 * hi:
                return
        cands.append((lo, hi))

    if model.kind == "single_photon":
        for i in range(len(peaks)):
            for j in range(i + 1, len(peaks)):
                add(peaks[i], peaks[j])
        if len(peaks) == 1:
            add(peaks[0], 1.6 * peaks[0])
            add(peaks[0], peaks[0] / 1.6)
    else:
        # peaks live at 2w_y, 2w_z, and w_y + w_z
        for i in range(len(peaks)):
            for j in range(len(peaks)):
                if i == j:
                    continue
                a, b = peaks[i], peaks[j]
                add(0.5 * a, 0.5 * b)  # both doubled tones
                add(0.5 * a, b - 0.5 * a)  # a doubled, b the cross tone
        if len(peaks) == 1:
            add(0.5 * peaks[0], 0.8 * peaks[0])
            add(0.5 * peaks[0], 0.5 * peaks[0] * 1.6)
    return cands


def _linear_seed(
    model: FitModel,
    temperatures: np.ndarray,
    counts: np.ndarray,
    weights: np.ndarray,
    tone_pair: tuple[float, float],
    background: float,
) -> tuple[np.ndarray, float]:
    """Solve the amplitude-linear subproblem at fixed tone frequencies.

    Returns a full 9-parameter seed vector and its weighted residual cost.
    """
    dT = temperatures - model.reference_temperature_K
    wy_L, wz_L = tone_pair
    order = 1.0 if model.kind == "single_photon" else 2.0
    args = [order * wy_L * dT, order * wz_L * dT]
    if model.kind == "two_photon":
        args.append((wy_L + wz_L) * dT)
    cols = [np.ones_like(dT)]
    for a in args:
        cols += [np.cos(a), np.sin(a)]
    X = np.stack(cols, axis=1) * weights[:, None]
    yw = (counts - background) * weights
    beta, *_ = np.linalg.lstsq(X, yw, rcond=None)
    resid = yw - X @ beta
    cost = float(resid @ resid)

    cy, cz, cx = model.coefficients
    offset = max(beta[0], 1.0e-9)
    A = 2.0 * offset
    theta = np.zeros(len(PARAM_NAMES))
    theta[0] = A
    theta[1] = background
    L = model.crystal_length_mm
    theta[2] = wy_L / L
    theta[3] = wz_L / L

    def tone(i0: int, coeff: float) -> tuple[float, float]:
        a_cos, a_sin = beta[i0], beta[i0 + 1]
        amp = math.hypot(a_cos, a_sin)
        phase = math.atan2(-a_sin, a_cos)
        vis = 0.0 if coeff < IDENTIFIABILITY_EPS else amp / (0.5 * A * coeff)
        return min(vis, _VIS_UPPER), phase

    vy, py = tone(1, cy)
    vz, pz = tone(3, cz)
    theta[4] = py / order
    theta[5] = pz / order
    theta[6] = vy
    theta[7] = vz
    theta[8] = 1.0
    if model.kind == "two_photon" and cx >= IDENTIFIABILITY_EPS:
        a_cos, a_sin = beta[5], beta[6]
        amp = math.hypot(a_cos, a_sin)
        theta[8] = min(amp / (0.5 * A * cx), _VIS_UPPER)
    return theta, cost


def fit(
    dataset: FringeDataset,
    model: FitModel,
    initial_guess: np.ndarray | None = None,
    background: float = 0.0,
    max_iterations: int = 300,
) -> FitResult:
    """Fit a beating model to one count column of the dataset.

    Poisson-weighted residuals (weight 1/sqrt(counts + 1)); frequencies are
    seeded from FFT peaks unless a full 9-parameter initial guess is given.
    Parameters with vanishing sensitivity at the model's rotation angle are
    frozen and reported in ``unidentifiable`` instead of being returned with
    unbounded variance.
    """
    temperatures = dataset.temperature_K
    counts = dataset.counts_for(model.kind)
    weights = 1.0 / np.sqrt(counts + 1.0)

    unidentifiable = model.unidentifiable_parameters()
    mask = model.free_mask()

    if initial_guess is not None:
        seeds = [np.asarray(initial_guess, dtype=float).copy()]
    else:
        peaks = _periodogram_peaks(temperatures, counts)
        candidates = _candidate_tone_pairs(peaks, model)
        if not candidates:
            candidates = [(0.3, 0.5)]
        scored = sorted(
            (
                _linear_seed(model, temperatures, counts, weights, pair, background)
                for pair in candidates
            ),
            key=lambda pc: pc[1],
        )
        # the linear-seed cost can misrank near-degenerate tone assignments;
        # polish the best few with the full optimizer and keep the winner
        seeds = [theta for theta, _ in scored[:_N_SEED_REFINEMENTS]]
    theta0 = seeds[0]

    # span check against the slowest seeded tone
    span = temperatures[-1] - temperatures[0]
    L = model.crystal_length_mm
    slowest = min(w for w in (theta0[2], theta0[3]) if w > 0) if max(theta0[2], theta0[3]) > 0 else 0.0
    if slowest > 0 and span * slowest * L < 2.0 * 2.0 * math.pi:
        warnings.warn(
            "sweep spans fewer than two periods of the slowest fringe component",
            stacklevel=2,
        )

    lower, upper = model.bounds()

    def make_funcs(frozen_theta: np.ndarray):
        def expand(x_free: np.ndarray) -> np.ndarray:
            th = frozen_theta.copy()
            th[mask] = x_free
            return th

        def residual(x_free: np.ndarray) -> np.ndarray:
            return (model.rate(expand(x_free), temperatures) - counts) * weights

        def jac(x_free: np.ndarray) -> np.ndarray:
            return (
                model.jacobian(expand(x_free), temperatures)[:, mask]
                * weights[:, None]
            )

        return expand, residual, jac

    best = None
    for theta0 in seeds:
        start = np.clip(theta0, lower, upper)
        expand, residual, jac = make_funcs(start)
        x, converged, iterations, message = levenberg_marquardt(
            residual,
            jac,
            start[mask],
            lower[mask],
            upper[mask],
            max_iterations=max_iterations,
        )
        r = residual(x)
        cost = float(r @ r)
        if best is None or cost < best[0]:
            best = (cost, expand(x), converged, iterations, message)
    _, theta_full, converged, iterations, message = best
    x = theta_full[mask]
    _, residual, jac = make_funcs(theta_full)
    r = residual(x)
    J = jac(x)
    try:
        cov = np.linalg.pinv(J.T @ J)
    except np.linalg.LinAlgError:
        cov = np.full((x.size, x.size), np.nan)

    free_names = [n for n, m in zip(PARAM_NAMES, mask) if m]
    stderr = {n: float(math.sqrt(max(cov[i, i], 0.0))) for i, n in enumerate(free_names)}
    estimates = {n: float(v) for n, v in zip(PARAM_NAMES, theta_full)}
    return FitResult(
        parameter_names=list(PARAM_NAMES),
        estimates=estimates,
        standard_errors=stderr,
        covariance=cov,
        free_names=free_names,
        unidentifiable=unidentifiable,
        residual_norm=float(np.linalg.norm(r)),
        converged=converged,
        iterations=iterations,
        message=message,
    )
