"""Phase-plate calibration from a single-photon fringe.

Tilting a glass plate by ``theta`` adds a phase that grows quadratically at
small angles. Recording the single-photon intensity while tilting gives
``I = cos(phi(theta))`` after normalisation. Inverting with ``acos`` only
yields values in ``[0, pi]``, so every reversal of the intensity direction
marks a branch change of ``pi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EXTREME_FRACTION = 0.02
HYSTERESIS = 0.02
# a monotone phase only turns the intensity around at I = +-1
TURNING_BAND = 0.5
FLATNESS_BOUND = 2 * np.pi / 10  # lambda/10 optical path expressed as phase
MIN_FIT_POINTS = 5


class CalibrationError(ValueError):
    pass


def normalize_intensity(intensity, extreme_fraction: float = EXTREME_FRACTION) -> np.ndarray:
    """Map raw counts onto ``[-1, 1]``.

    The extremes are the medians of the top and bottom ``extreme_fraction``
    of samples, which keeps single noise spikes from setting the scale. Use
    ``extreme_fraction=0`` for the raw minimum and maximum.
    """
    y = np.asarray(intensity, dtype=float)
    if y.size < 3:
        raise CalibrationError("need at least three intensity samples")
    ordered = np.sort(y)
    k = max(1, int(np.ceil(extreme_fraction * y.size)))
    lo, hi = np.median(ordered[:k]), np.median(ordered[-k:])
    span = hi - lo
    if not span > 1e-12 * max(abs(hi), abs(lo), 1.0):
        raise CalibrationError("scan does not span extrema")
    return np.clip((y - (hi + lo) / 2) / (span / 2), -1.0, 1.0)


def _reversal_indices(y: np.ndarray, hysteresis: float) -> tuple[list[int], int]:
    """Indices of direction reversals and the initial direction (+1 rising).

    A turn only counts when its extreme lies within ``TURNING_BAND`` of the
    matching end of the normalised range, so noise on the slope of the
    fringe cannot open a spurious branch.
    """
    reversals: list[int] = []
    direction = initial = 0
    lo_idx = hi_idx = extreme_idx = 0
    for i in range(1, len(y)):
        if direction == 0:
            lo_idx = i if y[i] < y[lo_idx] else lo_idx
            hi_idx = i if y[i] > y[hi_idx] else hi_idx
            if y[i] - y[lo_idx] > hysteresis:
                direction = initial = 1
            elif y[hi_idx] - y[i] > hysteresis:
                direction = initial = -1
            extreme_idx = i
            continue
        if direction * (y[i] - y[extreme_idx]) >= 0:
            extreme_idx = i
        elif direction * (y[extreme_idx] - y[i]) > hysteresis and direction * y[extreme_idx] > 1 - TURNING_BAND:
            reversals.append(extreme_idx)
            direction = -direction
            extreme_idx = i
    return reversals, (initial or -1)


def _past_vertex(y: np.ndarray, i: int) -> int:
    """0 if sample ``i`` already lies beyond the turning point, else 1.

    Uses the vertex of the parabola through the sample and its neighbours.
    """
    if i == 0 or i + 1 >= len(y):
        return 1
    denom = y[i - 1] - 2 * y[i] + y[i + 1]
    if denom == 0:
        return 1
    return 0 if 0.5 * (y[i - 1] - y[i + 1]) / denom < 0 else 1


def _unwrap_branch(y_norm: np.ndarray, hysteresis: float) -> np.ndarray:
    """Monotone increasing phase along the samples of one scan direction."""
    raw = np.arccos(y_norm)
    reversals, initial = _reversal_indices(y_norm, hysteresis)
    if len(reversals) > max(2, len(y_norm) // 4):
        raise CalibrationError("non-monotone branch ambiguity: too many intensity reversals")
    # a falling intensity means acos rises, so start on the even branch
    branch = np.full(len(y_norm), 0 if initial < 0 else 1)
    for idx in reversals:
        branch[idx + _past_vertex(y_norm, idx) :] += 1
    odd = branch % 2 == 1
    return np.where(odd, (branch + 1) * np.pi - raw, branch * np.pi + raw)


def phase_from_intensity(
    theta,
    intensity,
    extreme_fraction: float = EXTREME_FRACTION,
    hysteresis: float = HYSTERESIS,
) -> tuple[np.ndarray, np.ndarray]:
    """Recover ``phi(theta)`` from a tilt scan of the single-photon fringe.

    Scans that straddle ``theta = 0`` are unwrapped outward from zero on
    each side, so the returned phase increases with ``|theta|``.

    Returns:
        ``(theta, phi)`` sorted by ``theta``.

    Raises:
        CalibrationError: flat scan, or reversals too dense to resolve.
    """
    theta = np.asarray(theta, dtype=float)
    order = np.argsort(theta)
    theta = theta[order]
    y = normalize_intensity(np.asarray(intensity, dtype=float)[order], extreme_fraction)
    phi = np.empty_like(y)
    neg = theta < 0
    pos = ~neg
    if pos.any():
        phi[pos] = _unwrap_branch(y[pos], hysteresis)
    if neg.any():
        idx = np.flatnonzero(neg)[::-1]
        phi[idx] = _unwrap_branch(y[idx], hysteresis)
    return theta, phi


@dataclass
class CalibrationCurve:
    theta_points: np.ndarray
    phi_points: np.ndarray
    coefficient: float
    offset: float
    residuals: np.ndarray
    coefficient_stderr: float = float("nan")
    flatness_bound: float = FLATNESS_BOUND

    @property
    def flagged(self) -> np.ndarray:
        """Points whose residual exceeds the lambda/10 flatness bound."""
        return np.abs(self.residuals) > self.flatness_bound

    @property
    def within_flatness(self) -> bool:
        return not self.flagged.any()

    def phase(self, theta):
        return self.coefficient * np.asarray(theta, dtype=float) ** 2 + self.offset

    def to_json_obj(self) -> dict:
        return {
            "coefficient": self.coefficient,
            "coefficient_stderr": self.coefficient_stderr,
            "offset": self.offset,
            "flatness_bound": self.flatness_bound,
            "flagged_points": int(self.flagged.sum()),
            "rms_residual": float(np.sqrt(np.mean(self.residuals**2))),
        }


def fit_quadratic_plate_model(theta, phi, offset: bool = True) -> CalibrationCurve:
    """Least-squares ``phi = c theta^2 (+ offset)``.

    Raises:
        CalibrationError: fewer than five points or a degenerate design.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if theta.size < MIN_FIT_POINTS:
        raise CalibrationError(f"need at least {MIN_FIT_POINTS} points")
    columns = [theta**2] + ([np.ones_like(theta)] if offset else [])
    design = np.column_stack(columns)
    coef, _, rank, _ = np.linalg.lstsq(design, phi, rcond=None)
    if rank < design.shape[1]:
        raise CalibrationError("degenerate design matrix: theta values do not constrain the fit")
    residuals = phi - design @ coef
    dof = max(theta.size - design.shape[1], 1)
    cov = np.linalg.inv(design.T @ design) * (residuals @ residuals) / dof
    return CalibrationCurve(
        theta,
        phi,
        float(coef[0]),
        float(coef[1]) if offset else 0.0,
        residuals,
        float(np.sqrt(cov[0, 0])),
    )


def calibrate(theta, intensity, deg: bool = False, offset: bool = True, **kwargs) -> CalibrationCurve:
    """Intensity scan to fitted plate model in one step (angles in radians unless ``deg``)."""
    theta = np.deg2rad(theta) if deg else np.asarray(theta, dtype=float)
    t, phi = phase_from_intensity(theta, intensity, **kwargs)
    return fit_quadratic_plate_model(t, phi, offset=offset)
