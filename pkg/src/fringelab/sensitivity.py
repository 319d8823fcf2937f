"""Fisher-information phase sensitivity of detection fringes.

For a fringe ``p(phi)`` measured over ``k`` trials the coincidence count is
binomial, ``C_k = k p`` with variance ``k p (1 - p)``. The phase error per
trial follows from error propagation, and normalising by the ``N`` photons
each trial consumes gives the sensitivity

    S^2 = 1 / (k N dphi^2) = p'^2 / (N p (1 - p)),

so ``S = 1`` is the shot-noise limit and ``S = sqrt(N)`` the Heisenberg
limit. Interferometer and detector losses are excluded from the resource
count, so model fringes are evaluated with every transmission set to one.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ._parallel import pmap
from .ensemble import IDEAL, InputConfig, SourceParams
from .fringe import DEFAULT_SCHEMES, FringeScan, analytic_fringe, find_extrema, scan, swept_params

SENSITIVITY_POINTS = 2881
PROB_FLOOR = 1e-9
MIN_POINTS_PER_PERIOD = 16
FD_STEP = 1e-3
COMBINED_SCHEME = "3,1+1,3"


class CoarseGridError(ValueError):
    """The sampled fringe is too coarse for a stable derivative."""


@dataclass
class SensitivityCurve:
    phis: np.ndarray
    S_values: np.ndarray
    S_max: float
    phi_at_max: float
    N: int
    scheme: str = ""
    excluded: int = 0

    def to_json_obj(self) -> dict:
        return {
            "S_max": self.S_max,
            "phi_at_max": self.phi_at_max,
            "N": self.N,
            "scheme": self.scheme,
            "excluded_points": self.excluded,
        }


def sensitivity_grid(points: int = SENSITIVITY_POINTS) -> np.ndarray:
    return np.linspace(0.0, 2 * np.pi, points)


def fisher_sensitivity(p, dp, n_photons: int, trials: float = 1.0) -> np.ndarray:
    """Pointwise ``S`` from a fringe and its derivative.

    The trial count ``trials`` enters the count statistics and cancels in
    the result; it is kept so the derivation is visible and testable.
    """
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    counts_var = trials * p * (1.0 - p)
    slope = trials * dp
    with np.errstate(divide="ignore", invalid="ignore"):
        dphi_sq = counts_var / slope**2
        return np.sqrt(1.0 / (trials * n_photons * dphi_sq))


def _five_point(y: np.ndarray, h: float, periodic: bool) -> np.ndarray:
    if periodic:
        return (np.roll(y, 2) - 8 * np.roll(y, 1) + 8 * np.roll(y, -1) - np.roll(y, -2)) / (12 * h)
    d = np.full_like(y, np.nan)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    return d


def _check_resolution(phis: np.ndarray, probs: np.ndarray, periodic: bool) -> None:
    extrema = find_extrema(phis, probs, periodic=periodic, refine=False)
    if len(extrema) < 2:
        return
    idx = np.array([e.index for e in extrema])
    points_per_period = 2 * np.median(np.diff(idx))
    if points_per_period < MIN_POINTS_PER_PERIOD:
        raise CoarseGridError(
            f"only ~{points_per_period:.0f} points per fringe period, need {MIN_POINTS_PER_PERIOD}"
        )


def _curve(phis, p, dp, n_photons, trials, scheme) -> SensitivityCurve:
    S = fisher_sensitivity(p, dp, n_photons, trials)
    valid = np.isfinite(S) & (p > PROB_FLOOR) & (p < 1 - PROB_FLOOR)
    S = np.where(valid, S, np.nan)
    # values above the Heisenberg bound only arise next to p -> 0 or 1
    usable = valid & (S <= np.sqrt(n_photons) * (1 + 1e-6))
    if not usable.any():
        raise ValueError("no phase point gives a finite sensitivity")
    best = int(np.nanargmax(np.where(usable, S, -np.inf)))
    return SensitivityCurve(
        np.asarray(phis, dtype=float),
        S,
        float(S[best]),
        float(phis[best]),
        n_photons,
        str(scheme or ""),
        int((~usable).sum()),
    )


def phase_sensitivity(
    fringe: FringeScan | Callable,
    n_photons: int,
    phis: np.ndarray | None = None,
    trials: float = 1.0,
    derivative: Callable | None = None,
) -> SensitivityCurve:
    """Sensitivity curve of a sampled or callable fringe.

    Args:
        fringe: a :class:`FringeScan` on a uniform grid, or a vectorised
            callable ``p(phi)``.
        n_photons: photons per trial of the target input.
        phis: evaluation grid for callables (default 2881 points over 2pi).
        trials: notional trial count; the result does not depend on it.
        derivative: closed-form ``dp/dphi`` for callables. Without it a
            five-point central difference with step 1e-3 is used.

    Raises:
        CoarseGridError: a sampled fringe has fewer than 16 points per period.
    """
    if isinstance(fringe, FringeScan):
        if not fringe.is_uniform:
            raise ValueError("sampled fringes need a uniform phase grid")
        layout = fringe.period_layout()
        phis, p = fringe.phis, fringe.probs
        if layout == "closed":
            dp = _five_point(p[:-1], fringe.spacing, True)
            dp = np.append(dp, dp[0])
        else:
            dp = _five_point(p, fringe.spacing, layout == "open")
        _check_resolution(phis, p, layout is not None)
        return _curve(phis, p, dp, n_photons, trials, fringe.scheme)

    phis = sensitivity_grid() if phis is None else np.asarray(phis, dtype=float)
    p = np.asarray(fringe(phis), dtype=float)
    if derivative is not None:
        dp = np.asarray(derivative(phis), dtype=float)
    else:
        h = FD_STEP
        dp = (fringe(phis - 2 * h) - 8 * fringe(phis - h) + 8 * fringe(phis + h) - fringe(phis + 2 * h)) / (12 * h)
    return _curve(phis, p, dp, n_photons, trials, getattr(fringe, "scheme", ""))


def ideal_fringe_sensitivity(efficiency: float, n_photons: int, phis: np.ndarray | None = None) -> SensitivityCurve:
    """Sensitivity of ``p = efficiency (1 - cos N phi) / 2`` with its exact derivative."""

    def p(x):
        return efficiency * (1 - np.cos(n_photons * x)) / 2

    def dp(x):
        return efficiency * n_photons * np.sin(n_photons * x) / 2

    return phase_sensitivity(p, n_photons, phis, derivative=dp)


def analytic_sensitivity(kind: str, n_photons: int, phis: np.ndarray | None = None, n: int | None = None):
    """Sensitivity of one of the closed-form ideal fringes (numerical derivative)."""
    return phase_sensitivity(lambda x: analytic_fringe(kind, x, n=n), n_photons, phis)


def combined_scheme_fringe(
    params: SourceParams = IDEAL,
    phis: np.ndarray | None = None,
    exclude_losses: bool = True,
) -> FringeScan:
    """|2,2> fringe detected as three photons on one side and one on the other.

    Both orientations are accepted, each as a threshold (at least 3 in one
    output and at least 1 in the other). For four lossless photons this is
    exactly ``P(3,1) + P(1,3)``.
    """
    if exclude_losses:
        params = params.lossless()
    phis = sensitivity_grid() if phis is None else phis
    return scan(InputConfig.KET22, params, COMBINED_SCHEME, phis)


def sensitivity_scan(
    config,
    params: SourceParams = IDEAL,
    scheme=None,
    phis: np.ndarray | None = None,
    exclude_losses: bool = True,
) -> SensitivityCurve:
    """Sensitivity of the model fringe for ``config``; losses excluded by default."""
    config = InputConfig.parse(config)
    if exclude_losses:
        params = params.lossless()
    phis = sensitivity_grid() if phis is None else phis
    fringe = scan(config, params, DEFAULT_SCHEMES[config] if scheme is None else scheme, phis)
    return phase_sensitivity(fringe, config.n_photons)


def sensitivity_sweep(
    config,
    scheme,
    sweep_var: str,
    grid: Sequence[float],
    base: SourceParams = IDEAL,
    phis: np.ndarray | None = None,
) -> list[float]:
    """``S_max`` of the loss-free model fringe as one source parameter varies."""
    config = InputConfig.parse(config)

    def one(value):
        params = swept_params(base, sweep_var, float(value))
        return sensitivity_scan(config, params, scheme, phis).S_max

    return pmap(one, grid)
