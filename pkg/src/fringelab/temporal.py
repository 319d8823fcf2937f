"""Temporal separation to indistinguishability via wavepacket overlap.

A photon from a pulsed emitter has a temporal profile given by the
convolution of a Gaussian excitation pulse of width ``w_p`` with an
exponential decay of lifetime ``T1``: an exponentially modified Gaussian
(EMG) in the dimensionless time ``x = t / w_p`` with ``K = T1 / w_p``.

The wavefunction is taken proportional to the EMG profile and normalised,
so the overlap of two copies delayed by ``tau`` is

    I(tau) = int f(x) f(x - tau/w_p) dx / int f(x)^2 dx,

which equals one at ``tau = 0`` and decays as ``exp(-tau / T1)`` once the
pulses are well separated. That decay rate matches the lifetime-limited
contrast decay seen in delay scans.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from ._parallel import pmap
from .ensemble import IDEAL, InputConfig, SourceParams
from .fringe import contrast, scan

QUAD_EPSABS = 1e-9
DOMAIN_WIDTHS = 30.0
DISTINGUISHABLE_FLOOR = 1.0 / 3.0


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class WavepacketParams:
    """Emitter lifetime and excitation pulse width, both in picoseconds."""

    T1: float = 59.0
    w_p: float = 8.86

    def __post_init__(self):
        if not (self.T1 > 0 and self.w_p > 0):
            raise ValueError("T1 and w_p must be positive")

    @property
    def K(self) -> float:
        return self.T1 / self.w_p


def emg_density(x, K: float):
    """EMG probability density in units of the pulse width.

    Evaluated through the scaled complementary error function where the
    plain product would overflow, so large ``1/K`` or very negative ``x``
    stay finite.
    """
    if not K > 0:
        raise ValueError("K must be positive")
    x = np.asarray(x, dtype=float)
    z = (1.0 / K - x) / np.sqrt(2.0)
    with np.errstate(over="ignore", under="ignore"):
        scaled = np.exp(-0.5 * x**2) * special.erfcx(np.maximum(z, 0.0))
        direct = np.exp(0.5 / K**2 - x / K) * special.erfc(np.minimum(z, 0.0))
    return np.where(z > 0, scaled, direct) / (2.0 * K)


def _domain(K: float) -> tuple[float, float]:
    width = DOMAIN_WIDTHS * max(K, 1.0)
    return -width, width


def _quad(fn, lo, hi, points=None) -> float:
    value, err = integrate.quad(fn, lo, hi, epsabs=QUAD_EPSABS, epsrel=1e-10, limit=400, points=points)
    if not np.isfinite(value) or err > 1e3 * QUAD_EPSABS + 1e-8 * abs(value):
        raise QuadratureError(f"overlap quadrature did not converge (estimate {value}, error {err})")
    return value


def temporal_overlap(tau: float, params: WavepacketParams = WavepacketParams()) -> float:
    """Indistinguishability of two photons arriving ``tau`` ps apart."""
    K = params.K
    shift = abs(float(tau)) / params.w_p
    lo, hi = _domain(K)
    # tail bound: the density is below exp(-DOMAIN_WIDTHS) outside the domain
    norm = _quad(lambda x: emg_density(x, K) ** 2, lo, hi, points=[0.0])
    if shift == 0.0:
        return 1.0
    if shift > hi - lo:
        return 0.0
    cross = _quad(
        lambda x: emg_density(x, K) * emg_density(x - shift, K),
        lo,
        hi + shift,
        points=[0.0, shift],
    )
    return float(min(max(cross / norm, 0.0), 1.0))


def overlap_curve(taus: Sequence[float], params: WavepacketParams = WavepacketParams()) -> np.ndarray:
    return np.array(pmap(lambda t: temporal_overlap(t, params), taus))


def ket11_contrast(source: SourceParams) -> float:
    return contrast(scan(InputConfig.KET11, source)).mean_contrast


def contrast_vs_separation(
    tau_grid: Sequence[float],
    params: WavepacketParams = WavepacketParams(),
    source: SourceParams = IDEAL,
) -> list[tuple[float, float]]:
    """Two-photon fringe contrast as a function of photon separation.

    The temporal overlap multiplies the indistinguishability ``source.indist``
    set by all other mechanisms, so ``tau = 0`` gives the source's own
    contrast and large ``tau`` the fully distinguishable limit.
    """

    def one(tau):
        indist = source.indist * temporal_overlap(tau, params)
        return float(tau), ket11_contrast(source.replace(indist=indist))

    return pmap(one, tau_grid)


def exponential_decay_constant(taus, values, floor: float = 0.0) -> float:
    """Time constant of ``values - floor`` from a log-linear fit."""
    taus = np.asarray(taus, dtype=float)
    excess = np.asarray(values, dtype=float) - floor
    keep = excess > 0
    if keep.sum() < 2:
        raise ValueError("need at least two points above the floor")
    slope, _ = np.polyfit(taus[keep], np.log(excess[keep]), 1)
    if slope >= 0:
        raise ValueError("values do not decay")
    return float(-1.0 / slope)


def contrast_decay_constant(
    params: WavepacketParams = WavepacketParams(),
    source: SourceParams = IDEAL,
    tail: tuple[float, float] = (3.0, 8.0),
    points: int = 11,
) -> float:
    """Decay constant of the excess contrast over a tail window in units of T1."""
    taus = np.linspace(tail[0] * params.T1, tail[1] * params.T1, points)
    curve = contrast_vs_separation(taus, params, source)
    return exponential_decay_constant(taus, [c for _, c in curve], DISTINGUISHABLE_FLOOR)


def fit_pulse_width(
    taus: Sequence[float],
    contrasts: Sequence[float],
    T1: float,
    source: SourceParams = IDEAL,
    w_p0: float = 5.0,
) -> tuple[float, float]:
    """Least-squares pulse width (and its standard error) at fixed lifetime."""
    taus = np.asarray(taus, dtype=float)
    data = np.asarray(contrasts, dtype=float)

    def residuals(p):
        model = [c for _, c in contrast_vs_separation(taus, WavepacketParams(T1, p[0]), source)]
        return np.asarray(model) - data

    res = optimize.least_squares(residuals, [w_p0], bounds=([1e-3], [10 * T1]), diff_step=1e-4)
    dof = max(len(data) - 1, 1)
    jtj = res.jac.T @ res.jac
    sigma = np.sqrt(np.linalg.pinv(jtj)[0, 0] * 2 * res.cost / dof) if jtj[0, 0] > 0 else np.inf
    return float(res.x[0]), float(sigma)
