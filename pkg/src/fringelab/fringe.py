"""Fringe scans, ideal closed forms and contrast analysis."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from ._parallel import pmap
from .ensemble import IDEAL, InputConfig, SourceParams, mixed_probability
from .fock import DEFAULT_MAX_PHOTONS
from .propagator import Scheme

TWO_PI = 2.0 * np.pi
DEFAULT_POINTS = 721

# detection scheme each target input is normally read out with
DEFAULT_SCHEMES = {
    InputConfig.KET10: Scheme.at_least(1, 0),
    InputConfig.KET11: Scheme.at_least(1, 1),
    InputConfig.KET20: Scheme.at_least(1, 1),
    InputConfig.KET22: Scheme.at_least(3, 1),
}


def phase_grid(points: int = DEFAULT_POINTS, start: float = 0.0, span: float = TWO_PI) -> np.ndarray:
    """Uniform grid including both endpoints."""
    return np.linspace(start, start + span, points)


@dataclass
class FringeScan:
    phis: np.ndarray
    probs: np.ndarray
    config: InputConfig | str = "analytic"
    scheme: Scheme | str | None = None
    sigma: np.ndarray | None = None
    units: str = "probability"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.phis = np.asarray(self.phis, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.sigma is not None:
            self.sigma = np.asarray(self.sigma, dtype=float)
            if self.sigma.shape != self.phis.shape:
                raise ValueError("sigma must match phis")
        if self.phis.ndim != 1 or self.phis.shape != self.probs.shape:
            raise ValueError("phis and probs must be 1-d arrays of equal length")
        if np.any(np.diff(self.phis) <= 0):
            raise ValueError("phis must be strictly increasing")
        if self.units == "probability" and np.any((self.probs < -1e-12) | (self.probs > 1 + 1e-12)):
            raise ValueError("probabilities outside [0, 1]")

    def __len__(self) -> int:
        return len(self.phis)

    @property
    def spacing(self) -> float:
        return float((self.phis[-1] - self.phis[0]) / (len(self.phis) - 1))

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(np.diff(self.phis), self.spacing, rtol=1e-6, atol=1e-12))

    def period_layout(self) -> str | None:
        """``"closed"`` if the grid spans 2pi with a repeated endpoint,
        ``"open"`` if it spans 2pi minus one step, else ``None``."""
        if len(self.phis) < 3 or not self.is_uniform:
            return None
        span = self.phis[-1] - self.phis[0]
        if math.isclose(span, TWO_PI, rel_tol=0, abs_tol=1e-9):
            return "closed"
        if math.isclose(span + self.spacing, TWO_PI, rel_tol=0, abs_tol=1e-9):
            return "open"
        return None


def model_fringe(
    config,
    params: SourceParams,
    scheme=None,
    max_photons: int = DEFAULT_MAX_PHOTONS,
    convention: str = "linear",
) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised ``p(phi)`` for the mixed input of ``config``."""
    config = InputConfig.parse(config)
    scheme = DEFAULT_SCHEMES[config] if scheme is None else Scheme.parse(scheme)

    def fringe(phis):
        return mixed_probability(config, params, phis, scheme, max_photons, convention)

    fringe.config = config
    fringe.scheme = scheme
    fringe.params = params
    return fringe


def scan(
    config,
    params: SourceParams = IDEAL,
    scheme=None,
    phis: np.ndarray | None = None,
    max_photons: int = DEFAULT_MAX_PHOTONS,
    convention: str = "linear",
) -> FringeScan:
    fringe = model_fringe(config, params, scheme, max_photons, convention)
    phis = phase_grid() if phis is None else np.asarray(phis, dtype=float)
    return FringeScan(
        phis,
        np.clip(fringe(phis), 0.0, 1.0),
        fringe.config,
        fringe.scheme,
        meta={"params": params.to_json_obj(), "max_photons": max_photons, "convention": convention},
    )


ANALYTIC_KINDS = ("P10", "P11", "P20", "P22", "distinguishable11", "holland_burnett")


def holland_burnett_efficiency(n: int) -> float:
    """Share of an ``n``-photon Holland-Burnett state reaching ``|n-1, 1>``."""
    _check_even(n)
    return 2.0**-n * math.factorial(n) / math.factorial(n // 2) ** 2


def _check_even(n: int) -> None:
    if int(n) != n or n <= 0 or n % 2:
        raise ValueError(f"photon number must be a positive even integer, got {n}")


def analytic_fringe(kind: str, phi, n: int | None = None):
    """Ideal lossless fringes; ``n`` is only used by ``"holland_burnett"``."""
    phi = np.asarray(phi, dtype=float)
    if kind == "P10":
        return (1 - np.cos(phi)) / 2
    if kind == "P11":
        return (1 + np.cos(2 * phi)) / 2
    if kind == "P20":
        return 0.5 * (1 - np.cos(2 * phi)) / 2
    if kind == "P22":
        return 3 / 8 * (1 - np.cos(4 * phi)) / 2
    if kind == "distinguishable11":
        return (3 + np.cos(2 * phi)) / 4
    if kind == "holland_burnett":
        if n is None:
            raise ValueError("holland_burnett needs the photon number n")
        return holland_burnett_efficiency(n) * (1 - np.cos(n * phi)) / 2
    raise ValueError(f"unknown analytic fringe {kind!r}; expected one of {ANALYTIC_KINDS}")


def photon_number_product_expectation(n: int, phi):
    """``<n_e n_f>`` for ``n/2`` photons entering each input port."""
    _check_even(n)
    return n / 8 * (2 * n - (2 + n) * np.sin(phi) ** 2)


@dataclass(frozen=True)
class Extremum:
    kind: str  # "max" or "min"
    phi: float
    value: float
    index: int


@dataclass(frozen=True)
class ContrastPair:
    phi_max: float
    phi_min: float
    value: float
    deep: bool | None = None


@dataclass
class ContrastReport:
    mean_contrast: float
    pairs: list[ContrastPair]
    deep_contrast: float | None = None
    shallow_contrast: float | None = None
    uncertainty: float | None = None

    @property
    def per_pair_contrasts(self) -> list[tuple[float, float, float]]:
        return [(p.phi_max, p.phi_min, p.value) for p in self.pairs]

    def to_json_obj(self) -> dict:
        return {
            "mean_contrast": self.mean_contrast,
            "deep_contrast": self.deep_contrast,
            "shallow_contrast": self.shallow_contrast,
            "uncertainty": self.uncertainty,
            "pairs": [
                {"phi_max": p.phi_max, "phi_min": p.phi_min, "contrast": p.value, "deep": p.deep}
                for p in self.pairs
            ],
        }


class NoExtremaError(ValueError):
    pass


def _refine(y_prev: float, y0: float, y_next: float) -> tuple[float, float]:
    """Vertex offset (in grid steps) and value of the parabola through 3 points."""
    denom = y_prev - 2.0 * y0 + y_next
    if denom == 0.0:
        return 0.0, y0
    delta = 0.5 * (y_prev - y_next) / denom
    if abs(delta) > 1.0:
        return 0.0, y0
    return delta, y0 - 0.25 * (y_prev - y_next) * delta


def find_extrema(
    phis: np.ndarray,
    values: np.ndarray,
    periodic: bool = False,
    window: int = 1,
    refine: bool = True,
) -> list[Extremum]:
    """Alternating list of local maxima and minima.

    A point is an extremum when it is the largest (smallest) value within
    ``window`` neighbours on each side. For periodic data the last sample
    must not repeat the first. Consecutive extrema of the same kind are
    merged, keeping the more extreme one.
    """
    phis = np.asarray(phis, dtype=float)
    y = np.asarray(values, dtype=float)
    n = len(y)
    h = (phis[-1] - phis[0]) / (n - 1) if n > 1 else 0.0
    found: list[Extremum] = []
    lo, hi = (0, n) if periodic else (window, n - window)
    for i in range(lo, hi):
        idx = [(i + k) % n for k in range(-window, window + 1) if k]
        left, right = y[(i - 1) % n], y[(i + 1) % n]
        neigh = y[idx]
        if y[i] > left and y[i] >= right and y[i] >= neigh.max():
            kind = "max"
        elif y[i] < left and y[i] <= right and y[i] <= neigh.min():
            kind = "min"
        else:
            continue
        phi, value = phis[i], y[i]
        if refine:
            delta, value = _refine(left, y[i], right)
            phi = phis[i] + delta * h
        found.append(Extremum(kind, float(phi), float(value), i))

    merged: list[Extremum] = []
    for ext in found:
        if merged and merged[-1].kind == ext.kind:
            keep_new = ext.value > merged[-1].value if ext.kind == "max" else ext.value < merged[-1].value
            if keep_new:
                merged[-1] = ext
            continue
        merged.append(ext)
    if periodic and len(merged) > 1 and merged[0].kind == merged[-1].kind:
        first, last = merged[0], merged[-1]
        keep_last = last.value > first.value if last.kind == "max" else last.value < first.value
        merged = merged[1:] if keep_last else merged[:-1]
    return merged


def _is_deep(phi_min: float) -> bool:
    return abs(phi_min - np.pi * round(phi_min / np.pi)) < np.pi / 4


def contrast(
    fringe: FringeScan,
    periodic: bool | None = None,
    classify: bool | None = None,
    window: int = 1,
) -> ContrastReport:
    """Mean contrast over adjacent maximum/minimum pairs.

    ``periodic=None`` treats a uniform scan covering exactly 2pi as a ring.
    ``classify=None`` splits pairs into deep (minimum near ``k*pi``) and
    shallow (minimum near ``k*pi + pi/2``) families for |2,2> scans.
    """
    phis, y = fringe.phis, fringe.probs
    layout = fringe.period_layout()
    if periodic is None:
        periodic = layout is not None
    if periodic and layout == "closed":
        phis, y = phis[:-1], y[:-1]
    if classify is None:
        classify = fringe.config == InputConfig.KET22

    extrema = find_extrema(phis, y, periodic=periodic, window=window)
    if fringe.units == "probability":
        extrema = [Extremum(e.kind, e.phi, max(e.value, 0.0), e.index) for e in extrema]
    count = len(extrema)
    links = range(count) if periodic and count > 2 else range(count - 1)
    pairs = []
    for k in links:
        e1, e2 = extrema[k], extrema[(k + 1) % count]
        hi, lo = (e1, e2) if e1.kind == "max" else (e2, e1)
        total = hi.value + lo.value
        value = (hi.value - lo.value) / total if total > 0 else 0.0
        pairs.append(ContrastPair(hi.phi, lo.phi, value, _is_deep(lo.phi) if classify else None))
    if not pairs:
        raise NoExtremaError("no maximum/minimum pair found in scan")

    values = np.array([p.value for p in pairs])
    report = ContrastReport(float(values.mean()), pairs)
    if classify:
        deep = [p.value for p in pairs if p.deep]
        shallow = [p.value for p in pairs if not p.deep]
        report.deep_contrast = float(np.mean(deep)) if deep else None
        report.shallow_contrast = float(np.mean(shallow)) if shallow else None
    if fringe.sigma is not None and len(values) > 1:
        report.uncertainty = float(values.std(ddof=1) / np.sqrt(len(values)))
    return report


SWEEP_VARIABLES = ("indist", "g2", "eta_c")


def swept_params(base: SourceParams, sweep_var: str, value: float) -> SourceParams:
    if sweep_var not in SWEEP_VARIABLES:
        raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}")
    if sweep_var == "eta_c":
        return base.replace(eta_c=value, eta_d=1.0)
    return base.replace(**{sweep_var: value})


def parameter_sweep(
    config,
    scheme,
    sweep_var: str,
    grid: Sequence[float],
    base: SourceParams = IDEAL,
    phis: np.ndarray | None = None,
) -> list[ContrastReport]:
    """Contrast of model fringes as one parameter varies, others at ``base``."""
    config = InputConfig.parse(config)

    def one(value):
        return contrast(scan(config, swept_params(base, sweep_var, float(value)), scheme, phis))

    return pmap(one, grid)
