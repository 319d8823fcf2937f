"""Least-squares fits of the ensemble fringe model to counted fringes.

The model predicts detection probabilities, while data are count rates, so
every fit carries a free positive scale (and optionally an additive
background). Source parameters are individually fixed or free within
bounds. :func:`staged_workflow` chains four fits so that each input state
only determines the parameters it is sensitive to.
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .ensemble import FITTED, PARAM_NAMES, InputConfig, SourceParams, mixed_probability
from .fringe import DEFAULT_SCHEMES, contrast, scan
from .propagator import Scheme

log = logging.getLogger(__name__)

MAX_ITERATIONS = 500
G2_MODEL_LIMIT = 0.2
G2_WARN_LIMIT = 0.1
DEFAULT_BOUNDS = {name: (0.0, 1.0) for name in PARAM_NAMES} | {"g2": (0.0, G2_MODEL_LIMIT)}
SINGULAR_RCOND = 1e-9

# independently determined values used to pin parameters in the staged fits
ETA_C_COMPONENTS = 0.8034
G2_MEASURED = 0.018
ETA_E_TWO_PHOTON = 0.320


class FitError(RuntimeError):
    pass


class ConvergenceError(FitError):
    pass


class SingularJacobianError(FitError):
    """Free parameters are not independently constrained by the data."""

    def __init__(self, parameters: Sequence[str]):
        self.parameters = tuple(parameters)
        super().__init__(
            "singular Jacobian: parameters "
            + ", ".join(self.parameters)
            + " are mutually dependent or unconstrained; fix one of them"
        )


class StageDependencyError(FitError):
    pass


@dataclass
class FitData:
    """Phases, measured values and their standard deviations.

    ``sigma`` defaults to Poisson errors ``sqrt(counts)`` (at least one).
    """

    phis: np.ndarray
    values: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        self.phis = np.asarray(self.phis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.sigma is None:
            self.sigma = np.sqrt(np.maximum(self.values, 1.0))
        self.sigma = np.asarray(self.sigma, dtype=float)
        if not (self.phis.shape == self.values.shape == self.sigma.shape) or self.phis.ndim != 1:
            raise ValueError("phis, values and sigma must be 1-d arrays of equal length")
        if np.any(self.sigma <= 0):
            raise ValueError("sigma must be positive")

    def __len__(self) -> int:
        return len(self.phis)


@dataclass
class FitProblem:
    """One fit: data, model configuration and which parameters move.

    ``params.fixed`` names the held parameters; every other source
    parameter is free. ``initial`` overrides the starting point of free
    parameters, which otherwise sit at the midpoint of their bounds.
    """

    data: FitData
    config: InputConfig
    params: SourceParams
    scheme: Scheme | str | None = None
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    initial: dict[str, float] = field(default_factory=dict)
    fit_offset: bool = False
    max_photons: int = 5

    def __post_init__(self):
        self.config = InputConfig.parse(self.config)
        self.scheme = DEFAULT_SCHEMES[self.config] if self.scheme is None else Scheme.parse(self.scheme)
        self.bounds = DEFAULT_BOUNDS | dict(self.bounds)
        for name, (lo, hi) in self.bounds.items():
            if name not in PARAM_NAMES or not (0.0 <= lo < hi <= 1.0):
                raise ValueError(f"invalid bounds for {name}: {(lo, hi)}")
        if not self.free:
            log.info("no free source parameters; only the scale will be fitted")

    @property
    def free(self) -> list[str]:
        return [n for n in PARAM_NAMES if n not in self.params.fixed]

    def start(self) -> dict[str, float]:
        out = {}
        for name in self.free:
            lo, hi = self.bounds[name]
            out[name] = float(np.clip(self.initial.get(name, (lo + hi) / 2), lo, hi))
        return out

    def model(self, values: Mapping[str, float], phis=None) -> np.ndarray:
        """Detection probability with ``values`` substituted for the free parameters."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params = self.params.replace(**values)
        phis = self.data.phis if phis is None else phis
        return mixed_probability(self.config, params, phis, self.scheme, self.max_photons)


@dataclass
class FitResult:
    best_fit: SourceParams
    scale: float
    offset: float
    uncertainties: dict[str, float]
    chi_square: float
    reduced_chi_square: float
    nfev: int
    gradient_norm: float
    message: str
    correlation: np.ndarray | None = None
    free: tuple[str, ...] = ()
    statistical_uncertainties: dict[str, float] = field(default_factory=dict)
    covariance: np.ndarray | None = None
    upstream_gain: np.ndarray | None = None
    upstream_names: tuple[str, ...] = ()

    @property
    def residual_norm(self) -> float:
        return float(np.sqrt(self.chi_square))

    def value(self, name: str) -> float:
        if name in ("scale", "offset"):
            return getattr(self, name)
        return getattr(self.best_fit, name)

    def summary(self) -> dict:
        return {
            "params": self.best_fit.values(),
            "scale": self.scale,
            "offset": self.offset,
            "uncertainties": dict(self.uncertainties),
            "chi_square": self.chi_square,
            "reduced_chi_square": self.reduced_chi_square,
            "nfev": self.nfev,
        }

    def to_json_obj(self) -> dict:
        """Rows of parameter, value, sigma and fixed flag plus diagnostics."""
        rows = [
            {
                "parameter": name,
                "value": getattr(self.best_fit, name),
                "sigma": self.uncertainties.get(name),
                "fixed": name in self.best_fit.fixed,
            }
            for name in PARAM_NAMES
        ]
        rows.append({"parameter": "scale", "value": self.scale, "sigma": self.uncertainties.get("scale"), "fixed": False})
        return {
            "parameters": rows,
            "offset": self.offset,
            "chi_square": self.chi_square,
            "reduced_chi_square": self.reduced_chi_square,
            "nfev": self.nfev,
            "gradient_norm": self.gradient_norm,
            "message": self.message,
        }


def _dependent_subset(jac: np.ndarray, names: Sequence[str]) -> list[str] | None:
    norms = np.linalg.norm(jac, axis=0)
    if np.any(norms == 0):
        return [n for n, v in zip(names, norms) if v == 0]
    _, s, vt = np.linalg.svd(jac / norms, full_matrices=False)
    if s[-1] > SINGULAR_RCOND * s[0]:
        return None
    null = np.abs(vt[-1])
    return [n for n, v in zip(names, null) if v > 0.1]


@dataclass(frozen=True)
class Upstream:
    """Covariance of pinned parameters that were themselves estimated earlier."""

    names: tuple[str, ...]
    cov: np.ndarray


def _pinned_jacobian(problem: FitProblem, residuals_at, names: Sequence[str], step: float = 1e-6) -> np.ndarray:
    cols = []
    for name in names:
        value = getattr(problem.params, name)
        lo, hi = max(value - step, 0.0), min(value + step, 1.0)
        cols.append((residuals_at({name: hi}) - residuals_at({name: lo})) / (hi - lo))
    return np.column_stack(cols)


def fit(problem: FitProblem, upstream: Upstream | None = None) -> FitResult:
    """Weighted least squares over the free parameters and the scale.

    Uses a bounded trust-region solver with a finite-difference Jacobian.
    Standard errors come from the inverse curvature ``(J^T J)^-1`` scaled
    by the reduced chi-square. When ``upstream`` gives the covariance of
    pinned parameters that came out of earlier fits, their uncertainty is
    propagated into the reported errors through the linear response of
    the optimum to the pinned values.

    Raises:
        ConvergenceError: no convergence within 500 function evaluations.
        SingularJacobianError: free parameters are degenerate at the optimum.
    """
    data = problem.data
    free = problem.free
    start = problem.start()
    names = free + ["scale"] + (["offset"] if problem.fit_offset else [])

    m0 = problem.model(start)
    w = 1.0 / data.sigma**2
    denom = float(np.sum(w * m0 * m0))
    scale0 = float(np.sum(w * m0 * data.values) / denom) if denom > 0 else float(data.values.max())
    scale0 = max(scale0, 1e-12 * max(float(np.abs(data.values).max()), 1.0), 1e-300)

    x0 = np.array([start[n] for n in free] + [scale0] + ([0.0] if problem.fit_offset else []))
    lower = [problem.bounds[n][0] for n in free] + [0.0] + ([-np.inf] if problem.fit_offset else [])
    upper = [problem.bounds[n][1] for n in free] + [np.inf] + ([np.inf] if problem.fit_offset else [])

    def unpack(x):
        values = dict(zip(free, x[: len(free)]))
        offset = x[len(free) + 1] if problem.fit_offset else 0.0
        return values, x[len(free)], offset

    def residuals(x):
        values, scale, offset = unpack(x)
        return (data.values - (scale * problem.model(values) + offset)) / data.sigma

    res = optimize.least_squares(
        residuals,
        x0,
        bounds=(lower, upper),
        method="trf",
        jac="3-point",
        x_scale="jac",
        max_nfev=MAX_ITERATIONS,
    )
    if res.status == 0:
        raise ConvergenceError(f"no convergence after {res.nfev} evaluations: {res.message}")

    jac = res.jac
    bad = _dependent_subset(jac, names)
    if bad:
        raise SingularJacobianError(bad)
    dof = max(len(data) - len(names), 1)
    chi2 = float(2.0 * res.cost)
    redchi = chi2 / dof
    inv_curv = np.linalg.inv(jac.T @ jac)
    stat_cov = inv_curv * redchi
    cov, gain = stat_cov, None
    if upstream is not None and upstream.names:
        values, scale, offset = unpack(res.x)

        def residuals_at(change):
            shifted = FitProblem(problem.data, problem.config, problem.params.replace(**change),
                                 problem.scheme, problem.bounds, max_photons=problem.max_photons)
            return (data.values - (scale * shifted.model(values) + offset)) / data.sigma

        gain = -inv_curv @ jac.T @ _pinned_jacobian(problem, residuals_at, upstream.names)
        cov = stat_cov + gain @ upstream.cov @ gain.T
    sigma = np.sqrt(np.diag(cov))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = cov / np.outer(sigma, sigma)  # nan where a residual-free fit gives sigma = 0

    values, scale, offset = unpack(res.x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        best = problem.params.replace(**{k: float(v) for k, v in values.items()})
    return FitResult(
        best_fit=best,
        scale=float(scale),
        offset=float(offset),
        uncertainties={n: float(s) for n, s in zip(names, sigma)},
        chi_square=chi2,
        reduced_chi_square=redchi,
        nfev=int(res.nfev),
        gradient_norm=float(np.linalg.norm(res.grad)),
        message=str(res.message),
        correlation=corr,
        free=tuple(names),
        statistical_uncertainties={n: float(s) for n, s in zip(names, np.sqrt(np.diag(stat_cov)))},
        covariance=cov,
        upstream_gain=gain,
        upstream_names=tuple(upstream.names) if upstream is not None else (),
    )


# truth values per stage: one row per fitted input state
STAGE_TRUTH = {
    InputConfig.KET10: SourceParams(g2=0.0, indist=1.0, eta_c=ETA_C_COMPONENTS, eta_d=0.781, eta_e=1.0, eta_f=0.322),
    InputConfig.KET20: SourceParams(
        g2=G2_MEASURED, indist=1.0, eta_c=ETA_C_COMPONENTS, eta_d=0.761, eta_e=ETA_E_TWO_PHOTON, eta_f=0.322
    ),
    InputConfig.KET11: SourceParams(
        g2=G2_MEASURED, indist=0.974, eta_c=ETA_C_COMPONENTS, eta_d=0.761, eta_e=ETA_E_TWO_PHOTON, eta_f=0.322
    ),
    InputConfig.KET22: SourceParams(
        g2=G2_MEASURED, indist=0.974, eta_c=ETA_C_COMPONENTS, eta_d=0.761, eta_e=0.178, eta_f=0.322
    ),
}
STAGE_ORDER = (InputConfig.KET10, InputConfig.KET20, InputConfig.KET11, InputConfig.KET22)


@dataclass
class StagedFit:
    results: dict[InputConfig, FitResult]
    cross_check: FitResult | None
    final: SourceParams

    def to_json_obj(self) -> dict:
        out = {str(c.value): r.to_json_obj() for c, r in self.results.items()}
        if self.cross_check is not None:
            out["11_indist_fixed"] = self.cross_check.to_json_obj()
        out["final"] = self.final.values()
        return out


class _JointCovariance:
    """Covariance of every parameter estimated so far in a staged fit."""

    def __init__(self):
        self.names: list[str] = []
        self.cov = np.zeros((0, 0))

    def upstream(self, pinned) -> Upstream:
        names = [n for n in self.names if n in pinned]
        idx = [self.names.index(n) for n in names]
        return Upstream(tuple(names), self.cov[np.ix_(idx, idx)])

    def record(self, result: FitResult, estimated: list[str]) -> None:
        k = [result.free.index(n) for n in estimated]
        cov_xx = result.covariance[np.ix_(k, k)]
        if result.upstream_gain is not None:
            pidx = [self.names.index(n) for n in result.upstream_names]
            cross = result.upstream_gain[k, :] @ self.cov[pidx, :]
        else:
            cross = np.zeros((len(k), len(self.names)))
        # a re-estimated parameter replaces its earlier value
        keep = [i for i, n in enumerate(self.names) if n not in estimated]
        cross = cross[:, keep]
        self.cov = np.block([[self.cov[np.ix_(keep, keep)], cross.T], [cross, cov_xx]])
        self.names = [self.names[i] for i in keep] + list(estimated)


def _fixed_except(params: SourceParams, *free: str) -> SourceParams:
    return params.replace(fixed=frozenset(PARAM_NAMES) - set(free))


def staged_workflow(
    datasets: Mapping,
    eta_c: float = ETA_C_COMPONENTS,
    g2: float = G2_MEASURED,
    eta_e_two_photon: float = ETA_E_TWO_PHOTON,
    cross_check: bool = True,
    propagate: bool = True,
) -> StagedFit:
    """Sequential fits |1,0> -> |2,0> -> |1,1> -> |2,2>.

    1. |1,0>: ``g2 = 0``, ``eta_e = 1`` and ``eta_c`` pinned; fit ``eta_d``.
    2. |2,0>: ``g2`` pinned to its measured value, ``indist = 1`` and
       ``eta_e = eta_e_two_photon`` (so that ``eta_e ~ eta_f``); fit
       ``eta_d`` and ``eta_f``.
    3. |1,1>: efficiencies from stage 2; fit ``indist``. The cross-check
       refits ``g2`` with ``indist`` pinned to that result.
    4. |2,2>: everything pinned except ``eta_e``.

    Args:
        datasets: mapping from input configuration (or its label) to
            :class:`FitData`. Stages run as far as the data allow.
        propagate: carry the covariance of parameters fitted in earlier
            stages into the errors of later ones. Without it each stage
            reports curvature errors only, as if its pinned inputs were exact.

    Raises:
        StageDependencyError: a later stage is given without its predecessors.
    """
    data = {InputConfig.parse(k): v for k, v in datasets.items()}
    for i, config in enumerate(STAGE_ORDER):
        if config not in data and any(later in data for later in STAGE_ORDER[i + 1 :]) or not data:
            raise StageDependencyError(f"dataset for {config} is required by later stages")

    joint = _JointCovariance()
    results: dict[InputConfig, FitResult] = {}
    check = None

    def run(config, params, *free):
        problem = FitProblem(data[config], config, _fixed_except(params, *free))
        pinned = set(PARAM_NAMES) - set(free)
        return fit(problem, joint.upstream(pinned) if propagate else None)

    results[InputConfig.KET10] = run(
        InputConfig.KET10, SourceParams(g2=0.0, eta_c=eta_c, eta_e=1.0), "eta_d"
    )
    joint.record(results[InputConfig.KET10], ["eta_d"])
    current = results[InputConfig.KET10].best_fit

    if InputConfig.KET20 in data:
        base = SourceParams(g2=g2, indist=1.0, eta_c=eta_c, eta_e=eta_e_two_photon)
        results[InputConfig.KET20] = run(InputConfig.KET20, base, "eta_d", "eta_f")
        joint.record(results[InputConfig.KET20], ["eta_d", "eta_f"])
        current = results[InputConfig.KET20].best_fit

    if InputConfig.KET11 in data:
        results[InputConfig.KET11] = run(InputConfig.KET11, current, "indist")
        joint.record(results[InputConfig.KET11], ["indist"])
        current = results[InputConfig.KET11].best_fit
        if cross_check:
            check = run(InputConfig.KET11, current, "g2")

    if InputConfig.KET22 in data:
        results[InputConfig.KET22] = run(InputConfig.KET22, current, "eta_e")
        joint.record(results[InputConfig.KET22], ["eta_e"])
        current = results[InputConfig.KET22].best_fit

    return StagedFit(results, check, current.replace(fixed=frozenset()))


def synthesize(
    config,
    params: SourceParams,
    phis: np.ndarray | None = None,
    peak_counts: float = 1e5,
    seed: int = 0,
    scheme=None,
) -> FitData:
    """Poisson-noised counts of a model fringe whose peak mean is ``peak_counts``."""
    config = InputConfig.parse(config)
    phis = np.linspace(0.0, 2 * np.pi, 61) if phis is None else np.asarray(phis, dtype=float)
    scheme = DEFAULT_SCHEMES[config] if scheme is None else scheme
    p = mixed_probability(config, params, phis, scheme)
    scale = peak_counts / float(p.max())
    rng = np.random.default_rng(seed)
    counts = rng.poisson(scale * p).astype(float)
    return FitData(phis, counts)


def synthesize_stages(seed: int = 0, peak_counts: float = 1e5, phis=None) -> dict[InputConfig, FitData]:
    """One synthetic dataset per stage at the tabulated truth values."""
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**32, len(STAGE_ORDER))
    return {c: synthesize(c, STAGE_TRUTH[c], phis, peak_counts, int(s)) for c, s in zip(STAGE_ORDER, seeds)}


def contrast_vs_g2_curve(params: SourceParams = FITTED, g2_grid: Sequence[float] = (0.0, G2_MEASURED)):
    """``(g2, mean |1,1> contrast)`` pairs at fixed indistinguishability and losses.

    Raises:
        ValueError: a grid value above 0.2, where the truncated model fails.
    """
    out = []
    for g in g2_grid:
        g = float(g)
        if g < 0 or g > G2_MODEL_LIMIT:
            raise ValueError(f"g2={g} outside the model's validity range [0, {G2_MODEL_LIMIT}]")
        if g > G2_WARN_LIMIT:
            warnings.warn(f"g2={g} above {G2_WARN_LIMIT}: ensemble truncation becomes inaccurate", stacklevel=2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            source = params.replace(g2=g)
        out.append((g, contrast(scan(InputConfig.KET11, source)).mean_contrast))
    return out
