"""Mixed input ensembles built from source imperfections.

A nominal input (|1,0>, |1,1>, |2,0>, |2,2>) produced by an imperfect
single-photon source is replaced by a weighted list of pure labeled Fock
states. Weights depend on the multi-photon probability ``g2`` and the
indistinguishability ``indist``; distinguishability classes follow the prime
count of each photon (``a'`` is class 1, ``b''`` class 2, ...).
"""

from __future__ import annotations

import enum
import json
import logging
import warnings
from collections.abc import Callable
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .fock import DEFAULT_MAX_PHOTONS, LabeledFockState
from .network import NetworkParams, TransferCoefficients, transfer_coefficients
from .propagator import Scheme, output_distribution

log = logging.getLogger(__name__)

G2_SOFT_LIMIT = 0.1
PARAM_NAMES = ("g2", "indist", "eta_c", "eta_d", "eta_e", "eta_f")


class InputConfig(enum.Enum):
    KET10 = "10"
    KET11 = "11"
    KET20 = "20"
    KET22 = "22"

    @property
    def n_photons(self) -> int:
        """Photons per trial in the target state."""
        return sum(int(c) for c in self.value)

    @classmethod
    def parse(cls, value) -> InputConfig:
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().removeprefix("ket").strip("|>").replace(",", "")
        return cls(text)

    def __str__(self) -> str:
        return f"|{self.value[0]},{self.value[1]}>"


@dataclass(frozen=True)
class SourceParams:
    """Source and loss parameters shared by the ensemble, network and fitter.

    ``fixed`` names the parameters held constant during a fit.
    """

    g2: float = 0.0
    indist: float = 1.0
    eta_c: float = 1.0
    eta_d: float = 1.0
    eta_e: float = 1.0
    eta_f: float = 1.0
    fixed: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name}={value} outside [0, 1]")
        unknown = set(self.fixed) - set(PARAM_NAMES)
        if unknown:
            raise ValueError(f"unknown fixed parameters {sorted(unknown)}")
        object.__setattr__(self, "fixed", frozenset(self.fixed))
        if self.g2 > G2_SOFT_LIMIT:
            warnings.warn(
                f"g2={self.g2} exceeds {G2_SOFT_LIMIT}; the truncated ensemble is not reliable here",
                stacklevel=3,
            )

    def network(self, phi=0.0, convention: str = "linear") -> NetworkParams:
        return NetworkParams(phi, self.eta_c, self.eta_d, self.eta_e, self.eta_f, convention)

    def coefficients(self, phi=0.0, convention: str = "linear") -> TransferCoefficients:
        return transfer_coefficients(self.network(phi, convention))

    def values(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def replace(self, **changes) -> SourceParams:
        return replace(self, **changes)

    def lossless(self) -> SourceParams:
        """Same source, with every transmission set to one."""
        return replace(self, eta_c=1.0, eta_d=1.0, eta_e=1.0, eta_f=1.0)

    def to_json_obj(self) -> dict:
        d = asdict(self)
        d["fixed"] = sorted(self.fixed)
        return d


IDEAL = SourceParams()
# fitted values from the combined single-, two- and four-photon fits
FITTED = SourceParams(g2=0.018, indist=0.974, eta_c=0.803, eta_d=0.761, eta_e=0.178, eta_f=0.322)
FITTED_TWO_PHOTON = FITTED.replace(eta_e=0.320)

Weight = Callable[[float, float], float]

# (prime-notation state, weight(g2, indist)) exactly as tabulated for each target
WEIGHT_TABLES: dict[InputConfig, list[tuple[str, Weight]]] = {
    InputConfig.KET10: [
        ("1a", lambda g, i: 1 - g),
        ("1a 1a'", lambda g, i: g),
    ],
    InputConfig.KET11: [
        ("1a 1b", lambda g, i: i * (1 - g) ** 2),
        ("1a 1b'", lambda g, i: (1 - i) * (1 - g) ** 2),
        ("1a 1a' 1b", lambda g, i: i * g * (1 - g)),
        ("1a 1b 1b'", lambda g, i: i * g * (1 - g)),
        ("1a 1a' 1b 1b''", lambda g, i: i * g**2),
        ("1a 1a' 1b''", lambda g, i: (1 - i) * g * (1 - g)),
        ("1a 1b' 1b''", lambda g, i: (1 - i) * g * (1 - g)),
        ("1a 1a' 1b'' 1b'''", lambda g, i: (1 - i) * g**2),
    ],
    InputConfig.KET20: [
        ("2a", lambda g, i: i * (1 - g) ** 2),
        ("1a 1a'", lambda g, i: 0.5 * (1 - i) * (1 - g) ** 2),
        ("2a 1a'", lambda g, i: 2 * i * g * (1 - g)),
        ("2a 1a' 1a''", lambda g, i: i * g**2),
        ("1a 1a' 1a''", lambda g, i: (1 - i) * g * (1 - g)),
        ("1a 1a' 1a'' 1a'''", lambda g, i: 0.5 * (1 - i) * g**2),
    ],
    InputConfig.KET22: [
        ("2a 2b", lambda g, i: i**2 * (1 - g) ** 4),
        ("1a 1a' 1b'' 1b'''", lambda g, i: 0.25 * (1 - i) ** 2 * (1 - g) ** 4),
        ("2a 1a' 2b", lambda g, i: 2 * i**2 * g * (1 - g) ** 3),
        ("2a 2b 1b'", lambda g, i: 2 * i**2 * g * (1 - g) ** 3),
        ("2a 1a' 2b 1b''", lambda g, i: 4 * i**2 * g**2 * (1 - g) ** 2),
        ("1a 1a' 1a'' 1b''' 1b''''", lambda g, i: 0.5 * (1 - i) ** 2 * g * (1 - g) ** 3),
        ("1a 1a' 1b'' 1b''' 1b''''", lambda g, i: 0.5 * (1 - i) ** 2 * g * (1 - g) ** 3),
        ("1a 1a' 2b", lambda g, i: (1 - i) * i**2 * (1 - g) ** 4),
        ("2a 1b 1b'", lambda g, i: (1 - i) * i**2 * (1 - g) ** 4),
        ("1a 1a' 1b 1b'", lambda g, i: (1 - i) ** 2 * i * (1 - g) ** 4),
    ],
}


@dataclass(frozen=True)
class WeightedEnsemble:
    entries: tuple[tuple[LabeledFockState, float], ...]
    config: InputConfig
    params: SourceParams

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, w in self.entries))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def to_json_obj(self) -> list[dict]:
        return [{"state": s.to_json_obj(), "alpha": w} for s, w in self.entries]

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def build_ensemble(config, params: SourceParams, renormalize: bool = False) -> WeightedEnsemble:
    """Pure states and weights for ``config`` under ``params``.

    Weights are taken as tabulated and are not normalised: for |2,0> and
    |2,2> they sum below one once ``g2 > 0`` or ``indist < 1`` because of the
    probabilistic state preparation. ``renormalize=True`` rescales them to
    sum to one.
    """
    config = InputConfig.parse(config)
    table = WEIGHT_TABLES[config]
    entries = [(LabeledFockState.parse(s), float(w(params.g2, params.indist))) for s, w in table]
    if renormalize:
        total = sum(w for _, w in entries)
        if total > 0:
            entries = [(s, w / total) for s, w in entries]
    return WeightedEnsemble(tuple(entries), config, params)


def ensemble_probability(
    ensemble: WeightedEnsemble,
    coeffs: TransferCoefficients,
    scheme,
    max_photons: int = DEFAULT_MAX_PHOTONS,
):
    """Weighted sum of pure-state detection probabilities.

    ``scheme`` is a :class:`Scheme`, a ``(min_e, min_f)`` tuple or a scheme
    string. Entries with more photons than ``max_photons`` lie outside the
    truncated basis and are left out of the sum.
    """
    scheme = Scheme.parse(scheme)
    total = 0.0
    for state, alpha in ensemble.entries:
        if state.total_photons > max_photons:
            log.debug("skipping %s: beyond %d-photon truncation", state, max_photons)
            continue
        if alpha == 0.0:
            continue
        total = total + alpha * scheme.probability(output_distribution(state, coeffs, max_photons))
    return total


def mixed_probability(
    config,
    params: SourceParams,
    phi,
    scheme,
    max_photons: int = DEFAULT_MAX_PHOTONS,
    convention: str = "linear",
) -> np.ndarray:
    """Ensemble detection probability evaluated over an array of phases."""
    ensemble = build_ensemble(config, params)
    coeffs = params.coefficients(np.asarray(phi, dtype=float), convention)
    return np.broadcast_to(
        ensemble_probability(ensemble, coeffs, scheme, max_photons), np.shape(phi)
    ).astype(float)
