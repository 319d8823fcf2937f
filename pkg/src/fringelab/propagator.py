"""Propagate labeled Fock inputs through the interferometer.

Each input photon is replaced by its output linear form and the product is
expanded one photon at a time as a sparse polynomial over (e, f, g)
monomials. Classes never interfere, so each class is expanded on its own and
the joint output amplitude is the product of the per-class amplitudes.
Coefficients may be arrays over phase; every step broadcasts.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import product

import numpy as np

from .fock import (
    DEFAULT_MAX_PHOTONS,
    INPUT_MODES,
    OUTPUT_MODES,
    LabeledFockState,
    ModeLabel,
)
from .network import PHOTON_PREFACTOR, TransferCoefficients

Monomial = tuple[int, int, int]


class TruncationError(ValueError):
    """Input state carries more photons than the configured truncation."""


def _check_input(state: LabeledFockState, max_photons: int) -> None:
    extra = state.modes() - set(INPUT_MODES)
    if extra:
        raise ValueError(f"input photons must occupy only modes a, b (got {sorted(extra)})")
    if state.total_photons > max_photons:
        raise TruncationError(
            f"{state} has {state.total_photons} photons, truncation is {max_photons}"
        )


def class_amplitudes(n_a: int, n_b: int, coeffs: TransferCoefficients) -> dict[Monomial, complex]:
    """Output amplitudes for ``n_a`` + ``n_b`` mutually indistinguishable photons.

    Keys are occupations ``(m_e, m_f, m_g)``. Input normalisation
    ``1/sqrt(n_a! n_b!)`` and output normalisation ``sqrt(m_e! m_f! m_g!)``
    are included.
    """
    poly: dict[Monomial, complex] = {(0, 0, 0): 1.0}
    for row, count in ((coeffs.row_a(), n_a), (coeffs.row_b(), n_b)):
        row = [PHOTON_PREFACTOR * c for c in row]
        for _ in range(count):
            grown: dict[Monomial, complex] = {}
            for (me, mf, mg), c in poly.items():
                for key, amp in (((me + 1, mf, mg), row[0]), ((me, mf + 1, mg), row[1]), ((me, mf, mg + 1), row[2])):
                    term = c * amp
                    grown[key] = grown[key] + term if key in grown else term
            poly = grown
    norm = 1.0 / math.sqrt(math.factorial(n_a) * math.factorial(n_b))
    return {
        key: c * norm * math.sqrt(math.factorial(key[0]) * math.factorial(key[1]) * math.factorial(key[2]))
        for key, c in poly.items()
    }


def _class_inputs(state: LabeledFockState) -> dict[int, tuple[int, int]]:
    return {k: state.class_counts(k, INPUT_MODES) for k in state.classes()}


def propagate(
    state: LabeledFockState,
    coeffs: TransferCoefficients,
    max_photons: int = DEFAULT_MAX_PHOTONS,
) -> dict[LabeledFockState, complex]:
    """Full amplitude table over labeled output states in modes e, f, g."""
    _check_input(state, max_photons)
    per_class = {k: class_amplitudes(na, nb, coeffs) for k, (na, nb) in _class_inputs(state).items()}
    classes = sorted(per_class)
    table: dict[LabeledFockState, complex] = {}
    for choice in product(*(per_class[k].items() for k in classes)):
        occ = {}
        amp = 1.0
        for k, (counts, a) in zip(classes, choice):
            amp = amp * a
            for mode, n in zip(OUTPUT_MODES, counts):
                occ[ModeLabel(mode, k)] = n
        table[LabeledFockState(occ)] = amp
    return table


def output_distribution(
    state: LabeledFockState,
    coeffs: TransferCoefficients,
    max_photons: int = DEFAULT_MAX_PHOTONS,
) -> dict[tuple[int, int], np.ndarray]:
    """Probability of each total ``(n_e, n_f)``, summed over classes and ``g``."""
    _check_input(state, max_photons)
    dist: dict[tuple[int, int], np.ndarray] = {(0, 0): 1.0}
    for n_a, n_b in _class_inputs(state).values():
        marginal: dict[tuple[int, int], np.ndarray] = {}
        for (me, mf, _), amp in class_amplitudes(n_a, n_b, coeffs).items():
            p = np.abs(amp) ** 2
            marginal[me, mf] = marginal[me, mf] + p if (me, mf) in marginal else p
        combined: dict[tuple[int, int], np.ndarray] = {}
        for (e1, f1), p1 in dist.items():
            for (e2, f2), p2 in marginal.items():
                key = (e1 + e2, f1 + f2)
                combined[key] = combined[key] + p1 * p2 if key in combined else p1 * p2
        dist = combined
    return dist


def detection_probability(
    state: LabeledFockState,
    coeffs: TransferCoefficients,
    min_e: int,
    min_f: int,
    max_photons: int = DEFAULT_MAX_PHOTONS,
):
    """Probability of at least ``min_e`` photons in e and ``min_f`` in f."""
    return Scheme.at_least(min_e, min_f).probability(output_distribution(state, coeffs, max_photons))


def exact_output_probability(
    state: LabeledFockState,
    coeffs: TransferCoefficients,
    e_count: int,
    f_count: int,
    max_photons: int = DEFAULT_MAX_PHOTONS,
):
    """Probability of exactly ``e_count`` in e and ``f_count`` in f, the rest lost."""
    return Scheme.exactly(e_count, f_count).probability(output_distribution(state, coeffs, max_photons))


_SCHEME_RE = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*$")


@dataclass(frozen=True)
class Scheme:
    """Post-selection rule on output photon counts.

    With ``exact=False`` a pair ``(e, f)`` means "at least e in e and at
    least f in f"; several pairs are OR-ed, so ``((3, 1), (1, 3))`` is the
    combined four-photon scheme. With ``exact=True`` only the listed count
    pairs are accepted.
    """

    counts: tuple[tuple[int, int], ...]
    exact: bool = False

    def __post_init__(self):
        if not self.counts:
            raise ValueError("scheme needs at least one (e, f) pair")
        if any(e < 0 or f < 0 for e, f in self.counts):
            raise ValueError("photon counts must be non-negative")

    @classmethod
    def at_least(cls, min_e: int, min_f: int) -> Scheme:
        return cls(((min_e, min_f),), exact=False)

    @classmethod
    def any_of(cls, *pairs) -> Scheme:
        return cls(tuple(tuple(p) for p in pairs), exact=False)

    @classmethod
    def exactly(cls, *pairs) -> Scheme:
        if len(pairs) == 2 and all(isinstance(p, int) for p in pairs):
            pairs = (tuple(pairs),)
        return cls(tuple(tuple(p) for p in pairs), exact=True)

    @classmethod
    def parse(cls, text: str | Scheme | tuple) -> Scheme:
        """``"3,1"``, ``"3,1+1,3"`` (thresholds) or ``"exact:2,2"``."""
        if isinstance(text, Scheme):
            return text
        if isinstance(text, tuple):
            return cls.at_least(*text)
        body = text.strip()
        exact = body.startswith("exact:")
        if exact:
            body = body[len("exact:"):]
        pairs = []
        for part in body.split("+"):
            m = _SCHEME_RE.match(part)
            if m is None:
                raise ValueError(f"cannot parse detection scheme {text!r}")
            pairs.append((int(m.group(1)), int(m.group(2))))
        return cls(tuple(pairs), exact=exact)

    @property
    def min_photons(self) -> int:
        return min(e + f for e, f in self.counts)

    def accepts(self, n_e: int, n_f: int) -> bool:
        if self.exact:
            return (n_e, n_f) in self.counts
        return any(n_e >= e and n_f >= f for e, f in self.counts)

    def probability(self, dist: dict[tuple[int, int], np.ndarray]):
        total = 0.0
        for (n_e, n_f), p in dist.items():
            if self.accepts(n_e, n_f):
                total = total + p
        return total

    def __str__(self) -> str:
        pairs = "+".join(f"{e},{f}" for e, f in self.counts)
        return f"exact:{pairs}" if self.exact else pairs
