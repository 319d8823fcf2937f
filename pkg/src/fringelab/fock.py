"""Fock states with distinguishability labels.

A photon lives in a spatial mode (``a`` .. ``g``) and carries an integer
distinguishability class. Photons only interfere with photons of the same
class; class 0 is the reference (target) class.
"""

from __future__ import annotations

import json
import math
import re
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from itertools import product
from typing import NamedTuple

SPATIAL_MODES = ("a", "b", "c", "d", "e", "f", "g")
INPUT_MODES = ("a", "b")
OUTPUT_MODES = ("e", "f", "g")

DEFAULT_MAX_PHOTONS = 5

_TOKEN = re.compile(r"^(\d+)([a-g])('*)$")


class ModeLabel(NamedTuple):
    spatial: str
    dist_class: int = 0


def _check_label(label: ModeLabel) -> None:
    if label.spatial not in SPATIAL_MODES:
        raise ValueError(f"unknown spatial mode {label.spatial!r}")
    if label.dist_class < 0:
        raise ValueError("distinguishability class must be >= 0")


@dataclass(frozen=True)
class LabeledFockState:
    """Occupation numbers per (spatial mode, distinguishability class).

    Zero occupations are dropped and the remaining entries are kept sorted by
    spatial mode, then class, so equal states compare and hash equal.
    """

    occupations: tuple[tuple[ModeLabel, int], ...]

    def __init__(self, occupations: Mapping[ModeLabel | tuple[str, int], int] | None = None):
        items: dict[ModeLabel, int] = {}
        for key, count in (occupations or {}).items():
            label = ModeLabel(*key)
            _check_label(label)
            if int(count) != count or count < 0:
                raise ValueError(f"occupation of {label} must be a non-negative integer")
            if count:
                items[label] = items.get(label, 0) + int(count)
        object.__setattr__(self, "occupations", tuple(sorted(items.items())))

    @classmethod
    def parse(cls, text: str) -> LabeledFockState:
        """Build a state from prime notation, e.g. ``"2a 1a' 2b 1b''"``.

        The number of primes is the distinguishability class.
        """
        occ: dict[ModeLabel, int] = {}
        for token in text.replace(",", " ").split():
            m = _TOKEN.match(token)
            if m is None:
                raise ValueError(f"cannot parse Fock token {token!r}")
            label = ModeLabel(m.group(2), len(m.group(3)))
            occ[label] = occ.get(label, 0) + int(m.group(1))
        return cls(occ)

    @property
    def total_photons(self) -> int:
        return sum(n for _, n in self.occupations)

    def as_dict(self) -> dict[ModeLabel, int]:
        return dict(self.occupations)

    def __getitem__(self, label: ModeLabel | tuple[str, int]) -> int:
        return self.as_dict().get(ModeLabel(*label), 0)

    def __iter__(self) -> Iterator[tuple[ModeLabel, int]]:
        return iter(self.occupations)

    def classes(self) -> tuple[int, ...]:
        return tuple(sorted({label.dist_class for label, _ in self.occupations}))

    def mode_total(self, spatial: str) -> int:
        """Photons in one spatial mode, summed over classes."""
        return sum(n for label, n in self.occupations if label.spatial == spatial)

    def class_counts(self, dist_class: int, modes: tuple[str, ...]) -> tuple[int, ...]:
        occ = self.as_dict()
        return tuple(occ.get(ModeLabel(m, dist_class), 0) for m in modes)

    def photons_per_class(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for label, n in self.occupations:
            out[label.dist_class] = out.get(label.dist_class, 0) + n
        return out

    def modes(self) -> set[str]:
        return {label.spatial for label, _ in self.occupations}

    def to_json_obj(self) -> dict[str, list[int]]:
        """Compact form: ``{"a": [2, 1], "b": [2]}`` lists counts by class."""
        out: dict[str, list[int]] = {}
        for label, n in self.occupations:
            counts = out.setdefault(label.spatial, [])
            counts.extend([0] * (label.dist_class + 1 - len(counts)))
            counts[label.dist_class] = n
        return out

    @classmethod
    def from_json_obj(cls, obj: Mapping[str, list[int]]) -> LabeledFockState:
        return cls({(mode, k): n for mode, counts in obj.items() for k, n in enumerate(counts)})

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> LabeledFockState:
        return cls.from_json_obj(json.loads(text))

    def __str__(self) -> str:
        if not self.occupations:
            return "|vac>"
        body = " ".join(f"{n}{label.spatial}{chr(39) * label.dist_class}" for label, n in self.occupations)
        return f"|{body}>"

    def __repr__(self) -> str:
        return f"LabeledFockState.parse({str(self)[1:-1]!r})"


def state_norm_factor(state: LabeledFockState) -> float:
    """Product of ``1/sqrt(n!)`` over every occupied (mode, class) pair."""
    norm = 1.0
    for _, n in state.occupations:
        norm /= math.sqrt(math.factorial(n))
    return norm


def compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to write ``n`` as an ordered sum of ``parts`` non-negative ints."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def enumerate_output_configs(
    total_per_class: Mapping[int, int],
    min_e: int = 0,
    min_f: int = 0,
) -> list[LabeledFockState]:
    """Every distribution of each class's photons over ``e``, ``f``, ``g``.

    Only configurations with at least ``min_e`` photons in ``e`` and ``min_f``
    in ``f`` (all classes together) are kept; ``g`` is unrestricted.
    """
    classes = sorted(total_per_class)
    per_class = [list(compositions(total_per_class[k], 3)) for k in classes]
    out = []
    for choice in product(*per_class):
        n_e = sum(c[0] for c in choice)
        n_f = sum(c[1] for c in choice)
        if n_e < min_e or n_f < min_f:
            continue
        occ = {}
        for k, counts in zip(classes, choice):
            for mode, n in zip(OUTPUT_MODES, counts):
                occ[ModeLabel(mode, k)] = n
        out.append(LabeledFockState(occ))
    return out
