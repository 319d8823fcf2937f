"""Input-output map of the lossy two-mode interferometer.

Beamsplitter -> phase shift on arm ``d`` -> loss in arms ``c``/``d`` ->
beamsplitter -> loss at outputs ``e``/``f``. Every lost photon ends up in the
single sink mode ``g``. A photon entering ``a`` leaves as
``(A e + B f + C g) / sqrt(2)``; one entering ``b`` as ``(D e + E f + F g) / sqrt(2)``.

By default (``"linear"``) a loss element multiplies the surviving amplitude
by ``eta`` and sends ``1 - eta`` to ``g``; the fitted parameter sets are
expressed in this convention. The ``"amplitude"`` convention substitutes
``sqrt(eta)`` / ``sqrt(1 - eta)`` and is only meant for comparison studies.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

SQRT2 = np.sqrt(2.0)
PHOTON_PREFACTOR = 1.0 / SQRT2
LOSS_CONVENTIONS = ("linear", "amplitude")


@dataclass(frozen=True)
class NetworkParams:
    """Phase (rad, scalar or array) and the four mode transmissions."""

    phi: float | np.ndarray = 0.0
    eta_c: float = 1.0
    eta_d: float = 1.0
    eta_e: float = 1.0
    eta_f: float = 1.0
    convention: str = "linear"

    def __post_init__(self):
        for name in ("eta_c", "eta_d", "eta_e", "eta_f"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name}={value} outside [0, 1]")
        if not np.all(np.isfinite(self.phi)):
            raise ValueError("phi must be finite")
        if self.convention not in LOSS_CONVENTIONS:
            raise ValueError(f"unknown loss convention {self.convention!r}")

    def with_phi(self, phi) -> NetworkParams:
        return replace(self, phi=phi)


@dataclass(frozen=True)
class TransferCoefficients:
    """The six output amplitudes, without the per-photon ``1/sqrt(2)``.

    Entries may be numpy arrays when the phase is an array; all downstream
    routines broadcast over them.
    """

    A: complex | np.ndarray
    B: complex | np.ndarray
    C: complex | np.ndarray
    D: complex | np.ndarray
    E: complex | np.ndarray
    F: complex | np.ndarray

    prefactor = PHOTON_PREFACTOR

    def row_a(self):
        return (self.A, self.B, self.C)

    def row_b(self):
        return (self.D, self.E, self.F)

    def swapped(self) -> TransferCoefficients:
        """Coefficients with the roles of inputs ``a`` and ``b`` exchanged."""
        return TransferCoefficients(self.D, self.E, self.F, self.A, self.B, self.C)

    def __iter__(self):
        return iter(getattr(self, f.name) for f in fields(self))


def beamsplitter_matrix() -> np.ndarray:
    return np.array([[1, 1j], [1j, 1]], dtype=complex) / SQRT2


def phase_matrix(phi: float) -> np.ndarray:
    if not np.isfinite(phi):
        raise ValueError("phi must be finite")
    return np.diag([1.0, np.exp(1j * phi)])


def loss_matrix(eta: float) -> np.ndarray:
    """Coupling of one mode to the loss mode, ``[[eta, 1-eta], [1-eta, eta]]``.

    The entries are ``eta`` and ``1 - eta`` themselves (not their square
    roots), so the matrix is not unitary for ``0 < eta < 1``.
    """
    if not (0.0 <= eta <= 1.0):
        raise ValueError(f"eta={eta} outside [0, 1]")
    return np.array([[eta, 1.0 - eta], [1.0 - eta, eta]])


def transfer_coefficients(params: NetworkParams | None = None, **kwargs) -> TransferCoefficients:
    """Closed-form A-F for the given phase and transmissions.

    Accepts either a :class:`NetworkParams` or its fields as keywords.
    """
    if params is None:
        params = NetworkParams(**kwargs)
    elif kwargs:
        params = replace(params, **kwargs)

    if params.convention == "linear":
        keep = {k: getattr(params, f"eta_{k}") for k in "cdef"}
        lose = {k: 1.0 - v for k, v in keep.items()}
    else:
        keep = {k: np.sqrt(getattr(params, f"eta_{k}")) for k in "cdef"}
        lose = {k: np.sqrt(1.0 - getattr(params, f"eta_{k}")) for k in "cdef"}

    phase = np.exp(1j * np.asarray(params.phi, dtype=float))
    # amplitudes arriving at e/f after the second beamsplitter, before output loss
    a_to_e = keep["c"] / SQRT2 - keep["d"] / SQRT2 * phase
    a_to_f = 1j * keep["c"] / SQRT2 + 1j * keep["d"] / SQRT2 * phase
    b_to_e = 1j * keep["c"] / SQRT2 + 1j * keep["d"] / SQRT2 * phase
    b_to_f = keep["d"] / SQRT2 * phase - keep["c"] / SQRT2

    A = keep["e"] * a_to_e
    B = keep["f"] * a_to_f
    C = lose["c"] + 1j * phase * lose["d"] + lose["e"] * a_to_e + lose["f"] * a_to_f
    D = keep["e"] * b_to_e
    E = keep["f"] * b_to_f
    F = 1j * lose["c"] + phase * lose["d"] + lose["e"] * b_to_e + lose["f"] * b_to_f
    return TransferCoefficients(A, B, C, D, E, F)
