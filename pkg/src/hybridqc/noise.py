"""Noise processes: channel depolarization, shield dephasing, source
imperfection, the eavesdropper's attenuated tap, and detector dark counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quantum as qc
from .errors import InvalidArgument
from .quantum import DensityMatrix, KrausChannel


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise InvalidArgument(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class NoiseSpec:
    depolarizing_p: float = 0.01
    shield_dephasing_q: float = 0.0
    source_visibility: float = 1.0

    def __post_init__(self):
        for name in ("depolarizing_p", "shield_dephasing_q", "source_visibility"):
            object.__setattr__(self, name, _check_prob(name, getattr(self, name)))


@dataclass(frozen=True)
class DetectorSpec:
    dark_count_prob: float = 0.03
    efficiency: float = 1.0

    def __post_init__(self):
        for name in ("dark_count_prob", "efficiency"):
            object.__setattr__(self, name, _check_prob(name, getattr(self, name)))


@dataclass(frozen=True)
class ShieldSpec:
    attenuation_db: float = 45.0

    def __post_init__(self):
        db = float(self.attenuation_db)
        if not db >= 0.0:
            raise InvalidArgument(f"attenuation_db must be >= 0, got {db!r}")
        object.__setattr__(self, "attenuation_db", db)

    @property
    def transmittance(self) -> float:
        """Power ratio 10^(-dB/10) of probe signal reaching the outside."""
        if math.isinf(self.attenuation_db):
            return 0.0
        return 10.0 ** (-self.attenuation_db / 10.0)


def depolarizing(p: float) -> KrausChannel:
    """rho -> (1-p) rho + p I/2."""
    p = _check_prob("p", p)
    if p == 0.0:
        return KrausChannel([qc.I2])
    ops = [math.sqrt(1 - 3 * p / 4) * qc.I2]
    ops += [math.sqrt(p / 4) * s for s in qc.PAULIS]
    return KrausChannel(ops)


def dephasing(q: float) -> KrausChannel:
    """rho -> (1-q) rho + q Z rho Z; coherences scale by 1-2q."""
    q = _check_prob("q", q)
    if q == 0.0:
        return KrausChannel([qc.I2])
    return KrausChannel([math.sqrt(1 - q) * qc.I2, math.sqrt(q) * qc.PAULI_Z])


def source_state(phi: float, source_visibility: float) -> DensityMatrix:
    """Werner-form source v |psi_phi><psi_phi| + (1-v) I/4."""
    v = _check_prob("source_visibility", source_visibility)
    pure = qc.phase_state(phi).density().matrix
    return DensityMatrix(v * pure + (1 - v) * np.eye(4) / 4)


def eve_tap_state(rho_flying: DensityMatrix, shield: ShieldSpec) -> DensityMatrix:
    """What a detector outside the shield sees: eta rho + (1-eta) I/2."""
    if rho_flying.dim != 2:
        raise InvalidArgument("eve_tap_state expects the single flying qubit")
    eta = shield.transmittance
    return DensityMatrix(eta * rho_flying.matrix + (1 - eta) * qc.I2 / 2)


def apply_dark_count(outcome: int, det: DetectorSpec, rng: np.random.Generator) -> int | None:
    """Corrupt one detector outcome.

    Returns None for a no-detection (probability 1 - efficiency); otherwise
    with probability ``dark_count_prob`` a fair random ±1 replaces the
    outcome.
    """
    if det.efficiency < 1.0 and rng.random() >= det.efficiency:
        return None
    if det.dark_count_prob > 0.0 and rng.random() < det.dark_count_prob:
        return 1 if rng.random() < 0.5 else -1
    return outcome
