"""Closed-form checks of the simulator against hand-derived values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import adversary as ad
from . import noise as nm
from . import protocol as pr
from . import quantum as qc


@dataclass(frozen=True)
class OracleResult:
    name: str
    actual: float
    expected: float
    tolerance: float
    upper_bound: bool = False

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.actual):
            return False
        if self.upper_bound:
            return self.actual <= self.expected + self.tolerance
        return abs(self.actual - self.expected) <= self.tolerance

    def line(self) -> str:
        rel = "<=" if self.upper_bound else "vs"
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name} = {self.actual:.6f}  ({rel} {self.expected:.6f}, tol {self.tolerance:g})  [{status}]"


def werner(v: float) -> qc.DensityMatrix:
    return qc.DensityMatrix(v * qc.bell_state().density().matrix + (1 - v) * np.eye(4) / 4)


def run_oracles() -> list[OracleResult]:
    bell = qc.bell_state()
    out = [OracleResult("bell_negativity", qc.negativity(bell.density()), 1.0, 1e-9)]
    for v in (0.5, 0.9, 0.99):
        out.append(OracleResult(f"werner_negativity[v={v}]", qc.negativity(werner(v)), (3 * v - 1) / 2, 1e-9))
    for v in (0.5, 0.9, 0.99):
        out.append(OracleResult(f"werner_fidelity[v={v}]", qc.state_fidelity(werner(v), bell.density()),
                                (3 * v + 1) / 4, 1e-9))

    zero = qc.basis_state("0")
    clone_a, clone_b = ad.uqcm_clone(zero.density())
    out.append(OracleResult("uqcm_clone_fidelity", qc.state_fidelity(clone_a, zero.density()), 5 / 6, 1e-9))
    out.append(OracleResult("uqcm_clone_symmetry", qc.trace_distance(clone_a, clone_b), 0.0, 1e-12))

    cfg = pr.SessionConfig()
    out.append(OracleResult("holevo_passive_eve", ad.attack_holevo(ad.AttackStrategy("PassiveTap"), cfg), 0.0, 1e-9))

    shield = nm.ShieldSpec(45.0)
    tapped = nm.eve_tap_state(zero.density(), shield)
    out.append(OracleResult("shield_45db_trace_distance",
                            qc.trace_distance(tapped, qc.DensityMatrix.maximally_mixed(2)), 3.2e-5, 0.0,
                            upper_bound=True))

    dep = qc.apply_channel(bell.density(), nm.depolarizing(0.01), "B")
    out.append(OracleResult("depolarized_bell_is_werner",
                            float(np.max(np.abs(dep.matrix - werner(0.99).matrix))), 0.0, 1e-12))
    reduced = qc.partial_trace(qc.phase_state(1.234).density(), "B")
    out.append(OracleResult("flying_qubit_reduced_state",
                            float(np.max(np.abs(reduced.matrix - np.eye(2) / 2))), 0.0, 1e-12))
    out.append(OracleResult("inner_product_half_angle",
                            qc.inner_product_arg(bell, qc.phase_state(math.pi / 2)), math.pi / 4, 1e-12))

    phi = 0.7
    rho = qc.phase_state(phi).density()
    x, y = qc.MeasurementBasis.x(), qc.MeasurementBasis.y()
    out.append(OracleResult("correlator_xx_cos", qc.correlator(rho, x, x), math.cos(phi), 1e-12))
    out.append(OracleResult("correlator_xy_sin", qc.correlator(rho, x, y), math.sin(phi), 1e-12))

    q = 0.2
    deph = qc.apply_channel(rho, nm.dephasing(q), "A")
    out.append(OracleResult("dephased_negativity", qc.negativity(deph), 1 - 2 * q, 1e-9))
    return out
