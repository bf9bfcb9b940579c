"""Eavesdropping attacks and the Holevo bound on what they can learn.

Three attacks are modelled: a passive tap outside the shield, intercept-
resend on the flying qubit, and symmetric universal 1->2 cloning.  Eve has
no phase reference locked to Alice's modulator, so each trial she measures
in a frame rotated by a private uniform angle and reports her phase guess
relative to that frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import noise as nm
from . import protocol as pr
from . import quantum as qc
from .errors import InvalidArgument
from .quantum import DensityMatrix, KrausChannel, MeasurementBasis
from .sampling import correlated_batch, correlator_mean, single_outcomes

KINDS = ("None", "PassiveTap", "InterceptResend", "UniversalClone")
POLICIES = ("FixedX", "FixedZ", "RandomEquatorial")

ROLE_FOR_KIND = {
    "PassiveTap": "EveClassical",
    "UniversalClone": "EveQuantum",
    "InterceptResend": "EveInterceptResend",
}


@dataclass(frozen=True)
class AttackStrategy:
    kind: str = "None"
    basis_policy: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown attack kind {self.kind!r}")
        if self.kind == "InterceptResend":
            if self.basis_policy not in POLICIES:
                raise InvalidArgument(f"intercept-resend needs a basis policy from {POLICIES}")
        elif self.basis_policy is not None:
            raise InvalidArgument("basis_policy only applies to InterceptResend")

    @property
    def eve_role(self) -> str | None:
        return ROLE_FOR_KIND.get(self.kind)


@dataclass(frozen=True)
class AttackOutcome:
    phi_true: float
    eve_phi_est: float
    eve_state_fidelity: float
    bob_correlators: pr.Correlators
    bob_state_fidelity: float
    holevo_bits: float
    eve_marginal_fidelity: float = math.nan

    @property
    def eve_circular_error(self) -> float:
        return pr.circular_distance(self.eve_phi_est, self.phi_true)

    @property
    def bob_post_attack_visibility(self) -> float:
        return min(1.0, self.bob_correlators.amplitude)

    def eve_phase_accuracy_at(self, delta: float) -> float:
        return float(self.eve_circular_error <= delta)


# --- cloning ----------------------------------------------------------------

def _uqcm_isometry() -> np.ndarray:
    """Buzek-Hillery cloner as an 8x2 isometry onto clone_a x clone_b x ancilla."""
    v = np.zeros((8, 2), dtype=complex)
    big, small = math.sqrt(2 / 3), math.sqrt(1 / 6)
    # index = 4*clone_a + 2*clone_b + ancilla
    v[0b000, 0] = big
    v[0b011, 0] = small
    v[0b101, 0] = small
    v[0b111, 1] = big
    v[0b010, 1] = small
    v[0b100, 1] = small
    return v


UQCM_ISOMETRY = _uqcm_isometry()


def uqcm_clone(rho_in: DensityMatrix) -> tuple[DensityMatrix, DensityMatrix]:
    """Run the optimal symmetric universal cloner; return both one-qubit clones."""
    if rho_in.dim != 2:
        raise InvalidArgument("uqcm_clone expects a single qubit")
    out = (UQCM_ISOMETRY @ rho_in.matrix @ UQCM_ISOMETRY.conj().T).reshape(2, 2, 2, 2, 2, 2)
    clone_a = np.einsum("ijkljk->il", out)
    clone_b = np.einsum("ijkimk->jm", out)
    return (DensityMatrix(0.5 * (clone_a + clone_a.conj().T)),
            DensityMatrix(0.5 * (clone_b + clone_b.conj().T)))


@lru_cache(maxsize=None)
def uqcm_channel() -> KrausChannel:
    """The map from the cloner's input to the clone forwarded to Bob."""
    v = UQCM_ISOMETRY.reshape(2, 4, 2)
    return KrausChannel([v[:, j, :] for j in range(4)])


def intercept_channel(policy: str, frame: float = 0.0) -> KrausChannel:
    """Bob's view of the flying qubit after Eve measures and resends it."""
    if policy == "FixedZ":
        basis = MeasurementBasis.z()
        return KrausChannel([basis.projector(1), basis.projector(-1)])
    if policy == "FixedX":
        basis = MeasurementBasis.equatorial(frame)
        return KrausChannel([basis.projector(1), basis.projector(-1)])
    if policy == "RandomEquatorial":
        # Averaging equatorial measure-and-prepare over a uniform angle equals
        # an even mix of X and Y measure-and-prepare.
        s = math.sqrt(0.5)
        return KrausChannel([s * b.projector(o) for b in (MeasurementBasis.x(), MeasurementBasis.y())
                             for o in (1, -1)])
    raise InvalidArgument(f"unknown basis policy {policy!r}")


# --- Eve's estimator --------------------------------------------------------

def eve_estimate_phase(angles: np.ndarray, outcomes: np.ndarray, frame: float) -> float:
    """Bloch azimuth of Eve's qubit from equatorial outcomes.

    Least-squares fit of <o> = x cos(theta) + y sin(theta) over detected
    outcomes.  With no usable data the guess is her frame origin.
    """
    keep = outcomes != 0
    if not keep.any():
        return frame % pr.TWO_PI
    th = angles[keep]
    design = np.column_stack((np.cos(th), np.sin(th)))
    sol, *_ = np.linalg.lstsq(design, outcomes[keep].astype(float), rcond=None)
    if sol[0] == 0.0 and sol[1] == 0.0:
        return frame % pr.TWO_PI
    return math.atan2(sol[1], sol[0]) % pr.TWO_PI


def _eq_probs(r: np.ndarray, angles: np.ndarray) -> np.ndarray:
    return np.clip(0.5 * (1 + r[0] * np.cos(angles) + r[1] * np.sin(angles)), 0.0, 1.0)


def _two_setting_measure(rho_eve: DensityMatrix, n: int, det, rng, backend=None):
    """Eve's X/Y tomography of her qubit in her own frame; returns (guess, Bloch estimate)."""
    frame = rng.uniform(0.0, pr.TWO_PI)
    half = n // 2
    angles = np.concatenate((np.full(half, frame), np.full(n - half, frame + math.pi / 2)))
    r = qc.bloch_vector(rho_eve)
    outcomes = single_outcomes(_eq_probs(r, angles), n, det, rng, backend)
    guess = eve_estimate_phase(angles, outcomes, frame)
    return guess, _tomography(angles, outcomes)


def _tomography(angles, outcomes) -> np.ndarray:
    keep = outcomes != 0
    if not keep.any():
        return np.zeros(3)
    design = np.column_stack((np.cos(angles[keep]), np.sin(angles[keep])))
    sol, *_ = np.linalg.lstsq(design, outcomes[keep].astype(float), rcond=None)
    r = np.array([sol[0], sol[1], 0.0])
    norm = np.linalg.norm(r)
    return r / norm if norm > 1 else r


def eve_reconstruction_fidelity(phi_guess: float, phi_true: float) -> float:
    """|<psi_Eve|psi_phi>|^2 for Eve's fabricated pair carrying her phase guess."""
    return qc.state_fidelity(qc.phase_state(phi_guess), qc.phase_state(phi_true))


# --- Holevo bound -----------------------------------------------------------

def holevo_information(ensemble: Sequence[tuple[float, DensityMatrix]]) -> float:
    """chi = S(sum p rho) - sum p S(rho), in bits."""
    probs = np.array([p for p, _ in ensemble], dtype=float)
    if len(ensemble) == 0 or abs(probs.sum() - 1.0) > 1e-9 or (probs < 0).any():
        raise InvalidArgument("ensemble probabilities must be non-negative and sum to 1")
    dims = {rho.dim for _, rho in ensemble}
    if len(dims) != 1:
        raise InvalidArgument("ensemble states have different dimensions")
    avg = sum(p * rho.matrix for p, rho in ensemble)
    chi = qc.von_neumann_entropy(DensityMatrix(0.5 * (avg + avg.conj().T))) - sum(
        p * qc.von_neumann_entropy(rho) for p, rho in ensemble)
    return max(0.0, chi)


def eve_state(strategy: AttackStrategy, phi: float, cfg: pr.SessionConfig) -> DensityMatrix:
    """Eve's single-qubit state before she measures."""
    flying = qc.partial_trace(pr.transmit(phi, cfg), "B")
    if strategy.kind == "PassiveTap":
        return nm.eve_tap_state(flying, cfg.shield)
    if strategy.kind == "UniversalClone":
        return uqcm_clone(flying)[1]
    return flying


@lru_cache(maxsize=256)
def attack_holevo(strategy: AttackStrategy, cfg: pr.SessionConfig) -> float:
    """Holevo information of Eve's states over the uniformly used alphabet."""
    m = cfg.alphabet.size
    return holevo_information([(1 / m, eve_state(strategy, phi, cfg)) for phi in cfg.alphabet.phases])


# --- attack trials ----------------------------------------------------------

def _bob_fidelity(rho_bob: DensityMatrix, phi: float) -> float:
    return qc.state_fidelity(rho_bob, qc.phase_state(phi))


def passive_tap_trial(phi: float, cfg: pr.SessionConfig, n: int, rng: np.random.Generator,
                      backend=None) -> AttackOutcome:
    rho = pr.transmit(phi, cfg)
    bob = pr.bob_measure_batch(rho, n, cfg.detector, rng, backend=backend)
    flying = qc.partial_trace(rho, "B")
    tapped = nm.eve_tap_state(flying, cfg.shield)
    guess, r_est = _two_setting_measure(tapped, n, cfg.detector, rng, backend)
    return AttackOutcome(
        phi_true=phi,
        eve_phi_est=guess,
        eve_state_fidelity=eve_reconstruction_fidelity(guess, phi),
        bob_correlators=bob,
        bob_state_fidelity=pr.transmission_fidelity(phi, cfg),
        holevo_bits=attack_holevo(AttackStrategy("PassiveTap"), cfg),
        eve_marginal_fidelity=qc.state_fidelity(qc.from_bloch(r_est), flying),
    )


def _intercept_directions(policy: str, frame: float, n: int, rng) -> np.ndarray:
    if policy == "FixedZ":
        return np.tile([0.0, 0.0, 1.0], (n, 1))
    if policy == "FixedX":
        th = np.full(n, frame)
    else:
        th = rng.uniform(0.0, pr.TWO_PI, n)
    return np.column_stack((np.cos(th), np.sin(th), np.zeros(n)))


def intercept_resend_trial(phi: float, cfg: pr.SessionConfig, policy: str, n: int,
                           rng: np.random.Generator, backend=None) -> AttackOutcome:
    """Eve measures each flying qubit, keeps the result and resends the eigenstate.

    Sampling is joint: Eve's projection outcome fixes both the state she
    resends and the conditional state of Alice's qubit.
    """
    if policy not in POLICIES:
        raise InvalidArgument(f"unknown basis policy {policy!r}")
    rho = pr.transmit(phi, cfg)
    a_vec, b_vec, t = qc.correlation_form(rho)
    frame = rng.uniform(0.0, pr.TWO_PI)
    dirs = _intercept_directions(policy, frame, n, rng)

    ideal = nm.DetectorSpec(0.0, 1.0)
    bn = dirs @ b_vec
    e = single_outcomes(np.clip(0.5 * (1 + bn), 0, 1), n, ideal, rng, backend).astype(float)
    record = single_outcomes((e + 1) / 2, n, cfg.detector, rng, backend)

    # Conditional Bloch vector of A given Eve's outcome.
    denom = 1 + e * bn
    r_a = (a_vec[None, :] + e[:, None] * (dirs @ t.T)) / np.where(denom > 0, denom, 1.0)[:, None]
    half = n // 2
    probs = []
    for rows, (ba, bb) in zip((slice(0, half), slice(half, n)), pr.bob_settings(0.0)):
        pa = np.clip(0.5 * (1 + r_a[rows] @ ba.bloch), 0, 1)
        pb = np.clip(0.5 * (1 + e[rows] * (dirs[rows] @ bb.bloch)), 0, 1)
        probs.append(np.column_stack((pa * pb, pa * (1 - pb), (1 - pa) * pb, (1 - pa) * (1 - pb))))
    s_xx, k_xx = correlated_batch(probs[0], half, cfg.detector, rng, backend)
    s_xy, k_xy = correlated_batch(probs[1], n - half, cfg.detector, rng, backend)
    bob = pr.Correlators(correlator_mean(s_xx, k_xx), correlator_mean(s_xy, k_xy), k_xx, k_xy)

    if policy == "FixedZ":
        guess = frame
    else:
        guess = eve_estimate_phase(np.arctan2(dirs[:, 1], dirs[:, 0]), record, frame)
    rho_bob = qc.apply_channel(rho, intercept_channel(policy, frame), "B")
    return AttackOutcome(
        phi_true=phi,
        eve_phi_est=guess,
        eve_state_fidelity=eve_reconstruction_fidelity(guess, phi),
        bob_correlators=bob,
        bob_state_fidelity=_bob_fidelity(rho_bob, phi),
        holevo_bits=attack_holevo(AttackStrategy("InterceptResend", policy), cfg),
    )


@lru_cache(maxsize=4096)
def _cloned_pair(phi: float, noise: nm.NoiseSpec) -> DensityMatrix:
    return qc.apply_channel(pr._transmit_cached(phi, noise), uqcm_channel(), "B")


def clone_attack_trial(phi: float, cfg: pr.SessionConfig, n: int, rng: np.random.Generator,
                       backend=None) -> AttackOutcome:
    """Eve clones each flying qubit, forwards one clone to Bob and measures the other."""
    phi = float(phi) % pr.TWO_PI
    rho = pr.transmit(phi, cfg)
    rho_bob = _cloned_pair(phi, cfg.noise)
    bob = pr.bob_measure_batch(rho_bob, n, cfg.detector, rng, backend=backend)
    clone_b = uqcm_clone(qc.partial_trace(rho, "B"))[1]
    guess, _ = _two_setting_measure(clone_b, n, cfg.detector, rng, backend)
    return AttackOutcome(
        phi_true=phi,
        eve_phi_est=guess,
        eve_state_fidelity=eve_reconstruction_fidelity(guess, phi),
        bob_correlators=bob,
        bob_state_fidelity=_bob_fidelity(rho_bob, phi),
        holevo_bits=attack_holevo(AttackStrategy("UniversalClone"), cfg),
    )


def attack_trial(strategy: AttackStrategy, phi: float, cfg: pr.SessionConfig, n: int, rng,
                 backend=None) -> AttackOutcome:
    if strategy.kind == "PassiveTap":
        return passive_tap_trial(phi, cfg, n, rng, backend)
    if strategy.kind == "InterceptResend":
        return intercept_resend_trial(phi, cfg, strategy.basis_policy, n, rng, backend)
    if strategy.kind == "UniversalClone":
        return clone_attack_trial(phi, cfg, n, rng, backend)
    raise InvalidArgument("attack_trial needs an active attack")


def bob_channel_state(strategy: AttackStrategy, phi: float, cfg: pr.SessionConfig, frame: float = 0.0) -> DensityMatrix:
    """Joint state Bob measures, averaged over Eve's outcomes."""
    rho = pr.transmit(phi, cfg)
    if strategy.kind == "InterceptResend":
        return qc.apply_channel(rho, intercept_channel(strategy.basis_policy, frame), "B")
    if strategy.kind == "UniversalClone":
        return qc.apply_channel(rho, uqcm_channel(), "B")
    return rho


# --- empirical information --------------------------------------------------

def _mm_entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0]
    n = counts.sum()
    p = counts / n
    plug_in = -(p * np.log(p)).sum()
    return (plug_in + (len(counts) - 1) / (2 * n)) / math.log(2)


def empirical_mutual_information(x: Sequence[int], y: Sequence[int]) -> float:
    """Plug-in mutual information in bits with Miller-Madow bias correction."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.size == 0:
        raise InvalidArgument("x and y must be non-empty and equally long")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    joint = np.zeros((xi.max() + 1, yi.max() + 1))
    np.add.at(joint, (xi, yi), 1)
    return _mm_entropy(joint.sum(1)) + _mm_entropy(joint.sum(0)) - _mm_entropy(joint.ravel())


def sample_eve_observations(strategy: AttackStrategy, cfg: pr.SessionConfig, symbols: np.ndarray,
                            rng: np.random.Generator, angle_bins: int = 8, backend=None) -> np.ndarray:
    """One Eve measurement per symbol, coded as setting * 3 + (outcome + 1).

    Settings are in Alice's frame: X/Y at random for tap and clone, the
    policy's basis for intercept-resend (random equatorial angles binned).
    """
    symbols = np.asarray(symbols)
    n = symbols.size
    blochs = np.array([qc.bloch_vector(eve_state(strategy, phi, cfg)) for phi in cfg.alphabet.phases])
    r = blochs[symbols]
    if strategy.kind == "InterceptResend" and strategy.basis_policy == "FixedZ":
        setting = np.zeros(n, dtype=int)
        p = 0.5 * (1 + r[:, 2])
    else:
        if strategy.kind == "InterceptResend" and strategy.basis_policy == "FixedX":
            setting = np.zeros(n, dtype=int)
            th = np.zeros(n)
        elif strategy.kind == "InterceptResend":
            th = rng.uniform(0.0, pr.TWO_PI, n)
            setting = np.minimum((th / pr.TWO_PI * angle_bins).astype(int), angle_bins - 1)
        else:
            setting = rng.integers(0, 2, n)
            th = setting * (math.pi / 2)
        p = 0.5 * (1 + r[:, 0] * np.cos(th) + r[:, 1] * np.sin(th))
    outcomes = single_outcomes(np.clip(p, 0, 1), n, cfg.detector, rng, backend)
    return setting * 3 + (outcomes + 1)
