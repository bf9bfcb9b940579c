"""Exact one- and two-qubit quantum mechanics.

Qubit 0 (A) is Alice's retained, phase-modulated qubit and qubit 1 (B) is
the flying qubit sent to Bob.  Two-qubit amplitudes are ordered
|00>, |01>, |10>, |11>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, UndefinedPhase

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PSD_FLOOR = -1e-10
CPTP_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


class PureState:
    """Normalized state vector of one or two qubits."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, *, atol: float = NORM_TOL):
        amp = np.array(amplitudes, dtype=complex).reshape(-1)
        if amp.size not in (2, 4):
            raise InvalidArgument(f"state dimension must be 2 or 4, got {amp.size}")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > atol:
            raise InvalidArgument(f"state not normalized (|psi|^2 = {norm!r})")
        amp.setflags(write=False)
        self.amplitudes = amp

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return f"PureState({np.array2string(self.amplitudes, precision=6)})"


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix of dimension 2 or 4."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, check: bool = True):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
            raise InvalidArgument(f"density matrix must be 2x2 or 4x4, got shape {m.shape}")
        if check:
            if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
                raise InvalidArgument("density matrix is not Hermitian")
            tr = np.trace(m).real
            if abs(tr - 1.0) > NORM_TOL:
                raise InvalidArgument(f"density matrix trace is {tr!r}, expected 1")
            if np.linalg.eigvalsh(m).min() < PSD_FLOOR:
                raise InvalidArgument("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim, dtype=complex) / dim)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return state.density()
    raise InvalidArgument(f"expected PureState or DensityMatrix, got {type(state).__name__}")


def _hermitize(m: np.ndarray) -> np.ndarray:
    # Kraus sums drift off Hermitian by a few ulps; keep the invariant exact.
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class KrausChannel:
    """CPTP map given by Kraus operators; checked for trace preservation on construction."""

    operators: tuple
    input_dim: int
    output_dim: int

    def __init__(self, operators: Sequence, *, atol: float = CPTP_TOL):
        ops = tuple(np.array(k, dtype=complex) for k in operators)
        if not ops:
            raise InvalidArgument("a channel needs at least one Kraus operator")
        out_dim, in_dim = ops[0].shape
        for k in ops:
            if k.shape != (out_dim, in_dim):
                raise InvalidArgument("Kraus operators have inconsistent shapes")
            k.setflags(write=False)
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(in_dim))) > atol:
            raise InvalidArgument("Kraus operators are not trace preserving")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "input_dim", in_dim)
        object.__setattr__(self, "output_dim", out_dim)

    def __hash__(self):
        return hash(tuple(k.tobytes() for k in self.operators))

    def __eq__(self, other):
        if not isinstance(other, KrausChannel):
            return NotImplemented
        return len(self.operators) == len(other.operators) and all(
            np.array_equal(a, b) for a, b in zip(self.operators, other.operators)
        )

    def apply(self, rho):
        """Map a raw matrix to a raw matrix, or a DensityMatrix to a DensityMatrix."""
        if isinstance(rho, DensityMatrix):
            return apply_channel(rho, self, "both")
        return sum(k @ rho @ k.conj().T for k in self.operators)

    def then(self, other: KrausChannel) -> KrausChannel:
        """Composition: apply ``self`` first, then ``other``."""
        return KrausChannel([b @ a for b in other.operators for a in self.operators])


@dataclass(frozen=True)
class MeasurementBasis:
    """Local projective qubit measurement with outcomes ±1.

    ``equatorial(theta)`` measures cos(theta) X + sin(theta) Y, whose +1
    eigenvector is (|0> + e^{i theta}|1>)/sqrt(2).
    """

    label: str
    theta: float = 0.0

    @classmethod
    def z(cls):
        return cls("Z")

    @classmethod
    def x(cls):
        return cls("X", 0.0)

    @classmethod
    def y(cls):
        return cls("Y", math.pi / 2)

    @classmethod
    def equatorial(cls, theta: float):
        return cls("Equatorial", float(theta) % (2 * math.pi))

    @property
    def bloch(self) -> np.ndarray:
        if self.label == "Z":
            return np.array([0.0, 0.0, 1.0])
        return np.array([math.cos(self.theta), math.sin(self.theta), 0.0])

    def observable(self) -> np.ndarray:
        n = self.bloch
        return n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z

    def projector(self, outcome: int) -> np.ndarray:
        return 0.5 * (I2 + outcome * self.observable())


# --- states and gates -------------------------------------------------------

def bell_state() -> PureState:
    s = 1 / math.sqrt(2)
    return PureState([s, 0, 0, s])


def basis_state(bits: str) -> PureState:
    """Computational basis state from a bit string such as ``"01"``."""
    amp = np.zeros(2 ** len(bits), dtype=complex)
    amp[int(bits, 2)] = 1.0
    return PureState(amp)


def phase_state(phi: float) -> PureState:
    """(|00> + e^{i phi}|11>)/sqrt(2)."""
    return apply_phase(bell_state(), phi)


def _check_phase(phi) -> float:
    phi = float(phi)
    if not math.isfinite(phi):
        raise InvalidArgument(f"phase must be finite, got {phi!r}")
    return phi % (2 * math.pi)


def apply_phase(state: PureState, phi: float) -> PureState:
    """Apply diag(1, e^{i phi}) to qubit A of a two-qubit state."""
    phi = _check_phase(phi)
    if state.dim != 4:
        raise InvalidArgument("apply_phase acts on a two-qubit state")
    gate = np.kron(np.diag([1.0, np.exp(1j * phi)]), I2)
    return PureState(gate @ state.amplitudes)


def inner_product_arg(reference: PureState, state: PureState) -> float:
    """arg<reference|state> in (-pi, pi].

    For the Bell state against its phase-shifted copy this yields phi/2,
    not phi.  Raises :class:`UndefinedPhase` when the overlap vanishes.
    """
    if reference.dim != state.dim:
        raise InvalidArgument("states have different dimensions")
    z = np.vdot(reference.amplitudes, state.amplitudes)
    if abs(z) < 1e-12:
        raise UndefinedPhase(f"|<ref|state>| = {abs(z):.3e} is below 1e-12")
    ang = math.atan2(z.imag, z.real)
    return math.pi if ang == -math.pi else ang


# --- subsystem operations ---------------------------------------------------

def _keep_index(keep: str) -> int:
    if keep not in ("A", "B"):
        raise InvalidArgument(f"keep must be 'A' or 'B', got {keep!r}")
    return 0 if keep == "A" else 1


def partial_trace(rho: DensityMatrix, keep: str) -> DensityMatrix:
    if rho.dim != 4:
        raise InvalidArgument("partial_trace expects a two-qubit state")
    t = rho.matrix.reshape(2, 2, 2, 2)
    if _keep_index(keep) == 0:
        red = np.einsum("ijkj->ik", t)
    else:
        red = np.einsum("jijk->ik", t)
    return DensityMatrix(_hermitize(red))


def partial_transpose(rho: DensityMatrix) -> np.ndarray:
    """Transpose on qubit B."""
    t = rho.matrix.reshape(2, 2, 2, 2)
    return t.transpose(0, 3, 2, 1).reshape(4, 4)


def lift(op: np.ndarray, target: str) -> np.ndarray:
    if target == "A":
        return np.kron(op, I2)
    if target == "B":
        return np.kron(I2, op)
    raise InvalidArgument(f"target must be 'A' or 'B', got {target!r}")


def apply_channel(rho: DensityMatrix, ch: KrausChannel, target: str = "both") -> DensityMatrix:
    """rho -> sum K rho K^dagger.

    Single-qubit channels on a two-qubit state are lifted onto ``target``
    ('A', 'B' or 'both'); a channel matching the full dimension needs
    ``target='both'``.
    """
    m = rho.matrix
    if ch.input_dim == rho.dim:
        if rho.dim == 4 and target != "both":
            raise InvalidArgument("a two-qubit channel must target 'both'")
        return DensityMatrix(_hermitize(ch.apply(m)))
    if ch.input_dim != 2 or ch.output_dim != 2 or rho.dim != 4:
        raise InvalidArgument(
            f"channel {ch.input_dim}->{ch.output_dim} does not fit a {rho.dim}-dim state"
        )
    targets = {"A": ("A",), "B": ("B",), "both": ("A", "B")}.get(target)
    if targets is None:
        raise InvalidArgument(f"target must be 'A', 'B' or 'both', got {target!r}")
    for t in targets:
        m = sum(k @ m @ k.conj().T for k in (lift(op, t) for op in ch.operators))
    return DensityMatrix(_hermitize(m))


# --- measurement ------------------------------------------------------------

def joint_probabilities(rho: DensityMatrix, basis_a: MeasurementBasis, basis_b: MeasurementBasis) -> np.ndarray:
    """Born probabilities ordered (++, +-, -+, --)."""
    if rho.dim != 4:
        raise InvalidArgument("joint_probabilities expects a two-qubit state")
    probs = np.empty(4)
    i = 0
    for a in (1, -1):
        pa = basis_a.projector(a)
        for b in (1, -1):
            probs[i] = np.trace(np.kron(pa, basis_b.projector(b)) @ rho.matrix).real
            i += 1
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def expectation(rho: DensityMatrix, observable: np.ndarray) -> float:
    return float(np.trace(observable @ rho.matrix).real)


def correlator(rho: DensityMatrix, basis_a: MeasurementBasis, basis_b: MeasurementBasis) -> float:
    return expectation(rho, np.kron(basis_a.observable(), basis_b.observable()))


def measure_pair(rho: DensityMatrix, basis_a: MeasurementBasis, basis_b: MeasurementBasis,
                 rng: np.random.Generator) -> tuple[int, int]:
    """Draw one joint outcome (a, b) by the Born rule."""
    probs = joint_probabilities(rho, basis_a, basis_b)
    k = min(int(np.searchsorted(np.cumsum(probs), rng.random(), side="right")), 3)
    return (1 if k < 2 else -1, 1 if k % 2 == 0 else -1)


# --- information measures ---------------------------------------------------

def _clamped_eigvalsh(m: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvalsh(m)
    return np.where((ev < 0) & (ev >= PSD_FLOOR), 0.0, ev)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    ev, vec = np.linalg.eigh(m)
    ev = np.clip(ev, 0.0, None)
    return (vec * np.sqrt(ev)) @ vec.conj().T


def state_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Accepts pure states too; for two pure states it reduces to |<psi|chi>|^2.
    """
    if isinstance(rho, PureState) and isinstance(sigma, PureState):
        if rho.dim != sigma.dim:
            raise InvalidArgument("states have different dimensions")
        return float(min(1.0, abs(np.vdot(rho.amplitudes, sigma.amplitudes)) ** 2))
    if isinstance(rho, PureState) or isinstance(sigma, PureState):
        psi, other = (rho, sigma) if isinstance(rho, PureState) else (sigma, rho)
        other = as_density(other)
        if psi.dim != other.dim:
            raise InvalidArgument("states have different dimensions")
        val = np.vdot(psi.amplitudes, other.matrix @ psi.amplitudes).real
        return float(min(1.0, max(0.0, val)))
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.dim != sigma.dim:
        raise InvalidArgument("states have different dimensions")
    a, b = rho.matrix, sigma.matrix
    # Root the purer state: sqrt of a near-singular matrix amplifies rounding.
    if np.trace(b @ b).real > np.trace(a @ a).real:
        a, b = b, a
    s = _psd_sqrt(a)
    ev = np.linalg.eigvalsh(_hermitize(s @ b @ s))
    ev = np.where(ev > 1e-14 * max(ev.max(), 1e-300), ev, 0.0)
    return float(min(1.0, max(0.0, np.sqrt(ev).sum() ** 2)))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    return float(0.5 * np.abs(np.linalg.eigvalsh(rho.matrix - sigma.matrix)).sum())


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits."""
    ev = _clamped_eigvalsh(as_density(rho).matrix)
    ev = ev[ev > 0]
    return float(max(0.0, -(ev * np.log2(ev)).sum()))


def negativity(rho: DensityMatrix) -> float:
    """||rho^{T_B}||_1 - 1, so a maximally entangled pair scores 1."""
    rho = as_density(rho)
    if rho.dim != 4:
        raise InvalidArgument("negativity expects a two-qubit state")
    ev = _clamped_eigvalsh(_hermitize(partial_transpose(rho)))
    return float(max(0.0, np.abs(ev).sum() - 1.0))


# --- Bloch-form helpers -----------------------------------------------------

def bloch_vector(rho: DensityMatrix) -> np.ndarray:
    if rho.dim != 2:
        raise InvalidArgument("bloch_vector expects a single-qubit state")
    return np.array([expectation(rho, p) for p in PAULIS])


def from_bloch(r) -> DensityMatrix:
    r = np.asarray(r, dtype=float)
    return DensityMatrix(0.5 * (I2 + r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z))


def correlation_form(rho: DensityMatrix):
    """Return (a, b, T): local Bloch vectors and the 3x3 correlation matrix.

    rho = (I + a.sigma x I + I x b.sigma + sum T_ij sigma_i x sigma_j) / 4.
    """
    a = np.array([expectation(rho, np.kron(p, I2)) for p in PAULIS])
    b = np.array([expectation(rho, np.kron(I2, p)) for p in PAULIS])
    t = np.array([[expectation(rho, np.kron(p, q)) for q in PAULIS] for p in PAULIS])
    return a, b, t
