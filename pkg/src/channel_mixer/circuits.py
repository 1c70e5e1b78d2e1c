"""Density-matrix simulation of the ancilla circuits that realise the channels.

Register convention: qubit 0 is the system qubit and is the most significant
bit of the computational-basis index, so a 3-qubit basis state ``|s a1 a2>``
has index ``4*s + 2*a1 + a2``. Ancillas start in ``|0>``.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .channels import SX, SY, SZ, I2, check_state
from .errors import ProbOutOfRange

MAX_QUBITS = 4
SYSTEM = 0

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_PLUS_Y = np.array([1, 1j], dtype=complex) / np.sqrt(2)

# Inputs used for process tomography, in measurement-table order.
INPUT_KETS = (KET0, KET1, KET_PLUS, KET_PLUS_Y)
INPUT_STATES = tuple(np.outer(k, k.conj()) for k in INPUT_KETS)
BASIS_PROJECTORS = {
    "Z": INPUT_STATES[0],
    "X": INPUT_STATES[2],
    "Y": INPUT_STATES[3],
}

_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)
_FIXED = {"X": SX, "Y": SY, "Z": SZ}
_KINDS = {"RY", "X", "Y", "Z", "CX", "CY", "CZ", "CRY"}


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int
    control: Optional[int] = None
    theta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        controlled = self.kind.startswith("C")
        if controlled != (self.control is not None):
            raise ValueError(f"{self.kind} gate control mismatch")
        if self.control is not None and self.control == self.target:
            raise ValueError("control and target must differ")
        if self.kind.endswith("RY") and (self.theta is None or not np.isfinite(self.theta)):
            raise ValueError("rotation gates need a finite angle")

    def matrix(self) -> np.ndarray:
        """2x2 operator applied to the target."""
        if self.kind.endswith("RY"):
            return ry(self.theta)
        return _FIXED[self.kind[-1]]

    def unitary(self, num_qubits: int) -> np.ndarray:
        u = self.matrix()
        if self.control is None:
            return _embed({self.target: u}, num_qubits)
        return (_embed({self.control: _P0}, num_qubits)
                + _embed({self.control: _P1, self.target: u}, num_qubits))


def _embed(ops: dict, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for q in range(n):
        out = np.kron(out, ops.get(q, I2))
    return out


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: Tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}]")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            for q in (g.target, g.control):
                if q is not None and not 0 <= q < self.num_qubits:
                    raise ValueError(f"gate {g} addresses qubit outside the register")

    def unitary(self) -> np.ndarray:
        u = np.eye(2 ** self.num_qubits, dtype=complex)
        for g in self.gates:
            u = g.unitary(self.num_qubits) @ u
        return u


def _check_prob(p: float) -> float:
    if not (0.0 <= p <= 1.0):
        raise ProbOutOfRange(f"probability {p} not in [0, 1]")
    return float(p)


def angle_single(p: float) -> float:
    """RY angle that leaves the ancilla in |0> with probability ``p``."""
    return 2.0 * np.arccos(np.sqrt(_check_prob(p)))


def angle_depol(p: float) -> float:
    """Per-ancilla RY angle of the depolarizing circuit; ``cos^2(theta) = 1 - p``."""
    return 0.5 * np.arccos(1.0 - 2.0 * _check_prob(p))


def build_flip_circuit(p: float, axis: str = "X") -> Circuit:
    """Apply ``axis`` to the system with probability ``1 - p``."""
    if axis not in ("X", "Y"):
        raise ValueError("axis must be 'X' or 'Y'")
    theta = angle_single(p)
    return Circuit(2, (Gate("RY", 1, theta=theta), Gate("C" + axis, SYSTEM, control=1)))


def build_total_mm_circuit(p: float, use_y: bool = False) -> Circuit:
    """Even X/Y flip mixture: identity with probability ``p``, X or Y otherwise.

    The drawn circuit realises Y as Z*X, equal to Y up to a global phase;
    ``use_y=True`` swaps in a genuine controlled-Y for comparison.
    """
    theta1 = angle_single(p)
    a1, a2 = 1, 2
    gates = [
        Gate("RY", a1, theta=theta1),
        Gate("CX", a2, control=a1),
        Gate("CRY", a1, control=a2, theta=np.pi / 2),
    ]
    gates.append(Gate("CX", SYSTEM, control=a2))
    if use_y:
        # on |11> the extra X cancels the first one and Y is applied directly
        gates += [Gate("CX", SYSTEM, control=a1), Gate("CY", SYSTEM, control=a1)]
    else:
        gates.append(Gate("CZ", SYSTEM, control=a1))
    return Circuit(3, gates)


def build_depol_circuit(p: float) -> Circuit:
    """Three independent X, Y, Z kicks realising the depolarizing channel."""
    theta = angle_depol(p)
    gates = [Gate("RY", q, theta=theta) for q in (1, 2, 3)]
    gates += [Gate("CX", SYSTEM, control=1), Gate("CY", SYSTEM, control=2), Gate("CZ", SYSTEM, control=3)]
    return Circuit(4, gates)


def simulate(circuit: Circuit, system_input) -> np.ndarray:
    """Full-register density matrix after running ``circuit``."""
    rho_s = np.asarray(system_input, dtype=complex)
    if rho_s.ndim == 1:
        rho_s = np.outer(rho_s, rho_s.conj())
    anc = np.zeros((2 ** (circuit.num_qubits - 1),) * 2, dtype=complex)
    anc[0, 0] = 1.0
    rho = np.kron(rho_s, anc)
    u = circuit.unitary()
    return u @ rho @ u.conj().T


def system_marginal(rho_full: np.ndarray) -> np.ndarray:
    """Partial trace over every qubit except the system."""
    d = rho_full.shape[0] // 2
    return np.einsum("iaja->ij", rho_full.reshape(2, d, 2, d))


def channel_from_circuit(circuit: Circuit) -> Tuple[np.ndarray, ...]:
    """System outputs for the inputs |0>, |1>, |+>, |+y> (in that order)."""
    u = circuit.unitary()
    d = 2 ** (circuit.num_qubits - 1)
    anc = np.zeros((d, d), dtype=complex)
    anc[0, 0] = 1.0
    outs = []
    for rho_in in INPUT_STATES:
        full = np.kron(rho_in, anc)
        outs.append(system_marginal(u @ full @ u.conj().T))
    return tuple(outs)


def born_probability(rho, basis: str) -> float:
    """Probability of the first outcome (|0>, |+> or |+y>) in ``basis``."""
    p = np.real(np.trace(BASIS_PROJECTORS[basis] @ rho))
    return float(min(max(p, 0.0), 1.0))


def sample_counts(system_state, basis: str, shots: int, seed) -> Tuple[int, int]:
    """Binomial shot counts ``(n_first, n_second)`` for a measurement in ``basis``.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts; equal seeds
    give equal counts.
    """
    if basis not in BASIS_PROJECTORS:
        raise ValueError(f"basis must be one of {sorted(BASIS_PROJECTORS)}")
    if shots < 1:
        raise ValueError("shots must be positive")
    rho = check_state(system_state)
    n0 = int(np.random.default_rng(seed).binomial(shots, born_probability(rho, basis)))
    return n0, shots - n0
