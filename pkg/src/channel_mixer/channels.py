"""Time-dependent single-qubit Pauli channel families.

A Pauli channel acts as ``rho -> sum_a p_a(t) s_a rho s_a`` with
``s = (I, X, Y, Z)``. Every family below is described by its probability
vector ``p(t) = (p0, p1, p2, p3)``; the families double as the analytic ground
truth for the circuit simulator and the tomography pipeline.

Pauli eigenvalues and decay rates follow from the 4x4 Hadamard matrix: the
channel multiplies ``s_a`` by ``lambda_a = sum_b H[a, b] p_b`` and the
time-local generator ``sum_k gamma_k (s_k rho s_k - rho)`` has rates
``gamma_k = 1/4 sum_b H[k, b] (d/dt lambda_b) / lambda_b``.
"""
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import (DomainViolation, EtaOutOfRange, InvalidState,
                     NegativeTime, SingularEigenvalue)
from .qmath import HERMITIAN_TOL, as_matrix, hermiticity_error

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)

HADAMARD = np.array([[1, 1, 1, 1],
                     [1, 1, -1, -1],
                     [1, -1, 1, -1],
                     [1, -1, -1, 1]], dtype=float)

PROB_TOL = 1e-12
SINGULAR_TOL = 1e-10
FD_STEP = 1e-4


class PauliProbs(NamedTuple):
    p0: float
    p1: float
    p2: float
    p3: float


class DecayRates(NamedTuple):
    gamma1: float
    gamma2: float
    gamma3: float


def check_probs(probs, tol: float = PROB_TOL) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.shape != (4,):
        raise ValueError(f"expected 4 probabilities, got shape {p.shape}")
    if np.any(p < -tol) or np.any(p > 1 + tol) or abs(p.sum() - 1.0) > tol:
        raise DomainViolation(f"not a probability vector: {p}")
    return p


def _check_time(t):
    if np.any(np.asarray(t) < 0):
        raise NegativeTime(f"time must be non-negative, got {t}")


# ---------------------------------------------------------------------------
# channel action
# ---------------------------------------------------------------------------

def pauli_action(probs, op) -> np.ndarray:
    """Apply the Pauli channel to an arbitrary 2x2 operator (no state checks)."""
    op = np.asarray(op, dtype=complex)
    return sum(p * s @ op @ s for p, s in zip(probs, PAULIS))


def check_state(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (2, 2):
        raise InvalidState(f"expected a 2x2 density matrix, got {rho.shape}")
    if hermiticity_error(rho) > tol:
        raise InvalidState("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise InvalidState(f"density matrix has trace {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -tol:
        raise InvalidState("density matrix is not positive semidefinite")
    return rho


def apply_pauli(probs, rho) -> np.ndarray:
    """``sum_a p_a s_a rho s_a`` for a valid single-qubit state ``rho``."""
    return pauli_action(check_probs(probs), check_state(rho))


def pauli_eigenvalues(probs) -> np.ndarray:
    """Eigenvalues ``(1, l1, l2, l3)`` of the channel on the Pauli operators."""
    return HADAMARD @ np.asarray(probs, dtype=float)


def probs_from_eigenvalues(lams) -> np.ndarray:
    return HADAMARD @ np.asarray(lams, dtype=float) / 4.0


def depolarizing_probs(p):
    """Probabilities of the depolarizing channel ``(1 - 3p/4) rho + p/4 sum_k s_k rho s_k``."""
    p = np.asarray(p, dtype=float)
    return np.stack([1 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p], axis=-1)


# ---------------------------------------------------------------------------
# probability functions
# ---------------------------------------------------------------------------

def prob_mm(t):
    """Survival probability ``(1 + e^-t) / 2`` of the Markovian flip channels."""
    _check_time(t)
    return 0.5 * (1.0 + np.exp(-np.asarray(t, dtype=float)))


def dprob_mm(t):
    return -0.5 * np.exp(-np.asarray(t, dtype=float))


def probs_nm_replica(t):
    """Survival probabilities ``(p1, p2)`` of the two non-Markovian flip channels.

    ``p1 = 3/2 ((1 + e^-t)/2 - cos^2(t)/3)`` and ``p2 = cos^2(t)``. Raises
    DomainViolation if ``p1`` leaves [0, 1].
    """
    _check_time(t)
    t = np.asarray(t, dtype=float)
    c2 = np.cos(t) ** 2
    p1 = 1.5 * (0.5 * (1.0 + np.exp(-t)) - c2 / 3.0)
    if np.any(p1 < -1e-9) or np.any(p1 > 1 + 1e-9):
        raise DomainViolation(f"p1 outside [0, 1] at t={t}")
    return p1, c2


class DesignValues(NamedTuple):
    a: float
    b: float
    q: float
    r: float
    w: float


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def design_functions(t) -> DesignValues:
    """Designed depolarizing parameters.

    ``a`` is a sum of two sigmoids, ``b`` a narrow bump centred at t=4;
    ``q = a + b`` and ``r = a - b`` are the two non-monotone channels and
    their even mixture ``w = (q + r)/2`` equals ``a``.
    """
    _check_time(t)
    t = np.asarray(t, dtype=float)
    a = 0.5 * _sigmoid(4.0 * (t - 2.0)) + 0.48 * _sigmoid(4.5 * (t - 6.0))
    b = 0.49 * np.exp(-(t - 4.0) ** 6)
    return DesignValues(a, b, a + b, a - b, a)


def design_derivatives(t) -> DesignValues:
    """Closed-form time derivatives of :func:`design_functions`."""
    t = np.asarray(t, dtype=float)
    s1 = _sigmoid(4.0 * (t - 2.0))
    s2 = _sigmoid(4.5 * (t - 6.0))
    da = 0.5 * 4.0 * s1 * (1 - s1) + 0.48 * 4.5 * s2 * (1 - s2)
    db = -6.0 * (t - 4.0) ** 5 * 0.49 * np.exp(-(t - 4.0) ** 6)
    return DesignValues(da, db, da + db, da - db, da)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelFamily:
    """A named map ``t -> p(t)``.

    ``rates`` optionally holds the closed-form decay rates; they are only used
    to cross-check :func:`decay_rates`, never in place of it.
    """
    name: str
    probs_fn: Callable[[float], np.ndarray]
    rates: Optional[Callable[[float], tuple]] = None
    eta: Optional[float] = None

    def probs(self, t) -> np.ndarray:
        _check_time(t)
        return np.asarray(self.probs_fn(float(t)), dtype=float)

    def __call__(self, t) -> np.ndarray:
        return self.probs(t)


def _flip_probs(p, axis):
    out = np.zeros(4)
    out[0] = p
    out[axis] = 1.0 - p
    return out


def mix(eta: float, f1: ChannelFamily, f2: ChannelFamily, name: Optional[str] = None) -> ChannelFamily:
    """Convex mixture ``eta * f1 + (1 - eta) * f2``."""
    if not 0.0 <= eta <= 1.0:
        raise EtaOutOfRange(f"eta={eta} not in [0, 1]")
    if eta == 1.0:
        return f1 if name is None else replace(f1, name=name)
    if eta == 0.0:
        return f2 if name is None else replace(f2, name=name)

    def probs_fn(t):
        return eta * f1.probs(t) + (1.0 - eta) * f2.probs(t)

    return ChannelFamily(name or f"{eta:g}*{f1.name}+{1 - eta:g}*{f2.name}", probs_fn, eta=eta)


def _depol_rate(p, dp):
    g = dp / (4.0 * (1.0 - p))
    return (g, g, g)


def _nm_x1_rate(t):
    et = np.exp(t)
    return ((8 * et * np.sin(t) * np.cos(t) - 6) / (4 * (et * np.cos(2 * t) - 3)), 0.0, 0.0)


MARKOV_X = ChannelFamily("markov_x", lambda t: _flip_probs(prob_mm(t), 1),
                         rates=lambda t: (0.5, 0.0, 0.0))
MARKOV_Y = ChannelFamily("markov_y", lambda t: _flip_probs(prob_mm(t), 2),
                         rates=lambda t: (0.0, 0.5, 0.0))
MIXED_MM = replace(mix(0.5, MARKOV_X, MARKOV_Y), name="mixed_mm",
                   rates=lambda t: (0.25, 0.25, -np.tanh(t / 2) / 4))
NM_X1 = ChannelFamily("nm_x1", lambda t: _flip_probs(probs_nm_replica(t)[0], 1), rates=_nm_x1_rate)
NM_X2 = ChannelFamily("nm_x2", lambda t: _flip_probs(probs_nm_replica(t)[1], 1),
                      rates=lambda t: (np.tan(2 * t), 0.0, 0.0))
MIXED_NM_REPLICA = replace(mix(2.0 / 3.0, NM_X1, NM_X2), name="mixed_nm_replica",
                           rates=lambda t: (0.5, 0.0, 0.0))
DEPOL_Q = ChannelFamily("depol_q", lambda t: depolarizing_probs(design_functions(t).q),
                        rates=lambda t: _depol_rate(design_functions(t).q, design_derivatives(t).q))
DEPOL_R = ChannelFamily("depol_r", lambda t: depolarizing_probs(design_functions(t).r),
                        rates=lambda t: _depol_rate(design_functions(t).r, design_derivatives(t).r))
DEPOL_MIXED = replace(mix(0.5, DEPOL_Q, DEPOL_R), name="depol_mixed",
                      rates=lambda t: _depol_rate(design_functions(t).w, design_derivatives(t).w))

FAMILIES = {f.name: f for f in (MARKOV_X, MARKOV_Y, MIXED_MM, NM_X1, NM_X2, MIXED_NM_REPLICA,
                                DEPOL_Q, DEPOL_R, DEPOL_MIXED)}


def identity_family() -> ChannelFamily:
    return ChannelFamily("identity", lambda t: np.array([1.0, 0.0, 0.0, 0.0]),
                         rates=lambda t: (0.0, 0.0, 0.0))


# ---------------------------------------------------------------------------
# decay rates
# ---------------------------------------------------------------------------

def _probs_derivative(family: ChannelFamily, t: float, dt: float) -> np.ndarray:
    if t >= dt:
        return (family.probs(t + dt) - family.probs(t - dt)) / (2 * dt)
    # second-order one-sided stencil keeps the evaluation inside t >= 0
    return (-3 * family.probs(t) + 4 * family.probs(t + dt) - family.probs(t + 2 * dt)) / (2 * dt)


def decay_rates(family: ChannelFamily, t: float, dt: float = FD_STEP) -> DecayRates:
    """Decay rates of the time-local Pauli generator at time ``t``.

    Probability derivatives are central differences with step ``dt``.
    Raises SingularEigenvalue where a Pauli eigenvalue vanishes.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    lam = pauli_eigenvalues(family.probs(t))
    if np.any(np.abs(lam) < SINGULAR_TOL):
        raise SingularEigenvalue(f"{family.name}: Pauli eigenvalue vanishes at t={t}")
    dlam = HADAMARD @ _probs_derivative(family, t, dt)
    gamma = HADAMARD @ (dlam / lam) / 4.0
    return DecayRates(*(float(g) for g in gamma[1:]))


def closed_form_rates(family: ChannelFamily, t: float) -> Optional[DecayRates]:
    if family.rates is None:
        return None
    return DecayRates(*(float(g) for g in family.rates(t)))


def chi_ideal(family: ChannelFamily, t: float) -> np.ndarray:
    """Process matrix in the Pauli basis; diagonal for Pauli channels."""
    return np.diag(family.probs(t)).astype(complex)
