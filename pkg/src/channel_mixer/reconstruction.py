"""Process tomography and maximum-likelihood estimation of the chi matrix.

The 16 counts are indexed by (input, output) pairs with inputs and outputs
both drawn from ``|0>, |1>, |+>, |+y>`` (projectors H, V, D, R), input-major:

    nu:      1  2  3  4  5  6  7  8  9 10 11 12 13 14 15 16
    input:   H  H  H  H  V  V  V  V  D  D  D  D  R  R  R  R
    output:  H  V  D  R  H  V  D  R  H  V  D  R  H  V  D  R

For each input, outputs H and V come from one Z-basis run (so ``n_H + n_V``
equals the shot count) while D and R are single-projector X- and Y-basis runs.
"""
import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .channels import PAULIS
from .circuits import INPUT_STATES, Circuit, channel_from_circuit
from .divisibility import chi_from_transfer, transfer_from_outputs
from .errors import DegenerateDenominator
from .qmath import hermitian_from

log = logging.getLogger(__name__)

H, V, D, R = INPUT_STATES
PROJECTOR_NAMES = "HVDR"
PROJECTOR_ARRAY = tuple((p_in, p_out) for p_in in (H, V, D, R) for p_out in (H, V, D, R))

EPS_DEN = 0.5
DEFAULT_SHOTS = 8192
MLE_TOL = 1e-8
MLE_MAX_ITERS = 20000


class NoConvergence(UserWarning):
    pass


@dataclass(frozen=True)
class CountsVector:
    """16 tomography counts plus the shots per measurement run."""
    n: np.ndarray
    shots: int
    seed: Optional[int] = None

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        if n.shape != (16,):
            raise ValueError(f"expected 16 counts, got shape {n.shape}")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if np.any(n < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "n", n)

    def scaled(self, factor: float) -> "CountsVector":
        return CountsVector(self.n * factor, int(round(self.shots * factor)), self.seed)

    CSV_HEADER = tuple(f"n{k}" for k in range(1, 17)) + ("shots", "seed")

    def to_csv_row(self) -> List[str]:
        vals = [repr(float(v)) if v != int(v) else str(int(v)) for v in self.n]
        return vals + [str(self.shots), "" if self.seed is None else str(self.seed)]

    @classmethod
    def from_csv_row(cls, row: Sequence[str]) -> "CountsVector":
        if len(row) != 18:
            raise ValueError(f"expected 18 columns, got {len(row)}")
        seed = int(row[17]) if row[17] != "" else None
        return cls(np.array([float(v) for v in row[:16]]), int(row[16]), seed)


# ---------------------------------------------------------------------------
# tomography
# ---------------------------------------------------------------------------

def _born(p_out, rho) -> float:
    return float(np.clip(np.real(np.trace(p_out @ rho)), 0.0, 1.0))


def counts_from_outputs(outputs: Sequence[np.ndarray], shots: int, seed=None,
                        exact: bool = False) -> CountsVector:
    """Simulate the tomography measurements on four channel outputs."""
    n = np.empty(16)
    if exact:
        children = None
    else:
        if isinstance(seed, np.random.SeedSequence):
            # fresh copy: spawning mutates the sequence and would break repeatability
            seed = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
        root = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
        children = root.spawn(12)
    for i, rho in enumerate(outputs):
        probs = (_born(H, rho), _born(D, rho), _born(R, rho))
        if exact:
            z, x, y = (shots * p for p in probs)
        else:
            z, x, y = (int(np.random.default_rng(children[3 * i + k]).binomial(shots, p))
                       for k, p in enumerate(probs))
        n[4 * i: 4 * i + 4] = (z, shots - z, x, y)
    # only plain integer seeds are worth recording next to the counts
    stored = int(seed) if isinstance(seed, (int, np.integer)) else None
    return CountsVector(n, shots, stored)


def run_tomography(circuit: Circuit, shots: int = DEFAULT_SHOTS, seed=None,
                   exact: bool = False) -> CountsVector:
    """Counts for the four tomography inputs sent through ``circuit``.

    ``exact=True`` returns expected counts ``shots * Tr[P rho]`` without sampling.
    """
    return counts_from_outputs(channel_from_circuit(circuit), shots, seed, exact)


def states_from_counts(c: CountsVector) -> Tuple[np.ndarray, ...]:
    """Linear-inversion output states, one per input (may be non-PSD)."""
    states = []
    for i in range(4):
        n_h, _, n_d, n_r = c.n[4 * i: 4 * i + 4]
        rz = 2 * n_h / c.shots - 1
        rx = 2 * n_d / c.shots - 1
        ry = 2 * n_r / c.shots - 1
        states.append(0.5 * (PAULIS[0] + rx * PAULIS[1] + ry * PAULIS[2] + rz * PAULIS[3]))
    return tuple(states)


def chi_linear_inversion(states: Sequence[np.ndarray]) -> np.ndarray:
    """Process matrix reproducing the four measured outputs (not necessarily PSD)."""
    return hermitian_from(chi_from_transfer(transfer_from_outputs(states)))


# ---------------------------------------------------------------------------
# likelihood
# ---------------------------------------------------------------------------

def _count_operator() -> np.ndarray:
    a = np.empty((16, 16), dtype=complex)
    for nu, (p_in, p_out) in enumerate(PROJECTOR_ARRAY):
        for m in range(4):
            for k in range(4):
                a[nu, 4 * m + k] = np.trace(p_out @ PAULIS[m] @ p_in @ PAULIS[k])
    return a


# n_bar = shots * Re(COUNT_OPERATOR @ chi.ravel())
COUNT_OPERATOR = _count_operator()


def expected_counts(chi, shots: int) -> np.ndarray:
    """``shots * Tr[P_out sum_mn chi_mn s_m P_in s_n]`` for every index."""
    chi = np.asarray(chi, dtype=complex)
    return shots * np.real(COUNT_OPERATOR @ chi.ravel())


_LOWER = np.tril_indices(4, -1)
# (row, col) of each complex sub-diagonal entry in parameter order x5..x16
_OFFDIAG = ((1, 0), (2, 1), (3, 2), (2, 0), (3, 1), (3, 0))


def t_matrix(x) -> np.ndarray:
    """Lower-triangular ``T`` with real diagonal ``x1..x4``.

    Below the diagonal: ``T[1,0]=x5+i x6``, ``T[2,1]=x7+i x8``,
    ``T[3,2]=x9+i x10``, ``T[2,0]=x11+i x12``, ``T[3,1]=x13+i x14``,
    ``T[3,0]=x15+i x16`` (1-based parameter names).
    """
    x = np.asarray(x, dtype=float)
    t = np.diag(x[:4]).astype(complex)
    for k, (i, j) in enumerate(_OFFDIAG):
        t[i, j] = x[4 + 2 * k] + 1j * x[5 + 2 * k]
    return t


def chi_from_t(x) -> np.ndarray:
    """``T^dag T / Tr[T^dag T]``: PSD with unit trace for every non-zero ``x``."""
    t = t_matrix(x)
    g = t.conj().T @ t
    return g / np.real(np.trace(g))


def _psd_cholesky(a, tol: float = 1e-13) -> np.ndarray:
    """Lower ``L`` with ``L L^dag = a`` for PSD ``a``; zero pivots give zero columns."""
    n = a.shape[0]
    low = np.zeros_like(a, dtype=complex)
    for k in range(n):
        d = a[k, k].real - np.sum(np.abs(low[k, :k]) ** 2)
        if d <= tol:
            continue
        low[k, k] = np.sqrt(d)
        for i in range(k + 1, n):
            low[i, k] = (a[i, k] - low[i, :k] @ low[k, :k].conj()) / low[k, k]
    return low


def t_from_chi(chi_p) -> np.ndarray:
    """Parameters ``x`` with ``chi_from_t(x)`` equal to the PSD part of ``chi_p``.

    Negative eigenvalues are clipped and the trace renormalised before
    factorising ``chi = T^dag T``.
    """
    lam, vec = np.linalg.eigh(hermitian_from(chi_p))
    lam = lam.clip(0.0)
    if lam.sum() <= 0:
        lam = np.ones(4)
    chi = (vec * (lam / lam.sum())) @ vec.conj().T
    # chi = T^dag T with T lower  <=>  J chi J = L L^dag with L = J T^dag J lower
    rev = np.eye(4)[::-1]
    t = rev @ _psd_cholesky(rev @ chi @ rev) @ rev
    t = t.conj().T
    x = np.empty(16)
    x[:4] = np.real(np.diag(t))
    for k, (i, j) in enumerate(_OFFDIAG):
        x[4 + 2 * k] = t[i, j].real
        x[5 + 2 * k] = t[i, j].imag
    return x


def likelihood(x, counts: CountsVector, eps_den: float = EPS_DEN) -> float:
    """``sum_nu (n_bar - n)^2 / (2 n_bar)`` with ``n_bar`` floored at ``eps_den``."""
    n_bar = expected_counts(chi_from_t(x), counts.shots)
    if eps_den <= 0 and np.any(n_bar <= 0):
        raise DegenerateDenominator("expected count vanished with no floor")
    den = np.maximum(n_bar, eps_den)
    return float(np.sum((n_bar - counts.n) ** 2 / (2 * den)))


_ROWS = np.array([i for i, _ in _OFFDIAG])
_COLS = np.array([j for _, j in _OFFDIAG])
_DIAG = np.arange(4)


def _objective(counts: CountsVector, eps_den: float):
    """Likelihood and its gradient in ``x``, inlined for speed."""
    a = COUNT_OPERATOR * counts.shots
    n = counts.n

    def f(x):
        t = np.zeros((4, 4), dtype=complex)
        t[_DIAG, _DIAG] = x[:4]
        t[_ROWS, _COLS] = x[4::2] + 1j * x[5::2]
        g = t.conj().T @ t
        tr = g[_DIAG, _DIAG].real.sum()
        if tr == 0.0:
            return np.inf, np.zeros(16)
        u = (a @ g.ravel()).real
        n_bar = u / tr
        floored = n_bar < eps_den
        den = np.where(floored, eps_den, n_bar)
        r = n_bar - n
        val = float(np.sum(r * r / (2 * den)))
        # dL/dn_bar, then chain through n_bar = u / tr and g = T^dag T
        c = np.where(floored, r / eps_den, (n_bar * n_bar - n * n) / (2 * den * den))
        b = (c @ a).reshape(4, 4) / tr
        b[_DIAG, _DIAG] -= (c @ u) / tr ** 2
        m = (b.T + b.conj()) @ t.conj().T
        grad = np.empty(16)
        grad[:4] = m[_DIAG, _DIAG].real
        grad[4::2] = m[_COLS, _ROWS].real
        grad[5::2] = -m[_COLS, _ROWS].imag
        return val, grad

    return f


@dataclass
class MLEResult:
    chi: np.ndarray
    x: np.ndarray
    objective: float
    initial_objective: float
    converged: bool
    n_iter: int
    history: List[float] = field(default_factory=list)


def _descend(fg, x0, tol, max_iters, method, history):
    def record(intermediate_result):
        history.append(float(intermediate_result.fun))

    if method == "nelder-mead":
        scale = max(abs(fg(x0)[0]), 1.0)
        return minimize(lambda x: fg(x)[0], x0, method="Nelder-Mead", callback=record,
                        options={"maxiter": max_iters, "maxfev": 4 * max_iters,
                                 "xatol": 1e-7, "fatol": tol * scale, "adaptive": True})
    if method == "l-bfgs":
        return minimize(fg, x0, jac=True, method="L-BFGS-B", callback=record,
                        options={"maxiter": max_iters, "ftol": tol, "gtol": 1e-9})
    raise ValueError(f"unknown MLE method {method!r}")


MLE_METHODS = ("l-bfgs", "nelder-mead")


def mle_chi(counts: CountsVector, tol: float = MLE_TOL, max_iters: int = MLE_MAX_ITERS,
            x0=None, eps_den: float = EPS_DEN, method: str = "l-bfgs", seed=0) -> MLEResult:
    """Physical chi matrix minimising the Gaussian count likelihood.

    The search starts from the factorised linear-inversion estimate. The
    default descent is quasi-Newton with an analytic gradient; ``method=
    "nelder-mead"`` selects a derivative-free simplex instead. Either stops
    once an iteration improves the objective by less than ``tol`` (relative)
    or after ``max_iters`` iterations. An unconverged first attempt gets one
    restart from a perturbed point; if that also fails the best point found
    is returned with ``converged=False`` and a :class:`NoConvergence` warning.
    """
    if x0 is None:
        x0 = t_from_chi(chi_linear_inversion(states_from_counts(counts)))
    x0 = np.asarray(x0, dtype=float)
    fg = _objective(counts, eps_den)
    f_init = fg(x0)[0]
    history = [f_init]
    best = _descend(fg, x0, tol, max_iters, method, history)
    n_iter = best.nit
    if not best.success:
        x1 = best.x + 1e-3 * np.random.default_rng(seed).standard_normal(16)
        retry = _descend(fg, x1, tol, max_iters, method, [])
        n_iter += retry.nit
        if retry.fun < best.fun:
            history.append(float(retry.fun))
            best = retry
        if not retry.success:
            log.warning("MLE stopped without converging: %s", retry.message)
            warnings.warn(f"MLE did not converge in {max_iters} iterations", NoConvergence)
    if best.fun <= f_init:
        x, obj = best.x, float(best.fun)
    else:
        x, obj = x0, f_init
    return MLEResult(chi_from_t(x), x, obj, f_init, bool(best.success), n_iter, history)
