"""Transfer matrices, intermediate maps and the CP-divisibility test.

Conventions
-----------
Matrix units are ordered ``G1=|0><0|, G2=|0><1|, G3=|1><0|, G4=|1><1|`` so
the coefficient vector of an operator in that basis is its row-major
flattening. The transfer matrix has entries ``F[a, b] = Tr[G_a^dag L(G_b)]``,
hence column ``b`` of ``F`` is ``L(G_b).ravel()`` and
``L(rho).ravel() == F @ rho.ravel()``.

The Choi matrix is ``W = 1/2 sum_ab F[a, b] G_b (x) G_a``, which equals
``(id (x) L)|b00><b00|`` and has unit trace for trace-preserving maps.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from .channels import PAULIS, ChannelFamily, chi_ideal
from .errors import NonPositiveInput
from .qmath import HERMITIAN_TOL, hermitian_eigen, pseudo_inverse, rank_at, trace_norm

EPS_CLASS = 1e-6
EPS_TP = 1e-6
PINV_CUTOFF = 1e-10

MATRIX_UNITS = tuple(np.eye(4, dtype=complex)[k].reshape(2, 2) for k in range(4))


def _chi_to_transfer_matrix() -> np.ndarray:
    # vec(A X B) = (A kron B^T) vec(X) for row-major vec
    k = np.zeros((16, 16), dtype=complex)
    for m in range(4):
        for n in range(4):
            k[:, 4 * m + n] = np.kron(PAULIS[m], PAULIS[n].T).ravel()
    return k


CHI_TO_F = _chi_to_transfer_matrix()
F_TO_CHI = np.linalg.inv(CHI_TO_F)


class Verdict(str, Enum):
    CP = "CPdivisibleStep"
    NOT_CP = "NotCP"
    SINGULAR = "SingularIntermediate"


@dataclass(frozen=True)
class DivisibilityReport:
    s: float
    t: float
    min_eig: float
    trace_norm: float
    verdict: Verdict
    min_eig_std: Optional[float] = None
    singular: bool = False


class IntermediateMap(NamedTuple):
    transfer: np.ndarray
    singular: bool


def transfer_from_chi(chi) -> np.ndarray:
    """Transfer matrix of ``rho -> sum_mn chi[m, n] s_m rho s_n``."""
    chi = np.asarray(chi, dtype=complex)
    return (CHI_TO_F @ chi.reshape(chi.shape[:-2] + (16,))[..., None])[..., 0].reshape(chi.shape[:-2] + (4, 4))


def chi_from_transfer(f) -> np.ndarray:
    """Inverse of :func:`transfer_from_chi`."""
    f = np.asarray(f, dtype=complex)
    return (F_TO_CHI @ f.reshape(f.shape[:-2] + (16,))[..., None])[..., 0].reshape(f.shape[:-2] + (4, 4))


def transfer_from_outputs(outputs: Sequence[np.ndarray]) -> np.ndarray:
    """Transfer matrix from the images of |0>, |1>, |+>, |+y>.

    The off-diagonal unit is recovered as
    ``L(G2) = L(+) + i L(+y) - (1+i)/2 (L(G1) + L(G4))`` and ``L(G3) = L(G2)^dag``.
    """
    l0, l1, lp, ly = (np.asarray(o, dtype=complex) for o in outputs)
    l_g2 = lp + 1j * ly - 0.5 * (1 + 1j) * (l0 + l1)
    images = (l0, l_g2, l_g2.conj().T, l1)
    return np.stack([im.ravel() for im in images], axis=1)


def apply_transfer(f, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return (np.asarray(f) @ rho.ravel()).reshape(2, 2)


def transfer_of_family(family: ChannelFamily, t: float) -> np.ndarray:
    return transfer_from_chi(chi_ideal(family, t))


def intermediate_transfer(f_t, f_s, cutoff: float = PINV_CUTOFF) -> IntermediateMap:
    """``F(t) F(s)^+`` plus a flag set when ``F(s)`` is rank deficient at ``cutoff``."""
    singular = rank_at(f_s, cutoff) < np.asarray(f_s).shape[0]
    return IntermediateMap(np.asarray(f_t) @ pseudo_inverse(f_s, cutoff), singular)


def choi_from_transfer(f) -> np.ndarray:
    """Choi matrix ``1/2 sum F[a, b] G_b (x) G_a``; works on stacks of transfer matrices."""
    f = np.asarray(f, dtype=complex)
    lead = f.shape[:-2]
    w = f.reshape(lead + (2, 2, 2, 2))
    # W[b1 a1, b2 a2] = F[(a1 a2), (b1 b2)] / 2
    w = np.moveaxis(w, (-4, -3, -2, -1), (-3, -1, -4, -2))
    return 0.5 * w.reshape(lead + (4, 4))


def cp_verdict(w, eps_class: float = EPS_CLASS, eps_tp: float = EPS_TP):
    """Return ``(min_eig, trace_norm, verdict)`` for a Choi matrix."""
    lam = hermitian_eigen(w, vectors=False).eigenvalues
    tn = float(np.sum(np.abs(lam))) if lam.size else trace_norm(w)
    min_eig = float(lam[0])
    not_cp = min_eig < -eps_class or abs(tn - 1.0) > eps_tp
    return min_eig, tn, Verdict.NOT_CP if not_cp else Verdict.CP


def intermediate_report(f_t, f_s, s: float, t: float, eps_class: float = EPS_CLASS,
                        eps_tp: float = EPS_TP, cutoff: float = PINV_CUTOFF) -> DivisibilityReport:
    im = intermediate_transfer(f_t, f_s, cutoff)
    w = choi_from_transfer(im.transfer)
    # pinv of a non-Hermiticity-preserving approximation can leave round-off
    w = 0.5 * (w + w.conj().T)
    min_eig, tn, verdict = cp_verdict(w, eps_class, eps_tp)
    if im.singular:
        verdict = Verdict.SINGULAR
    return DivisibilityReport(s, t, min_eig, tn, verdict, singular=im.singular)


def process_fidelity(chi, chi_id) -> float:
    """``Tr[sqrt(sqrt(chi) chi_id sqrt(chi))]^2 / (Tr chi Tr chi_id)``."""
    roots = []
    for m in (chi, chi_id):
        lam, vec = hermitian_eigen(m)
        if lam[0] < -HERMITIAN_TOL:
            raise NonPositiveInput(f"process matrix has eigenvalue {lam[0]:.3g}")
        roots.append((lam.clip(0.0), vec))
    lam, vec = roots[0]
    sqrt_chi = (vec * np.sqrt(lam)) @ vec.conj().T
    lam_id, vec_id = roots[1]
    chi_id_c = (vec_id * lam_id) @ vec_id.conj().T
    inner = sqrt_chi @ chi_id_c @ sqrt_chi
    mu = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)).clip(0.0)
    return float(np.sum(np.sqrt(mu)) ** 2 / (lam.sum() * lam_id.sum()))


ChiSource = Union[ChannelFamily, Callable[[float], np.ndarray]]


def _chi_at(source: ChiSource, t: float) -> np.ndarray:
    if isinstance(source, ChannelFamily):
        return chi_ideal(source, t)
    return np.asarray(source(t), dtype=complex)


def markovianity_scan(source: ChiSource, s: float, t_grid: Sequence[float],
                      eps_class: float = EPS_CLASS, eps_tp: float = EPS_TP,
                      cutoff: float = PINV_CUTOFF) -> List[DivisibilityReport]:
    """Intermediate-map reports from ``s`` to each ``t`` in ``t_grid``.

    ``source`` is a channel family or any callable returning chi at a time.
    """
    f_s = transfer_from_chi(_chi_at(source, s))
    reports = []
    for t in t_grid:
        if t < s:
            raise ValueError(f"grid time {t} precedes s={s}")
        f_t = transfer_from_chi(_chi_at(source, t))
        reports.append(intermediate_report(f_t, f_s, s, t, eps_class, eps_tp, cutoff))
    return reports


def is_markovian(reports: Sequence[DivisibilityReport]) -> bool:
    return not any(r.verdict is Verdict.NOT_CP for r in reports)


def batch_intermediate_choi_eigs(f_t: np.ndarray, f_s: np.ndarray, cutoff: float = PINV_CUTOFF):
    """Choi eigenvalues of ``F_t[i] F_s[j]^+`` for every pair ``(i, j)``.

    Returns an array of shape ``(len(f_t), len(f_s), 4)`` sorted ascending
    and a boolean array flagging rank-deficient ``F_s[j]``.
    """
    f_t = np.asarray(f_t, dtype=complex)
    f_s = np.asarray(f_s, dtype=complex)
    u, sv, vh = np.linalg.svd(f_s)
    keep = sv > cutoff * sv[:, :1]
    inv_sv = np.where(keep, 1.0 / np.where(keep, sv, 1.0), 0.0)
    pinv = np.conj(np.swapaxes(vh, -1, -2)) * inv_sv[:, None, :] @ np.conj(np.swapaxes(u, -1, -2))
    im = f_t[:, None] @ pinv[None, :]
    w = choi_from_transfer(im)
    w = 0.5 * (w + np.conj(np.swapaxes(w, -1, -2)))
    return np.linalg.eigvalsh(w), ~keep.all(axis=1)
