"""Quick numerical self-checks, run by ``channel-mixer verify``."""
from typing import Callable, List, Tuple

import numpy as np

from . import channels as ch
from .circuits import (INPUT_STATES, build_depol_circuit, build_flip_circuit, build_total_mm_circuit,
                       channel_from_circuit)
from .divisibility import (chi_from_transfer, choi_from_transfer, markovianity_scan,
                           process_fidelity, transfer_from_chi)
from .qmath import hermitian_eigen
from .errors import SingularEigenvalue
from .reconstruction import (chi_from_t, chi_linear_inversion, mle_chi, run_tomography,
                             states_from_counts)

Check = Tuple[str, bool, str]


def _max_dev(a, b) -> float:
    return float(max(np.abs(x - y).max() for x, y in zip(a, b)))


def check_circuits(rng) -> Check:
    worst = 0.0
    for p in rng.uniform(0, 1, 10):
        for axis, fam in (("X", 1), ("Y", 2)):
            probs = np.zeros(4)
            probs[0], probs[fam] = p, 1 - p
            ref = [ch.pauli_action(probs, s) for s in INPUT_STATES]
            worst = max(worst, _max_dev(channel_from_circuit(build_flip_circuit(p, axis)), ref))
        ref = [ch.pauli_action([p, (1 - p) / 2, (1 - p) / 2, 0], s) for s in INPUT_STATES]
        worst = max(worst, _max_dev(channel_from_circuit(build_total_mm_circuit(p)), ref))
        ref = [ch.pauli_action(ch.depolarizing_probs(p), s) for s in INPUT_STATES]
        worst = max(worst, _max_dev(channel_from_circuit(build_depol_circuit(p)), ref))
    return "circuit outputs match Pauli channels", worst < 1e-9, f"max deviation {worst:.2e}"


def check_choi_spectrum(rng) -> Check:
    worst = 0.0
    names = sorted(ch.FAMILIES)
    for _ in range(40):
        fam = ch.FAMILIES[names[rng.integers(len(names))]]
        t = float(rng.uniform(0, 3.5))
        lam = hermitian_eigen(choi_from_transfer(transfer_from_chi(ch.chi_ideal(fam, t))), False).eigenvalues
        worst = max(worst, float(np.abs(np.sort(lam) - np.sort(fam.probs(t))).max()))
    return "Choi eigenvalues equal Pauli probabilities", worst < 1e-10, f"max deviation {worst:.2e}"


def check_round_trip(rng) -> Check:
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    chi = a + a.conj().T
    err = float(np.abs(chi_from_transfer(transfer_from_chi(chi)) - chi).max())
    return "chi <-> transfer round trip", err < 1e-10, f"error {err:.2e}"


def check_physical_t(rng) -> Check:
    worst_eig, worst_tr = 0.0, 0.0
    for _ in range(200):
        chi = chi_from_t(rng.normal(size=16))
        worst_eig = min(worst_eig, float(np.linalg.eigvalsh(chi)[0]))
        worst_tr = max(worst_tr, abs(float(np.trace(chi).real) - 1))
    ok = worst_eig >= -1e-12 and worst_tr <= 1e-12
    return "T-parameterised chi is physical", ok, f"min eig {worst_eig:.1e}, trace err {worst_tr:.1e}"


def check_linear_inversion(rng) -> Check:
    worst = 0.0
    for t in rng.uniform(0, 3.5, 5):
        counts = run_tomography(build_flip_circuit(float(ch.prob_mm(t)), "X"), 8192, exact=True)
        chi = chi_linear_inversion(states_from_counts(counts))
        worst = max(worst, float(np.abs(chi - ch.chi_ideal(ch.MARKOV_X, t)).max()))
    return "linear inversion of exact counts", worst < 1e-9, f"max deviation {worst:.2e}"


def check_mle_exact(rng) -> Check:
    t = float(rng.uniform(0.2, 3.0))
    counts = run_tomography(build_total_mm_circuit(float(ch.prob_mm(t))), 8192, exact=True)
    fid = process_fidelity(mle_chi(counts).chi, ch.chi_ideal(ch.MIXED_MM, t))
    return "MLE on exact counts", fid >= 0.999, f"fidelity {fid:.6f} at t={t:.3f}"


def check_rate_equivalence(rng) -> Check:
    grid = np.round(np.arange(1, 38) * 0.1, 10)
    bad = []
    for name, fam in ch.FAMILIES.items():
        rates_ok = True
        for t in grid:
            try:
                rates_ok &= bool(min(ch.decay_rates(fam, float(t))) >= -1e-6)
            except SingularEigenvalue:
                continue
        # adjacent steps localise the sign of the generator
        local = all(r.verdict.value != "NotCP"
                    for a, b in zip(grid[:-1], grid[1:])
                    for r in markovianity_scan(fam, float(a), [float(b)]) if not r.singular)
        if rates_ok != local:
            bad.append(name)
    return "decay-rate sign test agrees with divisibility", not bad, ", ".join(bad) or "all families"


CHECKS: List[Callable] = [check_circuits, check_choi_spectrum, check_round_trip, check_physical_t,
                          check_linear_inversion, check_mle_exact, check_rate_equivalence]


def run_checks(seed: int = 0) -> List[Check]:
    rng = np.random.default_rng(seed)
    return [fn(rng) for fn in CHECKS]
