"""
Ancilla circuits, process tomography and maximum likelihood
===========================================================

Each channel is run as a small circuit with ancillas that are traced out.
Shot counts for the four tomography inputs are turned into a chi matrix,
first by linear inversion and then by a maximum-likelihood fit.
"""
import numpy as np

import channel_mixer.channels as ch
from channel_mixer import (build_total_mm_circuit, chi_linear_inversion, mle_chi,
                           process_fidelity, run_tomography)
from channel_mixer.circuits import channel_from_circuit
from channel_mixer.reconstruction import states_from_counts

np.set_printoptions(precision=4, suppress=True)

t = 1.0
p = ch.prob_mm(t)
circuit = build_total_mm_circuit(p)
for g in circuit.gates:
    print(g)

# The circuit reproduces the analytic channel exactly
outs = channel_from_circuit(circuit)
probs = ch.MIXED_MM.probs(t)
print("\nimage of |0><0|:\n", outs[0].real)
print("expected:\n", ch.apply_pauli(probs, np.diag([1, 0])).real)

# 8192 shots per measurement setting
counts = run_tomography(circuit, shots=8192, seed=11)
print("\ncounts:", counts.n.astype(int))

chi_p = chi_linear_inversion(states_from_counts(counts))
print("linear inversion eigenvalues:", np.linalg.eigvalsh(chi_p))   # can dip below zero

fit = mle_chi(counts)
print("MLE eigenvalues:            ", np.linalg.eigvalsh(fit.chi))
print(f"objective {fit.initial_objective:.2f} -> {fit.objective:.2f} in {fit.n_iter} iterations")

ideal = ch.chi_ideal(ch.MIXED_MM, t)
print(f"process fidelity: {process_fidelity(fit.chi, ideal):.4f}")

# with expected instead of sampled counts the fit is exact
exact = mle_chi(run_tomography(circuit, 8192, exact=True))
print(f"exact-count fidelity: {process_fidelity(exact.chi, ideal):.6f}")
