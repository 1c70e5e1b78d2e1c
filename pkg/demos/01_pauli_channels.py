"""
Pauli channels, convex mixtures and decay rates
================================================

Two Markovian flip channels are mixed, and the mixture picks up a negative
decay rate. Two non-Markovian channels are mixed, and the negative rates cancel.
"""
import numpy as np

import channel_mixer.channels as ch

# A Pauli channel is a probability vector over (I, X, Y, Z).
rho = np.array([[1, 0], [0, 0]], dtype=complex)
print("bit flip of |0><0|:\n", ch.apply_pauli([0.25, 0.75, 0, 0], rho).real)

# X-flip and Y-flip channels decay at a constant rate 1/2 on their own axis
for fam in (ch.MARKOV_X, ch.MARKOV_Y):
    print(fam.name, "rates at t=1:", np.round(ch.decay_rates(fam, 1.0), 6))

# their even mixture has a third rate -tanh(t/2)/4 < 0 for every t > 0
ts = np.linspace(0, 3.8, 5)
print("\n t    gamma_3 of the even X/Y mixture")
for t in ts:
    print(f"{t:4.2f}  {ch.decay_rates(ch.MIXED_MM, t)[2]: .6f}")

# Two channels whose rates dip below zero...
for fam in (ch.NM_X1, ch.NM_X2):
    rates = [ch.decay_rates(fam, t)[0] for t in np.arange(0.05, 3.7, 0.1)
             if abs(np.cos(2 * t)) > 1e-6]
    print(f"{fam.name}: min gamma_1 on the grid = {min(rates):.3f}")

# ...mix with weight 2/3 into the plain X flip
t = np.linspace(0, 3.7, 200)
diff = max(np.abs(ch.MIXED_NM_REPLICA.probs(x) - ch.MARKOV_X.probs(x)).max() for x in t)
print("max |mixture - X flip| =", diff)

# The designed depolarizing pair: q and r are non-monotone, their average is not
d = ch.design_functions(np.linspace(0, 8.8, 9))
print("\n t     q       r       w")
for row in zip(np.linspace(0, 8.8, 9), d.q, d.r, d.w):
    print("{:4.1f}  {:.4f}  {:.4f}  {:.4f}".format(*row))
