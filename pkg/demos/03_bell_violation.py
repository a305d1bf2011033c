"""
Wigner's inequality
===================

For classical events Pr{A,C} <= Pr{A, not B} + Pr{B,C}. Spin measurements
made one after the other on a qubit break it.
"""

import numpy as np
from qcond import Event, bell_scan, make_pure_state, quantum_wigner_gap, random_classical_sweep, spin_projector

# classical joints never violate
print("largest classical gap over 10^5 random joints:", random_classical_sweep(100_000, seed=1))

# three nearby spin directions on |0>
up = make_pure_state([1, 0])
a, b, c = 0.0, 0.3, 0.1
gap = quantum_wigner_gap(up, *(Event(spin_projector(t)) for t in (a, b, c)))
closed = np.cos(c / 2) ** 2 - np.sin(b / 2) ** 2 - np.cos(b / 2) ** 2 * np.cos((c - b) / 2) ** 2
print(f"gap at {(a, b, c)}: {gap:.6f} (closed form {closed:.6f})")

# grid search for the largest violation
res = bell_scan(up, 32)
print("best gap on a 32^3 grid:", round(res.best_gap, 4), "at angles", np.round(res.angles, 4))
