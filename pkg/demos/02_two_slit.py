"""
Two slits
=========

A particle in (|1> + |2>)/sqrt(2) passes slit 1 or slit 2 and is then
detected in the same superposition. Adding the two slit probabilities
does not give the probability with both slits open.
"""

import numpy as np
from qcond import interference_defect, make_pure_state, sequential_probability

e = np.eye(3)
psi = (e[1] + e[2]) / np.sqrt(2)
slits = [np.outer(e[1], e[1]), np.outer(e[2], e[2])]
screen = np.outer(psi, psi)
state = make_pure_state(psi)

both_open = sequential_probability(state, [slits[0] + slits[1], screen])
one_at_a_time = sum(sequential_probability(state, [s, screen]) for s in slits)
print("both slits open   :", round(both_open, 12))
print("sum of single slit:", round(one_at_a_time, 12))
print("interference      :", round(interference_defect(state, slits, screen), 12))
