"""
A discrete quantum filter
=========================

A system qubit controls a CNOT onto a fresh probe at every step and the
probe is read in sigma_z. The filter tracks sigma_z of the system; the
full-chain calculation gives the same numbers.
"""

import numpy as np
from qcond import check_non_demolition, cnot_model, filter_run, global_oracle, make_pure_state, simulate_record
from qcond.numerics import SIGMA_X

model = cnot_model()
plus = make_pure_state(np.array([1, 1]) / np.sqrt(2))

record, _ = simulate_record(model, plus, 4, seed=7)
traj, estimates = filter_run(model, plus, record)
print("record   :", record)
print("estimates:", np.round(estimates, 6))
print("Pr{record} filter:", traj[-1].record_prob)

oracle = global_oracle(model, plus, 4)
print("Pr{record} chain :", oracle.prob(record))

# sigma_x now commutes with the record, sigma_x at time 0 does not
print("[X_1, Y_1] now   :", check_non_demolition(cnot_model(SIGMA_X), 1).max_residual)
print("[X_0, Y_1] past  :", check_non_demolition(cnot_model(SIGMA_X), 1, at=0).max_residual)
