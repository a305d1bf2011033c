"""
Measurement order matters
=========================

Measure sigma_z and then sigma_x on |0>, and the other way round.
"""

import numpy as np
from qcond import MeasurementPlan, Observable, PlanStep, make_pure_state, run_plan, sequential_probability
from qcond.numerics import SIGMA_X, SIGMA_Z

up = make_pure_state([1, 0])
Pz = np.diag([1.0, 0.0])            # spin up along z
Px = np.full((2, 2), 0.5)           # spin up along x

# z first, then x: 1 * 1/2
print("Pr{z=+ ; x=+} =", round(sequential_probability(up, [Pz, Px]), 12))
# x first, then z: 1/2 * 1/2
print("Pr{x=+ ; z=+} =", round(sequential_probability(up, [Px, Pz]), 12))

# the full table for z then x
plan = MeasurementPlan((PlanStep(1.0, Observable(SIGMA_Z, "Z")), PlanStep(2.0, Observable(SIGMA_X, "X"))))
joint = run_plan(up, plan)
for record, p in joint.records():
    print(record, round(p, 12))

# summing out the last step is fine, summing out the first is not
from qcond.measurement import plan_marginal_defect
flipped = MeasurementPlan((PlanStep(1.0, Observable(SIGMA_X)), PlanStep(2.0, Observable(SIGMA_Z))))
print("defect when dropping the last step :", plan_marginal_defect(up, flipped, 1))
print("defect when dropping the first step:", plan_marginal_defect(up, flipped, 0))
