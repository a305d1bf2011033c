"""
Conditioning needs compatibility
================================

Conditional expectations exist only for operators that commute with the
conditioning algebra. The double commutant gives back the algebra itself.
"""

import numpy as np
from qcond import commutant, conditional_expectation, generated_algebra, span_distance
from qcond.errors import IncompatibleConditioning
from qcond.numerics import SIGMA_X, SIGMA_Z, random_density_matrix

rng = np.random.default_rng(0)

# the algebra generated by a degenerate observable and its commutant
D = np.diag([0.0, 0.0, 1.0])
A = generated_algebra([D])
print("dim of generated algebra:", len(A), " dim of commutant:", len(commutant([D])))
print("double commutant distance:", span_distance(A, commutant(commutant([D]))))

# condition a block diagonal X on the algebra
X = np.zeros((3, 3))
X[:2, :2] = [[1.0, 2.0], [2.0, -1.0]]
X[2, 2] = 5.0
rho = random_density_matrix(3, rng)
print("E[X | D] =\n", np.round(conditional_expectation(rho, X, A).real, 4))

# sigma_x does not commute with the sigma_z algebra
try:
    conditional_expectation(np.eye(2) / 2, SIGMA_X, generated_algebra([SIGMA_Z]))
except IncompatibleConditioning as err:
    print("sigma_x given sigma_z:", err)
