"""qcond: finite-dimensional quantum probability and conditioning."""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .numerics import DEFAULT_TOL, eig_hermitian, random_density_matrix, random_hermitian, random_projector, random_unitary
from .qpspace import (
    PVM, Distribution, Event, Observable, State, distribution, event_complement, event_probability,
    expectation, make_pure_state, pvm_restrict, spectral_pvm,
)
from .algebra import (
    AlgebraBasis, Superoperator, choi_matrix, commutant, commutator, conditional_expectation,
    events_compatible, generated_algebra, is_completely_positive, is_qp_morphism, minimal_projections,
    observables_compatible, projection_lemma_witness, span_distance,
)
from .dynamics import HamiltonianSchedule, heisenberg, propagator
from .measurement import (
    JointDistribution, MeasurementPlan, PlanStep, interference_defect, marginal_defect, marginalize,
    marginalize_last, project_state, run_plan, sequential_probability,
)
from .bell import (
    ClassicalJoint3, bell_scan, classical_wigner_gap, quantum_wigner_gap, random_classical_sweep, spin_projector,
)
from .filtering import (
    RepeatedInteractionModel, check_non_demolition, check_self_non_demolition, chain_observables, cnot_model,
    filter_run, filter_step, global_oracle, partial_trace, simulate_record,
)
