"""Cascaded variational quantum eigensolver.

Measurement circuits depend only on the Hamiltonian, never on the ansatz
parameters, so they are simulated and sampled exactly once; all subsequent
energy and gradient evaluations replay the recorded outcomes with new phase
weights.  The package splits along that boundary:

* :mod:`cvqe.fock`, :mod:`cvqe.hamiltonian` -- occupation families, terms,
  and their measurement compilation.
* :mod:`cvqe.circuits` -- the only module that executes circuits.
* :mod:`cvqe.ansatz`, :mod:`cvqe.estimator`, :mod:`cvqe.optimizer` -- the
  classical cascade: phase maps, archive-bound estimation, descent.
* :mod:`cvqe.oracle` -- dense brute-force reference for small registers.
* :mod:`cvqe.cli`, :mod:`cvqe.plots` -- pipeline verbs, CSV and figures.
"""

from .ansatz import EXCLUDED, AnsatzSpec, bloch_singlet_hubbard, jastrow_gutzwiller, make_ansatz
from .circuits import CircuitSpec, GateOp, SampleSet
from .estimator import (
    CascadeEstimator,
    MeasurementPlan,
    SampleArchive,
    build_plan,
    load_archive,
    save_archive,
)
from .fock import AffectedPartition, SystemIndexing
from .hamiltonian import (
    Hamiltonian,
    InteractionTerm,
    compile_hamiltonian,
    hubbard_dimer,
    load_hamiltonian,
    save_hamiltonian,
    term_from_operators,
)
from .optimizer import OptimizerConfig, OptimizationTrace, gradient_descent
from .oracle import dense_hamiltonian, exact_ansatz_energy, ground_state_energy

__version__ = "0.1.0"

__all__ = [
    "EXCLUDED",
    "AnsatzSpec",
    "AffectedPartition",
    "CascadeEstimator",
    "CircuitSpec",
    "GateOp",
    "Hamiltonian",
    "InteractionTerm",
    "MeasurementPlan",
    "OptimizationTrace",
    "OptimizerConfig",
    "SampleArchive",
    "SampleSet",
    "SystemIndexing",
    "bloch_singlet_hubbard",
    "build_plan",
    "compile_hamiltonian",
    "dense_hamiltonian",
    "exact_ansatz_energy",
    "gradient_descent",
    "ground_state_energy",
    "hubbard_dimer",
    "jastrow_gutzwiller",
    "load_archive",
    "load_hamiltonian",
    "make_ansatz",
    "save_archive",
    "save_hamiltonian",
    "term_from_operators",
]
