"""Finite-dimensional engine for consistent histories.

Properties are subspaces (:mod:`cqt.lattice`), single-time frameworks and the
Born rule live in :mod:`cqt.static`, families of histories and the
decoherence functional in :mod:`cqt.histories`, independent checks in
:mod:`cqt.oracles`.
"""

__version__ = "0.1.0"

from .errors import (
    CapExceeded,
    CQTError,
    DimensionMismatch,
    EntangledState,
    InconsistentFamily,
    InvalidSampleSpace,
    InvalidState,
    NotHermitian,
    ZeroProbabilityPrehistory,
)
from .histories import (
    DecoherenceReport,
    DynamicEvent,
    Family,
    Verdict,
    born_probability,
    chain_operator,
    classify,
    conditional_measure,
    decoherence_functional,
    event_probability,
    heisenberg_projector,
    is_homogeneous,
    verify_recursion,
)
from .lattice import Subspace, check_ortholattice_axioms, is_compatible, q_join, q_meet, q_not
from .static import (
    FrameworkStatic,
    SampleSpace,
    StateDensity,
    lattice_measure,
    noncontextuality_check,
    probability_function,
    pure_truth_values,
    validate_sample_space,
)
