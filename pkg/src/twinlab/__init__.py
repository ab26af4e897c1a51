"""Numerical verification of simultaneous and delayed twin events and observables
in finite-dimensional quantum mechanics."""

from ._version import __version__
from .checks import CheckRecord, Report, run_check_file, run_scenario
from .delayed import (
    BiconditionalReport,
    DelayedPair,
    NonselectiveComparison,
    Proposition1Report,
    chain,
    compare_nonselective,
    is_delayed_twin,
    is_delayed_twin_observables,
    pairs_equivalent,
    trivial_delayed_twin,
    verify_proposition1,
    verify_proposition2,
    verify_theorem4,
    verify_theorem5,
    verify_theorem6,
)
from .errors import DimensionError, PreconditionError, TheoremViolation, TwinlabError, ValidationError
from .events import (
    ClassStructure,
    TwinClassDescriptor,
    certainty_residual,
    class_structure,
    in_class,
    is_certain,
    is_twin,
    minimal_twin,
    sample_twin,
    twin_class,
    verify_theorem1,
    verify_theorem2,
)
from .hilbert import (
    DiscreteObservable,
    EventProjector,
    MixedState,
    StateVector,
    UnitaryEvolution,
    coherent_decompose,
    density_matrix,
    luders_collapse,
    partial_trace,
    schmidt_decompose,
    spectral_decompose,
    states_equal,
    tensor,
)
from .measurement import (
    MeasurementScheme,
    MeasurementVerdict,
    build_demolition_premeasurement,
    build_nondemolition_premeasurement,
    check_branch_relation,
    check_calibration,
    check_nondemolition,
    check_probability_reproducibility,
    measured_pointer_delayed_twins,
)
from .observables import (
    EigenMatching,
    MatchedPair,
    is_twin_observables,
    match_branches,
    match_eigenprojectors,
    sample_twin_observable,
    verify_corollary1,
)
from .sampling import haar_unitary, random_observable, random_projector, random_state
from .scenario_file import ScenarioFile, ScenarioFileError, load, loads
from .scenarios import (
    Scenario,
    get_scenario,
    run_demo,
    scully_coincidences,
    scully_scenario,
    singlet_scenario,
    stern_gerlach_scenario,
)
from .sweeps import SweepReport, run_sweep
from .tolerances import DEFAULT as DEFAULT_TOLERANCES
from .tolerances import Tolerances
from .verdict import Condition, TwinVerdict
