"""Consistent-histories engine on finite labeled Hilbert spaces.

Evolves states through compiled unitary steps, evaluates the decoherence
functional of history families, certifies consistency, assigns branch and
conditional probabilities, and decides whether two families can be
combined into a single description.
"""

__version__ = "0.1.0"

from .analysis import AnalysisOptions, analyze
from .compatibility import (
    CompatibilityVerdict,
    check_compatibility,
    common_refinement,
    spin_half_conjunction_check,
)
from .dynamics import (
    ABSORBED,
    Detector,
    PartialUnitarySpec,
    Rule,
    SpaceScheme,
    UnitaryStep,
    beamsplitter_spec,
    compile_step,
    detection_spec,
    detector_spec,
    lift_over_detectors,
)
from .errors import QHistError
from .hilbert import (
    BasisLabel,
    HilbertSpace,
    Operator,
    Projector,
    StateVector,
    apply,
    basis_state,
    commutator_norm,
    inner_product,
    make_space,
    product_space,
    projector_from_vectors,
    superpose,
)
from .histories import (
    Branch,
    ConsistencyVerdict,
    DecoherenceMatrix,
    HistoryFamily,
    SampleSpace,
    branch_probabilities,
    chain_vector,
    check_consistency,
    complete_sample_space,
    conditional_probability,
    decoherence_functional,
    event_probability,
)
from .scenarios import (
    Scenario,
    build_builtin,
    build_fig1a,
    build_fig1b,
    build_spin_half,
    builtin_names,
    compile_document,
    serialize_scenario,
)
from .schemas import (
    AnalysisReport,
    ScenarioDocument,
    emit_document,
    emit_report,
    parse_document,
    parse_report,
)
