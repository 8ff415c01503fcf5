"""Exact simulator and local-realism verifier for the three-photon
GHZ post-selection experiment.

The package derives the heralded three-photon state symbolically from the
two-pair down-conversion emission through the optical circuit, classifies
right and wrong detection events, computes exact outcome statistics, and
proves by exact-rational linear programming and exhaustive strategy
enumeration that no local-hidden-variable model reproduces the full event
pattern above 50% fringe visibility.
"""

from .fock import (
    Amplitude,
    Beam,
    GhzsimError,
    Mode,
    Polarization,
    StatePolynomial,
    amplitude,
    creation,
    equal_up_to_phase,
    filter_terms,
    multiply,
    norm_squared,
    render_polynomial,
    substitute,
)
from .circuit import (
    ModeTransform,
    OpticalCircuit,
    beamsplitter_5050,
    half_wave_plate_22_5,
    innsbruck_circuit,
    polarizing_beamsplitter,
)
from .measurement import (
    AnalyzerSetting,
    OutcomeTable,
    SettingTriple,
    Station,
    add_noise,
    all_setting_triples,
    analyzer_transform,
    correlation,
    outcome_distribution,
)
from .events import (
    EventClass,
    EventKind,
    SampledEvent,
    classify_pattern,
    filter_loss_demo,
    pairing_report,
    sample_events,
    single_pair_emission,
    trigger_select,
    two_pair_emission,
)
from .lhv import (
    FeasibilityProblem,
    LocalStrategy,
    chi,
    critical_visibility,
    ghz_paradox_check,
    lemma_check,
    lhv_feasibility,
    quantum_targets,
    sigma,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
