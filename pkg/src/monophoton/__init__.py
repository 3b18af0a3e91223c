"""Exact linear-optics simulation of single-photon entanglement.

Fock states and linear optics (:mod:`~monophoton.fock`,
:mod:`~monophoton.optics`), ideal photon counting
(:mod:`~monophoton.measurement`), and the teleportation and Mach-Zehnder
Bell-test protocols built on them (:mod:`~monophoton.protocols`).
"""

from .fock import (
    FockError,
    ModeRegister,
    PureState,
    basis_state,
    fidelity,
    inner_product,
    superpose,
    tensor,
    vacuum,
)
from .measurement import (
    DetectionEvent,
    Detector,
    OutcomeDistribution,
    PostSelection,
    RandomStream,
    outcome_distribution,
    post_select,
    sample,
)
from .optics import (
    BeamSplitterParams,
    PhaseShift,
    apply_balanced_element,
    apply_beam_splitter,
    apply_phase_shifter,
)
from .protocols import (
    BellCounts,
    BellKind,
    BellOutcome,
    QubitAmplitudes,
    TeleportRecord,
    bell_correlation_form,
    bell_inequality_holds,
    classify_bell_outcome,
    generate_entangled,
    mz_probability,
    run_bell_experiment,
    summarize_teleport,
    teleport,
    teleport_batch,
    teleport_entangled,
    teleport_entangled_batch,
    verify_teleportation,
)

__version__ = "0.1.0"
