"""Single-photon entanglement, teleportation and the Mach-Zehnder Bell test.

Mode names follow the optical layout:

* source: a photon in ``I`` (vacuum in ``J``) hits the balanced element and
  leaves in ``A`` (to Alice) and ``B`` (to Bob);
* the qubit to teleport lives in ``C``; Alice combines ``A`` and ``C`` on a
  second balanced element whose outputs are read by detectors ``E`` and ``F``;
* for entangled-state teleportation the target is shared between ``C`` and
  ``D``; the check combines ``B`` and ``D`` and reads detectors ``G``, ``H``;
* the interferometer recombines ``A`` and ``B`` onto detectors ``C``, ``D``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import MASK64
from .fock import (
    DEFAULT_CUTOFF,
    FockError,
    ModeRegister,
    PureState,
    basis_state,
    fidelity,
    tensor,
    to_records,
)
from .measurement import (
    IDEAL,
    DetectionEvent,
    Detector,
    MeasurementError,
    OutcomeDistribution,
    RandomStream,
    outcome_distribution,
    post_select,
    sample_indices,
)
from .optics import (
    HALF_PI,
    BeamSplitterParams,
    apply_balanced_element,
    apply_beam_splitter,
    apply_phase_shifter,
)

SQRT_HALF = 1 / math.sqrt(2)
BELL_MODES = ("E", "F")
MZ_CONFIGS = ("alice", "bob", "both")


class ProtocolError(ValueError):
    pass


# ---------------------------------------------------------------- qubits


@dataclass(frozen=True)
class QubitAmplitudes:
    """Single-rail qubit ``a|1> + b|0>``."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        norm2 = abs(a) ** 2 + abs(b) ** 2
        if abs(norm2 - 1.0) > 1e-9:
            raise ProtocolError(f"|a|^2 + |b|^2 = {norm2!r}; use QubitAmplitudes.normalized")

    @classmethod
    def normalized(cls, a: complex, b: complex) -> "QubitAmplitudes":
        n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if n == 0:
            raise ProtocolError("a and b are both zero")
        return cls(a / n, b / n)

    def state(self, mode: str, cutoff: int = DEFAULT_CUTOFF) -> PureState:
        return PureState.from_amplitudes(ModeRegister([mode], cutoff), {(1,): self.a, (0,): self.b})


def shared_photon_state(params: BeamSplitterParams, modes: tuple[str, str] = ("C", "D")) -> PureState:
    """``t|1,0> + r|0,1>`` on ``modes``, as the target of entangled teleportation."""
    reg = ModeRegister(modes)
    return PureState.from_amplitudes(reg, {(1, 0): params.t, (0, 1): params.r})


# ---------------------------------------------------------------- source


def generate_entangled() -> PureState:
    """One photon through the balanced element: ``(|1,0> + |0,1>)/sqrt(2)`` on (A, B)."""
    state = basis_state(ModeRegister(("I", "J")), (1, 0))
    state = apply_balanced_element(state, "I", "J")
    return state.relabel({"I": "A", "J": "B"})


def bell_state(kind: str, modes: tuple[str, str] = ("A", "C")) -> PureState:
    """``psi+``, ``psi-``, ``phi+`` or ``phi-`` on ``modes``.

    ``psi(+/-) = (|0,1> +/- |1,0>)/sqrt(2)``, ``phi(+/-) = (|1,1> +/- |0,0>)/sqrt(2)``.
    """
    sign = {"+": 1.0, "-": -1.0}[kind[-1]]
    if kind[:-1] == "psi":
        amps = {(0, 1): SQRT_HALF, (1, 0): sign * SQRT_HALF}
    elif kind[:-1] == "phi":
        amps = {(1, 1): SQRT_HALF, (0, 0): sign * SQRT_HALF}
    else:
        raise ProtocolError(f"unknown Bell state {kind!r}")
    return PureState.from_amplitudes(ModeRegister(modes), amps)


# ---------------------------------------------------------------- Bell analysis


class BellKind(enum.Enum):
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"
    FAILURE = "Failure"

    @property
    def success(self) -> bool:
        return self is not BellKind.FAILURE


@dataclass(frozen=True)
class BellOutcome:
    kind: BellKind
    event: DetectionEvent

    def to_dict(self) -> dict:
        cached = self.__dict__.get("_dict")
        if cached is None:
            cached = {"kind": self.kind.value, "event": self.event.as_dict()}
            object.__setattr__(self, "_dict", cached)
        return cached


def classify_bell_outcome(event: DetectionEvent) -> BellOutcome:
    """Map an (E, F) reading to the Bell state it heralds.

    One photon in F only means psi+, one in E only means psi-; two photons
    or none cannot be told apart from the phi states and count as failure.
    """
    if event.modes != BELL_MODES:
        raise ProtocolError(f"Bell analysis reads modes {BELL_MODES}, got {event.modes}")
    if event.total > 2:
        raise ProtocolError(f"at most two photons reach Alice's detectors, got {event}")
    counts = (event["E"], event["F"])
    if counts == (0, 1):
        kind = BellKind.PSI_PLUS
    elif counts == (1, 0):
        kind = BellKind.PSI_MINUS
    else:
        kind = BellKind.FAILURE
    return BellOutcome(kind, event)


def alice_output(state: PureState) -> PureState:
    """Combine A and C on the balanced element; outputs become E and F."""
    return apply_balanced_element(state, "A", "C").relabel({"A": "E", "C": "F"})


@dataclass(frozen=True)
class TeleportRecord:
    outcome: BellOutcome
    correction_applied: bool
    bob_state: PureState | None
    fidelity_to_target: float | None
    trial_seed: int
    # post-measurement state kept even on failure, for debugging only
    _post_measurement: PureState | None = field(default=None, repr=False, compare=False)

    @property
    def success(self) -> bool:
        return self.outcome.kind.success

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.to_dict(),
            "correction_applied": self.correction_applied,
            "bob_state": None if self.bob_state is None else to_records(self.bob_state),
            "fidelity_to_target": self.fidelity_to_target,
            "trial_seed": self.trial_seed,
        }


def _finish(
    outcome: BellOutcome, conditional: PureState | None, target: PureState, trial_seed: int
) -> TeleportRecord:
    if not outcome.kind.success or conditional is None:
        return TeleportRecord(outcome, False, None, None, trial_seed, conditional)
    corrected = outcome.kind is BellKind.PSI_MINUS
    bob = apply_phase_shifter(conditional, "B", math.pi) if corrected else conditional
    bob = bob.reorder(target.labels)
    return TeleportRecord(outcome, corrected, bob, fidelity(bob, target), trial_seed, conditional)


def teleport_input_state(target: QubitAmplitudes) -> PureState:
    """Source pair on (A, B) times the qubit on C."""
    return tensor(generate_entangled(), target.state("C"))


def entangled_input_state(params: BeamSplitterParams) -> PureState:
    """Source pair on (A, B) times the shared photon on (C, D)."""
    return tensor(generate_entangled(), prepare_shared_photon(params))


def prepare_shared_photon(params: BeamSplitterParams) -> PureState:
    """Send one photon into port D of a ``(t, r)`` beam splitter.

    The transmitted wave leaves in C and the reflected wave in D. A -pi/2
    shifter on D cancels the reflection phase, so the result is exactly
    ``t|1>_C|0>_D + r|0>_C|1>_D``.
    """
    state = basis_state(ModeRegister(("C", "D")), (0, 1))
    state = apply_beam_splitter(state, "D", "C", params)
    return apply_phase_shifter(state, "D", -HALF_PI)


def _run_teleport(
    prepared: PureState, target: PureState, stream: RandomStream, detector: Detector
) -> TeleportRecord:
    seed = stream.seed
    event, conditional = detector.sample(alice_output(prepared), BELL_MODES, stream)
    return _finish(classify_bell_outcome(event), conditional, target, seed)


def teleport(
    target: QubitAmplitudes, stream: RandomStream, detector: Detector = IDEAL
) -> TeleportRecord:
    """One teleportation trial of ``a|1> + b|0>`` from C to B."""
    return _run_teleport(teleport_input_state(target), target.state("B"), stream, detector)


def teleport_entangled(
    params: BeamSplitterParams, stream: RandomStream, detector: Detector = IDEAL
) -> TeleportRecord:
    """Teleport the C half of ``t|1,0> + r|0,1>`` on (C, D); Bob ends up sharing it with D."""
    target = shared_photon_state(params, ("B", "D"))
    return _run_teleport(entangled_input_state(params), target, stream, detector)


def bell_sector_distribution(prepared: PureState) -> OutcomeDistribution:
    """Exact distribution of Alice's (E, F) reading for an input on A, B, C(, D)."""
    return outcome_distribution(alice_output(prepared), BELL_MODES)


def _batch(prepared: PureState, target: PureState, n_trials: int, seed: int) -> list[TeleportRecord]:
    if n_trials < 1:
        raise ProtocolError(f"n_trials must be >= 1, got {n_trials}")
    after = alice_output(prepared)
    dist = outcome_distribution(after, BELL_MODES)
    templates = []
    for event in dist.events:
        templates.append(
            _finish(classify_bell_outcome(event), post_select(after, event).conditional, target, 0)
        )
    idx = sample_indices(dist, seed, 0, n_trials)
    base = seed & MASK64
    out = []
    for i, k in enumerate(idx.tolist()):
        t = templates[k]
        out.append(
            TeleportRecord(
                t.outcome, t.correction_applied, t.bob_state, t.fidelity_to_target,
                (base + i) & MASK64, t._post_measurement,
            )
        )
    return out


def teleport_batch(target: QubitAmplitudes, n_trials: int, seed: int) -> list[TeleportRecord]:
    """``n_trials`` ideal-detector trials; record ``i`` equals ``teleport(target, RandomStream(seed + i))``."""
    return _batch(teleport_input_state(target), target.state("B"), n_trials, seed)


def teleport_entangled_batch(
    params: BeamSplitterParams, n_trials: int, seed: int
) -> list[TeleportRecord]:
    return _batch(entangled_input_state(params), shared_photon_state(params, ("B", "D")), n_trials, seed)


def verify_teleportation(joint_state: PureState, params: BeamSplitterParams) -> float:
    """Probability that the check station reports G:1, H:0.

    Bob's B and the partner D go through the ``(t, r)`` preparation optics in
    reverse. A faithful ``t|1>_B|0>_D + r|0>_B|1>_D`` returns its photon to
    the port it was injected from, which is read by detector G.
    """
    if set(joint_state.labels) != {"B", "D"}:
        raise FockError(f"verification needs a state on modes B and D, got {joint_state.labels}")
    state = joint_state.reorder(("B", "D"))
    state = apply_phase_shifter(state, "D", HALF_PI)
    state = apply_beam_splitter(state, "D", "B", params, reverse=True)
    state = state.relabel({"D": "G", "B": "H"})
    try:
        dist = outcome_distribution(state, ("G", "H"))
    except MeasurementError:
        return 0.0
    return dist.probability(DetectionEvent.of(G=1, H=0))


@dataclass(frozen=True)
class TeleportSummary:
    n_trials: int
    n_success: int
    sectors: dict[str, int]
    mean_success_fidelity: float | None

    @property
    def success_fraction(self) -> float:
        return self.n_success / self.n_trials

    def to_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "n_success": self.n_success,
            "success_fraction": self.success_fraction,
            "sectors": dict(self.sectors),
            "mean_success_fidelity": self.mean_success_fidelity,
        }


def summarize_teleport(records: list[TeleportRecord]) -> TeleportSummary:
    """Success count, (E, F) histogram keyed ``"E:x,F:y"`` and mean success fidelity."""
    sectors: dict[str, int] = {}
    fids = []
    for rec in records:
        key = str(rec.outcome.event)
        sectors[key] = sectors.get(key, 0) + 1
        if rec.fidelity_to_target is not None:
            fids.append(rec.fidelity_to_target)
    mean = float(np.mean(fids)) if fids else None
    return TeleportSummary(len(records), len(fids), dict(sorted(sectors.items())), mean)


# ---------------------------------------------------------------- interferometer


def mz_output_state(phi_a: float, phi_b: float) -> PureState:
    """Interferometer output on (C, D) with Alice's +phi_a on A and Bob's -phi_b on B.

    With both phases zero the photon leaves in C with certainty.
    """
    state = generate_entangled()
    state = apply_phase_shifter(state, "A", phi_a)
    state = apply_phase_shifter(state, "B", -phi_b)
    state = apply_balanced_element(state, "A", "B")
    return state.relabel({"A": "D", "B": "C"}).reorder(("C", "D"))


def mz_probability(phi_a: float, phi_b: float) -> float:
    """Analytic D-click probability ``sin^2((phi_a + phi_b)/2)``."""
    return math.sin((phi_a + phi_b) / 2) ** 2


def mz_simulated_probability(phi_a: float, phi_b: float) -> float:
    dist = outcome_distribution(mz_output_state(phi_a, phi_b), ("C", "D"))
    return dist.probability(DetectionEvent.of(C=0, D=1))


def config_phases(config: str, phi_a: float, phi_b: float) -> tuple[float, float]:
    """Shifter settings for ``alice`` only, ``bob`` only, or ``both``."""
    if config == "alice":
        return phi_a, 0.0
    if config == "bob":
        return 0.0, phi_b
    if config == "both":
        return phi_a, phi_b
    raise ProtocolError(f"unknown configuration {config!r}")


@dataclass(frozen=True)
class DetectorCounts:
    n_dc: int
    n_dd: int

    def to_dict(self) -> dict:
        return {"n_dc": self.n_dc, "n_dd": self.n_dd}


@dataclass(frozen=True)
class BellCounts:
    phi_a: float
    phi_b: float
    n_trials: int
    counts: dict[str, DetectorCounts]

    @property
    def n_a(self) -> int:
        return self.counts["alice"].n_dd

    @property
    def n_b(self) -> int:
        return self.counts["bob"].n_dd

    @property
    def n_ab(self) -> int:
        return self.counts["both"].n_dd

    @property
    def margin(self) -> float:
        """``(N_A + N_B - N_AB) / N``; negative means the inequality is violated."""
        return (self.n_a + self.n_b - self.n_ab) / self.n_trials

    def check(self) -> None:
        for name, c in self.counts.items():
            if c.n_dc + c.n_dd != self.n_trials or min(c.n_dc, c.n_dd) < 0:
                raise ProtocolError(f"{name}: {c} does not add up to {self.n_trials} trials")

    def to_dict(self) -> dict:
        return {
            "phi_a": self.phi_a,
            "phi_b": self.phi_b,
            "n_trials": self.n_trials,
            "counts": {k: self.counts[k].to_dict() for k in MZ_CONFIGS},
            "n_a": self.n_a,
            "n_b": self.n_b,
            "n_ab": self.n_ab,
            "margin": self.margin,
        }


def run_bell_experiment(
    phi_a: float, phi_b: float, n_trials: int, stream: RandomStream
) -> BellCounts:
    """Send ``n_trials`` photons through each shifter configuration and count D clicks.

    Trial ``i`` of configuration ``c`` (0 alice, 1 bob, 2 both) uses the
    substream ``stream.seed + c * n_trials + i``; ``stream`` itself is not advanced.
    """
    if n_trials < 1:
        raise ProtocolError(f"n_trials must be >= 1, got {n_trials}")
    counts = {}
    for c, name in enumerate(MZ_CONFIGS):
        dist = outcome_distribution(mz_output_state(*config_phases(name, phi_a, phi_b)), ("C", "D"))
        idx = sample_indices(dist, stream.seed, c * n_trials, n_trials)
        per_event = np.bincount(idx, minlength=len(dist))
        n_dd = int(sum(n for e, n in zip(dist.events, per_event) if e["D"] == 1))
        n_dc = int(sum(n for e, n in zip(dist.events, per_event) if e["C"] == 1))
        counts[name] = DetectorCounts(n_dc, n_dd)
    result = BellCounts(float(phi_a), float(phi_b), int(n_trials), counts)
    result.check()
    return result


def bell_inequality_holds(counts: BellCounts) -> bool:
    """``N_AB <= N_A + N_B``."""
    return counts.n_ab <= counts.n_a + counts.n_b


def analytic_margin(phi_a: float, phi_b: float) -> float:
    """``sin^2(phi_a/2) + sin^2(phi_b/2) - sin^2((phi_a+phi_b)/2)``."""
    return mz_probability(phi_a, 0.0) + mz_probability(0.0, phi_b) - mz_probability(phi_a, phi_b)


BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationForm:
    p_ac: float
    p_bc: float
    p_ab: float
    satisfied: bool

    @property
    def slack(self) -> float:
        """``1 + P(b,c) - |P(a,b) - P(a,c)|``."""
        return 1 + self.p_bc - abs(self.p_ab - self.p_ac)


def bell_correlation_form(phi_a: float, phi_b: float) -> CorrelationForm:
    """Spin-correlation version with ``P = -cos`` of the corresponding phase.

    Slack within ``BOUNDARY_TOL`` of zero counts as satisfied, so points that
    sit exactly on the boundary (all of ``phi_a = pi``, for one) do not flip
    verdict on rounding.
    """
    p_ac = -math.cos(phi_a)
    p_bc = -math.cos(phi_b)
    p_ab = -math.cos(phi_a + phi_b)
    return CorrelationForm(p_ac, p_bc, p_ab, 1 + p_bc - abs(p_ab - p_ac) >= -BOUNDARY_TOL)
