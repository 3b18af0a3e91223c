"""Ideal photon-number-resolving detection.

Exact outcome distributions, post-selection on a detector reading, and seeded
sampling with state collapse. Events over a mode set are ordered
lexicographically by their count vectors, with the modes taken in sorted
label order; sampling walks that order by inverse CDF.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fock import FockError, ModeRegister, Occupation, PureState

PROB_FLOOR = -1e-15


class MeasurementError(FockError):
    pass


@dataclass(frozen=True, order=True)
class DetectionEvent:
    """Photon counts on a set of modes, stored in sorted label order."""

    modes: tuple[str, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.modes) != len(self.counts):
            raise MeasurementError(f"{len(self.modes)} modes but {len(self.counts)} counts")
        if list(self.modes) != sorted(self.modes) or len(set(self.modes)) != len(self.modes):
            raise MeasurementError(f"event modes must be distinct and sorted, got {self.modes}")
        if any(int(c) != c or c < 0 for c in self.counts):
            raise MeasurementError(f"counts must be non-negative integers, got {self.counts}")

    @classmethod
    def of(cls, counts: Mapping[str, int] | None = None, **kw: int) -> "DetectionEvent":
        """``DetectionEvent.of(E=0, F=1)`` or ``DetectionEvent.of({"E": 0, "F": 1})``."""
        merged = dict(counts or {}, **kw)
        modes = tuple(sorted(merged))
        return cls(modes, tuple(int(merged[m]) for m in modes))

    def __getitem__(self, mode: str) -> int:
        try:
            return self.counts[self.modes.index(mode)]
        except ValueError:
            raise KeyError(mode) from None

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.modes, self.counts))

    def __str__(self) -> str:
        return ",".join(f"{m}:{c}" for m, c in zip(self.modes, self.counts))


@dataclass(frozen=True)
class OutcomeDistribution:
    events: tuple[DetectionEvent, ...]
    probabilities: np.ndarray

    def __len__(self) -> int:
        return len(self.events)

    def probability(self, event: DetectionEvent) -> float:
        try:
            return float(self.probabilities[self.events.index(event)])
        except ValueError:
            return 0.0

    def as_dict(self) -> dict[DetectionEvent, float]:
        return {e: float(p) for e, p in zip(self.events, self.probabilities)}

    def by_counts(self) -> dict[tuple[int, ...], float]:
        return {e.counts: float(p) for e, p in zip(self.events, self.probabilities)}

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probabilities)

    def last_possible(self) -> int:
        """Index of the last event with non-zero probability."""
        return int(np.flatnonzero(self.probabilities > 0)[-1])


@dataclass(frozen=True)
class PostSelection:
    """Born weight of an event and the renormalized state left behind.

    ``conditional`` is ``None`` when the event is impossible.
    """

    probability: float
    conditional: PureState | None

    @property
    def possible(self) -> bool:
        return self.conditional is not None


class RandomStream:
    """Counter-based SplitMix64 stream with an explicit 64-bit seed.

    Draw ``k`` is ``mix(seed + (k + 1) * GAMMA)``, so ``RandomStream(seed + i)``
    is exactly the stream the batched kernels use for trial ``i``.
    Not thread-safe; give each worker its own stream.
    """

    def __init__(self, seed: int):
        if isinstance(seed, bool) or int(seed) != seed:
            raise TypeError(f"seed must be an integer, got {seed!r}")
        self.seed = int(seed) & _kernels.MASK64
        self.counter = 0

    def next_uint64(self) -> int:
        self.counter += 1
        return _kernels.mix64(self.seed + self.counter * _kernels.GAMMA)

    def uniform(self) -> float:
        """Double in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * _kernels.UNIT

    def substream(self, index: int) -> "RandomStream":
        return RandomStream(self.seed + index)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, counter={self.counter})"


def _mode_indices(register: ModeRegister, modes: Iterable[str]) -> tuple[tuple[str, ...], list[int]]:
    labels = tuple(sorted(set(modes)))
    if not labels:
        raise MeasurementError("no modes to measure")
    unknown = [m for m in labels if m not in register.labels]
    if unknown:
        raise MeasurementError(f"unknown modes {unknown}; register has {register.labels}")
    return labels, [register.index(m) for m in labels]


def outcome_distribution(state: PureState, modes: Iterable[str]) -> OutcomeDistribution:
    """Marginal Born-rule distribution of joint photon counts on ``modes``."""
    labels, idx = _mode_indices(state.register, modes)
    weights: dict[tuple[int, ...], float] = {}
    total = 0.0
    for occ, amp in state.items():
        w = abs(amp) ** 2
        key = tuple(occ[i] for i in idx)
        weights[key] = weights.get(key, 0.0) + w
        total += w
    if total <= 0:
        raise MeasurementError("cannot measure the zero vector")
    keys = sorted(weights)
    probs = np.array([weights[k] / total for k in keys])
    probs[probs < PROB_FLOOR] = 0.0
    probs = np.clip(probs, 0.0, None)
    return OutcomeDistribution(tuple(DetectionEvent(labels, k) for k in keys), probs)


def project(state: PureState, event: DetectionEvent) -> PureState:
    """Unnormalized branch of ``state`` consistent with ``event``, measured modes removed."""
    _, idx = _mode_indices(state.register, event.modes)
    keep = [i for i in range(len(state.register)) if i not in idx]
    reg = ModeRegister([state.labels[i] for i in keep], state.register.cutoff)
    amps: dict[Occupation, complex] = {}
    for occ, amp in state.items():
        if all(occ[i] == c for i, c in zip(idx, event.counts)):
            amps[tuple(occ[i] for i in keep)] = amp
    return PureState(reg, amps)


def post_select(state: PureState, event: DetectionEvent) -> PostSelection:
    branch = project(state, event)
    total = state.norm() ** 2
    if total <= 0:
        raise MeasurementError("cannot measure the zero vector")
    weight = branch.norm() ** 2
    if len(branch) == 0 or weight == 0.0:
        return PostSelection(0.0, None)
    return PostSelection(weight / total, branch.normalize())


def draw_index(distribution: OutcomeDistribution, u: float) -> int:
    """Inverse-CDF lookup shared with the batched kernels."""
    return int(
        _kernels.inverse_cdf(distribution.cdf(), np.array([u]), distribution.last_possible())[0]
    )


class Detector:
    """Number-resolving detector bank.

    ``efficiency`` below 1 keeps each photon of the drawn event with that
    probability before it is reported; the returned conditional state is
    still the one for the photons that actually arrived.
    """

    def __init__(self, efficiency: float = 1.0):
        if not 0.0 <= efficiency <= 1.0:
            raise MeasurementError(f"efficiency must lie in [0, 1], got {efficiency}")
        self.efficiency = float(efficiency)

    def sample(
        self, state: PureState, modes: Iterable[str], stream: RandomStream
    ) -> tuple[DetectionEvent, PureState]:
        dist = outcome_distribution(state, modes)
        event = dist.events[draw_index(dist, stream.uniform())]
        conditional = post_select(state, event).conditional
        if self.efficiency < 1.0:
            thinned = tuple(
                sum(stream.uniform() < self.efficiency for _ in range(c)) for c in event.counts
            )
            event = DetectionEvent(event.modes, thinned)
        return event, conditional


IDEAL = Detector()


def sample(
    state: PureState, modes: Iterable[str], stream: RandomStream
) -> tuple[DetectionEvent, PureState]:
    """Draw one ideal detection event and collapse the state onto it."""
    return IDEAL.sample(state, modes, stream)


def sample_indices(
    distribution: OutcomeDistribution, seed: int, first_trial: int, n_trials: int
) -> np.ndarray:
    """Event indices for trials ``first_trial ..`` drawn with streams ``seed + i``.

    Matches ``draw_index(distribution, RandomStream(seed + i).uniform())``.
    """
    return _kernels.sample_indices(
        distribution.cdf(), distribution.last_possible(), seed, first_trial, n_trials
    )
