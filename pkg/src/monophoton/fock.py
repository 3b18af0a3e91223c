"""Sparse multi-mode Fock states.

A :class:`PureState` maps occupation vectors (one photon count per mode of a
:class:`ModeRegister`) to complex amplitudes. States are immutable; every
operation returns a new state.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np

DEFAULT_CUTOFF = 2
# Entries smaller than this are dropped whenever a state is built.
PRUNE_TOL = 1e-14

Occupation = tuple[int, ...]


class FockError(ValueError):
    """Invalid register, occupation vector or state combination."""


@dataclass(frozen=True)
class ModeRegister:
    labels: tuple[str, ...]
    cutoff: int = DEFAULT_CUTOFF

    def __init__(self, labels: Iterable[str], cutoff: int = DEFAULT_CUTOFF):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise FockError(f"duplicate mode labels in {labels}")
        if int(cutoff) != cutoff or cutoff < 0:
            raise FockError(f"cutoff must be a non-negative integer, got {cutoff!r}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "cutoff", int(cutoff))

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise FockError(f"unknown mode {label!r}; register has {self.labels}") from None

    def check(self, occupations: Sequence[int]) -> Occupation:
        occ = tuple(int(n) for n in occupations)
        if len(occ) != len(self.labels):
            raise FockError(
                f"occupation vector {occ} has {len(occ)} entries, register has {len(self.labels)} modes"
            )
        if any(n < 0 for n in occ):
            raise FockError(f"negative photon count in {occ}")
        if sum(occ) > self.cutoff:
            raise FockError(f"{occ} holds {sum(occ)} photons, cutoff is {self.cutoff}")
        return occ


@dataclass(frozen=True)
class PureState:
    """Immutable sparse ket on a mode register.

    Use :func:`basis_state`, :func:`superpose` or :meth:`from_amplitudes`
    rather than the raw constructor; those validate and prune.
    """

    register: ModeRegister
    _amps: Mapping[Occupation, complex] = field(repr=False)

    @classmethod
    def from_amplitudes(
        cls, register: ModeRegister, amplitudes: Mapping[Sequence[int], complex] | Iterable
    ) -> "PureState":
        """Build a state from ``{occupation: amplitude}`` without normalizing.

        Repeated occupations are summed. Entries below ``PRUNE_TOL`` are dropped.
        """
        items = amplitudes.items() if isinstance(amplitudes, Mapping) else amplitudes
        acc: dict[Occupation, complex] = {}
        for occ, amp in items:
            key = register.check(occ)
            acc[key] = acc.get(key, 0j) + complex(amp)
        return cls(register, _pruned(acc))

    @property
    def labels(self) -> tuple[str, ...]:
        return self.register.labels

    def amplitude(self, occupations: Sequence[int]) -> complex:
        return self._amps.get(tuple(int(n) for n in occupations), 0j)

    def items(self) -> list[tuple[Occupation, complex]]:
        """Entries sorted lexicographically by occupation vector."""
        return sorted(self._amps.items())

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self):
        return iter(self.items())

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._amps.values()))

    def normalize(self) -> "PureState":
        n = self.norm()
        if n < PRUNE_TOL:
            raise FockError("cannot normalize the zero vector")
        return PureState(self.register, {k: v / n for k, v in self._amps.items()})

    def scale(self, factor: complex) -> "PureState":
        return PureState(self.register, _pruned({k: factor * v for k, v in self._amps.items()}))

    def photon_sectors(self) -> dict[int, float]:
        """Total weight per total-photon-number sector."""
        out: dict[int, float] = {}
        for occ, amp in self._amps.items():
            n = sum(occ)
            out[n] = out.get(n, 0.0) + abs(amp) ** 2
        return out

    def to_vector(self, basis: Sequence[Occupation]) -> np.ndarray:
        return np.array([self.amplitude(b) for b in basis], dtype=complex)

    def relabel(self, mapping: Mapping[str, str]) -> "PureState":
        """Rename modes, keeping their order and amplitudes."""
        labels = [mapping.get(lab, lab) for lab in self.register.labels]
        reg = ModeRegister(labels, self.register.cutoff)
        return PureState(reg, dict(self._amps))

    def reorder(self, labels: Sequence[str]) -> "PureState":
        """Permute modes into the given label order."""
        if sorted(labels) != sorted(self.register.labels):
            raise FockError(f"{labels} is not a permutation of {self.register.labels}")
        perm = [self.register.index(lab) for lab in labels]
        reg = ModeRegister(labels, self.register.cutoff)
        return PureState(reg, {tuple(occ[i] for i in perm): a for occ, a in self._amps.items()})

    def __repr__(self) -> str:
        terms = " + ".join(f"({a:.6g})|{','.join(map(str, occ))}>" for occ, a in self.items())
        return f"PureState[{','.join(self.labels)}]({terms or '0'})"


def _pruned(amps: Mapping[Occupation, complex]) -> dict[Occupation, complex]:
    return {k: v for k, v in amps.items() if abs(v) >= PRUNE_TOL}


def _same_register(s1: PureState, s2: PureState) -> None:
    if s1.register.labels != s2.register.labels:
        raise FockError(f"register mismatch: {s1.labels} vs {s2.labels}")


def basis_state(register: ModeRegister, occupations: Sequence[int]) -> PureState:
    return PureState(register, {register.check(occupations): 1.0 + 0j})


def vacuum(register: ModeRegister) -> PureState:
    return basis_state(register, (0,) * len(register))


Term = tuple[Union[complex, float], PureState]


def superpose(terms: Sequence[Term]) -> PureState:
    """Normalized linear combination ``sum(c * state)`` of states on one register."""
    if not terms:
        raise FockError("superpose needs at least one term")
    reg = terms[0][1].register
    acc: dict[Occupation, complex] = {}
    for coeff, st in terms:
        if st.register.labels != reg.labels:
            raise FockError(f"register mismatch: {reg.labels} vs {st.labels}")
        for occ, amp in st._amps.items():
            acc[occ] = acc.get(occ, 0j) + complex(coeff) * amp
    cutoff = max(st.register.cutoff for _, st in terms)
    out = PureState(ModeRegister(reg.labels, cutoff), _pruned(acc))
    if not out._amps:
        raise FockError("linear combination is the zero vector")
    return out.normalize()


def tensor(s1: PureState, s2: PureState) -> PureState:
    """Product state on the concatenated register (cutoffs add)."""
    clash = set(s1.labels) & set(s2.labels)
    if clash:
        raise FockError(f"mode labels {sorted(clash)} appear in both factors")
    reg = ModeRegister(s1.labels + s2.labels, s1.register.cutoff + s2.register.cutoff)
    amps = {o1 + o2: a1 * a2 for o1, a1 in s1._amps.items() for o2, a2 in s2._amps.items()}
    return PureState(reg, _pruned(amps))


def inner_product(s1: PureState, s2: PureState) -> complex:
    """``<s1|s2>``, conjugating the first argument."""
    _same_register(s1, s2)
    small, big = (s1, s2) if len(s1) <= len(s2) else (s2, s1)
    total = 0j
    for occ, amp in small._amps.items():
        other = big._amps.get(occ)
        if other is not None:
            total += amp.conjugate() * other if small is s1 else other.conjugate() * amp
    return total


def fidelity(s1: PureState, s2: PureState) -> float:
    """``|<s1|s2>|**2``; insensitive to the global phase of either state."""
    return min(1.0, abs(inner_product(s1, s2)) ** 2)


def to_records(state: PureState) -> list[dict]:
    """Serializable ``{occupations, re, im}`` records, sorted by occupation.

    The list is cached on the state; treat it as read-only.
    """
    cached = state.__dict__.get("_records")
    if cached is None:
        cached = [
            # + 0.0 turns -0.0 into 0.0
            {"occupations": list(occ), "re": float(a.real) + 0.0, "im": float(a.imag) + 0.0}
            for occ, a in state.items()
        ]
        object.__setattr__(state, "_records", cached)
    return cached


def from_records(register: ModeRegister, records: Iterable[Mapping]) -> PureState:
    return PureState.from_amplitudes(
        register, [(r["occupations"], complex(r["re"], r["im"])) for r in records]
    )
