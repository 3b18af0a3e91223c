"""Phase shifters, beam splitters and the balanced element with -pi/2 shifters.

Beam splitters act by substituting creation operators (Heisenberg picture).
With ``(t, r)`` the transmission and reflection amplitudes, the reflected
wave leads the transmitted one by pi/2::

    a1^+  ->  i r  b1^+ + t     b2^+
    a2^+  ->  t*   b1^+ + i r*  b2^+

where output ``b1`` keeps the label of input ``a1`` and ``b2`` that of ``a2``.
For real ``t`` and ``r`` this is the symmetric ``[[i r, t], [t, i r]]``; the
conjugates keep the map unitary for complex amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .fock import PRUNE_TOL, FockError, Occupation, PureState

HALF_PI = math.pi / 2
_QUARTER_TURNS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


@dataclass(frozen=True)
class PhaseShift:
    """Phase in radians. Applied as given; wrapping is for display only."""

    phi: float

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise FockError(f"phase must be finite, got {self.phi!r}")

    def canonical(self) -> float:
        """Equivalent phase in (-pi, pi]."""
        w = math.remainder(self.phi, 2 * math.pi)
        return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class BeamSplitterParams:
    t: complex
    r: complex

    def __post_init__(self):
        t, r = complex(self.t), complex(self.r)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "r", r)
        if abs(abs(t) ** 2 + abs(r) ** 2 - 1.0) > 1e-12:
            raise FockError(f"|t|^2 + |r|^2 = {abs(t) ** 2 + abs(r) ** 2!r}, expected 1")

    @classmethod
    def balanced(cls) -> "BeamSplitterParams":
        return cls(1 / math.sqrt(2), 1 / math.sqrt(2))

    @classmethod
    def from_angles(cls, theta: float, phase_t: float = 0.0, phase_r: float = 0.0) -> "BeamSplitterParams":
        """``t = cos(theta) e^{i phase_t}``, ``r = sin(theta) e^{i phase_r}``."""
        return cls(
            math.cos(theta) * complex(math.cos(phase_t), math.sin(phase_t)),
            math.sin(theta) * complex(math.cos(phase_r), math.sin(phase_r)),
        )

    def transfer_matrix(self) -> np.ndarray:
        """Single-photon matrix ``M[in, out]`` of the substitution above."""
        t, r = self.t, self.r
        return np.array([[1j * r, t], [t.conjugate(), 1j * r.conjugate()]], dtype=complex)


def phase_factor(phi: float, n: int = 1) -> complex:
    """``exp(i phi n)``, exact when ``phi n`` is a multiple of pi/2."""
    angle = phi * n
    q = angle / HALF_PI
    if q == round(q) and abs(q) < 2**52:
        return _QUARTER_TURNS[int(round(q)) % 4]
    return complex(math.cos(angle), math.sin(angle))


def apply_phase_shifter(state: PureState, mode: str, shift: PhaseShift | float) -> PureState:
    phi = shift.phi if isinstance(shift, PhaseShift) else PhaseShift(float(shift)).phi
    k = state.register.index(mode)
    amps = {occ: amp * phase_factor(phi, occ[k]) for occ, amp in state.items()}
    return PureState(state.register, {o: a for o, a in amps.items() if abs(a) >= PRUNE_TOL})


@lru_cache(maxsize=None)
def _expansion_terms(m: int, n: int) -> tuple[tuple[int, int, int, float], ...]:
    """Terms of ``(x1 b1 + y1 b2)^m (x2 b1 + y2 b2)^n |0> / sqrt(m! n!)``.

    Each entry ``(p, q, k1, weight)`` stands for ``x1^p y1^(m-p) x2^q y2^(n-q)``
    landing on ``|k1, m+n-k1>``; ``weight`` folds the binomials and the
    ``sqrt(k1! k2! / (m! n!))`` normalization, evaluated in exact integers.
    """
    out = []
    denom = math.factorial(m) * math.factorial(n)
    for p in range(m + 1):
        for q in range(n + 1):
            k1 = p + q
            k2 = m + n - k1
            binom = math.comb(m, p) * math.comb(n, q)
            ratio = Fraction(binom * binom * math.factorial(k1) * math.factorial(k2), denom)
            out.append((p, q, k1, math.sqrt(ratio)))
    return tuple(out)


def apply_transfer(state: PureState, mode_in1: str, mode_in2: str, matrix: np.ndarray) -> PureState:
    """Apply a two-mode linear-optical map given by its single-photon matrix.

    ``matrix[j, k]`` is the amplitude for a photon entering port ``j`` to
    leave through port ``k`` (0 -> ``mode_in1``, 1 -> ``mode_in2``).
    """
    if mode_in1 == mode_in2:
        raise FockError(f"beam splitter needs two distinct modes, got {mode_in1!r} twice")
    i1 = state.register.index(mode_in1)
    i2 = state.register.index(mode_in2)
    x1, y1 = complex(matrix[0, 0]), complex(matrix[0, 1])
    x2, y2 = complex(matrix[1, 0]), complex(matrix[1, 1])
    acc: dict[Occupation, complex] = {}
    for occ, amp in state.items():
        m, n = occ[i1], occ[i2]
        for p, q, k1, weight in _expansion_terms(m, n):
            c = weight * x1**p * y1 ** (m - p) * x2**q * y2 ** (n - q)
            if c == 0:
                continue
            new = list(occ)
            new[i1] = k1
            new[i2] = m + n - k1
            key = tuple(new)
            acc[key] = acc.get(key, 0j) + amp * c
    return PureState(state.register, {o: a for o, a in acc.items() if abs(a) >= PRUNE_TOL})


def apply_beam_splitter(
    state: PureState,
    mode_in1: str,
    mode_in2: str,
    params: BeamSplitterParams,
    *,
    reverse: bool = False,
) -> PureState:
    """Lossless beam splitter on two modes.

    ``reverse=True`` runs the same element backwards (the inverse map), which
    undoes a forward pass on the same ports.
    """
    m = params.transfer_matrix()
    if reverse:
        m = m.conj().T
    return apply_transfer(state, mode_in1, mode_in2, m)


def apply_balanced_element(state: PureState, mode_in1: str, mode_in2: str) -> PureState:
    """Balanced beam splitter with -pi/2 shifters on input 2 and output 1.

    Single-photon action: ``in1 -> (out1 + out2)/sqrt(2)`` and
    ``in2 -> (-out1 + out2)/sqrt(2)``.
    """
    state = apply_phase_shifter(state, mode_in2, -HALF_PI)
    state = apply_beam_splitter(state, mode_in1, mode_in2, BeamSplitterParams.balanced())
    return apply_phase_shifter(state, mode_in1, -HALF_PI)
