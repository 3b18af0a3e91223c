import itertools
import math

import numpy as np
import pytest

from conftest import random_params, random_state
from monophoton.fock import FockError, ModeRegister, PureState, basis_state, fidelity, vacuum
from monophoton.optics import (
    BeamSplitterParams,
    PhaseShift,
    apply_balanced_element,
    apply_beam_splitter,
    apply_phase_shifter,
    phase_factor,
)
from monophoton.protocols import bell_state

S = 1 / math.sqrt(2)
IJ = ModeRegister("IJ")
BALANCED = BeamSplitterParams.balanced()


# ---------------------------------------------------------------- oracles


def creation(dim):
    """Truncated single-mode creation operator."""
    a = np.zeros((dim, dim))
    for k in range(dim - 1):
        a[k + 1, k] = math.sqrt(k + 1)
    return a


def operator_oracle(matrix, m, n):
    """Expand (M00 a1+ + M01 a2+)^m (M10 a1+ + M11 a2+)^n |0,0> / sqrt(m! n!) with dense operators.

    Returns {(k1, k2): amplitude}.
    """
    dim = m + n + 1
    a = creation(dim)
    eye = np.eye(dim)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    op1 = matrix[0, 0] * a1 + matrix[0, 1] * a2
    op2 = matrix[1, 0] * a1 + matrix[1, 1] * a2
    vec = np.zeros(dim * dim, dtype=complex)
    vec[0] = 1.0
    for _ in range(n):
        vec = op2 @ vec
    for _ in range(m):
        vec = op1 @ vec
    vec /= math.sqrt(math.factorial(m) * math.factorial(n))
    return {(k1, k2): vec[k1 * dim + k2] for k1 in range(dim) for k2 in range(dim) if k1 + k2 == m + n}


def permanent(mat):
    n = mat.shape[0]
    return sum(
        np.prod([mat[i, p[i]] for i in range(n)]) for p in itertools.permutations(range(n))
    ) if n else 1.0


def permanent_oracle(matrix, m, n, k1, k2):
    """<k1,k2|U|m,n> via the permanent of the repeated single-photon matrix."""
    rows = [0] * m + [1] * n
    cols = [0] * k1 + [1] * k2
    sub = matrix[np.ix_(rows, cols)]
    norm = math.sqrt(math.factorial(m) * math.factorial(n) * math.factorial(k1) * math.factorial(k2))
    return permanent(sub) / norm


def sector_matrix(params, n_photons):
    """Columns are images of |m, N-m> under apply_beam_splitter."""
    basis = [(m, n_photons - m) for m in range(n_photons + 1)]
    reg = ModeRegister("XY", cutoff=n_photons)
    out = np.zeros((len(basis), len(basis)), dtype=complex)
    for j, b in enumerate(basis):
        img = apply_beam_splitter(basis_state(reg, b), "X", "Y", params)
        out[:, j] = img.to_vector(basis)
    return basis, out


# ---------------------------------------------------------------- phase shifter


class TestPhaseShifter:
    def test_pi_flips_one_photon_term(self):
        reg = ModeRegister("B")
        s = PureState.from_amplitudes(reg, {(1,): 0.6, (0,): 0.8})
        out = apply_phase_shifter(s, "B", math.pi)
        assert out.amplitude((1,)) == -0.6
        assert out.amplitude((0,)) == 0.8

    def test_vacuum_untouched(self):
        s = vacuum(ModeRegister("AB"))
        assert apply_phase_shifter(s, "A", 1.234).items() == s.items()

    def test_pi_on_two_photons_is_identity(self):
        s = basis_state(ModeRegister("A"), (2,))
        assert apply_phase_shifter(s, "A", PhaseShift(math.pi)).amplitude((2,)) == 1.0

    def test_unknown_mode(self):
        with pytest.raises(FockError, match="unknown mode"):
            apply_phase_shifter(vacuum(IJ), "Q", 0.1)

    def test_quarter_turns_exact(self):
        assert phase_factor(-math.pi / 2) == -1j
        assert phase_factor(math.pi, 3) == -1
        assert phase_factor(0.3) == pytest.approx(complex(math.cos(0.3), math.sin(0.3)))

    def test_canonical_reporting(self):
        assert PhaseShift(3 * math.pi).canonical() == pytest.approx(math.pi)
        assert PhaseShift(-math.pi).canonical() == pytest.approx(math.pi)
        assert PhaseShift(2 * math.pi + 0.5).canonical() == pytest.approx(0.5)

    def test_non_finite_rejected(self):
        with pytest.raises(FockError):
            PhaseShift(float("nan"))


# ---------------------------------------------------------------- beam splitter


class TestBeamSplitter:
    def test_balanced_single_photon(self):
        # a_I+ -> i r a_I+ + t a_J+, with t = r = 1/sqrt2
        out = apply_beam_splitter(basis_state(IJ, (1, 0)), "I", "J", BALANCED)
        assert out.amplitude((1, 0)) == pytest.approx(1j * S, abs=1e-15)
        assert out.amplitude((0, 1)) == pytest.approx(S, abs=1e-15)
        assert len(out) == 2

    def test_vacuum_maps_to_vacuum(self, rng):
        out = apply_beam_splitter(vacuum(IJ), "I", "J", random_params(rng))
        assert out.items() == [((0, 0), 1 + 0j)]

    @pytest.mark.parametrize("occ", [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    def test_pure_transmission_swaps_ports(self, occ):
        # t = 1, r = 0: each photon crosses to the other label
        out = apply_beam_splitter(basis_state(IJ, occ), "I", "J", BeamSplitterParams(1, 0))
        assert out.items() == [((occ[1], occ[0]), 1 + 0j)]

    def test_pure_reflection_keeps_ports_with_phase(self):
        out = apply_beam_splitter(basis_state(IJ, (1, 0)), "I", "J", BeamSplitterParams(0, 1))
        assert out.items() == [((1, 0), 1j)]

    def test_invalid_params(self):
        with pytest.raises(FockError):
            BeamSplitterParams(1, 1)

    def test_same_mode_rejected(self):
        with pytest.raises(FockError, match="distinct"):
            apply_beam_splitter(vacuum(IJ), "I", "I", BALANCED)

    def test_reverse_undoes_forward(self, rng):
        for _ in range(20):
            s = random_state(rng, "XYZ", 3)
            p = random_params(rng)
            there = apply_beam_splitter(s, "X", "Z", p)
            back = apply_beam_splitter(there, "X", "Z", p, reverse=True)
            assert fidelity(back, s) == pytest.approx(1.0, abs=1e-12)
            for occ, amp in s.items():
                assert back.amplitude(occ) == pytest.approx(amp, abs=1e-12)

    def test_transfer_matrix_unitary(self, rng):
        for _ in range(50):
            m = random_params(rng).transfer_matrix()
            np.testing.assert_allclose(m @ m.conj().T, np.eye(2), atol=1e-14)


@pytest.mark.parametrize("n_photons", [0, 1, 2, 3, 4])
def test_sector_matches_operator_oracle_real_params(n_photons, rng):
    # literal (i r a1+ + t a2+)^m (t a1+ + i r a2+)^n expansion for real t, r
    for theta in [0.0, 0.3, math.pi / 4, 1.2, math.pi / 2]:
        t, r = math.cos(theta), math.sin(theta)
        params = BeamSplitterParams(t, r)
        basis, mat = sector_matrix(params, n_photons)
        lit = np.array([[1j * r, t], [t, 1j * r]])
        for j, (m, n) in enumerate(basis):
            ref = operator_oracle(lit, m, n)
            for i, b in enumerate(basis):
                assert abs(mat[i, j] - ref[b]) < 1e-10


@pytest.mark.parametrize("n_photons", [1, 2, 3, 4])
def test_sector_matches_permanent_oracle_complex_params(n_photons, rng):
    for _ in range(10):
        params = random_params(rng)
        basis, mat = sector_matrix(params, n_photons)
        u = params.transfer_matrix()
        for j, (m, n) in enumerate(basis):
            for i, (k1, k2) in enumerate(basis):
                assert abs(mat[i, j] - permanent_oracle(u, m, n, k1, k2)) < 1e-10
        np.testing.assert_allclose(mat.conj().T @ mat, np.eye(len(basis)), atol=1e-12)


def test_unitarity_on_random_states(rng):
    worst = 0.0
    for _ in range(1000):
        cutoff = int(rng.integers(1, 5))
        s = random_state(rng, "ABC", cutoff)
        p = random_params(rng)
        modes = rng.choice(list("ABC"), size=2, replace=False)
        out = apply_beam_splitter(s, modes[0], modes[1], p)
        out = apply_phase_shifter(out, modes[0], float(rng.uniform(-7, 7)))
        out = apply_balanced_element(out, modes[1], modes[0])
        worst = max(worst, abs(out.norm() - s.norm()))
    assert worst < 1e-12


def test_photon_number_sectors_preserved(rng):
    for _ in range(200):
        s = random_state(rng, "ABCD", 4)
        out = apply_beam_splitter(s, "B", "D", random_params(rng))
        before, after = s.photon_sectors(), out.photon_sectors()
        assert set(after) <= set(before)
        for n, w in before.items():
            assert after.get(n, 0.0) == pytest.approx(w, abs=1e-12)


# ---------------------------------------------------------------- balanced element


class TestBalancedElement:
    def test_symmetric_single_photon_output(self):
        out = apply_balanced_element(basis_state(IJ, (1, 0)), "I", "J")
        assert out.amplitude((1, 0)) == pytest.approx(S, abs=1e-15)
        assert out.amplitude((0, 1)) == pytest.approx(S, abs=1e-15)
        assert len(out) == 2

    def test_single_photon_rotation(self):
        # in1 -> (out1 + out2)/sqrt2, in2 -> (-out1 + out2)/sqrt2 (pinned amplitudes)
        a = apply_balanced_element(basis_state(IJ, (1, 0)), "I", "J")
        b = apply_balanced_element(basis_state(IJ, (0, 1)), "I", "J")
        got = np.array([[a.amplitude((1, 0)), a.amplitude((0, 1))], [b.amplitude((1, 0)), b.amplitude((0, 1))]])
        np.testing.assert_allclose(got, np.array([[1, 1], [-1, 1]]) * S, atol=1e-15)

    def test_psi_plus_exits_f(self):
        out = apply_balanced_element(bell_state("psi+"), "A", "C")
        assert fidelity(out, basis_state(ModeRegister("AC"), (0, 1))) == pytest.approx(1.0, abs=1e-12)

    def test_two_photons_bunch(self):
        # (a1+ + a2+)(-a1+ + a2+)/2 = (a2+^2 - a1+^2)/2 -> (|0,2> - |2,0>)/sqrt2
        out = apply_balanced_element(basis_state(IJ, (1, 1)), "I", "J")
        assert out.amplitude((1, 1)) == 0
        assert out.amplitude((0, 2)) == pytest.approx(S, abs=1e-15)
        assert out.amplitude((2, 0)) == pytest.approx(-S, abs=1e-15)

    @pytest.mark.parametrize(
        "kind, expected",
        [
            ("psi+", {(0, 1): 1.0}),
            ("psi-", {(1, 0): 1.0}),
            ("phi+", {(0, 2): 0.5, (2, 0): -0.5, (0, 0): S}),
            ("phi-", {(0, 2): 0.5, (2, 0): -0.5, (0, 0): -S}),
        ],
    )
    def test_bell_output_table(self, kind, expected):
        out = apply_balanced_element(bell_state(kind), "A", "C")
        ref = PureState.from_amplitudes(ModeRegister("AC"), expected)
        assert fidelity(out, ref) == pytest.approx(1.0, abs=1e-12)

    def test_twice_is_quarter_turn(self):
        # two 45 degree rotations: in1 -> out2, in2 -> -out1
        s = apply_balanced_element(basis_state(IJ, (1, 0)), "I", "J")
        s = apply_phase_shifter(s, "I", 0.0)
        s = apply_balanced_element(s, "I", "J")
        assert s.items() == [((0, 1), pytest.approx(1.0, abs=1e-15))]
