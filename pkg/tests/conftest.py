import itertools
import math

import numpy as np
import pytest

from monophoton.fock import ModeRegister, PureState


def occupations(n_modes, cutoff):
    """All occupation vectors with total photons <= cutoff."""
    return [o for o in itertools.product(range(cutoff + 1), repeat=n_modes) if sum(o) <= cutoff]


def random_state(rng, labels, cutoff, n_terms=None):
    """Random normalized sparse state on ``labels``."""
    basis = occupations(len(labels), cutoff)
    if n_terms is None:
        n_terms = int(rng.integers(1, len(basis) + 1))
    pick = rng.choice(len(basis), size=min(n_terms, len(basis)), replace=False)
    amps = rng.normal(size=len(pick)) + 1j * rng.normal(size=len(pick))
    amps /= np.linalg.norm(amps)
    return PureState.from_amplitudes(
        ModeRegister(labels, cutoff), {basis[k]: a for k, a in zip(pick, amps)}
    )


def random_params(rng):
    from monophoton.optics import BeamSplitterParams

    theta = rng.uniform(0, math.pi / 2)
    return BeamSplitterParams.from_angles(theta, *rng.uniform(0, 2 * math.pi, size=2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
