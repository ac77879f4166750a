import numpy as np
import pytest

from eqrep.audio import AudioBuffer, NoteSpec, synthesize_note

SR = 44100


@pytest.fixture(scope="session")
def c2_note():
    """Broadband test note: low fundamental, partials across all EQ bands."""
    return synthesize_note(NoteSpec("C2", 65.40639132514966, 1.0, 300), SR)


@pytest.fixture
def noise_buffer():
    rng = np.random.default_rng(7)
    return AudioBuffer(0.1 * rng.standard_normal(SR // 2), SR)
