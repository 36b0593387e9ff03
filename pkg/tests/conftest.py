import sys

import numpy as np
import pytest

from capgaps.channel import QChannel
from capgaps.sampling import haar_isometry


def random_density(d, rng, rank=None):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = a @ a.conj().T
    return m / np.trace(m).real


def random_hermitian(d, rng):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_unitary(d, rng):
    return haar_isometry(d, d, rng)


def random_channel(d_in, d_out, r, rng):
    v = haar_isometry(d_in, d_out * r, rng)
    return QChannel(v.reshape(r, d_out, d_in))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.RESULTS:
        terminalreporter.write_line(line)
