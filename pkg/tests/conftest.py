import warnings

import numpy as np
import pytest

from qtransport.floquet_magnus import FloquetRegimeWarning
from qtransport.presets import offdiag_config, onsite_config

# parameter sets of the reproduced figures
FIG3 = dict(delta=2.0, gamma=0.0, mu=0.1, kappa=0.8)
FIG5A = dict(f=1.0, gamma=0.0, mu=0.05, kappa=0.1)
FIG5B = dict(f=1.0, gamma=0.0, mu=0.05, kappa=5.0)


@pytest.fixture
def fig3_config():
    return onsite_config(omega=0.746, **FIG3)


@pytest.fixture
def fig5a_config():
    return offdiag_config(omega=2.8, **FIG5A)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def quiet_regime():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FloquetRegimeWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
