import numpy as np
import pytest

import supercl as s
from supercl.grid import ChannelGrid


def pytest_runtest_logreport(report):
    # one visible verdict line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\n[acceptance] {name}: {verdict}", flush=True)


@pytest.fixture(scope="session")
def default_span():
    return s.make_default_smf(100.0)


@pytest.fixture(scope="session")
def paper_grid():
    return s.default_grid()


@pytest.fixture(scope="session")
def desk_grid():
    """9 channels spread over both bands, for oracle-scale tests."""
    f = np.array([184.6, 186.1, 187.6, 189.1, 190.9, 192.3, 193.7, 195.1, 196.5])
    return ChannelGrid(
        f_thz=f,
        symbol_rate_gbaud=np.full(9, 100.0),
        roll_off=np.full(9, 0.1),
        band_index=np.array([0, 0, 0, 0, 1, 1, 1, 1, 1]),
        bands=s.DEFAULT_BANDS,
    )


@pytest.fixture(scope="session")
def caption_pumps():
    """The five-pump counter-propagating unit used in the long-haul runs."""
    return s.RamanPumpSet(
        f_thz=np.array([210.6, 208.9, 206.7, 204.5, 200.6]),
        power_mw=np.array([360.0, 320.0, 200.0, 130.0, 180.0]),
    )
