import pytest

from rvmlab.initdata import BumpProfile, CutoffChi
from rvmlab.params import FocusingParams

DESK = dict(epsilon=0.05, k=0.01, l=0.6, alpha=0.045)


@pytest.fixture(scope="session")
def desk_params():
    return FocusingParams(**DESK)


@pytest.fixture(scope="session")
def profile():
    return BumpProfile()


@pytest.fixture(scope="session")
def chi():
    return CutoffChi()
