import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hawkes_ldp import HawkesParams  # noqa: E402


@pytest.fixture
def critical():
    return HawkesParams(1.0, 1.0)


@pytest.fixture
def subcritical():
    return HawkesParams(1.0, 2.0, 1.0)


@pytest.fixture
def supercritical():
    return HawkesParams(2.0, 1.0)
