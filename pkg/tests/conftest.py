import pytest
from hypothesis import HealthCheck, settings

from magpos import load_survey_table
from magpos.defaults import default_anchor_set

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def survey():
    return load_survey_table()


@pytest.fixture(scope="session")
def anchors():
    return default_anchor_set()
