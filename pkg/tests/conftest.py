import pytest

from dissipator.model import DeviceParams


@pytest.fixture
def params():
    return DeviceParams()
