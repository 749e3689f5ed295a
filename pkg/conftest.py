import pytest

from photonloom.emission import CouplingParams
from photonloom.protocols import ProtocolParams, Variant


@pytest.fixture(scope="function")
def ideal_coupling():
    return CouplingParams(1.0, 1.0)


@pytest.fixture(scope="function")
def ghz_params():
    return ProtocolParams.ideal(Variant.GHZ)


@pytest.fixture(params=list(Variant), ids=lambda variant: variant.value)
def variant(request):
    return request.param


@pytest.fixture(scope="function")
def config_file(tmp_path):
    """Return a function writing its argument to a config file and returning
    the path."""

    def write(text):
        path = tmp_path / "run.ini"
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write
