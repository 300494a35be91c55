import importlib

import numpy as np
import pytest

from mwlab.jets import _jetcore_py

try:
    _compiled = importlib.import_module("mwlab.jets._jetcore")
except ImportError:
    _compiled = None

BACKENDS = [pytest.param(_jetcore_py, id="python")]
BACKENDS.append(
    pytest.param(_compiled, id="compiled", marks=pytest.mark.skipif(_compiled is None, reason="extension not built"))
)


@pytest.fixture(params=BACKENDS)
def core(request):
    """A jet backend module exposing ``Jet`` and ``JetDomainError``."""
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(verdicts):
        terminalreporter.write_line(verdicts[key])
