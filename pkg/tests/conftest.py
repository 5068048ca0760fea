import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and getattr(mod, "RESULTS", None):
            terminalreporter.section("acceptance criteria")
            for n in sorted(mod.RESULTS):
                terminalreporter.write_line(mod.RESULTS[n])
