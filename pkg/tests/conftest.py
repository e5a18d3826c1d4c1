import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stagger import Dataset, fit  # noqa: E402
from stagger.domain import make_rng  # noqa: E402

_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    """Collects one pass/fail line per acceptance criterion."""

    def _record(label: str, ok: bool, detail: str = "") -> bool:
        _RESULTS.append((label, bool(ok), detail))
        return bool(ok)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")


THREE_POINTS = Dataset(np.array([[0.15], [0.5], [0.8]]), np.array([0.2, 1.0, 0.6]))


@pytest.fixture(scope="session")
def three_point_model():
    return fit(THREE_POINTS, rng=make_rng(0))


@pytest.fixture
def rng():
    return make_rng(12345)
