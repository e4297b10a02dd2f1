import os
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


# Keep the suite off the journal that real runs write to.
TEST_DB_PATH = ROOT / "test-state.sqlite3"
os.environ.setdefault("HSAC_STATE_DB_PATH", str(TEST_DB_PATH))


@pytest.fixture(autouse=True)
def journal_guard():
    """Reset the run journal between tests."""

    from hybrid_sac import state

    state.reset_state()
    yield
    state.reset_state()


def pytest_addoption(parser):
    parser.addoption(
        "--run-acceptance",
        action="store_true",
        default=False,
        help="run the slow learning tests (several minutes each)",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: slow learning test, needs --run-acceptance")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-acceptance"):
        return
    skip = pytest.mark.skip(reason="needs --run-acceptance")
    for item in items:
        if "acceptance" in item.keywords:
            item.add_marker(skip)
