import json
import warnings
from pathlib import Path

import pytest

from plumbknot.geometry import PlumbersCurve

warnings.filterwarnings("ignore", message=".*TBB.*")

FIXTURES = Path(__file__).parent / "fixtures"

# filled by test_acceptance.py, reported at the end of the session
ACCEPTANCE = {}


def load_curve(name: str):
    data = json.loads((FIXTURES / f"{name}.json").read_text())
    return PlumbersCurve.from_dict(data), data


@pytest.fixture(scope="session")
def knot_fixtures():
    return {k: load_curve(k)[0] for k in ("unknot", "trefoil", "figure_eight")}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
