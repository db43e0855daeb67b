import time

import pytest

from rnm import cli
from rnm.certifier import parse_output_line

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion."""

    def record(number: int, name: str, ok: bool, detail: str) -> None:
        line = f"criterion {number} [{name}]: {'PASS' if ok else 'FAIL'} - {detail}"
        _CRITERIA[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])


@pytest.fixture(scope="session")
def certify_run(tmp_path_factory):
    """Full-depth ``rnm certify`` run through the CLI, shared across tests."""
    out_dir = tmp_path_factory.mktemp("certify")
    listing = out_dir / "sequences.txt"
    report = out_dir / "report.json"
    t0 = time.perf_counter()
    status = cli.main(["certify", "--depth", "14", "-o", str(listing), "--report", str(report)])
    elapsed = time.perf_counter() - t0
    lines = listing.read_text().splitlines()
    parsed = dict(parse_output_line(line) for line in lines)
    return {
        "status": status,
        "elapsed": elapsed,
        "lines": lines,
        "parsed": parsed,
        "report": report.read_text(),
    }
