import pytest

from qfxemu.harness import corpus_generate
from qfxemu.trig import trig_unit

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def corpus():
    return corpus_generate(0)


@pytest.fixture(scope="session")
def tu():
    return trig_unit()


@pytest.fixture(scope="session")
def record():
    """Log one acceptance line and return the verdict for asserting."""
    def _record(name: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return bool(ok)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
