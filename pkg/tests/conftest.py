import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

settings.register_profile(
    "default", max_examples=100, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

# deep terms (long cast chains) need a larger recursion budget
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


def corpus_file(name: str) -> Path:
    return CORPUS / f"{name}.gm"


@pytest.fixture(scope="session")
def enumeration6():
    from coercion_gen import Enumeration

    return Enumeration(6)


ACCEPTANCE: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> bool:
    """Note one acceptance criterion's outcome for the end-of-run summary."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
