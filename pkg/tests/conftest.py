from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
FIXTURES = TESTS / "fixtures"
REPO = FIXTURES / "repo"

if str(TESTS) not in sys.path:
    sys.path.insert(0, str(TESTS))


def load_corpus_symbols(path: Path = FIXTURES / "mangling" / "corpus.symbols") -> dict[int, str]:
    """Definition line -> symbol exported by the real toolchain."""
    out = {}
    for line in path.read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        lineno, symbol = line.split()
        out[int(lineno)] = symbol
    return out


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
