import re

import numpy as np
import pytest

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Record one acceptance outcome: ``record(cid, passed, detail)``."""

    def _rec(cid: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE[cid] = (bool(passed), detail)

    return _rec


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=lambda s: (int(re.match(r"\d+", s).group()), s)):
        ok, detail = _ACCEPTANCE[cid]
        terminalreporter.write_line(f"criterion {cid}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
