import pytest

# criterion number -> list of (label, passed, detail)
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def record():
    def _record(criterion: int, label: str, passed: bool, detail: str = "") -> None:
        ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        rows = ACCEPTANCE[crit]
        bad = [r for r in rows if not r[1]]
        status = "PASS" if not bad else "FAIL"
        tr.write_line(f"criterion {crit}: {status} ({len(rows) - len(bad)}/{len(rows)} checks)")
        for label, _, detail in bad:
            tr.write_line(f"    failed: {label} {detail}")
