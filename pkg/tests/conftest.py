"""Shared fixtures and the acceptance summary printed at the end of the run."""

from collections import OrderedDict

import pytest

_ACCEPTANCE: "OrderedDict[str, list]" = OrderedDict()


class AcceptanceLog:
    def record(self, criterion: str, title: str, passed: bool, detail: str):
        _ACCEPTANCE.setdefault(criterion, [title, []])[1].append((bool(passed), detail))


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion, (title, parts) in sorted(_ACCEPTANCE.items()):
        ok = all(p for p, _ in parts)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}  {title}")
        for p, detail in parts:
            tr.write_line(f"        [{'ok' if p else 'x '}] {detail}")
