import itertools

import pytest

from shiftfind.canonical import CanonicalFunction, InstanceParams

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def naive_F(n: int, m: int, pattern: str) -> list[int]:
    """Reference evaluation, straight from the case definition with 1-based P."""
    out = []
    for x in range(m + n + 1):
        if x <= n:
            out.append(0)
        elif x >= m + 1:
            out.append(1)
        else:
            out.append(int(pattern[x - n - 1]))
    return out


def all_instances(max_total: int, min_n: int = 1):
    """Every (n, m, pattern) with n < m and m + n <= max_total."""
    for n in range(min_n, max_total):
        for m in range(n + 1, max_total - n + 1):
            for bits in itertools.product("01", repeat=m - n):
                yield CanonicalFunction(InstanceParams(n, m), "".join(bits))


@pytest.fixture
def small_f():
    return CanonicalFunction(InstanceParams(2, 4), "10")


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
