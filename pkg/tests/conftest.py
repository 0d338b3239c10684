import time
from contextlib import contextmanager
from dataclasses import dataclass

import pytest

_RESULTS: dict[int, "Criterion"] = {}


@dataclass
class Criterion:
    number: int
    title: str
    budget_s: float
    ok: bool = False
    detail: str = ""
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.ok and self.elapsed <= self.budget_s

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        timing = f"{self.elapsed:.1f}s / {self.budget_s:g}s"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({timing}) {self.detail}".rstrip()


@pytest.fixture
def criterion():
    """``with criterion(n, title, budget) as c: ...; c.ok = ...`` records and asserts one criterion."""

    @contextmanager
    def run(number, title, budget_s):
        c = Criterion(number, title, budget_s)
        _RESULTS[number] = c
        start = time.perf_counter()
        try:
            yield c
        except Exception as exc:
            c.ok = False
            c.detail = f"raised {type(exc).__name__}: {exc}"
            raise
        finally:
            c.elapsed = time.perf_counter() - start
            print(c.line())
        assert c.ok, c.detail
        assert c.elapsed <= budget_s, f"took {c.elapsed:.1f}s, budget {budget_s}s"

    return run


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        terminalreporter.write_line(_RESULTS[n].line())
    passed = sum(c.passed for c in _RESULTS.values())
    terminalreporter.write_line(f"{passed}/{len(_RESULTS)} criteria passed")
