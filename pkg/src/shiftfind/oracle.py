"""Counted query access to a shifted canonical function.

Solvers receive a :class:`BitOracle` and nothing else about the hidden
shift.  Every call to :meth:`BitOracle.query` is counted exactly; the log of
probed indices is retained up to ``log_cap`` entries.
"""

from __future__ import annotations

from .canonical import CanonicalFunction, check_shift
from .errors import BudgetExceeded, DomainError

DEFAULT_LOG_CAP = 10**6


class BitOracle:
    """Base class: subclasses implement ``_answer`` for indices already range-checked."""

    def __init__(self, domain_max: int, log_cap: int = DEFAULT_LOG_CAP) -> None:
        self.domain_max = domain_max
        self._count = 0
        self._log: list[int] = []
        self._log_cap = log_cap

    def query(self, x: int) -> int:
        if not 0 <= x <= self.domain_max:
            raise DomainError(f"query index {x} outside [0, {self.domain_max}]")
        self._count += 1
        if len(self._log) < self._log_cap:
            self._log.append(x)
        return self._answer(x)

    def _answer(self, x: int) -> int:
        raise NotImplementedError

    def queries_made(self) -> int:
        return self._count

    def query_log(self) -> list[int]:
        return list(self._log)

    @property
    def log_truncated(self) -> bool:
        return self._count > len(self._log)


class HiddenShiftOracle(BitOracle):
    def __init__(self, f: CanonicalFunction, secret: int, log_cap: int = DEFAULT_LOG_CAP) -> None:
        super().__init__(f.params.domain_max, log_cap)
        self._f = f
        self.__secret = check_shift(f.params, secret)

    def _answer(self, x: int) -> int:
        return int(self._f.bits[min(self.__secret + x, self.domain_max)])

    def __repr__(self) -> str:
        return f"HiddenShiftOracle(n={self._f.n}, m={self._f.m}, queries={self._count})"


class BudgetOracle(BitOracle):
    """Forwards to ``inner`` and raises :class:`BudgetExceeded` on query ``limit + 1``."""

    def __init__(self, inner: BitOracle, limit: int) -> None:
        if limit < 0:
            raise DomainError(f"budget must be non-negative, got {limit}")
        super().__init__(inner.domain_max, inner._log_cap)
        self.inner = inner
        self.limit = limit

    def query(self, x: int) -> int:
        if self._count >= self.limit:
            raise BudgetExceeded(f"query budget of {self.limit} exhausted")
        return super().query(x)

    def _answer(self, x: int) -> int:
        return self.inner.query(x)


def make_oracle(f: CanonicalFunction, s_star: int, log_cap: int = DEFAULT_LOG_CAP) -> BitOracle:
    return HiddenShiftOracle(f, s_star, log_cap)


def with_budget(oracle: BitOracle, limit: int) -> BitOracle:
    return BudgetOracle(oracle, limit)
