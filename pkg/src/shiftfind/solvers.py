"""Shift-recovery algorithms.

Every solver takes the full canonical function ``f`` plus a
:class:`~shiftfind.oracle.BitOracle` for the hidden shifted view, and
returns a :class:`SolveReport`.  Consistency checks against ``f`` are free;
only oracle calls are counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .canonical import CanonicalFunction, check_shift
from .errors import DomainError, IntegrityError
from .oracle import BitOracle
from .seeding import rng

__all__ = [
    "SolveReport",
    "verify_shift",
    "find_shift_deterministic",
    "binary_search_pattern",
    "candidates_from_location",
    "find_shift_random_elimination",
    "find_shift_hybrid",
    "brute_force_find_shift",
    "grid_step",
    "elimination_rounds",
    "hybrid_threshold",
    "SOLVERS",
    "solve",
]


@dataclass
class SolveReport:
    answer: int | None
    queries: int
    method: str
    trace: list[int] | None = None
    details: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.answer is None

    def to_dict(self) -> dict:
        out = {"answer": self.answer, "queries": self.queries, "method": self.method}
        out.update(self.details)
        return out


def _report(oracle: BitOracle, start: int, answer: int | None, method: str, **details) -> SolveReport:
    queries = oracle.queries_made() - start
    trace = oracle.query_log()[start:] if not oracle.log_truncated else None
    return SolveReport(answer, queries, method, trace, details)


def verify_shift(f: CanonicalFunction, oracle: BitOracle, s: int) -> bool:
    """Two-query witness: True iff ``s`` is the oracle's hidden shift."""
    check_shift(f.params, s)
    at_first_one = oracle.query(f.first_one - s)
    at_last_zero = oracle.query(f.last_zero - s)
    return at_first_one == 1 and at_last_zero == 0


def grid_step(m: int) -> int:
    """ceil(sqrt(m))"""
    return math.isqrt(m - 1) + 1 if m > 0 else 0


def _grid(m: int) -> list[int]:
    g = grid_step(m)
    points = list(range(0, m + 1, g))
    if points[-1] != m:
        points.append(m)
    return points


def consistent_shifts(f: CanonicalFunction, points, answers) -> np.ndarray:
    """All s in [0, n] whose view agrees with ``answers`` at ``points``."""
    shifts = np.arange(f.n + 1)
    idx = np.minimum(shifts[:, None] + np.asarray(points)[None, :], f.params.domain_max)
    ok = (f.bits[idx] == np.asarray(answers, dtype=np.uint8)[None, :]).all(axis=1)
    return shifts[ok]


def find_shift_deterministic(f: CanonicalFunction, oracle: BitOracle) -> SolveReport:
    start = oracle.queries_made()
    points = _grid(f.m)
    answers = [oracle.query(x) for x in points]
    candidates = consistent_shifts(f, points, answers)
    for s in candidates:
        if verify_shift(f, oracle, int(s)):
            return _report(oracle, start, int(s), "det", candidates=int(candidates.size))
    raise IntegrityError("no candidate shift passed verification; the oracle is inconsistent with f")


def binary_search_pattern(f: CanonicalFunction, oracle: BitOracle, k: int = 1) -> int:
    """Find x with view(x) = 0 and view(x + k) = 1 by bisection over multiples of k.

    The right end ``(m // k + 1) * k`` exceeds m, so the view is 1 there for
    every shift and is never queried; likewise view(0) = 0 is assumed.
    """
    if not 1 <= k <= f.n:
        raise DomainError(f"gap k={k} outside [1, {f.n}]")
    lo, hi = 0, f.m // k + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if oracle.query(mid * k) == 0:
            lo = mid
        else:
            hi = mid
    return lo * k


def candidates_from_location(f: CanonicalFunction, k: int, location: int) -> list[int]:
    """Shifts whose view has the gap-k pattern at ``location``, ascending."""
    if location < 0:
        raise DomainError(f"location must be non-negative, got {location}")
    shifts = f.pattern_positions(k) - location
    return [int(s) for s in shifts[(shifts >= 0) & (shifts <= f.n)]]


def elimination_rounds(n: int, m: int, t: int) -> int:
    return math.ceil(10 * m * math.log2(n) / t)


def find_shift_random_elimination(
    f: CanonicalFunction, oracle: BitOracle, t: int, rng_seed: int
) -> SolveReport:
    if t < 1:
        raise DomainError(f"threshold t must be >= 1, got {t}")
    start = oracle.queries_made()
    gen = rng(rng_seed)
    rounds = elimination_rounds(f.n, f.m, t)
    alive = np.arange(f.n + 1)
    used = 0
    while used < rounds and alive.size > 1:
        r = int(gen.integers(1, f.m + 1))
        alive = alive[f.bits[alive + r] == oracle.query(r)]
        used += 1
    answer = int(alive[0]) if alive.size == 1 else None
    return _report(oracle, start, answer, "elim", rounds=used, survivors=int(alive.size), t=t)


def hybrid_threshold(m: int) -> int:
    return math.ceil(math.sqrt(m * math.log2(m)))


def find_shift_hybrid(f: CanonicalFunction, oracle: BitOracle, rng_seed: int) -> SolveReport:
    """Witness all candidates when some gap pattern is rare, otherwise eliminate at random."""
    t = hybrid_threshold(f.m)
    k, count = f.min_pattern_count()
    if count > t:
        report = find_shift_random_elimination(f, oracle, t, rng_seed)
        report.method = "hybrid"
        report.details["branch"] = "eliminate"
        return report
    start = oracle.queries_made()
    location = binary_search_pattern(f, oracle, k)
    candidates = candidates_from_location(f, k, location)
    for s in candidates:
        if verify_shift(f, oracle, s):
            return _report(
                oracle, start, s, "hybrid", branch="witness", k=k, candidates=len(candidates)
            )
    raise IntegrityError("binary search landed on a location no candidate explains")


def brute_force_find_shift(f: CanonicalFunction, oracle: BitOracle) -> SolveReport:
    start = oracle.queries_made()
    answers = np.array([oracle.query(x) for x in range(f.m + 1)], dtype=np.uint8)
    alive = np.arange(f.n + 1)
    for x, a in enumerate(answers):
        if alive.size <= 1:
            break
        alive = alive[f.bits[alive + x] == a]
    alive = [int(s) for s in alive if np.array_equal(f.bits[s : s + f.m + 1], answers)]
    if len(alive) != 1:
        raise IntegrityError(f"{len(alive)} shifts match the full view; expected exactly one")
    return _report(oracle, start, alive[0], "brute")


def _elim_default(f: CanonicalFunction, oracle: BitOracle, seed: int) -> SolveReport:
    return find_shift_random_elimination(f, oracle, f.min_pattern_count()[1], seed)


SOLVERS: dict[str, Callable[[CanonicalFunction, BitOracle, int], SolveReport]] = {
    "det": lambda f, oracle, seed: find_shift_deterministic(f, oracle),
    "hybrid": find_shift_hybrid,
    "elim": _elim_default,
    "brute": lambda f, oracle, seed: brute_force_find_shift(f, oracle),
}


def solve(name: str, f: CanonicalFunction, oracle: BitOracle, seed: int = 0) -> SolveReport:
    try:
        solver = SOLVERS[name]
    except KeyError:
        raise DomainError(f"unknown algorithm {name!r}; choose from {sorted(SOLVERS)}") from None
    return solver(f, oracle, seed)
