"""Canonical functions of approximate counters and their shifted views.

A canonical function over stream lengths ``0..m+n`` reads as::

    F = 0^(n+1) . P . 1^n        with len(P) == m - n

where ``P`` is a free middle pattern.  A shift ``s`` in ``[0, n]`` gives
the view ``x -> F(s + x)``; past ``m + n`` the view keeps answering 1.
"""

from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DomainError
from .seeding import rng

__all__ = [
    "InstanceParams",
    "CanonicalFunction",
    "check_shift",
    "threshold_t",
    "generate",
    "random_function",
    "step_function",
    "periodic_function",
    "explicit_function",
    "load_instance",
    "save_instance",
]


@dataclass(frozen=True)
class InstanceParams:
    """Thresholds ``n < m``; the counter must say 0 up to ``n`` and 1 past ``m``."""

    n: int
    m: int

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "n", operator.index(self.n))
            object.__setattr__(self, "m", operator.index(self.m))
        except TypeError:
            raise DomainError(f"n and m must be integers, got {self.n!r}, {self.m!r}") from None
        if not 1 <= self.n < self.m:
            raise DomainError(f"need 1 <= n < m, got n={self.n}, m={self.m}")

    @classmethod
    def from_ratio(cls, n: int, c: float) -> InstanceParams:
        m = c * n
        if m != int(m):
            raise DomainError(f"c*n must be an integer, got c={c}, n={n}")
        return cls(n, int(m))

    @property
    def c(self) -> float:
        return self.m / self.n

    @property
    def pattern_length(self) -> int:
        return self.m - self.n

    @property
    def domain_max(self) -> int:
        """Largest stream length the canonical function is defined on."""
        return self.m + self.n


def check_shift(params: InstanceParams, s: int) -> int:
    if not 0 <= s <= params.n:
        raise DomainError(f"shift {s} outside [0, {params.n}]")
    return int(s)


@dataclass(frozen=True)
class CanonicalFunction:
    params: InstanceParams
    pattern: str

    def __post_init__(self) -> None:
        if len(self.pattern) != self.params.pattern_length:
            raise DomainError(
                f"pattern length {len(self.pattern)} != m - n = {self.params.pattern_length}"
            )
        if set(self.pattern) - {"0", "1"}:
            raise DomainError("pattern must be a 0/1 string")

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def m(self) -> int:
        return self.params.m

    @cached_property
    def bits(self) -> np.ndarray:
        """The whole function as a read-only uint8 array of length ``m + n + 1``."""
        n, m = self.n, self.m
        out = np.empty(m + n + 1, dtype=np.uint8)
        out[: n + 1] = 0
        out[n + 1 : m + 1] = np.frombuffer(self.pattern.encode("ascii"), dtype=np.uint8) - ord("0")
        out[m + 1 :] = 1
        out.setflags(write=False)
        return out

    def __str__(self) -> str:
        return "0" * (self.n + 1) + self.pattern + "1" * self.n

    def eval(self, x: int) -> int:
        if not 0 <= x <= self.params.domain_max:
            raise DomainError(f"index {x} outside [0, {self.params.domain_max}]")
        return int(self.bits[x])

    def shifted_eval(self, s: int, x: int) -> int:
        check_shift(self.params, s)
        if not 0 <= x <= self.params.domain_max:
            raise DomainError(f"index {x} outside [0, {self.params.domain_max}]")
        return int(self.bits[min(s + x, self.params.domain_max)])

    @cached_property
    def first_one(self) -> int:
        """Smallest x with F(x) = 1; lies in ``[n+1, m+1]``."""
        return self.n + 1 + _find_or(self.pattern, "1", self.params.pattern_length)

    @cached_property
    def last_zero(self) -> int:
        """Largest x with F(x) = 0; lies in ``[n, m]``."""
        return self.n + 1 + self.pattern.rfind("0")

    def pattern_positions(self, k: int) -> np.ndarray:
        """All x in ``[0, m+n-k]`` with F(x) = 0 and F(x+k) = 1."""
        if not 1 <= k <= self.n:
            raise DomainError(f"gap k={k} outside [1, {self.n}]")
        b = self.bits
        return np.flatnonzero((b[:-k] == 0) & (b[k:] == 1))

    def count_pattern(self, k: int) -> int:
        return int(self.pattern_positions(k).size)

    @cached_property
    def _pattern_counts(self) -> np.ndarray:
        # counts[k] = sum_x zero[x] * one[x + k], one FFT cross-correlation for all k
        b = self.bits
        size = 1 << (2 * b.size - 1).bit_length()
        ones = np.fft.rfft(b.astype(np.float64), size)
        zeros_rev = np.fft.rfft((1.0 - b)[::-1], size)
        corr = np.fft.irfft(ones * zeros_rev, size)
        counts = np.rint(corr[b.size : b.size + self.n]).astype(np.int64)
        counts.setflags(write=False)
        return counts

    def pattern_counts(self) -> np.ndarray:
        """``counts[k-1] == count_pattern(k)`` for every k in ``[1, n]``."""
        return self._pattern_counts

    def min_pattern_count(self) -> tuple[int, int]:
        """The gap k with the fewest pattern occurrences (smallest k on ties) and its count."""
        counts = self.pattern_counts()
        i = int(np.argmin(counts))
        return i + 1, int(counts[i])

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "pattern": self.pattern}

    @classmethod
    def from_dict(cls, data: dict) -> CanonicalFunction:
        try:
            n, m, pattern = data["n"], data["m"], data["pattern"]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"instance needs keys n, m, pattern: {exc}") from None
        return cls(InstanceParams(n, m), pattern)

    def serialize(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def parse(cls, text: str) -> CanonicalFunction:
        return cls.from_dict(json.loads(text))


def _find_or(s: str, ch: str, default: int) -> int:
    i = s.find(ch)
    return default if i < 0 else i


def threshold_t(n: int, m: int) -> int:
    """Scenario threshold ``max(1, floor(n / 2^sqrt(log n * loglog m)))``, logs base 2."""
    if n < 4 or m <= n:
        raise DomainError(f"threshold needs n >= 4 and m > n, got n={n}, m={m}")
    exponent = math.sqrt(math.log2(n) * math.log2(math.log2(m)))
    return max(1, math.floor(n / 2.0**exponent))


def explicit_function(params: InstanceParams, bits: str) -> CanonicalFunction:
    return CanonicalFunction(params, bits)


def step_function(params: InstanceParams, position: int) -> CanonicalFunction:
    """F(x) = 0 iff x <= position."""
    if not params.n <= position <= params.m:
        raise DomainError(f"step position {position} outside [{params.n}, {params.m}]")
    zeros = position - params.n
    return CanonicalFunction(params, "0" * zeros + "1" * (params.pattern_length - zeros))


def periodic_function(params: InstanceParams, period: int) -> CanonicalFunction:
    """Pattern built from repeats of ``0^(period//2) 1^(period - period//2)``."""
    if not 1 <= period <= params.pattern_length:
        raise DomainError(f"period {period} outside [1, {params.pattern_length}]")
    block = "0" * (period // 2) + "1" * (period - period // 2)
    reps = -(-params.pattern_length // period)
    return CanonicalFunction(params, (block * reps)[: params.pattern_length])


def random_function(params: InstanceParams, seed: int) -> CanonicalFunction:
    bits = rng(seed).integers(0, 2, size=params.pattern_length, dtype=np.uint8)
    return CanonicalFunction(params, (bits + ord("0")).tobytes().decode("ascii"))


_GENERATORS = {
    "random": random_function,
    "step": step_function,
    "periodic": periodic_function,
    "explicit": explicit_function,
}


def generate(kind: str, params: InstanceParams, arg) -> CanonicalFunction:
    """Build an instance of ``kind`` in {random, step, periodic, explicit}.

    ``arg`` is the seed, step position, period or pattern string respectively.
    """
    try:
        build = _GENERATORS[kind]
    except KeyError:
        raise DomainError(f"unknown generator kind {kind!r}") from None
    return build(params, arg)


def load_instance(path: str | Path) -> CanonicalFunction:
    return CanonicalFunction.parse(Path(path).read_text(encoding="utf-8"))


def save_instance(f: CanonicalFunction, path: str | Path) -> None:
    Path(path).write_text(f.serialize() + "\n", encoding="utf-8")
