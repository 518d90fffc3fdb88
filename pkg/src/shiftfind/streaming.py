"""Streaming counters for the approximate-counting promise problem.

A counter sees a stream of identical items and must answer 0 when at most
``n`` items arrived and 1 when more than ``m`` did.  Counters expose their
memory as a :class:`StreamState`; the size of that state is the space cost
reported everywhere else.

Randomness is not part of the state.  A counter draws from its own
generator, set by :meth:`StreamCounter.reseed`; two parties that agree on a
seed therefore share randomness without communicating it.
"""

from __future__ import annotations

import copy
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .canonical import CanonicalFunction, InstanceParams
from .errors import DomainError, IntegrityError
from .oracle import DEFAULT_LOG_CAP, BitOracle
from .seeding import derive_seed

__all__ = [
    "StreamState",
    "StreamCounter",
    "DeterministicCounter",
    "MorrisCounter",
    "AmplifiedCounter",
    "CounterSpec",
    "deterministic_counter",
    "morris_counter",
    "amplify",
    "EmpiricalCanonical",
    "empirical_canonical",
    "StreamingOracle",
    "streaming_oracle",
    "recover_count_from_tracking",
]


@dataclass(frozen=True)
class StreamState:
    """A bit-string of exactly ``nbits`` bits, most significant first."""

    value: int
    nbits: int

    def __post_init__(self) -> None:
        if self.nbits < 0 or self.value < 0 or self.value.bit_length() > self.nbits:
            raise DomainError(f"value {self.value} does not fit in {self.nbits} bits")

    def to_bytes(self) -> bytes:
        """4-byte big-endian bit length, then the bits packed into whole bytes."""
        return self.nbits.to_bytes(4, "big") + self.value.to_bytes((self.nbits + 7) // 8, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> StreamState:
        nbits = int.from_bytes(data[:4], "big")
        payload = data[4:]
        if len(payload) != (nbits + 7) // 8:
            raise DomainError(f"payload of {len(payload)} bytes cannot hold {nbits} bits")
        return cls(int.from_bytes(payload, "big"), nbits)

    def bitstring(self) -> str:
        return format(self.value, f"0{self.nbits}b") if self.nbits else ""

    def __add__(self, other: StreamState) -> StreamState:
        return StreamState((self.value << other.nbits) | other.value, self.nbits + other.nbits)

    def split(self, widths: list[int]) -> list[StreamState]:
        if sum(widths) != self.nbits:
            raise DomainError(f"widths sum to {sum(widths)}, state has {self.nbits} bits")
        parts = []
        shift = self.nbits
        for w in widths:
            shift -= w
            parts.append(StreamState((self.value >> shift) & ((1 << w) - 1), w))
        return parts


class StreamCounter:
    """Interface shared by all counters."""

    def insert(self, count: int = 1) -> None:
        raise NotImplementedError

    def output(self) -> int:
        raise NotImplementedError

    def snapshot(self) -> StreamState:
        raise NotImplementedError

    def restore(self, state: StreamState) -> None:
        raise NotImplementedError

    def state_size_bits(self) -> int:
        raise NotImplementedError

    def reseed(self, seed: int) -> None:
        pass

    def clone(self) -> StreamCounter:
        return copy.deepcopy(self)


class DeterministicCounter(StreamCounter):
    """Exact count, saturating at ``m + n + 1``."""

    def __init__(self, params: InstanceParams) -> None:
        self.params = params
        self._cap = params.m + params.n + 1
        self._width = self._cap.bit_length()
        self.count = 0

    def insert(self, count: int = 1) -> None:
        if count < 0:
            raise DomainError("cannot insert a negative number of items")
        self.count = min(self.count + count, self._cap)

    def output(self) -> int:
        return int(self.count > self.params.m)

    def snapshot(self) -> StreamState:
        return StreamState(self.count, self._width)

    def restore(self, state: StreamState) -> None:
        if state.nbits != self._width or state.value > self._cap:
            raise DomainError("state does not belong to this counter")
        self.count = state.value

    def state_size_bits(self) -> int:
        return self._width


class MorrisCounter(StreamCounter):
    """Morris counter with base ``1 + epsilon``.

    The exponent X goes up by one with probability ``base**-X`` per item and
    saturates once the estimate ``(base**X - 1) / epsilon`` passes
    ``4 (m + n)``.  The decision bit compares the estimate with ``sqrt(n m)``.
    Runs of items are consumed by drawing geometric waiting times, so
    ``insert(count)`` costs O(X) rather than O(count).
    """

    def __init__(self, params: InstanceParams, epsilon: float = 1.0, seed: int = 0) -> None:
        if not epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {epsilon}")
        self.params = params
        self.epsilon = float(epsilon)
        self.base = 1.0 + self.epsilon
        self.threshold = math.sqrt(params.n * params.m)
        self._cap = math.ceil(math.log(4 * self.epsilon * (params.m + params.n) + 1, self.base))
        self._width = self._cap.bit_length()
        self.exponent = 0
        self.reseed(seed)

    def reseed(self, seed: int) -> None:
        self._rng = np.random.default_rng(seed)

    def insert(self, count: int = 1) -> None:
        if count < 0:
            raise DomainError("cannot insert a negative number of items")
        remaining = count
        while remaining > 0 and self.exponent < self._cap:
            p = self.base ** (-self.exponent)
            wait = 1 if p >= 1.0 else int(self._rng.geometric(p))
            if wait > remaining:
                break
            remaining -= wait
            self.exponent += 1

    def estimate(self) -> float:
        return (self.base**self.exponent - 1.0) / self.epsilon

    def output(self) -> int:
        return int(self.estimate() > self.threshold)

    def snapshot(self) -> StreamState:
        return StreamState(self.exponent, self._width)

    def restore(self, state: StreamState) -> None:
        if state.nbits != self._width or state.value > self._cap:
            raise DomainError("state does not belong to this counter")
        self.exponent = state.value

    def state_size_bits(self) -> int:
        return self._width


class AmplifiedCounter(StreamCounter):
    """Majority vote over independently seeded copies."""

    def __init__(self, factory, copies: int, seed: int = 0) -> None:
        if copies < 1 or copies % 2 == 0:
            raise DomainError(f"copies must be odd and >= 1, got {copies}")
        self.copies = [factory(derive_seed(seed, i)) for i in range(copies)]

    def reseed(self, seed: int) -> None:
        for i, c in enumerate(self.copies):
            c.reseed(derive_seed(seed, i))

    def insert(self, count: int = 1) -> None:
        for c in self.copies:
            c.insert(count)

    def output(self) -> int:
        ones = sum(c.output() for c in self.copies)
        return int(2 * ones > len(self.copies))

    def snapshot(self) -> StreamState:
        state = StreamState(0, 0)
        for c in self.copies:
            state = state + c.snapshot()
        return state

    def restore(self, state: StreamState) -> None:
        parts = state.split([c.state_size_bits() for c in self.copies])
        for c, part in zip(self.copies, parts):
            c.restore(part)

    def state_size_bits(self) -> int:
        return sum(c.state_size_bits() for c in self.copies)


def deterministic_counter(params: InstanceParams) -> DeterministicCounter:
    return DeterministicCounter(params)


def morris_counter(params: InstanceParams, epsilon: float = 1.0, seed: int = 0) -> MorrisCounter:
    return MorrisCounter(params, epsilon, seed)


def amplify(factory, copies: int, seed: int = 0) -> AmplifiedCounter:
    """``factory(seed) -> StreamCounter``; copy i is seeded from ``(seed, i)``."""
    return AmplifiedCounter(factory, copies, seed)


@dataclass(frozen=True)
class CounterSpec:
    """Picklable counter factory: ``spec(seed)`` builds a fresh counter."""

    kind: str
    params: InstanceParams
    epsilon: float = 1.0
    copies: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("det", "morris"):
            raise DomainError(f"unknown counter kind {self.kind!r}; choose det or morris")
        if self.copies < 1 or self.copies % 2 == 0:
            raise DomainError(f"copies must be odd and >= 1, got {self.copies}")

    def _single(self, seed: int) -> StreamCounter:
        if self.kind == "det":
            return DeterministicCounter(self.params)
        return MorrisCounter(self.params, self.epsilon, seed)

    def __call__(self, seed: int) -> StreamCounter:
        if self.copies == 1:
            return self._single(seed)
        return AmplifiedCounter(self._single, self.copies, seed)

    @property
    def label(self) -> str:
        return "det" if self.kind == "det" else f"morris(eps={self.epsilon:g})"


@dataclass
class EmpiricalCanonical:
    """Per-length majority output and agreement margin of a counter family."""

    params: InstanceParams
    trials: int
    majority: np.ndarray
    margin: np.ndarray
    ties: list[int] = field(default_factory=list)

    @property
    def min_margin(self) -> float:
        return float(self.margin.min())

    @property
    def violations(self) -> list[int]:
        """Lengths where the majority contradicts the promise."""
        n, m = self.params.n, self.params.m
        return [
            ell
            for ell, bit in enumerate(self.majority)
            if (ell <= n and bit == 1) or (ell > m and bit == 0)
        ]

    def low_margin_lengths(self, level: float = 0.9) -> list[int]:
        return [int(ell) for ell in np.flatnonzero(self.margin < level)]

    def as_function(self) -> CanonicalFunction | None:
        """The majority profile as a canonical function, or None if it breaks the promise."""
        if self.violations:
            return None
        n, m = self.params.n, self.params.m
        return CanonicalFunction(self.params, "".join(str(int(b)) for b in self.majority[n + 1 : m + 1]))


def _length_outputs(factory, seed: int, ell: int, trials: int) -> list[int]:
    outs = []
    for j in range(trials):
        c = factory(derive_seed(seed, ell, j))
        c.insert(ell)
        outs.append(c.output())
    return outs


def empirical_canonical(
    factory, params: InstanceParams, trials_per_length: int, seed: int, jobs: int = 1
) -> EmpiricalCanonical:
    """Run fresh counters on every length in ``[0, m + n]`` and tally their outputs.

    Trial j at length l is seeded from ``(seed, l, j)``, so the result does
    not depend on ``jobs``.
    """
    if trials_per_length < 1:
        raise DomainError("need at least one trial per length")
    lengths = range(params.domain_max + 1)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(
                pool.map(
                    _length_outputs,
                    [factory] * len(lengths),
                    [seed] * len(lengths),
                    lengths,
                    [trials_per_length] * len(lengths),
                )
            )
    else:
        rows = [_length_outputs(factory, seed, ell, trials_per_length) for ell in lengths]
    ones = np.array([sum(r) for r in rows])
    zeros = trials_per_length - ones
    majority = (ones > zeros).astype(np.uint8)
    margin = np.maximum(ones, zeros) / trials_per_length
    ties = [int(ell) for ell in np.flatnonzero(ones == zeros)]
    return EmpiricalCanonical(params, trials_per_length, majority, margin, ties)


class StreamingOracle(BitOracle):
    """Query access to the shifted canonical function through a counter's state.

    Each query restores a fresh copy from the snapshot taken at construction,
    reseeds it from ``(query_seed, x)``, inserts ``x`` items and reads the
    output.  Reseeding per index keeps repeated queries consistent.
    """

    def __init__(
        self,
        counter: StreamCounter,
        f: CanonicalFunction,
        query_seed: int = 0,
        log_cap: int = DEFAULT_LOG_CAP,
    ) -> None:
        super().__init__(f.params.domain_max, log_cap)
        self.message = counter.snapshot()
        self._template = counter.clone()
        self.query_seed = query_seed

    def _answer(self, x: int) -> int:
        fresh = self._template.clone()
        fresh.restore(self.message)
        fresh.reseed(derive_seed(self.query_seed, x))
        fresh.insert(x)
        return fresh.output()


def streaming_oracle(
    counter: StreamCounter, f: CanonicalFunction, query_seed: int = 0
) -> StreamingOracle:
    return StreamingOracle(counter, f, query_seed)


def recover_count_from_tracking(counter: StreamCounter, f: CanonicalFunction) -> int:
    """Recover how many items ``counter`` has seen, given its canonical function.

    Works on a copy: feeds items one by one until the output turns 1 after
    ``x`` extra items, then returns ``first_one - x``.
    """
    probe = counter.clone()
    for extra in range(f.params.domain_max + 2):
        if probe.output() == 1:
            return f.first_one - extra
        probe.insert(1)
    raise IntegrityError(f"output never reached 1 within {f.params.domain_max + 1} insertions")
