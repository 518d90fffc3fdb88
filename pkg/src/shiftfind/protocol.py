"""One-way message protocols built on a streaming counter.

Alice loads a counter with ``s_star`` items and sends its memory.  Bob
restores the memory, turns it into query access to the shifted canonical
function, and runs a shift-finding routine to recover ``s_star`` (or, in
the bucket strategy, the representative of its bucket).  Both parties seed
their counters from the same root seed, which stands in for shared
randomness.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .canonical import CanonicalFunction, InstanceParams, check_shift, step_function
from .errors import DomainError, IntegrityError
from .oracle import make_oracle
from .seeding import derive_seed
from .solvers import binary_search_pattern, find_shift_hybrid
from .streaming import AmplifiedCounter, CounterSpec, StreamState, streaming_oracle

__all__ = [
    "Buckets",
    "Transcript",
    "build_buckets",
    "run_message_protocol",
    "ProtocolConfig",
    "declared_function",
    "protocol_sweep",
    "summarize",
    "write_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = [
    "strategy",
    "counter",
    "n",
    "m",
    "copies",
    "seed",
    "s_star",
    "message_bits",
    "queries",
    "success",
]


@dataclass
class Buckets:
    """Shifts grouped by where the gap-k bisection lands on their view."""

    k: int
    location_of: dict[int, int]
    members: dict[int, list[int]]

    @property
    def representatives(self) -> dict[int, int]:
        return {loc: shifts[0] for loc, shifts in self.members.items()}

    @property
    def alphabet(self) -> list[int]:
        return sorted(self.representatives.values())

    def representative(self, location: int) -> int | None:
        shifts = self.members.get(location)
        return shifts[0] if shifts else None


def build_buckets(f: CanonicalFunction, k: int = 1) -> Buckets:
    location_of = {}
    members: dict[int, list[int]] = {}
    for s in range(f.n + 1):
        loc = binary_search_pattern(f, make_oracle(f, s, log_cap=0), k)
        location_of[s] = loc
        members.setdefault(loc, []).append(s)
    return Buckets(k, location_of, members)


@dataclass
class Transcript:
    alice_input: int
    bob_output: int | None
    message_bits: int
    simulated_queries: int
    message: bytes = field(default=b"", repr=False)

    @property
    def success(self) -> bool:
        return self.bob_output == self.alice_input


def run_message_protocol(
    factory,
    f: CanonicalFunction,
    strategy: str,
    s_star: int,
    copies: int = 1,
    seed: int = 0,
    k: int = 1,
    buckets: Buckets | None = None,
) -> Transcript:
    """Simulate one round of the protocol.

    ``strategy`` is ``"full_shift"`` (Bob runs the hybrid solver) or
    ``"bucket"`` (Bob bisects for the gap-``k`` pattern and outputs the
    bucket representative; ``s_star`` must then be a representative).
    """
    check_shift(f.params, s_star)
    if strategy == "bucket":
        buckets = buckets if buckets is not None and buckets.k == k else build_buckets(f, k)
        if s_star not in buckets.alphabet:
            raise DomainError(f"s_star={s_star} is not a bucket representative")
    elif strategy != "full_shift":
        raise DomainError(f"unknown strategy {strategy!r}")

    alice = AmplifiedCounter(factory, copies, seed)
    alice.insert(s_star)
    message = alice.snapshot().to_bytes()

    received = StreamState.from_bytes(message)
    bob = AmplifiedCounter(factory, copies, seed)
    bob.restore(received)
    oracle = streaming_oracle(bob, f, query_seed=derive_seed(seed, 1))
    try:
        if strategy == "full_shift":
            answer = find_shift_hybrid(f, oracle, derive_seed(seed, 2)).answer
        else:
            answer = buckets.representative(binary_search_pattern(f, oracle, k))
    except IntegrityError:
        # a noisy counter can answer inconsistently with every shift
        answer = None
    return Transcript(s_star, answer, received.nbits, oracle.queries_made(), message)


@dataclass(frozen=True)
class ProtocolConfig:
    strategy: str
    counter: str
    n: int
    m: int
    copies: int = 1
    seed: int = 0
    s_star: int | None = None
    k: int = 1
    epsilon: float = 1.0

    @property
    def params(self) -> InstanceParams:
        return InstanceParams(self.n, self.m)

    @property
    def spec(self) -> CounterSpec:
        return CounterSpec(self.counter, self.params, self.epsilon)


def declared_function(spec: CounterSpec) -> CanonicalFunction:
    """The canonical function a counter is designed to realize.

    Exact for the deterministic counter; for Morris it is the step at the
    decision threshold, which the counter only approximates.
    """
    params = spec.params
    if spec.kind == "det":
        return step_function(params, params.m)
    return step_function(params, min(params.m, max(params.n, math.floor(math.sqrt(params.n * params.m)))))


def _run_config(cfg: ProtocolConfig) -> list[dict]:
    spec = cfg.spec
    f = declared_function(spec)
    buckets = build_buckets(f, cfg.k) if cfg.strategy == "bucket" else None
    if cfg.s_star is not None:
        inputs = [cfg.s_star]
    elif buckets is not None:
        inputs = buckets.alphabet
    else:
        inputs = range(cfg.n + 1)
    rows = []
    for s in inputs:
        tr = run_message_protocol(spec, f, cfg.strategy, s, cfg.copies, cfg.seed, cfg.k, buckets)
        rows.append(
            {
                "strategy": cfg.strategy if cfg.strategy == "full_shift" else f"bucket{cfg.k}",
                "counter": spec.label,
                "n": cfg.n,
                "m": cfg.m,
                "copies": cfg.copies,
                "seed": cfg.seed,
                "s_star": s,
                "message_bits": tr.message_bits,
                "queries": tr.simulated_queries,
                "success": int(tr.success),
            }
        )
    return rows


def protocol_sweep(configs: list[ProtocolConfig], jobs: int = 1) -> list[dict]:
    """One CSV row per (config, s_star); all of [0, n] (or the alphabet) when s_star is None."""
    if not configs:
        raise DomainError("protocol_sweep needs at least one config")
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            chunks = list(pool.map(_run_config, configs))
    else:
        chunks = [_run_config(cfg) for cfg in configs]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: tuple(r[c] for c in CSV_COLUMNS[:7]))
    return rows


def summarize(rows: list[dict]) -> list[dict]:
    """Aggregate per (strategy, counter, n, m, copies, seed): bits, mean queries, success rate."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault(tuple(r[c] for c in CSV_COLUMNS[:6]), []).append(r)
    out = []
    for key, rs in groups.items():
        out.append(
            dict(zip(CSV_COLUMNS[:6], key))
            | {
                "message_bits": max(r["message_bits"] for r in rs),
                "mean_queries": sum(r["queries"] for r in rs) / len(rs),
                "success_rate": sum(r["success"] for r in rs) / len(rs),
            }
        )
    return out


def write_csv(rows: list[dict], stream=None, columns: list[str] = CSV_COLUMNS) -> str:
    buf = stream if stream is not None else io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue() if stream is None else ""
