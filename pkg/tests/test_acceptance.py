"""Exit criteria.  Each test records one PASS/FAIL line in the terminal summary."""

import csv
import itertools
import math
import re
import time

import numpy as np
import pytest

from shiftfind.canonical import CanonicalFunction, InstanceParams, generate, random_function, step_function
from shiftfind.cli import main
from shiftfind.oracle import BitOracle, make_oracle, with_budget
from shiftfind.protocol import run_message_protocol
from shiftfind.seeding import rng
from shiftfind.solvers import (
    binary_search_pattern,
    brute_force_find_shift,
    find_shift_deterministic,
    find_shift_hybrid,
    find_shift_random_elimination,
    grid_step,
    verify_shift,
)
from shiftfind.streaming import CounterSpec, DeterministicCounter, recover_count_from_tracking, streaming_oracle

from conftest import all_instances

pytestmark = pytest.mark.acceptance


def record(log, name, ok, detail):
    log.append((name, bool(ok), detail))
    assert ok, f"{name}: {detail}"


def patterns(length):
    for bits in itertools.product("01", repeat=length):
        yield "".join(bits)


def test_ac01_witness_exactness(acceptance_log):
    start = time.perf_counter()
    checks = bad = 0
    for f in all_instances(16):
        for s_star in range(f.n + 1):
            for s in range(f.n + 1):
                oracle = make_oracle(f, s_star)
                verdict = verify_shift(f, oracle, s)
                checks += 1
                bad += oracle.queries_made() != 2 or verdict != (s == s_star)
    elapsed = time.perf_counter() - start
    record(acceptance_log, "AC1 witness exactness", bad == 0 and elapsed < 60,
           f"{checks} (f, s, s*) checks, {bad} violations, {elapsed:.1f}s")


def test_ac02_deterministic_solver(acceptance_log):
    start = time.perf_counter()
    bad = runs = 0
    for n in range(1, 7):
        for m in (2 * n, 3 * n):
            g = grid_step(m)
            for pattern in patterns(m - n):
                f = CanonicalFunction(InstanceParams(n, m), pattern)
                for s in range(n + 1):
                    report = find_shift_deterministic(f, make_oracle(f, s))
                    runs += 1
                    bad += report.answer != s or report.details["candidates"] > g
    params = InstanceParams(512, 1024)
    g = grid_step(params.m)
    cap = params.m // g + 2 + 2 * g
    gen = rng(2024)
    for i in range(10_000):
        f = random_function(params, 10_000 + i)
        s = int(gen.integers(0, params.n + 1))
        report = find_shift_deterministic(f, with_budget(make_oracle(f, s), cap))
        runs += 1
        bad += report.answer != s or report.details["candidates"] > g
    elapsed = time.perf_counter() - start
    record(acceptance_log, "AC2 deterministic solver", bad == 0 and elapsed < 300,
           f"{runs} runs, {bad} violations, budget cap {cap} at n=512, {elapsed:.1f}s")


def test_ac03_scaling_law(acceptance_log, tmp_path):
    start = time.perf_counter()
    out = tmp_path / "bench.csv"
    n_list = [str(2**e) for e in range(8, 15)]
    code = main(["bench", "--n", *n_list, "--c", "2", "--algorithm", "det", "brute",
                 "--trials", "20", "--seed", "0", "-o", str(out)])
    rows = list(csv.DictReader(out.open()))
    slopes = {}
    for name in ("det", "brute"):
        sel = [r for r in rows if r["algorithm"] == name]
        x = np.log([float(r["m"]) for r in sel])
        y = np.log([float(r["queries"]) for r in sel])
        A = np.vstack([x, np.ones_like(x)]).T
        slopes[name] = float(np.linalg.lstsq(A, y, rcond=None)[0][0])
    elapsed = time.perf_counter() - start
    ok = (code == 0 and len(rows) == 7 * 2 * 20 and 0.45 <= slopes["det"] <= 0.55
          and 0.99 <= slopes["brute"] <= 1.01 and elapsed < 300)
    record(acceptance_log, "AC3 scaling law", ok,
           f"slope det={slopes['det']:.4f} in [0.45,0.55], brute={slopes['brute']:.4f} in [0.99,1.01], {elapsed:.1f}s")


def test_ac04_elimination_pressure(acceptance_log):
    start = time.perf_counter()
    checks = bad = 0
    for n in range(1, 20):
        for m in range(n + 1, 21 - n):
            L = m - n
            codes = np.arange(2**L, dtype=np.int64)
            middle = ((codes[:, None] >> np.arange(L - 1, -1, -1)) & 1).astype(np.uint8)
            full = np.hstack([np.zeros((2**L, n + 1), np.uint8), middle, np.ones((2**L, n), np.uint8)])
            # differing[(s, t)][pattern] = #{r in [1, m] : F(s + r) != F(t + r)}
            differing = {
                (s, t): (full[:, s + 1 : s + m + 1] != full[:, t + 1 : t + m + 1]).sum(axis=1)
                for s in range(n + 1)
                for t in range(s + 1, n + 1)
            }
            for i in range(2**L):
                f = CanonicalFunction(InstanceParams(n, m), "".join(map(str, middle[i])))
                counts = {k: f.count_pattern(k) for k in range(1, n + 1)}
                for (s, t), diff in differing.items():
                    checks += 1
                    bad += int(diff[i]) < counts[t - s]
    elapsed = time.perf_counter() - start
    record(acceptance_log, "AC4 elimination pressure", bad == 0 and elapsed < 120,
           f"{checks} (f, s, s*) pairs, {bad} violations, {elapsed:.1f}s")


def test_ac05_hybrid_success(acceptance_log):
    start = time.perf_counter()
    params = InstanceParams(64, 128)
    bound = 8 * math.sqrt(params.m * math.log2(params.m))
    gen = rng(77)
    summary = {}
    for label in ("random", "step"):
        wins = wrong = queries = 0
        for trial in range(200):
            if label == "random":
                f = random_function(params, 5000 + trial)
            else:
                f = step_function(params, int(gen.integers(params.n, params.m + 1)))
            s = int(gen.integers(0, params.n + 1))
            report = find_shift_hybrid(f, make_oracle(f, s), trial)
            wins += report.answer == s
            wrong += report.answer not in (None, s)
            queries += report.queries
        summary[label] = (wins / 200, wrong, queries / 200)
    elapsed = time.perf_counter() - start
    ok = all(rate >= 0.9 and wrong == 0 and mean_q <= bound for rate, wrong, mean_q in summary.values())
    detail = ", ".join(f"{k}: rate={r:.3f} wrong={w} mean_q={q:.1f}" for k, (r, w, q) in summary.items())
    record(acceptance_log, "AC5 hybrid success", ok and elapsed < 120,
           f"{detail}; mean-query bound {bound:.1f}; {elapsed:.1f}s")


class ScriptedOracle(BitOracle):
    """Replays a fixed answer script; signals when the script runs out."""

    class Exhausted(Exception):
        pass

    def __init__(self, domain_max, script):
        super().__init__(domain_max)
        self.script = script
        self.answers = {}

    def _answer(self, x):
        i = self._count - 1
        if i >= len(self.script):
            raise self.Exhausted
        self.answers[x] = self.script[i]
        return self.script[i]


def _all_search_paths(n, m):
    """Run bisection under every possible answer sequence (covers every F and s*)."""
    f = CanonicalFunction(InstanceParams(n, m), "0" * (m - n))
    stack = [[]]
    while stack:
        script = stack.pop()
        oracle = ScriptedOracle(m + n, script)
        try:
            loc = binary_search_pattern(f, oracle, 1)
        except ScriptedOracle.Exhausted:
            stack.extend([script + [0], script + [1]])
            continue
        yield loc, oracle


def test_ac06_binary_search_budget(acceptance_log):
    start = time.perf_counter()
    paths = bad = real = 0
    for n in range(1, 32):
        for m in range(n + 1, 65 - n):
            limit = math.ceil(math.log2(m + 1))
            for loc, oracle in _all_search_paths(n, m):
                paths += 1
                left = 0 if loc == 0 else oracle.answers.get(loc)
                right = 1 if loc + 1 == m + 1 else oracle.answers.get(loc + 1)
                bad += oracle.queries_made() > limit or left != 0 or right != 1
            # concrete instances: all patterns when small, seeded random ones otherwise
            if m - n <= 10:
                fs = [CanonicalFunction(InstanceParams(n, m), p) for p in patterns(m - n)]
            else:
                fs = [random_function(InstanceParams(n, m), 31 * n + m + j) for j in range(8)]
            for f in fs:
                for s in range(f.n + 1):
                    oracle = with_budget(make_oracle(f, s), limit)
                    loc = binary_search_pattern(f, oracle, 1)
                    real += 1
                    bad += f.shifted_eval(s, loc) != 0 or f.shifted_eval(s, loc + 1) != 1
    elapsed = time.perf_counter() - start
    record(acceptance_log, "AC6 binary search budget", bad == 0,
           f"{paths} answer paths over all (n, m) with m+n<=64, {real} concrete runs, {bad} violations, {elapsed:.1f}s")


def test_ac07_reduction_fidelity(acceptance_log):
    start = time.perf_counter()
    answer_bad = proto_bad = cases = 0
    for n in range(1, 33):
        for m in (2 * n, 3 * n):
            params = InstanceParams(n, m)
            f = step_function(params, m)
            spec = CounterSpec("det", params)
            per_copy = math.ceil(math.log2(m + n + 2))
            for s in range(n + 1):
                counter = DeterministicCounter(params)
                counter.insert(s)
                via_stream = streaming_oracle(counter, f)
                direct = make_oracle(f, s)
                xs = range(m + n + 1)
                answer_bad += [via_stream.query(x) for x in xs] != [direct.query(x) for x in xs]
                for copies in (1, 3):
                    tr = run_message_protocol(spec, f, "full_shift", s, copies=copies, seed=s)
                    cases += 1
                    proto_bad += not tr.success or tr.message_bits != copies * per_copy
    elapsed = time.perf_counter() - start
    record(acceptance_log, "AC7 reduction fidelity", answer_bad == 0 and proto_bad == 0,
           f"oracle mismatches={answer_bad}, protocol failures={proto_bad} of {cases}, {elapsed:.1f}s")


def _pd_check(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, float(re.search(r"min_margin=([0-9.]+)", out).group(1))


def test_ac08_pd_discrimination(acceptance_log, capsys):
    start = time.perf_counter()
    det_code, det_margin = _pd_check(
        ["pd-check", "--counter", "det", "--n", "256", "--m", "512", "--trials", "9", "--seed", "0"], capsys
    )
    morris = [
        _pd_check(["pd-check", "--counter", "morris", "--epsilon", "1", "--n", "256", "--m", "512",
                   "--trials", "99", "--seed", str(seed)], capsys)
        for seed in range(5)
    ]
    rejected = sum(code == 1 and margin < 0.9 for code, margin in morris)
    elapsed = time.perf_counter() - start
    ok = det_code == 0 and det_margin == 1.0 and rejected >= 4 and elapsed < 180
    record(acceptance_log, "AC8 PD discrimination", ok,
           f"det exit={det_code} margin={det_margin}; morris rejected in {rejected}/5 seeds "
           f"(margins {[m for _, m in morris]}), {elapsed:.1f}s")


def test_ac09_tracking_recovery(acceptance_log):
    bad = cases = 0
    for n in range(1, 65):
        for m in (2 * n, 3 * n):
            params = InstanceParams(n, m)
            f = step_function(params, m)
            for s in range(n + 1):
                counter = DeterministicCounter(params)
                counter.insert(s)
                cases += 1
                bad += recover_count_from_tracking(counter, f) != s
    record(acceptance_log, "AC9 tracking recovery", bad == 0, f"{cases} cases, {bad} mismatches")


def test_ac10_cross_oracle_agreement(acceptance_log):
    gen = rng(4242)
    disagreements = fails = 0
    for i in range(1000):
        n = int(gen.integers(1, 65))
        m = int(gen.integers(n + 1, 4 * n + 2))
        f = random_function(InstanceParams(n, m), 90_000 + i)
        s = int(gen.integers(0, n + 1))
        truth = brute_force_find_shift(f, make_oracle(f, s)).answer
        others = [
            find_shift_deterministic(f, make_oracle(f, s)).answer,
            find_shift_hybrid(f, make_oracle(f, s), i).answer,
            find_shift_random_elimination(f, make_oracle(f, s), f.min_pattern_count()[1], i).answer,
        ]
        fails += sum(a is None for a in others)
        disagreements += truth != s or any(a not in (None, truth) for a in others)
    record(acceptance_log, "AC10 cross-oracle agreement", disagreements == 0,
           f"1000 instances, {disagreements} disagreements, {fails} FAILs (permitted)")
