import pytest

from shiftfind.errors import BudgetExceeded, DomainError
from shiftfind.oracle import make_oracle, with_budget
from shiftfind.solvers import verify_shift

from conftest import all_instances


def test_query_and_count(small_f):
    oracle = make_oracle(small_f, 1)
    assert oracle.queries_made() == 0
    assert oracle.query(2) == 1
    assert oracle.queries_made() == 1
    assert oracle.query_log() == [2]


def test_zero_shift_is_identity(small_f):
    oracle = make_oracle(small_f, 0)
    assert [oracle.query(x) for x in range(7)] == [small_f.eval(x) for x in range(7)]


def test_out_of_range(small_f):
    with pytest.raises(DomainError):
        make_oracle(small_f, 1).query(7)
    with pytest.raises(DomainError):
        make_oracle(small_f, 3)


def test_secret_not_exposed(small_f):
    oracle = make_oracle(small_f, 2)
    public = {name for name in dir(oracle) if not name.startswith("_")}
    assert not any("secret" in name or "shift" in name for name in public)


def test_repeated_queries_agree(small_f):
    oracle = make_oracle(small_f, 1)
    assert [oracle.query(3) for _ in range(5)] == [0] * 5
    assert oracle.queries_made() == 5


def test_log_cap_keeps_count_exact(small_f):
    oracle = make_oracle(small_f, 1, log_cap=3)
    for x in range(6):
        oracle.query(x)
    assert oracle.queries_made() == 6
    assert oracle.query_log() == [0, 1, 2]
    assert oracle.log_truncated


def test_budget():
    from shiftfind.canonical import CanonicalFunction, InstanceParams

    f = CanonicalFunction(InstanceParams(2, 4), "10")
    with pytest.raises(BudgetExceeded):
        with_budget(make_oracle(f, 0), 0).query(0)
    capped = with_budget(make_oracle(f, 1), 3)
    assert [capped.query(x) for x in (0, 1, 2)] == [0, 0, 1]
    with pytest.raises(BudgetExceeded):
        capped.query(3)
    for s in range(3):
        assert verify_shift(f, with_budget(make_oracle(f, 1), 2), s) == (s == 1)


def test_budget_counts_through_to_inner(small_f):
    inner = make_oracle(small_f, 1)
    outer = with_budget(inner, 10)
    outer.query(1)
    outer.query(2)
    assert inner.queries_made() == outer.queries_made() == 2


def test_matches_shifted_eval_exhaustively():
    for f in all_instances(16):
        for s in range(f.n + 1):
            oracle = make_oracle(f, s)
            assert [oracle.query(x) for x in range(f.m + f.n + 1)] == [
                f.shifted_eval(s, x) for x in range(f.m + f.n + 1)
            ]


def test_distinct_shifts_are_distinguishable():
    for f in all_instances(14):
        for s in range(f.n + 1):
            for t in range(s + 1, f.n + 1):
                a = [f.shifted_eval(s, x) for x in range(f.m + 1)]
                b = [f.shifted_eval(t, x) for x in range(f.m + 1)]
                assert a != b
                # the witness positions of the smaller shift separate them
                x1, x2 = f.first_one - s, f.last_zero - s
                assert (f.shifted_eval(s, x1), f.shifted_eval(s, x2)) != (
                    f.shifted_eval(t, x1),
                    f.shifted_eval(t, x2),
                )
