import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from statcat._exact import fmt, nullspace, parse_rational, rank, to_fraction
from statcat.simplex import solve_feasibility, verify_farkas


@pytest.mark.parametrize("text,value", [("3/16", F(3, 16)), ("-2", F(-2)), ("6/8", F(3, 4)), ("0", F(0))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["1/0", "0.5", "1e3", "", "a/b", "1//2", "2/-3"])
def test_parse_rational_rejects(text):
    with pytest.raises(ValueError):
        parse_rational(text)


def test_to_fraction_refuses_inexact():
    with pytest.raises(TypeError):
        to_fraction(0.5)
    with pytest.raises(TypeError):
        to_fraction(True)
    assert to_fraction("1/3") == F(1, 3)


@given(st.fractions())
def test_fmt_round_trips(q):
    assert parse_rational(fmt(q)) == q


def test_nullspace_of_mean_operator():
    # one row averaging three coordinates: a 2-dimensional kernel
    basis = nullspace([[F(1, 3)] * 3], 3)
    assert basis == [[F(1), F(-1), F(0)], [F(1), F(0), F(-1)]]
    assert rank([[F(1, 3)] * 3], 3) == 1


def test_nullspace_trivial_for_identity():
    assert nullspace([[1, 0], [0, 1]], 2) == []


def test_feasible_system():
    # x1 + x2 = 1, x1 - x2 = 0
    res = solve_feasibility([[F(1), F(1)], [F(1), F(-1)]], [F(1), F(0)])
    assert res.feasible and res.x == (F(1, 2), F(1, 2))


def test_infeasible_system_has_farkas_certificate():
    # x1 + x2 = 1 and x1 + x2 = 2 cannot both hold
    A = [[F(1), F(1)], [F(1), F(1)]]
    b = [F(1), F(2)]
    res = solve_feasibility(A, b)
    assert not res.feasible
    assert verify_farkas(A, b, res.farkas)


def test_negative_right_hand_side():
    # x >= 0 with -x = -3
    res = solve_feasibility([[F(-1)]], [F(-3)])
    assert res.x == (F(3),)
    res = solve_feasibility([[F(1)]], [F(-3)])
    assert not res.feasible and verify_farkas([[F(1)]], [F(-3)], res.farkas)


def _random_system(rng, m, n):
    A = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(m)]
    if rng.random() < 0.5:
        x = [F(rng.randint(0, 3), rng.randint(1, 3)) for _ in range(n)]
        b = [sum(a * v for a, v in zip(row, x)) for row in A]
    else:
        b = [F(rng.randint(-4, 4)) for _ in range(m)]
    return A, b


def test_simplex_answers_are_always_verified():
    rng = random.Random(11)
    for _ in range(300):
        A, b = _random_system(rng, rng.randint(1, 4), rng.randint(1, 5))
        res = solve_feasibility(A, b)
        if res.feasible:
            assert all(v >= 0 for v in res.x)
            assert all(sum(a * v for a, v in zip(row, res.x)) == bi for row, bi in zip(A, b))
        else:
            assert verify_farkas(A, b, res.farkas)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_simplex_is_deterministic(seed):
    A, b = _random_system(random.Random(seed), 3, 4)
    assert solve_feasibility(A, b) == solve_feasibility(A, b)
