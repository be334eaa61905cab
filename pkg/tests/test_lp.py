from fractions import Fraction as F

from hypothesis import given
from hypothesis import strategies as st

from nsclosure.lp import feasible_point, solve

small = st.integers(-4, 4)


def test_simple_optimum():
    # min -w0 - w1 s.t. w0 + w2 = 1, w1 + w3 = 2
    res = solve([-1, -1, 0, 0], [[1, 0, 1, 0], [0, 1, 0, 1]], [1, 2])
    assert res.status == "optimal" and res.objective == -3
    assert res.x[:2] == [1, 2]


def test_unbounded():
    res = solve([-1, 0], [[1, -1]], [0])
    assert res.status == "unbounded"


def test_infeasible_farkas():
    A, b = [[1, 1], [1, 1]], [1, 2]
    res = feasible_point(A, b)
    assert res.status == "infeasible"
    h = res.farkas
    assert all(sum(h[i] * A[i][j] for i in range(2)) >= 0 for j in range(2))
    assert sum(hi * bi for hi, bi in zip(h, b)) < 0


def test_negative_rhs_handled():
    res = feasible_point([[-1, 0], [0, 1]], [-F(1, 3), F(2, 5)])
    assert res.status == "optimal" and res.x == [F(1, 3), F(2, 5)]


def test_degenerate_cycling_example():
    # Beale's cycling example, in equality form with slacks
    c = [F(-3, 4), 20, F(-1, 2), 6, 0, 0, 0]
    A = [[F(1, 4), -8, -1, 9, 1, 0, 0], [F(1, 2), -12, F(-1, 2), 3, 0, 1, 0], [0, 0, 1, 0, 0, 0, 1]]
    res = solve(c, A, [0, 0, 1])
    assert res.status == "optimal" and res.objective == F(-5, 4)


@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=3), st.lists(small, min_size=3, max_size=3))
def test_certificates_always_check(rows, rhs):
    b = rhs[: len(rows)]
    res = feasible_point(rows, b)
    if res.status == "optimal":
        assert all(v >= 0 for v in res.x)
        assert [sum(r[j] * res.x[j] for j in range(4)) for r in rows] == b
    else:
        h = res.farkas
        assert all(sum(h[i] * rows[i][j] for i in range(len(rows))) >= 0 for j in range(4))
        assert sum(hi * bi for hi, bi in zip(h, b)) < 0
