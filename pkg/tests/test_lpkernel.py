from fractions import Fraction

from hypothesis import given, settings, strategies as st

from graderalarm.lpkernel import (
    FeasibilityResult,
    LinearRow,
    LinearSystem,
    decide_feasible,
    verify_result,
)

F = Fraction


def system(num_vars, *rows):
    return LinearSystem(num_vars, tuple(LinearRow(tuple(map(F, c)), rel, F(b)) for c, rel, b in rows))


def test_feasible_with_witness():
    s = system(2, ((1, 1), "eq", 3), ((1, 0), "le", 2))
    result = decide_feasible(s)
    assert result.feasible
    x, y = result.witness
    assert x + y == 3 and x <= 2 and x >= 0 and y >= 0
    assert verify_result(s, result)


def test_infeasible_with_certificate():
    s = system(1, ((1,), "ge", 3), ((1,), "le", 1))
    result = decide_feasible(s)
    assert not result.feasible
    assert result.certificate is not None
    assert verify_result(s, result)


def test_contradictory_equalities():
    s = system(2, ((1, 1), "eq", 1), ((1, 1), "eq", 2))
    result = decide_feasible(s)
    assert not result.feasible
    assert verify_result(s, result)


def test_zero_row_with_positive_rhs():
    s = system(2, ((0, 0), "eq", 1))
    result = decide_feasible(s)
    assert not result.feasible
    assert verify_result(s, result)


def test_negative_rhs_normalization():
    # x - y = -2 has nonnegative solutions (e.g. x=0, y=2)
    s = system(2, ((1, -1), "eq", -2))
    result = decide_feasible(s)
    assert result.feasible
    x, y = result.witness
    assert x - y == -2


def test_nonnegativity_is_implicit():
    # x = -1 impossible for x >= 0
    s = system(1, ((1,), "eq", -1))
    result = decide_feasible(s)
    assert not result.feasible
    assert verify_result(s, result)


def test_exact_fractions_survive():
    s = system(2, ((3, 7), "eq", F(1, 3)), ((1, 0), "le", F(1, 9)))
    result = decide_feasible(s)
    assert result.feasible
    x, y = result.witness
    assert 3 * x + 7 * y == F(1, 3)


def test_degenerate_pivoting_terminates():
    # classic cycling-prone family; Bland's rule must terminate
    s = system(
        4,
        ((F(1, 4), -8, -1, 9), "le", 0),
        ((F(1, 2), -12, F(-1, 2), 3), "le", 0),
        ((0, 0, 1, 0), "le", 1),
        ((1, 1, 1, 1), "eq", 1),
    )
    result = decide_feasible(s)
    assert result.feasible
    assert verify_result(s, result)


@st.composite
def random_system_with_solution(draw):
    """A system built around a known nonnegative solution, so always feasible."""
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, 4))
    x0 = [F(draw(st.integers(0, 5)), draw(st.integers(1, 3))) for _ in range(n)]
    rows = []
    for _ in range(m):
        coeffs = [F(draw(st.integers(-3, 3))) for _ in range(n)]
        value = sum(c * x for c, x in zip(coeffs, x0))
        rel = draw(st.sampled_from(("eq", "ge", "le")))
        slack = F(draw(st.integers(0, 2)))
        rhs = value - slack if rel == "ge" else value + slack if rel == "le" else value
        rows.append(LinearRow(tuple(coeffs), rel, rhs))
    return LinearSystem(n, tuple(rows))


@given(random_system_with_solution())
def test_planted_solutions_are_found(s):
    result = decide_feasible(s)
    assert result.feasible
    assert verify_result(s, result)


@st.composite
def arbitrary_small_system(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 4))
    rows = []
    for _ in range(m):
        coeffs = tuple(F(draw(st.integers(-2, 2))) for _ in range(n))
        rel = draw(st.sampled_from(("eq", "ge", "le")))
        rhs = F(draw(st.integers(-4, 4)), draw(st.integers(1, 2)))
        rows.append(LinearRow(coeffs, rel, rhs))
    return LinearSystem(n, tuple(rows))


@given(arbitrary_small_system())
@settings(max_examples=200)
def test_every_answer_self_verifies(s):
    result = decide_feasible(s)
    assert verify_result(s, result)
    if result.feasible:
        assert result.witness is not None and len(result.witness) == s.num_vars
        assert all(v >= 0 for v in result.witness)
    else:
        assert result.certificate is not None


def test_verify_rejects_tampered_witness():
    s = system(2, ((1, 1), "eq", 3))
    result = decide_feasible(s)
    forged = FeasibilityResult(feasible=True, witness=(F(1), F(1)))
    assert not verify_result(s, forged)


def test_verify_rejects_tampered_certificate():
    s = system(1, ((1,), "ge", 3), ((1,), "le", 1))
    result = decide_feasible(s)
    forged = FeasibilityResult(feasible=False, certificate=tuple(-c for c in result.certificate))
    assert not verify_result(s, forged)
