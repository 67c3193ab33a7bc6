"""Exact rational feasibility for small linear systems over nonnegative variables.

A dense phase-1 simplex on `fractions.Fraction`, with Bland's rule for
termination. Every answer is certified: a feasible system comes back with a
rational point satisfying all rows, an infeasible one with a vector of row
multipliers whose combination is contradictory. ``verify_result`` re-checks
either certificate from scratch, so callers never have to trust the pivoting.

Sizes here are tiny (tens of variables), so a dense tableau is the simplest
thing that is obviously correct; speed comes from callers avoiding the LP,
not from the LP being clever.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

Relation = Literal["eq", "ge", "le"]

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class LinearRow:
    """One constraint: coeffs . x  (relation)  rhs."""

    coeffs: tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction

    def __post_init__(self) -> None:
        if self.relation not in ("eq", "ge", "le"):
            raise ValueError(f"bad relation {self.relation!r}")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", Fraction(self.rhs))


@dataclass(frozen=True)
class LinearSystem:
    """A conjunction of linear rows over implicitly nonnegative variables."""

    num_vars: int
    rows: tuple[LinearRow, ...]

    def __post_init__(self) -> None:
        if self.num_vars < 0:
            raise ValueError(f"negative variable count: {self.num_vars}")
        for row in self.rows:
            if len(row.coeffs) != self.num_vars:
                raise ValueError(
                    f"row has {len(row.coeffs)} coefficients, system has {self.num_vars} variables"
                )


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of ``decide_feasible``: a witness point or an impossibility certificate.

    ``certificate[i]`` is the multiplier for ``system.rows[i]``; nonnegative on
    'ge' rows, nonpositive on 'le' rows, unrestricted on 'eq' rows. The
    certified contradiction is: the combined row has only nonpositive
    coefficients but a strictly positive right-hand side.
    """

    feasible: bool
    witness: tuple[Fraction, ...] | None = None
    certificate: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        if self.feasible and self.witness is None:
            raise ValueError("feasible result must carry a witness")
        if not self.feasible and self.certificate is None:
            raise ValueError("infeasible result must carry a certificate")


def decide_feasible(system: LinearSystem) -> FeasibilityResult:
    """Decide whether the system has a nonnegative rational solution, with proof."""
    n = system.num_vars
    m = len(system.rows)
    if m == 0:
        return FeasibilityResult(True, witness=(_ZERO,) * n)

    # Normalize to rhs >= 0, remembering each row's sign flip so the
    # certificate can be mapped back to the caller's orientation.
    signs: list[int] = []
    norm: list[tuple[list[Fraction], Relation, Fraction]] = []
    for row in system.rows:
        if row.rhs < 0:
            signs.append(-1)
            flipped: Relation = {"ge": "le", "le": "ge", "eq": "eq"}[row.relation]
            norm.append(([-c for c in row.coeffs], flipped, -row.rhs))
        else:
            signs.append(1)
            norm.append((list(row.coeffs), row.relation, row.rhs))

    # Columns: n originals, one slack/surplus per inequality, one artificial
    # per row that needs one (all rows get one; a plain slack could serve for
    # 'le' rows but a uniform artificial basis keeps the bookkeeping simple).
    num_ineq = sum(1 for _, rel, _ in norm if rel != "eq")
    total = n + num_ineq + m
    art0 = n + num_ineq

    tableau: list[list[Fraction]] = []
    basis: list[int] = []
    slack_col = n
    for i, (coeffs, rel, rhs) in enumerate(norm):
        line = coeffs + [_ZERO] * (num_ineq + m) + [rhs]
        if rel == "ge":
            line[slack_col] = -_ONE
            slack_col += 1
        elif rel == "le":
            line[slack_col] = _ONE
            slack_col += 1
        line[art0 + i] = _ONE
        tableau.append(line)
        basis.append(art0 + i)

    # Maximize -(sum of artificials); reduced-cost row for the artificial
    # starting basis is the negated column sums of the constraint rows.
    obj = [_ZERO] * (total + 1)
    for line in tableau:
        for j in range(total + 1):
            obj[j] += line[j]
    for j in range(art0, art0 + m):
        obj[j] = _ZERO

    max_pivots = 50 * (m + 1) * (total + 1)
    for _ in range(max_pivots):
        enter = -1
        for j in range(total):
            if obj[j] > 0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best: Fraction | None = None
        for i in range(m):
            coef = tableau[i][enter]
            if coef > 0:
                ratio = tableau[i][total] / coef
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            raise ArithmeticError("phase-1 objective unbounded; artificial basis is corrupt")
        _pivot(tableau, obj, basis, leave, enter, total)
    else:
        raise ArithmeticError("pivot limit exceeded under Bland's rule")

    residual = sum(tableau[i][total] for i in range(m) if basis[i] >= art0)
    if residual == 0:
        witness = [_ZERO] * n
        for i in range(m):
            if basis[i] < n:
                witness[basis[i]] = tableau[i][total]
        return FeasibilityResult(True, witness=tuple(witness))

    # Infeasible: the dual of the phase-1 optimum is a Farkas vector. For the
    # artificial of row i, reduced cost r = -1 - y_i, so y_i = -1 - r and the
    # certificate for the normalized system is w = -y = 1 + r, flipped back
    # through each row's normalization sign.
    certificate = tuple(Fraction(signs[i]) * (_ONE + obj[art0 + i]) for i in range(m))
    return FeasibilityResult(False, certificate=certificate)


def _pivot(
    tableau: list[list[Fraction]],
    obj: list[Fraction],
    basis: list[int],
    row: int,
    col: int,
    total: int,
) -> None:
    line = tableau[row]
    inv = line[col]
    tableau[row] = line = [v / inv for v in line]
    for i, other in enumerate(tableau):
        if i != row and other[col] != 0:
            f = other[col]
            tableau[i] = [a - f * b for a, b in zip(other, line)]
    if obj[col] != 0:
        f = obj[col]
        for j in range(total + 1):
            obj[j] -= f * line[j]
    basis[row] = col


def verify_result(system: LinearSystem, result: FeasibilityResult) -> bool:
    """Re-check a feasibility answer with independent exact arithmetic.

    A feasible result must satisfy every row at its witness; an infeasible one
    must carry multipliers with the right signs whose combined constraint is
    'nonpositive combination >= positive number'.
    """
    if result.feasible:
        x = result.witness
        if x is None or len(x) != system.num_vars or any(v < 0 for v in x):
            return False
        for row in system.rows:
            lhs = sum(c * v for c, v in zip(row.coeffs, x))
            if row.relation == "eq" and lhs != row.rhs:
                return False
            if row.relation == "ge" and lhs < row.rhs:
                return False
            if row.relation == "le" and lhs > row.rhs:
                return False
        return True

    y = result.certificate
    if y is None or len(y) != len(system.rows):
        return False
    for mult, row in zip(y, system.rows):
        if row.relation == "ge" and mult < 0:
            return False
        if row.relation == "le" and mult > 0:
            return False
    for j in range(system.num_vars):
        combined = sum(mult * row.coeffs[j] for mult, row in zip(y, system.rows))
        if combined > 0:
            return False
    return sum(mult * row.rhs for mult, row in zip(y, system.rows)) > 0
