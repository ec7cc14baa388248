"""Exact separation of Chvatal-Gomory cuts as a mixed-integer program.

The most violated cut at a fractional point maximizes
``alpha . x* - beta`` over integer (alpha, beta) and row multipliers mu in
[0, 1-eps] boxes (signed for equality rows), with the rounded right-hand
side pinned by ``f0 = mu.b - beta`` boxed in [0, 1-eps].  Bound rows
``x_j <= u_j`` join the aggregation in the <= orientation; in the >=
orientation (covering instances) the closure rounds up combinations of
the covering rows alone, which is what makes the knapsack-cover
comparison family tick (its hull cut x_n >= 1 is a rounded
row-plus-bounds combination, deliberately outside the closure).

Two exactness-preserving reductions keep the MIP lean.  First, a
coordinate where the separation point is zero contributes nothing to the
violation, so its coefficient is not searched: it is rounded down from
the optimal aggregation afterwards.  Second, the non-negativity rows
``-x_j <= 0`` never appear: a multiplier on them only lowers a cut
coefficient below its floor, so any optimum using one is dominated by
the floor choice.  Active coefficients therefore live in the window
``mu.A_j + w_j - alpha_j in [0, 1]``, whose integer points are exactly
the floors (plus the dominated integer-boundary case), and the optimum
equals the textbook formulation's optimum for every eps <= 1/2.

Internally everything is oriented as a <=-cut; a >= cut is recovered by
negating the result, which turns the floors into ceilings.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Optional, Sequence

from .errors import ValidationError
from .instances import IlpInstance, LinearConstraint, Relation, Sense, make_row
from .branch_bound import MipStatus, solve_milp_rows

EPS_LADDER = (
    Fraction(1, 4),
    Fraction(1, 64),
    Fraction(1, 1024),
    Fraction(1, 65536),
)


@dataclass(frozen=True)
class CgCut:
    """Integer cut ``alpha . x REL beta`` with its aggregation witnesses.

    ``multipliers[k]`` applies to the k-th masked row oriented toward the
    cut: brought to <= form for <= cuts, to >= form for >= cuts (equality
    rows carry signed multipliers either way).  ``bound_multipliers``
    apply to the rows ``x_j <= u_j`` (their >= mirrors for >= cuts).
    ``violation`` is ``alpha . x* - beta`` for <= cuts, mirrored for >=.
    """

    alpha: tuple[int, ...]
    beta: int
    relation: Relation
    multipliers: tuple[Fraction, ...]
    bound_multipliers: tuple[Fraction, ...]
    violation: Fraction

    def as_constraint(self) -> LinearConstraint:
        return make_row(self.alpha, self.relation, self.beta)


def one_row_masks(inst: IlpInstance) -> list[frozenset[int]]:
    """One mask per original row; bound rows are implicitly always enabled."""
    return [frozenset({i}) for i in range(inst.m)]


def _le_form(row: LinearConstraint) -> tuple[tuple[Fraction, ...], Fraction, bool]:
    """Row as <=; returns (coeffs, rhs, signed) with signed=True for EQ."""
    if row.relation is Relation.GE:
        return tuple(-c for c in row.coeffs), -row.rhs, False
    return row.coeffs, row.rhs, row.relation is Relation.EQ


def separate_cg(
    rows: Sequence[LinearConstraint],
    upper: Sequence[Optional[int]],
    x_star: Sequence[Fraction],
    row_mask: frozenset[int],
    eps: Fraction,
    orient: Relation = Relation.LE,
) -> Optional[CgCut]:
    """Most violated CG cut at ``x_star`` over the masked aggregations.

    Returns None when no cut with positive violation exists within the
    ``eps`` boxes.  Deterministic: the underlying branch and bound has a
    pinned search order.
    """
    if not (0 < eps < 1):
        raise ValidationError("eps must lie strictly between 0 and 1")
    if eps > Fraction(1, 2):
        raise ValidationError("eps above 1/2 is not supported")
    n = len(x_star)
    for i in row_mask:
        if not 0 <= i < len(rows):
            raise ValidationError(f"row mask index {i} out of range")
        if len(rows[i].coeffs) != n:
            raise ValidationError("row/point dimension mismatch")
    x_star = [Fraction(v) for v in x_star]
    s = 1 - eps
    flip = orient is Relation.GE

    # an integer point that satisfies the masked rows and the bounds cannot
    # be separated: every CG cut is valid for it
    if all(v.denominator == 1 for v in x_star):
        in_bounds = all(
            0 <= x_star[j] and (upper[j] is None or x_star[j] <= upper[j])
            for j in range(n)
        )
        if in_bounds and all(rows[i].satisfied_by(x_star) for i in row_mask):
            return None

    # the <=-form system is the same for both cut orientations: a >= cut is
    # the negation of a <= cut for the negated rows, and _le_form already
    # negates >= rows; only the returned (alpha, beta) is flipped
    mask = sorted(row_mask)
    le_rows = [_le_form(rows[i]) for i in mask]

    active = [j for j in range(n) if x_star[j] != 0]
    wt_idx = [] if flip else [j for j in active if upper[j] is not None]

    # variable layout: [mu per masked row] [w per wt_idx] [a per active] [b0]
    p = len(le_rows)
    col_mu = list(range(p))
    col_w = {j: p + k for k, j in enumerate(wt_idx)}
    col_a = {j: p + len(wt_idx) + k for k, j in enumerate(active)}
    col_b0 = p + len(wt_idx) + len(active)
    ncols = col_b0 + 1

    big_a = {
        j: ceil(sum(abs(co[j]) for co, _, _ in le_rows)) + 2 for j in active
    }
    big_b = (
        ceil(
            sum(abs(rhs) for _, rhs, _ in le_rows)
            + sum(Fraction(upper[j]) for j in wt_idx)
        )
        + 2
    )

    var_upper: list[Optional[Fraction]] = [None] * ncols
    shift_mu = []
    for k, (_, _, signed) in enumerate(le_rows):
        var_upper[col_mu[k]] = 2 * s if signed else s
        shift_mu.append(s if signed else Fraction(0))
    for j in wt_idx:
        var_upper[col_w[j]] = s
    for j in active:
        var_upper[col_a[j]] = Fraction(2 * big_a[j])
    var_upper[col_b0] = Fraction(2 * big_b)

    def fractionality_terms(j: int) -> tuple[list[Fraction], Fraction]:
        coeffs = [Fraction(0)] * ncols
        const = Fraction(0)
        for k, (co, _, _) in enumerate(le_rows):
            if co[j]:
                coeffs[col_mu[k]] = co[j]
                const -= shift_mu[k] * co[j]
        if j in col_w:
            coeffs[col_w[j]] = Fraction(1)
        coeffs[col_a[j]] = Fraction(-1)
        const += Fraction(big_a[j])
        return coeffs, const

    def rhs_terms() -> tuple[list[Fraction], Fraction]:
        coeffs = [Fraction(0)] * ncols
        const = Fraction(0)
        for k, (_, rhs, _) in enumerate(le_rows):
            if rhs:
                coeffs[col_mu[k]] = rhs
                const -= shift_mu[k] * rhs
        for j in wt_idx:
            coeffs[col_w[j]] = Fraction(upper[j])
        coeffs[col_b0] = Fraction(-1)
        const += Fraction(big_b)
        return coeffs, const

    objective = [Fraction(0)] * ncols
    for j in active:
        objective[col_a[j]] = x_star[j]
    objective[col_b0] = Fraction(-1)
    integer = [False] * ncols
    for j in active:
        integer[col_a[j]] = True
    integer[col_b0] = True
    cutoff = sum(Fraction(big_a[j]) * x_star[j] for j in active) - big_b

    # stage 1: the violation can never exceed f0 <= s, and it equals s
    # exactly when every fractionality is zero, the rounded rhs sits at
    # distance s, and only multipliers on rows tight at x* are used; that
    # restriction is a pure feasibility MIP whose first solution is already
    # a provably most-violated cut
    stage1_rows: list[LinearConstraint] = []
    for j in active:
        coeffs, const = fractionality_terms(j)
        stage1_rows.append(LinearConstraint(tuple(coeffs), Relation.EQ, -const))
    coeffs, const = rhs_terms()
    stage1_rows.append(LinearConstraint(tuple(coeffs), Relation.EQ, s - const))
    stage1_upper = list(var_upper)
    for k in range(p):
        co, rhs, signed = le_rows[k]
        if not signed:
            slack = rhs - sum(co[j] * x_star[j] for j in range(n))
            if slack != 0:
                stage1_upper[col_mu[k]] = Fraction(0)
    for j in wt_idx:
        if x_star[j] != upper[j]:
            stage1_upper[col_w[j]] = Fraction(0)
    res = solve_milp_rows(
        objective,
        stage1_rows,
        Sense.MAX,
        stage1_upper,
        integer,
        cutoff=cutoff,
        ceiling=cutoff + s,
    )

    if res.status is not MipStatus.OPTIMAL:
        # stage 2: full window formulation; the optimum is strictly below s
        mip_rows: list[LinearConstraint] = []
        for j in active:
            coeffs, const = fractionality_terms(j)
            mip_rows.append(LinearConstraint(tuple(coeffs), Relation.GE, -const))
            mip_rows.append(
                LinearConstraint(tuple(coeffs), Relation.LE, 1 - const)
            )
        coeffs, const = rhs_terms()
        mip_rows.append(LinearConstraint(tuple(coeffs), Relation.GE, -const))
        mip_rows.append(LinearConstraint(tuple(coeffs), Relation.LE, s - const))
        res = solve_milp_rows(
            objective,
            mip_rows,
            Sense.MAX,
            var_upper,
            integer,
            cutoff=cutoff,
            ceiling=cutoff + s,
        )
    if res.status is not MipStatus.OPTIMAL:
        return None

    sol = res.point
    mults = tuple(sol[col_mu[k]] - shift_mu[k] for k in range(p))
    w_mults = [Fraction(0)] * n
    for j in wt_idx:
        w_mults[j] = sol[col_w[j]]

    def aggregated(j: int) -> Fraction:
        total = sum(
            (mults[k] * le_rows[k][0][j] for k in range(p)), Fraction(0)
        )
        return total + w_mults[j]

    alpha = []
    for j in range(n):
        if j in col_a:
            alpha.append(int(sol[col_a[j]]) - big_a[j])
        else:
            alpha.append(floor(aggregated(j)))
    beta = int(sol[col_b0]) - big_b

    agg_rhs = sum(
        (mults[k] * le_rows[k][1] for k in range(p)), Fraction(0)
    ) + sum(w_mults[j] * upper[j] for j in wt_idx)
    for j in range(n):
        assert alpha[j] <= aggregated(j), "cut coefficient exceeds aggregation"
    assert beta >= floor(agg_rhs), "cut rhs below the rounded aggregation"

    violation = (
        sum((Fraction(a) * x for a, x in zip(alpha, x_star)), Fraction(0)) - beta
    )
    assert violation == res.value - cutoff, "violation/objective mismatch"
    assert violation > 0

    g = 0
    for v in alpha + [beta]:
        g = gcd(g, v)
    if g > 1:
        alpha = [v // g for v in alpha]
        beta //= g
        violation = violation / g

    if flip:
        alpha = [-a for a in alpha]
        beta = -beta
    return CgCut(
        alpha=tuple(alpha),
        beta=beta,
        relation=orient,
        multipliers=mults,
        bound_multipliers=tuple(w_mults),
        violation=violation,
    )
