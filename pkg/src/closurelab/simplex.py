"""Exact primal/dual simplex with Bland's rule over integer tableau rows.

Variables live in boxes ``lo_j <= x_j <= u_j`` (``u_j`` may be +infinity;
cold solves start from ``lo = 0``); rows may be <=, >= or =.  All
arithmetic is exact: the tableau is kept as integer rows with one positive
denominator per row, so a pivot is pure integer work
(``new = old*piv - f*pivrow``) followed by a gcd pass.

Public solves run the two-phase primal method and return dual vectors
verified against strong duality and complementary slackness; infeasible
solves return a verified Farkas aggregation (constraints combined into
"0 >= positive"); unbounded solves return a verified improving ray.

Branch and bound re-solves thousands of near-identical LPs, so it uses
``WarmLp``: the root optimum's tableau is snapshotted once and every node
re-solves by the exact dual simplex after tightening variable bounds,
which preserves dual feasibility and usually needs only a few pivots.

Conventions for a MAX problem (mirrored for MIN by negation):
  * row dual y_i:  y_i >= 0 for <= rows, y_i <= 0 for >= rows, free for =.
  * bound dual d_j >= 0, nonzero only when x_j sits at a finite upper bound.
  * strong duality: c.x = y.b + d.u, exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, lcm
from typing import Optional, Sequence

from .errors import ValidationError
from .instances import IlpInstance, LinearConstraint, Relation, Sense, make_row


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class FarkasCertificate:
    """Multipliers that aggregate the constraints into 0 >= positive.

    ``row_mults[i]`` is <= 0 for a <= row, >= 0 for a >= row, free for =;
    ``bound_mults[j]`` is <= 0 and nonzero only on finite upper bounds.
    The aggregated coefficient vector is componentwise <= 0 while the
    aggregated right-hand side is > 0, which no x >= 0 can satisfy.
    """

    row_mults: tuple[Fraction, ...]
    bound_mults: tuple[Fraction, ...]


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    point: Optional[tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None
    dual: Optional[tuple[Fraction, ...]] = None
    bound_dual: Optional[tuple[Fraction, ...]] = None
    farkas: Optional[FarkasCertificate] = None
    ray: Optional[tuple[Fraction, ...]] = None


def _row_gcd_reduce(nums: list[int], den: int) -> tuple[list[int], int]:
    if den < 0:
        den = -den
        nums = [-v for v in nums]
    g = den
    for v in nums:
        if v:
            g = gcd(g, v)
            if g == 1:
                return nums, den
    if g > 1:
        nums = [v // g for v in nums]
        den //= g
    return nums, den


class _Tableau:
    """Integer tableau for the bounded-variable simplex (MAX orientation).

    The rhs column carries the basic values with every nonbasic variable's
    contribution folded in at its current bound value (lower bounds are 0
    on cold starts, so folds only matter after warm bound edits).
    """

    def __init__(
        self,
        coeffs: list[list[int]],       # m x ncols integer constraint matrix
        rhs: list[int],                # length m, all >= 0
        col_upper: list[Optional[int]],
        basis: list[int],              # initial basis: one unit column per row
        unit_col: list[int],           # column whose initial content is +e_i
    ) -> None:
        self.m = len(coeffs)
        self.ncols = len(col_upper)
        self.rows = [list(row) + [b] for row, b in zip(coeffs, rhs)]
        self.den = [1] * self.m
        self.col_lower = [0] * self.ncols
        self.col_upper = col_upper
        self.basis = basis
        self.unit_col = unit_col
        self.at_upper: set[int] = set()
        self.obj: list[int] = []
        self.obj_den = 1
        self.cost: list[int] = []
        self.banned: set[int] = set()
        self._basis_set = set(basis)

    def clone(self) -> "_Tableau":
        other = object.__new__(_Tableau)
        other.m = self.m
        other.ncols = self.ncols
        other.rows = [list(r) for r in self.rows]
        other.den = list(self.den)
        other.col_lower = list(self.col_lower)
        other.col_upper = list(self.col_upper)
        other.basis = list(self.basis)
        other.unit_col = list(self.unit_col)
        other.at_upper = set(self.at_upper)
        other.obj = list(self.obj)
        other.obj_den = self.obj_den
        other.cost = list(self.cost)
        other.banned = set(self.banned)
        other._basis_set = set(self._basis_set)
        return other

    # -- objective handling ---------------------------------------------------

    def set_objective(self, cost: list[int]) -> None:
        """Load reduced costs J[k] = z_k - c_k for the current basis (ints)."""
        self.cost = list(cost)
        dens = [self.den[i] for i, b in enumerate(self.basis) if cost[b]]
        common = lcm(*dens) if dens else 1
        red = [-c * common for c in cost]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                f = cb * (common // self.den[i])
                row = self.rows[i]
                red = [a + f * v if v else a for a, v in zip(red, row)]
        self.obj, self.obj_den = _row_gcd_reduce(red, common)

    def reduced_cost(self, j: int) -> Fraction:
        return Fraction(self.obj[j], self.obj_den)

    def z_value(self, col: int) -> Fraction:
        """z_k = y^T A_k for the current basis (J[k] + c_k)."""
        return Fraction(self.obj[col], self.obj_den) + self.cost[col]

    # -- bound folding ----------------------------------------------------------

    def nonbasic_value(self, col: int) -> int:
        return self.col_upper[col] if col in self.at_upper else self.col_lower[col]

    def _fold(self, col: int, amount: int) -> None:
        """Shift the rhs by -amount * column (the variable sits at +amount)."""
        if amount:
            for row in self.rows:
                w = row[col]
                if w:
                    row[-1] -= amount * w

    # -- primal simplex -----------------------------------------------------------

    def _entering(self) -> Optional[tuple[int, int]]:
        """Bland: smallest improving column index; returns (col, direction)."""
        obj = self.obj
        at_upper = self.at_upper
        banned = self.banned
        basis_set = self._basis_set
        for j in range(self.ncols):
            rc = obj[j]
            if rc == 0 or j in banned:
                continue
            if j in at_upper:
                if rc > 0:
                    return j, -1
            elif rc < 0 and j not in basis_set:
                return j, +1
        return None

    def _ratio_test(self, col: int, direction: int):
        """Smallest step blocking the move; ties by smallest variable index.

        Returns (kind, row, t) with kind in {"lower", "upper", "flip"} or
        None when the move is unblocked (unbounded).
        """
        best_t: Optional[Fraction] = None
        best_var = -1
        best: Optional[tuple[str, int]] = None
        for i in range(self.m):
            wn = self.rows[i][col] * direction
            if wn > 0:
                lo = self.col_lower[self.basis[i]]
                t = Fraction(self.rows[i][-1] - lo * self.den[i], wn)
                kind = "lower"
            elif wn < 0:
                ub = self.col_upper[self.basis[i]]
                if ub is None:
                    continue
                t = Fraction(ub * self.den[i] - self.rows[i][-1], -wn)
                kind = "upper"
            else:
                continue
            var = self.basis[i]
            if best_t is None or t < best_t or (t == best_t and var < best_var):
                best_t, best_var, best = t, var, (kind, i)
        own = self.col_upper[col]
        if own is not None:
            t = Fraction(own - self.col_lower[col])
            if best_t is None or t < best_t or (t == best_t and col < best_var):
                best_t, best_var, best = t, col, ("flip", -1)
        if best is None:
            return None
        return best[0], best[1], best_t

    def _pivot(self, r: int, col: int) -> None:
        piv_row = self.rows[r]
        piv = piv_row[col]
        assert piv != 0
        for i in range(self.m):
            if i == r:
                continue
            f = self.rows[i][col]
            if f:
                row = self.rows[i]
                nums = [a * piv - f * b for a, b in zip(row, piv_row)]
                self.rows[i], self.den[i] = _row_gcd_reduce(nums, self.den[i] * piv)
        f = self.obj[col]
        if f:
            nums = [a * piv - f * b for a, b in zip(self.obj, piv_row)]
            self.obj, self.obj_den = _row_gcd_reduce(nums, self.obj_den * piv)
        self.rows[r], self.den[r] = _row_gcd_reduce(list(piv_row), piv)
        self._basis_set.discard(self.basis[r])
        self._basis_set.add(col)
        self.basis[r] = col

    def _enter_basis(self, r: int, col: int, leave_at_upper: bool) -> None:
        """Pivot with bound-value folding on both sides of the swap."""
        leaving = self.basis[r]
        self._fold(col, -self.nonbasic_value(col))
        self.at_upper.discard(col)
        self._pivot(r, col)
        if leave_at_upper:
            self.at_upper.add(leaving)
        self._fold(leaving, self.nonbasic_value(leaving))

    def run(self) -> Optional[tuple[int, int]]:
        """Primal iterations to optimality; (col, direction) if unbounded."""
        while True:
            ent = self._entering()
            if ent is None:
                return None
            col, direction = ent
            blocked = self._ratio_test(col, direction)
            if blocked is None:
                return col, direction
            kind, row, _t = blocked
            if kind == "flip":
                old = self.nonbasic_value(col)
                if direction == +1:
                    self.at_upper.add(col)
                else:
                    self.at_upper.discard(col)
                self._fold(col, self.nonbasic_value(col) - old)
                continue
            self._enter_basis(row, col, leave_at_upper=(kind == "upper"))

    # -- dual simplex --------------------------------------------------------------

    def run_dual(self) -> bool:
        """Dual iterations from a dual-feasible basis; False when infeasible.

        Basic variables outside their boxes leave (smallest variable index
        first); the entering column keeps every reduced-cost sign intact
        (minimum dual ratio, ties to the smallest column index).
        """
        while True:
            leave_r = -1
            leave_var = -1
            above = False
            for i in range(self.m):
                b = self.basis[i]
                val_num = self.rows[i][-1]
                d = self.den[i]
                if val_num < self.col_lower[b] * d:
                    if leave_var < 0 or b < leave_var:
                        leave_r, leave_var, above = i, b, False
                elif self.col_upper[b] is not None and val_num > self.col_upper[b] * d:
                    if leave_var < 0 or b < leave_var:
                        leave_r, leave_var, above = i, b, True
            if leave_r < 0:
                return True
            row = self.rows[leave_r]
            sign = -1 if above else +1
            best_ratio: Optional[Fraction] = None
            best_col = -1
            for j in range(self.ncols):
                if j in self.banned or j in self._basis_set:
                    continue
                a = row[j] * sign
                rc = self.obj[j]
                if j in self.at_upper:
                    if a > 0:
                        ratio = Fraction(-rc, a)
                    else:
                        continue
                else:
                    if a < 0:
                        ratio = Fraction(rc, -a)
                    else:
                        continue
                if ratio < 0:
                    continue
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and j < best_col)
                ):
                    best_ratio, best_col = ratio, j
            if best_col < 0:
                return False
            self._enter_basis(leave_r, best_col, leave_at_upper=above)

    # -- solution readout -------------------------------------------------------

    def column_values(self) -> list[Fraction]:
        vals = [Fraction(0)] * self.ncols
        for j in range(self.ncols):
            if j not in self._basis_set:
                vals[j] = Fraction(self.nonbasic_value(j))
        for i, b in enumerate(self.basis):
            vals[b] = Fraction(self.rows[i][-1], self.den[i])
        return vals


# ---------------------------------------------------------------------------
# integer scaling, done once per problem and reusable across node solves

@dataclass
class ScaledLp:
    """Problem data scaled to integers once; reusable across node solves."""

    n: int
    mats: list[list[int]]
    rhs: list[int]
    rels: list[Relation]
    int_upper: list[Optional[int]]
    sigma: list[Fraction]          # x_orig_j = sigma_j * x_scaled_j
    row_scale: list[Fraction]
    obj_int: list[int]
    obj_mult: int
    maximizing: bool


def scale_lp(
    objective: Sequence[Fraction],
    rows: Sequence[LinearConstraint],
    sense: Sense,
    upper: Sequence[Optional[Fraction]],
) -> ScaledLp:
    n = len(objective)
    sigma = [
        Fraction(1) if u is None or u.denominator == 1 else Fraction(1, u.denominator)
        for u in upper
    ]
    int_upper: list[Optional[int]] = [
        None if u is None else int(u / s) for u, s in zip(upper, sigma)
    ]
    mats, rhs, rels, row_scale = [], [], [], []
    for row in rows:
        scaled = [c * s for c, s in zip(row.coeffs, sigma)]
        mult = (
            lcm(row.rhs.denominator, *(c.denominator for c in scaled))
            if scaled
            else row.rhs.denominator
        )
        mats.append([int(c * mult) for c in scaled])
        rhs.append(int(row.rhs * mult))
        rels.append(row.relation)
        row_scale.append(Fraction(mult))
    maximizing = sense is Sense.MAX
    obj_scaled = [c * s if maximizing else -c * s for c, s in zip(objective, sigma)]
    obj_mult = lcm(*(c.denominator for c in obj_scaled)) if obj_scaled else 1
    obj_int = [int(c * obj_mult) for c in obj_scaled]
    return ScaledLp(
        n, mats, rhs, rels, int_upper, sigma, row_scale, obj_int, obj_mult, maximizing
    )


def _build_tableau(scaled: ScaledLp, rhs: list[int], int_upper: list[Optional[int]]):
    """Tableau with slack/artificial columns; rhs already holds node shifts."""
    n, m = scaled.n, len(scaled.mats)
    rels = list(scaled.rels)
    mats = scaled.mats
    rows_int: list[list[int]] = []
    rhs = list(rhs)
    flipped = [False] * m
    for i in range(m):
        if rhs[i] < 0:
            rows_int.append([-v for v in mats[i]])
            rhs[i] = -rhs[i]
            flipped[i] = True
            if rels[i] is Relation.LE:
                rels[i] = Relation.GE
            elif rels[i] is Relation.GE:
                rels[i] = Relation.LE
        else:
            rows_int.append(list(mats[i]))

    slack_col = [-1] * m
    art_col = [-1] * m
    ncols = n
    for i in range(m):
        if rels[i] is not Relation.EQ:
            slack_col[i] = ncols
            ncols += 1
    for i in range(m):
        if rels[i] is not Relation.LE:
            art_col[i] = ncols
            ncols += 1

    col_upper: list[Optional[int]] = list(int_upper) + [None] * (ncols - n)
    coeffs = []
    for i in range(m):
        row = rows_int[i] + [0] * (ncols - n)
        if slack_col[i] >= 0:
            row[slack_col[i]] = 1 if rels[i] is Relation.LE else -1
        if art_col[i] >= 0:
            row[art_col[i]] = 1
        coeffs.append(row)
    basis = [slack_col[i] if rels[i] is Relation.LE else art_col[i] for i in range(m)]
    unit_col = list(basis)
    tab = _Tableau(coeffs, rhs, col_upper, basis, unit_col)
    art_set = {c for c in art_col if c >= 0}
    return tab, art_set, flipped


def _phase_one(tab: _Tableau, art_set: set[int]) -> bool:
    """Returns True when feasible (all artificials at zero)."""
    cost = [0] * tab.ncols
    for c in art_set:
        cost[c] = -1
    tab.set_objective(cost)
    ray = tab.run()
    assert ray is None, "phase 1 objective is bounded by construction"
    vals = tab.column_values()
    return not any(vals[c] for c in art_set)


def _finish_phase_two(tab: _Tableau, art_set: set[int], obj_int: list[int]):
    for c in art_set:
        tab.col_upper[c] = 0
        tab.banned.add(c)
    cost = [0] * tab.ncols
    cost[: len(obj_int)] = obj_int
    tab.set_objective(cost)
    return tab.run()


def solve_scaled(
    scaled: ScaledLp,
    rhs: Optional[list[int]] = None,
    int_upper: Optional[list[Optional[int]]] = None,
    keep_tableau: bool = False,
):
    """Fast cold solve: returns (status, scaled structural values, value, tab).

    ``value`` is in original objective units; no certificates, no checks.
    """
    tab, art_set, _flipped = _build_tableau(
        scaled,
        scaled.rhs if rhs is None else rhs,
        scaled.int_upper if int_upper is None else int_upper,
    )
    if not _phase_one(tab, art_set):
        return LpStatus.INFEASIBLE, None, None, None
    if _finish_phase_two(tab, art_set, scaled.obj_int) is not None:
        return LpStatus.UNBOUNDED, None, None, None
    vals = tab.column_values()[: scaled.n]
    raw = sum(c * v for c, v in zip(scaled.obj_int, vals))
    value = Fraction(raw, scaled.obj_mult)
    if not scaled.maximizing:
        value = -value
    return LpStatus.OPTIMAL, vals, value, (tab if keep_tableau else None)


class WarmLp:
    """Dual-simplex node re-solves from a snapshot of the root optimum.

    Tightening variable bounds keeps the reduced costs (and so dual
    feasibility) intact; each node clones the snapshot, folds the changed
    nonbasic bound values into the rhs, and runs the dual simplex.
    """

    def __init__(self, scaled: ScaledLp, tab: _Tableau) -> None:
        self.scaled = scaled
        self.base = tab

    def solve_node(
        self,
        lower: Sequence[int],
        upper: Sequence[Optional[int]],
    ):
        """Bounds are in scaled column units and only for structural columns."""
        tab = self.base.clone()
        n = self.scaled.n
        for j in range(n):
            lo, up = lower[j], upper[j]
            if up is not None and lo > up:
                return LpStatus.INFEASIBLE, None, None
            old = tab.nonbasic_value(j) if j not in tab._basis_set else None
            tab.col_lower[j] = lo
            tab.col_upper[j] = up
            if old is None:
                continue
            if j in tab.at_upper and up is None:
                tab.at_upper.discard(j)
            new = tab.nonbasic_value(j)
            if new != old:
                tab._fold(j, new - old)
        if not tab.run_dual():
            return LpStatus.INFEASIBLE, None, None
        vals = tab.column_values()[:n]
        raw = sum(c * v for c, v in zip(self.scaled.obj_int, vals))
        value = Fraction(raw, self.scaled.obj_mult)
        if not self.scaled.maximizing:
            value = -value
        return LpStatus.OPTIMAL, vals, value


# ---------------------------------------------------------------------------
# full solve with certificates

def solve_lp_rows(
    objective: Sequence[Fraction],
    rows: Sequence[LinearConstraint],
    sense: Sense,
    upper: Optional[Sequence[Optional[Fraction]]] = None,
    check: bool = True,
) -> LpResult:
    """Exact LP solve over {0 <= x <= upper, rows}; fully deterministic."""
    n = len(objective)
    objective = [Fraction(c) for c in objective]
    for row in rows:
        if len(row.coeffs) != n:
            raise ValidationError("row length does not match variable count")
    if upper is None:
        upper = [None] * n
    upper = [None if u is None else Fraction(u) for u in upper]
    for j, u in enumerate(upper):
        if u is not None and u < 0:
            bound_mults = [Fraction(0)] * n
            bound_mults[j] = Fraction(-1)
            cert = FarkasCertificate(
                tuple(Fraction(0) for _ in rows), tuple(bound_mults)
            )
            if check:
                _verify_farkas(rows, upper, cert)
            return LpResult(status=LpStatus.INFEASIBLE, farkas=cert)
    if not rows:
        return _solve_boxed_only(objective, upper, sense, check)

    scaled = scale_lp(objective, rows, sense, upper)
    tab, art_set, flipped = _build_tableau(scaled, scaled.rhs, scaled.int_upper)
    m = len(rows)

    if not _phase_one(tab, art_set):
        res = _extract_farkas(tab, rows, scaled, flipped)
        if check:
            _verify_farkas(rows, upper, res.farkas)
        return res

    # drive zero-level artificials out of the basis; drop redundant rows
    keep_row_of_original = list(range(m))
    r = 0
    while r < tab.m:
        b = tab.basis[r]
        if b in art_set:
            candidates = [
                j
                for j in range(tab.ncols)
                if j not in art_set and tab.rows[r][j] != 0
            ]
            piv_col = next(
                (j for j in candidates if j not in tab.at_upper),
                candidates[0] if candidates else None,
            )
            if piv_col is None:
                del tab.rows[r], tab.den[r], tab.basis[r], tab.unit_col[r]
                del keep_row_of_original[r]
                tab.m -= 1
                tab._basis_set.discard(b)
                continue
            tab._pivot(r, piv_col)
            if piv_col in tab.at_upper:
                # pivoting in a column parked at its upper bound keeps the
                # solution fixed: record its value as basic instead of folded
                tab.rows[r][-1] += tab.col_upper[piv_col] * tab.den[r]
                tab.at_upper.discard(piv_col)
        r += 1

    ray_sig = _finish_phase_two(tab, art_set, scaled.obj_int)
    if ray_sig is not None:
        res = _extract_ray(tab, scaled, ray_sig)
        if check:
            _verify_ray(objective, rows, upper, sense, res.ray)
        return res

    vals = tab.column_values()
    point = tuple(vals[j] * scaled.sigma[j] for j in range(n))
    value = sum((c * x for c, x in zip(objective, point)), Fraction(0))

    # duals: y_i = z at the row's unit column, mapped back to original data
    dual = [Fraction(0)] * m
    for r2, orig in enumerate(keep_row_of_original):
        y = tab.z_value(tab.unit_col[r2])
        y = y / scaled.obj_mult * scaled.row_scale[orig]
        if flipped[orig]:
            y = -y
        if not scaled.maximizing:
            y = -y
        dual[orig] = y
    bound_dual = [Fraction(0)] * n
    for j in range(n):
        if j in tab.at_upper:
            d = -tab.reduced_cost(j) / scaled.obj_mult / scaled.sigma[j]
            if not scaled.maximizing:
                d = -d
            bound_dual[j] = d

    res = LpResult(
        status=LpStatus.OPTIMAL,
        point=point,
        value=value,
        dual=tuple(dual),
        bound_dual=tuple(bound_dual),
    )
    if check:
        _verify_optimal(objective, rows, upper, sense, res)
    return res


def _extract_farkas(tab, rows, scaled: ScaledLp, flipped) -> LpResult:
    # phase-1 duals: y_i from the row's unit column, d_j >= 0 from reduced
    # costs of at-upper columns; negating both yields "sum <= 0, rhs > 0"
    row_mults = [Fraction(0)] * len(rows)
    for r, unit in enumerate(tab.unit_col):
        y = -tab.z_value(unit) * scaled.row_scale[r]
        if flipped[r]:
            y = -y
        row_mults[r] = y
    bound_mults = [Fraction(0)] * scaled.n
    for j in range(scaled.n):
        if j in tab.at_upper:
            bound_mults[j] = tab.reduced_cost(j) / scaled.sigma[j]
    cert = FarkasCertificate(tuple(row_mults), tuple(bound_mults))
    return LpResult(status=LpStatus.INFEASIBLE, farkas=cert)


def _extract_ray(tab, scaled: ScaledLp, ray_sig) -> LpResult:
    col, direction = ray_sig
    assert direction == +1
    delta = [Fraction(0)] * tab.ncols
    delta[col] = Fraction(1)
    for i, b in enumerate(tab.basis):
        w = tab.rows[i][col]
        if w:
            delta[b] = Fraction(-w, tab.den[i])
    ray = tuple(delta[j] * scaled.sigma[j] for j in range(scaled.n))
    return LpResult(status=LpStatus.UNBOUNDED, ray=ray)


def _solve_boxed_only(objective, upper, sense, check) -> LpResult:
    """Degenerate case with no rows: optimize each coordinate on its box."""
    sgn = 1 if sense is Sense.MAX else -1
    point, bound_dual = [], []
    for j, (c, u) in enumerate(zip(objective, upper)):
        if sgn * c > 0:
            if u is None:
                ray = [Fraction(0)] * len(objective)
                ray[j] = Fraction(1)
                res = LpResult(status=LpStatus.UNBOUNDED, ray=tuple(ray))
                if check:
                    _verify_ray(objective, [], upper, sense, res.ray)
                return res
            point.append(Fraction(u))
            bound_dual.append(c)
        else:
            point.append(Fraction(0))
            bound_dual.append(Fraction(0))
    value = sum((c * x for c, x in zip(objective, point)), Fraction(0))
    res = LpResult(
        status=LpStatus.OPTIMAL,
        point=tuple(point),
        value=value,
        dual=(),
        bound_dual=tuple(bound_dual),
    )
    if check:
        _verify_optimal(objective, [], upper, sense, res)
    return res


# ---------------------------------------------------------------------------
# exact certificate verification (enabled on every public solve by default)

def _verify_optimal(objective, rows, upper, sense, res: LpResult) -> None:
    x, y, d = res.point, res.dual, res.bound_dual
    for j, u in enumerate(upper):
        assert x[j] >= 0 and (u is None or x[j] <= u), "primal bound violated"
    for row in rows:
        assert row.satisfied_by(x), "primal row violated"
    sgn = 1 if sense is Sense.MAX else -1
    dual_total = Fraction(0)
    for i, row in enumerate(rows):
        slack = row.rhs - row.lhs(x)
        if row.relation is Relation.LE:
            assert sgn * y[i] >= 0, "dual sign (<= row)"
        elif row.relation is Relation.GE:
            assert sgn * y[i] <= 0, "dual sign (>= row)"
        assert y[i] * slack == 0, "complementary slackness (row)"
        dual_total += y[i] * row.rhs
    for j, u in enumerate(upper):
        if u is None:
            assert d[j] == 0, "bound dual on free upper"
        else:
            assert sgn * d[j] >= 0, "bound dual sign"
            assert d[j] * (u - x[j]) == 0, "complementary slackness (bound)"
            dual_total += d[j] * u
    assert dual_total == res.value, "strong duality"
    for j in range(len(objective)):
        zc = (
            sum(y[i] * rows[i].coeffs[j] for i in range(len(rows)))
            + d[j]
            - objective[j]
        )
        assert sgn * zc >= 0, "dual feasibility"
        assert x[j] * zc == 0, "complementary slackness (column)"


def _verify_farkas(rows, upper, cert: FarkasCertificate) -> None:
    y, d = cert.row_mults, cert.bound_mults
    total = Fraction(0)
    for i, row in enumerate(rows):
        if row.relation is Relation.LE:
            assert y[i] <= 0, "farkas sign (<= row)"
        elif row.relation is Relation.GE:
            assert y[i] >= 0, "farkas sign (>= row)"
        total += y[i] * row.rhs
    n = len(upper)
    for j in range(n):
        if d[j]:
            assert upper[j] is not None and d[j] <= 0, "farkas bound mult"
            total += d[j] * upper[j]
    for j in range(n):
        coef = sum(y[i] * rows[i].coeffs[j] for i in range(len(rows))) + d[j]
        assert coef <= 0, "farkas aggregation not <= 0"
    assert total > 0, "farkas rhs not positive"


def _verify_ray(objective, rows, upper, sense, ray) -> None:
    assert any(v != 0 for v in ray), "zero ray"
    gain = Fraction(0)
    for j, v in enumerate(ray):
        assert v >= 0, "ray leaves the orthant"
        if upper[j] is not None:
            assert v == 0, "ray moves a bounded variable"
        gain += objective[j] * v
    if sense is Sense.MAX:
        assert gain > 0, "ray does not improve"
    else:
        assert gain < 0, "ray does not improve"
    for row in rows:
        drift = sum(c * v for c, v in zip(row.coeffs, ray))
        if row.relation is Relation.LE:
            assert drift <= 0, "ray exits <= row"
        elif row.relation is Relation.GE:
            assert drift >= 0, "ray exits >= row"
        else:
            assert drift == 0, "ray exits = row"


# ---------------------------------------------------------------------------
# instance-level front end

def bound_rows(inst: IlpInstance) -> list[LinearConstraint]:
    """Explicit x_j <= u_j rows for the finite upper bounds, in index order."""
    out = []
    for j, u in enumerate(inst.upper):
        if u is not None:
            coeffs = [Fraction(0)] * inst.n
            coeffs[j] = Fraction(1)
            out.append(make_row(coeffs, Relation.LE, u))
    return out


def solve_lp(
    inst: IlpInstance,
    extra_cuts: Sequence[LinearConstraint] = (),
    check: bool = True,
) -> LpResult:
    """LP relaxation of the instance intersected with ``extra_cuts``.

    Upper bounds are enforced natively; the returned duals cover
    ``inst.rows + extra_cuts`` in order, with bound duals per variable.
    """
    rows = list(inst.rows) + list(extra_cuts)
    upper = [None if u is None else Fraction(u) for u in inst.upper]
    return solve_lp_rows(inst.objective, rows, inst.sense, upper, check=check)
