"""Ground truth over small integer hulls.

A hull is stored in V-representation: integer vertices plus integer
recession rays.  For packing/covering structure the rays are coordinate
directions; the one genuinely mixed-sign case handled here (a single
two-variable inequality without bounds, as in the non-packing tight
family) produces one slanted primitive ray from the row itself.

Separation from a hull solves one LP: maximize the violation of
``y.x <= y0`` over the dual polytope {y.v <= y0 on vertices, y.r <= 0 on
rays, -1 <= y <= 1}.  An optimal basic solution is a vertex of that fixed
polytope, so cutting loops that re-add returned inequalities terminate.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, gcd, lcm
from typing import Optional, Sequence

from .errors import EmptyHullError, ResourceLimitError, ValidationError
from .instances import (
    IlpInstance,
    InstanceClass,
    LinearConstraint,
    Relation,
    Sense,
    make_row,
)
from .simplex import LpStatus, solve_lp_rows

DEFAULT_ENUM_CAP = 10_000_000


def enumeration_cap() -> int:
    override = os.environ.get("CLOSURELAB_CAP")
    if override:
        return int(override)
    return DEFAULT_ENUM_CAP


@dataclass(frozen=True)
class Hull:
    """conv(vertices) + cone(rays); ``down_monotone`` marks packing rows."""

    vertices: tuple[tuple[int, ...], ...]
    rays: tuple[tuple[int, ...], ...]
    n: int
    down_monotone: bool = False


def enumerate_lattice(
    rows: Sequence[LinearConstraint],
    box: Sequence[tuple[int, int]],
    cap: Optional[int] = None,
) -> list[tuple[int, ...]]:
    """All integer points of the box satisfying every row, lexicographic.

    The box volume must stay within the enumeration cap; depth-first search
    with per-row interval pruning keeps typical walks far below it.
    """
    if cap is None:
        cap = enumeration_cap()
    volume = 1
    for lo, hi in box:
        if hi < lo:
            return []
        volume *= hi - lo + 1
        if volume > cap:
            raise ResourceLimitError(
                f"lattice box volume {volume}+ exceeds cap {cap}"
            )
    n = len(box)
    for row in rows:
        if len(row.coeffs) != n:
            raise ValidationError("row length does not match box dimension")

    # rest_min[r][d], rest_max[r][d]: attainable sum of row r over coords >= d
    rest_min, rest_max = [], []
    for row in rows:
        mins = [Fraction(0)] * (n + 1)
        maxs = [Fraction(0)] * (n + 1)
        for d in range(n - 1, -1, -1):
            c = row.coeffs[d]
            lo, hi = box[d]
            a, b = c * lo, c * hi
            if a > b:
                a, b = b, a
            mins[d] = mins[d + 1] + a
            maxs[d] = maxs[d + 1] + b
        rest_min.append(mins)
        rest_max.append(maxs)

    out: list[tuple[int, ...]] = []
    point = [0] * n
    partial = [Fraction(0)] * len(rows)

    def feasible_suffix(d: int) -> bool:
        for r, row in enumerate(rows):
            lo = partial[r] + rest_min[r][d]
            hi = partial[r] + rest_max[r][d]
            if row.relation is Relation.LE:
                if lo > row.rhs:
                    return False
            elif row.relation is Relation.GE:
                if hi < row.rhs:
                    return False
            else:
                if lo > row.rhs or hi < row.rhs:
                    return False
        return True

    def rec(d: int) -> None:
        if d == n:
            out.append(tuple(point))
            return
        lo, hi = box[d]
        for v in range(lo, hi + 1):
            point[d] = v
            for r, row in enumerate(rows):
                partial[r] += row.coeffs[d] * v
            if feasible_suffix(d + 1):
                rec(d + 1)
            for r, row in enumerate(rows):
                partial[r] -= row.coeffs[d] * v

    if feasible_suffix(0):
        rec(0)
    return out


# ---------------------------------------------------------------------------
# separation and vertex reduction

def separate_point_from_hull(
    hull: Hull, point: Sequence[Fraction]
) -> Optional[LinearConstraint]:
    """None when the point lies in the hull, else a violated valid <=-cut."""
    if len(point) != hull.n:
        raise ValidationError("point dimension does not match hull")
    if not hull.vertices:
        raise EmptyHullError("cannot separate from an empty hull")
    cut = _best_separator(hull.vertices, hull.rays, point)
    if cut is None:
        return None
    coeffs, rhs = cut
    if hull.down_monotone:
        coeffs = [c if c > 0 else Fraction(0) for c in coeffs]
    mult = lcm(rhs.denominator, *(c.denominator for c in coeffs))
    nums = [int(c * mult) for c in coeffs] + [int(rhs * mult)]
    g = 0
    for v in nums:
        g = gcd(g, v)
    if g > 1:
        nums = [v // g for v in nums]
    return make_row(nums[:-1], Relation.LE, nums[-1])


def _best_separator(vertices, rays, point):
    """Max-violation separating plane with coefficients boxed in [-1, 1].

    Variables: y = yp - ym in [-1,1]^n, y0 = tp - tm free.  Returns
    (coeffs, rhs) with coeffs.point > rhs, valid for all generators, or
    None when the point is inside.
    """
    n = len(point)
    ncols = 2 * n + 2
    rows = []
    for v in vertices:
        co = [Fraction(c) for c in v] + [Fraction(-c) for c in v]
        co += [Fraction(-1), Fraction(1)]
        rows.append(LinearConstraint(tuple(co), Relation.LE, Fraction(0)))
    for r in rays:
        co = [Fraction(c) for c in r] + [Fraction(-c) for c in r]
        co += [Fraction(0), Fraction(0)]
        rows.append(LinearConstraint(tuple(co), Relation.LE, Fraction(0)))
    obj = [Fraction(c) for c in point] + [Fraction(-c) for c in point]
    obj += [Fraction(-1), Fraction(1)]
    upper = [Fraction(1)] * (2 * n) + [None, None]
    res = solve_lp_rows(obj, rows, Sense.MAX, upper, check=False)
    assert res.status is LpStatus.OPTIMAL, "separation LP is bounded"
    if res.value <= 0:
        return None
    x = res.point
    coeffs = [x[j] - x[n + j] for j in range(n)]
    rhs = x[2 * n] - x[2 * n + 1]
    return coeffs, rhs


def _is_binary_box(points: Sequence[tuple[int, ...]]) -> bool:
    return all(all(v in (0, 1) for v in p) for p in points)


def reduce_to_vertices(
    points: Sequence[tuple[int, ...]],
    rays: Sequence[tuple[int, ...]],
) -> tuple[tuple[int, ...], ...]:
    """Extreme points of conv(points) + cone(rays), Clarkson-style.

    Each candidate is tested against the hull of the vertices confirmed so
    far; a separating direction is pushed to the lexicographically smallest
    maximizer over all points, which is a genuine vertex because every ray
    is non-negative and the separator satisfies y.r <= 0 on rays.  For 0/1
    point sets without rays every point is a vertex, so no LPs are needed;
    an axis-ray domination filter disposes of most other candidates before
    any LP runs.
    """
    pts = sorted(set(points))
    if not pts:
        return ()
    assert all(all(v >= 0 for v in r) and any(r) for r in rays)
    if not rays and _is_binary_box(pts):
        return tuple(pts)
    axis_rays = {r.index(1) for r in rays if sum(r) == 1 and max(r) == 1}

    def quickly_inside(p, confirmed) -> bool:
        # p = v + (axis-ray combination) proves p non-extreme without an LP
        for v in confirmed:
            diff = [a - b for a, b in zip(p, v)]
            if all(d >= 0 for d in diff) and all(
                j in axis_rays for j, d in enumerate(diff) if d
            ):
                return True
        return False

    # the lexicographically smallest point is always a vertex
    confirmed: list[tuple[int, ...]] = [pts[0]]
    confirmed_set = {pts[0]}
    for p in pts:
        if p in confirmed_set or quickly_inside(p, confirmed):
            continue
        while True:
            cut = _best_separator(
                tuple(confirmed), tuple(rays), [Fraction(v) for v in p]
            )
            if cut is None:
                break
            best = _face_lexmin(pts, cut[0])
            assert best not in confirmed_set
            confirmed.append(best)
            confirmed_set.add(best)
            if best == p:
                break
    return tuple(sorted(confirmed))


def _face_lexmin(points, direction):
    """Lexicographically smallest maximizer of direction over the points."""
    best_val = None
    best = None
    for p in points:
        v = sum(d * c for d, c in zip(direction, p))
        if best_val is None or v > best_val or (v == best_val and p < best):
            best_val, best = v, p
    return best


# ---------------------------------------------------------------------------
# single-row integer hulls

def _primitive(vec: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for v in vec:
        g = gcd(g, v)
    return tuple(v // g for v in vec) if g > 1 else tuple(vec)


def _unit(n: int, j: int) -> tuple[int, ...]:
    e = [0] * n
    e[j] = 1
    return tuple(e)


def row_integer_hull(
    row: LinearConstraint,
    upper: Sequence[Optional[int]],
    klass: InstanceClass = InstanceClass.GENERAL,
    cap: Optional[int] = None,
) -> Hull:
    """Exact integer hull of one row together with the variable bounds.

    Dispatch is structural: non-negative <= rows enumerate below b/a_j
    caps (packing), non-negative >= rows below ceil(b/a_j) caps with
    coordinate rays (covering), bounded rows enumerate their box, and the
    unbounded mixed-sign case is solved for two variables by a staircase
    walk along the row's own recession direction.
    """
    n = len(row.coeffs)
    coeffs, rel, rhs = row.coeffs, row.relation, row.rhs
    nonneg = all(c >= 0 for c in coeffs)

    if rel is Relation.LE and nonneg:
        return _packing_row_hull(row, upper, cap)
    if rel is Relation.GE and nonneg and rhs >= 0:
        return _covering_row_hull(row, upper, cap)
    if all(u is not None for u in upper):
        box = [(0, int(u)) for u in upper]
        pts = enumerate_lattice([row], box, cap)
        if not pts:
            raise EmptyHullError(f"row has no lattice point in [0,u]: {row}")
        return Hull(reduce_to_vertices(pts, ()), (), n)
    if rel is Relation.GE:
        row = LinearConstraint(
            tuple(-c for c in coeffs), Relation.LE, -rhs
        )
        coeffs, rel, rhs = row.coeffs, row.relation, row.rhs
    if rel is Relation.EQ:
        raise ResourceLimitError(
            "equality row hull needs finite bounds on every variable"
        )
    neg = [j for j, c in enumerate(coeffs) if c < 0]
    pos = [j for j, c in enumerate(coeffs) if c > 0]
    if not pos:
        flipped = LinearConstraint(tuple(-c for c in coeffs), Relation.GE, -rhs)
        return _covering_row_hull(flipped, upper, cap)
    if n == 2 and all(u is None for u in upper) and len(pos) == 1 and len(neg) == 1:
        return _staircase_hull_2d(coeffs, rhs)
    raise ResourceLimitError(
        "unsupported row structure: mixed signs without finite bounds"
        f" in dimension {n}"
    )


def _packing_row_hull(row, upper, cap) -> Hull:
    n = len(row.coeffs)
    if row.rhs < 0:
        raise EmptyHullError(f"non-negative <= row with negative rhs: {row}")
    box = []
    rays = []
    for j, c in enumerate(row.coeffs):
        u = upper[j]
        if c > 0:
            hi = floor(row.rhs / c)
            if u is not None:
                hi = min(hi, u)
            box.append((0, hi))
        elif u is not None:
            box.append((0, u))
        else:
            box.append((0, 0))
            rays.append(_unit(n, j))
    pts = enumerate_lattice([row], box, cap)
    if not pts:
        raise EmptyHullError(f"packing row hull empty: {row}")
    down_monotone = all(u is None for u in upper)
    return Hull(reduce_to_vertices(pts, rays), tuple(rays), n, down_monotone)


def _covering_row_hull(row, upper, cap) -> Hull:
    n = len(row.coeffs)
    box = []
    rays = []
    for j, c in enumerate(row.coeffs):
        u = upper[j]
        if u is None:
            rays.append(_unit(n, j))
            box.append((0, max(0, ceil(row.rhs / c)) if c > 0 else 0))
        else:
            box.append((0, u))
    pts = enumerate_lattice([row], box, cap)
    if not pts:
        raise EmptyHullError(f"covering row hull empty: {row}")
    return Hull(reduce_to_vertices(pts, rays), tuple(rays), n)


def _staircase_hull_2d(coeffs, rhs) -> Hull:
    """Hull of {x in Z^2_+ : a1 x1 + a2 x2 <= b} with a1 > 0 > a2.

    After clearing denominators, the lower envelope
    x2 = max(0, ceil((a1 t - b)/|a2|)) translates by the primitive
    recession ray (|a2|, a1) once t passes b/a1, so all vertices live among
    the envelope points of the first period; coordinates are swapped up
    front when the signs come reversed.
    """
    swap = coeffs[0] < 0
    c1, c2 = (coeffs[1], coeffs[0]) if swap else (coeffs[0], coeffs[1])
    mult = lcm(c1.denominator, c2.denominator, rhs.denominator)
    a1, a2, b = int(c1 * mult), int(c2 * mult), int(rhs * mult)
    assert a1 > 0 and a2 < 0
    width = -a2
    t_end = max(0, ceil(Fraction(b, a1))) + width + 2
    pts = []
    for t in range(0, t_end + 1):
        y = max(0, ceil(Fraction(a1 * t - b, -a2)))
        pts.append((t, y))
    rays = [(0, 1), _primitive((-a2, a1))]
    verts = reduce_to_vertices(pts, rays)
    if swap:
        verts = tuple(sorted((q, p) for p, q in verts))
        rays = [(r[1], r[0]) for r in rays]
    return Hull(tuple(verts), tuple(rays), 2)


# ---------------------------------------------------------------------------
# optimizing over intersections of row hulls

def optimize_over_hulls(
    hulls: Sequence[Hull],
    base_rows: Sequence[LinearConstraint],
    objective: Sequence[Fraction],
    sense: Sense,
    upper: Sequence[Optional[Fraction]] = None,
) -> tuple[LpStatus, Optional[Fraction]]:
    """Cut loop: solve the LP, separate from every hull, repeat until inside.

    Terminates because each hull's separation LP has finitely many basic
    optima and a returned cut can never be violated twice.
    """
    n = hulls[0].n if hulls else len(objective)
    cuts: list[LinearConstraint] = []
    seen: set = set()
    for _ in range(100000):
        res = solve_lp_rows(objective, list(base_rows) + cuts, sense, upper, check=False)
        if res.status is LpStatus.INFEASIBLE:
            return LpStatus.INFEASIBLE, None
        if res.status is LpStatus.UNBOUNDED:
            return LpStatus.UNBOUNDED, None
        new = []
        for hull in hulls:
            cut = separate_point_from_hull(hull, res.point)
            if cut is not None:
                key = (cut.coeffs, cut.rhs)
                if key not in seen:
                    seen.add(key)
                    new.append(cut)
        if not new:
            return LpStatus.OPTIMAL, res.value
        cuts.extend(new)
    raise ResourceLimitError("hull cut loop failed to converge")


def optimize_over_hull_intersection(
    rows: Sequence[LinearConstraint],
    upper: Sequence[Optional[int]],
    klass: InstanceClass,
    objective: Sequence[Fraction],
    sense: Sense,
    cap: Optional[int] = None,
) -> tuple[LpStatus, Optional[Fraction]]:
    """Exact optimum over the intersection of single-row integer hulls."""
    try:
        hulls = [row_integer_hull(row, upper, klass, cap) for row in rows]
    except EmptyHullError:
        return LpStatus.INFEASIBLE, None
    upper_f = [None if u is None else Fraction(u) for u in upper]
    return optimize_over_hulls(hulls, rows, objective, sense, upper_f)
