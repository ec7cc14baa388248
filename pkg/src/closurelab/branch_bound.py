"""Exact branch and bound over the rational simplex.

Search rules are pinned for determinism: branch on the most fractional
integer variable (ties to the lowest index), explore best-bound first
(ties newest-first, which plunges on bound plateaus), prune on
``bound <= incumbent`` for MAX (mirrored for MIN) with exact comparisons.
Infeasibility verdicts always exhaust the tree.

The root relaxation is solved cold; every other node re-solves by the
exact dual simplex from the root-optimal basis (bound tightenings keep
dual feasibility), which takes a handful of pivots instead of a full
two-phase run.  When the objective is integral over the integer variables
(zero on continuous ones up to a common denominator), node bounds are
rounded onto the objective's lattice before pruning.

The engine takes an integrality mask so the cut-separation MIPs (integer
cut coefficients, continuous multipliers) run on the same search; the
instance-level ``solve_mip`` treats every variable as integer.
"""

from __future__ import annotations

import heapq
import os
import sys
import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import ceil, floor, lcm
from typing import Optional, Sequence

from .instances import IlpInstance, LinearConstraint, Sense
from .simplex import LpStatus, WarmLp, scale_lp, solve_scaled

_TRACE = os.environ.get("CLOSURELAB_TRACE_BB") == "1"


class MipStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED_RELAXATION = "unbounded_relaxation"
    CUTOFF = "cutoff"


@dataclass(frozen=True)
class MipResult:
    status: MipStatus
    point: Optional[tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None
    node_count: int = 0


def solve_milp_rows(
    objective: Sequence[Fraction],
    rows: Sequence[LinearConstraint],
    sense: Sense,
    upper: Optional[Sequence[Optional[Fraction]]] = None,
    integer: Optional[Sequence[bool]] = None,
    cutoff: Optional[Fraction] = None,
    ceiling: Optional[Fraction] = None,
) -> MipResult:
    """Exact MILP solve; ``integer[j]`` marks which variables must be integral.

    ``cutoff`` acts as a virtual incumbent: subtrees that cannot beat it are
    pruned, and status CUTOFF is reported when nothing better exists.
    ``ceiling`` is a caller-proven bound on the optimum (MAX sense: no
    feasible value exceeds it); an incumbent reaching it is accepted as
    optimal without exhausting the tree.
    """
    n = len(objective)
    objective = [Fraction(c) for c in objective]
    if upper is None:
        upper = [None] * n
    upper = [None if u is None else Fraction(u) for u in upper]
    if integer is None:
        integer = [True] * n
    maximizing = sense is Sense.MAX

    # exact bound rounding: feasible values live on a lattice (1/grain) Z
    # whenever continuous variables carry zero objective
    grain: Optional[int] = None
    if all(integer[j] or objective[j] == 0 for j in range(n)):
        grain = lcm(*(objective[j].denominator for j in range(n))) if n else 1

    def tighten(bound: Fraction) -> Fraction:
        if grain is None:
            return bound
        if maximizing:
            return Fraction(floor(bound * grain), grain)
        return Fraction(ceil(bound * grain), grain)

    def better(a: Fraction, b: Fraction) -> bool:
        return a > b if maximizing else a < b

    scaled = scale_lp(objective, rows, sense, upper)
    # per-variable scale for bound values (sigma denominators)
    sig_den = [int(1 / s) if s != 1 else 1 for s in scaled.sigma]

    status, vals, value, root_tab = solve_scaled(scaled, keep_tableau=True)
    node_count = 1
    if status is LpStatus.INFEASIBLE:
        return MipResult(status=MipStatus.INFEASIBLE, node_count=node_count)
    if status is LpStatus.UNBOUNDED:
        return MipResult(status=MipStatus.UNBOUNDED_RELAXATION, node_count=node_count)
    warm = WarmLp(scaled, root_tab)
    point = tuple(v * s for v, s in zip(vals, scaled.sigma))

    def node_solve(lo_map: dict[int, int], hi_map: dict[int, int]):
        """Dual re-solve with extra integer bounds (original variable units)."""
        lower = [0] * n
        node_upper = list(scaled.int_upper)
        for j, lo in lo_map.items():
            lower[j] = lo * sig_den[j]
        for j, hi in hi_map.items():
            h = hi * sig_den[j]
            node_upper[j] = h if node_upper[j] is None else min(node_upper[j], h)
        st, nvals, nvalue = warm.solve_node(lower, node_upper)
        if st is not LpStatus.OPTIMAL:
            return st, None, None
        npoint = tuple(v * s for v, s in zip(nvals, scaled.sigma))
        return st, npoint, nvalue

    incumbent: Optional[tuple[Fraction, ...]] = None
    incumbent_value: Optional[Fraction] = cutoff
    counter = 0

    def heap_key(bound: Fraction) -> Fraction:
        return -bound if maximizing else bound

    def fractional_var(pt) -> Optional[int]:
        best_j, best_dist = None, Fraction(0)
        for j in range(n):
            if not integer[j]:
                continue
            v = pt[j]
            if v.denominator == 1:
                continue
            frac = v - floor(v)
            dist = min(frac, 1 - frac)
            if dist > best_dist:
                best_j, best_dist = j, dist
        return best_j

    def dive(pt):
        """Deterministic rounding dive for an early incumbent: repeatedly fix
        the most fractional variable to its nearest integer (ties down) and
        re-solve; one retry on the other side per level.  Fixed variables
        stay integral, so each level fixes a fresh variable."""
        nonlocal node_count
        lo_map: dict[int, int] = {}
        hi_map: dict[int, int] = {}
        for _ in range(n + 1):
            j = fractional_var(pt)
            if j is None:
                return pt
            v = pt[j]
            near = floor(v) if v - floor(v) <= Fraction(1, 2) else floor(v) + 1
            other = floor(v) if near != floor(v) else floor(v) + 1
            placed = False
            for r in (near, other):
                st, dpt, _ = node_solve({**lo_map, j: r}, {**hi_map, j: r})
                node_count += 1
                if st is LpStatus.OPTIMAL:
                    lo_map = {**lo_map, j: r}
                    hi_map = {**hi_map, j: r}
                    pt = dpt
                    placed = True
                    break
            if not placed:
                return None
        return None

    dived = dive(point)
    if dived is not None:
        dval = sum((objective[k] * dived[k] for k in range(n)), Fraction(0))
        if incumbent_value is None or better(dval, incumbent_value):
            incumbent, incumbent_value = dived, dval

    # ties on the bound pop newest-first: cut-separation MIPs sit on wide
    # bound plateaus where FIFO order degenerates into breadth-first flooding
    heap: list = []
    bound0 = tighten(value)
    heapq.heappush(heap, (heap_key(bound0), 0, bound0, point, ({}, {})))

    def at_ceiling() -> bool:
        return (
            ceiling is not None
            and incumbent is not None
            and not better(ceiling, incumbent_value)
        )

    t_start = time.perf_counter() if _TRACE else 0.0
    while heap and not at_ceiling():
        if _TRACE and node_count % 20000 < 2:
            print(
                f"[bb] nodes={node_count} heap={len(heap)} "
                f"best={heap[0][2]} inc={incumbent_value} "
                f"{time.perf_counter() - t_start:.0f}s",
                file=sys.stderr,
                flush=True,
            )
        _, _, bound, pt, (lo_map, hi_map) = heapq.heappop(heap)
        if incumbent_value is not None and not better(bound, incumbent_value):
            continue
        j = fractional_var(pt)
        if j is None:
            # all integer variables integral at this node's LP optimum;
            # the node's exact LP value may beat its rounded heap bound
            node_val = sum((objective[k] * pt[k] for k in range(n)), Fraction(0))
            if incumbent_value is None or better(node_val, incumbent_value):
                incumbent, incumbent_value = pt, node_val
            continue
        v = pt[j]
        for child_lo, child_hi in (
            (lo_map, {**hi_map, j: floor(v)}),
            ({**lo_map, j: floor(v) + 1}, hi_map),
        ):
            if j in child_hi and child_hi[j] < child_lo.get(j, 0):
                continue
            status, cpt, cval = node_solve(child_lo, child_hi)
            node_count += 1
            if status is LpStatus.INFEASIBLE:
                continue
            assert status is LpStatus.OPTIMAL, "child node cannot be unbounded"
            cbound = tighten(cval)
            if incumbent_value is not None and not better(cbound, incumbent_value):
                continue
            counter += 1
            heapq.heappush(
                heap, (heap_key(cbound), -counter, cbound, cpt, (child_lo, child_hi))
            )

    if incumbent is None:
        if cutoff is not None:
            return MipResult(status=MipStatus.CUTOFF, node_count=node_count)
        return MipResult(status=MipStatus.INFEASIBLE, node_count=node_count)
    return MipResult(
        status=MipStatus.OPTIMAL,
        point=incumbent,
        value=incumbent_value,
        node_count=node_count,
    )


def solve_mip(
    inst: IlpInstance, extra_cuts: Sequence[LinearConstraint] = ()
) -> MipResult:
    """Ground-truth integer optimum of the instance (all variables integer)."""
    rows = list(inst.rows) + list(extra_cuts)
    upper = [None if u is None else Fraction(u) for u in inst.upper]
    res = solve_milp_rows(inst.objective, rows, inst.sense, upper)
    if res.status is MipStatus.OPTIMAL:
        point = res.point
        assert all(v.denominator == 1 for v in point)
        for row in rows:
            assert row.satisfied_by(point), "integer point violates a row"
    return res
