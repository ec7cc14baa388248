"""Closure values and derived quantities.

Computes the LP value, the pre-processed packing LP, the knapsack-cover
closure, full and 1-row CG closures (via the separation MIP and an eps
ladder), the 1-row aggregation closure (via row hulls), sampled brackets
for the full aggregation closure, rank lower bounds from the integrality
gap, and the clique-inequality derivation certificate.

The aggregation-closure value is never claimed exactly: it is bracketed
between a sampled outer optimum and the 2-approximation / integer-hull
inner bounds, and every downstream check is phrased against the bracket.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, comb, floor
from typing import Iterable, Optional, Sequence

from .branch_bound import MipStatus, solve_mip
from .cg import EPS_LADDER, CgCut, one_row_masks, separate_cg
from .errors import (
    AmbiguousRoundingError,
    ResourceLimitError,
    ValidationError,
)
from .hull import optimize_over_hull_intersection, optimize_over_hulls, row_integer_hull
from .instances import (
    IlpInstance,
    InstanceClass,
    LinearConstraint,
    Relation,
    Sense,
    SplitMix64,
    classify,
    make_row,
)
from .simplex import LpStatus, solve_lp, solve_lp_rows

MAX_CLOSURE_CUTS = 500

FLAG_EPS_LADDER = "eps_ladder_exhausted"
FLAG_ITERATION_CAPPED = "iteration_capped"
FLAG_LAMBDA_SKIPPED = "agg_lambda_skipped"


# ---------------------------------------------------------------------------
# pre-processed LP and knapsack-cover machinery

def z_lp_star(inst: IlpInstance) -> Fraction:
    """Packing LP with x_j pinned to 0 wherever some A_ij exceeds b_i."""
    if classify(inst) is not InstanceClass.PACKING:
        raise ValidationError("pre-processed LP is defined for packing instances")
    pinned = {
        j
        for row in inst.rows
        for j, c in enumerate(row.coeffs)
        if c > row.rhs
    }
    extra = []
    for j in sorted(pinned):
        coeffs = [Fraction(0)] * inst.n
        coeffs[j] = Fraction(1)
        extra.append(make_row(coeffs, Relation.LE, 0))
    res = solve_lp(inst, extra)
    if res.status is not LpStatus.OPTIMAL:
        raise ValidationError(f"pre-processed LP not optimal: {res.status}")
    return res.value


def kc_inequality(
    row: LinearConstraint, upper: Sequence[Optional[int]], subset: Iterable[int]
) -> LinearConstraint:
    """Knapsack-cover inequality of the row for the index set ``subset``.

    Coefficients outside the set are clipped at the residual demand; a
    non-positive residual yields the trivial inequality 0 >= residual.
    """
    if row.relation is not Relation.GE or any(c < 0 for c in row.coeffs):
        raise ValidationError("knapsack-cover inequalities need a covering row")
    subset = set(subset)
    for j in subset:
        if upper[j] is None:
            raise ValidationError(f"x{j} in the cover set has no finite bound")
    residual = row.rhs - sum(Fraction(upper[j]) * row.coeffs[j] for j in subset)
    n = len(row.coeffs)
    if residual <= 0:
        return make_row([0] * n, Relation.GE, residual)
    coeffs = [
        Fraction(0) if j in subset else min(row.coeffs[j], residual)
        for j in range(n)
    ]
    return LinearConstraint(tuple(coeffs), Relation.GE, residual)


def z_kc(inst: IlpInstance, max_cuts: int = MAX_CLOSURE_CUTS) -> Fraction:
    """Exact optimum over the KC closure, by exhaustive subset separation."""
    klass = classify(inst)
    if klass not in (InstanceClass.COVERING, InstanceClass.COVERING_WITH_BOUNDS):
        raise ValidationError("KC closure is defined for covering instances")
    if inst.n > 22:
        raise ResourceLimitError(
            f"KC separation enumerates subsets; n={inst.n} exceeds 22"
        )
    row_subsets: list[list[tuple[int, ...]]] = []
    for row in inst.rows:
        eligible = [
            j
            for j, c in enumerate(row.coeffs)
            if c > 0 and inst.upper[j] is not None
        ]
        subsets = []
        for r in range(len(eligible) + 1):
            subsets.extend(combinations(eligible, r))
        row_subsets.append(subsets)

    cuts: list[LinearConstraint] = []
    seen: set = set()
    for _ in range(max_cuts):
        res = solve_lp(inst, cuts)
        if res.status is not LpStatus.OPTIMAL:
            raise ValidationError(f"KC closure LP not optimal: {res.status}")
        x = res.point
        added = False
        for row, subsets in zip(inst.rows, row_subsets):
            best = None
            for subset in subsets:
                kc = kc_inequality(row, inst.upper, subset)
                violation = kc.rhs - kc.lhs(x)
                if violation > 0 and (best is None or violation > best[0]):
                    best = (violation, kc)
            if best is not None:
                key = (best[1].coeffs, best[1].rhs)
                if key not in seen:
                    seen.add(key)
                    cuts.append(best[1])
                    added = True
        if not added:
            return res.value
    raise ResourceLimitError("KC closure loop exceeded the cut cap")


# ---------------------------------------------------------------------------
# CG closures

@dataclass
class CgClosureResult:
    status: str                      # "optimal" | "infeasible"
    value: Optional[Fraction]
    cuts: list[CgCut]
    flags: set[str] = field(default_factory=set)


def z_cg(
    inst: IlpInstance,
    mode: str = "full",
    max_cuts: int = MAX_CLOSURE_CUTS,
    ladder: Sequence[Fraction] = EPS_LADDER,
) -> CgClosureResult:
    """Optimum over the CG closure ("full") or the 1-row CG closure ("onerow").

    Cutting loop: optimize, separate the most violated CG cut (per mask in
    1-row mode), add, repeat.  Terminates when the eps ladder is exhausted
    with no violated cut (flagged: the ladder approximates multipliers in
    [0,1)), when the LP becomes infeasible (closure empty), or at the cut
    cap (flagged, value is the current relaxation bound).
    """
    if mode not in ("full", "onerow"):
        raise ValidationError(f"unknown CG mode {mode!r}")
    orient = Relation.GE if inst.sense is Sense.MIN else Relation.LE
    masks = (
        [frozenset(range(inst.m))] if mode == "full" else one_row_masks(inst)
    )
    cuts: list[CgCut] = []
    seen: set = set()
    flags: set[str] = set()
    while len(cuts) < max_cuts:
        res = solve_lp(inst, [c.as_constraint() for c in cuts])
        if res.status is LpStatus.INFEASIBLE:
            return CgClosureResult("infeasible", None, cuts, flags)
        if res.status is LpStatus.UNBOUNDED:
            raise ValidationError(
                "CG closure needs an LP bounded in the optimization direction"
            )
        added = False
        for mask in masks:
            found = None
            for eps in ladder:
                found = separate_cg(
                    inst.rows, inst.upper, res.point, mask, eps, orient
                )
                if found is not None:
                    break
            if found is not None:
                key = (found.alpha, found.beta, found.relation)
                assert key not in seen, "separated a cut already in the LP"
                seen.add(key)
                cuts.append(found)
                added = True
                if len(cuts) >= max_cuts:
                    break
        if not added:
            flags.add(FLAG_EPS_LADDER)
            return CgClosureResult("optimal", res.value, cuts, flags)
    flags.add(FLAG_ITERATION_CAPPED)
    res = solve_lp(inst, [c.as_constraint() for c in cuts])
    if res.status is LpStatus.INFEASIBLE:
        return CgClosureResult("infeasible", None, cuts, flags)
    return CgClosureResult("optimal", res.value, cuts, flags)


def z_agg_1row(inst: IlpInstance) -> tuple[LpStatus, Optional[Fraction]]:
    """Optimum over the intersection of single-row integer hulls."""
    return optimize_over_hull_intersection(
        inst.rows, inst.upper, classify(inst), inst.objective, inst.sense
    )


# ---------------------------------------------------------------------------
# sampled aggregation bracket

@dataclass(frozen=True)
class AggBracket:
    lo: Fraction
    hi: Fraction
    sampled_value: Fraction
    lambdas_used: int
    lambdas_skipped: int


def default_lambdas(m: int, extra_seed: int = 0xC10B) -> list[tuple[int, ...]]:
    """Unit vectors, pairwise row sums, and 20 seeded small random vectors."""
    out = []
    for i in range(m):
        vec = [0] * m
        vec[i] = 1
        out.append(tuple(vec))
    for i in range(m):
        for k in range(i + 1, m):
            vec = [0] * m
            vec[i] = vec[k] = 1
            out.append(tuple(vec))
    rng = SplitMix64(extra_seed)
    for _ in range(20):
        vec = tuple(rng.randint(0, 4) for _ in range(m))
        if any(vec):
            out.append(vec)
    return out


def agg_bracket(
    inst: IlpInstance, lambdas: Optional[Sequence[Sequence[Fraction]]] = None
) -> AggBracket:
    """Bracket for the aggregation-closure value: sampled outer optimum on
    one side, integer optimum and 2-approximation bounds on the other."""
    klass = classify(inst)
    if klass is InstanceClass.PACKING:
        relation = Relation.LE
    elif klass in (InstanceClass.COVERING, InstanceClass.COVERING_WITH_BOUNDS):
        relation = Relation.GE
    else:
        raise ValidationError("aggregation brackets need packing or covering")
    if lambdas is None:
        lambdas = default_lambdas(inst.m)

    hulls = []
    skipped = 0
    for lam in lambdas:
        lam = [Fraction(v) for v in lam]
        if len(lam) != inst.m or any(v < 0 for v in lam) or not any(lam):
            raise ValidationError(f"bad aggregation multiplier vector {lam}")
        coeffs = [
            sum((lam[i] * inst.rows[i].coeffs[j] for i in range(inst.m)), Fraction(0))
            for j in range(inst.n)
        ]
        rhs = sum((lam[i] * inst.rows[i].rhs for i in range(inst.m)), Fraction(0))
        row = LinearConstraint(tuple(coeffs), relation, rhs)
        try:
            hulls.append(row_integer_hull(row, inst.upper, klass))
        except ResourceLimitError:
            skipped += 1
    upper = [None if u is None else Fraction(u) for u in inst.upper]
    status, sampled = optimize_over_hulls(
        hulls, inst.rows, inst.objective, inst.sense, upper
    )
    if status is not LpStatus.OPTIMAL:
        raise ValidationError(f"sampled aggregation optimum not optimal: {status}")

    mip = solve_mip(inst)
    if mip.status is not MipStatus.OPTIMAL:
        raise ValidationError("aggregation bracket needs an integer-feasible instance")
    z_i = mip.value
    if klass is InstanceClass.PACKING:
        lo = max(z_i, z_lp_star(inst) / 2)
        hi = sampled
    else:
        lo = sampled
        hi = min(z_i, 2 * z_kc(inst))
    if lo > hi:
        raise AssertionError("aggregation bracket ends crossed")
    return AggBracket(lo, hi, sampled, len(hulls), skipped)


# ---------------------------------------------------------------------------
# rank bounds via exact logarithms

def _exact_log2(x: Fraction) -> Optional[Fraction]:
    """log2(x) when x is an exact power of two, else None."""
    if x <= 0:
        return None
    num, den = x.numerator, x.denominator
    if den == 1:
        if num & (num - 1) == 0:
            return Fraction(num.bit_length() - 1)
        return None
    if num == 1 and den & (den - 1) == 0:
        return Fraction(-(den.bit_length() - 1))
    return None


def _log2_enclosure(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """lo <= log2(x) <= hi with width at most 2^-bits, exactly."""
    assert x > 0
    exact = _exact_log2(x)
    if exact is not None:
        return exact, exact
    e = 0
    while x >= 2:
        x /= 2
        e += 1
    while x < 1:
        x *= 2
        e -= 1
    p = bits + 8
    scale = 1 << p

    def digits(m: int, round_up: bool) -> Fraction:
        total = Fraction(0)
        step = Fraction(1, 2)
        for _ in range(bits + 4):
            m = m * m
            if round_up:
                m = -((-m) >> p)
            else:
                m >>= p
            if m >= 2 * scale:
                total += step
                m = -((-m) >> 1) if round_up else m >> 1
            step /= 2
        if round_up:
            total += 2 * step
        return total

    lo_m = (x.numerator * scale) // x.denominator
    hi_m = -((-x.numerator * scale) // x.denominator)
    lo = e + digits(lo_m, round_up=False)
    hi = e + digits(hi_m, round_up=True)
    assert hi - lo <= Fraction(1, 1 << bits), "log enclosure too wide"
    return lo, hi


@dataclass(frozen=True)
class RankBound:
    k: int
    bound: int
    gap: Fraction


def rank_lower_bound(
    z_lp: Fraction,
    z_i: Fraction,
    k: int,
    klass: InstanceClass,
    inst: Optional[IlpInstance] = None,
) -> RankBound:
    """Lower bound on the k-aggregation rank from the integrality gap.

    Packing: ceil(log2(gap)/log2(k+1)) computed as the least t with
    (k+1)^t >= gap, pure integer arithmetic.  Covering: the denominator
    3 + log2(log2(2k)) is irrational for most k, so the ceiling is decided
    through rational log enclosures, widened until unambiguous.
    """
    if k < 1:
        raise ValidationError("k must be at least 1")
    z_lp, z_i = Fraction(z_lp), Fraction(z_i)
    if z_lp <= 0 or z_i <= 0:
        raise ValidationError("rank bounds need positive objective values")
    if inst is not None:
        for row in inst.rows:
            if any(c > row.rhs for c in row.coeffs):
                raise ValidationError(
                    "rank bound hypothesis violated: some A_ij > b_i"
                )
    if klass is InstanceClass.PACKING:
        gap = z_lp / z_i
        if gap < 1:
            raise ValidationError("packing gap below 1")
        t, power = 0, Fraction(1)
        while power < gap:
            t += 1
            power *= k + 1
        return RankBound(k, t, gap)
    if klass in (InstanceClass.COVERING, InstanceClass.COVERING_WITH_BOUNDS):
        gap = z_i / z_lp
        if gap < 1:
            raise ValidationError("covering gap below 1")
        num_exact = _exact_log2(gap)
        inner = _exact_log2(Fraction(2 * k))
        den_exact = None
        if inner is not None:
            outer = _exact_log2(inner) if inner > 0 else None
            if inner == 1:
                den_exact = Fraction(3)
            elif outer is not None:
                den_exact = 3 + outer
        if num_exact is not None and den_exact is not None:
            bound = ceil(num_exact / den_exact) if den_exact else 0
            return RankBound(k, max(bound, 0), gap)
        for bits in (20, 30):
            num_lo, num_hi = (
                (num_exact, num_exact)
                if num_exact is not None
                else _log2_enclosure(gap, bits)
            )
            if den_exact is not None:
                den_lo = den_hi = den_exact
            else:
                in_lo, in_hi = _log2_enclosure(Fraction(2 * k), bits)
                out_lo, out_hi = (
                    _log2_enclosure(in_lo, bits)[0],
                    _log2_enclosure(in_hi, bits)[1],
                )
                den_lo, den_hi = 3 + out_lo, 3 + out_hi
            lo_q = num_lo / den_hi
            hi_q = num_hi / den_lo
            if ceil(lo_q) == ceil(hi_q):
                return RankBound(k, max(ceil(lo_q), 0), gap)
        raise AmbiguousRoundingError(
            "rank ceiling ambiguous at enclosure width 2^-30"
        )
    raise ValidationError("rank bounds are defined for packing or covering")


# ---------------------------------------------------------------------------
# clique-inequality CG derivation certificate

@dataclass(frozen=True)
class CliqueRound:
    size: int             # clique size derived this round
    prev_size: int        # size of the sub-inequalities aggregated
    weight: Fraction      # conic weight on each sub-inequality
    pre_rounding_rhs: Fraction
    rhs: int              # always 1 after rounding


@dataclass(frozen=True)
class CliqueCertificate:
    n: int
    rounds: tuple[CliqueRound, ...]
    total_rounds: int


def clique_cg_derivation(n: int) -> CliqueCertificate:
    """Round-by-round derivation of sum(x) <= 1 on an n-clique.

    Each round aggregates, for a target set S of size s' = min(2s-1, n),
    all size-s sub-inequalities with weight 1/C(s'-1, s-1); per-element
    coefficients aggregate to exactly 1 and the right-hand side to
    s'/s < 2, which rounds down to 1.  The number of rounds equals
    ceil(log2(n-1)).
    """
    if n < 3:
        raise ValidationError("clique derivation needs n >= 3")
    rounds = []
    size = 2
    while size < n:
        new_size = min(2 * size - 1, n)
        weight = Fraction(1, comb(new_size - 1, size - 1))
        coeff = comb(new_size - 1, size - 1) * weight
        pre_rhs = comb(new_size, size) * weight
        assert coeff == 1, "per-element aggregation coefficient must be 1"
        assert pre_rhs == Fraction(new_size, size), "aggregated rhs mismatch"
        assert 1 <= pre_rhs < 2 and floor(pre_rhs) == 1, "rounding must give 1"
        rounds.append(
            CliqueRound(new_size, size, weight, pre_rhs, 1)
        )
        size = new_size
    total = len(rounds)
    expect = 0
    while (1 << expect) < n - 1:
        expect += 1
    assert total == expect, "round count differs from ceil(log2(n-1))"
    return CliqueCertificate(n, tuple(rounds), total)


def validate_clique_round(n: int, rnd: CliqueRound) -> bool:
    """Rebuild one round's aggregation explicitly on the first target set."""
    target = tuple(range(rnd.size))
    coeffs = [Fraction(0)] * n
    rhs = Fraction(0)
    for subset in combinations(target, rnd.prev_size):
        for v in subset:
            coeffs[v] += rnd.weight
        rhs += rnd.weight  # each previous-round inequality has rhs 1
    expected = [Fraction(1) if v in target else Fraction(0) for v in range(n)]
    return coeffs == expected and rhs == rnd.pre_rounding_rhs and floor(rhs) == rnd.rhs


# ---------------------------------------------------------------------------
# reports and chain verification

VALUE_KEYS = ("LP", "LPSTAR", "KC", "CG", "CG1ROW", "AGG1ROW", "IP")


@dataclass
class ClosureReport:
    name: str
    klass: InstanceClass
    n: int
    m: int
    values: dict = field(default_factory=dict)
    agg_bracket: Optional[AggBracket] = None
    flags: set = field(default_factory=set)
    cut_counts: dict = field(default_factory=dict)
    wall_ms: dict = field(default_factory=dict)

    def value(self, key: str) -> Optional[Fraction]:
        v = self.values.get(key)
        return v if isinstance(v, Fraction) else None


def compute_closures(
    inst: IlpInstance,
    which: Iterable[str] = VALUE_KEYS,
    lambdas: Optional[Sequence[Sequence[Fraction]]] = None,
    max_cuts: int = MAX_CLOSURE_CUTS,
) -> ClosureReport:
    """Compute the requested closure values for one instance."""
    which = {w.upper() for w in which}
    known = set(VALUE_KEYS) | {"AGG"}
    unknown = which - known
    if unknown:
        raise ValidationError(f"unknown closure name(s): {sorted(unknown)}")
    report = ClosureReport(inst.name, classify(inst), inst.n, inst.m)

    def timed(key, fn):
        t0 = time.perf_counter()
        out = fn()
        report.wall_ms[key] = (time.perf_counter() - t0) * 1000.0
        return out

    if "LP" in which:
        res = timed("LP", lambda: solve_lp(inst))
        report.values["LP"] = res.value if res.status is LpStatus.OPTIMAL else res.status.value
    if "LPSTAR" in which:
        report.values["LPSTAR"] = timed("LPSTAR", lambda: z_lp_star(inst))
    if "KC" in which:
        report.values["KC"] = timed("KC", lambda: z_kc(inst, max_cuts))
    if "CG" in which:
        res = timed("CG", lambda: z_cg(inst, "full", max_cuts))
        report.values["CG"] = res.value if res.status == "optimal" else res.status
        report.cut_counts["CG"] = len(res.cuts)
        report.flags |= res.flags
    if "CG1ROW" in which:
        res = timed("CG1ROW", lambda: z_cg(inst, "onerow", max_cuts))
        report.values["CG1ROW"] = res.value if res.status == "optimal" else res.status
        report.cut_counts["CG1ROW"] = len(res.cuts)
        report.flags |= res.flags
    if "AGG1ROW" in which:
        status, value = timed("AGG1ROW", lambda: z_agg_1row(inst))
        report.values["AGG1ROW"] = value if status is LpStatus.OPTIMAL else status.value
    if "AGG" in which:
        bracket = timed("AGG", lambda: agg_bracket(inst, lambdas))
        report.agg_bracket = bracket
        if bracket.lambdas_skipped:
            report.flags.add(FLAG_LAMBDA_SKIPPED)
    if "IP" in which:
        res = timed("IP", lambda: solve_mip(inst))
        report.values["IP"] = (
            res.value if res.status is MipStatus.OPTIMAL else res.status.value
        )
    return report


def verify_chain(report: ClosureReport) -> list[tuple[str, Optional[bool]]]:
    """The per-class approximation chain, each check exact or skipped."""
    v = report.value
    checks: list[tuple[str, Optional[bool]]] = []

    def add(name, left, right):
        if left is None or right is None:
            checks.append((name, None))
        else:
            checks.append((name, left <= right))

    if report.klass is InstanceClass.PACKING:
        add("z_agg1 <= z_cg1", v("AGG1ROW"), v("CG1ROW"))
        add("z_cg1 <= z_lpstar", v("CG1ROW"), v("LPSTAR"))
        add("z_lpstar <= 2*z_cg", v("LPSTAR"), None if v("CG") is None else 2 * v("CG"))
        add("z_cg1 <= 2*z_cg", v("CG1ROW"), None if v("CG") is None else 2 * v("CG"))
    elif report.klass in (InstanceClass.COVERING, InstanceClass.COVERING_WITH_BOUNDS):
        add("z_cg <= 2*z_cg1", v("CG"), None if v("CG1ROW") is None else 2 * v("CG1ROW"))
        lo = report.agg_bracket.lo if report.agg_bracket else None
        add("agg_lo <= 2*z_agg1", lo, None if v("AGG1ROW") is None else 2 * v("AGG1ROW"))
        add("agg_lo <= 2*z_kc", lo, None if v("KC") is None else 2 * v("KC"))
    return checks
