"""ILP instances: model types, classification, paper families, random
generators, and the JSON file format.

All generators are pure functions of their arguments.  Randomness comes from
an in-repo splitmix64 stream so that the byte-identical-output contract holds
across platforms and Python versions (the stdlib ``random`` distribution
methods carry no such guarantee).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ValidationError
from .rational import format_rational, parse_rational


class Relation(Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class Sense(Enum):
    MAX = "max"
    MIN = "min"


class InstanceClass(Enum):
    PACKING = "packing"
    COVERING = "covering"
    COVERING_WITH_BOUNDS = "covering_with_bounds"
    GENERAL = "general"


@dataclass(frozen=True)
class LinearConstraint:
    """One row ``coeffs . x  REL  rhs`` over the instance's variables."""

    coeffs: tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction

    def lhs(self, point: Sequence[Fraction]) -> Fraction:
        return sum((c * x for c, x in zip(self.coeffs, point)), Fraction(0))

    def satisfied_by(self, point: Sequence[Fraction]) -> bool:
        v = self.lhs(point)
        if self.relation is Relation.LE:
            return v <= self.rhs
        if self.relation is Relation.GE:
            return v >= self.rhs
        return v == self.rhs


def make_row(coeffs: Iterable, relation: Relation, rhs) -> LinearConstraint:
    return LinearConstraint(
        tuple(Fraction(c) for c in coeffs), relation, Fraction(rhs)
    )


@dataclass(frozen=True)
class IlpInstance:
    """Objective, rows, and integral-or-infinite upper bounds.

    Lower bounds are implicitly 0 on every variable; ``upper[j] is None``
    means +infinity.
    """

    name: str
    sense: Sense
    objective: tuple[Fraction, ...]
    rows: tuple[LinearConstraint, ...]
    upper: tuple[int | None, ...]

    def __post_init__(self) -> None:
        n = len(self.objective)
        if n < 1:
            raise ValidationError(f"{self.name}: need at least one variable")
        if len(self.rows) < 1:
            raise ValidationError(f"{self.name}: need at least one row")
        if len(self.upper) != n:
            raise ValidationError(f"{self.name}: upper-bound vector length != n")
        for i, row in enumerate(self.rows):
            if len(row.coeffs) != n:
                raise ValidationError(f"{self.name}: row {i} length != n")
        for j, u in enumerate(self.upper):
            if u is None:
                continue
            if not isinstance(u, int) or isinstance(u, bool) or u < 0:
                raise ValidationError(
                    f"{self.name}: finite upper bound on x{j} must be a"
                    f" non-negative integer, got {u!r}"
                )

    @property
    def n(self) -> int:
        return len(self.objective)

    @property
    def m(self) -> int:
        return len(self.rows)


def classify(inst: IlpInstance) -> InstanceClass:
    """Deterministic classification into the four problem classes."""
    nonneg_data = all(
        c >= 0 for row in inst.rows for c in row.coeffs
    ) and all(row.rhs >= 0 for row in inst.rows)
    nonneg_obj = all(c >= 0 for c in inst.objective)
    all_le = all(row.relation is Relation.LE for row in inst.rows)
    all_ge = all(row.relation is Relation.GE for row in inst.rows)
    unbounded = all(u is None for u in inst.upper)

    if all_le and nonneg_data and nonneg_obj and unbounded and inst.sense is Sense.MAX:
        return InstanceClass.PACKING
    if all_ge and nonneg_data and nonneg_obj and inst.sense is Sense.MIN:
        return InstanceClass.COVERING if unbounded else InstanceClass.COVERING_WITH_BOUNDS
    return InstanceClass.GENERAL


# ---------------------------------------------------------------------------
# deterministic RNG

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64: tiny, documented, seed-stable across platforms/versions."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        limit = _MASK64 - (_MASK64 + 1) % n
        while True:
            v = self.next_u64()
            if v <= limit:
                return v % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], inclusive."""
        return lo + self.randrange(hi - lo + 1)

    def coin(self) -> bool:
        return bool(self.next_u64() & 1)


# ---------------------------------------------------------------------------
# generators

def gen_random_general(n: int, seed: int) -> IlpInstance:
    """Random equality-constrained instances used by the scatter experiment.

    m = floor(n/2) equality rows, u_j = 25; A_ij is 0 with probability 1/2,
    otherwise uniform over the 101 integers {-50..50} (0 can arise from
    either branch); b = A x_hat for a uniform binary x_hat, so the instance
    is always integer-feasible.  Objective: maximize the all-ones vector.
    """
    if n < 2:
        raise ValidationError("gen_random_general needs n >= 2")
    big = 50
    rng = SplitMix64(seed)
    m = n // 2
    matrix = []
    for _ in range(m):
        row = []
        for _ in range(n):
            if rng.coin():
                row.append(0)
            else:
                row.append(rng.randint(-big, big))
        matrix.append(row)
    x_hat = [1 if rng.coin() else 0 for _ in range(n)]
    rows = tuple(
        make_row(row, Relation.EQ, sum(a * x for a, x in zip(row, x_hat)))
        for row in matrix
    )
    return IlpInstance(
        name=f"random-n{n}-s{seed}",
        sense=Sense.MAX,
        objective=tuple(Fraction(1) for _ in range(n)),
        rows=rows,
        upper=tuple(big // 2 for _ in range(n)),
    )


def gen_market_split(m: int, seed: int) -> IlpInstance:
    """0-1 feasibility instances: n = 10(m-1) binary vars, A_ij uniform in
    {0..49}, b_i = floor(rowsum/2), zero objective."""
    if m < 2:
        raise ValidationError("gen_market_split needs m >= 2")
    rng = SplitMix64(seed)
    n = 10 * (m - 1)
    rows = []
    for _ in range(m):
        coeffs = [rng.randint(0, 49) for _ in range(n)]
        rows.append(make_row(coeffs, Relation.EQ, sum(coeffs) // 2))
    return IlpInstance(
        name=f"market-split-m{m}-s{seed}",
        sense=Sense.MIN,
        objective=tuple(Fraction(0) for _ in range(n)),
        rows=tuple(rows),
        upper=tuple(1 for _ in range(n)),
    )


FAMILY_NAMES = ("packing_tight", "noncover", "covering_tight", "cg_vs_kc", "fstab")


def gen_family(family: str, param: int) -> IlpInstance:
    """The named tight families, instantiated exactly."""
    family = family.replace("-", "_")
    if family == "packing_tight":
        big = param
        if big < 1:
            raise ValidationError("packing_tight needs M >= 1")
        return IlpInstance(
            name=f"packing-tight-M{big}",
            sense=Sense.MAX,
            objective=(Fraction(1), Fraction(1)),
            rows=(
                make_row((1, big), Relation.LE, big),
                make_row((big, 1), Relation.LE, big),
            ),
            upper=(None, None),
        )
    if family == "noncover":
        k = param
        if k < 2:
            raise ValidationError("noncover needs k >= 2")
        return IlpInstance(
            name=f"noncover-k{k}",
            sense=Sense.MAX,
            objective=(Fraction(1), Fraction(1)),
            rows=(
                make_row((k * k, -(k - 1)), Relation.LE, k * k),
                make_row((-k, 1), Relation.LE, -k + 1),
            ),
            upper=(None, None),
        )
    if family == "covering_tight":
        n = param
        if n < 2:
            raise ValidationError("covering_tight needs n >= 2")
        rows = tuple(
            make_row([1 if j == i else 2 for j in range(n)], Relation.GE, 2)
            for i in range(n)
        )
        return IlpInstance(
            name=f"covering-tight-n{n}",
            sense=Sense.MIN,
            objective=tuple(Fraction(1) for _ in range(n)),
            rows=rows,
            upper=tuple(None for _ in range(n)),
        )
    if family == "cg_vs_kc":
        n = param
        if n < 2:
            raise ValidationError("cg_vs_kc needs n >= 2")
        coeffs = [1] * (n - 1) + [n]
        return IlpInstance(
            name=f"cg-vs-kc-n{n}",
            sense=Sense.MIN,
            objective=tuple(Fraction(0) for _ in range(n - 1)) + (Fraction(1),),
            rows=(make_row(coeffs, Relation.GE, n),),
            upper=tuple(1 for _ in range(n)),
        )
    if family == "fstab":
        n = param
        if n < 3:
            raise ValidationError("fstab needs n >= 3")
        rows = []
        for i in range(n):
            for j in range(i + 1, n):
                coeffs = [0] * n
                coeffs[i] = coeffs[j] = 1
                rows.append(make_row(coeffs, Relation.LE, 1))
        return IlpInstance(
            name=f"fstab-n{n}",
            sense=Sense.MAX,
            objective=tuple(Fraction(1) for _ in range(n)),
            rows=tuple(rows),
            upper=tuple(None for _ in range(n)),
        )
    raise ValidationError(f"unknown family {family!r}; choose from {FAMILY_NAMES}")


def gen_random_packing(n: int, m: int, seed: int, max_entry: int = 10) -> IlpInstance:
    """Seeded random packing instance for chain verification harnesses.

    Entries uniform in {0..max_entry}, rhs uniform in {1..max_entry}; A_ij
    may exceed b_i.  Every column is given at least one positive entry so
    the LP stays bounded; objective coefficients uniform in {1..5}.
    """
    rng = SplitMix64(seed)
    matrix = [[rng.randint(0, max_entry) for _ in range(n)] for _ in range(m)]
    for j in range(n):
        if all(matrix[i][j] == 0 for i in range(m)):
            matrix[rng.randrange(m)][j] = rng.randint(1, max_entry)
    rows = tuple(
        make_row(row, Relation.LE, rng.randint(1, max_entry)) for row in matrix
    )
    return IlpInstance(
        name=f"random-packing-n{n}-m{m}-s{seed}",
        sense=Sense.MAX,
        objective=tuple(Fraction(rng.randint(1, 5)) for _ in range(n)),
        rows=rows,
        upper=tuple(None for _ in range(n)),
    )


def gen_random_covering_bounds(
    n: int, m: int, seed: int, max_entry: int = 6, max_upper: int = 3
) -> IlpInstance:
    """Seeded random covering-with-bounds instance, always feasible.

    The all-upper point u is forced feasible by drawing each rhs no larger
    than the row value at u; that keeps every hull/KC computation non-empty.
    """
    rng = SplitMix64(seed)
    upper = tuple(rng.randint(1, max_upper) for _ in range(n))
    rows = []
    for _ in range(m):
        coeffs = [rng.randint(0, max_entry) for _ in range(n)]
        if all(c == 0 for c in coeffs):
            coeffs[rng.randrange(n)] = rng.randint(1, max_entry)
        at_u = sum(c * u for c, u in zip(coeffs, upper))
        rows.append(make_row(coeffs, Relation.GE, rng.randint(1, max(1, at_u))))
    return IlpInstance(
        name=f"random-covering-n{n}-m{m}-s{seed}",
        sense=Sense.MIN,
        objective=tuple(Fraction(rng.randint(1, 5)) for _ in range(n)),
        rows=tuple(rows),
        upper=upper,
    )


def gen_random_single_row_packing(n: int, seed: int, max_rhs: int = 12) -> IlpInstance:
    """Single packing row with A_j <= b, for the (k+1)-gap check at k = 1."""
    rng = SplitMix64(seed)
    rhs = rng.randint(2, max_rhs)
    coeffs = [rng.randint(1, rhs) for _ in range(n)]
    return IlpInstance(
        name=f"single-row-packing-n{n}-s{seed}",
        sense=Sense.MAX,
        objective=tuple(Fraction(rng.randint(1, 5)) for _ in range(n)),
        rows=(make_row(coeffs, Relation.LE, rhs),),
        upper=tuple(None for _ in range(n)),
    )


def gen_random_boxed(n: int, seed: int, max_upper: int = 4) -> IlpInstance:
    """Small boxed instance (mixed row senses) for solver-oracle comparisons."""
    rng = SplitMix64(seed)
    m = max(1, n // 2)
    upper = tuple(rng.randint(1, max_upper) for _ in range(n))
    rows = []
    rels = (Relation.LE, Relation.GE, Relation.EQ)
    for _ in range(m):
        coeffs = [rng.randint(-6, 6) for _ in range(n)]
        rel = rels[rng.randrange(3)]
        point = [rng.randint(0, u) for u in upper]
        rhs = sum(c * x for c, x in zip(coeffs, point))
        if rel is Relation.LE:
            rhs += rng.randint(0, 3)
        elif rel is Relation.GE:
            rhs -= rng.randint(0, 3)
        rows.append(make_row(coeffs, rel, rhs))
    return IlpInstance(
        name=f"random-boxed-n{n}-s{seed}",
        sense=Sense.MAX if rng.coin() else Sense.MIN,
        objective=tuple(Fraction(rng.randint(-4, 4)) for _ in range(n)),
        rows=tuple(rows),
        upper=upper,
    )


# ---------------------------------------------------------------------------
# file format

def to_json_dict(inst: IlpInstance) -> dict:
    return {
        "name": inst.name,
        "sense": inst.sense.value,
        "objective": [format_rational(c) for c in inst.objective],
        "rows": [
            {
                "coeffs": [format_rational(c) for c in row.coeffs],
                "relation": row.relation.value,
                "rhs": format_rational(row.rhs),
            }
            for row in inst.rows
        ],
        "upper": ["inf" if u is None else u for u in inst.upper],
    }


def from_json_dict(data: dict) -> IlpInstance:
    try:
        name = data["name"]
        sense = Sense(data["sense"])
        objective = tuple(parse_rational(c) for c in data["objective"])
        rows = []
        for i, row in enumerate(data["rows"]):
            try:
                rows.append(
                    LinearConstraint(
                        tuple(parse_rational(c) for c in row["coeffs"]),
                        Relation(row["relation"]),
                        parse_rational(row["rhs"]),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"row {i}: {exc}") from exc
        upper = []
        for j, u in enumerate(data["upper"]):
            if u == "inf":
                upper.append(None)
            elif isinstance(u, int) and not isinstance(u, bool):
                upper.append(u)
            else:
                raise ValidationError(
                    f"upper bound for x{j} must be an integer or \"inf\", got {u!r}"
                )
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed instance file: {exc}") from exc
    return IlpInstance(name, sense, objective, tuple(rows), tuple(upper))


def instance_to_json(inst: IlpInstance) -> str:
    return json.dumps(to_json_dict(inst), indent=2) + "\n"


def write_instance(inst: IlpInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(instance_to_json(inst))


def read_instance(path) -> IlpInstance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    return from_json_dict(data)
