"""Exact combinatorics of partitions, tableaux and Gelfand-Tsetlin patterns.

Unitary Schur polynomials and the restricted counts behind unitary moments of
moments are evaluated by a transfer over Gelfand-Tsetlin rows: each row is the
shape filled by entries <= i, and consecutive rows differ by a horizontal
strip. Symplectic and orthogonal Schur polynomials are sums of weights over
half patterns, enumerated recursively.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .errors import BudgetExceededError

logger = logging.getLogger(__name__)

# Largest |λ| enumerated pattern by pattern or tableau by tableau
ENUMERATION_LIMIT = 12


@dataclass(frozen=True)
class Partition:
    """Weakly decreasing positive parts; trailing zeros are dropped."""
    parts: Tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts):
            raise ValueError(f"Partition parts must be non-negative: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"Partition parts must be non-increasing: {parts}")
        object.__setattr__(self, "parts", tuple(p for p in parts if p > 0))

    @classmethod
    def rectangle(cls, width: int, height: int) -> 'Partition':
        """⟨width^height⟩."""
        return cls((width,) * height)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    def padded(self, n: int) -> Tuple[int, ...]:
        if self.length > n:
            raise ValueError(f"Partition of length {self.length} does not fit in {n} entries")
        return self.parts + (0,) * (n - self.length)

    def __iter__(self):
        return iter(self.parts)


@dataclass(frozen=True)
class Signature:
    """Non-increasing integers of fixed length; trailing zeros are kept."""
    entries: Tuple[int, ...]
    nonneg: bool = True

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(entries[i] < entries[i + 1] for i in range(len(entries) - 1)):
            raise ValueError(f"Signature entries must be non-increasing: {entries}")
        if self.nonneg and entries and entries[-1] < 0:
            raise ValueError(f"Signature in S+ has a negative entry: {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def length(self) -> int:
        return len(self.entries)

    @property
    def size(self) -> int:
        return sum(self.entries)

    def minus(self) -> 'Signature':
        """λ⁻ = (λ_1, ..., λ_{n-1}, -λ_n)."""
        if not self.entries:
            return self
        return Signature(self.entries[:-1] + (-self.entries[-1],), nonneg=False)

    def interlaces(self, upper: 'Signature') -> bool:
        """True when self ≺ upper (upper has the same length or one more entry)."""
        lam, nu = self.entries, upper.entries
        if len(nu) == len(lam) + 1:
            return all(nu[j] >= lam[j] >= nu[j + 1] for j in range(len(lam)))
        if len(nu) == len(lam):
            return all(nu[j] >= lam[j] and (j + 1 == len(lam) or lam[j] >= nu[j + 1]) for j in range(len(lam)))
        return False


@dataclass(frozen=True)
class Tableau:
    """Semistandard Young tableau with entries in {1, ..., n}."""
    shape: Partition
    rows: Tuple[Tuple[int, ...], ...]
    n: int

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.rows if len(row))
        object.__setattr__(self, "rows", rows)
        if tuple(len(r) for r in rows) != self.shape.parts:
            raise ValueError(f"Row lengths {[len(r) for r in rows]} do not match shape {self.shape.parts}")
        for row in rows:
            if any(v < 1 or v > self.n for v in row):
                raise ValueError(f"Tableau entries must lie in 1..{self.n}")
            if any(row[c] > row[c + 1] for c in range(len(row) - 1)):
                raise ValueError("Tableau rows must weakly increase")
        for r in range(1, len(rows)):
            if any(rows[r][c] <= rows[r - 1][c] for c in range(len(rows[r]))):
                raise ValueError("Tableau columns must strictly increase")

    def content(self) -> Tuple[int, ...]:
        """(t_1, ..., t_n): number of entries equal to each value."""
        counts = [0] * self.n
        for row in self.rows:
            for v in row:
                counts[v - 1] += 1
        return tuple(counts)


@dataclass(frozen=True)
class GTPattern:
    """Non-negative Gelfand-Tsetlin pattern; rows[i-1] is the signature of length i."""
    rows: Tuple[Signature, ...]

    def __post_init__(self):
        for i, row in enumerate(self.rows, start=1):
            if row.length != i:
                raise ValueError(f"Row {i} of a GT pattern must have {i} entries, got {row.length}")
            if not row.nonneg:
                raise ValueError("GT pattern rows must be non-negative signatures")
        for lower, upper in zip(self.rows, self.rows[1:]):
            if not lower.interlaces(upper):
                raise ValueError(f"Rows {lower.entries} and {upper.entries} do not interlace")

    @property
    def depth(self) -> int:
        return len(self.rows)

    @property
    def top(self) -> Signature:
        return self.rows[-1]


@dataclass(frozen=True)
class HalfPattern:
    """Half Gelfand-Tsetlin pattern; rows 2i-1 and 2i both have i entries.

    kind is "symplectic" (all entries >= 0) or "orthogonal" (only odd starters
    may be negative, bounded by their neighbours).
    """
    rows: Tuple[Tuple[int, ...], ...]
    kind: str = "symplectic"

    def __post_init__(self):
        if self.kind not in ("symplectic", "orthogonal"):
            raise ValueError(f"Unknown half pattern kind: {self.kind}")
        rows = tuple(tuple(int(v) for v in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        for r, row in enumerate(rows, start=1):
            if len(row) != (r + 1) // 2:
                raise ValueError(f"Row {r} of a half pattern must have {(r + 1) // 2} entries")
            Signature(row, nonneg=False)
        for lower, upper in zip(rows, rows[1:]):
            if not Signature(lower, nonneg=False).interlaces(Signature(upper, nonneg=False)):
                raise ValueError(f"Rows {lower} and {upper} do not interlace")
        if self.kind == "symplectic":
            if any(v < 0 for row in rows for v in row):
                raise ValueError("Symplectic patterns have non-negative entries")
        else:
            self._check_orthogonal_rules()

    def _check_orthogonal_rules(self) -> None:
        rows = self.rows
        for r, row in enumerate(rows, start=1):
            starter = r % 2 == 1
            body = row[:-1] if starter else row
            if any(v < 0 for v in body):
                raise ValueError("Only odd starters may be negative in an orthogonal pattern")
            if not starter:
                continue
            i = (r + 1) // 2
            bounds = []
            if r >= 2:
                bounds.append(rows[r - 2][i - 2])
            if r < len(rows):
                bounds.append(rows[r][i - 1])
            if bounds and abs(row[-1]) > min(bounds):
                raise ValueError(f"Odd starter {row[-1]} in row {r} exceeds its bound {min(bounds)}")

    def odd_starters(self) -> List[int]:
        return [row[-1] for r, row in enumerate(self.rows, start=1) if r % 2 == 1]

    def weight_exponents(self) -> Tuple[int, ...]:
        if self.kind == "symplectic":
            return symplectic_weight_exponents(self.rows)
        return orthogonal_weight_exponents(self.rows)


# --------------------------------------------------------------------------
# Tableaux


def count_ssyt(shape: Partition, n: int) -> int:
    """|SSYT_n(λ)| by the hook-content product over pairs of rows."""
    if shape.length > n:
        return 0
    lam = shape.padded(n)
    value = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            value *= Fraction(lam[i] - lam[j] + j - i, j - i)
    return int(value)


def enumerate_ssyt(shape: Partition, n: int, limit: int = ENUMERATION_LIMIT) -> Iterator[Tableau]:
    """All SSYT of the given shape with entries in {1..n}, cell by cell."""
    if shape.size > limit:
        raise BudgetExceededError(f"Refusing to enumerate tableaux with |λ| = {shape.size} > {limit}")
    if shape.length > n:
        return
    cells = [(r, c) for r, width in enumerate(shape.parts) for c in range(width)]
    grid = [[0] * width for width in shape.parts]

    def fill(position: int) -> Iterator[Tableau]:
        if position == len(cells):
            yield Tableau(shape=shape, rows=tuple(tuple(row) for row in grid), n=n)
            return
        r, c = cells[position]
        low = 1
        if c > 0:
            low = max(low, grid[r][c - 1])
        if r > 0:
            low = max(low, grid[r - 1][c] + 1)
        # cells further down this column need strictly larger entries
        column_height = sum(1 for width in shape.parts if width > c)
        high = n - (column_height - 1 - r)
        for v in range(low, high + 1):
            grid[r][c] = v
            yield from fill(position + 1)
        grid[r][c] = 0

    yield from fill(0)


def ssyt_to_gt(tableau: Tableau) -> GTPattern:
    """Row i of the pattern is the shape occupied by entries <= i."""
    rows = []
    for i in range(1, tableau.n + 1):
        counts = [sum(1 for v in row if v <= i) for row in tableau.rows]
        # entries <= i fit in the first i rows of a column-strict filling
        if any(counts[i:]):
            raise ValueError("Tableau column strictness violated")
        rows.append(Signature(tuple((counts + [0] * i)[:i])))
    return GTPattern(rows=tuple(rows))


def gt_to_ssyt(pattern: GTPattern) -> Tableau:
    """Inverse of ssyt_to_gt."""
    top = pattern.top.entries
    filled: List[List[int]] = [[] for _ in top]
    previous = (0,) * len(top)
    for i, row in enumerate(pattern.rows, start=1):
        current = row.entries + (0,) * (len(top) - row.length)
        for r in range(len(top)):
            filled[r].extend([i] * (current[r] - previous[r]))
        previous = current
    return Tableau(shape=Partition(top), rows=tuple(tuple(r) for r in filled), n=pattern.depth)


def enumerate_gt_patterns(top: Signature) -> Iterator[GTPattern]:
    """All non-negative GT patterns with the given top row, built downwards."""
    n = top.length

    def below(row: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
        ranges = [range(row[j + 1], row[j] + 1) for j in range(len(row) - 1)]
        for choice in product(*ranges):
            yield tuple(choice)

    def build(rows: List[Tuple[int, ...]]) -> Iterator[GTPattern]:
        if len(rows[0]) == 1:
            yield GTPattern(rows=tuple(Signature(r) for r in rows))
            return
        for lower in below(rows[0]):
            yield from build([lower] + rows)

    if n == 0:
        yield GTPattern(rows=())
        return
    yield from build([top.entries])


# --------------------------------------------------------------------------
# Gelfand-Tsetlin transfer


def _strip_transfer(states: Dict[Tuple[int, ...], object], top: Tuple[int, ...],
                    step_weight: Optional[Callable[[int], object]] = None) -> Dict[Tuple[int, ...], object]:
    """Extend every row by a horizontal strip inside `top`, one coordinate at a time.

    new_j ranges over [old_j, min(old_{j-1}, top_j)]; with step_weight the value
    is multiplied by step_weight(new_j - old_j).
    """
    m = len(top)
    if m == 0:
        return dict(states)
    layer: Dict[Tuple[Tuple[int, ...], int], object] = {}
    for state, value in states.items():
        layer[(state, top[0])] = value
    for j in range(m):
        following: Dict[Tuple[Tuple[int, ...], int], object] = defaultdict(int)
        for (state, carry), value in layer.items():
            old = state[j]
            for v in range(old, min(carry, top[j]) + 1):
                weight = value if step_weight is None else value * step_weight(v - old)
                following[(state[:j] + (v,) + state[j + 1:], old)] += weight
        layer = following
    merged: Dict[Tuple[int, ...], object] = defaultdict(int)
    for (state, _), value in layer.items():
        merged[state] += value
    return merged


def gt_pattern_count(shape: Partition, n: int) -> int:
    """Number of GT patterns of depth n with top row λ (padded), by transfer."""
    if shape.length > n:
        return 0
    top = shape.parts
    states: Dict[Tuple[int, ...], object] = {(0,) * len(top): 1}
    for _ in range(n):
        states = _strip_transfer(states, top)
    return int(states.get(top, 0))


def _coerce(value):
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    return value


def schur_eval(shape: Partition, x: Sequence):
    """s_λ(x_1, ..., x_n) as a sum over GT patterns, one row per variable.

    Integer and Fraction inputs give exact Fractions; floats give floats.
    """
    if len(x) < 1:
        raise ValueError("schur_eval needs at least one variable")
    if not isinstance(shape, Partition):
        shape = Partition(tuple(shape))
    n = len(x)
    if shape.length > n:
        return 0
    top = shape.parts
    states: Dict[Tuple[int, ...], object] = {(0,) * len(top): 1}
    for xi in x:
        xi = _coerce(xi)
        powers: Dict[int, object] = {}

        def step_weight(k: int, xi=xi, powers=powers):
            if k not in powers:
                powers[k] = xi ** k
            return powers[k]

        states = _strip_transfer(states, top, step_weight)
    return states.get(top, 0)


def restricted_rect_count(N: int, k: int, beta: int) -> int:
    """SSYT of shape ⟨N^{kβ}⟩ in {1..2kβ} whose j-th block of 2β letters is used Nβ times.

    Equals the unitary moment of moments MoM_{U(N)}(k, β).
    """
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if k < 1 or beta < 1:
        raise ValueError(f"k and beta must be positive integers, got k={k}, beta={beta}")
    rows = k * beta
    top = (N,) * rows if N > 0 else ()
    states: Dict[Tuple[int, ...], object] = {(0,) * len(top): 1}
    for i in range(1, 2 * rows + 1):
        states = _strip_transfer(states, top)
        if i % (2 * beta) == 0:
            target = (i // (2 * beta)) * N * beta
            states = {s: v for s, v in states.items() if sum(s) == target}
    logger.debug(f"restricted_rect_count(N={N}, k={k}, beta={beta}) finished with {len(states)} states")
    return int(states.get(top, 0))


def restricted_rect_count_bruteforce(N: int, k: int, beta: int) -> int:
    """Oracle for restricted_rect_count by explicit tableau enumeration."""
    shape = Partition.rectangle(N, k * beta)
    total = 0
    for tableau in enumerate_ssyt(shape, 2 * k * beta, limit=max(ENUMERATION_LIMIT, shape.size)):
        content = tableau.content()
        if all(sum(content[2 * j * beta:2 * (j + 1) * beta]) == N * beta for j in range(k)):
            total += 1
    return total


# --------------------------------------------------------------------------
# Half patterns


def symplectic_weight_exponents(rows: Sequence[Tuple[int, ...]]) -> Tuple[int, ...]:
    """Exponent of x_i: |λ^(2i)| - 2|λ^(2i-1)| + |λ^(2i-2)|, with λ^(0) = 0."""
    n = len(rows) // 2
    exponents = []
    for i in range(1, n + 1):
        previous = sum(rows[2 * i - 3]) if i > 1 else 0
        exponents.append(sum(rows[2 * i - 1]) - 2 * sum(rows[2 * i - 2]) + previous)
    return tuple(exponents)


def orthogonal_weight_exponents(rows: Sequence[Tuple[int, ...]]) -> Tuple[int, ...]:
    """Signed exponents sgn(λ_i^(2i-1)) sgn(λ_{i-1}^(2i-3)) [|λ^(2i-1)| - 2|λ^(2i-2)| + |λ^(2i-3)|]."""
    n = (len(rows) + 1) // 2

    def sgn(v: int) -> int:
        return 1 if v >= 0 else -1

    def abs_sum(r: int) -> int:
        return sum(abs(v) for v in rows[r - 1]) if r >= 1 else 0

    exponents = []
    for i in range(1, n + 1):
        starter = rows[2 * i - 2][-1]
        previous_starter = rows[2 * i - 4][-1] if i > 1 else 0
        magnitude = abs_sum(2 * i - 1) - 2 * abs_sum(2 * i - 2) + abs_sum(2 * i - 3)
        exponents.append(sgn(starter) * sgn(previous_starter) * magnitude)
    return tuple(exponents)


def _half_pattern_rows(top: Tuple[int, ...], depth: int, kind: str) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    """Rows of every half pattern of the given depth and top row, bottom row first."""

    def below(upper: Tuple[int, ...], r: int) -> Iterator[Tuple[int, ...]]:
        # row r interlaces below row r + 1
        if r % 2 == 0:
            # one entry shorter; |odd starter above| bounds the last entry
            ranges = [range(abs(upper[j + 1]), upper[j] + 1) for j in range(len(upper) - 1)]
        else:
            last = len(upper) - 1
            ranges = [range(upper[j + 1], upper[j] + 1) for j in range(last)]
            starter_low = 0 if kind == "symplectic" else -upper[last]
            ranges.append(range(starter_low, upper[last] + 1))
        for choice in product(*ranges):
            yield tuple(choice)

    def build(stack: List[Tuple[int, ...]], r: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
        if r == 0:
            yield tuple(stack)
            return
        for row in below(stack[0], r):
            yield from build([row] + stack, r - 1)

    yield from build([top], depth - 1)


def enumerate_half_patterns(top: Signature, kind: str, limit: int = ENUMERATION_LIMIT) -> Iterator[HalfPattern]:
    """Symplectic patterns of depth 2n or orthogonal patterns of depth 2n-1 with top row ν."""
    n = top.length
    weight = sum(abs(v) for v in top.entries)
    if weight > limit:
        raise BudgetExceededError(f"Refusing to enumerate half patterns with |ν| = {weight} > {limit}")
    if n == 0:
        return
    depth = 2 * n if kind == "symplectic" else 2 * n - 1
    for rows in _half_pattern_rows(top.entries, depth, kind):
        yield HalfPattern(rows=rows, kind=kind)


def _laurent_sum(patterns: Iterator[HalfPattern]) -> Dict[Tuple[int, ...], int]:
    polynomial: Dict[Tuple[int, ...], int] = defaultdict(int)
    for pattern in patterns:
        polynomial[pattern.weight_exponents()] += 1
    return dict(polynomial)


def _evaluate_laurent(polynomial: Dict[Tuple[int, ...], int], x: Sequence):
    values = [_coerce(v) for v in x]
    total = 0
    for exponents, count in polynomial.items():
        term = count
        for value, e in zip(values, exponents):
            term = term * value ** e
        total = total + term
    return total


def symplectic_schur_polynomial(nu: Signature) -> Dict[Tuple[int, ...], int]:
    """sp^{(2n)}_ν as {exponent vector: coefficient}."""
    if not nu.nonneg:
        raise ValueError("Symplectic Schur polynomials are indexed by non-negative signatures")
    if nu.length == 0:
        return {(): 1}
    return _laurent_sum(enumerate_half_patterns(nu, "symplectic"))


def orthogonal_schur_polynomial(nu: Signature) -> Dict[Tuple[int, ...], int]:
    """o^{(2n)}_ν as {exponent vector: coefficient}, summing over OP_ν ∪ OP_{ν⁻}."""
    if not nu.nonneg:
        raise ValueError("Orthogonal Schur polynomials are indexed by non-negative signatures")
    if nu.length == 0:
        return {(): 1}
    tops = {nu.entries, nu.minus().entries}
    polynomial: Dict[Tuple[int, ...], int] = defaultdict(int)
    for top in tops:
        for exponents, count in _laurent_sum(enumerate_half_patterns(Signature(top, nonneg=False),
                                                                     "orthogonal")).items():
            polynomial[exponents] += count
    return dict(polynomial)


def symplectic_schur_eval(nu: Signature, x: Sequence):
    if not isinstance(nu, Signature):
        nu = Signature(tuple(nu))
    if len(x) != nu.length:
        raise ValueError(f"Expected {nu.length} variables, got {len(x)}")
    return _evaluate_laurent(symplectic_schur_polynomial(nu), x)


def orthogonal_schur_eval(nu: Signature, x: Sequence):
    if not isinstance(nu, Signature):
        nu = Signature(tuple(nu))
    if len(x) != nu.length:
        raise ValueError(f"Expected {nu.length} variables, got {len(x)}")
    return _evaluate_laurent(orthogonal_schur_polynomial(nu), x)
