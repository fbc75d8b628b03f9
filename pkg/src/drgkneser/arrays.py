"""Intersection arrays: parsing, derived parameters, and combinatorial checks.

An intersection array ``{b0,...,b_{d-1}; c1,...,c_d}`` determines the
tridiagonal structure everything else in this package is built from.  Genuine
graph arrays have positive entries, c1 = 1 and nonnegative a_i; arrays that
violate feasibility conditions are still accepted (with warnings) so that
candidate and known-infeasible arrays can be analyzed.  Arrays with negative
entries are handled by the ``GeneralizedArray`` relaxation, which only
supports the polynomial/eigenvalue machinery (no valencies, no vertex count).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import ArrayParseError, ArrayValidationError, InternalConsistencyError

Rational = Union[int, Fraction, str, float]

_ENTRY_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def as_fraction(x: Rational) -> Fraction:
    """Convert an entry to an exact Fraction (floats convert exactly)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not _ENTRY_RE.match(s):
            raise ArrayParseError(f"not an integer or p/q rational: {x!r}")
        return Fraction(s)
    if isinstance(x, float):
        return Fraction(x)
    raise ArrayParseError(f"unsupported entry type: {type(x).__name__}")


def parse_array_literal(text: str) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Parse ``{b0,...,b_{d-1};c1,...,c_d}`` into the two entry tuples.

    Whitespace is permitted anywhere; entries are integers or p/q rationals.
    """
    s = text.strip()
    if not (s.startswith("{") and s.endswith("}")):
        raise ArrayParseError(f"array literal must be brace-delimited: {text!r}")
    body = s[1:-1]
    if body.count(";") != 1:
        raise ArrayParseError("array literal needs exactly one ';' separator")
    left, right = body.split(";")
    try:
        b = tuple(as_fraction(tok) for tok in left.split(","))
        c = tuple(as_fraction(tok) for tok in right.split(","))
    except ArrayParseError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise ArrayParseError(str(exc)) from exc
    if not left.strip() or not right.strip():
        raise ArrayParseError("empty entry sequence")
    return b, c


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class IntersectionArray:
    """A graph-type intersection array with positive entries.

    Derived quantities follow the usual conventions: a_i = b0 - b_i - c_i
    with b_d = c_0 = 0, valencies k_0 = 1 and k_{i+1} = k_i b_i / c_{i+1},
    vertex count n = sum k_i.
    """

    b: tuple[Fraction, ...]
    c: tuple[Fraction, ...]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.b) == 0 or len(self.c) == 0:
            raise ArrayValidationError("empty intersection array (d = 0)")
        if len(self.b) != len(self.c):
            raise ArrayValidationError(
                f"need as many c's as b's, got {len(self.b)} and {len(self.c)}"
            )
        if any(x <= 0 for x in self.b) or any(x <= 0 for x in self.c):
            raise ArrayValidationError(
                "nonpositive entry; use GeneralizedArray for signed arrays"
            )

    @property
    def d(self) -> int:
        return len(self.b)

    @property
    def b0(self) -> Fraction:
        return self.b[0]

    @property
    def a(self) -> tuple[Fraction, ...]:
        """a_0..a_d, taking b_d = c_0 = 0."""
        b0 = self.b[0]
        out = [Fraction(0)]
        for i in range(1, self.d):
            out.append(b0 - self.b[i] - self.c[i - 1])
        out.append(b0 - self.c[self.d - 1])
        return tuple(out)

    @property
    def k(self) -> tuple[Fraction, ...]:
        """Valencies k_0..k_d of the distance relations."""
        ks = [Fraction(1)]
        for i in range(self.d):
            ks.append(ks[-1] * self.b[i] / self.c[i])
        return tuple(ks)

    @property
    def n(self) -> Fraction:
        return sum(self.k, Fraction(0))

    @property
    def lam(self) -> Fraction:
        """Number of common neighbors of an edge (a_1)."""
        return self.a[1]

    @property
    def mu(self) -> Fraction:
        """Number of common neighbors of a pair at distance 2 (c_2)."""
        if self.d < 2:
            raise ArrayValidationError("mu requires d >= 2")
        return self.c[1]

    @property
    def is_graph_array(self) -> bool:
        return True

    def __str__(self) -> str:
        return "{%s;%s}" % (",".join(map(_fmt, self.b)), ",".join(map(_fmt, self.c)))


@dataclass(frozen=True)
class GeneralizedArray:
    """Array with arbitrary nonzero rational entries.

    Exists for half-array analysis, where modified entries like c_e + z*b_e
    may be negative.  Only the recurrence data (a_i) is derived; valencies
    and vertex count are undefined.
    """

    b: tuple[Fraction, ...]
    c: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.b) == 0 or len(self.c) == 0:
            raise ArrayValidationError("empty intersection array (d = 0)")
        if len(self.b) != len(self.c):
            raise ArrayValidationError(
                f"need as many c's as b's, got {len(self.b)} and {len(self.c)}"
            )
        if any(x == 0 for x in self.b) or any(x == 0 for x in self.c):
            raise ArrayValidationError("zero entry in generalized array")

    @property
    def d(self) -> int:
        return len(self.b)

    @property
    def b0(self) -> Fraction:
        return self.b[0]

    @property
    def a(self) -> tuple[Fraction, ...]:
        b0 = self.b[0]
        out = [Fraction(0)]
        for i in range(1, self.d):
            out.append(b0 - self.b[i] - self.c[i - 1])
        out.append(b0 - self.c[self.d - 1])
        return tuple(out)

    @property
    def is_graph_array(self) -> bool:
        return False

    def __str__(self) -> str:
        return "{%s;%s}" % (",".join(map(_fmt, self.b)), ",".join(map(_fmt, self.c)))


AnyArray = Union[IntersectionArray, GeneralizedArray]


def validate_array(
    b: Sequence[Rational], c: Sequence[Rational]
) -> AnyArray:
    """Build an array from raw entries, collecting feasibility diagnostics.

    Feasibility violations (c1 != 1, negative a_i, non-monotone b or c,
    non-integral valencies) become warnings on the returned array, never
    rejections; candidate arrays from the literature are routinely
    infeasible.  Entries <= 0 force the GeneralizedArray relaxation, which
    carries no diagnostics at all.
    """
    bf = tuple(as_fraction(x) for x in b)
    cf = tuple(as_fraction(x) for x in c)
    if len(bf) == 0 or len(cf) == 0:
        raise ArrayValidationError("empty intersection array (d = 0)")
    if any(x == 0 for x in bf) or any(x == 0 for x in cf):
        raise ArrayValidationError("zero entries are not allowed")
    if any(x < 0 for x in bf) or any(x < 0 for x in cf):
        return GeneralizedArray(bf, cf)

    warnings: list[str] = []
    d = len(bf)
    if cf[0] != 1:
        warnings.append(f"c1 = {_fmt(cf[0])} != 1: not a genuine graph array")
    for i in range(1, d):
        if bf[i] > bf[i - 1]:
            warnings.append(f"b is not non-increasing at index {i}")
    for i in range(1, d):
        if cf[i] < cf[i - 1]:
            warnings.append(f"c is not non-decreasing at index {i}")
    arr = IntersectionArray(bf, cf)
    for i, ai in enumerate(arr.a):
        if ai < 0:
            warnings.append(f"a_{i} = {_fmt(ai)} < 0")
    for i, ki in enumerate(arr.k):
        if ki.denominator != 1:
            warnings.append(f"k_{i} = {_fmt(ki)} is not integral")
    if arr.n.denominator != 1:
        warnings.append(f"n = {_fmt(arr.n)} is not integral")
    return IntersectionArray(bf, cf, tuple(warnings))


def from_text(text: str) -> AnyArray:
    b, c = parse_array_literal(text)
    return validate_array(b, c)


@dataclass(frozen=True)
class Imprimitivity:
    bipartite: bool
    antipodal: bool
    r: int | None  # antipodal cover index k_d + 1, None if not antipodal


def classify_imprimitivity(arr: IntersectionArray) -> Imprimitivity:
    """Detect the two imprimitivity types from the array alone.

    Bipartite means all a_i vanish; antipodal means b_i = c_{d-i} for every
    i except possibly i = floor(d/2), and then the cover index is k_d + 1.
    """
    bipartite = all(ai == 0 for ai in arr.a)
    d = arr.d
    antipodal = True
    for i in range(d):
        if i == d // 2:
            continue
        # compare b_i with c_{d-i}; c index j is stored at c[j-1]
        if arr.b[i] != arr.c[d - i - 1]:
            antipodal = False
            break
    r = None
    if antipodal:
        kd = arr.k[d]
        if kd.denominator == 1:
            r = int(kd) + 1
        else:
            antipodal = False
    return Imprimitivity(bipartite=bipartite, antipodal=antipodal, r=r)


def distance12_condition(arr: IntersectionArray) -> bool:
    """Whether the distance 1-or-2 graph is distance-regular.

    Holds iff b_{i-1} + b_i + c_i + c_{i+1} = 2k + mu - lambda for all
    1 <= i <= d-1.
    """
    if arr.d < 2:
        raise ArrayValidationError("distance 1-or-2 condition requires d >= 2")
    target = 2 * arr.b[0] + arr.mu - arr.lam
    for i in range(1, arr.d):
        lhs = arr.b[i - 1] + arr.b[i] + arr.c[i - 1] + arr.c[i]
        if lhs != target:
            return False
    return True


@dataclass(frozen=True)
class IntersectionNumbers:
    """The full tensor p^k_{ij}, indexed as p[k][i][j]."""

    p: np.ndarray  # shape (d+1, d+1, d+1), float

    def __getitem__(self, kij):
        k, i, j = kij
        return self.p[k][i][j]


def intersection_numbers(arr: IntersectionArray, spec, P=None) -> IntersectionNumbers:
    """Compute p^k_{ij} = (1/(n k_k)) sum_l m_l P_li P_lj P_lk.

    Cross-checked against the product rule A_1 A_j = b_{j-1} A_{j-1}
    + a_j A_j + c_{j+1} A_{j+1}; a disagreement raises
    InternalConsistencyError since both routes derive from the same array.
    """
    from .spectral import eigenmatrix_P

    if P is None:
        P = eigenmatrix_P(arr, spec)
    Pm = P.entries if hasattr(P, "entries") else np.asarray(P, dtype=float)
    d = arr.d
    n = float(arr.n)
    k = np.array([float(x) for x in arr.k])
    m = np.asarray(spec.m, dtype=float)
    # p[k,i,j] via one einsum over the l (eigenspace) axis
    tensor = np.einsum("l,li,lj,lk->kij", m, Pm, Pm, Pm) / (n * k[:, None, None])

    a = [float(x) for x in arr.a]
    b = [float(x) for x in arr.b]
    c = [float(x) for x in arr.c]
    scale = max(1.0, float(arr.k[d]))
    for j in range(d + 1):
        for kk in range(d + 1):
            expected = 0.0
            if kk == j - 1 and j - 1 >= 0:
                expected = b[j - 1]
            elif kk == j:
                expected = a[j]
            elif kk == j + 1 and j + 1 <= d:
                expected = c[j]  # c_{j+1} stored at index j
            got = tensor[kk, 1, j]
            if abs(got - expected) > 1e-7 * scale:
                raise InternalConsistencyError(
                    f"p^{kk}_(1,{j}) = {got} but the product rule gives {expected}"
                )
    return IntersectionNumbers(tensor)
