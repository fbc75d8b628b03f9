"""Distance polynomials, tridiagonal eigenvalues, multiplicities, P and Q.

The polynomial sequence p_0, ..., p_{d+1} generated by the array's
three-term recurrence is kept in exact rational arithmetic.  It is a Sturm
chain for the tridiagonal matrix the array defines, so the number of sign
changes of (p_0(x), ..., p_m(x)) counts eigenvalues of the leading m x m
block above x exactly.  Root isolation and refinement are pure bisection on
rational points; floating point enters only in the reported values and in
the downstream matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arrays import AnyArray, IntersectionArray
from .errors import InternalConsistencyError

# ------------------------------------------------------------------ helpers

Coeffs = tuple[Fraction, ...]  # dense coefficients, ascending degree


@dataclass(frozen=True)
class Tolerance:
    """Shared comparison policy for equality decisions on P entries.

    Verdicts downstream (equal columns, criteria, spectra matching) all go
    through one policy so that dual-route checks cannot diverge on epsilon
    choices.  ``sum_rel`` is the cut for the weighted-sum criteria, relative
    to the sum of absolute terms.
    """

    rel: float = 1e-8
    floor: float = 1e-10
    sum_rel: float = 1e-6

    def eq(self, x: float, y: float, scale: float | None = None) -> bool:
        s = max(abs(x), abs(y), 0.0 if scale is None else abs(scale))
        return abs(x - y) <= max(self.floor, self.rel * s)

    def is_zero(self, x: float, scale: float = 1.0) -> bool:
        return abs(x) <= max(self.floor, self.rel * abs(scale))

    def sum_is_zero(self, value: float, scale: float) -> bool:
        return abs(value) <= max(self.floor, self.sum_rel * abs(scale))


def poly_eval(coeffs, x):
    """Horner evaluation; exact when coeffs and x are rational."""
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _poly_sub(p: Coeffs, q: Coeffs) -> Coeffs:
    n = max(len(p), len(q))
    p = p + (Fraction(0),) * (n - len(p))
    q = q + (Fraction(0),) * (n - len(q))
    return tuple(a - b for a, b in zip(p, q))


def _poly_xminus(a: Fraction, p: Coeffs) -> Coeffs:
    """(x - a) * p."""
    shifted = (Fraction(0),) + p
    scaled = tuple(a * ci for ci in p) + (Fraction(0),)
    return tuple(s - t for s, t in zip(shifted, scaled))


def _sign(v) -> int:
    return int(v > 0) - int(v < 0)


def sign_changes(values, zero_tol=0.0) -> int:
    """Count strict sign alternations, ignoring (near-)zero entries."""
    changes = 0
    last = 0
    for v in values:
        s = 0 if abs(v) <= zero_tol else _sign(v)
        if s == 0:
            continue
        if last != 0 and s != last:
            changes += 1
        last = s
    return changes


# ---------------------------------------------------- distance polynomials


@dataclass(frozen=True)
class DistancePolynomials:
    """The sequence p_0, ..., p_{d+1} with p_i(b0) = k_i for graph arrays.

    Defined by p_0 = 1 and (x - a_i) p_i = b_{i-1} p_{i-1} + c_{i+1} p_{i+1}
    for 0 <= i <= d, where c_{d+1} is an arbitrary positive number whose
    choice does not move the zeros of p_{d+1}.
    """

    coeffs: tuple[Coeffs, ...]  # index i -> p_i, 0 <= i <= d+1
    c_extra: Fraction

    @property
    def d(self) -> int:
        return len(self.coeffs) - 2

    def eval(self, i: int, x):
        return poly_eval(self.coeffs[i], x)

    def chain_values(self, x: Fraction, upto: int) -> list[Fraction]:
        return [poly_eval(self.coeffs[i], x) for i in range(upto + 1)]


def distance_polynomials(arr: AnyArray, c_extra: Fraction = Fraction(1)) -> DistancePolynomials:
    """Generate the polynomial sequence of an array in exact arithmetic."""
    if c_extra <= 0:
        raise ValueError("c_{d+1} must be positive")
    d = arr.d
    a = arr.a
    b = arr.b
    c = list(arr.c) + [c_extra]
    polys: list[Coeffs] = [(Fraction(1),)]
    prev: Coeffs = ()  # p_{-1} = 0
    for i in range(d + 1):
        rhs = _poly_xminus(a[i], polys[i])
        if i >= 1:
            rhs = _poly_sub(rhs, tuple(b[i - 1] * t for t in prev))
        nxt = tuple(t / c[i] for t in rhs)
        prev = polys[i]
        polys.append(nxt)
    return DistancePolynomials(tuple(polys), c_extra)


# ----------------------------------------------------------- root isolation


@dataclass(frozen=True)
class Eigenvalue:
    """One isolated eigenvalue with its provenance.

    ``exact`` is set when the value was pinned as an exact rational (then
    ``width`` is 0); otherwise ``width`` is the final bisection interval
    width, or None when the non-Sturm fallback produced the value.
    """

    value: float
    exact: Fraction | None = None
    width: float | None = 0.0

    def __float__(self) -> float:
        return self.value


class _SturmIsolator:
    """Root isolation for p_m via exact sign-change counts."""

    _MAX_SHRINK = 60

    def __init__(self, polys: DistancePolynomials, m: int):
        self.polys = polys
        self.m = m
        self._counts: dict[Fraction, int] = {}

    def _p(self, x: Fraction) -> Fraction:
        return poly_eval(self.polys.coeffs[self.m], x)

    def _count_above(self, x: Fraction) -> int:
        """Number of roots of p_m strictly above x (x must not be a root)."""
        cached = self._counts.get(x)
        if cached is not None:
            return cached
        vals = self.polys.chain_values(x, self.m)
        n = sign_changes(vals)
        self._counts[x] = n
        return n

    def _exclusion_radius(self, r: Fraction, span: Fraction) -> Fraction:
        """A radius around the known root r containing no other root."""
        delta = span / 2**12
        for _ in range(self._MAX_SHRINK):
            if (
                self._p(r - delta) != 0
                and self._p(r + delta) != 0
                and self._count_above(r - delta) - self._count_above(r + delta) == 1
            ):
                return delta
            delta /= 2**8
        raise InternalConsistencyError("failed to separate a root cluster")

    def _refine(self, a: Fraction, b: Fraction, target: Fraction) -> Eigenvalue:
        """Shrink an isolating interval (one simple root, endpoints nonroot)."""
        sa = _sign(self._p(a))
        while b - a > target:
            mid = (a + b) / 2
            v = self._p(mid)
            if v == 0:
                return Eigenvalue(float(mid), exact=mid, width=0.0)
            if _sign(v) == sa:
                a = mid
            else:
                b = mid
        mid = (a + b) / 2
        for den in (1, 2):
            cand = Fraction(round(mid * den), den)
            if a < cand < b and self._p(cand) == 0:
                return Eigenvalue(float(cand), exact=cand, width=0.0)
        return Eigenvalue(float(mid), exact=None, width=float(b - a))

    def roots(self, lo: Fraction, hi: Fraction, target: Fraction) -> list[Eigenvalue]:
        """All roots of p_m in (lo, hi), sorted decreasing."""
        total = self._count_above(lo) - self._count_above(hi)
        if self._p(lo) == 0 or self._p(hi) == 0:
            raise InternalConsistencyError("isolation endpoints hit a root")
        exact: list[Fraction] = []
        # cheap prescan: rational roots of graph arrays are algebraic
        # integers, so testing the integers in range finds them exactly
        if hi - lo < 20002:
            for t in range(math.ceil(lo), math.floor(hi) + 1):
                cand = Fraction(t)
                if lo < cand < hi and self._p(cand) == 0:
                    exact.append(cand)

        found: list[Eigenvalue] = [Eigenvalue(float(r), exact=r, width=0.0) for r in exact]
        if len(exact) < total:
            # split (lo, hi) at the known roots, then bisect the gaps
            span = hi - lo
            cuts: list[Fraction] = [lo]
            for r in sorted(exact):
                delta = self._exclusion_radius(r, span)
                cuts.extend((r - delta, r + delta))
            cuts.append(hi)
            work: list[tuple[Fraction, Fraction, int]] = []
            for i in range(0, len(cuts), 2):
                a, b = cuts[i], cuts[i + 1]
                cnt = self._count_above(a) - self._count_above(b)
                if cnt:
                    work.append((a, b, cnt))
            while work:
                a, b, cnt = work.pop()
                if cnt == 1:
                    found.append(self._refine(a, b, target))
                    continue
                mid = (a + b) / 2
                if self._p(mid) == 0:
                    found.append(Eigenvalue(float(mid), exact=mid, width=0.0))
                    delta = self._exclusion_radius(mid, b - a)
                    la, lb = a, mid - delta
                    ra, rb = mid + delta, b
                    lc = self._count_above(la) - self._count_above(lb)
                    rc = self._count_above(ra) - self._count_above(rb)
                    if lc:
                        work.append((la, lb, lc))
                    if rc:
                        work.append((ra, rb, rc))
                else:
                    left = self._count_above(a) - self._count_above(mid)
                    if left:
                        work.append((a, mid, left))
                    if cnt - left:
                        work.append((mid, b, cnt - left))
        if len(found) != total:
            raise InternalConsistencyError(
                f"isolated {len(found)} roots, expected {total}"
            )
        found.sort(key=lambda ev: ev.value, reverse=True)
        return found


def _is_positive_array(arr: AnyArray, polys: DistancePolynomials) -> bool:
    return all(x > 0 for x in arr.b) and all(x > 0 for x in arr.c)


def polynomial_roots(arr: AnyArray, polys: DistancePolynomials, m: int) -> list[Eigenvalue]:
    """Roots of p_m (eigenvalues of the leading m x m block), decreasing."""
    if m == 0:
        return []
    if not _is_positive_array(arr, polys):
        return _companion_roots(polys, m)
    b0 = arr.b0
    lo, hi = -b0 - 1, b0 + 1
    target = max(Fraction(1), b0) / 10**13
    iso = _SturmIsolator(polys, m)
    roots = iso.roots(Fraction(lo), Fraction(hi), target)
    if len(roots) != m:
        raise InternalConsistencyError(f"expected {m} roots of p_{m}, got {len(roots)}")
    return roots


def _companion_roots(polys: DistancePolynomials, m: int) -> list[Eigenvalue]:
    """Fallback for signed (generalized) arrays: companion-matrix roots."""
    coeffs = [float(x) for x in polys.coeffs[m]]
    zs = np.roots(list(reversed(coeffs)))
    scale = max(1.0, float(max(abs(z) for z in zs)))
    if np.max(np.abs(zs.imag)) > 1e-7 * scale:
        raise InternalConsistencyError(
            "generalized array has a non-real spectrum; cannot order eigenvalues"
        )
    vals = sorted(zs.real, reverse=True)
    out: list[Eigenvalue] = []
    exact_poly = polys.coeffs[m]
    for v in vals:
        cand = Fraction(round(v))
        if abs(v - round(v)) < 1e-7 * scale and poly_eval(exact_poly, cand) == 0:
            out.append(Eigenvalue(float(cand), exact=cand, width=0.0))
        else:
            out.append(Eigenvalue(v, exact=None, width=None))
    return out


def eigenvalues(arr: AnyArray, polys: DistancePolynomials | None = None) -> tuple[Eigenvalue, ...]:
    """The d+1 eigenvalues of the array, strictly decreasing.

    For positive arrays these come from Sturm-count bisection (isolation is
    certified); the top eigenvalue is b0 exactly.  Signed generalized arrays
    fall back to companion-matrix roots.
    """
    if polys is None:
        polys = distance_polynomials(arr)
    roots = polynomial_roots(arr, polys, arr.d + 1)
    if _is_positive_array(arr, polys):
        top = roots[0]
        if top.exact != arr.b0:
            raise InternalConsistencyError(
                f"largest eigenvalue {top.value} did not pin to b0 = {arr.b0}"
            )
        for lhs, rhs in zip(roots, roots[1:]):
            if not lhs.value > rhs.value:
                raise InternalConsistencyError("eigenvalues are not strictly decreasing")
    return tuple(roots)


# ---------------------------------------------------------- spectral data


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues with multiplicities for a graph array."""

    arr: IntersectionArray
    polys: DistancePolynomials
    theta: tuple[Eigenvalue, ...]
    m: tuple[float, ...]

    @property
    def d(self) -> int:
        return self.arr.d

    @property
    def theta_values(self) -> np.ndarray:
        return np.array([t.value for t in self.theta])

    def theta_exact_or_value(self, i: int):
        t = self.theta[i]
        return t.exact if t.exact is not None else t.value


def _p_column(polys: DistancePolynomials, theta, j: int) -> list:
    """Column j of P: p_j evaluated at each eigenvalue (exact where known)."""
    out = []
    for t in theta:
        x = t.exact if t.exact is not None else t.value
        out.append(poly_eval(polys.coeffs[j], x))
    return out


def multiplicities(arr: IntersectionArray, theta, p_col_d) -> tuple[float, ...]:
    """Multiplicities from the product identity, cross-checked.

    Primary route:  m_i * P_id * prod_{j != i} (theta_i - theta_j)
    = n b_0 ... b_{d-1}.  Cross route: m_i = n / sum_j P_ij^2 / k_j.
    Disagreement or a zero P_id raises InternalConsistencyError.
    """
    d = arr.d
    n = float(arr.n)
    rhs = n * float(np.prod([float(x) for x in arr.b]))
    tv = [float(t) for t in theta]
    col = [float(x) for x in p_col_d]
    kd = float(arr.k[d])
    ms = []
    for i in range(d + 1):
        if abs(col[i]) <= 1e-12 * max(1.0, kd):
            raise InternalConsistencyError(
                f"P_({i},{d}) = {col[i]} is zero; sign pattern violated"
            )
        prod = 1.0
        for j in range(d + 1):
            if j != i:
                prod *= tv[i] - tv[j]
        ms.append(rhs / (col[i] * prod))

    # cross-check against the standard-sequence norm formula
    polys = distance_polynomials(arr)
    kf = [float(x) for x in arr.k]
    for i in range(d + 1):
        s = 0.0
        for j in range(d + 1):
            pij = float(poly_eval(polys.coeffs[j], tv[i]))
            s += pij * pij / kf[j]
        alt = n / s
        if abs(alt - ms[i]) > 1e-6 * max(1.0, abs(ms[i])):
            raise InternalConsistencyError(
                f"multiplicity routes disagree at index {i}: {ms[i]} vs {alt}"
            )
    total = sum(ms)
    if abs(total - n) > 1e-8 * n:
        raise InternalConsistencyError(f"sum of multiplicities {total} != n = {n}")
    return tuple(ms)


def spectral_data(arr: IntersectionArray) -> SpectralData:
    """Full spectral pipeline for a graph array: polynomials, roots, m_i."""
    polys = distance_polynomials(arr)
    theta = eigenvalues(arr, polys)
    col_d = _p_column(polys, theta, arr.d)
    m = multiplicities(arr, theta, col_d)
    return SpectralData(arr=arr, polys=polys, theta=theta, m=m)


# ------------------------------------------------------------ eigenmatrices


@dataclass(frozen=True)
class Eigenmatrix:
    kind: str  # "P" or "Q"
    entries: np.ndarray  # (d+1) x (d+1) floats
    exact: tuple[tuple[Fraction | None, ...], ...] | None = None

    @property
    def d(self) -> int:
        return self.entries.shape[0] - 1

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]


def eigenmatrix_P(arr: IntersectionArray, spec: SpectralData) -> Eigenmatrix:
    """P_ij = p_j(theta_i), verified against the standard-sequence route."""
    d = arr.d
    polys = spec.polys
    kf = [float(x) for x in arr.k]
    entries = np.zeros((d + 1, d + 1))
    exact_rows: list[tuple[Fraction | None, ...]] = []
    for i, t in enumerate(spec.theta):
        if t.exact is not None:
            row = [poly_eval(polys.coeffs[j], t.exact) for j in range(d + 1)]
            entries[i] = [float(x) for x in row]
            exact_rows.append(tuple(row))
        else:
            entries[i] = [float(poly_eval(polys.coeffs[j], t.value)) for j in range(d + 1)]
            exact_rows.append((None,) * (d + 1))

        # independent route: standard sequence u with u_0 = 1, u_1 = theta/k
        th = t.value
        u = [1.0, th / float(arr.b[0])]
        af = [float(x) for x in arr.a]
        bf = [float(x) for x in arr.b]
        cf = [float(x) for x in arr.c]
        for j in range(1, d):
            u.append(((th - af[j]) * u[j] - cf[j - 1] * u[j - 1]) / bf[j])
        for j in range(d + 1):
            alt = kf[j] * u[j]
            if abs(alt - entries[i, j]) > 1e-9 * max(1.0, kf[j]):
                raise InternalConsistencyError(
                    f"P routes disagree at ({i},{j}): {entries[i, j]} vs {alt}"
                )
    return Eigenmatrix("P", entries, tuple(exact_rows))


def eigenmatrix_Q(arr: IntersectionArray, spec: SpectralData, P: Eigenmatrix) -> Eigenmatrix:
    """Q_ij = m_j P_ji / k_i, with the duality P Q = n I verified."""
    d = arr.d
    n = float(arr.n)
    kf = np.array([float(x) for x in arr.k])
    m = np.asarray(spec.m)
    Q = (P.entries.T * m[None, :]) / kf[:, None]
    resid = np.max(np.abs(P.entries @ Q - n * np.eye(d + 1)))
    if resid > 1e-8 * n:
        raise InternalConsistencyError(f"P Q != n I (max residual {resid})")
    return Eigenmatrix("Q", Q)


# --------------------------------------------------------- sanity reports


@dataclass(frozen=True)
class SignChangeReport:
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return all(r == i for i, r in enumerate(self.rows)) and all(
            c == i for i, c in enumerate(self.cols)
        )


def sign_changes_check(P: Eigenmatrix) -> SignChangeReport:
    """Row i and column i of P must show exactly i sign changes."""
    d = P.d
    rows = []
    cols = []
    for i in range(d + 1):
        row = P.entries[i]
        col = P.entries[:, i]
        rows.append(sign_changes(row, zero_tol=1e-9 * max(1.0, np.max(np.abs(row)))))
        cols.append(sign_changes(col, zero_tol=1e-9 * max(1.0, np.max(np.abs(col)))))
    return SignChangeReport(tuple(rows), tuple(cols))


def power_sum_residuals(arr: IntersectionArray, spec: SpectralData) -> dict[str, float]:
    """Relative residuals of the five moment identities of the spectrum."""
    n = float(arr.n)
    k = float(arr.b[0])
    lam = float(arr.lam)
    tv = spec.theta_values
    m = np.asarray(spec.m)
    out = {"sum_m": abs(m.sum() - n) / n, "sum_m_theta": abs(float(m @ tv)) / (n * k)}
    out["sum_m_theta2"] = abs(float(m @ tv**2) - n * k) / (n * k)
    denom3 = max(n * k, abs(n * k * lam))
    out["sum_m_theta3"] = abs(float(m @ tv**3) - n * k * lam) / denom3
    if arr.d >= 2:
        mu = float(arr.mu)
        b1 = float(arr.b[1])
        target4 = n * k * (k + lam**2 + b1 * mu)
        out["sum_m_theta4"] = abs(float(m @ tv**4) - target4) / max(n * k, abs(target4))
    return out


def corollary_identity_residual(arr: IntersectionArray, spec: SpectralData, P: Eigenmatrix) -> float:
    """Max relative deviation of m_i P_id prod(theta_i - theta_j) from n b0...b_{d-1}."""
    d = arr.d
    rhs = float(arr.n) * float(np.prod([float(x) for x in arr.b]))
    tv = spec.theta_values
    worst = 0.0
    for i in range(d + 1):
        prod = 1.0
        for j in range(d + 1):
            if j != i:
                prod *= tv[i] - tv[j]
        lhs = spec.m[i] * P.entries[i, d] * prod
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst
