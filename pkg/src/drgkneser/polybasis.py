"""Expansions on the distance basis and the trace machinery built on them.

Polynomials of degree <= d in the adjacency matrix live in a
(d+1)-dimensional algebra with basis p_0(A), ..., p_d(A); nothing here ever
materializes an n x n matrix.  Traces reduce to tr(A_i p_s(A)) = n k_i
delta_{is}, which turns the coefficient extraction of the general
equal-value theorem into plain arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arrays import IntersectionArray
from .errors import InternalConsistencyError
from .spectral import DistancePolynomials, Eigenvalue, SpectralData, poly_eval


@dataclass(frozen=True)
class DistanceBasisExpansion:
    """f(A) = sum_s coeffs[s] A_s for a polynomial f of degree <= d."""

    coeffs: tuple
    degree: int

    def __getitem__(self, s: int):
        return self.coeffs[s]


def _is_exact(seq) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in seq)


def expand_in_distance_basis(
    f: Sequence, arr: IntersectionArray, polys: DistancePolynomials
) -> DistanceBasisExpansion:
    """Expand f (dense ascending coefficients) over p_0, ..., p_d.

    Exact rational arithmetic when f has rational coefficients, floating
    point otherwise.  Raises ValueError for deg f > d.
    """
    d = arr.d
    work = [x for x in f]
    while work and work[-1] == 0:
        work.pop()
    deg = len(work) - 1
    if deg > d:
        raise ValueError(f"degree {deg} exceeds diameter {d}")
    exact = _is_exact(work)
    if exact:
        basis = [list(polys.coeffs[s]) for s in range(d + 1)]
        out = [Fraction(0)] * (d + 1)
    else:
        basis = [[float(x) for x in polys.coeffs[s]] for s in range(d + 1)]
        work = [float(x) for x in work]
        out = [0.0] * (d + 1)
    for s in range(deg, -1, -1):
        if len(work) - 1 < s:
            continue
        coeff = work[s] / basis[s][s]
        out[s] = coeff
        for t in range(s + 1):
            work[t] -= coeff * basis[s][t]
        work = work[:s]
    return DistanceBasisExpansion(tuple(out), max(deg, 0))


def polynomial_from_roots(roots: Iterable) -> list:
    """Monic polynomial with the given roots, ascending coefficients.

    Stays exact when every root is rational.
    """
    roots = list(roots)
    coeffs = [Fraction(1) if _is_exact(roots) else 1.0]
    for r in roots:
        coeffs = [0] + coeffs
        for t in range(len(coeffs) - 1):
            coeffs[t] -= r * coeffs[t + 1]
    return coeffs


def trace_pairing(i: int, f: Sequence, arr: IntersectionArray, spec: SpectralData) -> float:
    """tr(A_i f(A)), via the basis expansion, cross-checked spectrally.

    Route one reads the coefficient: n k_i * coeffs[i].  Route two sums
    over the spectrum: sum_l m_l P_li f(theta_l).  Disagreement raises
    InternalConsistencyError.
    """
    d = arr.d
    if not 0 <= i <= d:
        raise ValueError(f"index {i} outside 0..{d}")
    expansion = expand_in_distance_basis(f, arr, spec.polys)
    n = float(arr.n)
    ki = float(arr.k[i])
    route1 = n * ki * float(expansion.coeffs[i])

    route2 = 0.0
    scale = 0.0
    fcoeffs = [float(x) for x in f]
    for l in range(d + 1):
        th = spec.theta[l].value
        pli = float(poly_eval(spec.polys.coeffs[i], th))
        term = spec.m[l] * pli * poly_eval(fcoeffs, th)
        route2 += term
        scale += abs(term)
    tol = 1e-8 * max(1.0, abs(route1), scale)
    if abs(route1 - route2) > tol:
        raise InternalConsistencyError(
            f"trace routes disagree for i={i}: {route1} vs {route2}"
        )
    return route1


@dataclass(frozen=True)
class AlphaCoefficients:
    """Coefficients of the equal-value theorem for an index set H.

    alpha[i] spans |H|-1 <= i <= r with r = d+1-|H| and alpha[r] = 1.  When
    the equal-value condition fails, the offending expansion coefficients
    below the window are reported in ``violations`` (index -> normalized
    coefficient).
    """

    H: tuple[int, ...]
    r: int
    alpha: dict[int, float]
    violations: dict[int, float]
    zero_match_error: float | None  # worst mismatch of the zero set, if checked

    @property
    def condition_holds(self) -> bool:
        return not self.violations


def alpha_coefficients(
    H: Iterable[int], arr: IntersectionArray, spec: SpectralData, check_zeros: bool = True
) -> AlphaCoefficients:
    """Expansion data of prod_{j not in H} (A - theta_j I) over the A_s."""
    Hs = tuple(sorted(set(H)))
    d = arr.d
    if any(h < 0 or h > d for h in Hs):
        raise ValueError("H must be a subset of 0..d")
    if not Hs:
        raise ValueError("H must be nonempty")
    r = d + 1 - len(Hs)
    complement = [j for j in range(d + 1) if j not in Hs]
    roots = [spec.theta_exact_or_value(j) for j in complement]
    f = polynomial_from_roots(roots)
    expansion = expand_in_distance_basis(f, arr, spec.polys)

    # normalizer tr(A_r A^r) = n c_1 ... c_r k_r, and
    # alpha_i = tr(A_i f(A)) / tr(A_r A^r) = coeffs[i] k_i / (c_1..c_r k_r)
    cprod = Fraction(1)
    for j in range(r):
        cprod *= arr.c[j]
    denom = float(cprod * arr.k[r])
    lo = len(Hs) - 1
    alpha: dict[int, float] = {}
    violations: dict[int, float] = {}
    for s in range(d + 1):
        val = float(expansion.coeffs[s]) * float(arr.k[s]) / denom
        if lo <= s <= r:
            alpha[s] = val
        elif abs(val) > 1e-7:
            violations[s] = val
    if r in alpha and abs(alpha[r] - 1.0) > 1e-9:
        raise InternalConsistencyError(f"alpha_r = {alpha[r]} != 1")
    alpha[r] = 1.0

    zero_err = None
    if check_zeros and not violations and r >= 1:
        g = np.zeros(r + 1)
        for s, val in alpha.items():
            ps = np.array([float(x) for x in spec.polys.coeffs[s]])
            g[: s + 1] += (val / float(arr.k[s])) * ps
        zs = np.roots(g[::-1])
        target = sorted(float(spec.theta[j].value) for j in complement)
        got = sorted(zs.real)
        zero_err = max(
            abs(a - b) for a, b in zip(target, got)
        ) if len(got) == len(target) else float("inf")
        if np.max(np.abs(zs.imag)) > 1e-6 * max(1.0, float(arr.b0)):
            zero_err = float("inf")
    return AlphaCoefficients(Hs, r, alpha, violations, zero_err)
