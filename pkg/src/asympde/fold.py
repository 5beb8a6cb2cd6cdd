"""Outer root equations U^(2n+1) - tau*U + xi = 0 and Laplace-branch selection.

The phase p(s) = -a s^(2n+2) + tau s^2 - xi s with a = 2^(2n)/(n+1) has
p'(s) = 0 exactly when U = 2s solves the root equation, so the global
maximiser of the phase selects the branch of the fold function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np


@dataclass(frozen=True)
class FoldQuery:
    xi: float
    tau: float
    n: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not (math.isfinite(self.xi) and math.isfinite(self.tau)):
            raise ValueError("xi and tau must be finite")


@dataclass(frozen=True)
class FoldResult:
    root: float
    all_real_roots: List[float] = field(default_factory=list)
    is_maxwell: bool = False


def _poly(u, m, T, X):
    return u**m - T * u + X


def _dpoly(u, m, T):
    return m * u ** (m - 1) - T


def _safe_newton(lo, hi, m, T, X, tol=1e-15, maxiter=200):
    """Root of u^m - T u + X on a monotone bracket [lo, hi] (rtsafe-style)."""
    flo = _poly(lo, m, T, X)
    fhi = _poly(hi, m, T, X)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo > 0.0:
        lo, hi = hi, lo
    u = 0.5 * (lo + hi)
    dx_old = abs(hi - lo)
    dx = dx_old
    f = _poly(u, m, T, X)
    df = _dpoly(u, m, T)
    if f == 0.0:
        return u
    for _ in range(maxiter):
        newton_out = ((u - hi) * df - f) * ((u - lo) * df - f) > 0.0
        if df == 0.0 or newton_out or abs(2.0 * f) > abs(dx_old * df):
            dx_old = dx
            dx = 0.5 * (hi - lo)
            u = lo + dx
        else:
            dx_old = dx
            dx = f / df
            u = u - dx
        if abs(dx) <= tol * max(1.0, abs(u)):
            break
        f = _poly(u, m, T, X)
        df = _dpoly(u, m, T)
        if f == 0.0:
            break
        if f < 0.0:
            lo = u
        else:
            hi = u
    # final Newton polish where the derivative is usable
    df = _dpoly(u, m, T)
    if df != 0.0:
        u2 = u - _poly(u, m, T, X) / df
        if abs(_poly(u2, m, T, X)) < abs(_poly(u, m, T, X)):
            u = u2
    return u


def real_roots(m: int, T: float, X: float) -> List[float]:
    """All real roots of u^m - T u + X = 0 for odd m >= 3, increasing.

    The polynomial is monotone on the pieces cut at its critical points
    +-(T/m)^(1/(m-1)), so every real root sits in a sign-change bracket.
    """
    if m < 3 or m % 2 == 0:
        raise ValueError(f"degree must be odd and >= 3, got {m}")
    T = float(T)
    X = float(X)
    bound = 1.0 + 2.0 * abs(T) ** (1.0 / (m - 1)) + 2.0 * abs(X) ** (1.0 / m)
    while _poly(-bound, m, T, X) > 0.0 or _poly(bound, m, T, X) < 0.0:
        bound *= 2.0

    if T <= 0.0:
        return [_safe_newton(-bound, bound, m, T, X)]

    uc = (T / m) ** (1.0 / (m - 1))
    fl = _poly(-uc, m, T, X)  # local maximum of the polynomial
    fr = _poly(uc, m, T, X)  # local minimum
    scale = uc**m + T * uc + abs(X)
    tiny = 4.0 * np.finfo(float).eps * scale

    roots = []
    if fl > tiny:
        roots.append(_safe_newton(-bound, -uc, m, T, X))
    elif abs(fl) <= tiny:
        roots.append(-uc)
    if fl > tiny and fr < -tiny:
        roots.append(_safe_newton(-uc, uc, m, T, X))
    if fr < -tiny:
        roots.append(_safe_newton(uc, bound, m, T, X))
    elif abs(fr) <= tiny:
        roots.append(uc)
    # fr < fl always, so at least one branch above fired
    return sorted(roots)


def phase_coefficient(n: int) -> float:
    """Coefficient a = 2^(2n)/(n+1) fixed by matching to the outer solution."""
    return 2.0 ** (2 * n) / (n + 1)


def fold_root(q: FoldQuery) -> FoldResult:
    """Select the Laplace branch of U^(2n+1) - tau U + xi = 0.

    The global maximiser s* of the phase satisfies xi * s* <= 0 (the phase
    is even up to the term -xi s), so with three real roots the branch is
    the smallest root for xi > 0 and the largest for xi < 0.  On the Maxwell
    set xi = 0, tau > 0 both outer roots tie; the negative one is returned
    and ``is_maxwell`` is set.
    """
    m = 2 * q.n + 1
    roots = real_roots(m, q.tau, q.xi)
    if len(roots) == 1:
        return FoldResult(root=roots[0], all_real_roots=roots, is_maxwell=False)
    if q.xi > 0.0:
        return FoldResult(root=roots[0], all_real_roots=roots)
    if q.xi < 0.0:
        return FoldResult(root=roots[-1], all_real_roots=roots)
    # xi == 0 with tau > 0: roots are -tau^(1/2n), 0, tau^(1/2n)
    return FoldResult(root=roots[0], all_real_roots=roots, is_maxwell=True)


def outer_leading(q: FoldQuery, phi2: float) -> float:
    """Leading outer profile U0 / phi''(0) in inner variables."""
    if not phi2 > 0.0:
        raise ValueError(f"phi2 must be positive, got {phi2}")
    return fold_root(q).root / phi2
