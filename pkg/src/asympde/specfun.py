"""Special functions: half-normalised erfc, Gaussian heat convolution, and
moments of generalised Pearcey phase integrals

    M_k(b, c) = int s^k exp(-a s^(2n+2) + b s^2 - c s) ds

evaluated without overflow by factoring out the maximum of the exponent.

Note that ``erfc_paper`` is (1/sqrt(pi)) int_z^inf exp(-y^2) dy, i.e. HALF of
the conventional complementary error function ``scipy.special.erfc``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .fold import real_roots

# exp(-45) ~ 2.9e-20: integrand below this relative to its peak is dropped
LOG_CUTOFF = 45.0

_SQRT_PI = math.sqrt(math.pi)


def erfc_paper(z):
    """(1/sqrt(pi)) * int_z^inf exp(-y^2) dy  ==  scipy.special.erfc(z) / 2.

    The factor 1/2 is deliberate; erfc_paper(0) = 1/2 and
    erfc_paper(z) + erfc_paper(-z) = 1.
    """
    return 0.5 * special.erfc(z)


def log_erfc_paper(z):
    """log(erfc_paper(z)), accurate for large positive z."""
    return special.log_ndtr(-math.sqrt(2.0) * np.asarray(z, dtype=float))


def r000(z, nu_minus: float, nu_plus: float):
    """Step boundary function nu_minus * erfc_paper(z) + nu_plus * erfc_paper(-z).

    Tends to nu_minus as z -> -inf and nu_plus as z -> +inf.
    """
    return nu_minus * erfc_paper(z) + nu_plus * erfc_paper(-np.asarray(z, dtype=float))


def heat_convolution(
    sigma,
    omega,
    nu: Callable[[float], float],
    points: Sequence[float] = (0.0,),
    epsrel: float = 1e-11,
):
    """Gaussian convolution h0(sigma, omega) of ``nu``.

    h0 = 1/(2 sqrt(pi omega)) int nu(s) exp(-(sigma - s)^2 / (4 omega)) ds.

    The integral is rewritten with s = sigma + 2 sqrt(omega) y and truncated
    to |y| <= 10 (Gaussian mass outside is below 2.1e-45 of sup|nu|).
    ``points`` are s-locations where nu has structure; for a scalar sigma
    they become breakpoints of the adaptive rule.  Arrays of sigma sharing
    one omega are integrated together with a vector-valued adaptive rule.
    """
    sig, om = np.broadcast_arrays(np.asarray(sigma, dtype=float), np.asarray(omega, dtype=float))
    if np.any(~(om > 0.0)):
        raise ValueError(f"omega must be positive, got {np.min(om)}")
    ymax = 10.0

    def call_nu(s):
        try:
            v = np.asarray(nu(s), dtype=float)
            if v.shape == np.shape(s):
                return v
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda z: float(nu(z)))(s)

    if sig.ndim == 0:
        root = 2.0 * math.sqrt(float(om))
        sg = float(sig)
        ys = sorted({(p - sg) / root for p in points if abs((p - sg) / root) < ymax})

        def f(y):
            return float(call_nu(np.asarray(sg + root * y))) * math.exp(-y * y)

        val, _ = integrate.quad(f, -ymax, ymax, points=ys or None, limit=400,
                                epsabs=1e-15, epsrel=epsrel)
        return val / _SQRT_PI

    out = np.empty(sig.shape)
    flat_s, flat_o, flat_out = sig.ravel(), om.ravel(), out.reshape(-1)
    for w in np.unique(flat_o):
        idx = np.nonzero(flat_o == w)[0]
        root = 2.0 * math.sqrt(w)
        sv = flat_s[idx]
        if root <= 1.0:
            # narrow kernel: integrate in y, nu sampled around each sigma
            def f(y):
                return call_nu(sv + root * y) * math.exp(-y * y)

            val, _ = integrate.quad_vec(f, -ymax, ymax, epsabs=1e-15, epsrel=epsrel, limit=2000)
            flat_out[idx] = val / _SQRT_PI
        else:
            # wide kernel: integrate in s, nu's structure sits at fixed breakpoints
            lo = sv.min() - ymax * root
            hi = sv.max() + ymax * root
            brk = [p for p in points if lo < p < hi]

            def g(s):
                y = (sv - s) / root
                return float(call_nu(np.asarray(s))) * np.exp(-y * y)

            val, _ = integrate.quad_vec(g, lo, hi, epsabs=1e-15, epsrel=epsrel, limit=2000,
                                        points=brk or None)
            flat_out[idx] = val / (_SQRT_PI * root)
    return out


@dataclass(frozen=True)
class PhaseIntegralSpec:
    """Parameters of int s^moment exp(-a s^(2n+2) + b s^2 - c s) ds."""

    n: int
    a: float
    b: float
    c: float
    moment: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.a > 0.0:
            raise ValueError(f"a must be positive for convergence, got {self.a}")
        if int(self.moment) != self.moment or self.moment < 0:
            raise ValueError(f"moment must be a non-negative integer, got {self.moment}")
        if not (math.isfinite(self.b) and math.isfinite(self.c)):
            raise ValueError("b and c must be finite")


@dataclass(frozen=True)
class ScaledValue:
    """The number mantissa * exp(log_scale)."""

    log_scale: float
    mantissa: float

    @property
    def value(self) -> float:
        with np.errstate(over="ignore"):
            return float(self.mantissa * np.exp(self.log_scale))

    @property
    def log_abs(self) -> float:
        return float(math.log(abs(self.mantissa)) + self.log_scale)

    def ratio(self, other: "ScaledValue") -> float:
        return float(self.mantissa / other.mantissa * math.exp(self.log_scale - other.log_scale))


# ---------------------------------------------------------------------------
# Gauss-Kronrod (10, 21) nodes on [-1, 1]; the Gauss nodes are the odd entries
_GK_X = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
])
_GK_X = np.concatenate([_GK_X, -_GK_X[-2::-1]])
_K_W = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_K_W = np.concatenate([_K_W, _K_W[-2::-1]])
_G_W = np.zeros(21)
_G_W[1:21:2] = [
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338, 0.295524224714752870173892994651338,
    0.269266719309996355091226921569469, 0.219086362515982043995534934228163,
    0.149451349150580593145776339657697, 0.066671344308688137593568809893332,
]


def _phase(s, n, a, b, c):
    s2 = s * s
    return -a * s2 ** (n + 1) + b * s2 - c * s


def critical_points(n: int, a: float, b: float, c: float):
    """Real critical points of the phase, increasing.

    p'(s) = 0  <=>  s^(2n+1) - T s + X = 0 with T = 2b/(a(2n+2)), X = c/(a(2n+2)).
    """
    d = a * (2 * n + 2)
    return real_roots(2 * n + 1, 2.0 * b / d, c / d)


def _support(n, a, b, c, crit, pmax):
    """Interval outside which the integrand is below exp(-LOG_CUTOFF) of its peak."""
    def g(s):
        return _phase(s, n, a, b, c) - pmax + LOG_CUTOFF

    ends = []
    for anchor, direction in ((crit[0], -1.0), (crit[-1], 1.0)):
        # beyond the outermost critical point the phase is monotone
        step = 1.0
        far = anchor + direction * step
        while g(far) > 0.0:
            step *= 2.0
            far = anchor + direction * step
        lo, hi = sorted((anchor, far))
        if g(anchor) <= 0.0:
            ends.append(anchor)
        else:
            ends.append(optimize.brentq(g, lo, hi, xtol=1e-14, rtol=1e-14))
    return ends[0], ends[1]


def _prepare(n, a, b, c):
    crit = critical_points(n, a, b, c)
    vals = [_phase(s, n, a, b, c) for s in crit]
    j = int(np.argmax(vals))
    smax, pmax = crit[j], vals[j]
    lo, hi = _support(n, a, b, c, crit, pmax)
    breaks = [lo] + [s for s in crit if lo < s < hi] + [hi]
    return smax, pmax, breaks


def phase_moments(
    n: int,
    a: float,
    b,
    c,
    kmax: int = 3,
    center: str = "max",
    epsrel: float = 1e-13,
    initial_panels: int = 4,
    max_levels: int = 40,
):
    """Batched adaptive Gauss-Kronrod moments of the phase integral.

    Parameters
    ----------
    b, c : array_like
        Quadratic and linear coefficients, broadcast together.
    kmax : int
        Highest moment returned.
    center : {"max", "zero"}
        Moments are taken of (s - s0)^k with s0 the global maximiser of the
        phase ("max") or s0 = 0 ("zero").

    Returns
    -------
    log_scale : ndarray, shape (N,)
        Maximum of the exponent.
    s0 : ndarray, shape (N,)
        Centre of the moments.
    mom : ndarray, shape (N, kmax + 1)
        int (s - s0)^k exp(p(s) - log_scale) ds.
    """
    if not a > 0.0:
        raise ValueError(f"a must be positive, got {a}")
    bb, cc = np.broadcast_arrays(np.asarray(b, dtype=float), np.asarray(c, dtype=float))
    shape = bb.shape
    bb = bb.ravel()
    cc = cc.ravel()
    N = bb.size
    ks = np.arange(kmax + 1)

    pmax = np.empty(N)
    s0 = np.empty(N)
    lo_list, hi_list, own_list = [], [], []
    total_width = np.empty(N)
    for i in range(N):
        smax, pm, breaks = _prepare(n, a, bb[i], cc[i])
        pmax[i] = pm
        s0[i] = smax if center == "max" else 0.0
        total_width[i] = breaks[-1] - breaks[0]
        for x0, x1 in zip(breaks[:-1], breaks[1:]):
            edges = np.linspace(x0, x1, initial_panels + 1)
            lo_list.append(edges[:-1])
            hi_list.append(edges[1:])
            own_list.append(np.full(initial_panels, i))
    lo = np.concatenate(lo_list)
    hi = np.concatenate(hi_list)
    own = np.concatenate(own_list)

    def evaluate(lo, hi, own):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        s = mid[:, None] + half[:, None] * _GK_X[None, :]
        e = np.exp(_phase(s, n, a, bb[own][:, None], cc[own][:, None]) - pmax[own][:, None])
        d = s - s0[own][:, None]
        powers = d[:, :, None] ** ks[None, None, :]  # (P, 21, K)
        fk = e[:, :, None] * powers
        kron = np.einsum("pjk,j->pk", fk, _K_W) * half[:, None]
        gauss = np.einsum("pjk,j->pk", fk, _G_W) * half[:, None]
        absk = np.einsum("pjk,j->pk", np.abs(fk), _K_W) * half[:, None]
        return kron, np.abs(kron - gauss), absk

    mom = np.zeros((N, kmax + 1))
    kron, err, absk = evaluate(lo, hi, own)
    scale = np.zeros((N, kmax + 1))
    np.add.at(scale, own, absk)
    scale = np.maximum(scale, np.finfo(float).tiny)

    # exp(p - pmax) carries a relative rounding error of about eps * |p|
    tol = np.maximum(epsrel, 64.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(pmax)))
    for _ in range(max_levels):
        share = (hi - lo) / total_width[own]
        ok = np.all(err <= tol[own, None] * scale[own] * share[:, None], axis=1)
        ok |= share < 1e-12
        np.add.at(mom, own[ok], kron[ok])
        if ok.all():
            break
        lo, hi, own = lo[~ok], hi[~ok], own[~ok]
        mid = 0.5 * (lo + hi)
        lo, hi, own = np.concatenate([lo, mid]), np.concatenate([mid, hi]), np.concatenate([own, own])
        kron, err, absk = evaluate(lo, hi, own)
    else:
        # accept what is left; these panels are at the rounding floor
        np.add.at(mom, own, kron)

    return pmax.reshape(shape), s0.reshape(shape), mom.reshape(shape + (kmax + 1,))


def phase_moments_fixed(n: int, a: float, b: float, c: float, kmax: int = 3,
                        panels: int = 400, order: int = 24):
    """Composite Gauss-Legendre moments on the truncated support.

    Independent cross-check of :func:`phase_moments` (same truncation,
    unrelated rule and no adaptivity); moments are about s = 0.
    """
    smax, pmax, breaks = _prepare(n, a, float(b), float(c))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(breaks[0], breaks[-1], panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ww = (half[:, None] * w[None, :]).ravel()
    e = np.exp(_phase(s, n, a, b, c) - pmax)
    mom = np.array([np.sum(ww * e * s**k) for k in range(kmax + 1)])
    return pmax, mom


def phase_integral(spec: PhaseIntegralSpec) -> ScaledValue:
    """int s^k exp(-a s^(2n+2) + b s^2 - c s) ds as a ScaledValue.

    ``log_scale`` is the maximum of the exponent over s, so the mantissa of
    the zeroth moment lies in (0, width of the support].
    """
    k = spec.moment
    pmax, _, mom = phase_moments(spec.n, spec.a, spec.b, spec.c, kmax=k, center="zero")
    return ScaledValue(float(pmax), float(mom[k]))


def cumulants(s0, mom):
    """Mean and second/third cumulants from moments about ``s0``.

    ``mom[..., k]`` are (unnormalised) moments of (s - s0)^k for k = 0..3.
    """
    m1 = mom[..., 1] / mom[..., 0]
    m2 = mom[..., 2] / mom[..., 0]
    m3 = mom[..., 3] / mom[..., 0]
    k2 = m2 - m1 * m1
    k3 = m3 - 3.0 * m1 * m2 + 2.0 * m1**3
    return s0 + m1, k2, k3
