"""Residual ratios for the A_{2n+1} inner solution, order fits, region
predicates and field norms.

The normalised residual over Omega_eps is

    sup |u_t + phi'(u) u_x - eps u_xx|
    ---------------------------------------------
    sup (|u_t| + |phi'(u) u_x| + |eps u_xx|)

with every derivative taken analytically from phase-integral moments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize
from scipy.interpolate import RegularGridInterpolator
from scipy.stats import qmc

from .colehopf import InnerPoint, inner_jet, scaling_exponents
from .flux import FluxModel
from .oracle import SampledField

OMEGA1 = "Omega1"
OMEGA2 = "Omega2"
OMEGA_EPS = "OmegaEps"


@dataclass(frozen=True)
class RegionSpec:
    """Matching regions Omega1, Omega2 and the inner domain Omega_eps.

    ``domain_exponent`` is the power of eps dividing x in Omega_eps; None
    means kappa = 1/(2n+2).
    """

    kind: str
    gamma1: float = 1.0
    gamma2: float = 1.5
    K: float = 1.0
    domain_exponent: Optional[Fraction] = None
    n: int = 1

    def __post_init__(self):
        if self.kind not in (OMEGA1, OMEGA2, OMEGA_EPS):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if not (0.0 < self.gamma1 < self.gamma2 < 2.0):
            raise ValueError("need 0 < gamma1 < gamma2 < 2")
        if not self.K > 0.0:
            raise ValueError("K must be positive")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def x_exponent(self) -> Fraction:
        if self.domain_exponent is None:
            return scaling_exponents(self.n).kappa
        return Fraction(self.domain_exponent)


def region_contains(region: RegionSpec, point) -> bool:
    """Membership test.

    Omega1 drops tau > 0, |xi| < tau^(gamma1 - 1/2); Omega2 keeps tau > 0,
    |xi| sqrt(tau) < tau^gamma2; Omega_eps is |x| eps^-d + |t| < K eps^mu.
    ``point`` is (xi, tau) for Omega1/Omega2 and an InnerPoint or (x, t, eps)
    for Omega_eps.
    """
    if region.kind == OMEGA_EPS:
        if isinstance(point, InnerPoint):
            x, t, eps = point.x, point.t, point.eps
        else:
            x, t, eps = point
        mu = float(scaling_exponents(region.n).mu)
        return abs(x) * eps ** -float(region.x_exponent) + abs(t) < region.K * eps**mu
    xi, tau = point
    if region.kind == OMEGA1:
        excluded = tau > 0.0 and abs(xi) < tau ** (region.gamma1 - 0.5)
        return not excluded
    # Omega2 is defined for tau > 0
    return tau > 0.0 and abs(xi) * math.sqrt(tau) < tau**region.gamma2


def _diamond(uv, region: RegionSpec, eps: float):
    """Map the unit square onto Omega_eps: |x| eps^-d + |t| <= K eps^mu."""
    u, v = uv[..., 0], uv[..., 1]
    alpha = u + v - 1.0
    beta = u - v
    mu = float(scaling_exponents(region.n).mu)
    r = region.K * eps**mu
    x = alpha * r * eps ** float(region.x_exponent)
    t = beta * r
    return x, t


def omega_eps_boundary(region: RegionSpec, eps: float, m: int = 64):
    """Points on the boundary |x eps^-d| + |t| = K eps^mu."""
    s = np.linspace(0.0, 1.0, m, endpoint=False)
    edges = [np.stack([s, np.zeros_like(s)], -1), np.stack([np.ones_like(s), s], -1),
             np.stack([1.0 - s, np.ones_like(s)], -1), np.stack([np.zeros_like(s), 1.0 - s], -1)]
    return _diamond(np.concatenate(edges), region, eps)


def residual_terms(x, t, eps: float, n: int, flux: FluxModel) -> dict:
    """Pointwise u_t, phi'(u) u_x, eps u_xx and the residual of u_in."""
    jet = inner_jet(x, t, eps, n, flux.phi2)
    a = jet["u_t"]
    b = flux.dphi(jet["u"]) * jet["u_x"]
    c = eps * jet["u_xx"]
    return {"u_t": a, "flux_x": b, "eps_u_xx": c, "residual": a + b - c,
            "u": jet["u"], "u_x": jet["u_x"]}


def _sup_with_refinement(fun, uv, vals, refine):
    k = int(np.argmax(vals))
    best = float(vals[k])
    if not refine:
        return best
    res = optimize.minimize(lambda p: -float(fun(p[None, :])[0]), uv[k], method="Nelder-Mead",
                            bounds=[(0.0, 1.0), (0.0, 1.0)],
                            options={"xatol": 1e-7, "fatol": 1e-14 * max(best, 1e-300), "maxiter": 400})
    return max(best, -float(res.fun))


def residual_ratio(n: int, flux: FluxModel, eps: float, region: Optional[RegionSpec] = None,
                   samples: int = 10_000, seed: int = 0, refine: bool = True,
                   details: bool = False):
    """Normalised residual of u_in over Omega_eps.

    Numerator and denominator sups are each estimated from a scrambled Sobol
    sample of Omega_eps followed by a bounded Nelder-Mead refinement from the
    best sample.
    """
    if region is None:
        region = RegionSpec(OMEGA_EPS, n=n)
    if region.kind != OMEGA_EPS:
        raise ValueError("residual_ratio needs an Omega_eps region")
    if region.n != n:
        region = RegionSpec(OMEGA_EPS, region.gamma1, region.gamma2, region.K, region.domain_exponent, n)
    m = int(math.ceil(math.log2(samples)))
    uv = qmc.Sobol(2, scramble=True, seed=seed).random_base2(m)[:samples]

    def parts(p):
        x, t = _diamond(p, region, eps)
        r = residual_terms(x, t, eps, n, flux)
        return np.abs(r["residual"]), np.abs(r["u_t"]) + np.abs(r["flux_x"]) + np.abs(r["eps_u_xx"])

    num, den = parts(uv)
    num_sup = _sup_with_refinement(lambda p: parts(p)[0], uv, num, refine)
    den_sup = _sup_with_refinement(lambda p: parts(p)[1], uv, den, refine)
    if den_sup < 1e-300:
        raise ValueError("degenerate region: denominator sup below 1e-300")
    ratio = num_sup / den_sup
    if details:
        return ratio, {"numerator_sup": num_sup, "denominator_sup": den_sup, "samples": samples}
    return ratio


def fit_order(entries: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """Least-squares slope of log(value) against log(eps), and r^2."""
    if len(entries) < 3:
        raise ValueError("need at least 3 entries")
    e = np.array([p[0] for p in entries], dtype=float)
    v = np.array([p[1] for p in entries], dtype=float)
    if np.any(v <= 0.0) or np.any(e <= 0.0):
        raise ValueError("eps and values must be positive")
    if np.unique(e).size != e.size:
        raise ValueError("eps values must be distinct")
    lx, ly = np.log(e), np.log(v)
    dx = lx - lx.mean()
    dy = ly - ly.mean()
    slope = float(np.dot(dx, dy) / np.dot(dx, dx))
    ss_res = float(np.sum((dy - slope * dx) ** 2))
    ss_tot = float(np.dot(dy, dy))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, r2


@dataclass
class ResidualReport:
    n: int
    flux_id: str
    entries: List[Tuple[float, float]]
    fitted_order: float
    predicted_order: Fraction
    r_squared: float
    meta: dict = field(default_factory=dict)

    def within_band(self, half_width: float = 0.1, r2_min: float = 0.95) -> bool:
        return (abs(self.fitted_order - float(self.predicted_order)) <= half_width
                and self.r_squared >= r2_min)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "flux_id": self.flux_id,
            "entries": [{"eps": e, "ratio": r} for e, r in self.entries],
            "fitted_order": self.fitted_order,
            "predicted_order": float(self.predicted_order),
            "predicted_order_exact": str(self.predicted_order),
            "r_squared": self.r_squared,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ResidualReport":
        return cls(
            n=int(d["n"]),
            flux_id=d["flux_id"],
            entries=[(float(x["eps"]), float(x["ratio"])) for x in d["entries"]],
            fitted_order=float(d["fitted_order"]),
            predicted_order=Fraction(d.get("predicted_order_exact", str(d["predicted_order"]))),
            r_squared=float(d["r_squared"]),
            meta=d.get("meta", {}),
        )


def residual_sweep(n: int, flux: FluxModel, eps_list: Sequence[float],
                   region: Optional[RegionSpec] = None, samples: int = 10_000,
                   seed: int = 0) -> ResidualReport:
    if region is None:
        region = RegionSpec(OMEGA_EPS, n=n)
    eps_sorted = sorted({float(e) for e in eps_list}, reverse=True)
    entries = [(e, residual_ratio(n, flux, e, region, samples=samples, seed=seed)) for e in eps_sorted]
    near_zero = all(r <= 1e-9 for _, r in entries)
    if any(r <= 0.0 for _, r in entries):
        slope, r2 = float("nan"), float("nan")
    else:
        slope, r2 = fit_order(entries)
    return ResidualReport(
        n=n,
        flux_id=flux.name,
        entries=entries,
        fitted_order=slope,
        predicted_order=scaling_exponents(n).kappa,
        r_squared=r2,
        meta={
            "sup_convention": "numerator and denominator sup taken separately over Omega_eps",
            "K": region.K,
            "domain_exponent": str(region.x_exponent),
            "samples": samples,
            "seed": seed,
            "near_zero_residuals": near_zero,
        },
    )


def compare_fields(a: SampledField, b: Union[SampledField, Callable], norm: str = "sup") -> float:
    """Norm of a - b on a's grid.

    ``b`` may be a field (interpolated onto a's nodes when the grids differ)
    or a callable b(x, t) accepting broadcast arrays.  L1 and L2 integrate
    with the trapezoidal rule in x and, when there is more than one slice, t.
    """
    X, T = np.meshgrid(a.x, a.t)
    if isinstance(b, SampledField):
        same = (b.values.shape == a.values.shape and np.allclose(b.x, a.x, rtol=0, atol=1e-14)
                and np.allclose(b.t, a.t, rtol=0, atol=1e-14))
        if same:
            bv = b.values
        else:
            if a.x[0] < b.x[0] or a.x[-1] > b.x[-1] or a.t[0] < b.t[0] or a.t[-1] > b.t[-1]:
                raise ValueError("incompatible grid extents")
            interp = RegularGridInterpolator((b.t, b.x), b.values)
            bv = interp(np.stack([T.ravel(), X.ravel()], -1)).reshape(X.shape)
    else:
        bv = np.asarray(b(X, T), dtype=float)
    d = a.values - bv
    if norm == "sup":
        return float(np.max(np.abs(d)))
    if norm not in ("L1", "L2"):
        raise ValueError(f"unknown norm {norm!r}")
    g = np.abs(d) if norm == "L1" else d * d
    val = np.trapezoid(g, a.x, axis=1)
    if val.size > 1:
        val = np.trapezoid(val, a.t)
    else:
        val = val[0]
    return float(val if norm == "L1" else math.sqrt(val))
