"""Large initial gradient: u(x, 0) = nu(x / rho) with rho << eps.

Inner variables eta = x/eps, theta = t/eps; Gamma solves
Gamma_theta + phi(Gamma)_eta = Gamma_eta_eta with step data
(nu_minus for eta < 0, nu_plus for eta > 0).

Two outer approximations are provided:

composite       h0(x/rho, eps t/rho^2) - R000(x / (2 sqrt(eps t))) + Gamma(x/eps, t/eps)
renormalized    1/(nu_plus - nu_minus) int Gamma((x - rho s)/eps, t/eps) nu'(s) ds
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .flux import FluxModel
from .oracle import GridSpec, SampledField, solve
from .specfun import heat_convolution, log_erfc_paper, r000


@dataclass
class InitialLayerProblem:
    nu: Callable
    nu_minus: float
    nu_plus: float
    rho: float
    eps: float
    flux: FluxModel = field(default_factory=FluxModel.burgers)
    nu_prime: Optional[Callable] = None
    nu_points: tuple = (0.0,)

    def __post_init__(self):
        if self.nu_minus == self.nu_plus:
            raise ValueError(
                "degenerate initial data: nu_minus == nu_plus, there is no initial gradient"
            )
        if not self.nu_minus > self.nu_plus:
            raise ValueError(f"need nu_minus > nu_plus, got {self.nu_minus} <= {self.nu_plus}")
        if not (self.rho > 0.0 and self.eps > 0.0):
            raise ValueError("rho and eps must be positive")
        if self.mu_ratio >= 1.0:
            warnings.warn(f"mu = rho/eps = {self.mu_ratio:g} >= 1; asymptotics not expected to hold",
                          stacklevel=2)
        self._gamma_cache = {}

    @property
    def mu_ratio(self) -> float:
        return self.rho / self.eps

    def initial(self, x):
        return self.nu(np.asarray(x, dtype=float) / self.rho)


@dataclass
class StepSolution:
    """Gamma, either in closed form (quadratic flux) or from an oracle field."""

    nu_minus: float
    nu_plus: float
    flux: FluxModel
    field: Optional[SampledField] = None

    def __call__(self, eta, theta):
        eta = np.asarray(eta, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if np.any(theta <= 0.0):
            raise ValueError("theta must be positive")
        if self.field is None:
            return _gamma_quadratic(eta, theta, self.nu_minus, self.nu_plus, *self.flux.quadratic)
        x, t = self.field.x, self.field.t
        inside = (eta >= x[0]) & (eta <= x[-1]) & (theta <= t[-1])
        if not np.all(inside):
            raise ValueError("query outside the cached oracle field for Gamma")
        return self.field.at(eta, theta)


def _gamma_burgers(eta, theta, vm, vp):
    """Step-data solution of G_theta + G G_eta = G_eta_eta.

    Cole-Hopf gives G as the weighted mean of vm and vp with weights
    exp(A_-) erfc_p(z_-) and exp(A_+) erfc_p(-z_+),
    A_ = -v eta/2 + v^2 theta/4, z_ = (eta - v theta)/(2 sqrt(theta));
    combined in log form so nothing overflows.
    """
    rt = 2.0 * np.sqrt(theta)
    lm = -0.5 * vm * eta + 0.25 * vm * vm * theta + log_erfc_paper((eta - vm * theta) / rt)
    lp = -0.5 * vp * eta + 0.25 * vp * vp * theta + log_erfc_paper(-(eta - vp * theta) / rt)
    return vp + (vm - vp) * expit(lm - lp)


def _gamma_quadratic(eta, theta, vm, vp, c, b):
    # phi = c u^2/2 + b u: G = c*Gamma solves Burgers in the frame eta - b theta
    g = _gamma_burgers(eta - b * theta, theta, c * vm, c * vp)
    out = g / c
    return float(out) if np.ndim(out) == 0 else out


def _oracle_gamma(prob: InitialLayerProblem, theta_max: float, d_eta: float = 0.02,
                  nt: int = 401) -> StepSolution:
    vmax = max(abs(prob.nu_minus), abs(prob.nu_plus))
    L = 40.0 + 4.0 * vmax * theta_max
    nx = int(round(2.0 * L / d_eta)) + 1
    grid = GridSpec(-L, L, nx, 0.0, theta_max, nt)
    vm, vp = prob.nu_minus, prob.nu_plus

    def step(eta):
        # one-cell mollification: the node at the jump takes the mean value
        return np.where(eta < 0.0, vm, np.where(eta > 0.0, vp, 0.5 * (vm + vp)))

    fld = solve(prob.flux, step, 1.0, grid, substeps=4, dt_first=1e-4, growth=1.02, startup_steps=4)
    return StepSolution(vm, vp, prob.flux, fld)


def step_solution(prob: InitialLayerProblem, theta_max: float = 10.0) -> StepSolution:
    """Gamma for this problem; oracle-backed solutions are cached per theta_max."""
    if prob.flux.quadratic is not None:
        return StepSolution(prob.nu_minus, prob.nu_plus, prob.flux)
    for tm, sol in prob._gamma_cache.items():
        if tm >= theta_max:
            return sol
    sol = _oracle_gamma(prob, theta_max)
    prob._gamma_cache[theta_max] = sol
    return sol


def gamma_step(eta, theta, prob: InitialLayerProblem):
    """Gamma(eta, theta), theta > 0."""
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(theta_arr <= 0.0):
        raise ValueError("theta must be positive")
    return step_solution(prob, float(np.max(theta_arr)))(eta, theta)


def composite_solution(x, t, prob: InitialLayerProblem):
    """h0 - R000 + Gamma; returns nu(x/rho) at t = 0."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    xb, tb = np.broadcast_arrays(x, t)
    if np.any(tb < 0.0):
        raise ValueError("t must be non-negative")
    out = np.empty(xb.shape, dtype=float)
    zero = tb == 0.0
    out[zero] = prob.initial(xb[zero])
    pos = ~zero
    if np.any(pos):
        xp, tp = xb[pos], tb[pos]
        eps, rho = prob.eps, prob.rho
        h0 = heat_convolution(xp / rho, eps * tp / rho**2, prob.nu, points=prob.nu_points)
        z = xp / (2.0 * np.sqrt(eps * tp))
        sol = step_solution(prob, float(np.max(tp)) / eps)
        out[pos] = h0 - r000(z, prob.nu_minus, prob.nu_plus) + sol(xp / eps, tp / eps)
    return float(out) if out.ndim == 0 else out


def _derivative_support(prob: InitialLayerProblem, rel: float = 1e-14, span: float = 1e3):
    """Interval of s where |nu'(s)| >= rel * sup |nu'|, found on a dense scan."""
    s = np.linspace(-span, span, 400001)
    d = np.abs(_nu_prime(prob)(s))
    keep = np.nonzero(d >= rel * d.max())[0]
    ds = s[1] - s[0]
    return s[keep[0]] - ds, s[keep[-1]] + ds


def _nu_prime(prob: InitialLayerProblem):
    if prob.nu_prime is not None:
        return prob.nu_prime

    def fd(s):
        s = np.asarray(s, dtype=float)
        h = 1e-5 * np.maximum(1.0, np.abs(s))
        return (prob.nu(s + h) - prob.nu(s - h)) / (2.0 * h)

    return fd


def renormalized_solution(x, t, prob: InitialLayerProblem, panels: int = 120, order: int = 16):
    """(nu_plus - nu_minus)^-1 int Gamma((x - rho s)/eps, t/eps) nu'(s) ds.

    Composite Gauss-Legendre over the support of nu' (truncated where
    |nu'| < 1e-14 sup|nu'|).
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    xb, tb = np.broadcast_arrays(x, t)
    if np.any(tb <= 0.0):
        raise ValueError("t must be positive")
    lo, hi = _derivative_support(prob)
    gx, gw = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    s = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel() * _nu_prime(prob)(s)
    eps, rho = prob.eps, prob.rho
    sol = step_solution(prob, float(np.max(tb)) / eps)
    flat_x, flat_t = xb.ravel(), tb.ravel()
    out = np.empty(flat_x.size)
    for i in range(flat_x.size):
        g = sol((flat_x[i] - rho * s) / eps, np.full(s.shape, flat_t[i] / eps))
        out[i] = np.dot(w, g)
    out /= prob.nu_plus - prob.nu_minus
    out = out.reshape(xb.shape)
    return float(out) if out.ndim == 0 else out


def tanh_step(nu_minus: float = 1.0, nu_plus: float = -1.0):
    """Smoothed step nu(s) = (nu_minus + nu_plus)/2 - (nu_minus - nu_plus)/2 tanh(s) and nu'."""
    a = 0.5 * (nu_minus + nu_plus)
    d = 0.5 * (nu_minus - nu_plus)

    def nu(s):
        return a - d * np.tanh(s)

    def nu_prime(s):
        e = np.exp(-2.0 * np.abs(s))
        return -d * 4.0 * e / (1.0 + e) ** 2

    return nu, nu_prime
