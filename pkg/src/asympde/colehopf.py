"""Cole-Hopf inner solutions near the fold (n = 1) and A_{2n+1} points.

With M_k the phase-integral moments (a = 2^(2n)/(n+1), b = t/eps^mu,
c = x/eps^sigma) the inner solution is

    u_in = 2 eps^(1-sigma) / phi''(0) * M_1/M_0,

and every derivative follows by differentiating under the integral sign:
d/dc M_k = -M_(k+1), d/db M_k = M_(k+2).  In terms of the mean m1 and the
cumulants k2, k3 of the normalised weight exp(p(s))/M_0,

    du/dx  = -C eps^-sigma   * k2
    du/dt  =  C eps^-mu      * (k3 + 2 m1 k2)
    d2u/dx2 = C eps^-2sigma  * k3,          C = 2 eps^(1-sigma) / phi''(0).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fold import phase_coefficient
from .specfun import ScaledValue, cumulants, phase_moments


@dataclass(frozen=True)
class ScalingExponents:
    """Inner scalings x ~ eps^sigma, t ~ eps^mu, u ~ eps^kappa."""

    n: int
    sigma: Fraction
    mu: Fraction
    kappa: Fraction

    def balance_ok(self) -> bool:
        """-mu = kappa - sigma = 1 - 2 sigma and sigma = kappa + mu = (2n+1) kappa."""
        return (
            -self.mu == self.kappa - self.sigma == 1 - 2 * self.sigma
            and self.sigma == self.kappa + self.mu == (2 * self.n + 1) * self.kappa
        )


def scaling_exponents(n: int) -> ScalingExponents:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    return ScalingExponents(
        n=n,
        sigma=Fraction(2 * n + 1, 2 * n + 2),
        mu=Fraction(n, n + 1),
        kappa=Fraction(1, 2 * n + 2),
    )


@dataclass(frozen=True)
class InnerPoint:
    x: float
    t: float
    eps: float

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")


def _check_phi2(phi2):
    if not phi2 > 0.0:
        raise ValueError(f"phi2 must be positive, got {phi2}")


def inner_jet(x, t, eps: float, n: int, phi2: float) -> dict:
    """u_in and its derivatives u_x, u_t, u_xx at arrays of (x, t).

    Returns a dict of arrays with keys ``u``, ``u_x``, ``u_t``, ``u_xx``.
    """
    _check_phi2(phi2)
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    ex = scaling_exponents(n)
    sigma, mu = float(ex.sigma), float(ex.mu)
    b = np.asarray(t, dtype=float) / eps**mu
    c = np.asarray(x, dtype=float) / eps**sigma
    m1, k2, k3 = _odd_cumulants(n, phase_coefficient(n), b, c)
    C = 2.0 * eps ** (1.0 - sigma) / phi2
    return {
        "u": C * m1,
        "u_x": -C * eps**-sigma * k2,
        "u_t": C * eps**-mu * (k3 + 2.0 * m1 * k2),
        "u_xx": C * eps ** (-2.0 * sigma) * k3,
    }


def _odd_cumulants(n, a, b, c):
    """Mean and cumulants computed at |c|, odd ones carrying the sign of c.

    The phase is even under (s, c) -> (-s, -c), so the mean and third
    cumulant are odd in c and the variance is even.  Working at |c| makes
    that symmetry exact and gives an exact zero on c = 0.
    """
    b, c = np.broadcast_arrays(np.asarray(b, dtype=float), np.asarray(c, dtype=float))
    _, s0, mom = phase_moments(n, a, b, np.abs(c), kmax=3)
    m1, k2, k3 = cumulants(s0, mom)
    sg = np.sign(c).ravel()
    m1, k2, k3 = sg * m1.ravel(), k2.ravel(), sg * k3.ravel()
    return m1.reshape(c.shape), k2.reshape(c.shape), k3.reshape(c.shape)


def u_inner(p: InnerPoint, n: int, phi2: float) -> float:
    """u_in(x, t, eps) = -2 eps V_x / (phi''(0) V)."""
    return float(inner_jet(p.x, p.t, p.eps, n, phi2)["u"])


def u_inner_x(p: InnerPoint, n: int, phi2: float) -> float:
    return float(inner_jet(p.x, p.t, p.eps, n, phi2)["u_x"])


def u_inner_t(p: InnerPoint, n: int, phi2: float) -> float:
    return float(inner_jet(p.x, p.t, p.eps, n, phi2)["u_t"])


def u_inner_xx(p: InnerPoint, n: int, phi2: float) -> float:
    return float(inner_jet(p.x, p.t, p.eps, n, phi2)["u_xx"])


def w10_jet(xi, tau, phi2: float) -> dict:
    """Leading fold term w10 and its derivatives in (xi, tau)."""
    _check_phi2(phi2)
    m1, k2, k3 = _odd_cumulants(1, 2.0, tau, xi)
    C = 2.0 / phi2
    return {
        "w": C * m1,
        "w_xi": -C * k2,
        "w_tau": C * (k3 + 2.0 * m1 * k2),
        "w_xixi": C * k3,
    }


def w10(xi, tau, phi2: float = 1.0):
    """w10 = -2 Lambda_xi / (phi''(0) Lambda), Lambda the real Pearcey-type integral.

    Accepts scalars or arrays.
    """
    w = w10_jet(xi, tau, phi2)["w"]
    return float(w) if np.ndim(w) == 0 else w


def v_integral(p: InnerPoint, n: int, moment: int = 0) -> ScaledValue:
    """int s^k exp(-2^(2n) s^(2n+2)/(n+1) + t s^2/eps^mu - x s/eps^sigma) ds."""
    ex = scaling_exponents(n)
    b = p.t / p.eps ** float(ex.mu)
    c = p.x / p.eps ** float(ex.sigma)
    pmax, _, mom = phase_moments(n, phase_coefficient(n), b, c, kmax=moment, center="zero")
    return ScaledValue(float(pmax), float(mom[moment]))


def heat_identity_terms(p: InnerPoint, n: int):
    """(V_t, eps * V_xx) sharing one scale factor, from the second moment.

    V_t = eps^-mu M_2 and eps V_xx = eps^(1 - 2 sigma) M_2.
    """
    ex = scaling_exponents(n)
    m2 = v_integral(p, n, moment=2)
    vt = p.eps ** -float(ex.mu) * m2.mantissa
    vxx = p.eps ** (1.0 - 2.0 * float(ex.sigma)) * m2.mantissa
    return ScaledValue(m2.log_scale, vt), ScaledValue(m2.log_scale, vxx)


def burgers_residual(jet: dict, phi2: float, eps: float):
    """u_t + phi''(0) u u_x - eps u_xx, pointwise."""
    return jet["u_t"] + phi2 * jet["u"] * jet["u_x"] - eps * jet["u_xx"]
