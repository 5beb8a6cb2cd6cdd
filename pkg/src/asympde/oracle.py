"""Reference finite-difference solver for u_t + phi(u)_x = eps u_xx.

Vertex-centred conservative scheme on a (possibly graded) mesh:

    hbar_i du_i/dt + (F_{i+1/2} - F_{i-1/2}) - (D_{i+1/2} - D_{i-1/2}) = 0,

with central convective flux F = (phi(u_i) + phi(u_{i+1}))/2 (or local
Lax-Friedrichs), diffusive flux D = eps (u_{i+1} - u_i)/h_{i+1/2}, and the
implicit trapezoidal rule in time.  Each step is solved by damped Newton on
the tridiagonal Jacobian, with a Picard fallback.  Boundary nodes hold the
far-field Dirichlet values of the initial data.
"""

from __future__ import annotations

import csv
import logging
import struct
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded

from .flux import FluxModel

log = logging.getLogger(__name__)

FIELD_MAGIC = b"ASPDFLD1"


class OracleConvergenceError(RuntimeError):
    pass


class CFLWarning(UserWarning):
    pass


class BoundaryContaminationWarning(UserWarning):
    pass


@dataclass
class GridSpec:
    """Space-time grid. ``nodes`` overrides the uniform x grid when given."""

    x_min: float
    x_max: float
    nx: int
    t0: float
    t_end: float
    nt: int
    nodes: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.nodes is not None:
            self.nodes = np.asarray(self.nodes, dtype=float)
            if np.any(np.diff(self.nodes) <= 0.0):
                raise ValueError("nodes must be strictly increasing")
            self.x_min = float(self.nodes[0])
            self.x_max = float(self.nodes[-1])
            self.nx = int(self.nodes.size)
        if not self.x_min < self.x_max:
            raise ValueError("need x_min < x_max")
        if not self.t0 < self.t_end:
            raise ValueError("need t0 < t_end")
        if self.nx < 16:
            raise ValueError(f"nx must be >= 16, got {self.nx}")
        if self.nt < 2:
            raise ValueError(f"nt must be >= 2, got {self.nt}")

    @property
    def x(self) -> np.ndarray:
        if self.nodes is not None:
            return self.nodes
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t0, self.t_end, self.nt)


def graded_nodes(x_min, x_max, h_fine, h_coarse, center=0.0, fine_halfwidth=0.0, ratio=1.1):
    """Mesh with spacing h_fine near ``center`` growing geometrically to h_coarse.

    Adjacent cells differ by at most ``ratio``.
    """
    if not (x_min < center < x_max):
        raise ValueError("center must lie inside the domain")
    if not (0.0 < h_fine <= h_coarse):
        raise ValueError("need 0 < h_fine <= h_coarse")
    if ratio <= 1.0:
        raise ValueError("ratio must exceed 1")

    def half(extent):
        pts = [0.0]
        h = h_fine
        while pts[-1] < extent:
            if pts[-1] >= fine_halfwidth:
                h = min(h * ratio, h_coarse)
            pts.append(pts[-1] + h)
        pts = np.array(pts)
        pts[-1] = extent
        # merge a sliver last cell into its neighbour
        if pts.size > 2 and pts[-1] - pts[-2] < 0.5 * (pts[-2] - pts[-3]):
            pts = np.delete(pts, -2)
        return pts

    right = center + half(x_max - center)
    left = center - half(center - x_min)
    return np.concatenate([left[::-1], right[1:]])


@dataclass
class SampledField:
    """Values u[k, i] at times grid.t[k] and nodes grid.x[i]."""

    grid: GridSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nt, self.grid.nx):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid ({self.grid.nt}, {self.grid.nx})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @property
    def x(self):
        return self.grid.x

    @property
    def t(self):
        return self.grid.t

    def at(self, x, t):
        """Bilinear interpolation; raises outside the sampled rectangle."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        interp = RegularGridInterpolator((self.t, self.x), self.values, bounds_error=True)
        xb, tb = np.broadcast_arrays(x, t)
        pts = np.stack([tb.ravel(), xb.ravel()], axis=-1)
        out = interp(pts).reshape(xb.shape)
        return float(out) if out.ndim == 0 else out

    def max_principle_violation(self) -> float:
        """Amount by which any slice leaves the range of the initial slice."""
        lo, hi = self.values[0].min(), self.values[0].max()
        return float(max(self.values.max() - hi, lo - self.values.min(), 0.0))


def _face_fluxes(u, flux: FluxModel, eps, h, scheme):
    f = flux.phi(u)
    F = 0.5 * (f[:-1] + f[1:])
    alpha = None
    if scheme == "llf":
        a = np.abs(flux.dphi(u))
        alpha = np.maximum(a[:-1], a[1:])
        F = F - 0.5 * alpha * (u[1:] - u[:-1])
    D = eps * (u[1:] - u[:-1]) / h
    return F, D, alpha


def _operator(u, flux, eps, h, scheme):
    F, D, _ = _face_fluxes(u, flux, eps, h, scheme)
    return (F[1:] - F[:-1]) - (D[1:] - D[:-1])


def _jacobian_bands(u, flux, eps, h, scheme):
    """Tridiagonal d(operator)/du on interior nodes (alpha frozen for llf)."""
    dp = flux.dphi(u)
    em = eps / h[:-1]  # left face of interior node i
    ep = eps / h[1:]  # right face
    upper = 0.5 * dp[2:] - ep
    diag = em + ep
    lower = -0.5 * dp[:-2] - em
    if scheme == "llf":
        a = np.abs(dp)
        alpha = np.maximum(a[:-1], a[1:])
        upper = upper - 0.5 * alpha[1:]
        diag = diag + 0.5 * alpha[1:] + 0.5 * alpha[:-1]
        lower = lower - 0.5 * alpha[:-1]
    return lower, diag, upper


def _step(un, dt, theta, flux, eps, h, hbar, scheme, tol, max_newton):
    """One theta-method step; returns the new interior+boundary vector."""
    Ln = _operator(un, flux, eps, h, scheme)
    w = hbar / dt

    def residual(u):
        return w * (u[1:-1] - un[1:-1]) + theta * _operator(u, flux, eps, h, scheme) + (1.0 - theta) * Ln

    u = un.copy()
    r = residual(u)
    rnorm = np.max(np.abs(r))
    scale = np.max(w * (1.0 + np.abs(un[1:-1])))
    for _ in range(max_newton):
        lower, diag, upper = _jacobian_bands(u, flux, eps, h, scheme)
        ab = np.zeros((3, u.size - 2))
        ab[0, 1:] = theta * upper[:-1]
        ab[1] = w + theta * diag
        ab[2, :-1] = theta * lower[1:]
        delta = solve_banded((1, 1), ab, -r)
        lam = 1.0
        for _ in range(8):
            trial = u.copy()
            trial[1:-1] += lam * delta
            rt = residual(trial)
            rtn = np.max(np.abs(rt))
            if rtn < rnorm or rtn <= 1e-15 * scale:
                break
            lam *= 0.5
        u, r, rnorm = trial, rt, rtn
        if lam * np.max(np.abs(delta)) <= tol * (1.0 + np.max(np.abs(u))):
            return u
    return _picard(un, u, dt, theta, flux, eps, h, hbar, scheme, Ln, tol, 4 * max_newton)


def _picard(un, u, dt, theta, flux, eps, h, hbar, scheme, Ln, tol, maxit):
    """Fixed point: convective flux lagged, diffusion implicit."""
    w = hbar / dt
    em = eps / h[:-1]
    ep = eps / h[1:]
    ab = np.zeros((3, u.size - 2))
    ab[0, 1:] = -theta * ep[:-1]
    ab[1] = w + theta * (em + ep)
    ab[2, :-1] = -theta * em[1:]
    for _ in range(maxit):
        F, _, _ = _face_fluxes(u, flux, eps, h, scheme)
        rhs = w * un[1:-1] - theta * (F[1:] - F[:-1]) - (1.0 - theta) * Ln
        rhs[0] += theta * em[0] * u[0]
        rhs[-1] += theta * ep[-1] * u[-1]
        new = u.copy()
        new[1:-1] = solve_banded((1, 1), ab, rhs)
        change = np.max(np.abs(new - u))
        u = new
        if change <= tol * (1.0 + np.max(np.abs(u))):
            return u
    raise OracleConvergenceError("nonlinear step solve did not converge (Newton and Picard)")


def solve(
    flux: FluxModel,
    q: Callable,
    eps: float,
    grid: GridSpec,
    bc: str = "dirichlet",
    substeps: int = 4,
    dt_first: Optional[float] = None,
    growth: float = 1.1,
    startup_steps: int = 4,
    scheme: str = "central",
    tol: float = 1e-12,
    max_newton: int = 30,
    cfl_warn: float = 50.0,
) -> SampledField:
    """Integrate from grid.t0 to grid.t_end and sample at grid.t.

    Parameters
    ----------
    q : callable
        Initial data, evaluated on the nodes (vectorised call attempted first).
    substeps : int
        Internal steps per output interval once the step size has grown.
    dt_first, growth : float
        The first step is ``dt_first`` (default: the regular step) and each
        later step is ``growth`` times the previous one until the regular
        step is reached.  Small first steps resolve sharp initial data.
    startup_steps : int
        Number of initial backward-Euler steps; they damp the stiff modes
        the trapezoidal rule would otherwise leave oscillating.
    scheme : {"central", "llf"}
        Convective numerical flux.
    """
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if bc != "dirichlet":
        raise ValueError(f"unsupported boundary mode {bc!r}")
    if scheme not in ("central", "llf"):
        raise ValueError(f"unknown scheme {scheme!r}")
    x = grid.x
    h = np.diff(x)
    hbar = 0.5 * (h[:-1] + h[1:])
    try:
        u = np.asarray(q(x), dtype=float)
        if u.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        u = np.array([float(q(xi)) for xi in x])
    if not np.all(np.isfinite(u)):
        raise ValueError("initial data is not finite on the grid")

    times = grid.t
    dt_reg = (times[1] - times[0]) / substeps
    courant = np.max(np.abs(flux.dphi(u))) * dt_reg / h.min()
    if courant > cfl_warn:
        warnings.warn(f"advective Courant number {courant:.1f} exceeds {cfl_warn}", CFLWarning, stacklevel=2)

    out = np.empty((times.size, x.size))
    out[0] = u
    t = times[0]
    dt = dt_reg if dt_first is None else min(float(dt_first), dt_reg)
    nsteps = 0
    for k in range(1, times.size):
        while t < times[k] - 1e-14 * max(1.0, abs(times[k])):
            step = min(dt, times[k] - t)
            theta = 1.0 if nsteps < startup_steps else 0.5
            u = _step(u, step, theta, flux, eps, h, hbar, scheme, tol, max_newton)
            t += step
            nsteps += 1
            dt = min(dt * growth, dt_reg)
        t = times[k]
        out[k] = u
    fld = SampledField(grid, out, meta={"eps": eps, "flux": flux.name, "steps": nsteps, "scheme": scheme})
    viol = fld.max_principle_violation()
    if viol > 1e-10:
        warnings.warn(f"maximum principle violated by {viol:.3e}", RuntimeWarning, stacklevel=2)
    return fld


def far_field_step(field: SampledField, center: Optional[float] = None) -> np.ndarray:
    """Step profile joining the two boundary values at ``center`` (midpoint default)."""
    x = field.x
    u = field.values[0]
    c = 0.5 * (x[0] + x[-1]) if center is None else center
    prof = np.where(x < c, u[0], u[-1])
    prof[x == c] = 0.5 * (u[0] + u[-1])
    return prof


def boundary_contaminated(field: SampledField, band: int = 5, tol: float = 1e-8) -> bool:
    """True if the ``band`` nodes next to either boundary leave the boundary value."""
    v = field.values
    left = np.max(np.abs(v[:, 1:band + 1] - v[:, :1]))
    right = np.max(np.abs(v[:, -band - 1:-1] - v[:, -1:]))
    return bool(max(left, right) > tol)


def conserved_mass(field: SampledField, profile: Optional[np.ndarray] = None,
                   band: int = 5, tol: float = 1e-8) -> np.ndarray:
    """Trapezoidal integral of u - profile on every time slice.

    Warns with :class:`BoundaryContaminationWarning` when the solution has
    reached the sentinel band next to the boundaries.
    """
    if profile is None:
        profile = far_field_step(field)
    if boundary_contaminated(field, band, tol):
        warnings.warn("solution reached the boundary sentinel band", BoundaryContaminationWarning, stacklevel=2)
    return np.trapezoid(field.values - profile[None, :], field.x, axis=1)


def mass_drift(field: SampledField, profile: Optional[np.ndarray] = None) -> float:
    """max_k |m_k - m_0| relative to int |u(., t0)| dx."""
    m = conserved_mass(field, profile)
    ref = np.trapezoid(np.abs(field.values[0]), field.x)
    return float(np.max(np.abs(m - m[0])) / max(ref, np.finfo(float).tiny))


# --- snapshot export -------------------------------------------------------

def write_csv(field: SampledField, path) -> None:
    """Rows ``x,t,u`` ordered by time then space."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "t", "u"])
        for k, tk in enumerate(field.t):
            for xi, ui in zip(field.x, field.values[k]):
                w.writerow([repr(float(xi)), repr(float(tk)), repr(float(ui))])


def read_csv(path) -> SampledField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t = np.unique(data[:, 1])
    x = data[data[:, 1] == t[0], 0]
    values = data[:, 2].reshape(t.size, x.size)
    grid = GridSpec(x[0], x[-1], x.size, t[0], t[-1], t.size, nodes=x)
    return SampledField(grid, values)


def write_binary(field: SampledField, path) -> None:
    """Little-endian dump: magic(8) | nt:int64 | nx:int64 | x[nx] | t[nt] | u[nt*nx] (row-major)."""
    with open(path, "wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(struct.pack("<qq", field.grid.nt, field.grid.nx))
        fh.write(np.asarray(field.x, dtype="<f8").tobytes())
        fh.write(np.asarray(field.t, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_binary(path) -> SampledField:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != FIELD_MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        nt, nx = struct.unpack("<qq", fh.read(16))
        x = np.frombuffer(fh.read(8 * nx), dtype="<f8")
        t = np.frombuffer(fh.read(8 * nt), dtype="<f8")
        u = np.frombuffer(fh.read(8 * nt * nx), dtype="<f8").reshape(nt, nx)
    grid = GridSpec(float(x[0]), float(x[-1]), nx, float(t[0]), float(t[-1]), nt, nodes=x.copy())
    return SampledField(grid, u.copy())
