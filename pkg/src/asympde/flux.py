"""Flux functions phi for u_t + phi(u)_x = eps u_xx."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class FluxModel:
    """A smooth flux phi together with its first two derivatives.

    ``quadratic`` holds ``(c, b)`` when phi(u) = c u^2 / 2 + b u exactly; the
    step-data solver uses it to switch to the closed Cole-Hopf form.
    """

    phi: Callable
    dphi: Callable
    d2phi: Callable
    name: str = "custom"
    quadratic: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        c0 = float(self.d2phi(0.0))
        if not np.isfinite(c0) or c0 <= 0.0:
            raise ValueError(f"flux {self.name!r}: phi''(0) must be positive, got {c0}")

    @property
    def phi2(self) -> float:
        """phi''(0)."""
        return float(self.d2phi(0.0))

    @classmethod
    def make_quadratic(cls, c: float = 1.0, b: float = 0.0) -> "FluxModel":
        c = float(c)
        b = float(b)
        name = "burgers" if (c == 1.0 and b == 0.0) else f"quadratic(c={c:g},b={b:g})"
        return cls(
            phi=lambda u: 0.5 * c * np.square(u) + b * np.asarray(u),
            dphi=lambda u: c * np.asarray(u) + b,
            d2phi=lambda u: c + 0.0 * np.asarray(u, dtype=float),
            name=name,
            quadratic=(c, b),
        )

    @classmethod
    def burgers(cls) -> "FluxModel":
        return cls.make_quadratic(1.0, 0.0)

    @classmethod
    def cubic(cls) -> "FluxModel":
        # u^2/2 + u^3/6: phi''(0) = 1 with a generic cubic term, so the
        # flux nonlinearity beyond quadratic order is switched on.
        return cls(
            phi=lambda u: 0.5 * np.square(u) + np.power(u, 3) / 6.0,
            dphi=lambda u: np.asarray(u) + 0.5 * np.square(u),
            d2phi=lambda u: 1.0 + np.asarray(u, dtype=float),
            name="cubic",
        )

    @classmethod
    def from_name(cls, name: str) -> "FluxModel":
        key = name.strip().lower()
        if key in ("burgers", "quadratic"):
            return cls.burgers()
        if key in ("cubic", "default"):
            return cls.cubic()
        raise ValueError(f"unknown flux {name!r} (expected 'cubic', 'quadratic' or 'burgers')")
