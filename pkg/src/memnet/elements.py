"""Threshold-memristive circuit element: parameters, rate law, hard limits.

The element is a voltage-controlled memristor whose resistance drifts at a
rate that is piecewise linear in the applied voltage, with slope ``alpha``
below the threshold magnitude and ``beta`` above it, and is hard-limited to
``[r_min, r_max]``. A plain resistor is the degenerate case with both slopes
zero and collapsed limits.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class MemristorParams:
    """Constants of one memristive link.

    alpha, beta: resistance drift per volt-second below/above the voltage
    threshold. v_threshold: magnitude (volts) where the slope switches,
    >= 0. r_min, r_max, r_init: hard resistance limits and starting value
    (ohms), with 0 < r_min <= r_init <= r_max.
    """

    alpha: float
    beta: float
    v_threshold: float
    r_min: float
    r_max: float
    r_init: float

    def __post_init__(self):
        if not self.r_min > 0.0:
            raise ValueError(f"r_min must be positive, got {self.r_min}")
        if not self.r_min <= self.r_max:
            raise ValueError(
                f"r_min must not exceed r_max, got [{self.r_min}, {self.r_max}]"
            )
        if not self.r_min <= self.r_init <= self.r_max:
            raise ValueError(
                f"r_init {self.r_init} outside [{self.r_min}, {self.r_max}]"
            )
        if self.v_threshold < 0.0:
            raise ValueError(f"v_threshold must be >= 0, got {self.v_threshold}")

    @classmethod
    def passive(cls, resistance: float) -> "MemristorParams":
        """A fixed resistor: zero drift, limits collapsed onto the value."""
        return cls(
            alpha=0.0,
            beta=0.0,
            v_threshold=0.0,
            r_min=resistance,
            r_max=resistance,
            r_init=resistance,
        )

    @property
    def is_passive(self) -> bool:
        return self.alpha == 0.0 and self.beta == 0.0


def rate_profile(alpha, beta, v_threshold, v_m):
    """Resistance drift rate for applied voltage(s); odd in v_m.

    Works elementwise on floats or numpy arrays. Equals alpha*v_m for
    |v_m| <= v_threshold and beta*v_m + sign(v_m)*(alpha-beta)*v_threshold
    beyond, continuous at the threshold. With alpha == beta the threshold
    term vanishes identically (exactly, in floats).
    """
    return beta * v_m + 0.5 * (alpha - beta) * (
        abs(v_m + v_threshold) - abs(v_m - v_threshold)
    )


def rate(params: MemristorParams, v_m: float) -> float:
    """dR/dt in ohm/s for the element voltage v_m (volts)."""
    return rate_profile(params.alpha, params.beta, params.v_threshold, v_m)


def clamp_resistance(params: MemristorParams, r_proposed: float) -> float:
    """Pin a proposed resistance to the element's hard limits."""
    if r_proposed < params.r_min:
        return params.r_min
    if r_proposed > params.r_max:
        return params.r_max
    return r_proposed
