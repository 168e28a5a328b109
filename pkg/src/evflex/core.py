"""Charging-job domain types and individual feasibility.

A charging profile is represented throughout as a plain 1-D float ndarray of
length T (energy delivered per step); invariants (length, non-negativity) are
enforced at function boundaries rather than by a wrapper class.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, EnergyOutOfRange

DEFAULT_ATOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Discrete horizon of `steps` slots, each of unit duration."""

    steps: int
    delta: float = 1.0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.delta != 1.0:
            raise ValueError("step duration is fixed to 1")


@dataclass(frozen=True)
class ChargingRequirement:
    """One EV's job: energy interval, connection window, power cap."""

    e_lo: float
    e_hi: float
    arrive: int = 1
    depart: int = 1
    power: float = 1.0

    def __post_init__(self):
        if self.arrive < 1 or self.depart < self.arrive:
            raise ValueError(f"bad connection window [{self.arrive}, {self.depart}]")
        if self.power <= 0:
            raise ValueError(f"power must be positive, got {self.power}")
        window = self.depart - self.arrive + 1
        if not (0 <= self.e_lo <= self.e_hi <= self.power * window + 1e-12):
            raise ValueError(
                f"need 0 <= e_lo <= e_hi <= m*(d-a+1): "
                f"({self.e_lo}, {self.e_hi}) vs cap {self.power * window}"
            )


@dataclass(frozen=True)
class Population:
    """Ordered collection of charging requirements.

    Only homogeneous populations are supported: every member shares
    arrive=1, the same departure (taken as the horizon T) and the same
    power rating.
    """

    members: tuple[ChargingRequirement, ...]

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("population must have at least one member")
        first = self.members[0]
        for req in self.members:
            if req.arrive != 1:
                raise ValueError("heterogeneous arrival times are unsupported (arrive must be 1)")
            if req.depart != first.depart or req.power != first.power:
                raise ValueError("population members must share departure time and power rating")

    @classmethod
    def from_energy_pairs(cls, pairs, horizon: int, power: float = 1.0) -> "Population":
        members = tuple(
            ChargingRequirement(float(lo), float(hi), 1, int(horizon), float(power))
            for lo, hi in pairs
        )
        return cls(members)

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def horizon(self) -> int:
        return self.members[0].depart

    @property
    def power(self) -> float:
        return self.members[0].power

    @cached_property
    def e_lo(self) -> np.ndarray:
        arr = np.array([req.e_lo for req in self.members], dtype=float)
        arr.flags.writeable = False
        return arr

    @cached_property
    def e_hi(self) -> np.ndarray:
        arr = np.array([req.e_hi for req in self.members], dtype=float)
        arr.flags.writeable = False
        return arr


def fastest_profile(energy: float, power: float, steps: int) -> np.ndarray:
    """Profile delivering `energy` at maximum power from the first step.

    Full-power slots first, then one partial slot carrying the remainder
    (omitted when zero), then zeros. The entries are non-increasing and sum
    to `energy` exactly.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if power <= 0:
        raise ValueError("power must be positive")
    if energy < 0 or energy > power * steps + 1e-12:
        raise EnergyOutOfRange(f"energy {energy} outside [0, {power * steps}]")
    full = min(int(np.floor(energy / power)), steps)
    rest = energy - power * full
    out = np.zeros(steps)
    out[:full] = power
    if full < steps and rest > 0:
        out[full] = rest
    return out


def is_individually_feasible(
    profile: np.ndarray, req: ChargingRequirement, atol: float = DEFAULT_ATOL
) -> bool:
    """True when one EV can track `profile` while meeting its requirement.

    The horizon is the member's departure step (homogeneous convention).
    """
    u = np.asarray(profile, dtype=float)
    horizon = req.depart
    if u.shape != (horizon,):
        raise DimensionMismatch(f"profile length {u.shape} != horizon {horizon}")
    window = slice(req.arrive - 1, req.depart)
    outside = np.delete(u, np.arange(req.arrive - 1, req.depart))
    if outside.size and np.any(np.abs(outside) > atol):
        return False
    inside = u[window]
    if np.any(inside < -atol) or np.any(inside > req.power + atol):
        return False
    total = float(inside.sum())
    return req.e_lo - atol <= total <= req.e_hi + atol
