"""Exact aggregate flexibility sets.

The aggregate flexibility set of a homogeneous population is fully
parameterised by two monotone vectors: the sums of the fastest-charge
profiles at the lower and upper energy bounds. Membership of an aggregate
profile is decided by a transportation feasibility computation
(source -> EV arcs with the energy-interval bounds, EV -> timestep arcs
capped at the power rating, timestep -> sink arcs pinned to the demanded
profile), run through the standard circulation transformation.

A second, algebraically equivalent membership criterion ("prefix" method)
is derived from the min-cut structure of that network: a profile u with
total E is feasible iff E lies within the population's total-energy range
and, for every k, the sum of the k largest entries of u does not exceed
sum_i min(s_i, m*k), where s is the least-majorized vector of per-EV
totals summing to E (a water-filling solution; sum_i min(s_i, m*k) is
Schur-concave, so the least-majorized totals maximise every cut bound
simultaneously). The prefix method vectorises across profiles and
populations, which the Monte Carlo harness relies on; the two methods are
cross-validated in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import DEFAULT_ATOL, Population
from .errors import DimensionMismatch, NegativeEntry
from .flows import feasible_circulation


def nu_bounds(pop: Population) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper generating vectors: sums of fastest-charge profiles."""
    steps = np.arange(pop.horizon, dtype=float)
    m = pop.power
    nu_lo = np.clip(pop.e_lo[:, None] - m * steps[None, :], 0.0, m).sum(axis=0)
    nu_hi = np.clip(pop.e_hi[:, None] - m * steps[None, :], 0.0, m).sum(axis=0)
    return nu_lo, nu_hi


@dataclass(frozen=True)
class AggregateFlexSet:
    """Aggregate flexibility set parameterised by (nu_lo, nu_hi).

    Always carries the generating population(s): a set built from one
    population stores it twice; a robust set built from a worst-case pair
    stores both, and membership is the conjunction of the two
    transportation checks.
    """

    nu_lo: np.ndarray
    nu_hi: np.ndarray
    gen_lo: Population
    gen_hi: Population

    def __post_init__(self):
        nu_lo = np.array(self.nu_lo, dtype=float)
        nu_hi = np.array(self.nu_hi, dtype=float)
        nu_lo.flags.writeable = False
        nu_hi.flags.writeable = False
        object.__setattr__(self, "nu_lo", nu_lo)
        object.__setattr__(self, "nu_hi", nu_hi)
        if nu_lo.shape != nu_hi.shape or nu_lo.ndim != 1:
            raise DimensionMismatch("nu_lo and nu_hi must be 1-D of equal length")
        if nu_lo.shape[0] != self.gen_lo.horizon:
            raise DimensionMismatch("bound vectors do not match the population horizon")
        for name, vec in (("nu_lo", nu_lo), ("nu_hi", nu_hi)):
            if np.any(np.diff(vec) > DEFAULT_ATOL):
                raise ValueError(f"{name} must be sorted non-increasing")

    @classmethod
    def from_population(cls, pop: Population) -> "AggregateFlexSet":
        nu_lo, nu_hi = nu_bounds(pop)
        return cls(nu_lo, nu_hi, pop, pop)

    @classmethod
    def from_bound_populations(cls, gen_lo: Population, gen_hi: Population) -> "AggregateFlexSet":
        """Set parameterised by gen_lo's lower vector and gen_hi's upper vector."""
        if gen_lo.horizon != gen_hi.horizon or gen_lo.power != gen_hi.power:
            raise DimensionMismatch("bound populations must share horizon and power")
        nu_lo, _ = nu_bounds(gen_lo)
        _, nu_hi = nu_bounds(gen_hi)
        return cls(nu_lo, nu_hi, gen_lo, gen_hi)

    @property
    def horizon(self) -> int:
        return int(self.nu_lo.shape[0])

    @property
    def power(self) -> float:
        return self.gen_lo.power

    @property
    def n(self) -> int:
        return self.gen_lo.n

    @cached_property
    def is_empty(self) -> bool:
        # Large transport budgets can push the lower total past the upper one.
        return bool(self.nu_lo.sum() > self.nu_hi.sum() + DEFAULT_ATOL)

    @cached_property
    def parameterisation_consistent(self) -> bool:
        """True when every prefix sum of nu_lo stays below nu_hi's.

        Single-population sets always qualify. Worst-case intersection sets
        can lose this property well before going empty; their stored
        populations still answer membership exactly (conjunction of
        transportation checks), but the splice vertices then describe a
        conservative outer family rather than the set's own vertices.
        """
        return bool(
            np.all(np.cumsum(self.nu_lo) <= np.cumsum(self.nu_hi) + DEFAULT_ATOL)
        )

    @cached_property
    def single_generator(self) -> bool:
        return self.gen_lo is self.gen_hi

    def contains_profile(self, u, atol: float = DEFAULT_ATOL, method: str = "flow") -> bool:
        """Membership of an aggregate profile in this set."""
        if self.is_empty:
            return False
        if not contains(self.gen_lo, u, atol=atol, method=method):
            return False
        if self.single_generator:
            return True
        return contains(self.gen_hi, u, atol=atol, method=method)

    def vertices_are_members(self, atol: float = DEFAULT_ATOL, method: str = "prefix") -> bool:
        """Whether every splice vertex belongs to the set itself.

        Single-population sets always pass. For worst-case intersection
        sets this is the operational test of the product-form identity: when
        it holds, the splice vertices are the set's true vertex description
        and vertex-based subset/nesting checks are exact rather than merely
        conservative.
        """
        if self.is_empty:
            return False
        return all(
            self.contains_profile(vertex, atol=atol, method=method)
            for vertex in sorted_vertices(self)
        )


def sorted_vertices(aset: AggregateFlexSet) -> np.ndarray:
    """The T+1 sorted vertex representatives, one per energy level.

    Row t is nu_hi on the first t coordinates and nu_lo on the rest; rows 0
    and T are the two generating vectors themselves. Every vertex of the set
    is a coordinate permutation of one of these rows.
    """
    horizon = aset.horizon
    rows = np.empty((horizon + 1, horizon))
    for t in range(horizon + 1):
        rows[t, :t] = aset.nu_hi[:t]
        rows[t, t:] = aset.nu_lo[t:]
    return rows


# ---------------------------------------------------------------------------
# membership: shared validation


def _check_profile(pop: Population, u, atol: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (pop.horizon,):
        raise DimensionMismatch(f"profile length {u.shape} != horizon {pop.horizon}")
    if np.any(u < -atol):
        raise NegativeEntry("aggregate profile has a negative entry")
    return np.clip(u, 0.0, None)


# ---------------------------------------------------------------------------
# membership: transportation / circulation route


def _membership_network(pop: Population, u: np.ndarray):
    """Nodes: 0 source, 1..N EVs, N+1..N+T steps, N+T+1 sink."""
    n, horizon, m = pop.n, pop.horizon, pop.power
    src, snk = 0, n + horizon + 1
    arcs = []
    for i in range(n):
        arcs.append((src, 1 + i, float(pop.e_lo[i]), float(pop.e_hi[i])))
    for i in range(n):
        for t in range(horizon):
            arcs.append((1 + i, 1 + n + t, 0.0, m))
    for t in range(horizon):
        arcs.append((1 + n + t, snk, float(u[t]), float(u[t])))
    big = float(pop.e_hi.sum() + u.sum() + 1.0)
    arcs.append((snk, src, 0.0, big))
    return n + horizon + 2, arcs


def _contains_flow(pop: Population, u: np.ndarray, atol: float):
    num_nodes, arcs = _membership_network(pop, u)
    feasible, flows, deficits = feasible_circulation(num_nodes, arcs, atol=atol)
    return feasible, flows, deficits


# ---------------------------------------------------------------------------
# membership: prefix / water-filling route


def waterfill_totals(e_lo: np.ndarray, e_hi: np.ndarray, target: float) -> np.ndarray:
    """Least-majorized per-EV totals summing to target within the boxes.

    Clamps a common water level into every interval; the level is solved
    exactly on the sorted breakpoint grid.
    """
    lo_tot = float(e_lo.sum())
    hi_tot = float(e_hi.sum())
    target = min(max(target, lo_tot), hi_tot)
    bps = np.sort(np.concatenate([e_lo, e_hi]))
    phi = np.clip(bps[:, None], e_lo[None, :], e_hi[None, :]).sum(axis=1)
    j = int(np.searchsorted(phi, target))
    if j == 0:
        level = bps[0]
    else:
        j = min(j, len(bps) - 1)
        rise = phi[j] - phi[j - 1]
        if rise <= 0:
            level = bps[j - 1]
        else:
            level = bps[j - 1] + (target - phi[j - 1]) * (bps[j] - bps[j - 1]) / rise
    return np.clip(level, e_lo, e_hi)


def _cut_supplies(s: np.ndarray, m: float, horizon: int) -> np.ndarray:
    """sum_i min(s_i, m*k) for k = 1..T."""
    k = np.arange(1, horizon + 1, dtype=float)
    overflow = np.maximum(s[None, :] - m * k[:, None], 0.0).sum(axis=1)
    return s.sum() - overflow


def _contains_prefix(pop: Population, u: np.ndarray, atol: float) -> bool:
    total = float(u.sum())
    if total < pop.e_lo.sum() - atol or total > pop.e_hi.sum() + atol:
        return False
    prefix = np.cumsum(-np.sort(-u))
    s = waterfill_totals(pop.e_lo, pop.e_hi, total)
    return bool(np.all(_cut_supplies(s, pop.power, pop.horizon) >= prefix - atol))


def batch_contains(
    e_lo: np.ndarray,
    e_hi: np.ndarray,
    profiles: np.ndarray,
    m: float,
    atol: float = DEFAULT_ATOL,
) -> np.ndarray:
    """Prefix-method membership of V profiles against R populations.

    e_lo, e_hi: (R, N) energy bounds; profiles: (V, T) non-negative rows.
    Returns a boolean (R, V) matrix. Identical decisions to contains() with
    method="prefix".
    """
    e_lo = np.asarray(e_lo, dtype=float)
    e_hi = np.asarray(e_hi, dtype=float)
    profiles = np.asarray(profiles, dtype=float)
    r_count, n = e_lo.shape
    v_count, horizon = profiles.shape
    totals = profiles.sum(axis=1)
    prefix = np.cumsum(np.sort(profiles, axis=1)[:, ::-1], axis=1)

    lo_tot = e_lo.sum(axis=1)
    hi_tot = e_hi.sum(axis=1)
    ok_total = (totals[None, :] >= lo_tot[:, None] - atol) & (
        totals[None, :] <= hi_tot[:, None] + atol
    )

    levels = np.empty((r_count, v_count))
    for r in range(r_count):
        bps = np.sort(np.concatenate([e_lo[r], e_hi[r]]))
        phi = np.clip(bps[:, None], e_lo[r][None, :], e_hi[r][None, :]).sum(axis=1)
        tgt = np.minimum(np.maximum(totals, lo_tot[r]), hi_tot[r])
        j = np.clip(np.searchsorted(phi, tgt), 1, len(bps) - 1)
        rise = phi[j] - phi[j - 1]
        run = bps[j] - bps[j - 1]
        frac = np.where(rise > 0, (tgt - phi[j - 1]) / np.where(rise > 0, rise, 1.0), 0.0)
        levels[r] = np.where(tgt <= phi[0], bps[0], bps[j - 1] + np.clip(frac, 0.0, 1.0) * run)

    s = np.clip(levels[:, :, None], e_lo[:, None, :], e_hi[:, None, :])
    e_clamped = s.sum(axis=2)
    ok = ok_total.copy()
    for k in range(1, horizon + 1):
        supply = e_clamped - np.maximum(s - m * k, 0.0).sum(axis=2)
        ok &= supply >= prefix[None, :, k - 1] - atol
    return ok


# ---------------------------------------------------------------------------
# public membership / decomposition


def contains(
    pop: Population, u, atol: float = DEFAULT_ATOL, method: str = "flow"
) -> bool:
    """True iff the population can jointly track the aggregate profile u.

    method="flow" runs the transportation/circulation feasibility
    computation; method="prefix" the equivalent water-filling criterion.
    """
    u = _check_profile(pop, u, atol)
    if method == "flow":
        feasible, _, _ = _contains_flow(pop, u, atol)
        return feasible
    if method == "prefix":
        return _contains_prefix(pop, u, atol)
    raise ValueError(f"unknown membership method {method!r}")


@dataclass(frozen=True)
class Decomposition:
    """Per-EV profiles summing to a target aggregate profile."""

    per_ev: np.ndarray  # (N, T)


@dataclass(frozen=True)
class Infeasible:
    """Witness of infeasibility: steps whose demand exceeds reachable supply."""

    deficient_steps: tuple[int, ...]  # 1-indexed
    shortfall: float


def decompose(pop: Population, u, atol: float = DEFAULT_ATOL):
    """Split an aggregate profile into per-EV profiles, or explain failure.

    Returns a Decomposition extracted from the feasible transportation flow,
    or an Infeasible record listing the undersupplied timesteps.
    """
    u = _check_profile(pop, u, atol)
    num_nodes, arcs = _membership_network(pop, u)
    feasible, flows, deficits = feasible_circulation(num_nodes, arcs, atol=atol)
    n, horizon = pop.n, pop.horizon
    if not feasible:
        steps = tuple(
            t + 1
            for t in range(horizon)
            if deficits.get(1 + n + t, 0.0) > atol
        )
        shortfall = float(sum(d for d in deficits.values() if d > atol))
        return Infeasible(steps, shortfall)
    per_ev = np.array(flows[n : n + n * horizon]).reshape(n, horizon)
    return Decomposition(per_ev)


# ---------------------------------------------------------------------------
# subset tests


def _check_compatible(aset: AggregateFlexSet, pop: Population):
    if aset.horizon != pop.horizon:
        raise DimensionMismatch(
            f"horizon mismatch: set {aset.horizon} vs population {pop.horizon}"
        )
    if aset.power != pop.power:
        raise DimensionMismatch(
            f"power mismatch: set {aset.power} vs population {pop.power}"
        )


def find_subset_violation(
    aset: AggregateFlexSet, pop: Population, atol: float = DEFAULT_ATOL, method: str = "flow"
):
    """First sorted vertex of aset outside the population's set, or None.

    Checking the T+1 sorted representatives is exact when aset's
    parameterisation is consistent (always true for single-population
    sets): the population's aggregate set is convex and permutation
    symmetric, and every vertex of aset is a coordinate permutation of a
    sorted representative, so aset is contained iff each representative is
    a member. For inconsistent worst-case intersections the representatives
    describe an outer family, making the test conservative (a pass still
    certifies containment of the true set).
    """
    _check_compatible(aset, pop)
    if aset.is_empty:
        return None
    for vertex in sorted_vertices(aset):
        if not contains(pop, vertex, atol=atol, method=method):
            return vertex
    return None


def is_subset_exact(
    aset: AggregateFlexSet, pop: Population, atol: float = DEFAULT_ATOL, method: str = "flow"
) -> bool:
    """Exact test of aset being contained in the population's aggregate set."""
    return find_subset_violation(aset, pop, atol=atol, method=method) is None


def is_subset_fast(
    aset: AggregateFlexSet,
    pop: Population,
    atol: float = DEFAULT_ATOL,
    lo_reading: str = "within",
    hi_reading: str = "within",
) -> bool:
    """Experimental screen for subset-ness from bound-vector comparisons only.

    Conjunction of the total-energy conditions with prefix-dominance
    readings of the bound-vector comparisons; the reading direction per side
    is configurable because the formal direction is ambiguous ("within"
    compares prefixes of aset's vector against the population's, "dominates"
    the reverse). False negatives are possible; is_subset_exact is
    authoritative.
    """
    _check_compatible(aset, pop)
    if aset.is_empty:
        return True
    pop_lo, pop_hi = nu_bounds(pop)
    if aset.nu_lo.sum() < pop_lo.sum() - atol:
        return False
    if aset.nu_hi.sum() > pop_hi.sum() + atol:
        return False
    a_lo = np.cumsum(aset.nu_lo)
    a_hi = np.cumsum(aset.nu_hi)
    p_lo = np.cumsum(pop_lo)
    p_hi = np.cumsum(pop_hi)
    checks = {
        ("within", "lo"): np.all(a_lo <= p_lo + atol),
        ("dominates", "lo"): np.all(a_lo >= p_lo - atol),
        ("within", "hi"): np.all(a_hi <= p_hi + atol),
        ("dominates", "hi"): np.all(a_hi >= p_hi - atol),
    }
    try:
        return bool(checks[(lo_reading, "lo")] and checks[(hi_reading, "hi")])
    except KeyError:
        raise ValueError(f"unknown reading: {lo_reading!r}/{hi_reading!r}") from None


def is_nested(
    inner: AggregateFlexSet,
    outer: AggregateFlexSet,
    atol: float = DEFAULT_ATOL,
    method: str = "flow",
) -> bool:
    """True iff inner's vertex family lies inside outer.

    Exact containment test when inner's parameterisation is consistent;
    otherwise the vertex family overstates inner, so False may be returned
    for sets that are in fact nested (never the other way around).
    """
    if inner.horizon != outer.horizon or inner.power != outer.power:
        raise DimensionMismatch("sets must share horizon and power")
    if inner.is_empty:
        return True
    return all(
        outer.contains_profile(vertex, atol=atol, method=method)
        for vertex in sorted_vertices(inner)
    )
