"""Wasserstein ambiguity machinery and robust-set assembly.

Distributions over charging requirements are discrete, with atoms on the
(e_lo, e_hi) plane; the ground metric is L1 on that plane with window and
power held fixed. Worst-case populations are built in two steps: project
the distribution onto an equal-weight N-point support, then spend the
remaining transport budget pushing that support toward the relevant
boundary of the energy domain. Budget accounting is conservative: every
push is charged its true per-atom transport cost (including the cost of
keeping e_lo <= e_hi valid), and the final distances are recomputed exactly
and checked against the requested radius.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .aggregate import AggregateFlexSet
from .core import DEFAULT_ATOL, Population, TimeGrid
from .errors import (
    BudgetInfeasible,
    DomainError,
    NegativeBudget,
    RangeWarning,
)
from .transport import min_cost_transport

_TINY = 1e-15


@dataclass(frozen=True)
class DiscreteDistribution:
    """Weighted atoms over (e_lo, e_hi) pairs; atoms kept lex-sorted."""

    atoms: np.ndarray  # (n, 2)
    weights: np.ndarray  # (n,)
    energy_cap: float  # domain is [0, energy_cap] per coordinate

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if atoms.ndim != 2 or atoms.shape[1] != 2 or atoms.shape[0] == 0:
            raise ValueError("atoms must be a non-empty (n, 2) array")
        if weights.shape != (atoms.shape[0],):
            raise ValueError("weights must match the number of atoms")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {weights.sum()!r}, expected 1")
        if np.any(atoms[:, 0] < -1e-12) or np.any(atoms[:, 0] > atoms[:, 1] + 1e-12):
            raise ValueError("atoms must satisfy 0 <= e_lo <= e_hi")
        if np.any(atoms[:, 1] > self.energy_cap + 1e-12):
            raise ValueError(f"atoms must satisfy e_hi <= {self.energy_cap}")
        order = np.lexsort((atoms[:, 1], atoms[:, 0]))
        atoms = atoms[order]
        weights = weights[order]
        atoms.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def point_mass(cls, e_lo: float, e_hi: float, energy_cap: float) -> "DiscreteDistribution":
        return cls(np.array([[e_lo, e_hi]]), np.array([1.0]), energy_cap)

    @classmethod
    def equal_weights(cls, pairs, energy_cap: float) -> "DiscreteDistribution":
        pairs = np.asarray(pairs, dtype=float)
        n = pairs.shape[0]
        return cls(pairs, np.full(n, 1.0 / n), energy_cap)

    @property
    def n_atoms(self) -> int:
        return int(self.atoms.shape[0])


@dataclass(frozen=True)
class ConcentrationConstants:
    """Positive constants of the finite-sample tail bound."""

    c1: float
    c2: float

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("concentration constants must be positive")


# ---------------------------------------------------------------------------
# Wasserstein-1 distance


def _is_chain(atoms: np.ndarray) -> bool:
    """Support is totally ordered componentwise (after the lex sort)."""
    return bool(
        np.all(np.diff(atoms[:, 0]) >= -_TINY) and np.all(np.diff(atoms[:, 1]) >= -_TINY)
    )


def _quantile_coupling_cost(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Sorted coupling; optimal when both supports are comonotone chains."""
    i = j = 0
    rem_p = p.weights[0]
    rem_q = q.weights[0]
    total = 0.0
    while True:
        d = min(rem_p, rem_q)
        total += d * (
            abs(p.atoms[i, 0] - q.atoms[j, 0]) + abs(p.atoms[i, 1] - q.atoms[j, 1])
        )
        rem_p -= d
        rem_q -= d
        if rem_p <= _TINY:
            i += 1
            if i >= p.n_atoms:
                break
            rem_p = p.weights[i]
        if rem_q <= _TINY:
            j += 1
            if j >= q.n_atoms:
                break
            rem_q = q.weights[j]
    return total


def wasserstein1(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Exact W1 between two discrete distributions under the L1 ground metric."""
    if abs(p.energy_cap - q.energy_cap) > 1e-9:
        raise DomainError("distributions live on different energy domains")
    if _is_chain(p.atoms) and _is_chain(q.atoms):
        return float(_quantile_coupling_cost(p, q))
    cost = np.abs(p.atoms[:, None, 0] - q.atoms[None, :, 0]) + np.abs(
        p.atoms[:, None, 1] - q.atoms[None, :, 1]
    )
    value, _ = min_cost_transport(p.weights, q.weights, cost)
    return value


# ---------------------------------------------------------------------------
# N-point projection


def _weighted_lower_median(values: np.ndarray, weights: np.ndarray) -> float:
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    half = cum[-1] / 2.0
    idx = int(np.searchsorted(cum, half - 1e-12))
    return float(values[order][min(idx, len(values) - 1)])


def project_to_n_points(
    p: DiscreteDistribution, n: int
) -> tuple[np.ndarray, float]:
    """Equal-weight N-point support plus its exact transport cost.

    Construction: walk the lex-sorted atoms, cutting the cumulative mass
    into N consecutive chunks of 1/N (atoms straddling a boundary are
    split), and place each output atom at the per-coordinate weighted lower
    median of its chunk. The construction is a heuristic; the returned cost
    is the exact distance to the result, which is all downstream guarantees
    rely on.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    chunks: list[list[tuple[float, float, float]]] = [[] for _ in range(n)]
    k = 0
    cum = 0.0
    for (lo, hi), w in zip(p.atoms, p.weights):
        rem = float(w)
        while rem > _TINY:
            boundary = (k + 1) / n
            room = boundary - cum if k < n - 1 else float("inf")
            take = min(rem, room)
            if take > _TINY:
                chunks[k].append((float(lo), float(hi), take))
                cum += take
                rem -= take
            if k < n - 1 and boundary - cum <= _TINY:
                k += 1
    support = np.empty((n, 2))
    for k, chunk in enumerate(chunks):
        vals = np.array(chunk)
        support[k, 0] = _weighted_lower_median(vals[:, 0], vals[:, 2])
        support[k, 1] = _weighted_lower_median(vals[:, 1], vals[:, 2])
    projected = DiscreteDistribution.equal_weights(support, p.energy_cap)
    cost = wasserstein1(p, projected)
    # the projection is canonical up to atom order; report it sorted
    return projected.atoms.copy(), cost


# ---------------------------------------------------------------------------
# boundary pushes

# Sentinels for the critical index (1-based): push_lower reports N+1 when
# nothing moved and 0 when every atom reached the ceiling; push_upper
# mirrors this (0 nothing moved, N+1 everything at the floor), keeping the
# piecewise case structure meaningful on both sides.


def _validate_push_args(values, budget, n):
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a non-empty 1-D array")
    if np.any(np.diff(values) < -1e-12):
        raise ValueError("values must be sorted non-decreasing")
    if budget < 0:
        raise NegativeBudget(f"budget must be non-negative, got {budget}")
    if n is None:
        n = values.size
    if n != values.size:
        raise ValueError("n must equal the number of values")
    return values, int(n)


def push_lower(values, budget: float, ceiling: float, n: int | None = None):
    """Push point masses toward the ceiling, largest first, until the budget
    is spent.

    Moving atom i to the ceiling costs (ceiling - v_i)/n; the first atom
    that cannot move fully moves by kappa = remaining_budget * n and is
    recorded as the critical index (1-based). Returns (pushed, i_c, kappa).
    """
    values, n = _validate_push_args(values, budget, n)
    if np.any(values > ceiling + 1e-12):
        raise ValueError("values must not exceed the ceiling")
    out = values.copy()
    if budget <= _TINY:
        return out, n + 1, 0.0
    b = float(budget)
    for idx in range(n - 1, -1, -1):
        cost = (ceiling - out[idx]) / n
        if cost <= b + _TINY:
            b = max(b - cost, 0.0)
            out[idx] = ceiling
        else:
            kappa = b * n
            out[idx] += kappa
            return out, idx + 1, kappa
    return out, 0, 0.0


def push_upper(values, budget: float, n: int | None = None):
    """Mirror of push_lower: masses move toward zero, smallest first."""
    values, n = _validate_push_args(values, budget, n)
    if np.any(values < -1e-12):
        raise ValueError("values must be non-negative")
    out = values.copy()
    if budget <= _TINY:
        return out, 0, 0.0
    b = float(budget)
    for idx in range(n):
        cost = out[idx] / n
        if cost <= b + _TINY:
            b = max(b - cost, 0.0)
            out[idx] = 0.0
        else:
            kappa = b * n
            out[idx] -= kappa
            return out, idx + 1, kappa
    return out, n + 1, 0.0


def _push_lower_repair(lo, hi, budget, ceiling, n):
    """Budget-true lower push: raising e_lo past its partner e_hi also pays
    for lifting e_hi, so the plan's full cost never exceeds the budget."""
    lo = lo.copy()
    hi = hi.copy()
    spent = 0.0
    repaired = 0
    b = float(budget)
    if b <= _TINY:
        return lo, hi, n + 1, 0.0, 0.0, 0
    for idx in range(n - 1, -1, -1):
        full = ((ceiling - lo[idx]) + (ceiling - hi[idx])) / n
        if full <= b + _TINY:
            b = max(b - full, 0.0)
            spent += full
            if ceiling > hi[idx] + _TINY:
                repaired += 1
            lo[idx] = ceiling
            hi[idx] = ceiling
            continue
        single = (hi[idx] - lo[idx]) / n
        if b * n <= hi[idx] - lo[idx]:
            y = lo[idx] + b * n
        else:
            y = hi[idx] + (b - single) * n / 2.0
            repaired += 1
        kappa = y - lo[idx]
        spent += b
        lo[idx] = y
        hi[idx] = max(hi[idx], y)
        return lo, hi, idx + 1, kappa, spent, repaired
    return lo, hi, 0, 0.0, spent, repaired


def _push_upper_repair(hi, lo, budget, n):
    """Mirror of _push_lower_repair toward the floor at zero."""
    lo = lo.copy()
    hi = hi.copy()
    spent = 0.0
    repaired = 0
    b = float(budget)
    if b <= _TINY:
        return hi, lo, 0, 0.0, 0.0, 0
    for idx in range(n):
        full = (hi[idx] + lo[idx]) / n
        if full <= b + _TINY:
            b = max(b - full, 0.0)
            spent += full
            if lo[idx] > _TINY:
                repaired += 1
            hi[idx] = 0.0
            lo[idx] = 0.0
            continue
        single = (hi[idx] - lo[idx]) / n
        if b * n <= hi[idx] - lo[idx]:
            y = hi[idx] - b * n
        else:
            y = lo[idx] - (b - single) * n / 2.0
            repaired += 1
        kappa = hi[idx] - y
        spent += b
        hi[idx] = y
        lo[idx] = min(lo[idx], y)
        return hi, lo, idx + 1, kappa, spent, repaired
    return hi, lo, n + 1, 0.0, spent, repaired


# ---------------------------------------------------------------------------
# tail bound


def beta_from_epsilon(eps: float, n: int, constants: ConcentrationConstants) -> float:
    """Confidence complement for a ball radius: c1 * exp(-c2 * n * eps^2)."""
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if eps > 1:
        warnings.warn(
            f"eps={eps} is outside the (0, 1] validity range of the tail bound",
            RangeWarning,
            stacklevel=2,
        )
    return constants.c1 * math.exp(-constants.c2 * n * eps * eps)


def epsilon_from_beta(beta: float, n: int, constants: ConcentrationConstants) -> float:
    """Inverse of beta_from_epsilon."""
    if beta <= 0 or beta >= constants.c1:
        raise DomainError(f"beta must lie in (0, c1), got {beta}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    eps = math.sqrt(math.log(constants.c1 / beta) / (constants.c2 * n))
    if eps > 1:
        warnings.warn(
            f"implied eps={eps} is outside the (0, 1] validity range of the tail bound",
            RangeWarning,
            stacklevel=2,
        )
    return eps


# ---------------------------------------------------------------------------
# robust set assembly


@dataclass(frozen=True)
class RobustSetResult:
    """Robust aggregate flexibility set plus plan bookkeeping.

    Cost-type fields (epsilon, projection_cost, budgets, w1 distances) are
    in the caller's epsilon units (normalized when normalize=True); energies
    (populations, kappa) are always in raw units.
    """

    flex: AggregateFlexSet
    epsilon: float
    beta: float | None
    projection_cost: float
    projected_support: np.ndarray  # (N, 2)
    budget_lo: float  # spent pushing the lower-bound energies up
    budget_hi: float  # spent pushing the upper-bound energies down
    i_c_lo: int
    kappa_lo: float
    i_c_hi: int
    kappa_hi: float
    w1_lo: float  # recomputed distance to the lower worst case
    w1_hi: float  # recomputed distance to the upper worst case
    repaired_lo: int  # atoms whose e_hi had to be lifted to keep e_lo <= e_hi
    repaired_hi: int
    normalization: float
    empty: bool


def robust_set(
    p: DiscreteDistribution,
    n: int,
    eps: float,
    grid: TimeGrid,
    power: float = 1.0,
    constants: ConcentrationConstants | None = None,
    normalize: bool = False,
    atol: float = DEFAULT_ATOL,
) -> RobustSetResult:
    """Distributionally robust aggregate flexibility set for N sampled jobs.

    Projects the distribution onto N equal-weight atoms, spends the
    remaining radius pushing lower-bound energies toward the energy cap and
    upper-bound energies toward zero, verifies both resulting empirical
    distributions are within eps of the input, and assembles the set
    parameterised by the two pushed populations.
    """
    if eps < 0:
        raise DomainError(f"eps must be non-negative, got {eps}")
    cap = power * grid.steps
    if abs(p.energy_cap - cap) > 1e-9:
        raise DomainError(
            f"distribution domain cap {p.energy_cap} != power*steps = {cap}"
        )
    factor = cap if normalize else 1.0
    eps_raw = eps * factor

    support, proj_cost = project_to_n_points(p, n)
    residual = eps_raw - proj_cost
    if residual < -1e-12:
        raise BudgetInfeasible(float(eps), float(proj_cost / factor))
    residual = max(residual, 0.0)

    # lower worst case: support is lex-sorted, so e_lo is already ascending
    l_lo, l_hi, i_c_lo, kappa_lo, spent_lo, repaired_lo = _push_lower_repair(
        support[:, 0], support[:, 1], residual, cap, n
    )
    # upper worst case: order by the e_hi coordinate for the mirror push
    order = np.argsort(support[:, 1], kind="stable")
    u_hi, u_lo, i_c_hi, kappa_hi, spent_hi, repaired_hi = _push_upper_repair(
        support[order, 1], support[order, 0], residual, n
    )

    pop_lo = Population.from_energy_pairs(zip(l_lo, l_hi), grid.steps, power)
    pop_hi = Population.from_energy_pairs(zip(u_lo, u_hi), grid.steps, power)

    w1_lo = wasserstein1(p, DiscreteDistribution.equal_weights(np.column_stack([l_lo, l_hi]), cap))
    w1_hi = wasserstein1(p, DiscreteDistribution.equal_weights(np.column_stack([u_lo, u_hi]), cap))
    for name, value in (("lower", w1_lo), ("upper", w1_hi)):
        if value > eps_raw + atol:
            raise RuntimeError(
                f"budget accounting violated: {name} worst case at distance "
                f"{value} > eps {eps_raw}"
            )

    flex = AggregateFlexSet.from_bound_populations(pop_lo, pop_hi)
    beta = beta_from_epsilon(eps, n, constants) if constants is not None else None
    return RobustSetResult(
        flex=flex,
        epsilon=eps,
        beta=beta,
        projection_cost=proj_cost / factor,
        projected_support=support,
        budget_lo=spent_lo / factor,
        budget_hi=spent_hi / factor,
        i_c_lo=i_c_lo,
        kappa_lo=kappa_lo,
        i_c_hi=i_c_hi,
        kappa_hi=kappa_hi,
        w1_lo=w1_lo / factor,
        w1_hi=w1_hi / factor,
        repaired_lo=repaired_lo,
        repaired_hi=repaired_hi,
        normalization=factor,
        empty=flex.is_empty,
    )
