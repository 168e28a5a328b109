import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evflex import (
    ChargingRequirement,
    DimensionMismatch,
    EnergyOutOfRange,
    Population,
    TimeGrid,
    fastest_profile,
    is_individually_feasible,
)


def test_fastest_profile_examples():
    np.testing.assert_allclose(fastest_profile(2.5, 1, 4), [1, 1, 0.5, 0])
    np.testing.assert_allclose(fastest_profile(0, 1, 4), [0, 0, 0, 0])
    np.testing.assert_allclose(fastest_profile(4, 1, 4), [1, 1, 1, 1])
    with pytest.raises(EnergyOutOfRange):
        fastest_profile(4.5, 1, 4)
    with pytest.raises(EnergyOutOfRange):
        fastest_profile(-0.1, 1, 4)


def test_fastest_profile_partial_slot_only_when_positive():
    # integer multiples of the power rating leave no partial slot
    np.testing.assert_allclose(fastest_profile(2.0, 1, 4), [1, 1, 0, 0])
    prof = fastest_profile(3.0, 1.5, 4)
    np.testing.assert_allclose(prof, [1.5, 1.5, 0, 0])


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 4), st.integers(1, 8))
def test_fastest_profile_properties(frac, steps):
    power = 1.0
    energy = frac / 4 * power * steps
    prof = fastest_profile(energy, power, steps)
    assert prof.shape == (steps,)
    assert abs(prof.sum() - energy) < 1e-12
    assert np.all(np.diff(prof) <= 1e-12)
    assert np.all(prof >= 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(1, 8))
def test_fastest_profile_prefix_monotone_in_energy(a, b, steps):
    lo, hi = sorted([a * steps, b * steps])
    p_lo = np.cumsum(fastest_profile(lo, 1.0, steps))
    p_hi = np.cumsum(fastest_profile(hi, 1.0, steps))
    assert np.all(p_lo <= p_hi + 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_fastest_profile_individually_feasible(x, y, z):
    steps = 5
    e_lo, e_hi = sorted([x * steps, y * steps])
    energy = e_lo + z * (e_hi - e_lo)
    req = ChargingRequirement(e_lo, e_hi, 1, steps, 1.0)
    assert is_individually_feasible(fastest_profile(energy, 1.0, steps), req)


def test_individual_feasibility_examples():
    req = ChargingRequirement(1, 2, 1, 4, 1)
    assert is_individually_feasible(np.full(4, 0.25), req)
    assert not is_individually_feasible(np.array([1, 1, 1, 0.0]), req)
    assert not is_individually_feasible(np.array([1.2, 0, 0, 0.0]), req)
    with pytest.raises(DimensionMismatch):
        is_individually_feasible(np.zeros(3), req)


def test_profile_must_vanish_outside_window():
    req = ChargingRequirement(0.5, 1.0, 2, 4, 1.0)
    assert not is_individually_feasible(np.array([0.3, 0.4, 0.3, 0.0]), req)
    assert is_individually_feasible(np.array([0, 0.4, 0.3, 0.3]), req)


def test_time_grid_invariants():
    assert TimeGrid(24).steps == 24
    with pytest.raises(ValueError):
        TimeGrid(0)
    with pytest.raises(ValueError):
        TimeGrid(4, delta=0.5)


def test_requirement_invariants():
    with pytest.raises(ValueError):
        ChargingRequirement(2, 1, 1, 4, 1)  # e_lo > e_hi
    with pytest.raises(ValueError):
        ChargingRequirement(0, 5, 1, 4, 1)  # e_hi > m * window
    with pytest.raises(ValueError):
        ChargingRequirement(-0.5, 1, 1, 4, 1)


def test_population_rejects_heterogeneous():
    good = Population.from_energy_pairs([(0.5, 1.0), (0.2, 2.0)], 4, 1.0)
    assert good.n == 2 and good.horizon == 4 and good.power == 1.0
    with pytest.raises(ValueError):
        Population(
            (
                ChargingRequirement(0.5, 1, 1, 4, 1.0),
                ChargingRequirement(0.5, 1, 1, 5, 1.0),
            )
        )
    with pytest.raises(ValueError):
        Population(
            (
                ChargingRequirement(0.5, 1, 1, 4, 1.0),
                ChargingRequirement(0.5, 1, 1, 4, 2.0),
            )
        )
    with pytest.raises(ValueError):
        Population(
            (ChargingRequirement(0.5, 1, 2, 4, 1.0),)
        )
    with pytest.raises(ValueError):
        Population(())
