"""Sanity checks freezing the oracle outputs on the worked examples."""

from fractions import Fraction

from oracle_betti import betti_numbers, euler_characteristic
from oracle_ext_persistence import extended_persistence

F = Fraction

HOOD_SIMPLICES = [
    {1, 2}, {2, 3}, {3, 4}, {4, 1},
    {5, 1, 2}, {5, 2, 3}, {5, 3, 4}, {5, 4, 1},
]
HOOD_F = {1: 0, 2: 1, 3: 0, 4: 2, 5: 2}
HOOD_GPRIME = {1: 0, 2: 1, 3: 0, 4: 0, 5: 2}

CIRCLE_SIMPLICES = [{1, 2}, {2, 3}, {3, 4}, {4, 1}]
CIRCLE_HEIGHTS = {1: 0, 2: 1, 3: 2, 4: 1}


def test_betti_basics():
    assert betti_numbers(CIRCLE_SIMPLICES) == [1, 1]
    assert betti_numbers(HOOD_SIMPLICES) == [1, 0, 0]
    assert betti_numbers([{1}]) == [1]
    assert euler_characteristic(CIRCLE_SIMPLICES) == 0
    assert euler_characteristic(HOOD_SIMPLICES) == 1


def test_extended_persistence_circle():
    dgm = extended_persistence(CIRCLE_SIMPLICES, CIRCLE_HEIGHTS)
    assert dgm == sorted(
        [(0, "Ext", (F(0), F(2))), (1, "Ext", (F(2), F(0)))], key=repr
    )


def test_extended_persistence_hood():
    dgm = extended_persistence(HOOD_SIMPLICES, HOOD_F)
    assert dgm == sorted(
        [(0, "Ext", (F(0), F(2))), (0, "Ord", (F(0), F(1)))], key=repr
    )


def test_extended_persistence_flattened_hood():
    dgm = extended_persistence(HOOD_SIMPLICES, HOOD_GPRIME)
    assert dgm == sorted(
        [(0, "Ext", (F(0), F(2))), (1, "Ord", (F(1), F(2)))], key=repr
    )


def test_extended_persistence_point_and_edge():
    assert extended_persistence([{1}], {1: 0}) == [(0, "Ext", (F(0), F(0)))]
    dgm = extended_persistence([{1, 2}], {1: 0, 2: 3})
    assert dgm == [(0, "Ext", (F(0), F(3)))]
