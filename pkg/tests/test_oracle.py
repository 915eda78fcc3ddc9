"""Brute-force reference values, frozen before the integer models were trusted."""

import random
from fractions import Fraction

import pytest

from tss3dkp.model import FirstStageDecision
from tss3dkp.oracle import (
    OracleLimits,
    OracleSizeError,
    brute_force_full,
    brute_force_second_stage,
    full_enumeration_size,
    random_tiny_instance,
)

from conftest import make_instance

# hand-derived: one printer plus two units of material beats any item packing
EXAMPLE_OPTIMUM = Fraction(26, 25)
EXAMPLE_DECISION = FirstStageDecision((0, 0), 1, 2)


def test_example_packing_optimum(packing):
    value, decision = brute_force_full(packing)
    assert value == EXAMPLE_OPTIMUM
    assert decision == EXAMPLE_DECISION


def test_example_packing_without_printers(packing):
    value, _ = brute_force_full(packing, max_printers=0)
    assert value == Fraction(7, 10)


@pytest.mark.parametrize("decision, expected", [
    (FirstStageDecision((1, 0), 0, 0), Fraction(7, 10)),
    (FirstStageDecision((0, 1), 0, 0), Fraction(3, 5)),
    (FirstStageDecision((0, 0), 1, 2), Fraction(26, 25)),
    (FirstStageDecision((0, 0), 0, 0), Fraction(0)),
])
def test_example_packing_strategies(packing, decision, expected):
    total = sum(sc.probability * brute_force_second_stage(packing, decision, s)[0]
                for s, sc in enumerate(packing.scenarios))
    assert total == expected


def test_second_stage_returns_feasible_plan(packing):
    decision = FirstStageDecision((0, 0), 1, 2)
    value, plan = brute_force_second_stage(packing, decision, 0)
    assert value == Fraction(4, 5)  # item 1 printed once, alpha * 1
    assert plan.printed_totals() == (1, 0)


def test_single_item_no_printer():
    inst = make_instance([(2, 2, 3)], W=4, V=4, scenarios=((Fraction(1, 2), (1,)), (Fraction(1, 2), (2,))))
    value, decision = brute_force_full(inst)
    assert value == Fraction(9, 2)
    assert decision.item_counts == (2,)


def test_ties_resolve_to_smallest_packing():
    inst = make_instance([(1, 1, 0)], W=3, V=3)
    value, decision = brute_force_full(inst)
    assert value == 0
    assert decision == FirstStageDecision((0,), 0, 0)


def test_size_limit_raises(packing):
    with pytest.raises(OracleSizeError):
        brute_force_full(packing, OracleLimits(max_states=1))


def test_random_tiny_instances_respect_size():
    rng = random.Random(5)
    for _ in range(20):
        inst = random_tiny_instance(rng, max_states=10**5)
        assert full_enumeration_size(inst) <= 10**5
