from fractions import Fraction

import pytest
from hypothesis import given, settings

from tss3dkp.bounds import printer_upper_bound
from tss3dkp.deteq import (
    PRIORITY_PACKING,
    PRIORITY_PRINTERS,
    big_m,
    build_det_equiv,
    build_second_stage,
    evaluate_first_stage,
    extract_solution,
    second_stage_value,
)
from tss3dkp.mip import MipParams, MipStatus, solve_mip
from tss3dkp.model import FirstStageDecision, expected_reward
from tss3dkp.oracle import brute_force_full, brute_force_second_stage

from conftest import make_instance, tiny_instances

EXACT = MipParams(Fraction(0))


def solve(instance, Z=None, **kw):
    Z = printer_upper_bound(instance).Z if Z is None else Z
    problem, vmap = build_det_equiv(instance, Z, **kw)
    return solve_mip(problem, EXACT), vmap


def test_example_packing(packing):
    res, vmap = solve(packing)
    assert res.objective == Fraction(26, 25)
    decision, plans = extract_solution(res, vmap)
    assert decision == FirstStageDecision((0, 0), 1, 2)
    assert expected_reward(packing, decision, plans) == Fraction(26, 25)


def test_example_packing_without_printers(packing):
    res, vmap = solve(packing, Z=0, allow_printers=False)
    assert res.objective == Fraction(7, 10)


def test_strategy_evaluation(packing):
    assert evaluate_first_stage(packing, FirstStageDecision((0, 1), 0, 0)) == Fraction(3, 5)
    assert evaluate_first_stage(packing, FirstStageDecision((1, 0), 0, 0)) == Fraction(7, 10)


def test_model_shape(packing):
    problem, vmap = build_det_equiv(packing, 2)
    names = vmap.names
    assert names[vmap.material] == "a_b"
    assert [names[y] for y in vmap.printers] == ["y_1", "y_2"]
    assert "sym_2" in problem.lp.row_names
    assert problem.priority[vmap.printers[0]] == PRIORITY_PRINTERS
    assert problem.priority[vmap.items[0]] == PRIORITY_PACKING
    assert problem.priority[vmap.matched[0][0]] == 0
    plain, _ = build_det_equiv(packing, 2, symmetry=False)
    assert "sym_2" not in plain.lp.row_names


def test_no_printers_fixes_bounds(packing):
    problem, vmap = build_det_equiv(packing, 2, allow_printers=False)
    assert problem.lp.upper[vmap.material] == 0
    assert all(problem.lp.upper[y] == 0 for y in vmap.printers)


def test_invalid_z(packing):
    with pytest.raises(ValueError):
        build_det_equiv(packing, -1)


def test_big_m(packing):
    assert big_m(packing) == 4


def test_second_stage(packing):
    d = FirstStageDecision((0, 0), 1, 2)
    value, plan = second_stage_value(packing, d, 1)
    assert value == Fraction(8, 5)
    assert plan.printed_totals() == (0, 1)
    with pytest.raises(ValueError):
        build_second_stage(packing, FirstStageDecision((1, 1), 0, 0), 0)


def test_zero_time_item_needs_a_printer():
    # printing is free in time but must still happen on a packed printer
    inst = make_instance([(3, 3, 5, 1, 0)], printer=(2, 2, 0), W=5, V=5, alpha=Fraction(1, 2),
                         scenarios=((1, (3,)),))
    res, vmap = solve(inst)
    decision, plans = extract_solution(res, vmap)
    assert res.objective == Fraction(15, 2)
    assert decision == FirstStageDecision((0,), 1, 3)
    assert plans[0].printed_totals() == (3,)
    assert res.objective == brute_force_full(inst)[0]


@settings(max_examples=60, deadline=None)
@given(tiny_instances())
def test_matches_oracle(inst):
    res, vmap = solve(inst)
    assert res.status == MipStatus.OPTIMAL_WITHIN_GAP
    assert res.objective == brute_force_full(inst)[0]
    decision, plans = extract_solution(res, vmap)
    assert expected_reward(inst, decision, plans) == res.objective


@settings(max_examples=40, deadline=None)
@given(tiny_instances())
def test_second_stage_matches_oracle(inst):
    _, decision = brute_force_full(inst)
    for s in range(inst.n_scenarios):
        assert second_stage_value(inst, decision, s)[0] == brute_force_second_stage(inst, decision, s)[0]
