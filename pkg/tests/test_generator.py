import hashlib
import json
import math
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import pytest

from tss3dkp.fileio import instance_to_text
from tss3dkp.generator import (
    GenConfig,
    SweepOverride,
    apply_sweep_override,
    generate,
    mean_print_time,
    round_half_away,
)
from tss3dkp.model import validate_instance

GOLDEN = json.loads((Path(__file__).parent / "golden" / "gen_traces.json").read_text())
CFG = GenConfig(**GOLDEN["config"])


@pytest.mark.parametrize("seed", sorted(GOLDEN["seeds"]))
def test_golden_traces(seed):
    inst, trace = generate(CFG, int(seed))
    want = GOLDEN["seeds"][seed]
    assert trace.to_dict() == want["trace"]
    assert [it.weight for it in inst.items] == want["weights"]
    assert list(inst.scenarios[0].demand) == want["demand_s1"]
    assert hashlib.sha256(instance_to_text(inst).encode()).hexdigest() == want["instance_sha256"]


def test_deterministic():
    assert generate(CFG, 7) == generate(CFG, 7)
    assert generate(CFG, 7)[0] != generate(CFG, 8)[0]


@pytest.mark.parametrize("seed", range(5))
def test_distribution_ranges(seed):
    cfg = GenConfig(12, 15, 6)
    inst, trace = generate(cfg, seed)
    assert validate_instance(inst) == []
    assert inst.material.weight == inst.material.volume == 1
    assert all(it.printable for it in inst.items)
    for i, it in enumerate(inst.items):
        assert 1 <= it.weight <= 1000 and 1 <= it.reward <= 1000
        assert 1 <= it.print_time <= 10
        assert 1 <= trace.demand_limits[i] <= 15
        assert all(sc.demand[i] <= trace.demand_limits[i] for sc in inst.scenarios)
    assert all(sc.probability == Fraction(1, 6) for sc in inst.scenarios)


def test_adding_items_keeps_earlier_draws():
    small, _ = generate(GenConfig(4, 10, 3), 2)
    big, _ = generate(GenConfig(6, 10, 3), 2)
    assert [it.weight for it in big.items[:4]] == [it.weight for it in small.items]
    for a, b in zip(small.scenarios, big.scenarios):
        assert b.demand[:4] == a.demand


def test_round_half_away():
    assert [round_half_away(x) for x in (Fraction(5, 2), Fraction(-5, 2), Fraction(7, 3), 0)] == [3, -3, 2, 0]


def test_override_alpha():
    inst, _ = generate(CFG, 0)
    out = apply_sweep_override(CFG, inst, SweepOverride("alpha", 1))
    assert out == replace(inst, alpha=Fraction(1))


def test_override_printer_size():
    inst, _ = generate(CFG, 0)
    inst = replace(inst, capacity_weight=100, capacity_volume=100)
    out = apply_sweep_override(CFG, inst, SweepOverride("printer_size_k", 2))
    assert out.printer.weight == 50 and out.printer.volume == 50
    out = apply_sweep_override(CFG, inst, SweepOverride("printer_size_k", math.inf))
    assert out.printer.weight == out.printer.volume == 0


def test_override_material_efficiency():
    inst, _ = generate(CFG, 1)
    out = apply_sweep_override(CFG, inst, SweepOverride("material_efficiency_l", 1))
    assert all(it.material == it.weight == it.volume for it in out.items)
    out = apply_sweep_override(CFG, inst, SweepOverride("material_efficiency_l", 0))
    assert all(it.material == 0 for it in out.items)


def test_override_print_time():
    inst, _ = generate(CFG, 1)
    assert apply_sweep_override(CFG, inst, SweepOverride("print_time_m", 0)).printer.time_budget == 0
    half = apply_sweep_override(CFG, inst, SweepOverride("print_time_m", Fraction(1, 2)))
    assert half.printer.time_budget == round_half_away(mean_print_time(inst.items, inst.scenarios) / 2)
    full = apply_sweep_override(CFG, inst, SweepOverride("print_time_m", math.inf))
    need = max(sum(it.print_time * d for it, d in zip(inst.items, sc.demand)) for sc in inst.scenarios)
    assert full.printer.time_budget == need


def test_override_demand_limit():
    inst, trace = generate(CFG, 2)
    out = apply_sweep_override(CFG, inst, SweepOverride("demand_limit_D", 1), trace)
    assert all(d <= 1 for sc in out.scenarios for d in sc.demand)
    assert out.capacity_weight == out.capacity_volume == 100_000
    assert out.printer.time_budget == 4000
    with pytest.raises(ValueError, match="trace"):
        apply_sweep_override(CFG, inst, SweepOverride("demand_limit_D", 4))


@pytest.mark.parametrize("aspect, value", [
    ("alpha", Fraction(3, 2)), ("printer_size_k", 0), ("material_efficiency_l", 2),
    ("print_time_m", -1), ("demand_limit_D", Fraction(1, 2)),
])
def test_override_ranges(aspect, value):
    inst, trace = generate(CFG, 0)
    with pytest.raises(ValueError):
        apply_sweep_override(CFG, inst, SweepOverride(aspect, value), trace)


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(0, 5, 5)
    with pytest.raises(ValueError):
        SweepOverride("colour", 1)
    assert GenConfig(15, 20, 10).label == "N15D20S10"
