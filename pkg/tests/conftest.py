"""Shared fixtures and hypothesis strategies."""

from fractions import Fraction

import pytest
from hypothesis import strategies as st

from tss3dkp.model import Instance, Item, MaterialSpec, PrinterSpec, Scenario
from tss3dkp.samples import example_bound, example_packing


@pytest.fixture
def packing():
    return example_packing()


@pytest.fixture
def bound_example():
    return example_bound()


def make_instance(items, printer=(2, 2, 1), material=(1, 1), W=4, V=4, alpha=Fraction(4, 5),
                  scenarios=((1, (1,)),)):
    """Terse constructor: items as (w, v, r) or (w, v, r, m, t) tuples."""
    its = tuple(Item(*it[:3]) if len(it) == 3 else Item(it[0], it[1], it[2], True, it[3], it[4]) for it in items)
    return Instance(its, PrinterSpec(*printer), MaterialSpec(*material), W, V, alpha,
                    tuple(Scenario(q, d) for q, d in scenarios))


@st.composite
def tiny_instances(draw, max_items=3, max_scenarios=2, max_demand=2):
    n = draw(st.integers(1, max_items))
    items = []
    for _ in range(n):
        w, v = draw(st.integers(0, 3)), draw(st.integers(0, 3))
        w = max(w, 1) if v == 0 else w
        r = draw(st.integers(0, 5))
        if draw(st.booleans()):
            items.append(Item(w, v, r, True, draw(st.integers(0, 2)), draw(st.integers(0, 3))))
        else:
            items.append(Item(w, v, r))
    S = draw(st.integers(1, max_scenarios))
    weights = [draw(st.integers(1, 4)) for _ in range(S)]
    total = sum(weights)
    scenarios = tuple(Scenario(Fraction(k, total), tuple(draw(st.integers(0, max_demand)) for _ in range(n)))
                      for k in weights)
    return Instance(
        tuple(items),
        PrinterSpec(draw(st.integers(0, 3)), draw(st.integers(0, 3)), draw(st.integers(0, 4))),
        MaterialSpec(1, draw(st.integers(1, 2))),
        draw(st.integers(0, 8)), draw(st.integers(0, 8)),
        draw(st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(4, 5), Fraction(1)])),
        scenarios,
    )
