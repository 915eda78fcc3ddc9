"""Random instance generator (uncorrelated knapsack class) and sweep overrides.

Random numbers come from numpy's PCG64 seeded through ``SeedSequence``. Each
draw category gets its own child stream (``spawn_key``), and demand gets one
stream per item, so growing the item or scenario count leaves earlier draws
untouched.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .model import Instance, Item, MaterialSpec, PrinterSpec, Scenario, as_rational

__all__ = [
    "GenConfig",
    "GenTrace",
    "SweepOverride",
    "ASPECTS",
    "DEFAULT_GRIDS",
    "generate",
    "apply_sweep_override",
    "round_half_away",
    "mean_print_time",
]

# stream ids; never renumber, golden files depend on them
_WEIGHT, _REWARD, _VOLUME, _TIME, _MATERIAL, _PRINTABLE = 0, 1, 2, 3, 4, 5
_DEMAND_LIMIT, _DEMAND, _TIME_BUDGET, _CAP_WEIGHT, _CAP_VOLUME = 6, 7, 8, 9, 10

ASPECTS = ("alpha", "printer_size_k", "material_efficiency_l", "print_time_m", "demand_limit_D")

DEFAULT_GRIDS = {
    "alpha": tuple(Fraction(k, 10) for k in range(1, 11)),
    "printer_size_k": (2, 3, 5, 10, 20, 30, 40, 50, math.inf),
    "material_efficiency_l": tuple(Fraction(k, 10) for k in range(0, 11)),
    "print_time_m": tuple(Fraction(k, 10) for k in range(0, 11)) + (math.inf,),
    "demand_limit_D": tuple(2**k for k in range(18)),
}

FIXED_CAPACITY = 100_000
FIXED_TIME_BUDGET = 4000


def round_half_away(x) -> int:
    """Nearest integer, ties away from zero; exact for Fractions."""
    x = Fraction(x)
    r = math.floor(abs(x) + Fraction(1, 2))
    return r if x >= 0 else -r


@dataclass(frozen=True)
class GenConfig:
    n_items: int
    demand_limit: int
    n_scenarios: int
    alpha: Fraction = Fraction(4, 5)
    printer_weight: int = 5000
    printer_volume: int = 5000
    pisinger_range: int = 1000
    printable_fraction: Fraction = Fraction(1)
    # a print takes at least this long; 0 allows instantaneous prints
    min_print_time: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_rational(self.alpha))
        object.__setattr__(self, "printable_fraction", as_rational(self.printable_fraction))
        if self.n_items < 1 or self.n_scenarios < 1 or self.demand_limit < 1 or self.pisinger_range < 1:
            raise ValueError("item count, scenario count, demand limit and range must all be >= 1")
        if not 0 <= self.alpha <= 1 or not 0 <= self.printable_fraction <= 1:
            raise ValueError("alpha and printable_fraction must lie in [0, 1]")
        if self.min_print_time < 0:
            raise ValueError("min_print_time must be >= 0")

    @property
    def label(self) -> str:
        return f"N{self.n_items}D{self.demand_limit}S{self.n_scenarios}"


@dataclass(frozen=True)
class GenTrace:
    seed: int
    demand_limits: tuple[int, ...]
    capacity_weight: int
    capacity_volume: int
    time_budget: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["demand_limits"] = list(self.demand_limits)
        return d


@dataclass(frozen=True)
class SweepOverride:
    aspect: str
    value: object

    def __post_init__(self):
        if self.aspect not in ASPECTS:
            raise ValueError(f"unknown aspect {self.aspect!r}; expected one of {', '.join(ASPECTS)}")
        v = self.value
        if not (isinstance(v, float) and math.isinf(v)):
            v = as_rational(v)
        object.__setattr__(self, "value", v)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _uniform_times(rng: np.random.Generator, lo: float, hi: float, base) -> int:
    return round_half_away(Fraction(float(rng.uniform(lo, hi))) * base)


def mean_print_time(items, scenarios) -> Fraction:
    """Probability-weighted total print time of all printable demand."""
    return sum((sc.probability * sum(it.print_time * d for it, d in zip(items, sc.demand) if it.printable)
                for sc in scenarios), Fraction(0))


def _demands(config: GenConfig, seed: int) -> tuple[list[int], list[Scenario]]:
    limit_rng = _stream(seed, _DEMAND_LIMIT)
    limits = [_uniform_times(limit_rng, 1, config.demand_limit, 1) for _ in range(config.n_items)]
    table = []
    for i, u in enumerate(limits):
        rng = _stream(seed, _DEMAND, i)
        table.append([_uniform_times(rng, 0, u, 1) for _ in range(config.n_scenarios)])
    q = Fraction(1, config.n_scenarios)
    scenarios = [Scenario(q, tuple(table[i][s] for i in range(config.n_items))) for s in range(config.n_scenarios)]
    return limits, scenarios


def generate(config: GenConfig, seed: int) -> tuple[Instance, GenTrace]:
    """Draw one instance; identical ``(config, seed)`` pairs give identical output."""
    n, R = config.n_items, config.pisinger_range
    rw, rr, rv = _stream(seed, _WEIGHT), _stream(seed, _REWARD), _stream(seed, _VOLUME)
    rt, rm, rp = _stream(seed, _TIME), _stream(seed, _MATERIAL), _stream(seed, _PRINTABLE)

    weights = [int(rw.integers(1, R, endpoint=True)) for _ in range(n)]
    rewards = [int(rr.integers(1, R, endpoint=True)) for _ in range(n)]
    volumes = [_uniform_times(rv, 0.2, 5, w) for w in weights]
    times = [max(config.min_print_time, _uniform_times(rt, 0, 10, 1)) for _ in range(n)]
    materials = [_uniform_times(rm, 0.5, 0.9, min(w, v)) for w, v in zip(weights, volumes)]
    printable = [Fraction(float(rp.random())) < config.printable_fraction for _ in range(n)]
    items = tuple(
        Item(w, v, r, True, m, t) if p else Item(w, v, r)
        for w, v, r, m, t, p in zip(weights, volumes, rewards, materials, times, printable)
    )

    limits, scenarios = _demands(config, seed)
    T = _uniform_times(_stream(seed, _TIME_BUDGET), 0.2, 1, mean_print_time(items, scenarios))
    mean_weight = sum((sc.probability * sum(it.weight * d for it, d in zip(items, sc.demand)) for sc in scenarios),
                      Fraction(0))
    W = _uniform_times(_stream(seed, _CAP_WEIGHT), 0.5, 1, mean_weight)
    V = _uniform_times(_stream(seed, _CAP_VOLUME), 0.5, 2, W)

    instance = Instance(items, PrinterSpec(config.printer_weight, config.printer_volume, T), MaterialSpec(1, 1),
                        W, V, config.alpha, tuple(scenarios))
    return instance, GenTrace(seed, tuple(limits), W, V, T)


def _check_grid(override: SweepOverride) -> None:
    v = override.value
    a = override.aspect
    if a == "alpha" and not 0 <= v <= 1:
        raise ValueError(f"alpha {v} outside [0, 1]")
    if a == "printer_size_k" and not v > 0:
        raise ValueError(f"printer size factor k={v} must be positive")
    if a == "material_efficiency_l" and not (v != math.inf and 0 <= v <= 1):
        raise ValueError(f"material factor l={v} outside [0, 1]")
    if a == "print_time_m" and not v >= 0:
        raise ValueError(f"print time factor m={v} must be >= 0")
    if a == "demand_limit_D" and not (v != math.inf and v >= 1 and Fraction(v).denominator == 1):
        raise ValueError(f"demand limit D={v} must be a positive integer")


def apply_sweep_override(config: GenConfig, instance: Instance, override: SweepOverride,
                         trace: Optional[GenTrace] = None) -> Instance:
    """Vary one aspect of a generated instance.

    ``demand_limit_D`` redraws demand from the original seed, so it needs the
    instance's ``trace``.
    """
    _check_grid(override)
    v = override.value
    a = override.aspect
    if a == "alpha":
        return replace(instance, alpha=v)
    if a == "printer_size_k":
        if v == math.inf:
            printer = replace(instance.printer, weight=0, volume=0)
        else:
            printer = replace(instance.printer, weight=round_half_away(Fraction(instance.capacity_weight) / v),
                              volume=round_half_away(Fraction(instance.capacity_volume) / v))
        return replace(instance, printer=printer)
    if a == "material_efficiency_l":
        items = tuple(
            replace(it, volume=it.weight, material=round_half_away(v * it.weight) if it.printable else None)
            for it in instance.items
        )
        return replace(instance, items=items, material=MaterialSpec(1, 1))
    if a == "print_time_m":
        if v == math.inf:
            T = max(sum(it.print_time * d for it, d in zip(instance.items, sc.demand) if it.printable)
                    for sc in instance.scenarios)
        else:
            T = round_half_away(v * mean_print_time(instance.items, instance.scenarios))
        return replace(instance, printer=replace(instance.printer, time_budget=T))
    # demand_limit_D
    if trace is None:
        raise ValueError("the demand_limit_D override needs the generation trace (seed)")
    _, scenarios = _demands(replace(config, demand_limit=int(v)), trace.seed)
    return replace(instance, scenarios=tuple(scenarios), capacity_weight=FIXED_CAPACITY,
                   capacity_volume=FIXED_CAPACITY, printer=replace(instance.printer, time_budget=FIXED_TIME_BUDGET))
