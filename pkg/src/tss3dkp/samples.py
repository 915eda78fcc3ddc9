"""The two small worked instances shipped with the package."""

from __future__ import annotations

from importlib import resources

from .fileio import instance_from_text
from .model import Instance

__all__ = ["SAMPLES", "load_sample", "example_packing", "example_bound"]

SAMPLES = ("example_packing", "example_bound")


def load_sample(name: str) -> Instance:
    if name not in SAMPLES:
        raise KeyError(f"unknown sample {name!r}; choose from {', '.join(SAMPLES)}")
    text = resources.files(__package__).joinpath("data", f"{name}.json").read_text(encoding="utf-8")
    return instance_from_text(text)


def example_packing() -> Instance:
    """Two printable items, two scenarios; taking a printer is optimal (value 26/25)."""
    return load_sample("example_packing")


def example_bound() -> Instance:
    """Printer-bound illustration: per-scenario counts (2, 3), U = 3, Z = 2.

    Only demand, capacities, printer data and print times matter for the
    bound; the remaining fields hold placeholder values.
    """
    return load_sample("example_bound")
