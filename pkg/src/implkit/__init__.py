"""Decision procedures for Nash implementability on finite environments."""

from .environment import Environment, Lottery, Scc, Scf, expected_utility, mix, unif, validate

__all__ = ["Environment", "Lottery", "Scc", "Scf", "expected_utility", "mix", "unif", "validate"]
__version__ = "0.1.0"
