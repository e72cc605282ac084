"""Meromorphic modular forms for twisted Heegner divisors, harmonic Maass Poincare series
and cycle integrals, computed numerically with explicit error control."""

from .specfun import DEFAULT, ConvergenceError, PrecisionConfig

__version__ = "0.1.0"
SCHEMA = "maass-periods/1"

__all__ = ["ConvergenceError", "PrecisionConfig", "DEFAULT", "SCHEMA", "__version__"]
