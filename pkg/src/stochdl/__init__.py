"""Stochastic differential dynamic logic: syntax, substitution, semantics,
a proof kernel and randomized validity testing."""

__version__ = "0.1.0"
