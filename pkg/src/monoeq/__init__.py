"""Stochastic versus realizable monotonicity on finite posets, in exact arithmetic."""

__version__ = "0.1.0"
