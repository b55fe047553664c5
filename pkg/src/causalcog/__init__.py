"""Desk-scale testbed for causal representations and causal reinforcement learning."""

__version__ = "0.1.0"
