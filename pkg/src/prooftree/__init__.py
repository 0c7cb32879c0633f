"""Proof tree automata and proof tree graphs over multi-sorted term deduction systems."""

__version__ = "0.1.0"
