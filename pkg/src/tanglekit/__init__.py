"""Entanglement measures, bounds and SLOCC invariants for few-party states."""
