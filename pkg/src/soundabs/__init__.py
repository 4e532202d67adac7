"""Verify that a qualitative numerical planning abstraction is sound for a
low-level generalized planning domain, by generating first-order
verification conditions and discharging them with an SMT solver."""

__version__ = "0.1.0"
