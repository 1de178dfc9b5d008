"""Workbench for CFI graphs, homomorphism counting and modular counting logic."""

__version__ = "0.1.0"
