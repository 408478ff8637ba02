"""Generalized coherent states in truncated Fock space."""
__version__ = "0.1.0"
