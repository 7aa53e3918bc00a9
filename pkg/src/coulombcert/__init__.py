"""Certified relative equilibria and normal-mode nonresonance for rings of
unit charges around a fixed central charge."""

__version__ = "0.1.0"
