"""Numerical model of a Lambda-ensemble quantum memory with angled control fields."""

__version__ = "0.1.0"
