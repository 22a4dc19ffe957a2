"""Rental listing collection, cleaning and housing-market indicators."""

__version__ = "0.1.0"
