"""Exact and statistical tools for expansion of tensor and dual tensor codes."""

__version__ = "0.1.0"
