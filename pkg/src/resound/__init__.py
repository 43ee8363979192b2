"""Soundness analysis for reset workflow nets."""

__version__ = "0.1.0"
